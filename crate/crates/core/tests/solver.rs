use ctp_alm::alm::{solve, solve_with_observer, AlmConfig, AlmState, IterationRecord, SolveStatus, DIVERGENCE_PATIENCE};
use ctp_alm::inner::{solve_subproblem, NodeStatus};
use ctp_alm::problem::{builtin, ProblemDefinition};
use ctp_alm::timegrid::Trajectory;

fn constant(p: &ProblemDefinition, nodes: usize, x0: &[f64], v0: &[f64]) -> (Trajectory, Trajectory, Trajectory) {
    let grid = p.grid(nodes).unwrap();
    (
        Trajectory::constant(&grid, x0).unwrap(),
        Trajectory::constant(&grid, &vec![1.0; p.p()]).unwrap(),
        Trajectory::constant(&grid, v0).unwrap(),
    )
}

fn traced(p: &ProblemDefinition, cfg: &AlmConfig, x0: &[f64], v0: &[f64]) -> (Vec<IterationRecord>, Vec<AlmState>, SolveStatus) {
    let (x, u, v) = constant(p, 85, x0, v0);
    let mut records = Vec::new();
    let mut states = Vec::new();
    let report = solve_with_observer(p, cfg, &x, &u, &v, |r, s| {
        records.push(r.clone());
        states.push(s.clone());
    })
    .unwrap();
    assert_eq!(records, report.iterations);
    (records, states, report.status)
}

#[test]
fn penalty_grows_exactly_when_progress_test_fails_or_a_node_diverges() {
    let p = builtin("ex4").unwrap();
    let (records, _, _) = traced(&p, &AlmConfig::default(), &[1.0, 1.0], &[1.0; 5]);
    assert!(records.len() > 2);
    for w in records.windows(2) {
        let grew = w[1].rho > w[0].rho;
        let expected = !w[0].progress_test_passed || w[0].inner_status == NodeStatus::Diverged;
        assert_eq!(grew, expected, "k = {}", w[0].k);
        assert!(w[1].rho >= w[0].rho);
    }
}

#[test]
fn projection_is_identity_with_huge_boxes() {
    for (name, x0, v0) in [("ex1", vec![1.0, 1.0], vec![1.0, 1.0]), ("ex2", vec![0.5, 0.5], vec![1.0; 3])] {
        let p = builtin(name).unwrap();
        let (_, states, status) = traced(&p, &AlmConfig::default(), &x0, &v0);
        assert_eq!(status, SolveStatus::AkktConverged);
        for w in states.windows(2) {
            assert_eq!(w[1].u_tilde, w[0].u, "{name}");
            assert_eq!(w[1].v_tilde, w[0].v, "{name}");
        }
    }
}

#[test]
fn tight_boxes_hold_the_safeguarded_multipliers() {
    let p = builtin("ex3").unwrap();
    let cfg = AlmConfig {
        bound_m: 2.0,
        bound_n: 3.0,
        max_outer: 30,
        ..AlmConfig::default()
    };
    let (_, states, _) = traced(&p, &cfg, &[0.5, 0.5, 0.5], &[1.0, 1.0]);
    for s in &states {
        assert!(s.u_tilde.values().iter().all(|u| u.abs() <= 2.0));
        assert!(s.v_tilde.values().iter().all(|v| (0.0..=3.0).contains(v)));
        assert!(s.v.values().iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn final_objective_is_near_zero_for_smooth_examples() {
    for (name, x0, v0) in [("ex1", vec![1.0, 1.0], vec![1.0, 1.0]), ("ex2", vec![0.5, 0.5], vec![1.0; 3])] {
        let p = builtin(name).unwrap();
        let (records, _, _) = traced(&p, &AlmConfig::default(), &x0, &v0);
        assert!(records.last().unwrap().objective.abs() <= 1e-3, "{name}");
    }
}

#[test]
fn converged_status_meets_thresholds() {
    let p = builtin("ex4").unwrap();
    let cfg = AlmConfig::default();
    let (records, _, status) = traced(&p, &cfg, &[1.0, 1.0], &[1.0; 5]);
    assert_eq!(status, SolveStatus::AkktConverged);
    let r = records.last().unwrap().residuals;
    assert!(r.stationarity_l1 <= cfg.eps_stop && r.complementarity_sup <= cfg.eps_stop);
    assert!(r.multiplier_min.unwrap() >= 0.0);
}

#[test]
fn thread_count_does_not_change_the_log() {
    let p = builtin("ex4").unwrap();
    let (x, u, v) = constant(&p, 85, &[1.0, 1.0], &[1.0; 5]);
    let run = |threads| {
        let cfg = AlmConfig {
            threads,
            max_outer: 40,
            ..AlmConfig::default()
        };
        solve(&p, &cfg, &x, &u, &v).unwrap()
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.x, b.x);
}

#[test]
fn persistent_divergence_ends_in_inner_failure() {
    let p = ProblemDefinition::builder("concave", 1, 1.0)
        .objective(|x, _| -x[0] * x[0], |x, _, d| d[0] = -2.0 * x[0], false)
        .build()
        .unwrap();
    let grid = p.grid(5).unwrap();
    let empty = Trajectory::zeros(&grid, 0);
    let report = solve(&p, &AlmConfig::default(), &Trajectory::constant(&grid, &[1.0]).unwrap(), &empty, &empty).unwrap();
    assert_eq!(report.status, SolveStatus::InnerFailure);
    assert_eq!(report.iterations.len(), DIVERGENCE_PATIENCE);
    assert!(report.iterations.iter().all(|r| r.inner_status == NodeStatus::Diverged));
    assert!(report.iterations.windows(2).all(|w| w[1].rho > w[0].rho));
}

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

#[test]
fn warm_start_needs_no_more_inner_iterations_than_cold_start() {
    let p = builtin("ex4").unwrap();
    let cfg = AlmConfig::default();
    let (records, states, _) = traced(&p, &cfg, &[1.0, 1.0], &[1.0; 5]);
    let zeros = Trajectory::zeros(states[0].x.grid(), p.n());
    let cold: Vec<usize> = states
        .iter()
        .map(|s| {
            solve_subproblem(&p, s.x.grid(), &zeros, &s.u_tilde, &s.v_tilde, s.rho, &cfg.inner)
                .unwrap()
                .total_iterations()
        })
        .collect();
    let warm: Vec<usize> = records.iter().map(|r| r.inner_iterations).collect();
    assert!(median(warm.clone()) <= median(cold.clone()), "warm {warm:?} cold {cold:?}");
}
