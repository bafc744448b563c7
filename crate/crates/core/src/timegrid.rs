//! Uniform time grids on `[0, T]`, node-sampled trajectories, and the
//! quadrature and norms every other module is built on.
//!
//! All reductions run in ascending node order so results are bit-for-bit
//! reproducible no matter how the samples were produced.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Uniform node set `t_i = i T / (N - 1)`, `i = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, node_count: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::invalid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if node_count < 2 {
            return Err(Error::invalid(format!(
                "a grid needs at least 2 nodes, got {node_count}"
            )));
        }
        let last = (node_count - 1) as f64;
        let mut nodes: Vec<f64> = (0..node_count)
            .map(|i| i as f64 * horizon / last)
            .collect();
        nodes[node_count - 1] = horizon;
        Ok(Self { horizon, nodes })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.horizon / (self.nodes.len() - 1) as f64
    }

    /// Composite trapezoid rule over per-node samples.
    pub fn trapezoid(&self, samples: &[f64]) -> f64 {
        assert_eq!(samples.len(), self.nodes.len(), "one sample per node");
        let n = samples.len();
        let interior: f64 = samples[1..n - 1].iter().sum();
        self.spacing() * (interior + 0.5 * (samples[0] + samples[n - 1]))
    }
}

/// Same as [`TimeGrid::uniform`].
pub fn make_uniform_grid(horizon: f64, node_count: usize) -> Result<TimeGrid> {
    TimeGrid::uniform(horizon, node_count)
}

/// A vector-valued function sampled at every node of a grid, stored
/// row-major (`node_count x dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() * dim {
            return Err(Error::invalid(format!(
                "expected {} x {} samples, got {}",
                grid.node_count(),
                dim,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite sample at node {}, component {}",
                i / dim.max(1),
                i % dim.max(1)
            )));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn zeros(grid: &TimeGrid, dim: usize) -> Self {
        Self {
            values: vec![0.0; grid.node_count() * dim],
            grid: grid.clone(),
            dim,
        }
    }

    /// Broadcasts one vector to every node.
    pub fn constant(grid: &TimeGrid, value: &[f64]) -> Result<Self> {
        let values = value
            .iter()
            .copied()
            .cycle()
            .take(value.len() * grid.node_count())
            .collect();
        Self::new(grid.clone(), value.len(), values)
    }

    pub fn from_fn<F>(grid: &TimeGrid, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Vec<f64>,
    {
        let mut values = Vec::with_capacity(grid.node_count() * dim);
        for &t in grid.nodes() {
            let row = f(t);
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "sample at t = {t} has {} components, expected {dim}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::new(grid.clone(), dim, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn row_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, so empty rows are produced explicitly
        (0..self.node_count()).map(move |i| self.row(i))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("t");
        for d in 0..self.dim {
            header.push_str(&format!(",c{d}"));
        }
        writeln!(out, "{header}")?;
        for (i, &t) in self.grid.nodes().iter().enumerate() {
            write!(out, "{}", fmt_f64(t))?;
            for v in self.row(i) {
                write!(out, ",{}", fmt_f64(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a `t,c0,c1,...` table. The time column must describe a uniform
    /// grid starting at 0; the horizon is taken from the last row.
    pub fn read_csv<R: BufRead>(input: R, label: &Path) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: label.to_path_buf(),
            line,
            msg,
        };
        let mut lines = input.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => return Err(parse_err(1, "empty file, expected a header row".into())),
                Some((i, line)) => {
                    let line = line.map_err(|e| Error::io(label, e))?;
                    if !line.trim().is_empty() {
                        break (i + 1, line);
                    }
                }
            }
        };
        let columns: Vec<&str> = header.1.split(',').map(str::trim).collect();
        if columns.first() != Some(&"t") {
            return Err(parse_err(header.0, "first header column must be `t`".into()));
        }
        let dim = columns.len() - 1;

        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(label, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != dim + 1 {
                return Err(parse_err(
                    lineno,
                    format!("expected {} fields, found {}", dim + 1, fields.len()),
                ));
            }
            let mut parsed = Vec::with_capacity(fields.len());
            for f in &fields {
                let v: f64 = f
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("not a number: `{f}`")))?;
                if !v.is_finite() {
                    return Err(parse_err(lineno, format!("non-finite value `{f}`")));
                }
                parsed.push(v);
            }
            times.push(parsed[0]);
            values.extend_from_slice(&parsed[1..]);
        }
        if times.len() < 2 {
            return Err(parse_err(
                header.0 + times.len() + 1,
                format!("need at least 2 data rows, found {}", times.len()),
            ));
        }
        let horizon = *times.last().unwrap();
        let grid = TimeGrid::uniform(horizon, times.len())
            .map_err(|e| parse_err(header.0 + times.len(), e.to_string()))?;
        let tol = 1e-9 * horizon;
        for (k, (&t, &expected)) in times.iter().zip(grid.nodes()).enumerate() {
            if (t - expected).abs() > tol {
                return Err(parse_err(
                    header.0 + k + 1,
                    format!("time {t} is off the uniform grid (expected {expected})"),
                ));
            }
        }
        Self::new(grid, dim, values)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(BufReader::new(file), path)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Composite trapezoid integral of a scalar trajectory.
pub fn trapezoid_integral(samples: &Trajectory) -> Result<f64> {
    if samples.dim() != 1 {
        return Err(Error::invalid(format!(
            "trapezoid_integral needs a scalar trajectory, got dim {}",
            samples.dim()
        )));
    }
    Ok(samples.grid().trapezoid(samples.values()))
}

/// Discrete `∫ ‖v(t)‖₁ dt`.
pub fn l1_time_norm(v: &Trajectory) -> f64 {
    let pointwise: Vec<f64> = v.rows().map(|r| r.iter().map(|x| x.abs()).sum()).collect();
    v.grid().trapezoid(&pointwise)
}

/// `max_{i,d} |v(t_i)_d|`.
pub fn sup_node_norm(v: &Trajectory) -> f64 {
    v.values().iter().fold(0.0, |m, x| m.max(x.abs()))
}
