//! Fiber spectra along a line of hopping strengths.

use serde::Serialize;

use super::fiber::{fiber_operator, fiber_spectrum, SpectrumOptions, OUTLIER_TOL};
use super::{RelativeWindow, SectorParams};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// `n` equally spaced points from `a` to `b`, both included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub window: usize,
    pub exec: Execution,
    pub tol: f64,
}

impl SweepOptions {
    pub fn new(window: usize) -> Self {
        SweepOptions { window, exec: Execution::Parallel, tol: OUTLIER_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub radius: f64,
    pub eigenvalues: Vec<f64>,
    pub outliers: Vec<f64>,
}

impl SweepPoint {
    pub fn is_outlier(&self, e: f64, tol: f64) -> bool {
        e.abs() > self.radius + tol
    }
}

/// Fiber spectrum of `base.with_lambda(l)` for each `l`, in input order.
pub fn sweep(base: &SectorParams, lambdas: &[f64], opts: &SweepOptions) -> Result<Vec<SweepPoint>> {
    base.validate()?;
    let window = RelativeWindow::new(opts.window)?;
    if let Some(l) = lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::InvalidArgument(format!("invalid lambda {l}")));
    }
    // Points run in parallel; each spectrum solves its blocks sequentially.
    let inner = SpectrumOptions { exec: Execution::Sequential, vectors: false, tol: opts.tol };
    exec::try_map(opts.exec, lambdas, |&lambda| {
        let op = fiber_operator(&base.with_lambda(lambda), &window)?;
        let s = fiber_spectrum(&op, &inner)?;
        Ok(SweepPoint { lambda, radius: s.radius, outliers: s.outlier_energies(), eigenvalues: s.eigenvalues })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub lambdas: Vec<f64>,
    pub outlier_counts: Vec<usize>,
    /// Maximal runs of consecutive sweep points with exactly four outliers,
    /// as `(first lambda, last lambda)`.
    pub four_outlier_runs: Vec<(f64, f64)>,
}

impl SweepSummary {
    pub fn new(points: &[SweepPoint]) -> Self {
        let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
        let outlier_counts: Vec<usize> = points.iter().map(|p| p.outliers.len()).collect();
        let mut runs = Vec::new();
        let mut start: Option<usize> = None;
        for i in 0..=points.len() {
            let four = i < points.len() && outlier_counts[i] == 4;
            match (four, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((lambdas[s], lambdas[i - 1]));
                    start = None;
                }
                _ => {}
            }
        }
        SweepSummary { lambdas, outlier_counts, four_outlier_runs: runs }
    }
}
