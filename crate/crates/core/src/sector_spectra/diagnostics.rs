//! Finite-volume diagnostics for the essential band: outliers, localization,
//! and convergence of the counting function.

use std::f64::consts::PI;

use serde::Serialize;

use super::fiber::{essential_band, fiber_operator, fiber_spectrum, SpectrumOptions, OUTLIER_TOL};
use super::{cos2, RelativeWindow, SectorParams};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Number of entries of `eigs` that are `<= x`.
pub fn counting_function(eigs: &[f64], x: f64) -> usize {
    eigs.iter().filter(|&&e| e <= x).count()
}

/// `sup_x |N_a(x) - N_b(x)|` with both counting functions restricted to
/// eigenvalues in `[lo, hi]`.
pub fn counting_difference(a: &[f64], b: &[f64], lo: f64, hi: f64) -> usize {
    let inside = |v: &[f64]| {
        let mut w: Vec<f64> = v.iter().cloned().filter(|e| (lo..=hi).contains(e)).collect();
        w.sort_by(f64::total_cmp);
        w
    };
    let (a, b) = (inside(a), inside(b));
    let mut points: Vec<f64> = a.iter().chain(&b).cloned().collect();
    points.sort_by(f64::total_cmp);
    points
        .iter()
        .map(|&x| {
            let na = a.partition_point(|&e| e <= x);
            let nb = b.partition_point(|&e| e <= x);
            na.abs_diff(nb)
        })
        .max()
        .unwrap_or(0)
}

/// Distribution function of `2a cos p + 2b cos q` for `p, q` uniform on
/// `[0, pi)`: the integrated density of states of the free fiber with hops
/// `a`, `b`. Midpoint rule in `p` with `nodes` points.
pub fn free_cdf(a: f64, b: f64, e: f64, nodes: usize) -> f64 {
    let inner = |t: f64| -> f64 {
        if b == 0.0 {
            return if t >= 0.0 { 1.0 } else { 0.0 };
        }
        let u = (t / (2.0 * b.abs())).clamp(-1.0, 1.0);
        1.0 - u.acos() / PI
    };
    if a == 0.0 {
        return inner(e);
    }
    let n = nodes.max(1);
    let h = PI / n as f64;
    (0..n).map(|i| inner(e - 2.0 * a * ((i as f64 + 0.5) * h).cos())).sum::<f64>() / n as f64
}

/// Kolmogorov distance between the empirical distribution of `eigs` and a
/// continuous `cdf`.
pub fn kolmogorov_distance<F: Fn(f64) -> f64>(eigs: &[f64], cdf: F) -> f64 {
    let mut v = eigs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        d = d.max((i as f64 / n - f).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

/// Largest spacing between consecutive points of `eigs` inside `[lo, hi]`,
/// the interval ends included.
pub fn max_band_gap(eigs: &[f64], lo: f64, hi: f64) -> f64 {
    let mut pts: Vec<f64> = eigs.iter().cloned().filter(|e| (lo..=hi).contains(e)).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoBoundStateEntry {
    pub l: usize,
    pub outliers: usize,
    /// `max |E| - R`; non-positive when the spectrum stays in the band.
    pub max_excursion: f64,
    pub ipr_max: f64,
    pub kolmogorov: f64,
    pub max_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoBoundStateReport {
    pub params: SectorParams,
    pub radius: f64,
    pub entries: Vec<NoBoundStateEntry>,
    pub no_outliers: bool,
    pub ipr_decreasing: bool,
    pub kolmogorov_decreasing: bool,
}

impl NoBoundStateReport {
    pub fn pass(&self) -> bool {
        self.no_outliers && self.ipr_decreasing
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Diagonalizes the `rho = 0` fiber for each window size, with eigenvectors.
pub fn no_bound_state_check(p: &SectorParams, windows: &[usize], exec: Execution) -> Result<NoBoundStateReport> {
    p.validate()?;
    if p.rho != 0.0 {
        return Err(Error::InvalidArgument("the check applies to rho = 0".into()));
    }
    if cos2(p.kx) == 0.0 && cos2(p.ky) == 0.0 {
        return Err(Error::InvalidArgument("momentum is a Dirac point".into()));
    }
    if windows.is_empty() {
        return Err(Error::InvalidArgument("no window sizes given".into()));
    }
    let radius = essential_band(p).1;
    let (a, b) = (2.0 * p.lambda * cos2(p.kx), 2.0 * p.lambda * cos2(p.ky));
    let opts = SpectrumOptions { exec, vectors: true, tol: OUTLIER_TOL };
    let mut entries = Vec::with_capacity(windows.len());
    for &l in windows {
        let op = fiber_operator(p, &RelativeWindow::new(l)?)?;
        let s = fiber_spectrum(&op, &opts)?;
        let max_abs = s.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        entries.push(NoBoundStateEntry {
            l,
            outliers: s.outliers.len(),
            max_excursion: max_abs - radius,
            ipr_max: s.ipr_max.unwrap_or(f64::NAN),
            kolmogorov: kolmogorov_distance(&s.eigenvalues, |e| free_cdf(a, b, e, 4096)),
            max_gap: max_band_gap(&s.eigenvalues, -radius, radius),
        });
    }
    let iprs: Vec<f64> = entries.iter().map(|e| e.ipr_max).collect();
    let ks: Vec<f64> = entries.iter().map(|e| e.kolmogorov).collect();
    Ok(NoBoundStateReport {
        params: *p,
        radius,
        no_outliers: entries.iter().all(|e| e.outliers == 0),
        ipr_decreasing: strictly_decreasing(&iprs),
        kolmogorov_decreasing: strictly_decreasing(&ks),
        entries,
    })
}
