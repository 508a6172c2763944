//! Bound states of the pair fiber on the lines `k_y = pi/4` and `k_x = pi/4`:
//! transfer-matrix solution, gap, and comparison with the truncated fiber.

use std::f64::consts::FRAC_PI_4;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sector_spectra::{cos2, fiber_operator, fiber_spectrum, RelativeWindow, SectorParams, SpectrumOptions};

/// `T = [[E, -1], [1, 0]]`, which maps `(phi_n, phi_{n-1})` to `(phi_{n+1}, phi_n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    pub matrix: [[f64; 2]; 2],
    pub tau_plus: Complex64,
    pub tau_minus: Complex64,
}

impl TransferMatrix {
    /// `(tau, 1)`.
    pub fn eigenvector(tau: Complex64) -> [Complex64; 2] {
        [tau, Complex64::new(1.0, 0.0)]
    }
}

pub fn transfer_matrix(e: f64) -> TransferMatrix {
    let root = Complex64::new(e * e - 4.0, 0.0).sqrt();
    TransferMatrix {
        matrix: [[e, -1.0], [1.0, 0.0]],
        tau_plus: (e + root) / 2.0,
        tau_minus: (e - root) / 2.0,
    }
}

/// Boundary hop `b_j` between `-1` and `+1` in row `j`.
pub fn boundary_hop(j: i64, phase: Complex64, r: f64) -> Result<Complex64> {
    if j.rem_euclid(2) != 1 {
        return Err(Error::InvalidArgument(format!("row {j} is not odd")));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(match j {
        j if j < -1 => phase,
        -1 => phase * (1.0 + r),
        1 => one * (1.0 + r),
        _ => one,
    })
}

/// Unit hops by two on the odd sites `|x| <= 2n - 1`, except
/// `<-1|Delta|+1> = b_j`.
pub fn delta_matrix(j: i64, phase: Complex64, r: f64, n: usize) -> Result<Mat<Complex64>> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("truncation {n} is below 4")));
    }
    let bj = boundary_hop(j, phase, r)?;
    let m = 2 * n;
    let mut d = Mat::<Complex64>::zeros(m, m);
    for i in 0..m - 1 {
        let v = if i + 1 == n { bj } else { Complex64::new(1.0, 0.0) };
        d[(i, i + 1)] = v;
        d[(i + 1, i)] = v.conj();
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundStateResult {
    /// Ascending, with multiplicity.
    pub energies: Vec<f64>,
    /// `|1 + rho/lambda|`.
    pub b: f64,
    /// `1/B` when bound states exist.
    pub localization_rate: Option<f64>,
}

fn ratio(lambda: f64, rho: f64) -> Result<f64> {
    if !lambda.is_finite() || !rho.is_finite() {
        return Err(Error::InvalidArgument("couplings must be finite".into()));
    }
    if lambda == 0.0 {
        return Err(Error::InvalidArgument("lambda = 0 leaves rho/lambda undefined".into()));
    }
    Ok(rho / lambda)
}

fn line_result(lambda: f64, rho: f64, k: f64, copies: usize) -> Result<BoundStateResult> {
    let b = (1.0 + ratio(lambda, rho)?).abs();
    if b <= 1.0 {
        return Ok(BoundStateResult { energies: Vec::new(), b, localization_rate: None });
    }
    let e = 2.0 * lambda * cos2(k).abs() * (b + 1.0 / b);
    let mut energies = vec![-e; copies];
    energies.extend(vec![e; copies]);
    Ok(BoundStateResult { energies, b, localization_rate: Some(1.0 / b) })
}

/// On `k_y = pi/4`: `+-2 lambda |cos 2k_x| (B + 1/B)`, each twice (rows `j = +-1`).
pub fn bound_state_energies(lambda: f64, rho: f64, kx: f64, phase: Complex64) -> Result<BoundStateResult> {
    if (phase.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("phase {phase} is not unimodular")));
    }
    if cos2(kx) == 0.0 {
        return Err(Error::InvalidArgument(format!("k_x = {kx} is a degenerate momentum")));
    }
    line_result(lambda, rho, kx, 2)
}

/// Distance from the bound states to the band edge `+-2 lambda |cos 2k_x| * 2`.
pub fn gap(lambda: f64, rho: f64, kx: f64) -> Result<f64> {
    let b = (1.0 + ratio(lambda, rho)?).abs();
    if b <= 1.0 {
        return Err(Error::InvalidArgument(format!("no bound state for B = {b}")));
    }
    Ok(2.0 * lambda * cos2(kx).abs() * (b + 1.0 / b - 2.0))
}

/// On `k_x = pi/4`, restricted to the range of the projection onto the
/// columns `d_x = +-1` in their reduced form `2 lambda cos(2k_y)(Delta + r sigma^x)`:
/// one pair `+-2 lambda |cos 2k_y| (B + 1/B)`.
pub fn ky_line_energies(lambda: f64, rho: f64, ky: f64) -> Result<BoundStateResult> {
    line_result(lambda, rho, ky, 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Line {
    /// `k = (k, pi/4)`.
    Kx,
    /// `k = (pi/4, k)`.
    Ky,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineComparison {
    pub line: Line,
    pub params: SectorParams,
    pub window: usize,
    pub analytic: BoundStateResult,
    /// Fiber eigenvalues outside the essential band, ascending.
    pub numeric: Vec<f64>,
    /// Largest distance from a numeric outlier to the nearest analytic energy.
    pub max_error: Option<f64>,
    pub gap: Option<f64>,
    /// `|psi(x + 2)| / |psi(x)|` along the line direction, measured on the
    /// top outlier four steps away from its peak.
    pub tail_ratio: Option<f64>,
    /// Expected outlier count and `max_error <= 1e-8`.
    pub converged: bool,
}

/// Diagonalizes the fiber on the given line and matches its outliers with
/// the transfer-matrix energies. The fiber has four outliers on either line
/// when `B > 1`.
pub fn compare_line(
    line: Line,
    lambda: f64,
    rho: f64,
    k: f64,
    phase: Complex64,
    window: usize,
    exec: Execution,
) -> Result<LineComparison> {
    let (analytic, kk) = match line {
        Line::Kx => (bound_state_energies(lambda, rho, k, phase)?, (k, FRAC_PI_4)),
        Line::Ky => (ky_line_energies(lambda, rho, k)?, (FRAC_PI_4, k)),
    };
    let params = SectorParams::new(phase, lambda, rho, 0.0, kk.0, kk.1)?;
    let w = RelativeWindow::new(window)?;
    let op = fiber_operator(&params, &w)?;
    let spec = fiber_spectrum(&op, &SpectrumOptions { exec, vectors: true, ..Default::default() })?;
    let numeric = spec.outlier_energies();
    let max_error = (!numeric.is_empty() && !analytic.energies.is_empty()).then(|| {
        numeric
            .iter()
            .map(|x| analytic.energies.iter().map(|a| (x - a).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    });
    let expected = if analytic.energies.is_empty() { 0 } else { 4 };
    let converged = numeric.len() == expected && max_error.map_or(expected == 0, |e| e <= 1e-8);
    let step = match line {
        Line::Kx => (2, 0),
        Line::Ky => (0, 2),
    };
    let tail_ratio = spec
        .outliers
        .last()
        .and_then(|o| o.vector.as_ref())
        .and_then(|v| tail_ratio(&w, v, step, 4));
    let gap = (analytic.b > 1.0).then(|| gap(lambda, rho, k)).transpose()?;
    Ok(LineComparison { line, params, window, analytic, numeric, max_error, gap, tail_ratio, converged })
}

/// Ratio `|psi(s + step)| / |psi(s)|` at `s = peak + offset * step`, walking
/// away from the origin.
pub fn tail_ratio(w: &RelativeWindow, v: &[Complex64], step: (i64, i64), offset: i64) -> Option<f64> {
    let peak = (0..v.len()).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))?;
    let (px, py) = w.site(peak);
    let dir = if (px * step.0 + py * step.1) < 0 { -1 } else { 1 };
    let at = |n: i64| w.index(px + dir * n * step.0, py + dir * n * step.1).map(|i| v[i].norm());
    let (a, b) = (at(offset)?, at(offset + 1)?);
    (a > 0.0).then_some(b / a)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::linalg;

    fn w3() -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI / 3.0)
    }

    #[test]
    fn transfer_eigenvalues() {
        let t = transfer_matrix(2.0);
        assert_eq!((t.tau_plus.re, t.tau_minus.re), (1.0, 1.0));
        let t = transfer_matrix(2.5);
        assert!((t.tau_plus.re - 2.0).abs() < 1e-15 && (t.tau_minus.re - 0.5).abs() < 1e-15);
        let t = transfer_matrix(1.2);
        assert!((t.tau_plus.norm() - 1.0).abs() < 1e-15 && (t.tau_minus - t.tau_plus.conj()).norm() < 1e-15);
        assert!((t.tau_plus * t.tau_minus - 1.0).norm() < 1e-15);
        // T (tau, 1) = tau (tau, 1)
        let m = transfer_matrix(3.1);
        let v = TransferMatrix::eigenvector(m.tau_plus);
        let tv = [v[0] * m.matrix[0][0] + v[1] * m.matrix[0][1], v[0] * m.matrix[1][0] + v[1] * m.matrix[1][1]];
        assert!((tv[0] - m.tau_plus * v[0]).norm() < 1e-14 && (tv[1] - m.tau_plus * v[1]).norm() < 1e-14);
    }

    #[test]
    fn boundary_hops() {
        assert_eq!(boundary_hop(-3, w3(), 1.0).unwrap(), w3());
        assert!((boundary_hop(-1, w3(), 1.0).unwrap().norm() - 2.0).abs() < 1e-15);
        assert_eq!(boundary_hop(1, w3(), 1.0).unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(boundary_hop(5, w3(), 1.0).unwrap(), Complex64::new(1.0, 0.0));
        assert!(boundary_hop(2, w3(), 1.0).is_err());
        assert!(delta_matrix(1, w3(), 1.0, 3).is_err());
    }

    #[test]
    fn delta_spectra() {
        let d = delta_matrix(3, Complex64::new(1.0, 0.0), 0.0, 10).unwrap();
        let e = linalg::hermitian_eigenvalues(&d).unwrap();
        assert!(e.iter().all(|x| x.abs() < 2.0));
        let d = delta_matrix(1, Complex64::new(1.0, 0.0), 1.0, 200).unwrap();
        let e = linalg::hermitian_eigenvalues(&d).unwrap();
        assert!(e.iter().any(|x| (x - 2.5).abs() < 1e-10));
        assert!(e.iter().any(|x| (x + 2.5).abs() < 1e-10));
    }

    #[test]
    fn analytic_energies() {
        let r = bound_state_energies(1.0, 1.0, 0.0, w3()).unwrap();
        assert_eq!(r.energies, vec![-5.0, -5.0, 5.0, 5.0]);
        assert_eq!((r.b, r.localization_rate), (2.0, Some(0.5)));
        assert!(bound_state_energies(1.0, 0.0, 0.0, w3()).unwrap().energies.is_empty());
        assert!(bound_state_energies(1.0, -1.0, 0.0, w3()).unwrap().energies.is_empty());
        assert!(bound_state_energies(0.0, 1.0, 0.0, w3()).is_err());
        assert!(bound_state_energies(1.0, 1.0, FRAC_PI_4, w3()).is_err());
        assert_eq!(gap(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!((gap(3.0, 3.0, 0.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(gap(1.0, 0.0, 0.0).is_err());
        let ky = ky_line_energies(1.0, 1.0, 0.0).unwrap();
        assert_eq!(ky.energies, vec![-5.0, 5.0]);
        assert!(ky_line_energies(1.0, 0.0, 0.0).unwrap().energies.is_empty());
        assert!(ky_line_energies(1.0, 1.0, FRAC_PI_4).unwrap().energies.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn reflected_ratio_gives_same_energies() {
        for r in [0.7, 1.0, 2.5] {
            let a = bound_state_energies(1.3, 1.3 * r, 0.2, w3()).unwrap();
            let b = bound_state_energies(1.3, 1.3 * (-2.0 - r), 0.2, w3().conj()).unwrap();
            assert!((a.b - b.b).abs() < 1e-14);
            for (x, y) in a.energies.iter().zip(&b.energies) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_window_comparison() {
        let c = compare_line(Line::Kx, 1.0, 1.0, 0.0, w3(), 16, Execution::Sequential).unwrap();
        assert_eq!(c.numeric.len(), 4);
        assert!(c.converged, "{c:?}");
        assert!((c.tail_ratio.unwrap() - 0.5).abs() < 1e-6);
    }
}
