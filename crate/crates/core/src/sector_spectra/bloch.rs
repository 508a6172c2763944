//! 4x4 Bloch matrices of the strictly bound pair and their bands.

use std::f64::consts::FRAC_PI_2;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::{cos2, SectorParams};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg;

/// Row-major 4x4 matrix on `S = [(1,1), (1,-1), (-1,1), (-1,-1)]`.
pub type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn pair_matrix(cx: Complex64, cy: Complex64, phase: Complex64) -> Mat4 {
    let mut h = [[ZERO; 4]; 4];
    let mut set = |i: usize, j: usize, v: Complex64| {
        h[i][j] = v;
        h[j][i] = v.conj();
    };
    set(0, 1, cy);
    set(0, 2, cx);
    set(1, 3, phase * cx);
    set(2, 3, cy);
    h
}

/// `2 cos(2k_y)` on `(1,1)-(1,-1)` and `(-1,1)-(-1,-1)`, `2 cos(2k_x)` on
/// `(1,1)-(-1,1)`, and `chi(g) 2 cos(2k_x)` from `(-1,-1)` to `(1,-1)`.
pub fn bloch_composite(p: &SectorParams) -> Mat4 {
    let c = |s: f64| Complex64::new(2.0 * cos2(s), 0.0);
    pair_matrix(c(p.kx), c(p.ky), p.phase)
}

/// Same pattern with `2 cos(2s)` replaced by `c(s) = e^{2is} + (1+m) e^{-2is}`.
pub fn bloch_massive(p: &SectorParams) -> Mat4 {
    let c = |s: f64| {
        Complex64::from_polar(1.0, 2.0 * s) + Complex64::from_polar(1.0 + p.mass, -2.0 * s)
    };
    pair_matrix(c(p.kx), c(p.ky), p.phase)
}

pub fn eigenvalues4(h: &Mat4) -> Result<[f64; 4]> {
    let m = Mat::from_fn(4, 4, |i, j| h[i][j]);
    let v = linalg::hermitian_eigenvalues(&m)?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn bands(ax: f64, ay: f64, phase: Complex64, scale: f64) -> [f64; 4] {
    let s = (2.0 + 2.0 * phase.re).max(0.0).sqrt();
    let hi = (ax * ax + ay * ay + ax * ay * s).sqrt() * scale;
    // ax^2 + ay^2 - ax ay s, rearranged to avoid cancellation near ax = ay, phase = 1
    let lo = ((ax - ay).powi(2) + ax * ay * (1.0 - phase).norm_sqr() / (2.0 + s)).sqrt() * scale;
    [-hi, -lo, lo, hi]
}

/// Closed-form bands of [`bloch_composite`], ascending. Requires `m = 0`.
pub fn dispersion_composite(p: &SectorParams) -> Result<[f64; 4]> {
    if p.mass != 0.0 {
        return Err(Error::InvalidArgument("the composite dispersion needs mass 0".into()));
    }
    Ok(bands(cos2(p.kx).abs(), cos2(p.ky).abs(), p.phase, 2.0))
}

/// Closed-form bands of [`bloch_massive`], ascending.
pub fn dispersion_massive(p: &SectorParams) -> [f64; 4] {
    let c = |s: f64| {
        (Complex64::from_polar(1.0, 2.0 * s) + Complex64::from_polar(1.0 + p.mass, -2.0 * s)).norm()
    };
    bands(c(p.kx), c(p.ky), p.phase, 1.0)
}

/// Distance between the two middle bands.
pub fn band_gap(bands: &[f64; 4]) -> f64 {
    bands[2] - bands[1]
}

/// `2 lambda (cos k_x + cos k_y)`: one charge hopping on the vertex lattice.
pub fn one_particle_dispersion(lambda_e: f64, kx: f64, ky: f64) -> f64 {
    2.0 * lambda_e * (kx.cos() + ky.cos())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandPoint {
    pub kx: f64,
    pub ky: f64,
    pub energies: [f64; 4],
}

/// Eigenvalues of [`bloch_massive`] on the `n x n` grid `k = (pi/2) (i, j) / n`,
/// row-major in `(i, j)` with `k_x` slowest.
pub fn band_grid(p: &SectorParams, n: usize, exec: Execution) -> Result<Vec<BandPoint>> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    let step = FRAC_PI_2 / n as f64;
    exec::map_range(exec, n * n, |idx| {
        let (kx, ky) = ((idx / n) as f64 * step, (idx % n) as f64 * step);
        let energies = eigenvalues4(&bloch_massive(&p.with_k(kx, ky)))?;
        Ok(BandPoint { kx, ky, energies })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use super::*;

    fn params(phase: Complex64, kx: f64, ky: f64) -> SectorParams {
        SectorParams::new(phase, 0.0, 1.0, 0.0, kx, ky).unwrap()
    }

    #[test]
    fn dirac_point_is_zero_matrix() {
        let h = bloch_composite(&params(Complex64::from_polar(1.0, 0.3), FRAC_PI_4, FRAC_PI_4));
        assert!(h.iter().flatten().all(|z| *z == ZERO));
    }

    #[test]
    fn cube_root_phase_at_origin() {
        let h = bloch_composite(&params(Complex64::from_polar(1.0, 2.0 * PI / 3.0), 0.0, 0.0));
        let e = eigenvalues4(&h).unwrap();
        let want = [-2.0 * 3f64.sqrt(), -2.0, 2.0, 2.0 * 3f64.sqrt()];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn trivial_phase_is_sum_of_cosines() {
        let p = params(Complex64::new(1.0, 0.0), 0.3, 1.1);
        let e = eigenvalues4(&bloch_composite(&p)).unwrap();
        let (a, b) = (2.0 * (0.6f64).cos(), 2.0 * (2.2f64).cos());
        let mut want = [a + b, a - b, -a + b, -a - b];
        want.sort_by(f64::total_cmp);
        for (x, y) in e.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn massive_reduces_and_opens_gap() {
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let p = params(w, 0.37, 1.2);
        let a = dispersion_composite(&p).unwrap();
        let b = dispersion_massive(&p);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut q = params(w, FRAC_PI_4, FRAC_PI_4);
        q.mass = 0.1;
        assert!((band_gap(&dispersion_massive(&q)) - 0.2).abs() < 1e-12);
        let c = Complex64::from_polar(1.0, FRAC_PI_2) + Complex64::from_polar(1.1, -FRAC_PI_2);
        assert!((c.norm() - 0.1).abs() < 1e-12);
        assert!(dispersion_composite(&q).is_err());
    }

    #[test]
    fn grid_layout() {
        let p = params(Complex64::new(-1.0, 0.0), 0.0, 0.0);
        let g = band_grid(&p, 3, Execution::Sequential).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!((g[1].kx, g[1].ky), (0.0, FRAC_PI_2 / 3.0));
        assert!((g[3].kx - FRAC_PI_2 / 3.0).abs() < 1e-15);
        assert!(band_grid(&p, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn one_particle_extremes() {
        assert_eq!(one_particle_dispersion(0.5, 0.0, 0.0), 2.0);
        assert!((one_particle_dispersion(0.5, PI, PI) + 2.0).abs() < 1e-15);
    }
}
