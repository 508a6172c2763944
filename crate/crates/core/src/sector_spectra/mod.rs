//! Charge-flux pair sector: Bloch bands of the bound pair, flux-tube fiber
//! operators for the relative coordinate, and their truncated spectra.

mod bloch;
mod diagnostics;
mod fiber;
mod sweep;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bloch::{
    band_gap, band_grid, bloch_composite, bloch_massive, dispersion_composite, dispersion_massive,
    eigenvalues4, one_particle_dispersion, BandPoint, Mat4,
};
pub use diagnostics::{
    counting_difference, counting_function, free_cdf, kolmogorov_distance, max_band_gap,
    no_bound_state_check, NoBoundStateEntry, NoBoundStateReport,
};
pub use fiber::{
    essential_band, fiber_operator, fiber_spectrum, FiberOperator, FiberSpectrum, Outlier,
    SpectrumOptions, OUTLIER_TOL,
};
pub use sweep::{linspace, sweep, SweepOptions, SweepPoint, SweepSummary};

/// `cos(2 s)` with values below `1e-14` in modulus set to zero, so that
/// degenerate momenta such as `pi/4` give exactly vanishing hoppings.
pub fn cos2(s: f64) -> f64 {
    let c = (2.0 * s).cos();
    if c.abs() < 1e-14 {
        0.0
    } else {
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorParams {
    /// `chi(g)`.
    pub phase: Complex64,
    pub lambda: f64,
    pub rho: f64,
    pub mass: f64,
    pub kx: f64,
    pub ky: f64,
}

impl SectorParams {
    pub fn new(phase: Complex64, lambda: f64, rho: f64, mass: f64, kx: f64, ky: f64) -> Result<Self> {
        let p = SectorParams { phase, lambda, rho, mass, kx, ky };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.phase.re, self.phase.im, self.lambda, self.rho, self.mass, self.kx, self.ky]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("sector parameters must be finite".into()));
        }
        if (self.phase.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("phase {} is not unimodular", self.phase)));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidArgument("lambda must be non-negative".into()));
        }
        if self.mass < 0.0 {
            return Err(Error::InvalidArgument("mass must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_k(self, kx: f64, ky: f64) -> Self {
        SectorParams { kx, ky, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        SectorParams { lambda, ..self }
    }

    pub fn with_rho(self, rho: f64) -> Self {
        SectorParams { rho, ..self }
    }
}

/// `W_L = {odd d : |d_x|, |d_y| <= 2L - 1}`; site `i` has
/// `d_x = 2 (i mod 2L) - (2L - 1)` and `d_y = 2 (i div 2L) - (2L - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativeWindow {
    l: usize,
}

impl RelativeWindow {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidArgument("window size must be positive".into()));
        }
        Ok(RelativeWindow { l })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Sites per coordinate, `2L`.
    pub fn side(&self) -> usize {
        2 * self.l
    }

    pub fn len(&self) -> usize {
        4 * self.l * self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_coord(&self) -> i64 {
        2 * self.l as i64 - 1
    }

    pub fn coord(&self, i: usize) -> i64 {
        2 * i as i64 - self.max_coord()
    }

    pub fn site(&self, i: usize) -> (i64, i64) {
        let n = self.side();
        (self.coord(i % n), self.coord(i / n))
    }

    pub fn index(&self, dx: i64, dy: i64) -> Option<usize> {
        let m = self.max_coord();
        if dx.rem_euclid(2) != 1 || dy.rem_euclid(2) != 1 || dx.abs() > m || dy.abs() > m {
            return None;
        }
        let ix = ((dx + m) / 2) as usize;
        let iy = ((dy + m) / 2) as usize;
        Some(iy * self.side() + ix)
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.len()).map(|i| self.site(i))
    }
}
