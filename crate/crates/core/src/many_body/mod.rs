//! Exact operators on the torus Hilbert space `(C^|G|)^{⊗E}`.
//!
//! Basis states are edge configurations `E -> G`; the configuration index is
//! the mixed-radix number whose most significant digit is edge 0.

mod checks;
mod holonomy;
mod model;
mod operator;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteAbelianGroup};
use crate::lattice::{Edge, TorusLattice};

pub use checks::{
    conjugation_check, continuity_check, duality_check, gauge_invariance_check, verify_suite,
    spectrum, CheckResult, Conjugation, DualityMap, SuiteOptions, DUALITY_MAP,
};
pub use holonomy::{holonomy, HolonomyResult};
pub use model::{Couplings, HamiltonianSpec, Model, Orientation};
pub use operator::{norm_bound, EdgeFactor, Monomial, Operator, SpMat};

/// Largest dimension for which explicit sparse matrices are built.
pub const MAX_MATRIX_DIM: usize = 65_536;
/// Largest dimension for dense state vectors.
pub const MAX_STATE_DIM: usize = 1 << 22;
/// Residual tolerance for exact operator identities.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Configuration space of a group on a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Space {
    group: FiniteAbelianGroup,
    lattice: TorusLattice,
    dim: usize,
    strides: Vec<usize>,
}

impl Space {
    pub fn new(group: FiniteAbelianGroup, lattice: TorusLattice) -> Result<Self> {
        let q = group.order();
        let ne = lattice.num_edges();
        let dim = (0..ne)
            .try_fold(1usize, |acc, _| acc.checked_mul(q).filter(|&d| d <= MAX_STATE_DIM))
            .ok_or_else(|| {
                Error::TooLarge(format!(
                    "{group} on the {lattice} torus has dimension {q}^{ne}, above the limit {MAX_STATE_DIM}"
                ))
            })?;
        let strides = (0..ne).map(|e| q.pow((ne - 1 - e) as u32)).collect();
        Ok(Space { group, lattice, dim, strides })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }
    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn stride(&self, e: Edge) -> usize {
        self.strides[e]
    }
    pub fn digit(&self, index: usize, e: Edge) -> Elem {
        index / self.strides[e] % self.group.order()
    }
    pub fn index_of(&self, config: &[Elem]) -> usize {
        config.iter().zip(&self.strides).map(|(g, s)| g * s).sum()
    }
    pub fn config_of(&self, index: usize) -> Vec<Elem> {
        (0..self.strides.len()).map(|e| self.digit(index, e)).collect()
    }
    pub fn materializable(&self) -> bool {
        self.dim <= MAX_MATRIX_DIM
    }
}

/// Dense complex state over the configuration basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Arc<Space>,
    data: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(space: &Arc<Space>) -> Self {
        StateVector { space: space.clone(), data: vec![Complex64::new(0.0, 0.0); space.dim()] }
    }

    pub fn basis(space: &Arc<Space>, index: usize) -> Self {
        let mut s = Self::zeros(space);
        s.data[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_vec(space: &Arc<Space>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: data.len() });
        }
        Ok(StateVector { space: space.clone(), data })
    }

    /// Normalized random vector with complex Gaussian-like entries.
    pub fn random(space: &Arc<Space>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..space.dim())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let mut s = StateVector { space: space.clone(), data };
        s.normalize();
        s
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Returns the norm before scaling.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.data.iter_mut().for_each(|z| *z /= n);
        }
        n
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn axpy(&mut self, a: Complex64, x: &StateVector) {
        self.data.iter_mut().zip(&x.data).for_each(|(y, x)| *y += a * x);
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_indexing_is_mixed_radix() {
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let l = TorusLattice::new(2, 2).unwrap();
        let s = Space::new(g, l).unwrap();
        assert_eq!(s.dim(), 6561);
        assert_eq!(s.stride(0), 3usize.pow(7));
        assert_eq!(s.stride(7), 1);
        let cfg = vec![2, 0, 1, 0, 0, 0, 0, 2];
        let i = s.index_of(&cfg);
        assert_eq!(s.config_of(i), cfg);
        assert_eq!(s.digit(i, 0), 2);
    }

    #[test]
    fn oversized_space_rejected() {
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let l = TorusLattice::new(3, 3).unwrap();
        assert!(matches!(Space::new(g, l), Err(Error::TooLarge(_))));
    }

    #[test]
    fn state_vector_basics() {
        let g = FiniteAbelianGroup::cyclic(2).unwrap();
        let s = Arc::new(Space::new(g, TorusLattice::new(2, 2).unwrap()).unwrap());
        let v = StateVector::random(&s, 7);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!((v.inner(&v).re - 1.0).abs() < 1e-12);
        let b = StateVector::basis(&s, 3);
        assert_eq!(b.inner(&v), v.data()[3]);
        assert!(StateVector::from_vec(&s, vec![]).is_err());
    }
}
