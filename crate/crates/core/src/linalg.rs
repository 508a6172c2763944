//! Dense Hermitian eigensolvers and a small sparse Hermitian container.
//!
//! The dense solvers return all eigenvalues in ascending order; the backend
//! is a standard tridiagonalisation-based method.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn hermitian_eigenvalues(a: &Mat<Complex64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let vals = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue solver: {e:?}")))?;
    Ok(vals)
}

/// Eigenvalues ascending and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(a: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigen solver: {e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..a.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue solver: {e:?}")))
}

pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigen solver: {e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Inverse participation ratio `sum |psi|^4 / (sum |psi|^2)^2`.
pub fn ipr<I: IntoIterator<Item = f64>>(abs2: I) -> f64 {
    let (mut s2, mut s4) = (0.0, 0.0);
    for a in abs2 {
        s2 += a;
        s4 += a * a;
    }
    if s2 == 0.0 {
        0.0
    } else {
        s4 / (s2 * s2)
    }
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Groups ordered by smallest member, members ascending.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

/// Hermitian matrix stored as its diagonal plus off-diagonal links.
///
/// A link `(i, j, v)` sets `H[i][j] += v` and `H[j][i] += conj(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    diag: Vec<f64>,
    links: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    pub fn zeros(n: usize) -> Self {
        SparseHermitian { diag: vec![0.0; n], links: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.diag[i] += v;
    }

    pub fn add_link(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i != j, "diagonal entries go through add_diag");
        if v != Complex64::new(0.0, 0.0) {
            self.links.push((i, j, v));
        }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn links(&self) -> &[(usize, usize, Complex64)] {
        &self.links
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let mut s = if i == j { Complex64::new(self.diag[i], 0.0) } else { Complex64::new(0.0, 0.0) };
        for &(a, b, v) in &self.links {
            if (a, b) == (i, j) {
                s += v;
            } else if (a, b) == (j, i) {
                s += v.conj();
            }
        }
        s
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let n = self.dim();
        let mut m = Mat::<Complex64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(self.diag[i], 0.0);
        }
        for &(i, j, v) in &self.links {
            m[(i, j)] += v;
            m[(j, i)] += v.conj();
        }
        m
    }

    /// Dense restriction to `sites` (in the given order).
    pub fn restrict(&self, sites: &[usize]) -> Mat<Complex64> {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &s) in sites.iter().enumerate() {
            pos[s] = k;
        }
        let n = sites.len();
        let mut m = Mat::<Complex64>::zeros(n, n);
        for (k, &s) in sites.iter().enumerate() {
            m[(k, k)] = Complex64::new(self.diag[s], 0.0);
        }
        for &(i, j, v) in &self.links {
            let (a, b) = (pos[i], pos[j]);
            if a != usize::MAX && b != usize::MAX {
                m[(a, b)] += v;
                m[(b, a)] += v.conj();
            }
        }
        m
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y: Vec<Complex64> = self.diag.iter().zip(x).map(|(d, v)| v * d).collect();
        for &(i, j, v) in &self.links {
            y[i] += v * x[j];
            y[j] += v.conj() * x[i];
        }
        y
    }

    /// Connected components of the link graph (isolated sites included).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.dim());
        for &(i, j, _) in &self.links {
            uf.union(i, j);
        }
        uf.groups()
    }

    /// Largest `|H_ij - conj(H_ji)|`; zero by construction, kept as a check.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.to_dense();
        let n = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        d
    }
}
