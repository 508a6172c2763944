//! Symbolic operators built from normal-ordered edge monomials.
//!
//! Every generator `L^h`, `T^chi` and every product of them on one edge can be
//! written as `c * L^h T^chi`, so any word in the generators is a
//! [`Monomial`]: a scalar times one `L^h T^chi` factor per touched edge.
//! Composite operators are trees of sums, products and scalings of
//! monomials. They can be applied matrix-free or materialized as CSR
//! matrices, and transformed symbolically (adjoint, conjugation, Fourier).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use super::{Space, StateVector, MAX_MATRIX_DIM};
use crate::error::{Error, Result};
use crate::group::{Char, Elem, FiniteAbelianGroup};
use crate::lattice::Edge;

pub type SpMat = CsMat<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `L^shift T^chi` acting on one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeFactor {
    pub edge: Edge,
    pub shift: Elem,
    pub chi: Char,
}

/// `scale * prod_e L^{h_e} T^{chi_e}`, factors sorted by edge, no trivial factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub scale: Complex64,
    pub factors: Vec<EdgeFactor>,
}

impl Monomial {
    pub fn identity() -> Self {
        Monomial { scale: ONE, factors: Vec::new() }
    }

    pub fn scalar(c: Complex64) -> Self {
        Monomial { scale: c, factors: Vec::new() }
    }

    pub fn edge(edge: Edge, shift: Elem, chi: Char) -> Self {
        let mut m = Monomial { scale: ONE, factors: vec![EdgeFactor { edge, shift, chi }] };
        m.factors.retain(|f| f.shift != 0 || f.chi != 0);
        m
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        self.scale *= c;
        self
    }

    pub fn is_diagonal(&self) -> bool {
        self.factors.iter().all(|f| f.shift == 0)
    }

    /// `self * other`, using `T^chi L^h = conj(chi(h)) L^h T^chi` on shared edges.
    pub fn mul(&self, other: &Monomial, g: &FiniteAbelianGroup) -> Monomial {
        let mut scale = self.scale * other.scale;
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            let a = self.factors.get(i);
            let b = other.factors.get(j);
            match (a, b) {
                (Some(a), Some(b)) if a.edge == b.edge => {
                    scale *= g.char_eval(a.chi, b.shift).conj();
                    factors.push(EdgeFactor {
                        edge: a.edge,
                        shift: g.mul(a.shift, b.shift),
                        chi: g.char_mul(a.chi, b.chi),
                    });
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.edge < b.edge => {
                    factors.push(*a);
                    i += 1;
                }
                (Some(a), None) => {
                    factors.push(*a);
                    i += 1;
                }
                (_, Some(b)) => {
                    factors.push(*b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        factors.retain(|f| f.shift != 0 || f.chi != 0);
        Monomial { scale, factors }
    }

    /// `(L^h T^chi)^* = conj(chi(h)) L^{h^-1} T^{conj chi}`.
    pub fn adjoint(&self, g: &FiniteAbelianGroup) -> Monomial {
        let mut scale = self.scale.conj();
        let factors = self
            .factors
            .iter()
            .map(|f| {
                scale *= g.char_eval(f.chi, f.shift).conj();
                EdgeFactor { edge: f.edge, shift: g.inv(f.shift), chi: g.char_inv(f.chi) }
            })
            .collect();
        Monomial { scale, factors }
    }

    /// Entrywise complex conjugate in the group basis.
    pub fn conj_entries(&self, g: &FiniteAbelianGroup) -> Monomial {
        Monomial {
            scale: self.scale.conj(),
            factors: self
                .factors
                .iter()
                .map(|f| EdgeFactor { chi: g.char_inv(f.chi), ..*f })
                .collect(),
        }
    }

    /// Conjugation by the relabelling `|g> -> |g^-1>` on the selected edges.
    pub fn invert_edges(&self, g: &FiniteAbelianGroup, on: &dyn Fn(Edge) -> bool) -> Monomial {
        Monomial {
            scale: self.scale,
            factors: self
                .factors
                .iter()
                .map(|f| {
                    if on(f.edge) {
                        EdgeFactor { edge: f.edge, shift: g.inv(f.shift), chi: g.char_inv(f.chi) }
                    } else {
                        *f
                    }
                })
                .collect(),
        }
    }

    /// Conjugation `U X U^*` by the edgewise Fourier matrix.
    ///
    /// `U L^h U^* = T^{chi_h}` and `U T^chi U^* = L^{x_chi^-1}`, where
    /// `chi_h` and `x_chi` are identified with `h` and `chi` coordinatewise.
    pub fn fourier(&self, g: &FiniteAbelianGroup) -> Monomial {
        let mut scale = self.scale;
        let mut factors: Vec<EdgeFactor> = self
            .factors
            .iter()
            .map(|f| {
                let chi_h = g.dual_char(f.shift);
                let x_chi = g.dual_elem(f.chi);
                // U L^h T^chi U^* = T^{chi_h} L^{x^-1} = chi_h(x) L^{x^-1} T^{chi_h}
                scale *= g.char_eval(chi_h, x_chi);
                EdgeFactor { edge: f.edge, shift: g.inv(x_chi), chi: chi_h }
            })
            .collect();
        factors.retain(|f| f.shift != 0 || f.chi != 0);
        Monomial { scale, factors }
    }

    /// Moves every factor to edge `map(e)`; `map` must be injective.
    pub fn relabel(&self, map: &dyn Fn(Edge) -> Edge) -> Monomial {
        let mut factors: Vec<EdgeFactor> =
            self.factors.iter().map(|f| EdgeFactor { edge: map(f.edge), ..*f }).collect();
        factors.sort_by_key(|f| f.edge);
        Monomial { scale: self.scale, factors }
    }

    fn tables(&self, space: &Space) -> Vec<(usize, Vec<isize>, Vec<Complex64>)> {
        let g = space.group();
        self.factors
            .iter()
            .map(|f| {
                let s = space.stride(f.edge);
                let delta = g
                    .elements()
                    .map(|x| (g.mul(f.shift, x) as isize - x as isize) * s as isize)
                    .collect();
                let phase = g.elements().map(|x| g.char_eval(f.chi, x).conj()).collect();
                (s, delta, phase)
            })
            .collect()
    }

    /// Image `(index, coefficient)` of every basis state, by column.
    fn columns(&self, space: &Space) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let tables = self.tables(space);
        let q = space.group().order();
        let scale = self.scale;
        (0..space.dim()).map(move |j| {
            let mut to = j as isize;
            let mut c = scale;
            for (s, delta, phase) in &tables {
                let d = j / s % q;
                to += delta[d];
                c *= phase[d];
            }
            (to as usize, c)
        })
    }

    /// `y += M x`.
    pub fn apply_add(&self, space: &Space, x: &[Complex64], y: &mut [Complex64]) {
        if self.scale == ZERO {
            return;
        }
        for (j, (i, c)) in self.columns(space).enumerate() {
            if x[j] != ZERO {
                y[i] += c * x[j];
            }
        }
    }

    pub fn to_matrix(&self, space: &Space) -> SpMat {
        let n = space.dim();
        let mut indices = vec![0usize; n];
        let mut data = vec![ZERO; n];
        for (j, (i, c)) in self.columns(space).enumerate() {
            indices[i] = j;
            data[i] = c;
        }
        CsMat::new((n, n), (0..=n).collect(), indices, data)
    }
}

#[derive(Debug)]
enum Expr {
    Mono(Monomial),
    Sum(Vec<Operator>),
    Product(Vec<Operator>),
    Scaled(Complex64, Operator),
}

#[derive(Debug)]
struct Node {
    space: Arc<Space>,
    expr: Expr,
    cache: bool,
    matrix: OnceLock<Arc<SpMat>>,
    terms: OnceLock<Option<Arc<Vec<Monomial>>>>,
}

/// Operator on a configuration space, shareable and cheap to clone.
///
/// Nodes marked with [`Operator::cached`] keep their materialized matrix so
/// that shared building blocks are materialized once.
#[derive(Clone, Debug)]
pub struct Operator(Arc<Node>);

impl Operator {
    fn from_expr(space: &Arc<Space>, expr: Expr) -> Self {
        Operator(Arc::new(Node {
            space: space.clone(),
            expr,
            cache: false,
            matrix: OnceLock::new(),
            terms: OnceLock::new(),
        }))
    }

    pub fn monomial(space: &Arc<Space>, m: Monomial) -> Self {
        Self::from_expr(space, Expr::Mono(m))
    }

    pub fn identity(space: &Arc<Space>) -> Self {
        Self::monomial(space, Monomial::identity())
    }

    pub fn zero(space: &Arc<Space>) -> Self {
        Self::from_expr(space, Expr::Sum(Vec::new()))
    }

    pub fn sum(space: &Arc<Space>, terms: Vec<Operator>) -> Self {
        Self::from_expr(space, Expr::Sum(terms))
    }

    /// Product in written order: `product([A, B])` is `A B`.
    pub fn product(space: &Arc<Space>, factors: Vec<Operator>) -> Self {
        if factors.is_empty() {
            return Self::identity(space);
        }
        if factors.iter().all(|f| f.as_monomial().is_some()) {
            let g = space.group();
            let m = factors
                .iter()
                .fold(Monomial::identity(), |acc, f| acc.mul(f.as_monomial().unwrap(), g));
            return Self::monomial(space, m);
        }
        Self::from_expr(space, Expr::Product(factors))
    }

    /// Same operator, with its materialized matrix retained once built.
    pub fn cached(self) -> Self {
        let node = Arc::try_unwrap(self.0).unwrap_or_else(|arc| Node {
            space: arc.space.clone(),
            expr: arc.expr.shallow_clone(),
            cache: true,
            matrix: OnceLock::new(),
            terms: OnceLock::new(),
        });
        Operator(Arc::new(Node { cache: true, ..node }))
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.0.space
    }

    pub fn as_monomial(&self) -> Option<&Monomial> {
        match &self.0.expr {
            Expr::Mono(m) => Some(m),
            _ => None,
        }
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        if let Some(m) = self.as_monomial() {
            return Self::monomial(self.space(), m.clone().scaled(c));
        }
        Self::from_expr(self.space(), Expr::Scaled(c, self.clone()))
    }

    pub fn scale_re(&self, c: f64) -> Operator {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn mul(&self, other: &Operator) -> Operator {
        Self::product(self.space(), vec![self.clone(), other.clone()])
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Self::sum(self.space(), vec![self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        Self::sum(self.space(), vec![self.clone(), other.scale_re(-1.0)])
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Operator {
        self.mul(other).sub(&other.mul(self))
    }

    /// `y += A x`.
    pub fn apply_add(&self, x: &[Complex64], y: &mut [Complex64]) {
        if let Some(m) = self.0.matrix.get() {
            csr_apply_add(m, x, y);
            return;
        }
        let space = &self.0.space;
        match &self.0.expr {
            Expr::Mono(m) => m.apply_add(space, x, y),
            Expr::Sum(ts) => ts.iter().for_each(|t| t.apply_add(x, y)),
            Expr::Scaled(c, a) => {
                let mut t = vec![ZERO; x.len()];
                a.apply_add(x, &mut t);
                y.iter_mut().zip(&t).for_each(|(y, t)| *y += c * t);
            }
            Expr::Product(fs) => {
                let mut cur = x.to_vec();
                for f in fs.iter().rev() {
                    let mut next = vec![ZERO; x.len()];
                    f.apply_add(&cur, &mut next);
                    cur = next;
                }
                y.iter_mut().zip(&cur).for_each(|(y, c)| *y += c);
            }
        }
    }

    pub fn apply(&self, x: &StateVector) -> StateVector {
        let mut y = StateVector::zeros(x.space());
        self.apply_add(x.data(), y.data_mut());
        y
    }

    /// Explicit sparse matrix; fails above [`MAX_MATRIX_DIM`].
    pub fn matrix(&self) -> Result<Arc<SpMat>> {
        if let Some(m) = self.0.matrix.get() {
            return Ok(m.clone());
        }
        let space = &self.0.space;
        if space.dim() > MAX_MATRIX_DIM {
            return Err(Error::TooLarge(format!(
                "dimension {} exceeds the explicit-matrix limit {MAX_MATRIX_DIM}",
                space.dim()
            )));
        }
        let n = space.dim();
        if let Some(terms) = self.expand() {
            let m = Arc::new(terms_matrix(space, &terms));
            if self.0.cache {
                let _ = self.0.matrix.set(m.clone());
            }
            return Ok(m);
        }
        let m = match &self.0.expr {
            Expr::Mono(m) => m.to_matrix(space),
            Expr::Scaled(c, a) => {
                let c = *c;
                a.matrix()?.map(|v| v * c)
            }
            Expr::Sum(ts) => {
                let parts = ts.iter().map(|t| t.matrix()).collect::<Result<Vec<_>>>()?;
                let nnz = parts.iter().map(|p| p.nnz()).sum();
                let mut tri = TriMat::with_capacity((n, n), nnz);
                for p in &parts {
                    for (v, (i, j)) in p.iter() {
                        tri.add_triplet(i, j, *v);
                    }
                }
                tri.to_csr()
            }
            Expr::Product(fs) => {
                let mut acc: Option<SpMat> = None;
                for f in fs {
                    let m = f.matrix()?;
                    acc = Some(match acc {
                        None => (*m).clone(),
                        Some(a) => &a * &*m,
                    });
                }
                acc.expect("products are non-empty")
            }
        };
        let m = Arc::new(m);
        if self.0.cache {
            let _ = self.0.matrix.set(m.clone());
        }
        Ok(m)
    }

    /// The operator as a sum of distinct monomials with like terms combined,
    /// or `None` when the expansion would exceed [`MAX_TERMS`] terms.
    pub fn expand(&self) -> Option<Arc<Vec<Monomial>>> {
        self.0
            .terms
            .get_or_init(|| {
                let g = self.0.space.group();
                let mut acc = Terms::default();
                match &self.0.expr {
                    Expr::Mono(m) => acc.add(m.factors.clone(), m.scale),
                    Expr::Scaled(c, a) => {
                        for m in a.expand()?.iter() {
                            acc.add(m.factors.clone(), m.scale * c);
                        }
                    }
                    Expr::Sum(ts) => {
                        for t in ts {
                            for m in t.expand()?.iter() {
                                acc.add(m.factors.clone(), m.scale);
                            }
                        }
                    }
                    Expr::Product(fs) => {
                        let mut cur = vec![Monomial::identity()];
                        for f in fs {
                            let rhs = f.expand()?;
                            if cur.len().saturating_mul(rhs.len()) > MAX_TERMS * 8 {
                                return None;
                            }
                            let mut next = Terms::default();
                            for a in &cur {
                                for b in rhs.iter() {
                                    let p = a.mul(b, g);
                                    next.add(p.factors, p.scale);
                                }
                            }
                            cur = next.finish()?;
                        }
                        return Some(Arc::new(cur));
                    }
                }
                acc.finish().map(Arc::new)
            })
            .clone()
    }

    /// Rebuilds the tree with every monomial transformed; shared nodes stay shared.
    pub fn map_monomials(&self, f: &dyn Fn(&Monomial) -> Monomial) -> Operator {
        let mut memo = HashMap::new();
        self.map_rec(f, &mut memo)
    }

    fn map_rec(
        &self,
        f: &dyn Fn(&Monomial) -> Monomial,
        memo: &mut HashMap<*const Node, Operator>,
    ) -> Operator {
        let key = Arc::as_ptr(&self.0);
        if let Some(done) = memo.get(&key) {
            return done.clone();
        }
        let space = &self.0.space;
        let expr = match &self.0.expr {
            Expr::Mono(m) => Expr::Mono(f(m)),
            Expr::Sum(ts) => Expr::Sum(ts.iter().map(|t| t.map_rec(f, memo)).collect()),
            Expr::Product(fs) => Expr::Product(fs.iter().map(|t| t.map_rec(f, memo)).collect()),
            Expr::Scaled(c, a) => Expr::Scaled(*c, a.map_rec(f, memo)),
        };
        let mut out = Self::from_expr(space, expr);
        if self.0.cache {
            out = out.cached();
        }
        memo.insert(key, out.clone());
        out
    }

    pub fn adjoint(&self) -> Operator {
        let mut memo = HashMap::new();
        self.adjoint_rec(&mut memo)
    }

    fn adjoint_rec(&self, memo: &mut HashMap<*const Node, Operator>) -> Operator {
        let key = Arc::as_ptr(&self.0);
        if let Some(done) = memo.get(&key) {
            return done.clone();
        }
        let space = &self.0.space;
        let g = space.group();
        let expr = match &self.0.expr {
            Expr::Mono(m) => Expr::Mono(m.adjoint(g)),
            Expr::Sum(ts) => Expr::Sum(ts.iter().map(|t| t.adjoint_rec(memo)).collect()),
            Expr::Product(fs) => Expr::Product(fs.iter().rev().map(|t| t.adjoint_rec(memo)).collect()),
            Expr::Scaled(c, a) => Expr::Scaled(c.conj(), a.adjoint_rec(memo)),
        };
        let mut out = Self::from_expr(space, expr);
        if self.0.cache {
            out = out.cached();
        }
        memo.insert(key, out.clone());
        out
    }

    /// Entrywise complex conjugate in the group basis (`K X K`).
    pub fn conj_entries(&self) -> Operator {
        let mut memo = HashMap::new();
        self.conj_rec(&mut memo)
    }

    fn conj_rec(&self, memo: &mut HashMap<*const Node, Operator>) -> Operator {
        let key = Arc::as_ptr(&self.0);
        if let Some(done) = memo.get(&key) {
            return done.clone();
        }
        let space = &self.0.space;
        let g = space.group();
        let expr = match &self.0.expr {
            Expr::Mono(m) => Expr::Mono(m.conj_entries(g)),
            Expr::Sum(ts) => Expr::Sum(ts.iter().map(|t| t.conj_rec(memo)).collect()),
            Expr::Product(fs) => Expr::Product(fs.iter().map(|t| t.conj_rec(memo)).collect()),
            Expr::Scaled(c, a) => Expr::Scaled(c.conj(), a.conj_rec(memo)),
        };
        let mut out = Self::from_expr(space, expr);
        if self.0.cache {
            out = out.cached();
        }
        memo.insert(key, out.clone());
        out
    }

    /// Upper bound on the operator norm when the matrix can be built: the
    /// smaller of `sqrt(|A|_1 |A|_inf)` and the sum of coefficient moduli
    /// in the monomial expansion. A coefficient sum below [`L1_SHORTCUT`] is
    /// returned directly at any dimension; otherwise larger spaces get a
    /// power-iteration estimate.
    pub fn norm(&self) -> Result<f64> {
        let cached = self.0.matrix.get().is_some();
        let terms = if cached { None } else { self.expand() };
        let l1 = terms.as_ref().map(|t| t.iter().map(|m| m.scale.norm()).sum::<f64>());
        // Monomials are unitary, so the l1 norm of the coefficients bounds the norm.
        match (l1, &terms) {
            (Some(l1), _) if l1 < L1_SHORTCUT => Ok(l1),
            (Some(l1), Some(t)) if self.space().materializable() => {
                Ok(terms_norm_bound(self.space(), t).min(l1))
            }
            _ if self.space().materializable() => Ok(norm_bound(&*self.matrix()?)),
            _ => Ok(self.norm_estimate(40, 0x5eed)),
        }
    }

    /// Power iteration on `A^* A` from a seeded random start.
    pub fn norm_estimate(&self, iters: usize, seed: u64) -> f64 {
        let adj = self.adjoint();
        let mut v = StateVector::random(self.space(), seed);
        let mut est = 0.0;
        for _ in 0..iters {
            let w = adj.apply(&self.apply(&v));
            let n = w.norm();
            if n == 0.0 {
                return 0.0;
            }
            est = n.sqrt();
            v = w;
            v.normalize();
        }
        est
    }
}

impl Expr {
    fn shallow_clone(&self) -> Expr {
        match self {
            Expr::Mono(m) => Expr::Mono(m.clone()),
            Expr::Sum(ts) => Expr::Sum(ts.clone()),
            Expr::Product(fs) => Expr::Product(fs.clone()),
            Expr::Scaled(c, a) => Expr::Scaled(*c, a.clone()),
        }
    }
}

/// Below this coefficient sum, [`Operator::norm`] skips the matrix bound.
pub const L1_SHORTCUT: f64 = 1e-9;

/// Cap on the number of distinct monomials kept by [`Operator::expand`].
pub const MAX_TERMS: usize = 200_000;

#[derive(Default)]
struct Terms(HashMap<Vec<EdgeFactor>, Complex64>);

impl Terms {
    fn add(&mut self, key: Vec<EdgeFactor>, c: Complex64) {
        if c != ZERO {
            *self.0.entry(key).or_insert(ZERO) += c;
        }
    }

    fn finish(self) -> Option<Vec<Monomial>> {
        if self.0.len() > MAX_TERMS {
            return None;
        }
        let mut out: Vec<Monomial> = self
            .0
            .into_iter()
            .filter(|(_, c)| *c != ZERO)
            .map(|(factors, scale)| Monomial { scale, factors })
            .collect();
        out.sort_by(|a, b| a.factors.cmp(&b.factors));
        Some(out)
    }
}

/// Sums monomials sharing a shift pattern column by column; each pattern is
/// one permutation, so the matrix has one entry per pattern per column.
fn terms_matrix(space: &Space, terms: &[Monomial]) -> SpMat {
    let n = space.dim();
    let mut tri = TriMat::new((n, n));
    for_each_pattern(space, terms, |target, coef| {
        for j in 0..n {
            if coef[j] != ZERO {
                tri.add_triplet(target[j], j, coef[j]);
            }
        }
    });
    tri.to_csr()
}

/// [`norm_bound`] of a sum of monomials without assembling the matrix.
fn terms_norm_bound(space: &Space, terms: &[Monomial]) -> f64 {
    let n = space.dim();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for_each_pattern(space, terms, |target, coef| {
        for j in 0..n {
            let a = coef[j].norm();
            rows[target[j]] += a;
            cols[j] += a;
        }
    });
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    (max(&rows) * max(&cols)).sqrt()
}

/// Calls `f(target, coef)` once per distinct shift pattern, where column `j`
/// of that pattern's contribution is `coef[j]` in row `target[j]`.
fn for_each_pattern(space: &Space, terms: &[Monomial], mut f: impl FnMut(&[usize], &[Complex64])) {
    let n = space.dim();
    let mut groups: HashMap<Vec<(Edge, Elem)>, Vec<&Monomial>> = HashMap::new();
    for m in terms {
        let key = m.factors.iter().filter(|f| f.shift != 0).map(|f| (f.edge, f.shift)).collect();
        groups.entry(key).or_default().push(m);
    }
    let mut keys: Vec<_> = groups.keys().cloned().collect();
    keys.sort();
    let mut target = vec![0usize; n];
    let mut coef = vec![ZERO; n];
    for key in &keys {
        coef.iter_mut().for_each(|c| *c = ZERO);
        for m in &groups[key] {
            for (j, (i, c)) in m.columns(space).enumerate() {
                target[j] = i;
                coef[j] += c;
            }
        }
        f(&target, &coef);
    }
}

fn csr_apply_add(m: &SpMat, x: &[Complex64], y: &mut [Complex64]) {
    for (i, row) in m.outer_iterator().enumerate() {
        let mut s = ZERO;
        for (j, v) in row.iter() {
            s += v * x[j];
        }
        y[i] += s;
    }
}

/// `sqrt(max column sum * max row sum)`, an upper bound on the spectral norm.
pub fn norm_bound(m: &SpMat) -> f64 {
    let (rows, cols) = m.shape();
    let mut col = vec![0.0; cols];
    let mut row = vec![0.0; rows];
    for (v, (i, j)) in m.iter() {
        let a = v.norm();
        row[i] += a;
        col[j] += a;
    }
    let r = row.iter().cloned().fold(0.0, f64::max);
    let c = col.iter().cloned().fold(0.0, f64::max);
    (r * c).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TorusLattice;

    fn space(n: usize) -> Arc<Space> {
        let g = FiniteAbelianGroup::cyclic(n).unwrap();
        Arc::new(Space::new(g, TorusLattice::new(2, 2).unwrap()).unwrap())
    }

    fn dense(m: &SpMat) -> Vec<Vec<Complex64>> {
        let n = m.rows();
        let mut d = vec![vec![ZERO; n]; n];
        for (v, (i, j)) in m.iter() {
            d[i][j] += *v;
        }
        d
    }

    #[test]
    fn monomial_product_matches_matrix_product() {
        let s = space(3);
        let g = s.group();
        let a = Monomial::edge(0, 1, 2).mul(&Monomial::edge(3, 2, 1), g);
        let b = Monomial::edge(0, 2, 1).mul(&Monomial::edge(5, 0, 2), g);
        let ab = a.mul(&b, g).to_matrix(&s);
        let prod = &a.to_matrix(&s) * &b.to_matrix(&s);
        assert!(norm_bound(&(&ab - &prod)) < 1e-14);
    }

    #[test]
    fn adjoint_and_conj_match_matrices() {
        let s = space(3);
        let g = s.group();
        let a = Monomial::edge(2, 1, 1).mul(&Monomial::edge(4, 2, 0), g).scaled(Complex64::new(0.3, 0.7));
        let m = a.to_matrix(&s);
        let adj = m.map(|v| v.conj()).transpose_into().to_csr();
        assert!(norm_bound(&(&a.adjoint(g).to_matrix(&s) - &adj)) < 1e-14);
        let conj = m.map(|v| v.conj());
        assert!(norm_bound(&(&a.conj_entries(g).to_matrix(&s) - &conj)) < 1e-14);
    }

    #[test]
    fn fourier_rule_on_single_edge() {
        for n in [2, 3, 4] {
            let g = FiniteAbelianGroup::cyclic(n).unwrap();
            let u = g.fourier_matrix();
            for h in g.elements() {
                for chi in g.characters() {
                    // matrix of L^h T^chi on one edge
                    let mut x = vec![vec![ZERO; n]; n];
                    for y in g.elements() {
                        x[g.mul(h, y)][y] = g.char_eval(chi, y).conj();
                    }
                    let mut uxu = vec![vec![ZERO; n]; n];
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                for l in 0..n {
                                    uxu[i][j] += u[i][k] * x[k][l] * u[j][l].conj();
                                }
                            }
                        }
                    }
                    let f = Monomial::edge(0, h, chi).fourier(&g);
                    let mut want = vec![vec![ZERO; n]; n];
                    let (sh, ch) = f.factors.first().map_or((0, 0), |e| (e.shift, e.chi));
                    for y in g.elements() {
                        want[g.mul(sh, y)][y] = f.scale * g.char_eval(ch, y).conj();
                    }
                    for i in 0..n {
                        for j in 0..n {
                            assert!((uxu[i][j] - want[i][j]).norm() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn operator_apply_agrees_with_matrix() {
        let s = space(3);
        let a = Operator::monomial(&s, Monomial::edge(1, 1, 2));
        let b = Operator::monomial(&s, Monomial::edge(6, 2, 1)).cached();
        let c = Operator::sum(&s, vec![a.mul(&b), b.scale(Complex64::new(0.0, 2.0)), a.adjoint()]);
        let d = c.mul(&c.adjoint());
        let x = StateVector::random(&s, 1);
        let y1 = d.apply(&x);
        let m = d.matrix().unwrap();
        let mut y2 = vec![ZERO; s.dim()];
        csr_apply_add(&m, x.data(), &mut y2);
        let y2 = StateVector::from_vec(&s, y2).unwrap();
        assert!(y1.distance(&y2) < 1e-12);
        assert!(d.sub(&d.adjoint()).norm().unwrap() < 1e-12);
        let _ = dense(&m);
    }

    #[test]
    fn norm_bound_and_estimate() {
        let s = space(2);
        let i = Operator::identity(&s).scale_re(3.0);
        assert!((i.norm().unwrap() - 3.0).abs() < 1e-14);
        assert!((i.norm_estimate(5, 1) - 3.0).abs() < 1e-12);
        assert_eq!(Operator::zero(&s).norm_estimate(3, 1), 0.0);
    }

    #[test]
    fn expansion_matches_sparse_products() {
        let s = space(3);
        let g = s.group();
        let a = Monomial::edge(1, 1, 2).to_matrix(&s);
        let b = Monomial::edge(2, 2, 1).mul(&Monomial::edge(1, 0, 1), g).to_matrix(&s);
        let c = Monomial::edge(1, 2, 0).scaled(Complex64::new(0.0, 2.0)).to_matrix(&s);
        let oa = Operator::monomial(&s, Monomial::edge(1, 1, 2));
        let ob = Operator::monomial(&s, Monomial::edge(2, 2, 1).mul(&Monomial::edge(1, 0, 1), g));
        let oc = Operator::monomial(&s, Monomial::edge(1, 2, 0).scaled(Complex64::new(0.0, 2.0)));
        let sum = oa.add(&ob);
        let op = Operator::product(&s, vec![sum.clone(), oc.clone(), sum]);
        let ab = &a + &b;
        let want = &(&ab * &c) * &ab;
        assert!(op.expand().is_some());
        assert!(norm_bound(&(&*op.matrix().unwrap() - &want)) < 1e-13);
        let l1: f64 = op.expand().unwrap().iter().map(|m| m.scale.norm()).sum();
        assert!(norm_bound(&want) <= l1 + 1e-12);
    }

    #[test]
    fn commuting_products_cancel_symbolically() {
        let s = space(2);
        let a = Operator::monomial(&s, Monomial::edge(0, 1, 0)).add(&Operator::identity(&s));
        let b = Operator::monomial(&s, Monomial::edge(0, 1, 0).mul(&Monomial::edge(3, 0, 1), s.group()));
        assert!(a.commutator(&b).expand().unwrap().is_empty());
        assert_eq!(a.commutator(&b).norm().unwrap(), 0.0);
        let t = Operator::monomial(&s, Monomial::edge(0, 0, 1));
        assert!((a.commutator(&t).norm().unwrap() - 2.0).abs() < 1e-12);
    }
}
