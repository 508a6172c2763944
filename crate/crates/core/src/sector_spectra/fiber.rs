//! Flux-tube fiber operator of the relative coordinate and its spectrum.
//!
//! The operator commutes with the magnetic half-turn `U = G R`, where
//! `R d = -d` and `G` multiplies by `chi(g)` on `d_x > 0`, and with the
//! antiunitary `J = G K R_y` (`R_y` flips `d_y`, `K` conjugates). When there is
//! a single connected component the spectrum is computed on the two
//! eigenspaces of `U` (`U^2 = chi(g)`), in a `J`-real basis where each block
//! is real symmetric. Both symmetries are checked on the matrix first.

use std::collections::{BTreeMap, HashMap};

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::bloch::bloch_massive;
use super::{cos2, RelativeWindow, SectorParams};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::{self, SparseHermitian};

/// Eigenvalues further than this outside the essential band are outliers.
pub const OUTLIER_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const S: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

#[derive(Clone, Debug, PartialEq)]
pub struct FiberOperator {
    params: SectorParams,
    window: RelativeWindow,
    matrix: SparseHermitian,
}

impl FiberOperator {
    pub fn params(&self) -> &SectorParams {
        &self.params
    }
    pub fn window(&self) -> &RelativeWindow {
        &self.window
    }
    pub fn matrix(&self) -> &SparseHermitian {
        &self.matrix
    }
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
    pub fn to_dense(&self) -> Mat<Complex64> {
        self.matrix.to_dense()
    }
}

/// `[-R, R]` with `R = 4 lambda (|cos 2k_x| + |cos 2k_y|)`.
pub fn essential_band(p: &SectorParams) -> (f64, f64) {
    let r = 4.0 * p.lambda * (cos2(p.kx).abs() + cos2(p.ky).abs());
    (-r, r)
}

/// Hops `2 lambda cos(2k)` by two in each coordinate, with the `d_x` hop
/// from `-1` to `+1` carrying `chi(g)` on `d_y < 0`, plus `rho` times the
/// Bloch block on `S`. Open boundary at the window edge.
pub fn fiber_operator(p: &SectorParams, w: &RelativeWindow) -> Result<FiberOperator> {
    p.validate()?;
    if w.l() < 2 {
        return Err(Error::InvalidArgument(format!("window size {} is below 2", w.l())));
    }
    let a = 2.0 * p.lambda * cos2(p.kx);
    let b = 2.0 * p.lambda * cos2(p.ky);
    let mut h = SparseHermitian::zeros(w.len());
    for (i, (x, y)) in w.sites().enumerate() {
        if a != 0.0 {
            if let Some(j) = w.index(x + 2, y) {
                let amp = if x == -1 && y < 0 { p.phase * a } else { Complex64::new(a, 0.0) };
                h.add_link(j, i, amp);
            }
        }
        if b != 0.0 {
            if let Some(j) = w.index(x, y + 2) {
                h.add_link(j, i, Complex64::new(b, 0.0));
            }
        }
    }
    if p.rho != 0.0 {
        let block = bloch_massive(p);
        for r in 0..4 {
            for c in r + 1..4 {
                let v = block[r][c] * p.rho;
                if v != ZERO {
                    let (sr, sc) = (S[r], S[c]);
                    h.add_link(w.index(sr.0, sr.1).unwrap(), w.index(sc.0, sc.1).unwrap(), v);
                }
            }
        }
    }
    Ok(FiberOperator { params: *p, window: *w, matrix: h })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub exec: Execution,
    /// Compute eigenvectors: per-eigenvalue IPR and outlier eigenvectors.
    pub vectors: bool,
    pub tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { exec: Execution::Parallel, vectors: false, tol: OUTLIER_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outlier {
    pub energy: f64,
    pub ipr: Option<f64>,
    /// `d_y` row carrying the largest weight.
    pub row: Option<i64>,
    #[serde(skip)]
    pub vector: Option<Vec<Complex64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberSpectrum {
    pub eigenvalues: Vec<f64>,
    pub radius: f64,
    pub outliers: Vec<Outlier>,
    /// Aligned with `eigenvalues` when vectors were requested.
    pub iprs: Option<Vec<f64>>,
    pub ipr_max: Option<f64>,
}

impl FiberSpectrum {
    pub fn outlier_energies(&self) -> Vec<f64> {
        self.outliers.iter().map(|o| o.energy).collect()
    }
}

/// One eigenpair as produced by a block solve.
struct Pair {
    energy: f64,
    ipr: Option<f64>,
    vector: Option<Vec<Complex64>>,
}

/// Orthonormal vectors, each given by its (site, coefficient) entries.
type SparseBasis = Vec<Vec<(usize, Complex64)>>;

pub fn fiber_spectrum(op: &FiberOperator, opts: &SpectrumOptions) -> Result<FiberSpectrum> {
    let radius = essential_band(&op.params).1;
    let comps = op.matrix.components();
    let pairs = if comps.len() > 1 {
        solve_components(op, &comps, radius, opts)?
    } else if symmetry_defect(op) < 1e-13 {
        let bases = sector_bases(op);
        let parts = exec::try_map(opts.exec, &bases, |b| solve_basis(op, b, radius, opts))?;
        parts.into_iter().flatten().collect()
    } else {
        solve_components(op, &[(0..op.dim()).collect()], radius, opts)?
    };
    Ok(assemble(op, pairs, radius, opts))
}

fn is_outlier(e: f64, radius: f64, tol: f64) -> bool {
    e.abs() > radius + tol
}

fn assemble(op: &FiberOperator, mut pairs: Vec<Pair>, radius: f64, opts: &SpectrumOptions) -> FiberSpectrum {
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.energy).collect();
    let iprs: Option<Vec<f64>> = if opts.vectors {
        Some(pairs.iter().map(|p| p.ipr.unwrap_or(0.0)).collect())
    } else {
        None
    };
    let ipr_max = iprs.as_ref().map(|v| v.iter().cloned().fold(0.0, f64::max));
    let w = op.window;
    let mut outliers: Vec<Outlier> = pairs
        .into_iter()
        .filter(|p| is_outlier(p.energy, radius, opts.tol))
        .map(|p| {
            let row = p.vector.as_ref().map(|v| dominant_row(&w, v));
            Outlier { energy: p.energy, ipr: p.ipr, row, vector: p.vector }
        })
        .collect();
    outliers.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.row.cmp(&b.row)));
    FiberSpectrum { eigenvalues, radius, outliers, iprs, ipr_max }
}

fn dominant_row(w: &RelativeWindow, v: &[Complex64]) -> i64 {
    let mut rows: BTreeMap<i64, f64> = BTreeMap::new();
    for (i, z) in v.iter().enumerate() {
        *rows.entry(w.site(i).1).or_insert(0.0) += z.norm_sqr();
    }
    let mut best = (i64::MIN, -1.0);
    for (y, wgt) in rows {
        if wgt > best.1 + 1e-12 {
            best = (y, wgt);
        }
    }
    best.0
}

fn solve_components(
    op: &FiberOperator,
    comps: &[Vec<usize>],
    radius: f64,
    opts: &SpectrumOptions,
) -> Result<Vec<Pair>> {
    let n = op.dim();
    let parts = exec::try_map(opts.exec, comps, |sites| -> Result<Vec<Pair>> {
        let m = op.matrix.restrict(sites);
        if !opts.vectors {
            let vals = linalg::hermitian_eigenvalues(&m)?;
            return Ok(vals.into_iter().map(|energy| Pair { energy, ipr: None, vector: None }).collect());
        }
        let (vals, u) = linalg::hermitian_eigen(&m)?;
        let u = &u;
        Ok(vals
            .into_iter()
            .enumerate()
            .map(|(k, energy)| {
                let col = move || (0..sites.len()).map(move |r| u[(r, k)]);
                let ipr = linalg::ipr(col().map(|z| z.norm_sqr()));
                let vector = is_outlier(energy, radius, opts.tol).then(|| {
                    let mut v = vec![ZERO; n];
                    for (r, z) in col().enumerate() {
                        v[sites[r]] = z;
                    }
                    v
                });
                Pair { energy, ipr: Some(ipr), vector }
            })
            .collect())
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// `u(d) = chi(g)` for `d_x > 0`, else `1`.
fn gauge(p: &SectorParams, d: (i64, i64)) -> Complex64 {
    if d.0 > 0 {
        p.phase
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Largest violation of `U H U^* = H` and `J H J^* = H`, entrywise.
fn symmetry_defect(op: &FiberOperator) -> f64 {
    let w = &op.window;
    let p = &op.params;
    let h = &op.matrix;
    let mut entries: HashMap<(usize, usize), Complex64> = HashMap::new();
    for (i, &x) in h.diag().iter().enumerate() {
        *entries.entry((i, i)).or_insert(ZERO) += x;
    }
    for &(i, j, v) in h.links() {
        *entries.entry((i, j)).or_insert(ZERO) += v;
        *entries.entry((j, i)).or_insert(ZERO) += v.conj();
    }
    let get = |a: (i64, i64), b: (i64, i64)| {
        let key = (w.index(a.0, a.1).unwrap(), w.index(b.0, b.1).unwrap());
        entries.get(&key).copied().unwrap_or(ZERO)
    };
    let mut d: f64 = 0.0;
    // every entry of H and its images; missing images are zero
    for (&(s, t), &v) in &entries {
        let (ds, dt) = (w.site(s), w.site(t));
        // <Us|H|Ut> = conj(u(-s)) u(-t) H[-s,-t] must equal H[s,t]
        let (rs, rt) = ((-ds.0, -ds.1), (-dt.0, -dt.1));
        d = d.max((gauge(p, rs).conj() * gauge(p, rt) * get(rs, rt) - v).norm());
        // <Js|H|Jt> = conj(u(R_y s)) u(R_y t) H[R_y s, R_y t] must equal conj(H[s,t])
        let (ys, yt) = ((ds.0, -ds.1), (dt.0, -dt.1));
        d = d.max((gauge(p, ys).conj() * gauge(p, yt) * get(ys, yt) - v.conj()).norm());
    }
    d
}

/// `J`-real orthonormal bases of the two `U` eigenspaces.
fn sector_bases(op: &FiberOperator) -> Vec<SparseBasis> {
    let w = &op.window;
    let chi = op.params.phase;
    let mu_bar = chi.sqrt().conj();
    let i = Complex64::new(0.0, 1.0);
    let m = w.max_coord();
    [1.0, -1.0]
        .iter()
        .map(|&sign| {
            let mut basis = Vec::with_capacity(w.len() / 2);
            for x in (1..=m).step_by(2) {
                for y in (1..=m).step_by(2) {
                    let idx = |dx: i64, dy: i64| w.index(dx, dy).unwrap();
                    let (a, na, b, nb) = (idx(x, y), idx(-x, -y), idx(x, -y), idx(-x, y));
                    let c = mu_bar * sign;
                    // w_a = (|a> + c|-a>)/sqrt2, w_b likewise; v1 = (w_a + chi w_b)/sqrt2,
                    // v2 = i(w_a - chi w_b)/sqrt2
                    let half = 0.5;
                    basis.push(vec![(a, half.into()), (na, c * half), (b, chi * half), (nb, chi * c * half)]);
                    basis.push(vec![
                        (a, i * half),
                        (na, i * c * half),
                        (b, -i * chi * half),
                        (nb, -i * chi * c * half),
                    ]);
                }
            }
            basis
        })
        .collect()
}

fn solve_basis(op: &FiberOperator, basis: &SparseBasis, radius: f64, opts: &SpectrumOptions) -> Result<Vec<Pair>> {
    let n = op.dim();
    let m = basis.len();
    let h = &op.matrix;
    let mut columns: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for (s, &x) in h.diag().iter().enumerate() {
        if x != 0.0 {
            columns[s].push((s, Complex64::new(x, 0.0)));
        }
    }
    for &(r, c, v) in h.links() {
        columns[c].push((r, v));
        columns[r].push((c, v.conj()));
    }
    let mut members: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for (k, v) in basis.iter().enumerate() {
        for &(s, z) in v {
            members[s].push((k, z));
        }
    }
    let mut block = Mat::<Complex64>::zeros(m, m);
    for (j, v) in basis.iter().enumerate() {
        for &(s, z) in v {
            for &(t, hv) in &columns[s] {
                for &(k, y) in &members[t] {
                    block[(k, j)] += y.conj() * hv * z;
                }
            }
        }
    }
    let mut scale: f64 = 1.0;
    let mut imag: f64 = 0.0;
    for j in 0..m {
        for k in 0..m {
            scale = scale.max(block[(k, j)].norm());
            imag = imag.max(block[(k, j)].im.abs());
        }
    }
    let real = imag <= 1e-13 * scale;
    let lift = |coef: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> {
        let mut out = vec![ZERO; n];
        for (k, v) in basis.iter().enumerate() {
            let c = coef(k);
            for &(s, z) in v {
                out[s] += c * z;
            }
        }
        out
    };
    let site_weights = |coef: &dyn Fn(usize) -> Complex64| -> f64 {
        let v = lift(coef);
        linalg::ipr(v.iter().map(|z| z.norm_sqr()))
    };
    let finish = |energy: f64, coef: &dyn Fn(usize) -> Complex64| -> Pair {
        if !opts.vectors {
            return Pair { energy, ipr: None, vector: None };
        }
        let ipr = site_weights(coef);
        let vector = is_outlier(energy, radius, opts.tol).then(|| lift(coef));
        Pair { energy, ipr: Some(ipr), vector }
    };
    if real {
        let r = Mat::<f64>::from_fn(m, m, |a, b| block[(a, b)].re);
        if !opts.vectors {
            let vals = linalg::symmetric_eigenvalues(&r)?;
            return Ok(vals.into_iter().map(|e| finish(e, &|_| ZERO)).collect());
        }
        let (vals, u) = linalg::symmetric_eigen(&r)?;
        Ok(vals
            .into_iter()
            .enumerate()
            .map(|(c, e)| finish(e, &|k| Complex64::new(u[(k, c)], 0.0)))
            .collect())
    } else {
        if !opts.vectors {
            let vals = linalg::hermitian_eigenvalues(&block)?;
            return Ok(vals.into_iter().map(|e| finish(e, &|_| ZERO)).collect());
        }
        let (vals, u) = linalg::hermitian_eigen(&block)?;
        Ok(vals.into_iter().enumerate().map(|(c, e)| finish(e, &|k| u[(k, c)])).collect())
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use super::*;

    fn params(phase: f64, lambda: f64, rho: f64, kx: f64, ky: f64) -> SectorParams {
        SectorParams::new(Complex64::from_polar(1.0, phase), lambda, rho, 0.0, kx, ky).unwrap()
    }

    fn dense_eigenvalues(op: &FiberOperator) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&op.to_dense()).unwrap()
    }

    #[test]
    fn hermitian_by_construction() {
        let op = fiber_operator(&params(0.7, 1.0, 0.8, 0.2, 0.5), &RelativeWindow::new(3).unwrap()).unwrap();
        assert_eq!(op.matrix().hermiticity_defect(), 0.0);
        assert!(fiber_operator(&params(0.0, 1.0, 0.0, 0.0, 0.0), &RelativeWindow::new(1).unwrap()).is_err());
    }

    #[test]
    fn pure_pair_hopping_is_bloch_block() {
        let p = params(2.0 * PI / 3.0, 0.0, 1.0, 0.3, 0.1);
        let w = RelativeWindow::new(3).unwrap();
        let op = fiber_operator(&p, &w).unwrap();
        let d = op.to_dense();
        let b = crate::sector_spectra::bloch_composite(&p);
        for i in 0..w.len() {
            for j in 0..w.len() {
                let (si, sj) = (w.site(i), w.site(j));
                let want = match (S.iter().position(|s| *s == si), S.iter().position(|s| *s == sj)) {
                    (Some(a), Some(c)) => b[a][c],
                    _ => ZERO,
                };
                assert_eq!(d[(i, j)], want);
            }
        }
    }

    #[test]
    fn free_case_is_sum_of_dirichlet_chains() {
        let (kx, ky) = (0.1, 0.6);
        let p = params(0.0, 1.0, 0.0, kx, ky);
        let w = RelativeWindow::new(4).unwrap();
        let spec = fiber_spectrum(&fiber_operator(&p, &w).unwrap(), &SpectrumOptions::default()).unwrap();
        let n = w.side();
        let (a, b) = (2.0 * cos2(kx), 2.0 * cos2(ky));
        let mut want = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                let t = |m: usize| (PI * m as f64 / (n + 1) as f64).cos();
                want.push(2.0 * a * t(i) + 2.0 * b * t(j));
            }
        }
        want.sort_by(f64::total_cmp);
        for (x, y) in spec.eigenvalues.iter().zip(&want) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(spec.outliers.is_empty());
    }

    #[test]
    fn reduced_solver_matches_dense() {
        for (phase, rho, kx, ky) in [(2.0 * PI / 3.0, 1.0, 0.0, 0.0), (0.9, -0.4, 0.3, 1.2), (PI, 2.0, 0.2, 0.1)] {
            let p = params(phase, 0.8, rho, kx, ky);
            let op = fiber_operator(&p, &RelativeWindow::new(4).unwrap()).unwrap();
            assert!(symmetry_defect(&op) < 1e-13, "{phase} {rho} {}", symmetry_defect(&op));
            assert_eq!(op.matrix().components().len(), 1);
            let want = dense_eigenvalues(&op);
            for vectors in [false, true] {
                let opts = SpectrumOptions { vectors, ..Default::default() };
                let got = fiber_spectrum(&op, &opts).unwrap();
                for (x, y) in got.eigenvalues.iter().zip(&want) {
                    assert!((x - y).abs() < 1e-11, "{x} {y}");
                }
            }
        }
    }

    #[test]
    fn reduced_vectors_are_eigenvectors() {
        let p = params(2.0 * PI / 3.0, 0.5, 1.0, 0.0, 0.0);
        let op = fiber_operator(&p, &RelativeWindow::new(5).unwrap()).unwrap();
        let spec = fiber_spectrum(&op, &SpectrumOptions { vectors: true, ..Default::default() }).unwrap();
        assert_eq!(spec.outliers.len(), 4);
        for o in &spec.outliers {
            let v = o.vector.as_ref().unwrap();
            let hv = op.matrix().apply(v);
            let res: f64 = hv.iter().zip(v).map(|(a, b)| (a - b * o.energy).norm_sqr()).sum();
            let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!(res.sqrt() < 1e-10 && (nrm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_invariant_under_phase_conjugation() {
        let w = RelativeWindow::new(4).unwrap();
        let a = fiber_spectrum(&fiber_operator(&params(1.1, 0.7, 0.6, 0.3, 0.4), &w).unwrap(), &Default::default()).unwrap();
        let b = fiber_spectrum(&fiber_operator(&params(-1.1, 0.7, 0.6, 0.3, 0.4), &w).unwrap(), &Default::default()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn essential_band_examples() {
        assert_eq!(essential_band(&params(0.0, 1.0, 0.0, 0.0, 0.0)), (-8.0, 8.0));
        assert_eq!(essential_band(&params(0.0, 1.0, 0.0, FRAC_PI_4, FRAC_PI_4)).1, 0.0);
    }
}
