//! Residual checks of the operator identities, symmetries and the
//! continuity equation. Every check reports an operator-norm residual.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use super::model::{Couplings, HamiltonianSpec, Model, Orientation};
use super::operator::{Monomial, Operator};
use super::RESIDUAL_TOL;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::lattice::{Dir, DualStringPath, Edge, EdgeKind, StringPath, TorusLattice, Vertex};
use crate::linalg;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Largest residual over all instances of the identity.
    pub residual: f64,
    pub instances: usize,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(name: &str, residuals: &[f64]) -> Self {
        let residual = residuals.iter().cloned().fold(0.0, f64::max);
        let finite = residuals.iter().all(|r| r.is_finite());
        CheckResult {
            name: name.to_string(),
            residual,
            instances: residuals.len(),
            pass: finite && residual < RESIDUAL_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Conjugation {
    /// `Theta^e`: complex conjugation in the group basis.
    Electric,
    /// `Theta^m`: relabelling `g -> g^-1` on every edge followed by conjugation.
    Magnetic,
}

/// Edge correspondence between a square torus and its dual.
///
/// Faces of the original lattice become vertices of the dual lattice via
/// `(x, y) -> (x, y)` or, with `reflect`, `(x, y) -> (y, x)`; each edge goes to
/// the dual edge joining the images of its two faces. Edges of the listed
/// kinds (in the original lattice) additionally get `|g> -> |g^-1>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DualityMap {
    pub reflect: bool,
    pub invert_horizontal: bool,
    pub invert_vertical: bool,
}

/// The correspondence under which the Fourier-conjugated Hamiltonian equals
/// the dual one.
pub const DUALITY_MAP: DualityMap =
    DualityMap { reflect: false, invert_horizontal: false, invert_vertical: true };

impl DualityMap {
    pub fn edge_image(&self, l: &TorusLattice, e: Edge) -> Edge {
        let (x, y) = l.edge_base(e);
        // The two faces of e, as lifted coordinates (a, b) with b = a + unit step.
        let (a, b) = match l.edge_kind(e) {
            EdgeKind::Horizontal => ((x, y - 1), (x, y)),
            EdgeKind::Vertical => ((x - 1, y), (x, y)),
        };
        let phi = |p: (i64, i64)| if self.reflect { (p.1, p.0) } else { p };
        let (pa, pb) = (phi(a), phi(b));
        if pb.0 == pa.0 + 1 {
            l.h_edge(pa.0, pa.1)
        } else {
            debug_assert_eq!(pb.1, pa.1 + 1);
            l.v_edge(pa.0, pa.1)
        }
    }

    fn inverts(&self, l: &TorusLattice, e: Edge) -> bool {
        match l.edge_kind(e) {
            EdgeKind::Horizontal => self.invert_horizontal,
            EdgeKind::Vertical => self.invert_vertical,
        }
    }

    /// `D X D^*` with `D` = edge permutation, selective inversion, edgewise Fourier.
    pub fn transform(&self, model: &Model, x: &Operator) -> Operator {
        let l = *model.lattice();
        let g = model.group().clone();
        x.map_monomials(&|m: &Monomial| {
            m.fourier(&g)
                .invert_edges(&g, &|e| self.inverts(&l, e))
                .relabel(&|e| self.edge_image(&l, e))
        })
    }
}

fn res(a: &Operator, b: &Operator) -> Result<f64> {
    a.sub(b).norm()
}

fn norm(a: &Operator) -> Result<f64> {
    a.norm()
}

/// `|K H K - H|` (electric) or `|Theta^m H Theta^m - H|` (magnetic), plus the
/// action on the projectors.
pub fn conjugation_check(
    model: &Model,
    couplings: &Couplings,
    which: Conjugation,
) -> Result<Vec<CheckResult>> {
    let g = model.group().clone();
    let l = *model.lattice();
    let theta = |x: &Operator| -> Operator {
        match which {
            Conjugation::Electric => x.conj_entries(),
            Conjugation::Magnetic => {
                let g = g.clone();
                x.map_monomials(&move |m: &Monomial| m.conj_entries(&g).invert_edges(&g, &|_| true))
            }
        }
    };
    let h = model.hamiltonian(couplings)?;
    let label = match which {
        Conjugation::Electric => "electric",
        Conjugation::Magnetic => "magnetic",
    };
    let mut on_a = Vec::new();
    let mut on_b = Vec::new();
    for v in 0..l.num_vertices() {
        for chi in g.characters() {
            let want = match which {
                Conjugation::Electric => model.projector_a(v, g.char_inv(chi)),
                Conjugation::Magnetic => model.projector_a(v, chi),
            };
            on_a.push(res(&theta(&model.projector_a(v, chi)), &want)?);
        }
    }
    for f in 0..l.num_faces() {
        for x in g.elements() {
            let want = match which {
                Conjugation::Electric => model.projector_b(f, x),
                Conjugation::Magnetic => model.projector_b(f, g.inv(x)),
            };
            on_b.push(res(&theta(&model.projector_b(f, x)), &want)?);
        }
    }
    Ok(vec![
        CheckResult::new(&format!("conjugation_{label}_hamiltonian"), &[res(&theta(&h), &h)?]),
        CheckResult::new(&format!("conjugation_{label}_vertex_projectors"), &on_a),
        CheckResult::new(&format!("conjugation_{label}_face_projectors"), &on_b),
    ])
}

/// Residuals of the charge continuity equation on `set` for charge `zeta`:
/// `[i[l_e H^e, N] - l_e sum_{boundary} J, [H^m, N]]`.
pub fn continuity_check(
    model: &Model,
    couplings: &Couplings,
    set: &BTreeSet<Vertex>,
    zeta: usize,
) -> Result<(f64, f64)> {
    if zeta == model.group().trivial_char() {
        return Err(Error::InvalidArgument("continuity needs a nontrivial charge".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let n = model.charge_number(set, zeta);
    let he = model.h_eps().scale_re(couplings.lambda_e);
    let lhs = he.commutator(&n).scale(i);
    let currents: Vec<Operator> = model
        .lattice()
        .vertex_set_boundary(set)
        .into_iter()
        .map(|(v, e)| model.current(v, e, zeta))
        .collect();
    let rhs = Operator::sum(model.space(), currents).scale_re(couplings.lambda_e);
    let r_e = res(&lhs, &rhs)?;
    let r_m = norm(&model.h_mu().commutator(&n))?;
    Ok((r_e, r_m))
}

/// `|[H, sum_v A_v^zeta]|` and `|[H, sum_f B_f^h]|` for every `zeta` and `h`.
pub fn gauge_invariance_check(model: &Model, couplings: &Couplings) -> Result<Vec<CheckResult>> {
    let h = model.hamiltonian(couplings)?;
    let g = model.group();
    let all: BTreeSet<Vertex> = (0..model.lattice().num_vertices()).collect();
    let a = g
        .characters()
        .map(|z| norm(&h.commutator(&model.charge_number(&all, z))))
        .collect::<Result<Vec<_>>>()?;
    let b = g
        .elements()
        .map(|x| norm(&h.commutator(&model.flux_number(x))))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        CheckResult::new("gauge_invariance_vertex", &a),
        CheckResult::new("gauge_invariance_face", &b),
    ])
}

/// `|D H(l_e, l_m) D^* - H(l_m, l_e)|` on a square torus with `m = 0`.
pub fn duality_check(model: &Model, couplings: &Couplings) -> Result<f64> {
    duality_residual(model, couplings, &DUALITY_MAP)
}

pub(crate) fn duality_residual(model: &Model, k: &Couplings, map: &DualityMap) -> Result<f64> {
    if !model.lattice().is_square() {
        return Err(Error::InvalidArgument("duality needs a square torus".into()));
    }
    if k.mass != 0.0 {
        return Err(Error::InvalidArgument("duality needs mass 0".into()));
    }
    let h = model.hamiltonian(k)?;
    let swapped = Couplings { lambda_e: k.lambda_m, lambda_m: k.lambda_e, ..*k };
    let hd = model.hamiltonian(&swapped)?;
    res(&map.transform(model, &h), &hd)
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub exec: Execution,
    /// Compare full spectra of `H` and its dual when the dimension is at most this.
    pub spectrum_dim: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { exec: Execution::Parallel, spectrum_dim: 1024 }
    }
}

type Task<'a> = Box<dyn Fn() -> Result<Vec<CheckResult>> + Send + Sync + 'a>;

fn open_strings(l: &TorusLattice) -> Vec<StringPath> {
    let mut out = Vec::new();
    for steps in [&[Dir::R][..], &[Dir::U], &[Dir::L], &[Dir::D], &[Dir::R, Dir::U], &[Dir::U, Dir::U, Dir::R]] {
        let s = l.string_from_steps(0, steps).expect("start in range");
        if !s.is_closed() {
            out.push(s);
        }
    }
    out
}

fn open_duals(l: &TorusLattice) -> Vec<DualStringPath> {
    let mut out = Vec::new();
    for steps in [&[Dir::R][..], &[Dir::U], &[Dir::L], &[Dir::D], &[Dir::R, Dir::U], &[Dir::D, Dir::D, Dir::L]] {
        let s = l.dual_from_steps(0, steps).expect("start in range");
        if !s.is_closed() {
            out.push(s);
        }
    }
    out
}

/// Runs every identity check for one Hamiltonian specification.
pub fn verify_suite(spec: &HamiltonianSpec, opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    spec.couplings.validate()?;
    let model = Model::from_spec(spec)?;
    let k = spec.couplings;
    let m = &model;
    let tasks: Vec<Task> = vec![
        Box::new(|| local_relations(m)),
        Box::new(|| fourier_relations(m)),
        Box::new(|| projector_algebra(m)),
        Box::new(|| projectors_commute(m)),
        Box::new(|| string_projector_algebra(m)),
        Box::new(|| strings_crossing(m)),
        Box::new(|| face_loop_fourier(m)),
        Box::new(|| frustration_free(m)),
        Box::new(move || hamiltonian_checks(m, &k)),
        Box::new(move || continuity_checks(m, &k)),
        Box::new(move || gauge_invariance_check(m, &k)),
        Box::new(move || conjugation_check(m, &k, Conjugation::Electric)),
        Box::new(move || conjugation_check(m, &k, Conjugation::Magnetic)),
        Box::new(move || duality_checks(m, &k, opts.spectrum_dim)),
    ];
    let parts = exec::try_map(opts.exec, &tasks, |t| t())?;
    Ok(parts.into_iter().flatten().collect())
}

fn local_relations(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let e = 0;
    let fw = Orientation::AsWritten;
    let (mut comm, mut adj, mut group_law) = (Vec::new(), Vec::new(), Vec::new());
    for h in g.elements() {
        let l = m.l_op(e, h, fw);
        adj.push(res(&l.adjoint(), &m.l_op(e, h, Orientation::Reversed))?);
        for chi in g.characters() {
            let t = m.t_op(e, chi, fw);
            let phase = g.char_eval(chi, h).conj();
            comm.push(res(&t.mul(&l), &l.mul(&t).scale(phase))?);
        }
        for k in g.elements() {
            group_law.push(res(&l.mul(&m.l_op(e, k, fw)), &m.l_op(e, g.mul(h, k), fw))?);
        }
    }
    for chi in g.characters() {
        let t = m.t_op(e, chi, fw);
        adj.push(res(&t.adjoint(), &m.t_op(e, chi, Orientation::Reversed))?);
    }
    Ok(vec![
        CheckResult::new("local_commutation", &comm),
        CheckResult::new("local_adjoints", &adj),
        CheckResult::new("local_group_law", &group_law),
    ])
}

/// Single-edge check that `U L^h U^*` is diagonal with entries `conj(xi(h))` and
/// `U T^chi U^*` shifts characters.
fn fourier_relations(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let n = g.order();
    let u = g.fourier_matrix();
    let conj3 = |x: &dyn Fn(usize, usize) -> Complex64| -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                for a in 0..n {
                    for b in 0..n {
                        *z += u[i][a] * x(a, b) * u[j][b].conj();
                    }
                }
            }
        }
        out
    };
    let mut rl = Vec::new();
    let mut rt = Vec::new();
    for h in g.elements() {
        let r = conj3(&|a, b| if a == g.mul(h, b) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        let mut d: f64 = 0.0;
        for (xi, row) in r.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let want = if xi == j { g.char_eval(xi, h).conj() } else { Complex64::new(0.0, 0.0) };
                d = d.max((z - want).norm());
            }
        }
        rl.push(d);
    }
    for chi in g.characters() {
        let r = conj3(&|a, b| if a == b { g.char_eval(chi, a).conj() } else { Complex64::new(0.0, 0.0) });
        let mut d: f64 = 0.0;
        for (xi, row) in r.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                // U T^chi U^* |xi'> = |xi' conj(chi)>
                let want = if j == g.char_mul(xi, chi) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                d = d.max((z - want).norm());
            }
        }
        rt.push(d);
    }
    Ok(vec![
        CheckResult::new("fourier_diagonalizes_l", &rl),
        CheckResult::new("fourier_shifts_t", &rt),
    ])
}

fn projector_algebra(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let l = m.lattice();
    let id = m.identity();
    let (mut ra, mut rb) = (Vec::new(), Vec::new());
    for v in 0..l.num_vertices() {
        let mut sum = Vec::new();
        for chi in g.characters() {
            let a = m.projector_a(v, chi);
            ra.push(res(&a, &a.adjoint())?);
            for xi in g.characters() {
                let want = if chi == xi { a.clone() } else { Operator::zero(m.space()) };
                ra.push(res(&a.mul(&m.projector_a(v, xi)), &want)?);
            }
            sum.push(a);
        }
        ra.push(res(&Operator::sum(m.space(), sum), &id)?);
    }
    for f in 0..l.num_faces() {
        let mut sum = Vec::new();
        for h in g.elements() {
            let b = m.projector_b(f, h);
            rb.push(res(&b, &b.adjoint())?);
            for k in g.elements() {
                let want = if h == k { b.clone() } else { Operator::zero(m.space()) };
                rb.push(res(&b.mul(&m.projector_b(f, k)), &want)?);
            }
            sum.push(b);
        }
        rb.push(res(&Operator::sum(m.space(), sum), &id)?);
    }
    Ok(vec![
        CheckResult::new("vertex_projectors", &ra),
        CheckResult::new("face_projectors", &rb),
    ])
}

fn projectors_commute(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let l = m.lattice();
    let mut r = Vec::new();
    for v in 0..l.num_vertices() {
        for chi in g.characters() {
            let a = m.projector_a(v, chi);
            for f in 0..l.num_faces() {
                for h in g.elements() {
                    r.push(norm(&a.commutator(&m.projector_b(f, h)))?);
                }
            }
            for w in v + 1..l.num_vertices() {
                for xi in g.characters() {
                    r.push(norm(&a.commutator(&m.projector_a(w, xi)))?);
                }
            }
        }
    }
    for f in 0..l.num_faces() {
        for h in g.elements() {
            let b = m.projector_b(f, h);
            for f2 in f + 1..l.num_faces() {
                for k in g.elements() {
                    r.push(norm(&b.commutator(&m.projector_b(f2, k)))?);
                }
            }
        }
    }
    Ok(vec![CheckResult::new("projectors_commute", &r)])
}

fn string_projector_algebra(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let l = m.lattice();
    let (mut ra, mut rb) = (Vec::new(), Vec::new());
    for s in open_strings(l) {
        let (v0, v1) = (s.start(), s.end());
        for xi in g.characters() {
            let f = m.string_operator(&s, xi);
            for chi in g.characters() {
                let a0 = m.projector_a(v0, chi);
                let want0 = f.mul(&m.projector_a(v0, g.char_mul(chi, g.char_inv(xi))));
                ra.push(res(&a0.mul(&f), &want0)?);
                let a1 = m.projector_a(v1, chi);
                let want1 = f.mul(&m.projector_a(v1, g.char_mul(chi, xi)));
                ra.push(res(&a1.mul(&f), &want1)?);
                for w in 0..l.num_vertices() {
                    if w != v0 && w != v1 {
                        ra.push(norm(&m.projector_a(w, chi).commutator(&f))?);
                    }
                }
            }
            for fc in 0..l.num_faces() {
                for h in g.elements() {
                    rb.push(norm(&m.projector_b(fc, h).commutator(&f))?);
                }
            }
        }
    }
    for s in open_duals(l) {
        let (f0, f1) = (s.start(), s.end());
        for x in g.elements() {
            let f = m.dual_string_operator(&s, x);
            for h in g.elements() {
                let b0 = m.projector_b(f0, h);
                let want0 = f.mul(&m.projector_b(f0, g.mul(h, g.inv(x))));
                rb.push(res(&b0.mul(&f), &want0)?);
                let b1 = m.projector_b(f1, h);
                let want1 = f.mul(&m.projector_b(f1, g.mul(h, x)));
                rb.push(res(&b1.mul(&f), &want1)?);
                for w in 0..l.num_faces() {
                    if w != f0 && w != f1 {
                        rb.push(norm(&m.projector_b(w, h).commutator(&f))?);
                    }
                }
            }
            for v in 0..l.num_vertices() {
                for chi in g.characters() {
                    ra.push(norm(&m.projector_a(v, chi).commutator(&f))?);
                }
            }
        }
    }
    Ok(vec![
        CheckResult::new("string_projector_vertex", &ra),
        CheckResult::new("string_projector_face", &rb),
    ])
}

fn strings_crossing(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let l = m.lattice();
    let mut strings = open_strings(l);
    strings.push(l.face_boundary(0));
    strings.push(l.string_from_steps(0, &[Dir::R, Dir::U, Dir::U, Dir::L, Dir::D, Dir::D]).expect("in range"));
    let mut duals = open_duals(l);
    duals.push(l.vertex_dual_star(0));
    duals.push(l.vertex_dual_star(l.vertex(1, 1)));
    let mut r = Vec::new();
    for s in &strings {
        for d in &duals {
            let c = l.crossing_number(s, d);
            for chi in g.characters() {
                let fs = m.string_operator(s, chi);
                for h in g.elements() {
                    let fd = m.dual_string_operator(d, h);
                    let phase = g.char_eval(chi, h).powi(c as i32);
                    r.push(res(&fs.mul(&fd), &fd.mul(&fs).scale(phase))?);
                }
            }
        }
    }
    Ok(vec![CheckResult::new("strings_crossing", &r)])
}

fn face_loop_fourier(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let l = m.lattice();
    let mut r = Vec::new();
    for f in 0..l.num_faces() {
        let lp = l.face_boundary(f);
        for chi in g.characters() {
            let sum = Operator::sum(
                m.space(),
                g.elements().map(|h| m.projector_b(f, h).scale(g.char_eval(chi, h))).collect(),
            );
            r.push(res(&m.string_operator(&lp, chi), &sum)?);
        }
    }
    Ok(vec![CheckResult::new("face_loop_fourier", &r)])
}

fn frustration_free(m: &Model) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let l = m.lattice();
    let om = m.ground_state()?;
    let one = Complex64::new(1.0, 0.0);
    let expect = |o: &Operator| om.inner(&o.apply(&om));
    let mut r = Vec::new();
    for v in 0..l.num_vertices() {
        for chi in g.characters() {
            let want = if chi == g.trivial_char() { one } else { Complex64::new(0.0, 0.0) };
            r.push((expect(&m.projector_a(v, chi)) - want).norm());
        }
    }
    for f in 0..l.num_faces() {
        for h in g.elements() {
            let want = if h == g.identity() { one } else { Complex64::new(0.0, 0.0) };
            r.push((expect(&m.projector_b(f, h)) - want).norm());
        }
    }
    let mut loops = vec![l.face_boundary(0), l.face_boundary(l.num_faces() - 1)];
    loops.push(l.string_from_steps(0, &[Dir::R, Dir::U, Dir::U, Dir::L, Dir::D, Dir::D]).expect("in range"));
    let mut rl = Vec::new();
    for lp in &loops {
        for chi in g.characters() {
            rl.push((expect(&m.string_operator(lp, chi)) - one).norm());
        }
    }
    for v in 0..l.num_vertices() {
        for h in g.elements() {
            rl.push((expect(&m.dual_string_operator(&l.vertex_dual_star(v), h)) - one).norm());
        }
    }
    Ok(vec![
        CheckResult::new("frustration_free", &r),
        CheckResult::new("closed_loops_trivial", &rl),
    ])
}

fn hamiltonian_checks(m: &Model, k: &Couplings) -> Result<Vec<CheckResult>> {
    let h = m.hamiltonian(k)?;
    let herm = res(&h, &h.adjoint())?;
    let mut terms = Vec::new();
    let g = m.group();
    let l = m.lattice();
    let mut h0_terms = Vec::new();
    for v in 0..l.num_vertices() {
        h0_terms.push(m.projector_a(v, g.trivial_char()));
    }
    for f in 0..l.num_faces() {
        h0_terms.push(m.projector_b(f, g.identity()));
    }
    for i in 0..h0_terms.len() {
        for j in i + 1..h0_terms.len() {
            terms.push(norm(&h0_terms[i].commutator(&h0_terms[j]))?);
        }
    }
    let nq = norm(&h.commutator(&m.total_charge_count()))?;
    let nf = norm(&h.commutator(&m.total_flux_count()))?;
    let mut hop = Vec::new();
    for e in 0..l.num_edges() {
        let t = m.hopping_eps(e);
        hop.push(res(&t, &t.adjoint())?);
        let t = m.hopping_mu(e);
        hop.push(res(&t, &t.adjoint())?);
        let t = m.hopping_em(e, k.mass);
        hop.push(res(&t, &t.adjoint())?);
    }
    Ok(vec![
        CheckResult::new("hamiltonian_hermitian", &[herm]),
        CheckResult::new("hopping_terms_hermitian", &hop),
        CheckResult::new("static_terms_commute", &terms),
        CheckResult::new("number_operators_conserved", &[nq, nf]),
    ])
}

fn continuity_checks(m: &Model, k: &Couplings) -> Result<Vec<CheckResult>> {
    let g = m.group();
    let l = m.lattice();
    let sets: Vec<BTreeSet<Vertex>> = vec![
        [0].into_iter().collect(),
        [l.vertex(0, 0), l.vertex(1, 0)].into_iter().collect(),
        (0..l.num_vertices()).collect(),
    ];
    let (mut re, mut rm) = (Vec::new(), Vec::new());
    for set in &sets {
        for z in g.characters().skip(1) {
            let (a, b) = continuity_check(m, k, set, z)?;
            re.push(a);
            rm.push(b);
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let (mut pair, mut local) = (Vec::new(), Vec::new());
    for e in 0..l.num_edges() {
        let t = m.hopping_eps(e);
        for z in g.characters().skip(1) {
            let parts: Vec<Operator> =
                (0..l.num_vertices()).map(|v| t.commutator(&m.projector_a(v, z))).collect();
            pair.push(norm(&Operator::sum(m.space(), parts))?);
            for v in [l.tail(e), l.head(e)] {
                let lhs = t.commutator(&m.projector_a(v, z)).scale(i);
                local.push(res(&lhs, &m.current(v, e, z))?);
            }
        }
    }
    Ok(vec![
        CheckResult::new("continuity_charge", &re),
        CheckResult::new("continuity_flux_hopping_neutral", &rm),
        CheckResult::new("continuity_edge_balance", &pair),
        CheckResult::new("continuity_local_current", &local),
    ])
}

fn duality_checks(m: &Model, k: &Couplings, spectrum_dim: usize) -> Result<Vec<CheckResult>> {
    if !m.lattice().is_square() || k.mass != 0.0 {
        return Ok(Vec::new());
    }
    let mut out = vec![CheckResult::new("duality", &[duality_check(m, k)?])];
    if m.space().dim() <= spectrum_dim {
        let swapped = Couplings { lambda_e: k.lambda_m, lambda_m: k.lambda_e, ..*k };
        let ea = spectrum(&m.hamiltonian(k)?)?;
        let eb = spectrum(&m.hamiltonian(&swapped)?)?;
        let d = ea.iter().zip(&eb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // Dense eigenvalues carry solver round-off, so compare at that scale.
        out.push(CheckResult {
            name: "duality_spectrum".into(),
            residual: d,
            instances: 1,
            pass: d < 1e-10,
        });
    }
    Ok(out)
}

/// All eigenvalues of a materializable Hermitian operator, ascending.
pub fn spectrum(h: &Operator) -> Result<Vec<f64>> {
    let mat = h.matrix()?;
    let n = mat.rows();
    let mut uf = linalg::UnionFind::new(n);
    for (_, (i, j)) in mat.iter() {
        uf.union(i, j);
    }
    let mut all = Vec::with_capacity(n);
    for comp in uf.groups() {
        let mut pos = vec![usize::MAX; 0];
        pos.resize(n, usize::MAX);
        for (k, &s) in comp.iter().enumerate() {
            pos[s] = k;
        }
        let mut d = faer::Mat::<Complex64>::zeros(comp.len(), comp.len());
        for &s in &comp {
            if let Some(row) = mat.outer_view(s) {
                for (j, v) in row.iter() {
                    d[(pos[s], pos[j])] += *v;
                }
            }
        }
        all.extend(linalg::hermitian_eigenvalues(&d)?);
    }
    all.sort_by(|a, b| a.total_cmp(b));
    Ok(all)
}
