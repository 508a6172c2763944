//! String operators, vertex and face projectors, hopping terms and the
//! Hamiltonian `H = H0 + l_e H^e + l_m H^m + l_em H^em`.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{Monomial, Operator};
use super::{Space, StateVector};
use crate::error::{Error, Result};
use crate::group::{Char, Elem, FiniteAbelianGroup};
use crate::lattice::{DualStringPath, Edge, Face, StringPath, TorusLattice, Vertex};

/// Whether an edge is used along (`AsWritten`) or against its orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    AsWritten,
    Reversed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub lambda_e: f64,
    pub lambda_m: f64,
    pub lambda_em: f64,
    /// Extra weight `1 + m` on the flux-hop half of the pair term.
    pub mass: f64,
}

impl Couplings {
    pub fn new(lambda_e: f64, lambda_m: f64, lambda_em: f64) -> Self {
        Couplings { lambda_e, lambda_m, lambda_em, mass: 0.0 }
    }

    pub fn static_model() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn with_mass(self, mass: f64) -> Self {
        Couplings { mass, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_e, self.lambda_m, self.lambda_em, self.mass];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("couplings must be finite".into()));
        }
        if self.mass < 0.0 {
            return Err(Error::InvalidArgument("mass must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub group: FiniteAbelianGroup,
    pub torus: TorusLattice,
    pub couplings: Couplings,
}

/// Operator factory for one group on one torus; projectors are built once.
#[derive(Debug)]
pub struct Model {
    space: Arc<Space>,
    a: Vec<Vec<Operator>>,
    b: Vec<Vec<Operator>>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Model {
    pub fn new(group: FiniteAbelianGroup, lattice: TorusLattice) -> Result<Self> {
        let space = Arc::new(Space::new(group, lattice)?);
        let mut m = Model { space, a: Vec::new(), b: Vec::new() };
        let g = m.group().clone();
        let l = *m.lattice();
        m.a = (0..l.num_vertices())
            .map(|v| g.characters().map(|chi| m.build_a(v, chi)).collect())
            .collect();
        m.b = (0..l.num_faces())
            .map(|f| g.elements().map(|h| m.build_b(f, h)).collect())
            .collect();
        Ok(m)
    }

    pub fn from_spec(spec: &HamiltonianSpec) -> Result<Self> {
        Self::new(spec.group.clone(), spec.torus)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }
    pub fn group(&self) -> &FiniteAbelianGroup {
        self.space.group()
    }
    pub fn lattice(&self) -> &TorusLattice {
        self.space.lattice()
    }

    fn mono(&self, m: Monomial) -> Operator {
        Operator::monomial(&self.space, m)
    }

    /// `L^h` on edge `e`; reversed orientation uses `h^-1`.
    pub fn l_op(&self, e: Edge, h: Elem, orient: Orientation) -> Operator {
        let h = match orient {
            Orientation::AsWritten => h,
            Orientation::Reversed => self.group().inv(h),
        };
        self.mono(Monomial::edge(e, h, 0))
    }

    /// `T^chi` on edge `e`; reversed orientation uses `conj chi`.
    pub fn t_op(&self, e: Edge, chi: Char, orient: Orientation) -> Operator {
        let chi = match orient {
            Orientation::AsWritten => chi,
            Orientation::Reversed => self.group().char_inv(chi),
        };
        self.mono(Monomial::edge(e, 0, chi))
    }

    pub fn string_monomial(&self, path: &StringPath, chi: Char) -> Monomial {
        let g = self.group();
        let l = self.lattice();
        path.pairs().iter().fold(Monomial::identity(), |acc, &(v, e)| {
            let x = if l.is_outgoing(v, e) { chi } else { g.char_inv(chi) };
            acc.mul(&Monomial::edge(e, 0, x), g)
        })
    }

    /// Face on the right of the crossed edge gives `L^g`, on the left `L^{g^-1}`.
    pub fn dual_string_monomial(&self, path: &DualStringPath, h: Elem) -> Monomial {
        let g = self.group();
        let l = self.lattice();
        path.pairs().iter().fold(Monomial::identity(), |acc, &(f, e)| {
            let x = if l.is_left_face(f, e) { g.inv(h) } else { h };
            acc.mul(&Monomial::edge(e, x, 0), g)
        })
    }

    /// `F^chi_gamma`.
    pub fn string_operator(&self, path: &StringPath, chi: Char) -> Operator {
        self.mono(self.string_monomial(path, chi))
    }

    /// `F^g_dual`.
    pub fn dual_string_operator(&self, path: &DualStringPath, h: Elem) -> Operator {
        self.mono(self.dual_string_monomial(path, h))
    }

    fn build_a(&self, v: Vertex, chi: Char) -> Operator {
        let g = self.group();
        let star = self.lattice().vertex_dual_star(v);
        let n = g.order() as f64;
        let terms = g
            .elements()
            .map(|h| {
                let w = g.char_eval(chi, h).conj() / n;
                self.mono(self.dual_string_monomial(&star, h).scaled(w))
            })
            .collect();
        Operator::sum(&self.space, terms).cached()
    }

    // The face projector onto clockwise holonomy `h`, i.e. counterclockwise
    // holonomy `h^-1`; with the edge rules above this is the labelling under
    // which flux strings obey the string-projector relations.
    fn build_b(&self, f: Face, h: Elem) -> Operator {
        let g = self.group();
        let loop_ = self.lattice().face_boundary(f);
        let n = g.order() as f64;
        let terms = g
            .characters()
            .map(|chi| {
                let w = g.char_eval(chi, h).conj() / n;
                self.mono(self.string_monomial(&loop_, chi).scaled(w))
            })
            .collect();
        Operator::sum(&self.space, terms).cached()
    }

    /// Vertex projector `A_v^chi`.
    pub fn projector_a(&self, v: Vertex, chi: Char) -> Operator {
        self.a[v][chi].clone()
    }

    /// Face projector `B_f^h`.
    pub fn projector_b(&self, f: Face, h: Elem) -> Operator {
        self.b[f][h].clone()
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(&self.space)
    }

    fn single_step(&self, v: Vertex, e: Edge, chi: Char) -> Operator {
        let path = self
            .lattice()
            .string_from_pairs(vec![(v, e)])
            .expect("edge incident to vertex");
        self.string_operator(&path, chi)
    }

    fn single_dual_step(&self, f: Face, e: Edge, h: Elem) -> Operator {
        let path = self
            .lattice()
            .dual_from_pairs(vec![(f, e)])
            .expect("edge on face boundary");
        self.dual_string_operator(&path, h)
    }

    /// `F^{conj chi}_{(v,e)} A^iota_{v'} A^chi_v`: moves charge `chi` from `v` across `e`.
    pub fn charge_move(&self, v: Vertex, e: Edge, chi: Char) -> Operator {
        let g = self.group();
        let w = self.lattice().other_end(v, e);
        Operator::product(
            &self.space,
            vec![
                self.single_step(v, e, g.char_inv(chi)),
                self.projector_a(w, g.trivial_char()),
                self.projector_a(v, chi),
            ],
        )
    }

    /// `F^{h^-1}_{(f,e)} B^1_{f'} B^h_f`: moves flux `h` from `f` across `e`.
    pub fn flux_move(&self, f: Face, e: Edge, h: Elem) -> Operator {
        let g = self.group();
        let w = self.lattice().other_face(f, e);
        Operator::product(
            &self.space,
            vec![
                self.single_dual_step(f, e, g.inv(h)),
                self.projector_b(w, g.identity()),
                self.projector_b(f, h),
            ],
        )
    }

    /// Both directions of charge hopping of `chi` along `e`.
    pub fn charge_hop(&self, e: Edge, chi: Char) -> Operator {
        let l = self.lattice();
        let (v, w) = (l.tail(e), l.head(e));
        self.charge_move(v, e, chi).add(&self.charge_move(w, e, chi))
    }

    /// Both directions of flux hopping of `h` across `e`.
    pub fn flux_hop(&self, e: Edge, h: Elem) -> Operator {
        let l = self.lattice();
        let (f, w) = (l.left_face(e), l.right_face(e));
        self.flux_move(f, e, h).add(&self.flux_move(w, e, h))
    }

    fn nontrivial_chars(&self) -> Vec<Char> {
        self.group().characters().skip(1).collect()
    }

    fn nontrivial_elems(&self) -> Vec<Elem> {
        self.group().elements().skip(1).collect()
    }

    /// `T^e_e`.
    pub fn hopping_eps(&self, e: Edge) -> Operator {
        let ts = self.nontrivial_chars().into_iter().map(|chi| self.charge_hop(e, chi)).collect();
        Operator::sum(&self.space, ts)
    }

    /// `T^m_e`.
    pub fn hopping_mu(&self, e: Edge) -> Operator {
        let ts = self.nontrivial_elems().into_iter().map(|h| self.flux_hop(e, h)).collect();
        Operator::sum(&self.space, ts)
    }

    /// `T^em_e`, with the flux-hop half weighted by `1 + mass`.
    pub fn hopping_em(&self, e: Edge, mass: f64) -> Operator {
        let l = self.lattice();
        let (v, w) = (l.tail(e), l.head(e));
        let (f, fp) = (l.left_face(e), l.right_face(e));
        let mut terms = Vec::new();
        for h in self.nontrivial_elems() {
            let bs = self.projector_b(f, h).add(&self.projector_b(fp, h));
            for chi in self.nontrivial_chars() {
                let a_s = self.projector_a(v, chi).add(&self.projector_a(w, chi));
                terms.push(self.charge_hop(e, chi).mul(&bs));
                terms.push(self.flux_hop(e, h).mul(&a_s).scale_re(1.0 + mass));
            }
        }
        Operator::sum(&self.space, terms)
    }

    /// `H0 = sum_v (1 - A_v^iota) + sum_f (1 - B_f^1)`.
    pub fn h0(&self) -> Operator {
        let l = self.lattice();
        let g = self.group();
        let n = (l.num_vertices() + l.num_faces()) as f64;
        let mut terms = vec![self.identity().scale_re(n)];
        for v in 0..l.num_vertices() {
            terms.push(self.projector_a(v, g.trivial_char()).scale_re(-1.0));
        }
        for f in 0..l.num_faces() {
            terms.push(self.projector_b(f, g.identity()).scale_re(-1.0));
        }
        Operator::sum(&self.space, terms).cached()
    }

    pub fn h_eps(&self) -> Operator {
        let ts = (0..self.lattice().num_edges()).map(|e| self.hopping_eps(e)).collect();
        Operator::sum(&self.space, ts).cached()
    }

    pub fn h_mu(&self) -> Operator {
        let ts = (0..self.lattice().num_edges()).map(|e| self.hopping_mu(e)).collect();
        Operator::sum(&self.space, ts).cached()
    }

    pub fn h_em(&self, mass: f64) -> Operator {
        let ts = (0..self.lattice().num_edges()).map(|e| self.hopping_em(e, mass)).collect();
        Operator::sum(&self.space, ts).cached()
    }

    /// Full Hamiltonian; vanishing couplings drop their terms.
    pub fn hamiltonian(&self, k: &Couplings) -> Result<Operator> {
        k.validate()?;
        let mut terms = vec![self.h0()];
        if k.lambda_e != 0.0 {
            terms.push(self.h_eps().scale_re(k.lambda_e));
        }
        if k.lambda_m != 0.0 {
            terms.push(self.h_mu().scale_re(k.lambda_m));
        }
        if k.lambda_em != 0.0 {
            terms.push(self.h_em(k.mass).scale_re(k.lambda_em));
        }
        Ok(Operator::sum(&self.space, terms).cached())
    }

    /// `J^zeta_{(v,e)} = i(F A A - F A A)`, the current of charge `zeta` out of `v` along `e`.
    pub fn current(&self, v: Vertex, e: Edge, zeta: Char) -> Operator {
        let w = self.lattice().other_end(v, e);
        let i = Complex64::new(0.0, 1.0);
        self.charge_move(v, e, zeta)
            .sub(&self.charge_move(w, e, zeta))
            .scale(i)
    }

    /// `N^zeta_set = sum_{v in set} A_v^zeta`.
    pub fn charge_number(&self, set: &BTreeSet<Vertex>, zeta: Char) -> Operator {
        let ts = set.iter().map(|&v| self.projector_a(v, zeta)).collect();
        Operator::sum(&self.space, ts)
    }

    /// `sum_f B_f^h`.
    pub fn flux_number(&self, h: Elem) -> Operator {
        let ts = (0..self.lattice().num_faces()).map(|f| self.projector_b(f, h)).collect();
        Operator::sum(&self.space, ts)
    }

    /// Number of charged vertices, `sum_v (1 - A_v^iota)`.
    pub fn total_charge_count(&self) -> Operator {
        let l = self.lattice();
        let iota = self.group().trivial_char();
        let mut ts = vec![self.identity().scale_re(l.num_vertices() as f64)];
        ts.extend((0..l.num_vertices()).map(|v| self.projector_a(v, iota).scale_re(-1.0)));
        Operator::sum(&self.space, ts)
    }

    /// Number of faces carrying flux, `sum_f (1 - B_f^1)`.
    pub fn total_flux_count(&self) -> Operator {
        let l = self.lattice();
        let one = self.group().identity();
        let mut ts = vec![self.identity().scale_re(l.num_faces() as f64)];
        ts.extend((0..l.num_faces()).map(|f| self.projector_b(f, one).scale_re(-1.0)));
        Operator::sum(&self.space, ts)
    }

    /// `Omega`: all vertex and face projectors applied to the all-identity configuration.
    pub fn ground_state(&self) -> Result<StateVector> {
        let l = self.lattice();
        let g = self.group();
        let mut psi = StateVector::basis(&self.space, 0);
        for f in 0..l.num_faces() {
            psi = self.projector_b(f, g.identity()).apply(&psi);
        }
        for v in 0..l.num_vertices() {
            psi = self.projector_a(v, g.trivial_char()).apply(&psi);
        }
        if psi.normalize() < 1e-8 {
            return Err(Error::Numerical("projected ground state vanished".into()));
        }
        Ok(psi)
    }

    /// `sum_i c_i X_i` convenience for checks.
    pub fn combo(&self, terms: Vec<(f64, Operator)>) -> Operator {
        Operator::sum(&self.space, terms.into_iter().map(|(w, o)| o.scale(c(w))).collect())
    }
}
