//! Square-lattice cell complex on the torus `Z_Lx x Z_Ly`.
//!
//! Vertex and face ids are `y * Lx + x`; face `(x, y)` is the plaquette whose
//! lower-left corner is vertex `(x, y)`. Edge id `2 * (y * Lx + x)` is the
//! horizontal edge `(x, y) -> (x + 1, y)` and `2 * (y * Lx + x) + 1` the
//! vertical edge `(x, y) -> (x, y + 1)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub type Vertex = usize;
pub type Face = usize;
pub type Edge = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

/// Unit step on the lattice or its dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    R,
    U,
    L,
    D,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::R, Dir::U, Dir::L, Dir::D];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Dir::R => (1, 0),
            Dir::U => (0, 1),
            Dir::L => (-1, 0),
            Dir::D => (0, -1),
        }
    }

    pub fn reverse(self) -> Dir {
        match self {
            Dir::R => Dir::L,
            Dir::U => Dir::D,
            Dir::L => Dir::R,
            Dir::D => Dir::U,
        }
    }
}

impl FromStr for Dir {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "R" | "r" => Ok(Dir::R),
            "U" | "u" => Ok(Dir::U),
            "L" | "l" => Ok(Dir::L),
            "D" | "d" => Ok(Dir::D),
            other => Err(Error::Parse(format!("unknown step letter '{other}'"))),
        }
    }
}

/// Parses `R,U,L,D`; the empty string is the empty path.
pub fn parse_steps(s: &str) -> Result<Vec<Dir>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TorusLattice {
    lx: usize,
    ly: usize,
}

/// String on the lattice: pairs `(v_i, e_i)` with `e_i` joining `v_i` to `v_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StringPath {
    start: Vertex,
    end: Vertex,
    pairs: Vec<(Vertex, Edge)>,
}

/// Dual string: pairs `(f_i, e_i)` with `e_i` shared by `f_i` and `f_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualStringPath {
    start: Face,
    end: Face,
    pairs: Vec<(Face, Edge)>,
}

impl StringPath {
    pub fn empty(v: Vertex) -> Self {
        StringPath { start: v, end: v, pairs: Vec::new() }
    }
    pub fn start(&self) -> Vertex {
        self.start
    }
    pub fn end(&self) -> Vertex {
        self.end
    }
    pub fn pairs(&self) -> &[(Vertex, Edge)] {
        &self.pairs
    }
    pub fn len(&self) -> usize {
        self.pairs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }
}

impl DualStringPath {
    pub fn empty(f: Face) -> Self {
        DualStringPath { start: f, end: f, pairs: Vec::new() }
    }
    pub fn start(&self) -> Face {
        self.start
    }
    pub fn end(&self) -> Face {
        self.end
    }
    pub fn pairs(&self) -> &[(Face, Edge)] {
        &self.pairs
    }
    pub fn len(&self) -> usize {
        self.pairs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }
}

impl TorusLattice {
    /// Both sides must be at least 2 so that no edge is a loop.
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx < 2 || ly < 2 {
            return Err(Error::InvalidLattice(format!(
                "torus sides must be at least 2, got {lx}x{ly}"
            )));
        }
        if lx.checked_mul(ly).is_none_or(|n| n > 1 << 20) {
            return Err(Error::InvalidLattice(format!("torus {lx}x{ly} is too large")));
        }
        Ok(TorusLattice { lx, ly })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }
    pub fn ly(&self) -> usize {
        self.ly
    }
    pub fn is_square(&self) -> bool {
        self.lx == self.ly
    }
    pub fn num_vertices(&self) -> usize {
        self.lx * self.ly
    }
    pub fn num_faces(&self) -> usize {
        self.lx * self.ly
    }
    pub fn num_edges(&self) -> usize {
        2 * self.lx * self.ly
    }

    fn wrap(&self, x: i64, y: i64) -> (usize, usize) {
        (
            x.rem_euclid(self.lx as i64) as usize,
            y.rem_euclid(self.ly as i64) as usize,
        )
    }

    pub fn vertex(&self, x: i64, y: i64) -> Vertex {
        let (x, y) = self.wrap(x, y);
        y * self.lx + x
    }
    pub fn face(&self, x: i64, y: i64) -> Face {
        self.vertex(x, y)
    }
    pub fn coords(&self, site: usize) -> (i64, i64) {
        ((site % self.lx) as i64, (site / self.lx) as i64)
    }

    pub fn h_edge(&self, x: i64, y: i64) -> Edge {
        2 * self.vertex(x, y)
    }
    pub fn v_edge(&self, x: i64, y: i64) -> Edge {
        2 * self.vertex(x, y) + 1
    }
    pub fn edge_kind(&self, e: Edge) -> EdgeKind {
        if e.is_multiple_of(2) {
            EdgeKind::Horizontal
        } else {
            EdgeKind::Vertical
        }
    }
    /// Coordinates of the tail vertex.
    pub fn edge_base(&self, e: Edge) -> (i64, i64) {
        self.coords(e / 2)
    }
    pub fn tail(&self, e: Edge) -> Vertex {
        e / 2
    }
    pub fn head(&self, e: Edge) -> Vertex {
        let (x, y) = self.edge_base(e);
        match self.edge_kind(e) {
            EdgeKind::Horizontal => self.vertex(x + 1, y),
            EdgeKind::Vertical => self.vertex(x, y + 1),
        }
    }
    /// Face on the left of the oriented edge.
    pub fn left_face(&self, e: Edge) -> Face {
        let (x, y) = self.edge_base(e);
        match self.edge_kind(e) {
            EdgeKind::Horizontal => self.face(x, y),
            EdgeKind::Vertical => self.face(x - 1, y),
        }
    }
    /// Face on the right of the oriented edge.
    pub fn right_face(&self, e: Edge) -> Face {
        let (x, y) = self.edge_base(e);
        match self.edge_kind(e) {
            EdgeKind::Horizontal => self.face(x, y - 1),
            EdgeKind::Vertical => self.face(x, y),
        }
    }
    /// Boundary edges of a face: bottom, right, top, left.
    pub fn face_edges(&self, f: Face) -> [Edge; 4] {
        let (x, y) = self.coords(f);
        [self.h_edge(x, y), self.v_edge(x + 1, y), self.h_edge(x, y + 1), self.v_edge(x, y)]
    }
    /// Edges at a vertex: the two outgoing (right, up), then the two incoming.
    pub fn vertex_edges(&self, v: Vertex) -> [Edge; 4] {
        let (x, y) = self.coords(v);
        [self.h_edge(x, y), self.v_edge(x, y), self.h_edge(x - 1, y), self.v_edge(x, y - 1)]
    }
    pub fn other_end(&self, v: Vertex, e: Edge) -> Vertex {
        if self.tail(e) == v {
            self.head(e)
        } else {
            self.tail(e)
        }
    }
    pub fn other_face(&self, f: Face, e: Edge) -> Face {
        if self.left_face(e) == f {
            self.right_face(e)
        } else {
            self.left_face(e)
        }
    }
    pub fn is_outgoing(&self, v: Vertex, e: Edge) -> bool {
        self.tail(e) == v
    }
    pub fn is_left_face(&self, f: Face, e: Edge) -> bool {
        self.left_face(e) == f
    }

    /// Lattice step from `v`: the edge used and the vertex reached.
    pub fn vertex_step(&self, v: Vertex, d: Dir) -> (Edge, Vertex) {
        let (x, y) = self.coords(v);
        let e = match d {
            Dir::R => self.h_edge(x, y),
            Dir::U => self.v_edge(x, y),
            Dir::L => self.h_edge(x - 1, y),
            Dir::D => self.v_edge(x, y - 1),
        };
        let (dx, dy) = d.delta();
        (e, self.vertex(x + dx, y + dy))
    }

    /// Dual step from `f`: the edge crossed and the face reached.
    pub fn face_step(&self, f: Face, d: Dir) -> (Edge, Face) {
        let (x, y) = self.coords(f);
        let e = match d {
            Dir::R => self.v_edge(x + 1, y),
            Dir::U => self.h_edge(x, y + 1),
            Dir::L => self.v_edge(x, y),
            Dir::D => self.h_edge(x, y),
        };
        let (dx, dy) = d.delta();
        (e, self.face(x + dx, y + dy))
    }

    pub fn string_from_pairs(&self, pairs: Vec<(Vertex, Edge)>) -> Result<StringPath> {
        let Some(&(start, _)) = pairs.first() else {
            return Err(Error::InvalidPath("use StringPath::empty for empty strings".into()));
        };
        let mut cur = start;
        for &(v, e) in &pairs {
            if v != cur || e >= self.num_edges() || (self.tail(e) != v && self.head(e) != v) {
                return Err(Error::InvalidPath(format!("pair ({v}, {e}) does not continue at {cur}")));
            }
            cur = self.other_end(v, e);
        }
        Ok(StringPath { start, end: cur, pairs })
    }

    pub fn dual_from_pairs(&self, pairs: Vec<(Face, Edge)>) -> Result<DualStringPath> {
        let Some(&(start, _)) = pairs.first() else {
            return Err(Error::InvalidPath("use DualStringPath::empty for empty strings".into()));
        };
        let mut cur = start;
        for &(f, e) in &pairs {
            if f != cur
                || e >= self.num_edges()
                || (self.left_face(e) != f && self.right_face(e) != f)
            {
                return Err(Error::InvalidPath(format!("pair ({f}, {e}) does not continue at {cur}")));
            }
            cur = self.other_face(f, e);
        }
        Ok(DualStringPath { start, end: cur, pairs })
    }

    pub fn string_from_steps(&self, start: Vertex, steps: &[Dir]) -> Result<StringPath> {
        self.check_site(start)?;
        let mut cur = start;
        let mut pairs = Vec::with_capacity(steps.len());
        for &d in steps {
            let (e, next) = self.vertex_step(cur, d);
            pairs.push((cur, e));
            cur = next;
        }
        Ok(StringPath { start, end: cur, pairs })
    }

    pub fn dual_from_steps(&self, start: Face, steps: &[Dir]) -> Result<DualStringPath> {
        self.check_site(start)?;
        let mut cur = start;
        let mut pairs = Vec::with_capacity(steps.len());
        for &d in steps {
            let (e, next) = self.face_step(cur, d);
            pairs.push((cur, e));
            cur = next;
        }
        Ok(DualStringPath { start, end: cur, pairs })
    }

    fn check_site(&self, s: usize) -> Result<()> {
        if s >= self.num_vertices() {
            return Err(Error::InvalidPath(format!("site {s} outside the {}", self)));
        }
        Ok(())
    }

    /// Counterclockwise boundary of `f`, starting at its lower-left corner.
    pub fn face_boundary(&self, f: Face) -> StringPath {
        self.string_from_steps(f, &[Dir::R, Dir::U, Dir::L, Dir::D])
            .expect("face id in range")
    }

    /// Counterclockwise dual loop around `v`, starting at the face north-east of it.
    pub fn vertex_dual_star(&self, v: Vertex) -> DualStringPath {
        let (x, y) = self.coords(v);
        self.dual_from_steps(self.face(x, y), &[Dir::L, Dir::D, Dir::R, Dir::U])
            .expect("vertex id in range")
    }

    /// A shortest string from `a` to `b`: horizontal moves first, then vertical.
    pub fn path_between(&self, a: Vertex, b: Vertex) -> StringPath {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let shortest = |d: i64, n: i64| {
            let d = d.rem_euclid(n);
            if 2 * d > n {
                d - n
            } else {
                d
            }
        };
        let dx = shortest(bx - ax, self.lx as i64);
        let dy = shortest(by - ay, self.ly as i64);
        let mut steps = Vec::new();
        steps.extend(std::iter::repeat_n(if dx >= 0 { Dir::R } else { Dir::L }, dx.unsigned_abs() as usize));
        steps.extend(std::iter::repeat_n(if dy >= 0 { Dir::U } else { Dir::D }, dy.unsigned_abs() as usize));
        self.string_from_steps(a, &steps).expect("vertex id in range")
    }

    pub fn concat(&self, a: &StringPath, b: &StringPath) -> Result<StringPath> {
        if a.end != b.start {
            return Err(Error::InvalidPath(format!(
                "cannot concatenate: first string ends at {}, second starts at {}",
                a.end, b.start
            )));
        }
        let mut pairs = a.pairs.clone();
        pairs.extend_from_slice(&b.pairs);
        Ok(StringPath { start: a.start, end: b.end, pairs })
    }

    pub fn concat_dual(&self, a: &DualStringPath, b: &DualStringPath) -> Result<DualStringPath> {
        if a.end != b.start {
            return Err(Error::InvalidPath(format!(
                "cannot concatenate: first dual string ends at {}, second starts at {}",
                a.end, b.start
            )));
        }
        let mut pairs = a.pairs.clone();
        pairs.extend_from_slice(&b.pairs);
        Ok(DualStringPath { start: a.start, end: b.end, pairs })
    }

    pub fn reverse(&self, a: &StringPath) -> StringPath {
        let pairs = a.pairs.iter().rev().map(|&(v, e)| (self.other_end(v, e), e)).collect();
        StringPath { start: a.end, end: a.start, pairs }
    }

    pub fn reverse_dual(&self, a: &DualStringPath) -> DualStringPath {
        let pairs = a.pairs.iter().rev().map(|&(f, e)| (self.other_face(f, e), e)).collect();
        DualStringPath { start: a.end, end: a.start, pairs }
    }

    /// Signed crossing number `c(gamma, dual)`, defined so that
    /// `F^chi_gamma F^g_dual = chi(g)^c F^g_dual F^chi_gamma`.
    ///
    /// A shared edge counts `+1` when `gamma` passes the dual string from the
    /// dual string's right to its left (equivalently, the dual string passes
    /// from `gamma`'s left to its right), and `-1` otherwise.
    pub fn crossing_number(&self, gamma: &StringPath, dual: &DualStringPath) -> i64 {
        let mut c = 0;
        for &(v, e) in &gamma.pairs {
            let along = if self.is_outgoing(v, e) { 1 } else { -1 };
            for &(f, e2) in &dual.pairs {
                if e2 == e {
                    c += along * if self.is_left_face(f, e) { 1 } else { -1 };
                }
            }
        }
        c
    }

    /// Unwrapped step displacement of a string pair.
    fn lifted_step(&self, v: Vertex, e: Edge) -> (i64, i64) {
        let s = if self.is_outgoing(v, e) { 1 } else { -1 };
        match self.edge_kind(e) {
            EdgeKind::Horizontal => (s, 0),
            EdgeKind::Vertical => (0, s),
        }
    }

    /// Lift of a closed string to the plane, as a vertex sequence.
    ///
    /// Fails unless the lift closes, i.e. the loop is null-homologous.
    pub fn lift_loop(&self, lambda: &StringPath) -> Result<Vec<(i64, i64)>> {
        if !lambda.is_closed() {
            return Err(Error::InvalidPath("winding requires a closed string".into()));
        }
        let mut p = self.coords(lambda.start);
        let mut pts = vec![p];
        for &(v, e) in &lambda.pairs {
            let (dx, dy) = self.lifted_step(v, e);
            p = (p.0 + dx, p.1 + dy);
            pts.push(p);
        }
        let d = (p.0 - pts[0].0, p.1 - pts[0].1);
        if d != (0, 0) {
            return Err(Error::NonContractible(d));
        }
        Ok(pts)
    }

    /// Winding number of a closed contractible string around `f`.
    pub fn winding_number(&self, lambda: &StringPath, f: Face) -> Result<i64> {
        self.winding_number_ray(lambda, f, Dir::R)
    }

    /// Winding number computed with a dual ray leaving `f` in direction `ray`.
    ///
    /// The loop is lifted to the plane; the result sums the planar windings
    /// around every lift of `f`, each obtained as the crossing number of the
    /// lifted loop with a straight dual ray to infinity.
    pub fn winding_number_ray(&self, lambda: &StringPath, f: Face, ray: Dir) -> Result<i64> {
        self.check_site(f)?;
        let pts = self.lift_loop(lambda)?;
        let xmin = pts.iter().map(|p| p.0).min().unwrap_or(0);
        let xmax = pts.iter().map(|p| p.0).max().unwrap_or(0);
        let ymin = pts.iter().map(|p| p.1).min().unwrap_or(0);
        let ymax = pts.iter().map(|p| p.1).max().unwrap_or(0);
        let (fx, fy) = self.coords(f);
        let (lx, ly) = (self.lx as i64, self.ly as i64);
        let mut total = 0;
        for a in (xmin - fx).div_euclid(lx)..=(xmax - fx).div_euclid(lx) {
            for b in (ymin - fy).div_euclid(ly)..=(ymax - fy).div_euclid(ly) {
                let (cx, cy) = (fx + a * lx, fy + b * ly);
                total += planar_ray_crossings(&pts, (cx, cy), ray);
            }
        }
        Ok(total)
    }

    /// Oriented edge pairs `(v, e)` with `v` in `set` and the other end of `e` outside.
    pub fn vertex_set_boundary(&self, set: &BTreeSet<Vertex>) -> Vec<(Vertex, Edge)> {
        let mut out = Vec::new();
        for &v in set {
            for e in self.vertex_edges(v) {
                if !set.contains(&self.other_end(v, e)) {
                    out.push((v, e));
                }
            }
        }
        out
    }
}

/// Crossings of a planar closed polyline (unit lattice steps) with the dual
/// ray from the face whose lower-left corner is `face`.
fn planar_ray_crossings(pts: &[(i64, i64)], face: (i64, i64), ray: Dir) -> i64 {
    let (fx, fy) = face;
    let mut c = 0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.0 == b.0 {
            // Vertical step on the line x = a.0 spanning rows min..min+1.
            if a.0.min(b.0) != a.0 || a.1.min(b.1) != fy {
                continue;
            }
            let up = if b.1 > a.1 { 1 } else { -1 };
            match ray {
                Dir::R if a.0 > fx => c += up,
                Dir::L if a.0 <= fx => c -= up,
                _ => {}
            }
        } else {
            if a.0.min(b.0) != fx {
                continue;
            }
            let right = if b.0 > a.0 { 1 } else { -1 };
            match ray {
                Dir::U if a.1 > fy => c -= right,
                Dir::D if a.1 <= fy => c += right,
                _ => {}
            }
        }
    }
    c
}

impl fmt::Display for TorusLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.lx, self.ly)
    }
}

impl FromStr for TorusLattice {
    type Err = Error;
    /// Parses `LxXLy`, e.g. `2x2`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Parse(format!("torus '{s}' is not of the form LxXLy")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad torus dimension '{t}'")))
        };
        TorusLattice::new(parse(a)?, parse(b)?)
    }
}
