//! Finite abelian groups `Z_{n1} x ... x Z_{nr}`, their characters and the
//! finite Fourier transform.
//!
//! Elements and characters are both addressed by a dense index in
//! lexicographic order of their coordinate tuples (first factor most
//! significant). Character values are computed from the exact rational
//! angle `sum m_i g_i / n_i`, never by multiplying cached floats.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense index of a group element.
pub type Elem = usize;
/// Dense index of a character.
pub type Char = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
    size: usize,
    /// Common denominator of all character angles.
    modulus: usize,
    mul: Vec<Elem>,
    inv: Vec<Elem>,
}

/// Element as an explicit coordinate tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub coords: Vec<usize>,
}

/// Character as an explicit exponent tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    pub coords: Vec<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `exp(2 pi i k / n)`, reduced so that symmetric angles give symmetric values.
pub fn root_of_unity(k: i64, n: usize) -> Complex64 {
    let n = n as i64;
    let k = k.rem_euclid(n);
    if (4 * k) % n == 0 {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // Map into (-n/2, n/2] so that conjugate pairs are exact mirrors.
    let k = if 2 * k > n { k - n } else { k };
    let theta = 2.0 * PI * (k as f64) / (n as f64);
    Complex64::new(theta.cos(), theta.sin())
}

impl FiniteAbelianGroup {
    pub fn new(orders: &[usize]) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidGroup("empty list of cyclic orders".into()));
        }
        if orders.contains(&0) {
            return Err(Error::InvalidGroup("cyclic order must be at least 1".into()));
        }
        let size = orders
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidGroup("group order overflows".into()))?;
        if size > 1 << 16 {
            return Err(Error::InvalidGroup(format!("group order {size} is too large")));
        }
        let modulus = orders.iter().fold(1, |acc, &n| acc / gcd(acc, n) * n);
        let mut g = FiniteAbelianGroup {
            orders: orders.to_vec(),
            size,
            modulus,
            mul: Vec::new(),
            inv: Vec::new(),
        };
        let coords: Vec<Vec<usize>> = (0..size).map(|i| g.coords_of(i)).collect();
        g.mul = (0..size * size)
            .map(|ab| {
                let (a, b) = (ab / size, ab % size);
                let c: Vec<usize> = (0..orders.len())
                    .map(|i| (coords[a][i] + coords[b][i]) % orders[i])
                    .collect();
                g.index_of(&c)
            })
            .collect();
        g.inv = (0..size)
            .map(|a| {
                let c: Vec<usize> = (0..orders.len())
                    .map(|i| (orders[i] - coords[a][i]) % orders[i])
                    .collect();
                g.index_of(&c)
            })
            .collect();
        Ok(g)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn order(&self) -> usize {
        self.size
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn identity(&self) -> Elem {
        0
    }

    /// The trivial character `iota`.
    pub fn trivial_char(&self) -> Char {
        0
    }

    pub fn coords_of(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.orders.len()];
        let mut rest = idx;
        for i in (0..self.orders.len()).rev() {
            out[i] = rest % self.orders[i];
            rest /= self.orders[i];
        }
        out
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.orders)
            .fold(0, |acc, (&c, &n)| acc * n + c % n)
    }

    pub fn element(&self, coords: &[usize]) -> Result<Elem> {
        self.check_coords(coords)?;
        Ok(self.index_of(coords))
    }

    pub fn character(&self, coords: &[usize]) -> Result<Char> {
        self.check_coords(coords)?;
        Ok(self.index_of(coords))
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        if coords.len() != self.orders.len() {
            return Err(Error::DimensionMismatch {
                expected: self.orders.len(),
                found: coords.len(),
            });
        }
        if let Some((c, n)) = coords.iter().zip(&self.orders).find(|(c, n)| *c >= *n) {
            return Err(Error::InvalidGroup(format!("coordinate {c} out of range for Z{n}")));
        }
        Ok(())
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.size
    }

    pub fn characters(&self) -> std::ops::Range<Char> {
        0..self.size
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a * self.size + b]
    }

    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a]
    }

    /// Pointwise product of characters; same table as the element law.
    pub fn char_mul(&self, a: Char, b: Char) -> Char {
        self.mul(a, b)
    }

    pub fn char_inv(&self, a: Char) -> Char {
        self.inv(a)
    }

    /// Numerator `k` of the angle `2 pi k / modulus` of `chi(g)`.
    pub fn char_angle(&self, chi: Char, g: Elem) -> i64 {
        let m = self.coords_of(chi);
        let x = self.coords_of(g);
        let k: usize = (0..self.orders.len())
            .map(|i| m[i] * x[i] % self.orders[i] * (self.modulus / self.orders[i]))
            .sum();
        (k % self.modulus) as i64
    }

    pub fn char_eval(&self, chi: Char, g: Elem) -> Complex64 {
        root_of_unity(self.char_angle(chi, g), self.modulus)
    }

    /// Checked evaluation on explicit tuples.
    pub fn char_eval_tuple(&self, chi: &Character, g: &GroupElement) -> Result<Complex64> {
        let c = self.character(&chi.coords)?;
        let e = self.element(&g.coords)?;
        Ok(self.char_eval(c, e))
    }

    /// Character with the same coordinates as the element `g`.
    ///
    /// This is the identification `G ~ G^` used by the duality map;
    /// `pairing(h, x) = char_eval(dual_char(h), x)` is symmetric.
    pub fn dual_char(&self, g: Elem) -> Char {
        g
    }

    /// Element with the same coordinates as the character `chi`.
    pub fn dual_elem(&self, chi: Char) -> Elem {
        chi
    }

    /// `U[chi, g] = |G|^{-1/2} conj(chi(g))`, row-major.
    pub fn fourier_matrix(&self) -> Vec<Vec<Complex64>> {
        let s = 1.0 / (self.size as f64).sqrt();
        self.characters()
            .map(|chi| self.elements().map(|g| self.char_eval(chi, g).conj() * s).collect())
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.size == 1
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    /// Parses `Z2`, `Z3`, `Z2xZ4`, ...
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty group spec".into()));
        }
        let orders = s
            .split(['x', 'X'])
            .map(|part| {
                let p = part.trim();
                p.strip_prefix('Z')
                    .or_else(|| p.strip_prefix('z'))
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad cyclic factor '{p}' in group '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&orders)
    }
}

/// Parses a comma-separated integer tuple such as `1` or `1,0`.
pub fn parse_tuple(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad tuple entry '{p}' in '{s}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn make_group_examples() {
        let z2 = FiniteAbelianGroup::new(&[2]).unwrap();
        assert_eq!(z2.order(), 2);
        assert_eq!(z2.char_eval(1, 1), Complex64::new(-1.0, 0.0));
        let z1 = FiniteAbelianGroup::new(&[1]).unwrap();
        assert_eq!(z1.order(), 1);
        assert_eq!(z1.characters().len(), 1);
        let z23 = FiniteAbelianGroup::new(&[2, 3]).unwrap();
        assert_eq!(z23.order(), 6);
        assert_eq!(z23.characters().len(), 6);
        assert!(FiniteAbelianGroup::new(&[]).is_err());
        assert!(FiniteAbelianGroup::new(&[2, 0]).is_err());
    }

    #[test]
    fn lexicographic_enumeration() {
        let g = FiniteAbelianGroup::new(&[2, 3]).unwrap();
        let all: Vec<Vec<usize>> = g.elements().map(|i| g.coords_of(i)).collect();
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        assert_eq!(all[5], vec![1, 2]);
    }

    #[test]
    fn char_eval_examples() {
        let z3 = FiniteAbelianGroup::cyclic(3).unwrap();
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(c_close(z3.char_eval(1, 1), w, 1e-15));
        for g in z3.elements() {
            assert_eq!(z3.char_eval(z3.trivial_char(), g), Complex64::new(1.0, 0.0));
        }
        let chi = Character { coords: vec![1, 1] };
        let g = GroupElement { coords: vec![1] };
        assert!(z3.char_eval_tuple(&chi, &g).is_err());
    }

    #[test]
    fn conjugate_values_are_mirrors() {
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        for chi in z5.characters() {
            for g in z5.elements() {
                assert_eq!(z5.char_eval(chi, z5.inv(g)), z5.char_eval(chi, g).conj());
            }
        }
    }

    #[test]
    fn fourier_examples() {
        let z2 = FiniteAbelianGroup::cyclic(2).unwrap();
        let u = z2.fourier_matrix();
        let s = 1.0 / 2f64.sqrt();
        let expect = [[s, s], [s, -s]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(c_close(u[i][j], Complex64::new(expect[i][j], 0.0), 1e-15));
            }
        }
        let z1 = FiniteAbelianGroup::cyclic(1).unwrap();
        assert_eq!(z1.fourier_matrix(), vec![vec![Complex64::new(1.0, 0.0)]]);
    }

    #[test]
    fn fourier_is_unitary() {
        for orders in [vec![3], vec![4], vec![2, 2], vec![2, 3], vec![3, 4]] {
            let g = FiniteAbelianGroup::new(&orders).unwrap();
            let u = g.fourier_matrix();
            let n = g.order();
            for i in 0..n {
                for j in 0..n {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        s += u[i][k] * u[j][k].conj();
                    }
                    let d = if i == j { 1.0 } else { 0.0 };
                    assert!(c_close(s, Complex64::new(d, 0.0), 1e-14));
                    assert!((u[i][j].norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn parse_specs() {
        let g: FiniteAbelianGroup = "Z2xZ4".parse().unwrap();
        assert_eq!(g.orders(), &[2, 4]);
        assert_eq!(g.to_string(), "Z2xZ4");
        assert!("Q8".parse::<FiniteAbelianGroup>().is_err());
        assert!("Z0".parse::<FiniteAbelianGroup>().is_err());
        assert_eq!(parse_tuple("1,0").unwrap(), vec![1, 0]);
        assert!(parse_tuple("a").is_err());
    }
}
