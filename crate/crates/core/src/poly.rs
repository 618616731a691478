//! Laurent polynomials over named coordinates.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::scalar::Scalar;

/// Coordinate names of a chart ring. Coordinates flagged invertible are units.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordRing {
    names: Vec<String>,
    invertible: Vec<bool>,
}

pub type Ring = Arc<CoordRing>;

impl CoordRing {
    pub fn new<S: AsRef<str>>(names: &[S], invertible: &[bool]) -> Ring {
        assert_eq!(names.len(), invertible.len());
        assert!(names.len() <= 16, "at most 16 coordinates");
        Arc::new(CoordRing {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            invertible: invertible.to_vec(),
        })
    }

    pub fn polynomial<S: AsRef<str>>(names: &[S]) -> Ring {
        Self::new(names, &vec![false; names.len()])
    }

    pub fn laurent<S: AsRef<str>>(names: &[S]) -> Ring {
        Self::new(names, &vec![true; names.len()])
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_invertible(&self, i: usize) -> bool {
        self.invertible[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub fn same_ring(a: &Ring, b: &Ring) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub SmallVec<[i32; 4]>);

impl Mono {
    pub fn one(n: usize) -> Self {
        Mono(SmallVec::from_elem(0, n))
    }

    pub fn var(n: usize, i: usize, e: i32) -> Self {
        let mut m = Self::one(n);
        m.0[i] = e;
        m
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

#[derive(Clone)]
pub struct LaurentPoly {
    ring: Ring,
    terms: BTreeMap<Mono, Scalar>,
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

impl Eq for LaurentPoly {}

impl std::hash::Hash for LaurentPoly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

impl LaurentPoly {
    pub fn zero(ring: &Ring) -> Self {
        LaurentPoly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Ring, c: Scalar) -> Self {
        Self::monomial(ring, Mono::one(ring.nvars()), c)
    }

    pub fn one(ring: &Ring) -> Self {
        Self::constant(ring, Scalar::ONE)
    }

    pub fn monomial(ring: &Ring, m: Mono, c: Scalar) -> Self {
        assert_eq!(m.0.len(), ring.nvars(), "exponent length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { ring: ring.clone(), terms }
    }

    pub fn var(ring: &Ring, i: usize) -> Self {
        Self::monomial(ring, Mono::var(ring.nvars(), i, 1), Scalar::ONE)
    }

    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Mono, Scalar)>) -> Self {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(m.0.len(), self.ring.nvars());
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Mono::one(self.ring.nvars())).cloned().unwrap_or_default()
    }

    pub fn coeff(&self, m: &Mono) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        LaurentPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &LaurentPoly, c: &Scalar) {
        debug_assert!(same_ring(&self.ring, &other.ring));
        for (m, a) in &other.terms {
            self.add_term(m.clone(), &(a * c));
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> Self {
        let mut r = self.clone();
        r.add_scaled(other, &Scalar::ONE);
        r
    }

    pub fn sub(&self, other: &LaurentPoly) -> Self {
        let mut r = self.clone();
        r.add_scaled(other, &-Scalar::ONE);
        r
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Scalar::ONE)
    }

    pub fn mul(&self, other: &LaurentPoly) -> Self {
        debug_assert!(same_ring(&self.ring, &other.ring), "coordinate ring mismatch");
        let mut r = Self::zero(&self.ring);
        for (m1, a) in &self.terms {
            for (m2, b) in &other.terms {
                r.add_term(m1.mul(m2), &(a * b));
            }
        }
        r
    }

    /// Partial derivative in coordinate `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut r = Self::zero(&self.ring);
        for (m, a) in &self.terms {
            let e = m.0[i];
            if e != 0 {
                let mut m2 = m.clone();
                m2.0[i] -= 1;
                r.add_term(m2, &(a * &Scalar::int(e as i64)));
            }
        }
        r
    }

    /// Returns `(c, m)` when the polynomial is a single term, hence a unit.
    pub fn as_unit(&self) -> Option<(Scalar, Mono)> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            Some((c.clone(), m.clone()))
        } else {
            None
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let (c, m) = self.as_unit()?;
        Some(Self::monomial(&self.ring, Mono(m.0.iter().map(|e| -e).collect()), c.inv()))
    }

    /// Integer power; negative powers require a unit.
    pub fn pow(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one(&self.ring);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }

    /// Moves the polynomial to another ring with the same number of coordinates.
    pub fn with_ring(&self, ring: &Ring) -> Self {
        assert_eq!(ring.nvars(), self.ring.nvars());
        LaurentPoly { ring: ring.clone(), terms: self.terms.clone() }
    }

    pub fn max_abs_degree(&self) -> i64 {
        self.terms.keys().map(|m| m.0.iter().map(|e| e.abs() as i64).sum()).max().unwrap_or(0)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.ring.names[i].clone()),
                    _ => factors.push(format!("{}^{}", self.ring.names[i], e)),
                }
            }
            let (neg, mag) = if c.signum() < 0 { (true, -c) } else { (false, c.clone()) };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let a = Mono(SmallVec::from_slice(&[2, 0]));
        let b = Mono(SmallVec::from_slice(&[0, 1]));
        let c = Mono(SmallVec::from_slice(&[1, 1]));
        assert!(b < a);
        assert!(c < a);
    }

    #[test]
    fn laurent_calculus() {
        let r = CoordRing::laurent(&["z"]);
        let z = LaurentPoly::var(&r, 0);
        let zi = z.inverse().unwrap();
        assert_eq!(z.mul(&zi), LaurentPoly::one(&r));
        let d = zi.derivative(0);
        assert_eq!(d, LaurentPoly::monomial(&r, Mono::var(1, 0, -2), Scalar::int(-1)));
        assert_eq!(z.add(&z).to_string(), "2*z");
        assert!(z.add(&LaurentPoly::one(&r)).inverse().is_none());
    }
}
