//! Holomorphic differential forms with Laurent-polynomial coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::poly::{same_ring, LaurentPoly, Mono, Ring};
use crate::scalar::Scalar;

/// A strictly increasing set of generators `dz_i`, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Gens(pub u32);

impl Gens {
    pub const EMPTY: Gens = Gens(0);

    pub fn single(i: usize) -> Gens {
        Gens(1 << i)
    }

    pub fn from_indices(ix: &[usize]) -> Option<Gens> {
        let mut m = 0u32;
        for w in ix.windows(2) {
            if w[0] >= w[1] {
                return None;
            }
        }
        for &i in ix {
            m |= 1 << i;
        }
        Some(Gens(m))
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|i| self.0 >> i & 1 == 1).collect()
    }

    /// Sign of `dz_self ∧ dz_other` relative to the sorted union, or `None` if they overlap.
    pub fn wedge_sign(self, other: Gens) -> Option<bool> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0u32;
        let mut b = other.0;
        while b != 0 {
            let j = b.trailing_zeros();
            swaps += (self.0 >> j).count_ones();
            b &= b - 1;
        }
        Some(swaps % 2 == 1)
    }
}

impl PartialOrd for Gens {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gens {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let x = self.0 ^ other.0;
            if x == 0 {
                Ordering::Equal
            } else if self.0 >> x.trailing_zeros() & 1 == 1 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("coordinate ring mismatch")]
    RingMismatch,
}

#[derive(Clone)]
pub struct HolForm {
    ring: Ring,
    comps: BTreeMap<Gens, LaurentPoly>,
}

impl PartialEq for HolForm {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.comps == other.comps
    }
}

impl Eq for HolForm {}

impl HolForm {
    pub fn zero(ring: &Ring) -> Self {
        HolForm { ring: ring.clone(), comps: BTreeMap::new() }
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        let ring = p.ring().clone();
        let mut f = Self::zero(&ring);
        f.add_comp(Gens::EMPTY, &p, &Scalar::ONE);
        f
    }

    pub fn constant(ring: &Ring, c: Scalar) -> Self {
        Self::from_poly(LaurentPoly::constant(ring, c))
    }

    pub fn one(ring: &Ring) -> Self {
        Self::constant(ring, Scalar::ONE)
    }

    pub fn term(p: LaurentPoly, gens: Gens) -> Self {
        let ring = p.ring().clone();
        let mut f = Self::zero(&ring);
        f.add_comp(gens, &p, &Scalar::ONE);
        f
    }

    /// The generator `dz_i`.
    pub fn dvar(ring: &Ring, i: usize) -> Self {
        Self::term(LaurentPoly::one(ring), Gens::single(i))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn comps(&self) -> &BTreeMap<Gens, LaurentPoly> {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comp(&self, g: Gens) -> LaurentPoly {
        self.comps.get(&g).cloned().unwrap_or_else(|| LaurentPoly::zero(&self.ring))
    }

    /// Degrees present, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.comps.keys().map(|g| g.degree()).collect();
        d.dedup();
        d
    }

    pub fn is_homogeneous_of(&self, k: usize) -> bool {
        self.comps.keys().all(|g| g.degree() == k)
    }

    pub fn part(&self, k: usize) -> Self {
        HolForm {
            ring: self.ring.clone(),
            comps: self.comps.iter().filter(|(g, _)| g.degree() == k).map(|(g, p)| (*g, p.clone())).collect(),
        }
    }

    fn add_comp(&mut self, g: Gens, p: &LaurentPoly, c: &Scalar) {
        if p.is_zero() || c.is_zero() {
            return;
        }
        let e = self.comps.entry(g).or_insert_with(|| LaurentPoly::zero(&self.ring));
        e.add_scaled(p, c);
        if e.is_zero() {
            self.comps.remove(&g);
        }
    }

    pub fn add_scaled(&mut self, other: &HolForm, c: &Scalar) {
        debug_assert!(same_ring(&self.ring, &other.ring), "coordinate ring mismatch");
        for (g, p) in &other.comps {
            self.add_comp(*g, p, c);
        }
    }

    pub fn add(&self, other: &HolForm) -> Self {
        let mut r = self.clone();
        r.add_scaled(other, &Scalar::ONE);
        r
    }

    pub fn sub(&self, other: &HolForm) -> Self {
        let mut r = self.clone();
        r.add_scaled(other, &-Scalar::ONE);
        r
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Scalar::ONE)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        HolForm { ring: self.ring.clone(), comps: self.comps.iter().map(|(g, p)| (*g, p.scale(c))).collect() }
    }

    pub fn mul_poly(&self, q: &LaurentPoly) -> Self {
        let mut r = Self::zero(&self.ring);
        for (g, p) in &self.comps {
            r.add_comp(*g, &p.mul(q), &Scalar::ONE);
        }
        r
    }

    /// Negates the odd-degree components when `odd` is set: `(-1)^{k·odd}`.
    pub fn parity_twist(&self, odd: bool) -> Self {
        if !odd {
            return self.clone();
        }
        HolForm {
            ring: self.ring.clone(),
            comps: self
                .comps
                .iter()
                .map(|(g, p)| (*g, if g.degree() % 2 == 1 { p.neg() } else { p.clone() }))
                .collect(),
        }
    }

    pub fn wedge(&self, other: &HolForm) -> Result<HolForm, FormError> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(FormError::RingMismatch);
        }
        Ok(self.wedge_unchecked(other))
    }

    /// Wedge product; rings are assumed equal.
    pub fn wedge_unchecked(&self, other: &HolForm) -> HolForm {
        let mut r = Self::zero(&self.ring);
        for (g1, p1) in &self.comps {
            for (g2, p2) in &other.comps {
                if let Some(neg) = g1.wedge_sign(*g2) {
                    let prod = p1.mul(p2);
                    let c = if neg { -Scalar::ONE } else { Scalar::ONE };
                    r.add_comp(Gens(g1.0 | g2.0), &prod, &c);
                }
            }
        }
        r
    }

    pub fn ext_d(&self) -> HolForm {
        let n = self.ring.nvars();
        let mut r = Self::zero(&self.ring);
        for (g, p) in &self.comps {
            for i in 0..n {
                if g.0 >> i & 1 == 1 {
                    continue;
                }
                let dp = p.derivative(i);
                if dp.is_zero() {
                    continue;
                }
                let neg = Gens::single(i).wedge_sign(*g).unwrap();
                r.add_comp(Gens(g.0 | 1 << i), &dp, &if neg { -Scalar::ONE } else { Scalar::ONE });
            }
        }
        r
    }

    pub fn constant_term(&self) -> Scalar {
        self.comps.get(&Gens::EMPTY).map(|p| p.constant_term()).unwrap_or_default()
    }

    /// Coefficient of the monomial `m` in front of the generators `g`.
    pub fn coeff(&self, g: Gens, m: &Mono) -> Scalar {
        self.comps.get(&g).map(|p| p.coeff(m)).unwrap_or_default()
    }

    pub fn with_ring(&self, ring: &Ring) -> Self {
        HolForm { ring: ring.clone(), comps: self.comps.iter().map(|(g, p)| (*g, p.with_ring(ring))).collect() }
    }
}

impl fmt::Display for HolForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let names = self.ring.names();
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|(g, p)| {
                if g.degree() == 0 {
                    format!("{p}")
                } else {
                    let gens: Vec<String> = g.indices().iter().map(|&i| format!("d{}", names[i])).collect();
                    format!("({})*{}", p, gens.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for HolForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::CoordRing;

    #[test]
    fn gens_order_is_sorted_list_lex() {
        let a = Gens::from_indices(&[0, 3]).unwrap();
        let b = Gens::from_indices(&[1, 2]).unwrap();
        assert!(a < b);
        assert!(Gens::single(5) < a);
        assert_eq!(Gens::single(1).wedge_sign(Gens::single(0)), Some(true));
        assert_eq!(Gens::single(0).wedge_sign(Gens::single(1)), Some(false));
    }

    #[test]
    fn basic_examples() {
        let r = CoordRing::polynomial(&["z", "w"]);
        let dz = HolForm::dvar(&r, 0);
        let dw = HolForm::dvar(&r, 1);
        assert!(dz.wedge(&dz).unwrap().is_zero());
        assert_eq!(dz.wedge(&dw).unwrap(), dw.wedge(&dz).unwrap().neg());
        let z = LaurentPoly::var(&r, 0);
        let w = LaurentPoly::var(&r, 1);
        let lhs = dz.mul_poly(&z).wedge(&dw.mul_poly(&w)).unwrap();
        assert_eq!(lhs, HolForm::term(z.mul(&w), Gens(0b11)));
        let z2 = HolForm::from_poly(z.mul(&z));
        assert_eq!(z2.ext_d(), dz.mul_poly(&z.scale(&Scalar::int(2))));
        let other = CoordRing::polynomial(&["x"]);
        assert_eq!(dz.wedge(&HolForm::dvar(&other, 0)), Err(FormError::RingMismatch));
    }
}
