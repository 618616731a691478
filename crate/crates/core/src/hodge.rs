//! Ω•[u] with `|u| = −2`, decorations of Δⁿ and the simplex-level Chern character.

use std::collections::BTreeMap;
use std::fmt;

use crate::chart::{ChartError, ChartMap};
use crate::cochain::{atiyah, power, trace_on_cell, CochainError, LabeledCochain};
use crate::forms::HolForm;
use crate::poly::Ring;
use crate::scalar::Scalar;
use crate::simplicial::{cell, codegeneracy_map, coface_map, enum_strict, face, map_vertices, Cell};

/// Finite sums `Σ ω_{(k,m)} u^m` with `ω` a `k`-form; keys are `(form degree, u power)`.
#[derive(Clone, PartialEq)]
pub struct UPoly {
    ring: Ring,
    terms: BTreeMap<(usize, u32), HolForm>,
}

impl UPoly {
    pub fn zero(ring: &Ring) -> Self {
        UPoly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Ring, c: Scalar) -> Self {
        Self::from_form(&HolForm::constant(ring, c), 0)
    }

    /// Splits `ω` by form degree and attaches `u^m`.
    pub fn from_form(w: &HolForm, m: u32) -> Self {
        let mut r = Self::zero(w.ring());
        for k in w.degrees() {
            r.terms.insert((k, m), w.part(k));
        }
        r
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<(usize, u32), HolForm> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: usize, m: u32) -> HolForm {
        self.terms.get(&(k, m)).cloned().unwrap_or_else(|| HolForm::zero(&self.ring))
    }

    pub fn add_scaled(&mut self, other: &UPoly, c: &Scalar) {
        for (key, w) in &other.terms {
            let e = self.terms.entry(*key).or_insert_with(|| HolForm::zero(&self.ring));
            e.add_scaled(w, c);
            if e.is_zero() {
                self.terms.remove(key);
            }
        }
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let mut r = self.clone();
        r.add_scaled(other, &Scalar::ONE);
        r
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        let mut r = self.clone();
        r.add_scaled(other, &-Scalar::ONE);
        r
    }

    pub fn scale(&self, c: &Scalar) -> UPoly {
        let mut r = Self::zero(&self.ring);
        r.add_scaled(self, c);
        r
    }

    /// Total degrees `k − 2m` present.
    pub fn total_degrees(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.terms.keys().map(|&(k, m)| k as i64 - 2 * m as i64).collect();
        v.dedup();
        v
    }

    pub fn pullback(&self, phi: &ChartMap) -> Result<UPoly, ChartError> {
        let mut r = Self::zero(phi.target());
        for (&(_, m), w) in &self.terms {
            r.add_scaled(&Self::from_form(&phi.pullback(w)?, m), &Scalar::ONE);
        }
        Ok(r)
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(_, m), w)| match m {
                0 => format!("{w}"),
                1 => format!("({w})*u"),
                _ => format!("({w})*u^{m}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Labels of the nondegenerate cells of Δⁿ; absent cells carry 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DKDecoration {
    pub ring: Ring,
    pub n: usize,
    pub cells: BTreeMap<Cell, UPoly>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DkViolation {
    #[error("cell {0:?} has a term of total degree {1}, expected {2}")]
    Degree(Vec<u8>, i64, i64),
    #[error("cell {0:?} has a form of degree {1} of the wrong parity")]
    Parity(Vec<u8>, usize),
    #[error("alternating face sum of cell {0:?} does not vanish")]
    FaceSum(Vec<u8>),
    #[error("cell {0:?} is not a strictly increasing cell of the simplex")]
    Cell(Vec<u8>),
}

impl DKDecoration {
    pub fn zero(ring: &Ring, n: usize) -> Self {
        DKDecoration { ring: ring.clone(), n, cells: BTreeMap::new() }
    }

    pub fn get(&self, c: &[u8]) -> UPoly {
        self.cells.get(c).cloned().unwrap_or_else(|| UPoly::zero(&self.ring))
    }

    pub fn set(&mut self, c: &[u8], v: UPoly) {
        if v.is_zero() {
            self.cells.remove(c);
        } else {
            self.cells.insert(c.into(), v);
        }
    }

    pub fn pullback(&self, phi: &ChartMap) -> Result<DKDecoration, ChartError> {
        let mut r = DKDecoration::zero(phi.target(), self.n);
        for (c, v) in &self.cells {
            r.set(c, v.pullback(phi)?);
        }
        Ok(r)
    }
}

fn strict_cells(n: usize) -> Vec<Cell> {
    (0..=n).flat_map(|k| enum_strict(n, k)).collect()
}

/// Degree `−k`, parity and the vanishing alternating face sum on every cell.
pub fn dk_validate(dec: &DKDecoration) -> Result<(), DkViolation> {
    for c in dec.cells.keys() {
        if c.windows(2).any(|w| w[0] >= w[1]) || c.iter().any(|&i| i as usize > dec.n) {
            return Err(DkViolation::Cell(c.to_vec()));
        }
    }
    for c in strict_cells(dec.n) {
        let k = c.len() - 1;
        let v = dec.get(&c);
        for (&(fd, m), _) in v.terms() {
            let t = fd as i64 - 2 * m as i64;
            if t != -(k as i64) {
                return Err(DkViolation::Degree(c.to_vec(), t, -(k as i64)));
            }
            if fd % 2 != k % 2 {
                return Err(DkViolation::Parity(c.to_vec(), fd));
            }
        }
        if k >= 1 {
            let mut s = UPoly::zero(&dec.ring);
            for j in 0..=k {
                s.add_scaled(&dec.get(&face(&c, j).unwrap()), &if j % 2 == 0 { Scalar::ONE } else { -Scalar::ONE });
            }
            if !s.is_zero() {
                return Err(DkViolation::FaceSum(c.to_vec()));
            }
        }
    }
    Ok(())
}

/// Restriction along `δ_j: [n−1] → [n]`.
pub fn dk_face(dec: &DKDecoration, j: usize) -> DKDecoration {
    assert!(dec.n >= 1 && j <= dec.n);
    let phi = coface_map(dec.n, j);
    let mut r = DKDecoration::zero(&dec.ring, dec.n - 1);
    for c in strict_cells(dec.n - 1) {
        r.set(&c, dec.get(&map_vertices(&c, &phi)));
    }
    r
}

/// Extension along `σ_j: [n+1] → [n]`; cells containing both `j` and `j+1` get 0.
pub fn dk_degeneracy(dec: &DKDecoration, j: usize) -> DKDecoration {
    assert!(j <= dec.n);
    let phi = codegeneracy_map(dec.n, j);
    let mut r = DKDecoration::zero(&dec.ring, dec.n + 1);
    for c in strict_cells(dec.n + 1) {
        if c.contains(&(j as u8)) && c.contains(&(j as u8 + 1)) {
            continue;
        }
        r.set(&c, dec.get(&map_vertices(&c, &phi)));
    }
    r
}

fn factorial(k: usize) -> Scalar {
    Scalar::int((1..=k as i64).product())
}

/// χ on vertices and `Tr_g(Aᵏ)_α · uᵏ/k!` on each increasing k-cell of Δⁿ.
pub fn chern_simplex(g: &LabeledCochain) -> Result<DKDecoration, CochainError> {
    let n = g.n();
    if g.bound() < n + 1 {
        return Err(CochainError::Bound { need: n + 1, have: g.bound() });
    }
    let ring = g.labeling().ring().clone();
    let mut dec = DKDecoration::zero(&ring, n);
    for i in 0..=n {
        let chi = g.labeling().object(i as u8).euler_char();
        dec.set(&cell(&[i]), UPoly::constant(&ring, Scalar::int(chi)));
    }
    if n == 0 {
        return Ok(dec);
    }
    let a = atiyah(&g.truncate(n))?;
    let mut ak = LabeledCochain::unit(g.labeling(), n);
    for k in 1..=n {
        ak = crate::cochain::product(&ak, &a)?;
        let inv = factorial(k).inv();
        for c in enum_strict(n, k) {
            let t = trace_on_cell(g, &ak, &c);
            dec.set(&c, UPoly::from_form(&t, k as u32).scale(&inv));
        }
    }
    Ok(dec)
}

/// `Tr_g(Aᵏ)` on a single cell, without the `1/k!`.
pub fn chern_component(g: &LabeledCochain, alpha: &[u8]) -> Result<HolForm, CochainError> {
    let k = alpha.len() - 1;
    let a = atiyah(&g.truncate(k))?;
    Ok(trace_on_cell(g, &power(&a, k)?, alpha))
}

/// Morphisms along which naturality is checked.
#[derive(Debug, Clone)]
pub enum NatOp {
    Identity,
    Face(usize),
    Degeneracy(usize),
    Chart(ChartMap),
}

/// Both sides of the naturality square for `op`.
pub fn naturality_sides(g: &LabeledCochain, op: &NatOp) -> Result<(DKDecoration, DKDecoration), CochainError> {
    let n = g.n();
    let base = chern_simplex(g)?;
    Ok(match op {
        NatOp::Identity => (base.clone(), base),
        NatOp::Face(j) => {
            let h = g.reindex(&coface_map(n, *j));
            (chern_simplex(&h)?, dk_face(&base, *j))
        }
        NatOp::Degeneracy(j) => {
            let h = g.reindex(&codegeneracy_map(n, *j));
            (chern_simplex(&h)?, dk_degeneracy(&base, *j))
        }
        NatOp::Chart(phi) => {
            let h = g.pullback(phi)?;
            let rhs = base.pullback(phi).map_err(|e| CochainError::Perf(crate::perf::PerfError::Chart(e)))?;
            (chern_simplex(&h)?, rhs)
        }
    })
}

pub fn naturality_check(g: &LabeledCochain, op: &NatOp) -> Result<bool, CochainError> {
    let (a, b) = naturality_sides(g, op)?;
    Ok(a == b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::CoordRing;

    #[test]
    fn edge_condition_forces_equal_vertices() {
        let r = CoordRing::polynomial(&["z"]);
        let mut d = DKDecoration::zero(&r, 1);
        d.set(&cell(&[0]), UPoly::constant(&r, Scalar::ONE));
        d.set(&cell(&[1]), UPoly::constant(&r, Scalar::ONE));
        d.set(&cell(&[0, 1]), UPoly::from_form(&HolForm::dvar(&r, 0), 1));
        assert!(dk_validate(&d).is_ok());
        d.set(&cell(&[1]), UPoly::constant(&r, Scalar::int(2)));
        assert_eq!(dk_validate(&d), Err(DkViolation::FaceSum(vec![0, 1])));
    }

    #[test]
    fn degeneracy_of_a_point() {
        let r = CoordRing::polynomial(&["z"]);
        let mut d = DKDecoration::zero(&r, 0);
        d.set(&cell(&[0]), UPoly::constant(&r, Scalar::int(3)));
        let s = dk_degeneracy(&d, 0);
        assert!(s.get(&[0, 1]).is_zero());
        assert_eq!(s.get(&[1]), UPoly::constant(&r, Scalar::int(3)));
        assert_eq!(dk_face(&s, 0), d);
        assert_eq!(dk_face(&s, 1), d);
    }
}
