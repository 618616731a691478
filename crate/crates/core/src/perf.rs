//! Complexes of free modules with connection, and graded Hom-elements between them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::chart::{ChartError, ChartMap};
use crate::forms::HolForm;
use crate::poly::{same_ring, LaurentPoly, Ring};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PerfError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("d∘d ≠ 0 at degree {0}")]
    NotComplex(i32),
    #[error("entry has wrong form degree: {0}")]
    FormDegree(String),
    #[error("coordinate ring mismatch")]
    Ring,
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// Ranks per internal degree; zero ranks are not stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Grading(BTreeMap<i32, usize>);

impl Grading {
    pub fn new(ranks: impl IntoIterator<Item = (i32, usize)>) -> Self {
        Grading(ranks.into_iter().filter(|&(_, r)| r > 0).collect())
    }

    pub fn rank(&self, q: i32) -> usize {
        self.0.get(&q).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = (i32, usize)> + '_ {
        self.0.iter().map(|(&q, &r)| (q, r))
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn euler(&self) -> i64 {
        self.0.iter().map(|(&q, &r)| if q % 2 == 0 { r as i64 } else { -(r as i64) }).sum()
    }
}

impl fmt::Debug for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A dense matrix of forms.
#[derive(Clone, PartialEq, Eq)]
pub struct FormMatrix {
    rows: usize,
    cols: usize,
    data: Vec<HolForm>,
}

impl FormMatrix {
    pub fn zero(ring: &Ring, rows: usize, cols: usize) -> Self {
        FormMatrix { rows, cols, data: vec![HolForm::zero(ring); rows * cols] }
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = HolForm::one(ring);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<HolForm>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        FormMatrix { rows, cols, data }
    }

    pub fn from_polys(rows: usize, cols: usize, data: Vec<LaurentPoly>) -> Self {
        Self::from_rows(rows, cols, data.into_iter().map(HolForm::from_poly).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &HolForm {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: HolForm) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[HolForm] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn map(&self, f: impl Fn(&HolForm) -> HolForm) -> Self {
        FormMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<E>(&self, f: impl Fn(&HolForm) -> Result<HolForm, E>) -> Result<Self, E> {
        Ok(FormMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect::<Result<_, _>>()? })
    }

    pub fn add_scaled(&mut self, other: &FormMatrix, c: &Scalar) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shape");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            a.add_scaled(b, c);
        }
    }

    /// Product with entries wedged; `twist_rhs` negates odd-degree parts of `other`.
    pub fn mul(&self, other: &FormMatrix, twist_rhs: bool) -> FormMatrix {
        assert_eq!(self.cols, other.rows, "matrix shape");
        let ring = self.data.first().or(other.data.first()).map(|e| e.ring().clone());
        let Some(ring) = ring else {
            return FormMatrix { rows: self.rows, cols: other.cols, data: Vec::new() };
        };
        let rhs: Vec<HolForm> = if twist_rhs { other.data.iter().map(|e| e.parity_twist(true)).collect() } else { other.data.clone() };
        let mut out = Self::zero(&ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &rhs[k * other.cols + j];
                    if b.is_zero() {
                        continue;
                    }
                    let p = a.wedge_unchecked(b);
                    out.data[i * other.cols + j].add_scaled(&p, &Scalar::ONE);
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Option<HolForm> {
        let ring = self.data.first()?.ring().clone();
        let mut t = HolForm::zero(&ring);
        for i in 0..self.rows.min(self.cols) {
            t.add_scaled(self.get(i, i), &Scalar::ONE);
        }
        Some(t)
    }
}

impl fmt::Debug for FormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// A graded map `E → E′` with form-valued entries, stored per block
/// keyed by `(target degree, source degree)`.
#[derive(Clone)]
pub struct HomElement {
    ring: Ring,
    source: Arc<Grading>,
    target: Arc<Grading>,
    blocks: BTreeMap<(i32, i32), FormMatrix>,
}

impl PartialEq for HomElement {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.blocks == other.blocks
    }
}

impl Eq for HomElement {}

impl fmt::Debug for HomElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.blocks.iter().map(|((t, s), m)| format!("{s}->{t}: {m:?}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl HomElement {
    pub fn zero(ring: &Ring, source: &Arc<Grading>, target: &Arc<Grading>) -> Self {
        HomElement { ring: ring.clone(), source: source.clone(), target: target.clone(), blocks: BTreeMap::new() }
    }

    pub fn identity(ring: &Ring, g: &Arc<Grading>) -> Self {
        let mut h = Self::zero(ring, g, g);
        for (q, r) in g.degrees() {
            h.blocks.insert((q, q), FormMatrix::identity(ring, r));
        }
        h
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn source(&self) -> &Arc<Grading> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Grading> {
        &self.target
    }

    pub fn blocks(&self) -> &BTreeMap<(i32, i32), FormMatrix> {
        &self.blocks
    }

    pub fn block(&self, t: i32, s: i32) -> Option<&FormMatrix> {
        self.blocks.get(&(t, s))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Sets the block from source degree `s` to target degree `t`.
    pub fn set_block(&mut self, t: i32, s: i32, m: FormMatrix) -> Result<(), PerfError> {
        if m.rows() != self.target.rank(t) || m.cols() != self.source.rank(s) {
            return Err(PerfError::Shape(format!(
                "block {s}->{t} is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                self.target.rank(t),
                self.source.rank(s)
            )));
        }
        if m.entries().iter().any(|e| !same_ring(e.ring(), &self.ring)) {
            return Err(PerfError::Ring);
        }
        if m.is_zero() {
            self.blocks.remove(&(t, s));
        } else {
            self.blocks.insert((t, s), m);
        }
        Ok(())
    }

    /// Sets a single entry, creating the block if necessary.
    pub fn set_entry(&mut self, t: i32, s: i32, i: usize, j: usize, v: HolForm) {
        let (r, c) = (self.target.rank(t), self.source.rank(s));
        assert!(i < r && j < c, "entry out of range");
        let ring = self.ring.clone();
        let b = self.blocks.entry((t, s)).or_insert_with(|| FormMatrix::zero(&ring, r, c));
        b.set(i, j, v);
        if b.is_zero() {
            self.blocks.remove(&(t, s));
        }
    }

    pub fn entry(&self, t: i32, s: i32, i: usize, j: usize) -> HolForm {
        self.blocks.get(&(t, s)).map(|b| b.get(i, j).clone()).unwrap_or_else(|| HolForm::zero(&self.ring))
    }

    fn same_shape(&self, other: &HomElement) -> bool {
        self.source == other.source && self.target == other.target
    }

    pub fn add_scaled(&mut self, other: &HomElement, c: &Scalar) {
        assert!(self.same_shape(other), "hom shape mismatch: {:?}->{:?} vs {:?}->{:?}", self.source, self.target, other.source, other.target);
        if c.is_zero() {
            return;
        }
        for (k, m) in &other.blocks {
            match self.blocks.get_mut(k) {
                Some(b) => {
                    b.add_scaled(m, c);
                    if b.is_zero() {
                        self.blocks.remove(k);
                    }
                }
                None => {
                    let mut z = FormMatrix::zero(&self.ring, m.rows(), m.cols());
                    z.add_scaled(m, c);
                    self.blocks.insert(*k, z);
                }
            }
        }
    }

    pub fn add(&self, other: &HomElement) -> HomElement {
        let mut r = self.clone();
        r.add_scaled(other, &Scalar::ONE);
        r
    }

    pub fn sub(&self, other: &HomElement) -> HomElement {
        let mut r = self.clone();
        r.add_scaled(other, &-Scalar::ONE);
        r
    }

    pub fn scale(&self, c: &Scalar) -> HomElement {
        if c.is_zero() {
            return Self::zero(&self.ring, &self.source, &self.target);
        }
        let mut r = self.clone();
        for b in r.blocks.values_mut() {
            *b = b.map(|e| e.scale(c));
        }
        r
    }

    pub fn neg(&self) -> HomElement {
        self.scale(&-Scalar::ONE)
    }

    /// Multiplies each homogeneous piece of form degree `k` and hom degree `q`
    /// by `-1` when `odd(k, q)` holds.
    pub fn twist(&self, odd: impl Fn(usize, i32) -> bool) -> HomElement {
        let mut r = Self::zero(&self.ring, &self.source, &self.target);
        for (&(t, s), m) in &self.blocks {
            let q = t - s;
            let even_flip = odd(0, q);
            let odd_flip = odd(1, q);
            debug_assert!((0..6).all(|k| odd(k, q) == if k % 2 == 0 { even_flip } else { odd_flip }), "twist must depend on k mod 2");
            let nm = if !even_flip && !odd_flip {
                m.clone()
            } else if even_flip && odd_flip {
                m.map(|e| e.neg())
            } else if odd_flip {
                m.map(|e| e.parity_twist(true))
            } else {
                m.map(|e| e.parity_twist(true).neg())
            };
            r.blocks.insert((t, s), nm);
        }
        r
    }

    /// Composition `self ∘ g` with the Koszul sign `(−1)^{q_self·k_g}`.
    pub fn compose(&self, g: &HomElement) -> Result<HomElement, PerfError> {
        if self.source != g.target {
            return Err(PerfError::Shape(format!("compose: source {:?} vs target {:?}", self.source, g.target)));
        }
        if !same_ring(&self.ring, &g.ring) {
            return Err(PerfError::Ring);
        }
        Ok(self.compose_unchecked(g))
    }

    pub fn compose_unchecked(&self, g: &HomElement) -> HomElement {
        debug_assert!(self.source == g.target, "compose shape");
        let mut out = Self::zero(&self.ring, &g.source, &self.target);
        for (&(t, m), a) in &self.blocks {
            let q = t - m;
            for (&(m2, s), b) in g.blocks.range((m, i32::MIN)..=(m, i32::MAX)) {
                debug_assert_eq!(m2, m);
                let p = a.mul(b, q.rem_euclid(2) == 1);
                if p.is_zero() {
                    continue;
                }
                match out.blocks.get_mut(&(t, s)) {
                    Some(acc) => {
                        acc.add_scaled(&p, &Scalar::ONE);
                    }
                    None => {
                        out.blocks.insert((t, s), p);
                    }
                }
            }
        }
        out.blocks.retain(|_, m| !m.is_zero());
        out
    }

    /// Entrywise exterior derivative.
    pub fn ext_d(&self) -> HomElement {
        let mut r = Self::zero(&self.ring, &self.source, &self.target);
        for (k, m) in &self.blocks {
            let d = m.map(|e| e.ext_d());
            if !d.is_zero() {
                r.blocks.insert(*k, d);
            }
        }
        r
    }

    /// Σ_q (−1)^q tr(block(q,q)).
    pub fn supertrace(&self) -> Result<HolForm, PerfError> {
        if self.source != self.target {
            return Err(PerfError::Shape("supertrace of a non-endomorphism".into()));
        }
        Ok(self.supertrace_unchecked())
    }

    pub fn supertrace_unchecked(&self) -> HolForm {
        let mut t = HolForm::zero(&self.ring);
        for (&(a, b), m) in &self.blocks {
            if a == b {
                if let Some(tr) = m.trace() {
                    t.add_scaled(&tr, &if a.rem_euclid(2) == 0 { Scalar::ONE } else { -Scalar::ONE });
                }
            }
        }
        t
    }

    /// Supertrace of `self ∘ g` without forming off-diagonal blocks.
    pub fn supertrace_of_compose(&self, g: &HomElement) -> HolForm {
        debug_assert!(self.source == g.target && self.target == g.source);
        let mut t = HolForm::zero(&self.ring);
        for (&(a, m), x) in &self.blocks {
            let Some(y) = g.blocks.get(&(m, a)) else { continue };
            let q = a - m;
            let sign = if a.rem_euclid(2) == 0 { Scalar::ONE } else { -Scalar::ONE };
            let twist = q.rem_euclid(2) == 1;
            for i in 0..x.rows() {
                for k in 0..x.cols() {
                    let u = x.get(i, k);
                    if u.is_zero() {
                        continue;
                    }
                    let v = y.get(k, i);
                    if v.is_zero() {
                        continue;
                    }
                    let v = if twist { v.parity_twist(true) } else { v.clone() };
                    t.add_scaled(&u.wedge_unchecked(&v), &sign);
                }
            }
        }
        t
    }

    /// Pairs (form degree, hom degree) present.
    pub fn degrees(&self) -> Vec<(usize, i32)> {
        let mut v = Vec::new();
        for (&(t, s), m) in &self.blocks {
            for e in m.entries() {
                for k in e.degrees() {
                    v.push((k, t - s));
                }
            }
        }
        v.sort();
        v.dedup();
        v
    }

    pub fn pullback(&self, phi: &ChartMap) -> Result<HomElement, PerfError> {
        let mut r = Self::zero(phi.target(), &self.source, &self.target);
        for (k, m) in &self.blocks {
            let pm = m.try_map(|e| phi.pullback(e))?;
            if !pm.is_zero() {
                r.blocks.insert(*k, pm);
            }
        }
        Ok(r)
    }

    pub fn with_ring(&self, ring: &Ring) -> HomElement {
        let mut r = Self::zero(ring, &self.source, &self.target);
        for (k, m) in &self.blocks {
            r.blocks.insert(*k, m.map(|e| e.with_ring(ring)));
        }
        r
    }
}

/// A finite complex of free modules with differential and connection matrices.
#[derive(Clone, PartialEq, Eq)]
pub struct PerfObject {
    ring: Ring,
    ranks: Arc<Grading>,
    d: HomElement,
    gamma: HomElement,
}

impl fmt::Debug for PerfObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perf{{ranks: {:?}, d: {:?}, Γ: {:?}}}", self.ranks, self.d, self.gamma)
    }
}

impl PerfObject {
    /// `differential[q]` maps degree `q` to `q+1`; `connection[q]` is the
    /// matrix of 1-forms on degree `q`.
    pub fn new(
        ring: &Ring,
        ranks: Grading,
        differential: BTreeMap<i32, FormMatrix>,
        connection: BTreeMap<i32, FormMatrix>,
    ) -> Result<Self, PerfError> {
        let ranks = Arc::new(ranks);
        let mut d = HomElement::zero(ring, &ranks, &ranks);
        for (q, m) in differential {
            if m.entries().iter().any(|e| !e.is_homogeneous_of(0)) {
                return Err(PerfError::FormDegree(format!("differential at degree {q} must have function entries")));
            }
            d.set_block(q + 1, q, m)?;
        }
        let mut gamma = HomElement::zero(ring, &ranks, &ranks);
        for (q, m) in connection {
            if m.entries().iter().any(|e| !e.is_homogeneous_of(1)) {
                return Err(PerfError::FormDegree(format!("connection at degree {q} must have 1-form entries")));
            }
            gamma.set_block(q, q, m)?;
        }
        let dd = d.compose_unchecked(&d);
        if let Some((&(t, _), _)) = dd.blocks.iter().next() {
            return Err(PerfError::NotComplex(t - 2));
        }
        Ok(PerfObject { ring: ring.clone(), ranks, d, gamma })
    }

    /// A complex from prebuilt `d` and `Γ` elements.
    pub fn from_homs(d: HomElement, gamma: HomElement) -> Result<Self, PerfError> {
        let differential = d.blocks.iter().map(|(&(_, s), m)| (s, m.clone())).collect::<BTreeMap<_, _>>();
        if d.blocks.keys().any(|&(t, s)| t != s + 1) || gamma.blocks.keys().any(|&(t, s)| t != s) {
            return Err(PerfError::Shape("differential must have degree 1 and connection degree 0".into()));
        }
        let connection = gamma.blocks.iter().map(|(&(_, s), m)| (s, m.clone())).collect::<BTreeMap<_, _>>();
        Self::new(&d.ring.clone(), (*d.source).clone(), differential, connection)
    }

    pub fn trivial(ring: &Ring, ranks: Grading) -> Self {
        Self::new(ring, ranks, BTreeMap::new(), BTreeMap::new()).unwrap()
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn ranks(&self) -> &Arc<Grading> {
        &self.ranks
    }

    pub fn d(&self) -> &HomElement {
        &self.d
    }

    pub fn gamma(&self) -> &HomElement {
        &self.gamma
    }

    pub fn identity(&self) -> HomElement {
        HomElement::identity(&self.ring, &self.ranks)
    }

    pub fn euler_char(&self) -> i64 {
        self.ranks.euler()
    }

    pub fn with_connection(&self, gamma: HomElement) -> Result<Self, PerfError> {
        Self::from_homs(self.d.clone(), gamma)
    }

    pub fn pullback(&self, phi: &ChartMap) -> Result<PerfObject, PerfError> {
        Ok(PerfObject {
            ring: phi.target().clone(),
            ranks: self.ranks.clone(),
            d: self.d.pullback(phi)?,
            gamma: self.gamma.pullback(phi)?,
        })
    }
}

/// `D(f) = f∘d − (−1)^{|f|} d′∘f` with `|f|` the total degree of each piece.
pub fn internal_d(f: &HomElement, src: &PerfObject, tgt: &PerfObject) -> HomElement {
    let a = f.compose_unchecked(src.d());
    let b = tgt.d().compose_unchecked(&f.twist(|k, q| (k as i32 + q).rem_euclid(2) == 1));
    a.sub(&b)
}

/// `∇f = d f + Γ′∘f − (−1)^{|f|} f∘Γ`.
pub fn hom_nabla(f: &HomElement, src: &PerfObject, tgt: &PerfObject) -> HomElement {
    let mut r = f.ext_d();
    r.add_scaled(&tgt.gamma().compose_unchecked(f), &Scalar::ONE);
    let ft = f.twist(|k, q| (k as i32 + q).rem_euclid(2) == 1);
    r.add_scaled(&ft.compose_unchecked(src.gamma()), &-Scalar::ONE);
    r
}

/// Witness check that `g01: E1 → E0` and `g10: E0 → E1` are inverse homotopy equivalences.
pub fn quasi_iso_check(
    e0: &PerfObject,
    e1: &PerfObject,
    g01: &HomElement,
    g10: &HomElement,
    h010: &HomElement,
    h101: &HomElement,
) -> bool {
    let shapes = g01.source() == e1.ranks()
        && g01.target() == e0.ranks()
        && g10.source() == e0.ranks()
        && g10.target() == e1.ranks()
        && h010.source() == e0.ranks()
        && h010.target() == e0.ranks()
        && h101.source() == e1.ranks()
        && h101.target() == e1.ranks();
    if !shapes {
        return false;
    }
    let lhs0 = internal_d(h010, e0, e0);
    let rhs0 = e0.identity().sub(&g01.compose_unchecked(g10));
    let lhs1 = internal_d(h101, e1, e1);
    let rhs1 = e1.identity().sub(&g10.compose_unchecked(g01));
    lhs0 == rhs0 && lhs1 == rhs1
}
