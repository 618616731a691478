//! The triple-graded algebra of Hom-valued cochains on ĥΔⁿ, the Maurer–Cartan
//! condition, the trace map and the Atiyah class.

use std::collections::HashMap;
use std::sync::Arc;

use crate::chart::ChartMap;
use crate::forms::HolForm;
use crate::perf::{hom_nabla, internal_d, HomElement, PerfError, PerfObject};
use crate::poly::Ring;
use crate::scalar::Scalar;
use crate::simplicial::{self, enum_all, face, is_degenerate, sub, wrapped, Cell};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CochainError {
    #[error("labeling mismatch")]
    Labeling,
    #[error("bound {have} is insufficient, {need} required")]
    Bound { need: usize, have: usize },
    #[error("degree violation at {cell:?}: {what}")]
    Degree { cell: Vec<u8>, what: String },
    #[error("component at {cell:?} has the wrong shape")]
    Shape { cell: Vec<u8> },
    #[error(transparent)]
    Perf(#[from] PerfError),
}

/// Assignment of a complex to every vertex `0,…,n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    ring: Ring,
    objects: Vec<PerfObject>,
}

impl Labeling {
    pub fn new(objects: Vec<PerfObject>) -> Result<Arc<Self>, CochainError> {
        assert!(!objects.is_empty(), "at least one vertex");
        let ring = objects[0].ring().clone();
        if objects.iter().any(|o| !crate::poly::same_ring(o.ring(), &ring)) {
            return Err(CochainError::Labeling);
        }
        Ok(Arc::new(Labeling { ring, objects }))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// The bound `n`: vertices are `0,…,n`.
    pub fn n(&self) -> usize {
        self.objects.len() - 1
    }

    pub fn object(&self, v: u8) -> &PerfObject {
        &self.objects[v as usize]
    }

    pub fn objects(&self) -> &[PerfObject] {
        &self.objects
    }

    /// Zero component on the cell `c`, from `E_{c(last)}` to `E_{c(0)}`.
    pub fn zero_on(&self, c: &[u8]) -> HomElement {
        HomElement::zero(&self.ring, self.object(*c.last().unwrap()).ranks(), self.object(c[0]).ranks())
    }

    /// Pulls every complex back along a vertex map `[m] → [n]`.
    pub fn reindex(&self, phi: &[usize]) -> Arc<Self> {
        Arc::new(Labeling { ring: self.ring.clone(), objects: phi.iter().map(|&i| self.objects[i].clone()).collect() })
    }

    pub fn pullback(&self, chart: &ChartMap) -> Result<Arc<Self>, CochainError> {
        let objects = self.objects.iter().map(|o| o.pullback(chart)).collect::<Result<Vec<_>, _>>()?;
        Ok(Arc::new(Labeling { ring: chart.target().clone(), objects }))
    }
}

/// A cochain on all cells (degenerate ones included) of dimension at most `bound`.
#[derive(Debug, Clone)]
pub struct LabeledCochain {
    lab: Arc<Labeling>,
    bound: usize,
    comps: HashMap<Cell, HomElement>,
}

impl PartialEq for LabeledCochain {
    fn eq(&self, other: &Self) -> bool {
        self.lab == other.lab && self.bound == other.bound && self.comps == other.comps
    }
}

/// Every cell of ĥΔⁿ of dimension at most `bound`, ordered by dimension then lexicographically.
pub fn all_cells(n: usize, bound: usize) -> Vec<Cell> {
    (0..=bound).flat_map(|m| enum_all(n, m)).collect()
}

fn parity(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

impl LabeledCochain {
    pub fn zero(lab: &Arc<Labeling>, bound: usize) -> Self {
        LabeledCochain { lab: lab.clone(), bound, comps: HashMap::new() }
    }

    /// Builds a cochain from a rule evaluated on every cell up to `bound`.
    pub fn from_rule(
        lab: &Arc<Labeling>,
        bound: usize,
        mut rule: impl FnMut(&Cell) -> Option<HomElement>,
    ) -> Result<Self, CochainError> {
        let mut f = Self::zero(lab, bound);
        for c in all_cells(lab.n(), bound) {
            if let Some(h) = rule(&c) {
                f.set(&c, h)?;
            }
        }
        Ok(f)
    }

    pub fn labeling(&self) -> &Arc<Labeling> {
        &self.lab
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn n(&self) -> usize {
        self.lab.n()
    }

    pub fn comps(&self) -> &HashMap<Cell, HomElement> {
        &self.comps
    }

    /// Components in canonical cell order.
    pub fn sorted(&self) -> Vec<(&Cell, &HomElement)> {
        let mut v: Vec<_> = self.comps.iter().collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn get(&self, c: &[u8]) -> Option<&HomElement> {
        self.comps.get(c)
    }

    pub fn get_or_zero(&self, c: &[u8]) -> HomElement {
        self.comps.get(c).cloned().unwrap_or_else(|| self.lab.zero_on(c))
    }

    pub fn set(&mut self, c: &[u8], h: HomElement) -> Result<(), CochainError> {
        let dimc = c.len() - 1;
        if dimc > self.bound {
            return Err(CochainError::Bound { need: dimc, have: self.bound });
        }
        if h.source() != self.lab.object(*c.last().unwrap()).ranks() || h.target() != self.lab.object(c[0]).ranks() {
            return Err(CochainError::Shape { cell: c.to_vec() });
        }
        if h.is_zero() {
            self.comps.remove(c);
        } else {
            self.comps.insert(c.into(), h);
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Restricts to cells of dimension at most `bound`.
    pub fn truncate(&self, bound: usize) -> Self {
        let bound = bound.min(self.bound);
        LabeledCochain {
            lab: self.lab.clone(),
            bound,
            comps: self.comps.iter().filter(|(c, _)| c.len() <= bound + 1).map(|(c, h)| (c.clone(), h.clone())).collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), CochainError> {
        if !Arc::ptr_eq(&self.lab, &other.lab) && self.lab != other.lab {
            return Err(CochainError::Labeling);
        }
        Ok(())
    }

    pub fn add_scaled(&self, other: &Self, c: &Scalar) -> Result<Self, CochainError> {
        self.check_compatible(other)?;
        let bound = self.bound.min(other.bound);
        let mut r = self.truncate(bound);
        for (cell, h) in &other.comps {
            if cell.len() > bound + 1 {
                continue;
            }
            match r.comps.get_mut(cell) {
                Some(x) => {
                    x.add_scaled(h, c);
                    if x.is_zero() {
                        r.comps.remove(cell);
                    }
                }
                None => {
                    let s = h.scale(c);
                    if !s.is_zero() {
                        r.comps.insert(cell.clone(), s);
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn add(&self, other: &Self) -> Result<Self, CochainError> {
        self.add_scaled(other, &Scalar::ONE)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CochainError> {
        self.add_scaled(other, &-Scalar::ONE)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut r = Self::zero(&self.lab, self.bound);
        for (cell, h) in &self.comps {
            let s = h.scale(c);
            if !s.is_zero() {
                r.comps.insert(cell.clone(), s);
            }
        }
        r
    }

    /// Applies `(−1)^{odd(k, p, q)}` piecewise, with `p` the cell dimension.
    pub fn twist(&self, odd: impl Fn(usize, usize, i32) -> bool) -> Self {
        let mut r = Self::zero(&self.lab, self.bound);
        for (cell, h) in &self.comps {
            let p = cell.len() - 1;
            r.comps.insert(cell.clone(), h.twist(|k, q| odd(k, p, q)));
        }
        r
    }

    /// Triple degrees `(k, p, q)` present.
    pub fn degrees(&self) -> Vec<(usize, usize, i32)> {
        let mut v: Vec<_> = self
            .comps
            .iter()
            .flat_map(|(c, h)| h.degrees().into_iter().map(move |(k, q)| (k, c.len() - 1, q)))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// The cochain carrying `id_{E_i}` on each vertex.
    pub fn unit(lab: &Arc<Labeling>, bound: usize) -> Self {
        let mut r = Self::zero(lab, bound);
        for (i, o) in lab.objects.iter().enumerate() {
            let id = o.identity();
            if !id.is_zero() {
                r.comps.insert(simplicial::cell(&[i]), id);
            }
        }
        r
    }

    /// The cochain carrying the differential `d_i` on each vertex.
    pub fn differential(lab: &Arc<Labeling>, bound: usize) -> Self {
        let mut r = Self::zero(lab, bound);
        for (i, o) in lab.objects.iter().enumerate() {
            if !o.d().is_zero() {
                r.comps.insert(simplicial::cell(&[i]), o.d().clone());
            }
        }
        r
    }

    /// Inserts `id` on every length-two repeat `(i,i)`.
    pub fn with_degenerate_identities(mut self) -> Self {
        if self.bound >= 1 {
            for (i, o) in self.lab.objects.iter().enumerate() {
                let id = o.identity();
                if !id.is_zero() {
                    self.comps.insert(simplicial::cell(&[i, i]), id);
                }
            }
        }
        self
    }

    /// Precomposes with a vertex map `φ: [m] → [n]`: `g̃_β = g_{φ(β)}`.
    pub fn reindex(&self, phi: &[usize]) -> Self {
        let lab = self.lab.reindex(phi);
        let mut r = Self::zero(&lab, self.bound);
        for c in all_cells(phi.len() - 1, self.bound) {
            let img = simplicial::map_vertices(&c, phi);
            if let Some(h) = self.comps.get(&img) {
                r.comps.insert(c, h.clone());
            }
        }
        r
    }

    /// Pulls every component and every complex back along a chart map.
    pub fn pullback(&self, chart: &ChartMap) -> Result<Self, CochainError> {
        let lab = self.lab.pullback(chart)?;
        let mut r = Self::zero(&lab, self.bound);
        for (c, h) in &self.comps {
            let p = h.pullback(chart)?;
            if !p.is_zero() {
                r.comps.insert(c.clone(), p);
            }
        }
        Ok(r)
    }
}

/// `(δ̂f)_α = Σ_{i=1}^{p−1} (−1)^i f_{d_i α}` for α of dimension p.
pub fn hat_delta(f: &LabeledCochain) -> LabeledCochain {
    let mut r = LabeledCochain::zero(&f.lab, f.bound);
    for c in all_cells(f.n(), f.bound) {
        if c.len() < 3 {
            continue;
        }
        let mut acc: Option<HomElement> = None;
        for i in 1..c.len() - 1 {
            let fc = face(&c, i).unwrap();
            if let Some(h) = f.comps.get(&fc) {
                let s = if i % 2 == 0 { Scalar::ONE } else { -Scalar::ONE };
                match &mut acc {
                    Some(a) => a.add_scaled(h, &s),
                    None => acc = Some(h.scale(&s)),
                }
            }
        }
        if let Some(a) = acc {
            if !a.is_zero() {
                r.comps.insert(c, a);
            }
        }
    }
    r
}

/// `(Df)_α = (−1)^p (d_{α(0)}∘f_α − (−1)^{k+q} f_α∘d_{α(p)})`.
pub fn cochain_d(f: &LabeledCochain) -> LabeledCochain {
    let mut r = LabeledCochain::zero(&f.lab, f.bound);
    for (c, h) in &f.comps {
        let p = c.len() - 1;
        let src = f.lab.object(*c.last().unwrap());
        let tgt = f.lab.object(c[0]);
        // internal_d(h) = h∘d − (−1)^{k+q} d∘h; the cochain form is −(−1)^{k+q} times it.
        let x = internal_d(h, src, tgt).twist(|k, q| parity(k as i64 + q as i64));
        let x = if p % 2 == 1 { x.neg() } else { x };
        if !x.is_zero() {
            r.comps.insert(c.clone(), x);
        }
    }
    r
}

/// `(f·g)_α = Σ_p (−1)^{(k+q)·(m−p)} f_{α(0…p)} ∘ g_{α(p…m)}`.
pub fn product(f: &LabeledCochain, g: &LabeledCochain) -> Result<LabeledCochain, CochainError> {
    f.check_compatible(g)?;
    let bound = f.bound.min(g.bound);
    let mut r = LabeledCochain::zero(&f.lab, bound);
    if f.comps.is_empty() || g.comps.is_empty() {
        return Ok(r);
    }
    for c in all_cells(f.n(), bound) {
        let m = c.len() - 1;
        let mut acc: Option<HomElement> = None;
        for p in 0..=m {
            let Some(a) = f.comps.get(&c[..=p]) else { continue };
            let Some(b) = g.comps.get(&c[p..]) else { continue };
            let r_odd = (m - p) % 2 == 1;
            let a2 = if r_odd { a.twist(|k, q| parity(k as i64 + q as i64)) } else { a.clone() };
            let prod = a2.compose_unchecked(b);
            match &mut acc {
                Some(x) => x.add_scaled(&prod, &Scalar::ONE),
                None => acc = Some(prod),
            }
        }
        if let Some(x) = acc {
            if !x.is_zero() {
                r.comps.insert(c, x);
            }
        }
    }
    Ok(r)
}

/// `(−1)^{|f|}` applied piecewise, `|f| = k + p + q`.
pub fn total_sign(f: &LabeledCochain) -> LabeledCochain {
    f.twist(|k, p, q| parity(k as i64 + p as i64 + q as i64))
}

/// `[x, f] = x·f − (−1)^{|x||f|} f·x` for `x` homogeneous of total degree `x_deg`.
pub fn graded_commutator(x: &LabeledCochain, x_deg: i64, f: &LabeledCochain) -> Result<LabeledCochain, CochainError> {
    let left = product(x, f)?;
    let ft = if parity(x_deg) { total_sign(f) } else { f.clone() };
    let right = product(&ft, x)?;
    left.sub(&right)
}

/// `(∇f)_α = (−1)^p ∇(f_α)`.
pub fn cochain_nabla(f: &LabeledCochain) -> LabeledCochain {
    let mut r = LabeledCochain::zero(&f.lab, f.bound);
    for (c, h) in &f.comps {
        let p = c.len() - 1;
        let x = hom_nabla(h, f.lab.object(*c.last().unwrap()), f.lab.object(c[0]));
        let x = if p % 2 == 1 { x.neg() } else { x };
        if !x.is_zero() {
            r.comps.insert(c.clone(), x);
        }
    }
    r
}

/// Checks that every piece of `g` has form degree 0 and `p + q = 1`.
pub fn check_mc_degrees(g: &LabeledCochain) -> Result<(), CochainError> {
    for (c, h) in g.sorted() {
        let p = c.len() - 1;
        for (k, q) in h.degrees() {
            if k != 0 || p as i32 + q != 1 {
                return Err(CochainError::Degree {
                    cell: c.to_vec(),
                    what: format!("piece of degree (k={k}, p={p}, q={q}), expected (0, p, 1−p)"),
                });
            }
        }
    }
    Ok(())
}

/// `δ̂g + Dg + g·g` on all cells up to `bound`.
pub fn mc_residual(g: &LabeledCochain, bound: usize) -> Result<LabeledCochain, CochainError> {
    if bound > g.bound {
        return Err(CochainError::Bound { need: bound, have: g.bound });
    }
    check_mc_degrees(g)?;
    let g = g.truncate(bound);
    hat_delta(&g).add(&cochain_d(&g))?.add(&product(&g, &g)?)
}

/// `(δ̂ + D + [g,−]) f`.
pub fn twisted_differential(g: &LabeledCochain, f: &LabeledCochain) -> Result<LabeledCochain, CochainError> {
    let bound = g.bound.min(f.bound);
    let f = f.truncate(bound);
    hat_delta(&f).add(&cochain_d(&f))?.add(&graded_commutator(g, 1, &f)?)
}

/// `A = ∇(d + g)`.
pub fn atiyah(g: &LabeledCochain) -> Result<LabeledCochain, CochainError> {
    let d = LabeledCochain::differential(&g.lab, g.bound);
    Ok(cochain_nabla(&d.add(g)?))
}

/// `f^k`, with `f^0` the unit.
pub fn power(f: &LabeledCochain, k: usize) -> Result<LabeledCochain, CochainError> {
    let mut acc = LabeledCochain::unit(&f.lab, f.bound);
    for _ in 0..k {
        acc = product(&acc, f)?;
    }
    Ok(acc)
}

/// A form-valued Čech cochain on ĥΔⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCochain {
    pub ring: Ring,
    pub n: usize,
    pub bound: usize,
    pub comps: HashMap<Cell, HolForm>,
}

impl ScalarCochain {
    pub fn zero(ring: &Ring, n: usize, bound: usize) -> Self {
        ScalarCochain { ring: ring.clone(), n, bound, comps: HashMap::new() }
    }

    pub fn get(&self, c: &[u8]) -> HolForm {
        self.comps.get(c).cloned().unwrap_or_else(|| HolForm::zero(&self.ring))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn sorted(&self) -> Vec<(&Cell, &HolForm)> {
        let mut v: Vec<_> = self.comps.iter().collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.bound = self.bound.min(other.bound);
        r.comps.retain(|c, _| c.len() <= r.bound + 1);
        for (c, v) in &other.comps {
            if c.len() > r.bound + 1 {
                continue;
            }
            let e = r.comps.entry(c.clone()).or_insert_with(|| HolForm::zero(&self.ring));
            e.add_scaled(v, &-Scalar::ONE);
            if e.is_zero() {
                r.comps.remove(c);
            }
        }
        r
    }
}

/// The full Čech differential `(δc)_α = Σ_{j=0}^{p} (−1)^j c_{d_j α}`; defined up to `bound + 1`.
pub fn full_delta(c: &ScalarCochain) -> ScalarCochain {
    let bound = c.bound + 1;
    let mut r = ScalarCochain::zero(&c.ring, c.n, bound);
    for a in all_cells(c.n, bound) {
        if a.len() < 2 {
            continue;
        }
        let mut acc = HolForm::zero(&c.ring);
        for j in 0..a.len() {
            if let Some(v) = c.comps.get(&face(&a, j).unwrap()) {
                acc.add_scaled(v, &if j % 2 == 0 { Scalar::ONE } else { -Scalar::ONE });
            }
        }
        if !acc.is_zero() {
            r.comps.insert(a, acc);
        }
    }
    r
}

/// `(−1)^{(k+1)s+ℓ−k}`.
pub fn trace_sign(s: usize, k: usize, l: usize) -> bool {
    ((k + 1) * s + l - k) % 2 == 1
}

/// `Tr_g(f)_α = Σ_{0≤k≤ℓ≤s} (−1)^{(k+1)s+ℓ−k} str(g_{α(ℓ…s,0…k)} ∘ f_{α(k…ℓ)})` on one cell.
pub fn trace_on_cell(g: &LabeledCochain, f: &LabeledCochain, alpha: &[u8]) -> HolForm {
    let s = alpha.len() - 1;
    let mut acc = HolForm::zero(&g.lab.ring);
    for k in 0..=s {
        for l in k..=s {
            let Some(fc) = f.comps.get(&alpha[k..=l]) else { continue };
            let w = wrapped(alpha, l, k);
            let Some(gc) = g.comps.get(&w) else { continue };
            let t = gc.supertrace_of_compose(fc);
            if !t.is_zero() {
                acc.add_scaled(&t, &if trace_sign(s, k, l) { -Scalar::ONE } else { Scalar::ONE });
            }
        }
    }
    acc
}

/// The trace map on every cell of dimension at most `s_max`.
pub fn trace_map(g: &LabeledCochain, f: &LabeledCochain, s_max: usize) -> Result<ScalarCochain, CochainError> {
    g.check_compatible(f)?;
    if g.bound < s_max + 1 {
        return Err(CochainError::Bound { need: s_max + 1, have: g.bound });
    }
    if f.bound < s_max {
        return Err(CochainError::Bound { need: s_max, have: f.bound });
    }
    let mut r = ScalarCochain::zero(&g.lab.ring, g.n(), s_max);
    for a in all_cells(g.n(), s_max) {
        let v = trace_on_cell(g, f, &a);
        if !v.is_zero() {
            r.comps.insert(a, v);
        }
    }
    Ok(r)
}

/// Cells of `f` touched when evaluating the trace on `alpha`, for locality checks.
pub fn trace_support(alpha: &[u8]) -> Vec<(Cell, Cell)> {
    let s = alpha.len() - 1;
    let mut v = Vec::new();
    for k in 0..=s {
        for l in k..=s {
            v.push((wrapped(alpha, l, k), sub(alpha, k, l)));
        }
    }
    v
}

/// Whether every nondegenerate cell `(i,i)`-convention is respected: `g_{(i,i)} = id`
/// and `g` vanishes on longer degenerate cells.
pub fn respects_degenerate_convention(g: &LabeledCochain) -> bool {
    for (c, h) in &g.comps {
        if is_degenerate(c) {
            if c.len() == 2 {
                if *h != g.lab.object(c[0]).identity() {
                    return false;
                }
            } else {
                return false;
            }
        }
    }
    (0..=g.n()).all(|i| {
        let id = g.lab.objects[i].identity();
        g.bound == 0 || id.is_zero() || g.comps.get(&simplicial::cell(&[i, i])[..]) == Some(&id)
    })
}
