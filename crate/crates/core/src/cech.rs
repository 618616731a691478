//! Finite covers, twisting cochains, vertices of the totalization and the
//! Čech Chern cocycle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chart::{ChartError, ChartMap};
use crate::cochain::{atiyah, power, trace_on_cell, CochainError, LabeledCochain, Labeling};
use crate::forms::{Gens, HolForm};
use crate::hodge::UPoly;
use crate::homology::{homology, induces_homology_iso, is_euclidean, Homology};
use crate::mcgen::{random_connection, random_mc, GenConfig};
use crate::perf::{hom_nabla, quasi_iso_check, FormMatrix, Grading, HomElement, PerfError, PerfObject};
use crate::poly::{same_ring, CoordRing, LaurentPoly, Mono, Ring};
use crate::scalar::Scalar;
use crate::simplicial::{enum_all, enum_nondegenerate, face, is_degenerate, map_vertices, Cell};
use crate::symbolic::{nerve_terms, tuple_terms, TermSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CechError {
    #[error("undefined intersection ring for {0:?}")]
    Undefined(Vec<u8>),
    #[error("malformed cover: {0}")]
    Cover(String),
    #[error("restriction maps do not commute on {0:?}")]
    Functoriality(Vec<u8>),
    #[error("component at {tuple:?}: {what}")]
    Component { tuple: Vec<u8>, what: String },
    #[error("twisting cochain condition fails on {0:?}")]
    Twisting(Vec<u8>),
    #[error("Maurer–Cartan equation fails on {tuple:?} at cell {cell:?}")]
    MaurerCartan { tuple: Vec<u8>, cell: Vec<u8> },
    #[error("edge {0:?} fails the quasi-isomorphism witness check")]
    QuasiIso(Vec<u8>),
    #[error("bound {have} is insufficient, {need} required")]
    Bound { need: usize, have: usize },
    #[error("cocycle is not defined on the two-chart projective line")]
    NotP1,
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Perf(#[from] PerfError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
}

/// Sorted distinct open indices.
pub type OpenSet = Vec<u8>;

/// The set of opens met by a tuple.
pub fn set_of(t: &[u8]) -> OpenSet {
    t.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

/// A finite cover with coordinate rings on nonempty intersections and
/// restriction maps along each elementary inclusion `U_S → U_{S∖x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverModel {
    label: String,
    names: Vec<String>,
    rings: BTreeMap<OpenSet, Ring>,
    /// `(S, x)` restricts from `U_{S∖x}` to `U_S`.
    elementary: BTreeMap<(OpenSet, u8), ChartMap>,
}

impl CoverModel {
    /// `restrictions` lists `(from, to, map)` with `to = from ∪ {x}`.
    pub fn new(
        label: &str,
        names: Vec<String>,
        rings: BTreeMap<OpenSet, Ring>,
        restrictions: Vec<(OpenSet, OpenSet, ChartMap)>,
    ) -> Result<Arc<Self>, CechError> {
        let m = names.len();
        for i in 0..m {
            if !rings.contains_key(&vec![i as u8]) {
                return Err(CechError::Undefined(vec![i as u8]));
            }
        }
        for s in rings.keys() {
            if s.is_empty() || set_of(s) != *s || s.iter().any(|&i| i as usize >= m) {
                return Err(CechError::Cover(format!("bad intersection key {s:?}")));
            }
        }
        let mut elementary = BTreeMap::new();
        for (from, to, map) in restrictions {
            let extra: Vec<u8> = to.iter().filter(|x| !from.contains(x)).copied().collect();
            if extra.len() != 1 || to.len() != from.len() + 1 {
                return Err(CechError::Cover(format!("restriction {from:?} → {to:?} is not elementary")));
            }
            let (Some(rs), Some(rt)) = (rings.get(&from), rings.get(&to)) else {
                return Err(CechError::Undefined(if rings.contains_key(&from) { to } else { from }));
            };
            if !same_ring(map.source(), rs) || !same_ring(map.target(), rt) {
                return Err(CechError::Cover(format!("restriction {from:?} → {to:?} has the wrong rings")));
            }
            elementary.insert((to, extra[0]), map);
        }
        for s in rings.keys().filter(|s| s.len() >= 2) {
            for &x in s {
                let sub: OpenSet = s.iter().copied().filter(|&y| y != x).collect();
                if !rings.contains_key(&sub) {
                    return Err(CechError::Undefined(sub));
                }
                if !elementary.contains_key(&(s.clone(), x)) {
                    return Err(CechError::Cover(format!("missing restriction {sub:?} → {s:?}")));
                }
            }
        }
        Ok(Arc::new(CoverModel { label: label.into(), names, rings, elementary }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn num_opens(&self) -> usize {
        self.names.len()
    }

    pub fn rings(&self) -> &BTreeMap<OpenSet, Ring> {
        &self.rings
    }

    /// Elementary restrictions as `(from, to, map)`.
    pub fn restrictions(&self) -> Vec<(OpenSet, OpenSet, ChartMap)> {
        self.elementary
            .iter()
            .map(|((s, x), m)| (s.iter().copied().filter(|y| y != x).collect(), s.clone(), m.clone()))
            .collect()
    }

    pub fn ring(&self, s: &[u8]) -> Result<&Ring, CechError> {
        self.rings.get(s).ok_or_else(|| CechError::Undefined(s.to_vec()))
    }

    /// Ring of the intersection met by a tuple.
    pub fn ring_of(&self, t: &[u8]) -> Result<&Ring, CechError> {
        self.ring(&set_of(t))
    }

    pub fn contains(&self, t: &[u8]) -> bool {
        self.rings.contains_key(&set_of(t))
    }

    /// Restriction from `U_from` to `U_to` for `from ⊆ to`, adding opens in increasing order.
    pub fn restriction(&self, from: &[u8], to: &[u8]) -> Result<ChartMap, CechError> {
        let mut cur: OpenSet = from.to_vec();
        let mut map = ChartMap::identity(self.ring(from)?);
        for &x in to.iter().filter(|x| !from.contains(x)) {
            cur.push(x);
            cur.sort();
            let e = self.elementary.get(&(cur.clone(), x)).ok_or_else(|| CechError::Undefined(cur.clone()))?;
            map = map.then(e)?;
        }
        if cur != to {
            return Err(CechError::Cover(format!("{from:?} is not contained in {to:?}")));
        }
        Ok(map)
    }

    /// Every square of elementary restrictions commutes.
    pub fn check_functoriality(&self) -> Result<(), CechError> {
        for s in self.rings.keys().filter(|s| s.len() >= 3) {
            for (i, &x) in s.iter().enumerate() {
                for &y in &s[i + 1..] {
                    let sx: OpenSet = s.iter().copied().filter(|&v| v != x).collect();
                    let sy: OpenSet = s.iter().copied().filter(|&v| v != y).collect();
                    let r1 = self.elementary[&(sx, y)].then(&self.elementary[&(s.clone(), x)])?;
                    let r2 = self.elementary[&(sy, x)].then(&self.elementary[&(s.clone(), y)])?;
                    if r1 != r2 {
                        return Err(CechError::Functoriality(s.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Tuples `(i₀,…,i_ℓ)` with nonempty intersection.
    pub fn tuples(&self, level: usize) -> Vec<Cell> {
        enum_all(self.num_opens() - 1, level).into_iter().filter(|t| self.contains(t)).collect()
    }

    /// Two charts `U_w = Spec ℚ[w]`, `U_z = Spec ℚ[z]`, glued along `w = 1/z`.
    pub fn p1() -> Arc<Self> {
        let rw = CoordRing::polynomial(&["w"]);
        let rz = CoordRing::polynomial(&["z"]);
        let r01 = CoordRing::laurent(&["z"]);
        let z = LaurentPoly::var(&r01, 0);
        let rings = BTreeMap::from([(vec![0], rw.clone()), (vec![1], rz.clone()), (vec![0, 1], r01.clone())]);
        let res = vec![
            (vec![0], vec![0, 1], ChartMap::new(&rw, &r01, vec![z.inverse().unwrap()]).unwrap()),
            (vec![1], vec![0, 1], ChartMap::new(&rz, &r01, vec![z]).unwrap()),
        ];
        Self::new("P1", vec!["U_w".into(), "U_z".into()], rings, res).unwrap()
    }

    /// Three intervals on a line, with `U₀ ∩ U₂ = ∅`.
    pub fn interval() -> Arc<Self> {
        let r = CoordRing::polynomial(&["x"]);
        let sets: Vec<OpenSet> = vec![vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2]];
        let rings = sets.iter().map(|s| (s.clone(), r.clone())).collect();
        let id = ChartMap::identity(&r);
        let res = vec![
            (vec![0], vec![0, 1], id.clone()),
            (vec![1], vec![0, 1], id.clone()),
            (vec![1], vec![1, 2], id.clone()),
            (vec![2], vec![1, 2], id),
        ];
        Self::new("interval", vec!["I0".into(), "I1".into(), "I2".into()], rings, res).unwrap()
    }

    /// `m` copies of the same chart with identity restrictions.
    pub fn all_equal(m: usize, ring: &Ring) -> Arc<Self> {
        let mut rings = BTreeMap::new();
        let mut res = Vec::new();
        for mask in 1u32..(1 << m) {
            let s: OpenSet = (0..m as u8).filter(|&i| mask & (1 << i) != 0).collect();
            for &x in &s {
                if s.len() > 1 {
                    let sub: OpenSet = s.iter().copied().filter(|&y| y != x).collect();
                    res.push((sub, s.clone(), ChartMap::identity(ring)));
                }
            }
            rings.insert(s, ring.clone());
        }
        Self::new("all-equal", (0..m).map(|i| format!("V{i}")).collect(), rings, res).unwrap()
    }
}

/// Whether consecutive entries repeat, position by position.
pub fn degeneracy_pattern(t: &[u8]) -> Vec<bool> {
    t.windows(2).map(|w| w[0] == w[1]).collect()
}

/// Tuples per level, and per level the number of tuples in each degeneracy class.
#[derive(Debug, Clone)]
pub struct Nerve {
    pub levels: Vec<Vec<Cell>>,
    pub classes: Vec<BTreeMap<Vec<bool>, usize>>,
}

pub fn build_nerve(cover: &CoverModel, lmax: usize) -> Nerve {
    let mut levels = Vec::new();
    let mut classes = Vec::new();
    for l in 0..=lmax {
        let ts = cover.tuples(l);
        let mut cls: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
        for t in &ts {
            *cls.entry(degeneracy_pattern(t)).or_default() += 1;
        }
        levels.push(ts);
        classes.push(cls);
    }
    Nerve { levels, classes }
}

fn sign(odd: bool) -> Scalar {
    if odd {
        -Scalar::ONE
    } else {
        Scalar::ONE
    }
}

/// Bundles `E_i` on each open and components `a_{i₀…i_j}` for `1 ≤ j ≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistingCochain {
    cover: Arc<CoverModel>,
    bundles: Vec<PerfObject>,
    bound: usize,
    comps: BTreeMap<Cell, HomElement>,
}

impl TwistingCochain {
    pub fn new(cover: &Arc<CoverModel>, bundles: Vec<PerfObject>, bound: usize) -> Result<Self, CechError> {
        if bundles.len() != cover.num_opens() {
            return Err(CechError::Cover(format!("{} bundles for {} opens", bundles.len(), cover.num_opens())));
        }
        for (i, b) in bundles.iter().enumerate() {
            if !same_ring(b.ring(), cover.ring(&[i as u8])?) {
                return Err(CechError::Component { tuple: vec![i as u8], what: "bundle over the wrong ring".into() });
            }
        }
        Ok(TwistingCochain { cover: cover.clone(), bundles, bound, comps: BTreeMap::new() })
    }

    pub fn cover(&self) -> &Arc<CoverModel> {
        &self.cover
    }

    pub fn bundles(&self) -> &[PerfObject] {
        &self.bundles
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn comps(&self) -> &BTreeMap<Cell, HomElement> {
        &self.comps
    }

    pub fn set(&mut self, t: &[u8], h: HomElement) -> Result<(), CechError> {
        let j = t.len().saturating_sub(1);
        let err = |what: &str| CechError::Component { tuple: t.to_vec(), what: what.into() };
        if j == 0 || j > self.bound {
            return Err(err("length outside 2..=bound+1"));
        }
        if is_degenerate(t) {
            return Err(err("degenerate tuples follow the id/0 convention"));
        }
        let ring = self.cover.ring_of(t)?;
        if !same_ring(h.ring(), ring) {
            return Err(err("component over the wrong ring"));
        }
        if h.source() != self.bundles[*t.last().unwrap() as usize].ranks() || h.target() != self.bundles[t[0] as usize].ranks() {
            return Err(err("shape mismatch"));
        }
        if h.degrees().iter().any(|&(k, q)| k != 0 || q != 1 - j as i32) {
            return Err(err("expected function entries of degree 1 − j"));
        }
        if h.is_zero() {
            self.comps.remove(t);
        } else {
            self.comps.insert(Cell::from(t), h);
        }
        Ok(())
    }

    /// `E_i` restricted to `U_s`.
    pub fn bundle_on(&self, i: u8, s: &[u8]) -> Result<PerfObject, CechError> {
        let b = &self.bundles[i as usize];
        if s == [i] {
            return Ok(b.clone());
        }
        Ok(b.pullback(&self.cover.restriction(&[i], s)?)?)
    }

    /// `a_t` restricted to `U_s`, with `a_i = d_i`, `a_{ii} = id` and zero on longer repeats.
    pub fn get_on(&self, t: &[u8], s: &[u8]) -> Result<Option<HomElement>, CechError> {
        let own = set_of(t);
        let h = if t.len() == 1 {
            Some(self.bundles[t[0] as usize].d().clone())
        } else if t.len() == 2 && t[0] == t[1] {
            Some(self.bundles[t[0] as usize].identity())
        } else if is_degenerate(t) {
            None
        } else {
            self.comps.get(t).cloned()
        };
        match h {
            Some(h) if own.as_slice() != s => {
                let phi = self.cover.restriction(&own, s)?;
                let h = h.with_ring(self.cover.ring(&own)?);
                Ok(Some(h.pullback(&phi)?))
            }
            other => Ok(other),
        }
    }

    /// `Σ_{j=1}^{q−1} (−1)^j a_{…î_j…} + Σ_{j=0}^{q} (−1)^{(1−j)(q−j)} a_{i₀…i_j} ∘ a_{i_j…i_q}` on `U_t`.
    pub fn residual(&self, t: &[u8]) -> Result<HomElement, CechError> {
        let q = t.len() - 1;
        let s = set_of(t);
        let src = self.bundles[*t.last().unwrap() as usize].ranks();
        let tgt = self.bundles[t[0] as usize].ranks();
        let mut r = HomElement::zero(self.cover.ring(&s)?, src, tgt);
        for j in 1..q {
            if let Some(x) = self.get_on(&face(t, j).unwrap(), &s)? {
                r.add_scaled(&x, &sign(j % 2 == 1));
            }
        }
        for j in 0..=q {
            let (Some(a), Some(b)) = (self.get_on(&t[..=j], &s)?, self.get_on(&t[j..], &s)?) else { continue };
            let e = (1 - j as i64) * (q as i64 - j as i64);
            r.add_scaled(&a.compose_unchecked(&b), &sign(e.rem_euclid(2) == 1));
        }
        Ok(r)
    }

    /// The condition on every tuple of length at most `bound + 1`.
    pub fn check(&self) -> Result<(), CechError> {
        for l in 0..=self.bound {
            for t in self.cover.tuples(l) {
                if !self.residual(&t)?.is_zero() {
                    return Err(CechError::Twisting(t.to_vec()));
                }
            }
        }
        Ok(())
    }

    /// Replaces the connection on `E_i`.
    pub fn with_connection(&self, i: usize, gamma: HomElement) -> Result<Self, CechError> {
        let mut r = self.clone();
        r.bundles[i] = self.bundles[i].with_connection(gamma)?;
        Ok(r)
    }
}

/// Components over `U_{i₀…i_ℓ}` indexed by `β` with `{β₀,…,β_q} = {0,…,ℓ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IVBVertex {
    cover: Arc<CoverModel>,
    bundles: Vec<PerfObject>,
    level: usize,
    bound: usize,
    comps: BTreeMap<(Cell, Cell), HomElement>,
}

/// Whether `beta` takes every value in `0..=l`.
pub fn covers(beta: &[u8], l: usize) -> bool {
    let s: BTreeSet<u8> = beta.iter().copied().collect();
    s.len() == l + 1 && s.iter().all(|&b| (b as usize) <= l)
}

impl IVBVertex {
    pub fn new(cover: &Arc<CoverModel>, bundles: Vec<PerfObject>, level: usize, bound: usize) -> Result<Self, CechError> {
        let t = TwistingCochain::new(cover, bundles, bound)?;
        Ok(IVBVertex { cover: cover.clone(), bundles: t.bundles, level, bound, comps: BTreeMap::new() })
    }

    pub fn cover(&self) -> &Arc<CoverModel> {
        &self.cover
    }

    pub fn bundles(&self) -> &[PerfObject] {
        &self.bundles
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn comps(&self) -> &BTreeMap<(Cell, Cell), HomElement> {
        &self.comps
    }

    pub fn set(&mut self, t: &[u8], beta: &[u8], h: HomElement) -> Result<(), CechError> {
        let l = t.len() - 1;
        let err = |what: &str| CechError::Component { tuple: t.to_vec(), what: format!("β = {beta:?}: {what}") };
        if l > self.level || !self.cover.contains(t) {
            return Err(err("tuple outside the nerve"));
        }
        if beta.len() < 2 || beta.len() > self.bound + 1 || is_degenerate(beta) {
            return Err(err("β must be nondegenerate of dimension 1..=bound"));
        }
        if !covers(beta, l) {
            return Err(err("β misses an index; that component is a restriction"));
        }
        if !same_ring(h.ring(), self.cover.ring_of(t)?) {
            return Err(err("component over the wrong ring"));
        }
        let src = self.bundles[t[*beta.last().unwrap() as usize] as usize].ranks();
        let tgt = self.bundles[t[beta[0] as usize] as usize].ranks();
        if h.source() != src || h.target() != tgt {
            return Err(err("shape mismatch"));
        }
        if h.degrees().iter().any(|&(k, q)| k != 0 || q != 2 - beta.len() as i32) {
            return Err(err("expected function entries of degree 1 − q"));
        }
        let key = (Cell::from(t), Cell::from(beta));
        if h.is_zero() {
            self.comps.remove(&key);
        } else {
            self.comps.insert(key, h);
        }
        Ok(())
    }

    /// The complexes `E_{t_j}` restricted to `U_t`.
    pub fn objects_on(&self, t: &[u8]) -> Result<Vec<PerfObject>, CechError> {
        let s = set_of(t);
        t.iter()
            .map(|&i| {
                let b = &self.bundles[i as usize];
                if s == [i] {
                    Ok(b.clone())
                } else {
                    Ok(b.pullback(&self.cover.restriction(&[i], &s)?)?)
                }
            })
            .collect()
    }

    /// `g_{β; t}`, derived by restriction when `β` misses an index.
    pub fn component(&self, t: &[u8], beta: &[u8]) -> Result<Option<HomElement>, CechError> {
        let s = set_of(t);
        if beta.len() == 1 {
            return Ok(Some(self.objects_on(&[t[beta[0] as usize]])?[0].d().pullback(&self.restrict_map(&[t[beta[0] as usize]], &s)?)?));
        }
        if beta.len() == 2 && beta[0] == beta[1] {
            let e = &self.bundles[t[beta[0] as usize] as usize];
            return Ok(Some(HomElement::identity(self.cover.ring(&s)?, e.ranks())));
        }
        if is_degenerate(beta) {
            return Ok(None);
        }
        let used: Vec<u8> = set_of(beta);
        if used.len() == t.len() {
            return Ok(self.comps.get(&(Cell::from(t), Cell::from(beta))).cloned());
        }
        let sub: Cell = used.iter().map(|&j| t[j as usize]).collect();
        let pos: Vec<usize> = (0..t.len()).map(|j| used.iter().position(|&u| u as usize == j).unwrap_or(0)).collect();
        let beta2 = map_vertices(beta, &pos);
        let Some(h) = self.component(&sub, &beta2)? else { return Ok(None) };
        let own = set_of(&sub);
        if own == s {
            return Ok(Some(h));
        }
        Ok(Some(h.pullback(&self.cover.restriction(&own, &s)?)?))
    }

    fn restrict_map(&self, from: &[u8], to: &[u8]) -> Result<ChartMap, CechError> {
        let f = set_of(from);
        let t = set_of(to);
        if f == t {
            return Ok(ChartMap::identity(self.cover.ring(&f)?));
        }
        self.cover.restriction(&f, &t)
    }

    /// The cochain on ĥΔ^ℓ carried by `t`, on cells of dimension at most `bound`.
    pub fn cochain_on(&self, t: &[u8], bound: usize) -> Result<LabeledCochain, CechError> {
        if bound > self.bound {
            return Err(CechError::Bound { need: bound, have: self.bound });
        }
        let lab = Labeling::new(self.objects_on(t)?)?;
        let mut g = LabeledCochain::zero(&lab, bound).with_degenerate_identities();
        for m in 1..=bound {
            for beta in enum_nondegenerate(t.len() - 1, m) {
                if let Some(h) = self.component(t, &beta)? {
                    if !h.is_zero() {
                        g.set(&beta, h)?;
                    }
                }
            }
        }
        Ok(g)
    }

    /// The Maurer–Cartan equation on every tuple, and the edge witnesses.
    pub fn validate(&self) -> Result<(), CechError> {
        for l in 0..=self.level {
            for t in self.cover.tuples(l) {
                let g = self.cochain_on(&t, self.bound)?;
                let r = crate::cochain::mc_residual(&g, self.bound)?;
                if let Some((c, _)) = r.sorted().into_iter().next() {
                    return Err(CechError::MaurerCartan { tuple: t.to_vec(), cell: c.to_vec() });
                }
                if l == 1 && self.bound >= 2 {
                    let objs = g.labeling().objects();
                    let get = |c: &[u8]| g.get_or_zero(c);
                    if !quasi_iso_check(&objs[0], &objs[1], &get(&[0, 1]), &get(&[1, 0]), &get(&[0, 1, 0]), &get(&[1, 0, 1])) {
                        return Err(CechError::QuasiIso(t.to_vec()));
                    }
                }
            }
        }
        Ok(())
    }
}

impl IVBVertex {
    /// The same data with every connection set to zero.
    pub fn forget_connections(&self) -> IVBVertex {
        let mut r = self.clone();
        for b in r.bundles.iter_mut() {
            let zero = HomElement::zero(b.ring(), b.ranks(), b.ranks());
            *b = b.with_connection(zero).unwrap();
        }
        r
    }
}

/// A refinement `fine → coarse`: each fine open maps into a coarse one, with charts
/// `O(U^coarse_{φ(S)}) → O(U^fine_S)` on every fine intersection.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub fine: Arc<CoverModel>,
    pub coarse: Arc<CoverModel>,
    pub map: Vec<u8>,
    pub charts: BTreeMap<OpenSet, ChartMap>,
}

impl Refinement {
    pub fn identity(cover: &Arc<CoverModel>) -> Self {
        Refinement {
            fine: cover.clone(),
            coarse: cover.clone(),
            map: (0..cover.num_opens() as u8).collect(),
            charts: cover.rings.iter().map(|(s, r)| (s.clone(), ChartMap::identity(r))).collect(),
        }
    }

    fn image(&self, s: &[u8]) -> OpenSet {
        set_of(&s.iter().map(|&i| self.map[i as usize]).collect::<Vec<_>>())
    }

    /// Charts exist with the right rings and commute with restrictions on both covers.
    pub fn check(&self) -> Result<(), CechError> {
        if self.map.len() != self.fine.num_opens() || self.map.iter().any(|&j| j as usize >= self.coarse.num_opens()) {
            return Err(CechError::Cover("refinement map has the wrong shape".into()));
        }
        for (s, r) in &self.fine.rings {
            let img = self.image(s);
            let chart = self.charts.get(s).ok_or_else(|| CechError::Undefined(s.clone()))?;
            if !same_ring(chart.source(), self.coarse.ring(&img)?) || !same_ring(chart.target(), r) {
                return Err(CechError::Cover(format!("refinement chart on {s:?} has the wrong rings")));
            }
        }
        for (from, to, e) in self.fine.restrictions() {
            let a = self.charts[&from].then(&e)?;
            let b = self.coarse_restriction(&from, &to)?.then(&self.charts[&to])?;
            if a != b {
                return Err(CechError::Functoriality(to));
            }
        }
        Ok(())
    }

    fn coarse_restriction(&self, from: &[u8], to: &[u8]) -> Result<ChartMap, CechError> {
        let (f, t) = (self.image(from), self.image(to));
        if f == t {
            return Ok(ChartMap::identity(self.coarse.ring(&f)?));
        }
        self.coarse.restriction(&f, &t)
    }

    /// `c'_T = φ^* c_{φ(T)}`.
    pub fn pull_cocycle(&self, c: &ChernCocycle) -> Result<ChernCocycle, CechError> {
        let mut r = ChernCocycle::zero(&self.fine, c.level);
        for l in 0..=c.level {
            for t in self.fine.tuples(l) {
                let img: Cell = t.iter().map(|&i| self.map[i as usize]).collect();
                r.set(&t, c.get(&img)?.pullback(&self.charts[&set_of(&t)])?);
            }
        }
        Ok(r)
    }
}

/// `g_{β; t} = a_{t∘β}`.
pub fn include_twisting(a: &TwistingCochain) -> Result<IVBVertex, CechError> {
    a.check()?;
    let mut v = IVBVertex::new(&a.cover, a.bundles.clone(), a.bound, a.bound)?;
    for l in 1..=a.bound {
        for t in a.cover.tuples(l) {
            for m in l..=a.bound {
                for beta in enum_nondegenerate(l, m) {
                    if !covers(&beta, l) {
                        continue;
                    }
                    let label = map_vertices(&beta, &t.iter().map(|&i| i as usize).collect::<Vec<_>>());
                    if let Some(h) = a.get_on(&label, &set_of(&t))? {
                        v.set(&t, &beta, h)?;
                    }
                }
            }
        }
    }
    Ok(v)
}

/// `a_{i₀…i_j} = g_{(0,1,…,j); i₀…i_j}`.
pub fn extract_twisting(v: &IVBVertex) -> Result<TwistingCochain, CechError> {
    let bound = v.level.min(v.bound);
    let mut a = TwistingCochain::new(&v.cover, v.bundles.clone(), bound)?;
    for l in 1..=bound {
        let beta: Cell = (0..=l as u8).collect();
        for t in v.cover.tuples(l) {
            if is_degenerate(&t) {
                continue;
            }
            if let Some(h) = v.comps.get(&(t.clone(), beta.clone())) {
                a.set(&t, h.clone())?;
            }
        }
    }
    Ok(a)
}

/// Components `c_t ∈ Ω•(U_t)[u]` of total degree `−ℓ` on tuples of level `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernCocycle {
    cover: Arc<CoverModel>,
    level: usize,
    comps: BTreeMap<Cell, UPoly>,
}

impl ChernCocycle {
    pub fn zero(cover: &Arc<CoverModel>, level: usize) -> Self {
        ChernCocycle { cover: cover.clone(), level, comps: BTreeMap::new() }
    }

    pub fn cover(&self) -> &Arc<CoverModel> {
        &self.cover
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn comps(&self) -> &BTreeMap<Cell, UPoly> {
        &self.comps
    }

    pub fn get(&self, t: &[u8]) -> Result<UPoly, CechError> {
        match self.comps.get(t) {
            Some(v) => Ok(v.clone()),
            None => Ok(UPoly::zero(self.cover.ring_of(t)?)),
        }
    }

    pub fn set(&mut self, t: &[u8], v: UPoly) {
        if v.is_zero() {
            self.comps.remove(t);
        } else {
            self.comps.insert(Cell::from(t), v);
        }
    }

    /// `c_{t∖j}` restricted to `U_t`.
    fn face_on(&self, t: &[u8], j: usize) -> Result<UPoly, CechError> {
        let f = face(t, j).unwrap();
        let v = self.get(&f)?;
        let (from, to) = (set_of(&f), set_of(t));
        if from == to {
            return Ok(v);
        }
        Ok(v.pullback(&self.cover.restriction(&from, &to)?)?)
    }

    /// `(δb)_t = Σ_j (−1)^j b_{t∖j}` restricted to `U_t`.
    pub fn coboundary(cover: &Arc<CoverModel>, level: usize, b: &BTreeMap<Cell, UPoly>) -> Result<Self, CechError> {
        let src = ChernCocycle { cover: cover.clone(), level, comps: b.clone() };
        let mut out = ChernCocycle::zero(cover, level + 1);
        for t in cover.tuples(level + 1) {
            let mut acc = UPoly::zero(cover.ring_of(&t)?);
            for j in 0..t.len() {
                acc.add_scaled(&src.face_on(&t, j)?, &sign(j % 2 == 1));
            }
            out.set(&t, acc);
        }
        Ok(out)
    }

    pub fn add(&self, other: &ChernCocycle) -> Result<Self, CechError> {
        let mut r = self.clone();
        r.level = self.level.max(other.level);
        for (t, v) in &other.comps {
            let cur = r.get(t)?;
            r.set(t, cur.add(v));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CocycleFailure {
    Degree { tuple: Vec<u8>, degrees: Vec<i64> },
    NotClosed { tuple: Vec<u8> },
}

impl fmt::Display for CocycleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CocycleFailure::Degree { tuple, degrees } => write!(f, "component on {tuple:?} has total degrees {degrees:?}"),
            CocycleFailure::NotClosed { tuple } => write!(f, "alternating restriction sum is nonzero on {tuple:?}"),
        }
    }
}

/// Degrees on every stored component and vanishing `δc` on tuples of level `1..=level+1`.
pub fn cocycle_check(c: &ChernCocycle) -> Result<(), CocycleFailure> {
    for (t, v) in &c.comps {
        let want = -(t.len() as i64 - 1);
        let degs = v.total_degrees();
        if degs.iter().any(|&d| d != want) {
            return Err(CocycleFailure::Degree { tuple: t.to_vec(), degrees: degs });
        }
    }
    for l in 1..=c.level + 1 {
        for t in c.cover.tuples(l) {
            let mut acc = UPoly::zero(c.cover.ring_of(&t).unwrap());
            for j in 0..t.len() {
                let v = c.face_on(&t, j).map_err(|_| CocycleFailure::NotClosed { tuple: t.to_vec() })?;
                acc.add_scaled(&v, &sign(j % 2 == 1));
            }
            if !acc.is_zero() {
                return Err(CocycleFailure::NotClosed { tuple: t.to_vec() });
            }
        }
    }
    Ok(())
}

fn factorial(k: usize) -> Scalar {
    Scalar::int((1..=k as i64).product())
}

/// `χ(E_i)` on single opens and `Tr_g(A^ℓ)_{(0…ℓ)} · u^ℓ/ℓ!` on each tuple of level `ℓ ≥ 1`.
pub fn sheaf_chern(v: &IVBVertex) -> Result<ChernCocycle, CechError> {
    if v.bound == 0 {
        return Err(CechError::Bound { need: 1, have: 0 });
    }
    let level = v.level.min(v.bound - 1);
    let mut c = ChernCocycle::zero(&v.cover, level);
    for t in v.cover.tuples(0) {
        let e = &v.bundles[t[0] as usize];
        c.set(&t, UPoly::constant(e.ring(), Scalar::int(euler_char(e))));
    }
    for l in 1..=level {
        let top: Cell = (0..=l as u8).collect();
        for t in v.cover.tuples(l) {
            let g = v.cochain_on(&t, l + 1)?;
            let a = atiyah(&g.truncate(l))?;
            let tr = trace_on_cell(&g, &power(&a, l)?, &top);
            c.set(&t, UPoly::from_form(&tr, l as u32).scale(&factorial(l).inv()));
        }
    }
    Ok(c)
}

pub fn euler_char(e: &PerfObject) -> i64 {
    e.euler_char()
}

/// Coefficient of `z⁻¹dz·u` in the `U₀₁` component on the two-chart projective line.
pub fn p1_class_coefficient(c: &ChernCocycle) -> Result<Scalar, CechError> {
    if c.cover.label() != "P1" || c.cover.num_opens() != 2 {
        return Err(CechError::NotP1);
    }
    let w = c.get(&[0, 1])?.coeff(1, 1);
    Ok(w.coeff(Gens::single(0), &Mono::var(1, 0, -1)))
}

/// `(−1)^{|β|} ∇(a_β)` on `U_s`.
fn atiyah_on(a: &TwistingCochain, t: &[u8], s: &[u8]) -> Result<Option<HomElement>, CechError> {
    let Some(h) = a.get_on(t, s)? else { return Ok(None) };
    let src = a.bundle_on(*t.last().unwrap(), s)?;
    let tgt = a.bundle_on(t[0], s)?;
    let x = hom_nabla(&h, &src, &tgt);
    Ok(Some(if (t.len() - 1) % 2 == 1 { x.neg() } else { x }))
}

/// `Σ ± str(a_γ ∘ ∇a_{β₁} ∘ ⋯)` read off the words of `Tr(A^ℓ)` on the tuple itself.
pub fn ott_component(a: &TwistingCochain, t: &[u8], terms: &TermSet) -> Result<HolForm, CechError> {
    let s = set_of(t);
    let mut acc = HolForm::zero(a.cover.ring(&s)?);
    'words: for (w, &c) in &terms.0 {
        let Some(mut m) = a.get_on(&w.wrap, &s)? else { continue };
        for f in &w.factors {
            let Some(x) = atiyah_on(a, f, &s)? else { continue 'words };
            m = m.compose_unchecked(&x);
        }
        acc.add_scaled(&m.supertrace_unchecked(), &Scalar::int(c));
    }
    Ok(acc)
}

/// Per tuple: the term sets agree, and the independently evaluated OTT component equals the cocycle.
#[derive(Debug, Clone)]
pub struct OttComparison {
    pub tuples: usize,
    pub term_mismatch: Vec<Cell>,
    pub value_mismatch: Vec<Cell>,
}

impl OttComparison {
    pub fn passed(&self) -> bool {
        self.term_mismatch.is_empty() && self.value_mismatch.is_empty()
    }
}

pub fn ott_compare(a: &TwistingCochain, c: &ChernCocycle) -> Result<OttComparison, CechError> {
    let mut out = OttComparison { tuples: 0, term_mismatch: vec![], value_mismatch: vec![] };
    for l in 0..=c.level {
        for t in a.cover.tuples(l) {
            out.tuples += 1;
            let tt = tuple_terms(&t, l);
            if nerve_terms(&t, l) != tt {
                out.term_mismatch.push(t.clone());
            }
            let v = ott_component(a, &t, &tt)?;
            if UPoly::from_form(&v, l as u32).scale(&factorial(l).inv()) != c.get(&t)? {
                out.value_mismatch.push(t.clone());
            }
        }
    }
    Ok(out)
}

/// Local homology of every bundle and homology isomorphism along every edge.
#[derive(Debug, Clone)]
pub struct HomologySheafReport {
    pub opens: Vec<Homology>,
    pub exact: bool,
    pub cohsh: bool,
    pub edges: Vec<(Cell, bool)>,
}

impl HomologySheafReport {
    pub fn edges_ok(&self) -> bool {
        self.edges.iter().all(|(_, ok)| *ok)
    }
}

pub fn homology_sheaf(v: &IVBVertex) -> Result<HomologySheafReport, CechError> {
    let opens: Vec<Homology> = v.bundles.iter().map(homology).collect();
    let exact = v.cover.rings.values().all(is_euclidean);
    let cohsh = opens.iter().all(|h| h.concentrated_in_degree_zero());
    let mut edges = Vec::new();
    for t in v.cover.tuples(1) {
        if t[0] == t[1] {
            continue;
        }
        let objs = v.objects_on(&t)?;
        let f = v.component(&t, &[0, 1])?.unwrap_or_else(|| HomElement::zero(objs[0].ring(), objs[1].ranks(), objs[0].ranks()));
        edges.push((t.clone(), induces_homology_iso(&f, &objs[1], &objs[0])?));
    }
    Ok(HomologySheafReport { opens, exact, cohsh, edges })
}

fn line(ring: &Ring, ranks: &[(i32, usize)], d: Vec<(i32, FormMatrix)>) -> PerfObject {
    PerfObject::new(ring, Grading::new(ranks.iter().copied()), d.into_iter().collect(), BTreeMap::new()).unwrap()
}

fn mono(ring: &Ring, e: i32) -> LaurentPoly {
    LaurentPoly::monomial(ring, Mono::var(ring.nvars(), 0, e), Scalar::ONE)
}

fn diag_hom(ring: &Ring, g: &Arc<Grading>, entries: &[(i32, LaurentPoly)]) -> HomElement {
    let mut h = HomElement::zero(ring, g, g);
    for (q, p) in entries {
        h.set_entry(*q, *q, 0, 0, HolForm::from_poly(p.clone()));
    }
    h
}

/// Bundles on `(U_w, U_z)` with `a₀₁ = diag(z^{e_q})`, `a₁₀` its inverse and no higher terms.
fn p1_strict(bundles: Vec<PerfObject>, a01: &[(i32, i32)], scale: Scalar) -> TwistingCochain {
    let cover = CoverModel::p1();
    let r01 = cover.ring(&[0, 1]).unwrap().clone();
    let g = bundles[0].ranks().clone();
    let fwd: Vec<(i32, LaurentPoly)> = a01.iter().map(|&(q, e)| (q, mono(&r01, e).scale(&scale))).collect();
    let bwd: Vec<(i32, LaurentPoly)> = a01.iter().map(|&(q, e)| (q, mono(&r01, -e).scale(&scale.inv()))).collect();
    let mut a = TwistingCochain::new(&cover, bundles, 3).unwrap();
    a.set(&[0, 1], diag_hom(&r01, &g, &fwd)).unwrap();
    a.set(&[1, 0], diag_hom(&r01, &g, &bwd)).unwrap();
    a
}

fn p1_rings() -> (Ring, Ring) {
    let c = CoverModel::p1();
    (c.ring(&[0]).unwrap().clone(), c.ring(&[1]).unwrap().clone())
}

/// `O(n)` with transition `z^{−n}` from the `z`-frame to the `w`-frame.
pub fn p1_line_bundle(n: i32) -> TwistingCochain {
    let (rw, rz) = p1_rings();
    p1_strict(vec![line(&rw, &[(0, 1)], vec![]), line(&rz, &[(0, 1)], vec![])], &[(0, -n)], Scalar::ONE)
}

/// The tangent bundle: `∂_z = −z⁻² ∂_w`.
pub fn p1_tangent() -> TwistingCochain {
    let (rw, rz) = p1_rings();
    p1_strict(vec![line(&rw, &[(0, 1)], vec![]), line(&rz, &[(0, 1)], vec![])], &[(0, -2)], -Scalar::ONE)
}

/// `O(n)[1]`: one bundle placed in degree −1.
pub fn p1_shifted_line(n: i32) -> TwistingCochain {
    let (rw, rz) = p1_rings();
    p1_strict(vec![line(&rw, &[(-1, 1)], vec![]), line(&rz, &[(-1, 1)], vec![])], &[(-1, -n)], Scalar::ONE)
}

/// `O^r` with identity transitions.
pub fn p1_trivial(r: usize) -> TwistingCochain {
    let (rw, rz) = p1_rings();
    let cover = CoverModel::p1();
    let r01 = cover.ring(&[0, 1]).unwrap().clone();
    let bundles = vec![line(&rw, &[(0, r)], vec![]), line(&rz, &[(0, r)], vec![])];
    let g = bundles[0].ranks().clone();
    let mut a = TwistingCochain::new(&cover, bundles, 3).unwrap();
    a.set(&[0, 1], HomElement::identity(&r01, &g)).unwrap();
    a.set(&[1, 0], HomElement::identity(&r01, &g)).unwrap();
    a
}

/// `O(a) → O(b)` in degrees −1, 0, given by the section `w^m` on `U_w` and `z^{b−a−m}` on `U_z`.
pub fn p1_cone(a: i32, b: i32, m: i32) -> TwistingCochain {
    assert!(0 <= m && m <= b - a, "the section must be regular on both charts");
    let (rw, rz) = p1_rings();
    let d = |r: &Ring, e: i32| vec![(-1, FormMatrix::from_polys(1, 1, vec![mono(r, e)]))];
    let e0 = line(&rw, &[(-1, 1), (0, 1)], d(&rw, m));
    let e1 = line(&rz, &[(-1, 1), (0, 1)], d(&rz, b - a - m));
    p1_strict(vec![e0, e1], &[(-1, -a), (0, -b)], Scalar::ONE)
}

/// The skyscraper at `z = 0` resolved as `O(−1) →^z O`.
pub fn p1_skyscraper() -> TwistingCochain {
    p1_cone(-1, 0, 0)
}

/// `O →^0 O` in degrees −1, 0 with identity transitions; homology in two degrees.
pub fn p1_split_two_term() -> TwistingCochain {
    let (rw, rz) = p1_rings();
    let e0 = line(&rw, &[(-1, 1), (0, 1)], vec![]);
    let e1 = line(&rz, &[(-1, 1), (0, 1)], vec![]);
    p1_strict(vec![e0, e1], &[(-1, 0), (0, 0)], Scalar::ONE)
}

/// Rank-two bundles on the interval cover with unipotent transitions.
pub fn interval_unipotent() -> TwistingCochain {
    let cover = CoverModel::interval();
    let r = cover.ring(&[0]).unwrap().clone();
    let x = LaurentPoly::var(&r, 0);
    let bundles: Vec<PerfObject> = (0..3).map(|_| line(&r, &[(0, 2)], vec![])).collect();
    let g = bundles[0].ranks().clone();
    let unip = |i: usize, j: usize, p: &LaurentPoly| {
        let mut h = HomElement::identity(&r, &g);
        h.set_entry(0, 0, i, j, HolForm::from_poly(p.clone()));
        h
    };
    let mut a = TwistingCochain::new(&cover, bundles, 3).unwrap();
    a.set(&[0, 1], unip(0, 1, &x)).unwrap();
    a.set(&[1, 0], unip(0, 1, &x.neg())).unwrap();
    let x2 = x.mul(&x);
    a.set(&[1, 2], unip(1, 0, &x2)).unwrap();
    a.set(&[2, 1], unip(1, 0, &x2.neg())).unwrap();
    a
}

/// A twisting cochain on the all-equal cover with `m` opens, read off a generated MC element.
pub fn random_twisting(m: usize, bound: usize, nvars: usize, seed: u64) -> TwistingCochain {
    let mut cfg = GenConfig::new(m - 1, bound);
    cfg.nvars = nvars;
    cfg.poly_entries = seed % 2 == 1;
    let inst = random_mc(&cfg, seed);
    let ring = inst.g.labeling().ring().clone();
    let cover = CoverModel::all_equal(m, &ring);
    let mut a = TwistingCochain::new(&cover, inst.g.labeling().objects().to_vec(), bound).unwrap();
    for k in 1..=bound {
        for c in enum_nondegenerate(m - 1, k) {
            if let Some(h) = inst.g.get(&c) {
                a.set(&c, h.clone()).unwrap();
            }
        }
    }
    a
}

/// Adds a random connection on one open, leaving the others untouched.
pub fn perturb_connection(a: &TwistingCochain, i: usize, seed: u64) -> Result<TwistingCochain, CechError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = &a.bundles[i];
    let mut gamma = random_connection(e, &mut rng);
    if gamma.is_zero() {
        let ring = e.ring();
        let (q, _) = e.ranks().degrees().next().unwrap();
        let p = LaurentPoly::constant(ring, Scalar::int(rng.gen_range(1..=3)));
        gamma.set_entry(q, q, 0, 0, HolForm::term(p, Gens::single(0)));
    }
    a.with_connection(i, gamma)
}

/// Every built-in twisting cochain with its name.
pub fn builtin_twisting() -> Vec<(String, TwistingCochain)> {
    let mut v = Vec::new();
    for n in -3..=3 {
        v.push((format!("p1-O({n})"), p1_line_bundle(n)));
    }
    v.push(("p1-tangent".into(), p1_tangent()));
    v.push(("p1-skyscraper".into(), p1_skyscraper()));
    v.push(("p1-cone(-2,1,2)".into(), p1_cone(-2, 1, 2)));
    v.push(("p1-trivial(2)".into(), p1_trivial(2)));
    v.push(("p1-O(1)[1]".into(), p1_shifted_line(1)));
    v.push(("p1-split-two-term".into(), p1_split_two_term()));
    v.push(("interval-unipotent".into(), interval_unipotent()));
    v
}
