//! Simplices of the totalization over a cover: grid-path data per cosimplicial
//! level, the coherence condition between levels, and the IVB and Ω checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cech::{set_of, ChernCocycle, CechError, CoverModel, IVBVertex};
use crate::cochain::{mc_residual, LabeledCochain, Labeling};
use crate::forms::{Gens, HolForm};
use crate::hodge::{dk_validate, DKDecoration, UPoly};
use crate::mcgen::{random_connection, random_mc, GenConfig};
use crate::perf::{quasi_iso_check, HomElement, PerfObject};
use crate::poly::{same_ring, LaurentPoly, Mono};
use crate::scalar::Scalar;
use crate::simplicial::{enum_grid_paths, enum_strict, face, Cell, GridMode, GridPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    /// Local complexes and maps between them.
    Ivb,
    /// Forms with a formal variable `u`, on strictly increasing paths.
    Omega,
}

impl Flavor {
    fn mode(self) -> GridMode {
        match self {
            Flavor::Ivb => GridMode::Supported,
            Flavor::Omega => GridMode::Monotone,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Bundle(PerfObject),
    Map(HomElement),
    Form(UPoly),
}

impl Payload {
    fn restrict(&self, phi: &crate::chart::ChartMap) -> Result<Payload, CechError> {
        Ok(match self {
            Payload::Bundle(e) => Payload::Bundle(e.pullback(phi)?),
            Payload::Map(h) => Payload::Map(h.pullback(phi)?),
            Payload::Form(v) => Payload::Form(v.pullback(phi)?),
        })
    }

    fn is_zero(&self) -> bool {
        match self {
            Payload::Bundle(_) => false,
            Payload::Map(h) => h.is_zero(),
            Payload::Form(v) => v.is_zero(),
        }
    }
}

fn same_value(a: Option<&Payload>, b: Option<&Payload>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y,
        (Some(x), None) | (None, Some(x)) => x.is_zero(),
        (None, None) => true,
    }
}

/// `(ℓ, path, tuple)` with the path in the `(k+1)×(ℓ+1)` grid and the tuple of level `ℓ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TotKey {
    pub l: usize,
    pub path: GridPath,
    pub tuple: Cell,
}

impl fmt::Debug for TotKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ℓ={} {:?} on {:?}", self.l, self.path, self.tuple.as_slice())
    }
}

/// First index of `0..=l` missed by the β-row.
fn missing(path: &GridPath) -> Vec<usize> {
    let b: BTreeSet<u8> = path.verts.iter().map(|v| v.1).collect();
    (0..=path.l).filter(|j| !b.contains(&(*j as u8))).collect()
}

/// The path in the `(k+1)×ℓ` grid whose `δ_j` image is `path`.
fn drop_beta(path: &GridPath, j: usize) -> GridPath {
    GridPath {
        k: path.k,
        l: path.l - 1,
        verts: path.verts.iter().map(|&(a, b)| (a, if b as usize > j { b - 1 } else { b })).collect(),
        mode: path.mode,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TotFailure {
    Coherence { key: TotKey, j: usize },
    Unsupported { key: TotKey },
    Shape { key: TotKey, what: String },
    MaurerCartan { l: usize, tuple: Cell, path: GridPath },
    QuasiIso { l: usize, tuple: Cell, from: (u8, u8), to: (u8, u8) },
    Dk { l: usize, tuple: Cell, what: String },
}

impl fmt::Display for TotFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TotFailure::Coherence { key, j } => write!(f, "coherence fails at {key:?} along δ_{j}"),
            TotFailure::Unsupported { key } => write!(f, "path of {key:?} is not supported"),
            TotFailure::Shape { key, what } => write!(f, "{key:?}: {what}"),
            TotFailure::MaurerCartan { l, tuple, path } => {
                write!(f, "Maurer–Cartan fails at ℓ={l} on {:?} for {path:?}", tuple.as_slice())
            }
            TotFailure::QuasiIso { l, tuple, from, to } => {
                write!(f, "edge {from:?}→{to:?} at ℓ={l} on {:?} is not a witnessed quasi-isomorphism", tuple.as_slice())
            }
            TotFailure::Dk { l, tuple, what } => write!(f, "ℓ={l} on {:?}: {what}", tuple.as_slice()),
        }
    }
}

/// Number of checks run and the failures found, in canonical order.
#[derive(Debug, Clone, Default)]
pub struct TotReport {
    pub checks: usize,
    pub failures: Vec<TotFailure>,
}

impl TotReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A `k`-simplex of the totalization, known on levels `0..=level` and paths of dimension `≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotSimplex {
    cover: Arc<CoverModel>,
    flavor: Flavor,
    k: usize,
    level: usize,
    bound: usize,
    entries: BTreeMap<TotKey, Payload>,
}

impl TotSimplex {
    pub fn new(cover: &Arc<CoverModel>, flavor: Flavor, k: usize, level: usize, bound: usize) -> Result<Self, CechError> {
        if flavor == Flavor::Omega && k != 0 {
            return Err(CechError::Cover("form data is supported for k = 0 only".into()));
        }
        Ok(TotSimplex { cover: cover.clone(), flavor, k, level, bound, entries: BTreeMap::new() })
    }

    pub fn cover(&self) -> &Arc<CoverModel> {
        &self.cover
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn entries(&self) -> &BTreeMap<TotKey, Payload> {
        &self.entries
    }

    /// Path from α- and β-rows in this simplex's grid at level `l`.
    pub fn path(&self, l: usize, alpha: &[usize], beta: &[usize]) -> Result<GridPath, CechError> {
        GridPath::from_rows(self.k, l, alpha, beta, self.flavor.mode()).map_err(|e| CechError::Cover(e.to_string()))
    }

    pub fn insert(&mut self, l: usize, path: GridPath, tuple: &[u8], p: Payload) -> Result<(), CechError> {
        let key = TotKey { l, path, tuple: Cell::from(tuple) };
        let err = |what: &str| CechError::Component { tuple: tuple.to_vec(), what: format!("{key:?}: {what}") };
        if l > self.level || tuple.len() != l + 1 || !self.cover.contains(tuple) {
            return Err(err("tuple outside the nerve"));
        }
        if key.path.k != self.k || key.path.l != l || key.path.mode != self.flavor.mode() {
            return Err(err("path lives in a different grid"));
        }
        if key.path.dim() > self.bound || key.path.is_degenerate() {
            return Err(err("path must be nondegenerate of dimension at most the bound"));
        }
        if self.flavor == Flavor::Omega && key.path.verts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(err("form data lives on strictly increasing paths"));
        }
        let ring = self.cover.ring_of(tuple)?;
        let ok = match (&p, self.flavor, key.path.dim()) {
            (Payload::Bundle(e), Flavor::Ivb, 0) => same_ring(e.ring(), ring),
            (Payload::Map(h), Flavor::Ivb, d) if d >= 1 => {
                same_ring(h.ring(), ring) && h.degrees().iter().all(|&(fd, q)| fd == 0 && q == 1 - d as i32)
            }
            (Payload::Form(v), Flavor::Omega, _) => same_ring(v.ring(), ring),
            _ => false,
        };
        if !ok {
            return Err(err("payload does not match the flavor, ring or degree"));
        }
        self.entries.insert(key, p);
        Ok(())
    }

    /// Removes an entry, leaving the value to be derived.
    pub fn remove(&mut self, key: &TotKey) -> Option<Payload> {
        self.entries.remove(key)
    }

    fn bundle_at(&self, l: usize, pt: (u8, u8), tuple: &[u8]) -> Result<PerfObject, CechError> {
        let p = GridPath { k: self.k, l, verts: vec![pt], mode: self.flavor.mode() };
        match self.resolve(l, &p, tuple)? {
            Some(Payload::Bundle(e)) => Ok(e),
            _ => Err(CechError::Component { tuple: tuple.to_vec(), what: format!("no complex at grid point {pt:?}") }),
        }
    }

    /// The value on `(l, path, tuple)`: stored, conventional on degenerate paths,
    /// or the restriction of the lower level when β misses an index.
    pub fn resolve(&self, l: usize, path: &GridPath, tuple: &[u8]) -> Result<Option<Payload>, CechError> {
        let key = TotKey { l, path: path.clone(), tuple: Cell::from(tuple) };
        if let Some(p) = self.entries.get(&key) {
            return Ok(Some(p.clone()));
        }
        if path.is_degenerate() {
            if self.flavor == Flavor::Ivb && path.verts.len() == 2 {
                let e = self.bundle_at(l, path.verts[0], tuple)?;
                return Ok(Some(Payload::Map(e.identity())));
            }
            return Ok(None);
        }
        let miss = missing(path);
        let Some(&j) = miss.first() else { return Ok(None) };
        let lower = face(tuple, j).map_err(|e| CechError::Cover(e.to_string()))?;
        let Some(v) = self.resolve(l - 1, &drop_beta(path, j), &lower)? else { return Ok(None) };
        let (from, to) = (set_of(&lower), set_of(tuple));
        if from == to {
            return Ok(Some(v));
        }
        v.restrict(&self.cover.restriction(&from, &to)?).map(Some)
    }

    /// Nondegenerate paths in the grid at level `l` handled by this flavor.
    pub fn paths(&self, l: usize) -> Vec<GridPath> {
        let ps = enum_grid_paths(self.k, l, self.flavor.mode(), self.bound + 1);
        match self.flavor {
            Flavor::Ivb => ps,
            Flavor::Omega => ps.into_iter().filter(|p| p.verts.windows(2).all(|w| w[0] < w[1])).collect(),
        }
    }

    /// Stores every derivable value on levels `0..=level`.
    pub fn materialize(&self, level: usize) -> Result<TotSimplex, CechError> {
        let mut r = self.clone();
        r.level = r.level.max(level);
        for l in 0..=level {
            for t in self.cover.tuples(l) {
                for p in self.paths(l) {
                    if let Some(v) = r.resolve(l, &p, &t)? {
                        if !v.is_zero() {
                            r.entries.insert(TotKey { l, path: p, tuple: t.clone() }, v);
                        }
                    }
                }
            }
        }
        Ok(r)
    }

    /// `x^{(k,ℓ+1)}` on `δ_j`-images equals `d^j x^{(k,ℓ)}` for every stored entry, every missing `j`.
    pub fn validate_coherence(&self) -> Result<usize, TotFailure> {
        let mut checks = 0;
        for (key, v) in &self.entries {
            for j in missing(&key.path) {
                checks += 1;
                let lower = face(&key.tuple, j).unwrap();
                let down = drop_beta(&key.path, j);
                let want = self.resolve(key.l - 1, &down, &lower).and_then(|w| match w {
                    Some(w) if set_of(&lower) != set_of(&key.tuple) => {
                        w.restrict(&self.cover.restriction(&set_of(&lower), &set_of(&key.tuple))?).map(Some)
                    }
                    w => Ok(w),
                });
                match want {
                    Ok(w) if same_value(Some(v), w.as_ref()) => {}
                    _ => return Err(TotFailure::Coherence { key: key.clone(), j }),
                }
            }
        }
        Ok(checks)
    }

    fn flat(&self, l: usize, pt: (u8, u8)) -> u8 {
        pt.0 * (l as u8 + 1) + pt.1
    }

    /// The cochain on ĥΔ^{(k+1)(ℓ+1)−1} carried by `tuple`, grid point `(a,b)` labelled `a(ℓ+1)+b`.
    pub fn cochain_on(&self, l: usize, tuple: &[u8]) -> Result<LabeledCochain, CechError> {
        let mut objs = Vec::new();
        for a in 0..=self.k as u8 {
            for b in 0..=l as u8 {
                objs.push(self.bundle_at(l, (a, b), tuple)?);
            }
        }
        let lab = Labeling::new(objs)?;
        let mut g = LabeledCochain::zero(&lab, self.bound).with_degenerate_identities();
        for p in self.paths(l) {
            if p.dim() == 0 {
                continue;
            }
            if let Some(Payload::Map(h)) = self.resolve(l, &p, tuple)? {
                if !h.is_zero() {
                    let c: Cell = p.verts.iter().map(|&v| self.flat(l, v)).collect();
                    g.set(&c, h)?;
                }
            }
        }
        Ok(g)
    }

    /// Coherence, supported paths, Maurer–Cartan on supported paths and the edge witnesses.
    pub fn validate_ivb_simplex(&self) -> TotReport {
        let mut rep = TotReport::default();
        for key in self.entries.keys() {
            rep.checks += 1;
            if !key.path.is_supported() {
                rep.failures.push(TotFailure::Unsupported { key: key.clone() });
            }
        }
        match self.validate_coherence() {
            Ok(n) => rep.checks += n,
            Err(f) => rep.failures.push(f),
        }
        for l in 0..=self.level {
            for t in self.cover.tuples(l) {
                let g = match self.cochain_on(l, &t) {
                    Ok(g) => g,
                    Err(e) => {
                        let key = TotKey { l, path: GridPath { k: self.k, l, verts: vec![(0, 0)], mode: self.flavor.mode() }, tuple: t.clone() };
                        rep.failures.push(TotFailure::Shape { key, what: e.to_string() });
                        continue;
                    }
                };
                let r = match mc_residual(&g, self.bound) {
                    Ok(r) => r,
                    Err(e) => {
                        let key = TotKey { l, path: GridPath { k: self.k, l, verts: vec![(0, 0)], mode: self.flavor.mode() }, tuple: t.clone() };
                        rep.failures.push(TotFailure::Shape { key, what: e.to_string() });
                        continue;
                    }
                };
                for p in self.paths(l) {
                    if p.dim() == 0 {
                        continue;
                    }
                    rep.checks += 1;
                    let c: Cell = p.verts.iter().map(|&v| self.flat(l, v)).collect();
                    if r.get(&c).is_some_and(|x| !x.is_zero()) {
                        rep.failures.push(TotFailure::MaurerCartan { l, tuple: t.clone(), path: p });
                    }
                }
                if self.bound < 2 {
                    continue;
                }
                let pts: Vec<(u8, u8)> = (0..=self.k as u8).flat_map(|a| (0..=l as u8).map(move |b| (a, b))).collect();
                for &p in &pts {
                    for &q in &pts {
                        if p >= q || !(p.0 <= q.0 && p.1 <= q.1) {
                            continue;
                        }
                        rep.checks += 1;
                        let (x, y) = (self.flat(l, p), self.flat(l, q));
                        let objs = g.labeling().objects();
                        let ok = quasi_iso_check(
                            &objs[x as usize],
                            &objs[y as usize],
                            &g.get_or_zero(&[x, y]),
                            &g.get_or_zero(&[y, x]),
                            &g.get_or_zero(&[x, y, x]),
                            &g.get_or_zero(&[y, x, y]),
                        );
                        if !ok {
                            rep.failures.push(TotFailure::QuasiIso { l, tuple: t.clone(), from: p, to: q });
                        }
                    }
                }
            }
        }
        rep
    }

    /// Per-level DK validity of the form data on each tuple, plus coherence.
    pub fn validate_omega(&self) -> TotReport {
        let mut rep = TotReport::default();
        match self.validate_coherence() {
            Ok(n) => rep.checks += n,
            Err(f) => rep.failures.push(f),
        }
        for l in 0..=self.level {
            for t in self.cover.tuples(l) {
                rep.checks += 1;
                match self.decoration(l, &t) {
                    Ok(dec) => {
                        if let Err(e) = dk_validate(&dec) {
                            rep.failures.push(TotFailure::Dk { l, tuple: t.clone(), what: e.to_string() });
                        }
                    }
                    Err(e) => rep.failures.push(TotFailure::Dk { l, tuple: t.clone(), what: e.to_string() }),
                }
            }
        }
        rep
    }

    /// The decoration of `Δ^ℓ` carried by `tuple`.
    pub fn decoration(&self, l: usize, tuple: &[u8]) -> Result<DKDecoration, CechError> {
        let mut dec = DKDecoration::zero(self.cover.ring_of(tuple)?, l);
        for m in 0..=l {
            for beta in enum_strict(l, m) {
                let p = GridPath { k: 0, l, verts: beta.iter().map(|&b| (0, b)).collect(), mode: GridMode::Monotone };
                if let Some(Payload::Form(v)) = self.resolve(l, &p, tuple)? {
                    dec.set(&beta, v);
                }
            }
        }
        Ok(dec)
    }

    /// Form data storing `c_T` on the top path `(0,…,ℓ)`; checked one level past the cocycle.
    pub fn from_chern_cocycle(c: &ChernCocycle) -> Result<TotSimplex, CechError> {
        let mut t = TotSimplex::new(c.cover(), Flavor::Omega, 0, c.level() + 1, c.level() + 1)?;
        for (tuple, v) in c.comps() {
            let l = tuple.len() - 1;
            let p = t.path(l, &vec![0; l + 1], &(0..=l).collect::<Vec<_>>())?;
            t.insert(l, p, tuple, Payload::Form(v.clone()))?;
        }
        Ok(t)
    }

    pub fn to_chern_cocycle(&self) -> Result<ChernCocycle, CechError> {
        let top = self.level.saturating_sub(1);
        let mut c = ChernCocycle::zero(&self.cover, top);
        for l in 0..=top {
            for t in self.cover.tuples(l) {
                let p = self.path(l, &vec![0; l + 1], &(0..=l).collect::<Vec<_>>())?;
                if let Some(Payload::Form(v)) = self.resolve(l, &p, &t)? {
                    c.set(&t, v);
                }
            }
        }
        Ok(c)
    }

    /// The vertex data as a 0-simplex.
    pub fn from_vertex(v: &IVBVertex) -> Result<TotSimplex, CechError> {
        Self::constant(v, 0)
    }

    /// The degenerate `k`-simplex on a vertex: `[α; β]` carries the vertex data on `β`.
    pub fn constant(v: &IVBVertex, k: usize) -> Result<TotSimplex, CechError> {
        let mut t = TotSimplex::new(v.cover(), Flavor::Ivb, k, v.level(), v.bound())?;
        for i in 0..v.cover().num_opens() {
            for a in 0..=k {
                let p = t.path(0, &[a], &[0])?;
                t.insert(0, p, &[i as u8], Payload::Bundle(v.bundles()[i].clone()))?;
            }
        }
        for l in 0..=v.level() {
            for tuple in v.cover().tuples(l) {
                for p in t.paths(l) {
                    if p.dim() == 0 || !missing(&p).is_empty() {
                        continue;
                    }
                    let beta = p.beta();
                    let h = if beta.windows(2).any(|w| w[0] == w[1]) {
                        if beta.len() > 2 {
                            continue;
                        }
                        Some(v.objects_on(&tuple)?[beta[0] as usize].identity())
                    } else {
                        v.component(&tuple, &beta)?
                    };
                    if let Some(h) = h.filter(|h| !h.is_zero()) {
                        t.insert(l, p, &tuple, Payload::Map(h))?;
                    }
                }
            }
        }
        Ok(t)
    }

    /// A genuine `k`-simplex on the all-equal cover with `m` opens: an MC element `h` on
    /// ĥΔ^{(k+1)m−1} gives `x_{[α;β]; T} = h` at labels `α_j·m + T_{β_j}`.
    pub fn from_pattern(cover: &Arc<CoverModel>, k: usize, h: &LabeledCochain, level: usize) -> Result<TotSimplex, CechError> {
        let m = cover.num_opens();
        if h.n() + 1 != (k + 1) * m {
            return Err(CechError::Cover(format!("pattern needs {} labels, found {}", (k + 1) * m, h.n() + 1)));
        }
        let mut t = TotSimplex::new(cover, Flavor::Ivb, k, level, h.bound())?;
        for i in 0..m {
            for a in 0..=k {
                let p = t.path(0, &[a], &[0])?;
                t.insert(0, p, &[i as u8], Payload::Bundle(h.labeling().object((a * m + i) as u8).clone()))?;
            }
        }
        for l in 0..=level {
            for tuple in cover.tuples(l) {
                for p in t.paths(l) {
                    if p.dim() == 0 || !missing(&p).is_empty() {
                        continue;
                    }
                    let c: Cell = p.verts.iter().map(|&(a, b)| a * m as u8 + tuple[b as usize]).collect();
                    if let Some(x) = h.get(&c).filter(|x| !x.is_zero()) {
                        t.insert(l, p, &tuple, Payload::Map(x.clone()))?;
                    }
                }
            }
        }
        Ok(t)
    }

    /// The 0-simplex on the α-row `a`.
    pub fn vertex_face(&self, a: usize) -> Result<TotSimplex, CechError> {
        let mut t = TotSimplex::new(&self.cover, self.flavor, 0, self.level, self.bound)?;
        for (key, v) in &self.entries {
            if key.path.verts.iter().all(|p| p.0 as usize == a) {
                let mut path = key.path.clone();
                path.k = 0;
                path.verts.iter_mut().for_each(|p| p.0 = 0);
                t.entries.insert(TotKey { l: key.l, path, tuple: key.tuple.clone() }, v.clone());
            }
        }
        Ok(t)
    }

    /// A 0-simplex read back as vertex data.
    pub fn to_vertex(&self) -> Result<IVBVertex, CechError> {
        if self.k != 0 || self.flavor != Flavor::Ivb {
            return Err(CechError::Cover("only IVB 0-simplices are vertices".into()));
        }
        let bundles = (0..self.cover.num_opens()).map(|i| self.bundle_at(0, (0, 0), &[i as u8])).collect::<Result<Vec<_>, _>>()?;
        let mut v = IVBVertex::new(&self.cover, bundles, self.level, self.bound)?;
        for (key, p) in &self.entries {
            if let Payload::Map(h) = p {
                if missing(&key.path).is_empty() {
                    v.set(&key.tuple, &key.path.beta(), h.clone())?;
                }
            }
        }
        Ok(v)
    }
}

/// Monotone nondegenerate paths of dimension `dim` in the `(k+1)×(ℓ+1)` grid.
pub fn monotone_inventory(k: usize, l: usize, dim: usize) -> Vec<GridPath> {
    enum_grid_paths(k, l, GridMode::Monotone, dim + 1).into_iter().filter(|p| p.dim() == dim).collect()
}

/// A random MC element on ĥΔ^{(k+1)m−1} read as a `k`-simplex over the all-equal cover.
pub fn random_pattern_simplex(m: usize, k: usize, level: usize, bound: usize, seed: u64) -> TotSimplex {
    let mut cfg = GenConfig::new((k + 1) * m - 1, bound);
    cfg.nvars = 1;
    let inst = random_mc(&cfg, seed);
    let cover = CoverModel::all_equal(m, inst.g.labeling().ring());
    TotSimplex::from_pattern(&cover, k, &inst.g, level).unwrap()
}

/// Perturbs one derived entry of a materialized simplex by a nonzero amount.
pub fn inject_violation(t: &TotSimplex, rng: &mut ChaCha8Rng) -> Option<(TotKey, TotSimplex)> {
    let derived: Vec<&TotKey> = t.entries.keys().filter(|k| !missing(&k.path).is_empty()).collect();
    let key = (*derived.choose(rng)?).clone();
    let ring = t.cover.ring_of(&key.tuple).ok()?.clone();
    let c = Scalar::int(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 });
    let e = rng.gen_range(0..=2);
    let p = LaurentPoly::monomial(&ring, Mono::var(ring.nvars(), 0, e), c);
    let bumped = match &t.entries[&key] {
        Payload::Map(h) => {
            let d = key.path.dim() as i32;
            let (s, _) = h.source().degrees().find(|&(s, _)| h.target().rank(s + 1 - d) > 0)?;
            let mut x = h.clone();
            let mut one = HomElement::zero(&ring, h.source(), h.target());
            one.set_entry(s + 1 - d, s, 0, 0, HolForm::from_poly(p));
            x.add_scaled(&one, &Scalar::ONE);
            Payload::Map(x)
        }
        Payload::Bundle(b) => {
            let mut gamma = random_connection(b, rng);
            let (q, _) = b.ranks().degrees().next()?;
            let mut extra = HomElement::zero(&ring, b.ranks(), b.ranks());
            extra.set_entry(q, q, 0, 0, HolForm::term(p, Gens::single(0)));
            gamma.add_scaled(&extra, &Scalar::ONE);
            gamma.add_scaled(b.gamma(), &Scalar::ONE);
            let nb = b.with_connection(gamma).ok()?;
            if nb == *b {
                return None;
            }
            Payload::Bundle(nb)
        }
        Payload::Form(v) => {
            let l = key.path.dim();
            let w = if l == 0 { HolForm::from_poly(p) } else { HolForm::term(p, Gens::single(0)) };
            if l >= 2 {
                return None;
            }
            Payload::Form(v.add(&UPoly::from_form(&w, l as u32)))
        }
    };
    let mut r = t.clone();
    r.entries.insert(key.clone(), bumped);
    Some((key, r))
}

/// Injects `count` violations with a seeded generator; returns `(injected, detected)`.
pub fn violation_trials(t: &TotSimplex, count: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut injected, mut detected) = (0, 0);
    let mut attempts = 0;
    while injected < count && attempts < count * 20 {
        attempts += 1;
        let Some((_, bad)) = inject_violation(t, &mut rng) else { continue };
        injected += 1;
        if bad.validate_coherence().is_err() {
            detected += 1;
        }
    }
    (injected, detected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::{include_twisting, p1_line_bundle};

    #[test]
    fn vertex_round_trip() {
        let v = include_twisting(&p1_line_bundle(1)).unwrap();
        let t = TotSimplex::from_vertex(&v).unwrap();
        assert!(t.validate_ivb_simplex().passed());
        assert_eq!(t.to_vertex().unwrap(), v);
    }

    #[test]
    fn drop_beta_inverts_coface() {
        let p = GridPath::from_rows(2, 0, &[0, 1, 2], &[0, 0, 0], GridMode::Supported).unwrap();
        let q = p.coface_beta(0);
        assert_eq!(q.beta().as_slice(), &[1, 1, 1]);
        assert_eq!(drop_beta(&q, 0), p);
    }
}
