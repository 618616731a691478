//! Scenario files: JSON records with rationals written as `"p/q"` strings.

use std::collections::BTreeMap;
use std::sync::Arc;

use ivb_core::cech::{CoverModel, TwistingCochain};
use ivb_core::cochain::{Labeling, LabeledCochain};
use ivb_core::forms::{Gens, HolForm};
use ivb_core::perf::{FormMatrix, Grading, HomElement, PerfObject};
use ivb_core::poly::{CoordRing, LaurentPoly, Mono, Ring};
use ivb_core::scalar::Scalar;
use ivb_core::simplicial::Cell;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    pub vars: Vec<String>,
    /// Variables that are inverted; missing entries are `false`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub invertible: Vec<bool>,
}

/// `c · x^e · dx_{d₀} ∧ dx_{d₁} ∧ ⋯`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSpec {
    pub c: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub e: Vec<i32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d: Vec<usize>,
}

pub type FormSpec = Vec<TermSpec>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub target: i32,
    pub source: i32,
    pub rows: Vec<Vec<FormSpec>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSpec {
    /// Degree (as a decimal string) to rank.
    pub ranks: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differential: Vec<BlockSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub connection: Vec<BlockSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub cell: Vec<u8>,
    pub blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverSpec {
    P1,
    Interval,
    AllEqual { opens: usize, ring: RingSpec },
}

/// A labeled cochain on ĥΔⁿ, `n + 1 = objects.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexScenario {
    pub ring: RingSpec,
    pub objects: Vec<ObjectSpec>,
    pub degree_bound: usize,
    /// Fill `g_{(i,i)}` with identities.
    #[serde(default = "yes")]
    pub degenerate_identities: bool,
    pub components: Vec<ComponentSpec>,
}

/// A twisting cochain on a fixed cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverScenario {
    pub cover: CoverSpec,
    pub bundles: Vec<ObjectSpec>,
    pub degree_bound: usize,
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Simplex(SimplexScenario),
    Cover(CoverScenario),
}

fn yes() -> bool {
    true
}

#[derive(Debug)]
pub struct LoadError {
    pub at: String,
    pub msg: String,
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.at, self.msg)
    }
}

fn err(at: impl Into<String>, msg: impl std::fmt::Display) -> LoadError {
    LoadError { at: at.into(), msg: msg.to_string() }
}

/// Loaded data, ready for the commands.
#[derive(Debug, Clone)]
pub enum Loaded {
    Simplex(LabeledCochain),
    Cover(TwistingCochain),
}

#[derive(Deserialize)]
struct Kind {
    kind: String,
}

pub fn parse(text: &str) -> Result<Scenario, LoadError> {
    let at = |e: serde_json::Error| err(format!("line {} column {}", e.line(), e.column()), e);
    let k: Kind = serde_json::from_str(text).map_err(at)?;
    match k.kind.as_str() {
        "simplex" => serde_json::from_str(text).map(Scenario::Simplex).map_err(at),
        "cover" => serde_json::from_str(text).map(Scenario::Cover).map_err(at),
        other => Err(err("kind", format!("unknown kind `{other}` (expected `simplex` or `cover`)"))),
    }
}

pub fn to_pretty(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}

fn build_ring(r: &RingSpec) -> Ring {
    let inv: Vec<bool> = (0..r.vars.len()).map(|i| r.invertible.get(i).copied().unwrap_or(false)).collect();
    CoordRing::new(&r.vars, &inv)
}

fn build_form(ring: &Ring, f: &FormSpec, at: &str) -> Result<HolForm, LoadError> {
    let n = ring.nvars();
    let mut out = HolForm::zero(ring);
    for (i, t) in f.iter().enumerate() {
        let at = format!("{at}.term[{i}]");
        let c: Scalar = t.c.parse().map_err(|_| err(&at, format!("bad rational `{}`", t.c)))?;
        if t.e.len() > n {
            return Err(err(&at, format!("{} exponents for {} variables", t.e.len(), n)));
        }
        let mut e = t.e.clone();
        e.resize(n, 0);
        for (j, &x) in e.iter().enumerate() {
            if x < 0 && !ring.is_invertible(j) {
                return Err(err(&at, format!("negative power of non-invertible `{}`", ring.names()[j])));
            }
        }
        if t.d.iter().any(|&j| j >= n) {
            return Err(err(&at, "differential of an unknown variable"));
        }
        let mut sorted = t.d.clone();
        sorted.sort_unstable();
        let Some(g) = Gens::from_indices(&sorted) else {
            return Err(err(&at, "repeated differential"));
        };
        let p = LaurentPoly::monomial(ring, Mono(e.into_iter().collect()), c);
        let mut term = HolForm::term(p, g);
        if sort_sign(&t.d) {
            term = term.neg();
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// Parity of the sort of `d`.
fn sort_sign(d: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            if d[i] > d[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

fn build_block(ring: &Ring, b: &BlockSpec, src: &Grading, tgt: &Grading, at: &str) -> Result<FormMatrix, LoadError> {
    let (rows, cols) = (tgt.rank(b.target), src.rank(b.source));
    if b.rows.len() != rows || b.rows.iter().any(|r| r.len() != cols) {
        return Err(err(at, format!("block {}←{} must be {rows}×{cols}", b.target, b.source)));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, r) in b.rows.iter().enumerate() {
        for (j, f) in r.iter().enumerate() {
            data.push(build_form(ring, f, &format!("{at}[{i}][{j}]"))?);
        }
    }
    Ok(FormMatrix::from_rows(rows, cols, data))
}

fn build_hom(ring: &Ring, blocks: &[BlockSpec], src: &Arc<Grading>, tgt: &Arc<Grading>, at: &str) -> Result<HomElement, LoadError> {
    let mut h = HomElement::zero(ring, src, tgt);
    for (i, b) in blocks.iter().enumerate() {
        let at = format!("{at}.blocks[{i}]");
        let m = build_block(ring, b, src, tgt, &at)?;
        h.set_block(b.target, b.source, m).map_err(|e| err(&at, e))?;
    }
    Ok(h)
}

fn build_object(ring: &Ring, o: &ObjectSpec, at: &str) -> Result<PerfObject, LoadError> {
    let mut ranks = Vec::new();
    for (q, &r) in &o.ranks {
        let q: i32 = q.trim().parse().map_err(|_| err(format!("{at}.ranks"), format!("bad degree `{q}`")))?;
        ranks.push((q, r));
    }
    let g = Arc::new(Grading::new(ranks));
    let d = build_hom(ring, &o.differential, &g, &g, &format!("{at}.differential"))?;
    let gamma = build_hom(ring, &o.connection, &g, &g, &format!("{at}.connection"))?;
    PerfObject::from_homs(d, gamma).map_err(|e| err(at, e))
}

fn build_cover(c: &CoverSpec) -> Arc<CoverModel> {
    match c {
        CoverSpec::P1 => CoverModel::p1(),
        CoverSpec::Interval => CoverModel::interval(),
        CoverSpec::AllEqual { opens, ring } => CoverModel::all_equal(*opens, &build_ring(ring)),
    }
}

pub fn load(s: &Scenario) -> Result<Loaded, LoadError> {
    match s {
        Scenario::Simplex(SimplexScenario { ring, objects, degree_bound, degenerate_identities, components }) => {
            let r = build_ring(ring);
            if objects.is_empty() {
                return Err(err("objects", "need at least one object"));
            }
            let objs = objects
                .iter()
                .enumerate()
                .map(|(i, o)| build_object(&r, o, &format!("objects[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let lab = Labeling::new(objs).map_err(|e| err("objects", e))?;
            let mut g = LabeledCochain::zero(&lab, *degree_bound);
            if *degenerate_identities {
                g = g.with_degenerate_identities();
            }
            for (i, c) in components.iter().enumerate() {
                let at = format!("components[{i}]");
                if c.cell.is_empty() || c.cell.iter().any(|&v| v as usize >= lab.objects().len()) {
                    return Err(err(&at, format!("cell {:?} outside the simplex", c.cell)));
                }
                let src = lab.object(*c.cell.last().unwrap()).ranks().clone();
                let tgt = lab.object(c.cell[0]).ranks().clone();
                let h = build_hom(&r, &c.blocks, &src, &tgt, &at)?;
                g.set(&c.cell, h).map_err(|e| err(&at, e))?;
            }
            Ok(Loaded::Simplex(g))
        }
        Scenario::Cover(CoverScenario { cover, bundles, degree_bound, components }) => {
            let cv = build_cover(cover);
            cv.check_functoriality().map_err(|e| err("cover", e))?;
            let mut objs = Vec::new();
            for (i, o) in bundles.iter().enumerate() {
                let ring = cv.ring(&[i as u8]).map_err(|e| err(format!("bundles[{i}]"), e))?.clone();
                objs.push(build_object(&ring, o, &format!("bundles[{i}]"))?);
            }
            let mut a = TwistingCochain::new(&cv, objs, *degree_bound).map_err(|e| err("bundles", e))?;
            for (i, c) in components.iter().enumerate() {
                let at = format!("components[{i}]");
                if c.cell.iter().any(|&v| v as usize >= cv.num_opens()) || !cv.contains(&c.cell) {
                    return Err(err(&at, format!("tuple {:?} is not an intersection of the cover", c.cell)));
                }
                let ring = cv.ring_of(&c.cell).map_err(|e| err(&at, e))?.clone();
                let src = a.bundles()[*c.cell.last().unwrap() as usize].ranks().clone();
                let tgt = a.bundles()[c.cell[0] as usize].ranks().clone();
                let h = build_hom(&ring, &c.blocks, &src, &tgt, &at)?;
                a.set(&c.cell, h).map_err(|e| err(&at, e))?;
            }
            Ok(Loaded::Cover(a))
        }
    }
}

fn ring_spec(r: &Ring) -> RingSpec {
    let invertible: Vec<bool> = (0..r.nvars()).map(|i| r.is_invertible(i)).collect();
    RingSpec {
        vars: r.names().to_vec(),
        invertible: if invertible.iter().any(|&b| b) { invertible } else { Vec::new() },
    }
}

pub fn form_spec(f: &HolForm) -> FormSpec {
    let mut out = Vec::new();
    for (g, p) in f.comps() {
        for (m, c) in p.terms() {
            let mut e: Vec<i32> = m.0.to_vec();
            while e.last() == Some(&0) {
                e.pop();
            }
            out.push(TermSpec { c: c.to_string(), e, d: g.indices() });
        }
    }
    out
}

fn blocks_spec(h: &HomElement) -> Vec<BlockSpec> {
    h.blocks()
        .iter()
        .map(|(&(t, s), m)| BlockSpec {
            target: t,
            source: s,
            rows: (0..m.rows()).map(|i| (0..m.cols()).map(|j| form_spec(m.get(i, j))).collect()).collect(),
        })
        .collect()
}

fn object_spec(o: &PerfObject) -> ObjectSpec {
    ObjectSpec {
        ranks: o.ranks().degrees().map(|(q, r)| (q.to_string(), r)).collect(),
        differential: blocks_spec(o.d()),
        connection: blocks_spec(o.gamma()),
    }
}

fn cover_spec(c: &CoverModel) -> Option<CoverSpec> {
    match c.label() {
        "P1" => Some(CoverSpec::P1),
        "interval" => Some(CoverSpec::Interval),
        _ => {
            let r = c.ring(&[0]).ok()?;
            Some(CoverSpec::AllEqual { opens: c.num_opens(), ring: ring_spec(r) })
        }
    }
}

/// Canonical scenario for a labeled cochain; identities on `(i,i)` are left implicit.
pub fn simplex_scenario(g: &LabeledCochain) -> Scenario {
    let lab = g.labeling();
    let implicit = |c: &Cell, h: &HomElement| c.len() == 2 && c[0] == c[1] && *h == lab.object(c[0]).identity();
    let components = g
        .sorted()
        .into_iter()
        .filter(|(c, h)| !implicit(c, h) && !h.is_zero())
        .map(|(c, h)| ComponentSpec { cell: c.to_vec(), blocks: blocks_spec(h) })
        .collect();
    Scenario::Simplex(SimplexScenario {
        ring: ring_spec(lab.ring()),
        objects: lab.objects().iter().map(object_spec).collect(),
        degree_bound: g.bound(),
        degenerate_identities: true,
        components,
    })
}

pub fn cover_scenario(a: &TwistingCochain) -> Option<Scenario> {
    Some(Scenario::Cover(CoverScenario {
        cover: cover_spec(a.cover())?,
        bundles: a.bundles().iter().map(object_spec).collect(),
        degree_bound: a.bound(),
        components: a.comps().iter().map(|(c, h)| ComponentSpec { cell: c.to_vec(), blocks: blocks_spec(h) }).collect(),
    }))
}
