//! Command dispatch.

use std::collections::BTreeMap;

use ivb_core::cech::*;
use ivb_core::cochain::*;
use ivb_core::hodge::*;
use ivb_core::homology::{homology, induces_homology_iso, Homology};
use ivb_core::mcgen::{corpus_configs, random_cochain, random_mc};
use ivb_core::perf::HomElement;
use ivb_core::simplicial::{enum_strict, is_degenerate};
use ivb_core::tot::{random_pattern_simplex, violation_trials, TotSimplex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::Report;
use crate::scenario::{cover_scenario, simplex_scenario, Loaded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    McCheck,
    Chern,
    TraceId,
    DkCheck,
    TotCheck,
    Homology,
    Corpus,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::McCheck => "mc-check",
            Command::Chern => "chern",
            Command::TraceId => "trace-id",
            Command::DkCheck => "dk-check",
            Command::TotCheck => "tot-check",
            Command::Homology => "homology",
            Command::Corpus => "corpus",
        }
    }
}

pub struct Options {
    pub degree_bound: usize,
    pub seed: u64,
    pub size: usize,
    pub n: Option<usize>,
}

fn cell_key(c: &[u8]) -> String {
    c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

fn first_cells(c: &LabeledCochain, k: usize) -> String {
    c.sorted().iter().take(k).map(|(c, _)| format!("({})", cell_key(c))).collect::<Vec<_>>().join(" ")
}

fn scalar_witness(c: &ScalarCochain) -> String {
    c.sorted().iter().take(3).map(|(c, _)| format!("({})", cell_key(c))).collect::<Vec<_>>().join(" ")
}

/// Seed of the `i`-th corpus instance.
pub fn instance_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

/// Seeded corpus of MC elements at the given bound.
pub fn corpus(opts: &Options) -> Vec<LabeledCochain> {
    corpus_configs(opts.size, opts.degree_bound)
        .into_iter()
        .enumerate()
        .filter_map(|(i, mut cfg)| {
            if let Some(n) = opts.n {
                cfg.n = n;
            }
            Some(random_mc(&cfg, instance_seed(opts.seed, i)).g)
        })
        .collect()
}

/// Cochains on ĥΔⁿ to run simplex-level checks on, with labels.
fn simplex_views(input: &Loaded, bound: usize) -> Result<Vec<(String, LabeledCochain)>, CechError> {
    match input {
        Loaded::Simplex(g) => Ok(vec![("simplex".into(), g.truncate(bound.min(g.bound())))]),
        Loaded::Cover(a) => {
            let v = include_twisting(a)?;
            let b = bound.min(v.bound());
            let cover = v.cover().clone();
            let mut top = 0;
            for l in 1..=v.level() {
                if cover.tuples(l).iter().any(|t| distinct(t)) {
                    top = l;
                }
            }
            let mut out = Vec::new();
            for t in cover.tuples(top) {
                if distinct(&t) {
                    out.push((format!("U({})", cell_key(&t)), v.cochain_on(&t, b)?));
                }
            }
            Ok(out)
        }
    }
}

fn distinct(t: &[u8]) -> bool {
    let mut s = t.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len() == t.len()
}

pub fn run(cmd: Command, input: Option<&Loaded>, label: &str, opts: &Options) -> Report {
    let mut r = Report::new(cmd.name(), label, opts.seed, opts.degree_bound);
    match cmd {
        Command::Corpus => corpus_cmd(&mut r, opts),
        Command::TraceId | Command::DkCheck if input.is_none() => {
            let gs = corpus(opts);
            r.put("instances", gs.len());
            for (i, g) in gs.iter().enumerate() {
                let tag = format!("instance {i}");
                if cmd == Command::TraceId {
                    trace_checks(&mut r, &tag, g, opts);
                } else {
                    dk_checks(&mut r, &tag, g);
                }
            }
        }
        Command::TotCheck if input.is_none() => {
            let t = random_pattern_simplex(2, 1, 1, 2, opts.seed);
            tot_ivb_checks(&mut r, "pattern 1-simplex", &t, opts.seed);
        }
        _ => match input {
            None => r.check("input", false, Some(format!("{} needs --scenario or --builtin", cmd.name()))),
            Some(x) => run_on(cmd, x, &mut r, opts),
        },
    }
    r
}

fn run_on(cmd: Command, input: &Loaded, r: &mut Report, opts: &Options) {
    let bound = opts.degree_bound;
    match (cmd, input) {
        (Command::Validate, Loaded::Simplex(g)) => {
            r.check_result("mc-degrees", check_mc_degrees(g));
            r.check("degenerate-convention", respects_degenerate_convention(g), Some("nonidentity on a degenerate edge".into()));
            mc_simplex(r, g, bound);
        }
        (Command::Validate, Loaded::Cover(a)) => {
            r.check_result("twisting-condition", a.check());
            if let Some(v) = r.check_result("vertex", include_twisting(a).and_then(|v| v.validate().map(|_| v))) {
                let back = extract_twisting(&v);
                r.check("round-trip", back.as_ref().ok() == Some(a), Some("extraction differs from the input".into()));
            }
        }
        (Command::McCheck, Loaded::Simplex(g)) => mc_simplex(r, g, bound),
        (Command::McCheck, Loaded::Cover(a)) => {
            let mut bad = Vec::new();
            let mut n = 0;
            for l in 1..=a.bound().min(bound) {
                for t in a.cover().tuples(l) {
                    if is_degenerate(&t) {
                        continue;
                    }
                    n += 1;
                    match a.residual(&t) {
                        Ok(h) if h.is_zero() => {}
                        Ok(_) => bad.push(format!("({})", cell_key(&t))),
                        Err(e) => bad.push(format!("({}): {e}", cell_key(&t))),
                    }
                }
            }
            r.put("tuples_checked", n);
            r.check("twisting-condition", bad.is_empty(), Some(bad.join(" ")));
        }
        (Command::Chern, Loaded::Simplex(g)) => {
            let n = g.n();
            if let Some(dec) = r.check_result("chern-simplex", chern_simplex(&g.truncate((n + 1).min(g.bound())))) {
                r.check_result("dk-valid", dk_validate(&dec));
                r.put("decoration", decoration_json(&dec));
            }
        }
        (Command::Chern, Loaded::Cover(a)) => {
            let Some(v) = r.check_result("vertex", include_twisting(a)) else { return };
            let Some(c) = r.check_result("sheaf-chern", sheaf_chern(&v)) else { return };
            r.check_result("cocycle", cocycle_check(&c));
            let comps: serde_json::Map<String, Value> =
                c.comps().iter().map(|(t, u)| (format!("({})", cell_key(t)), Value::String(u.to_string()))).collect();
            r.put("cocycle", Value::Object(comps));
            if let Ok(k) = p1_class_coefficient(&c) {
                r.put("class_coefficient", k.to_string());
            }
            let chi: Vec<i64> = a.bundles().iter().map(euler_char).collect();
            r.put("euler", json!(chi));
            if let Ok(cmp) = ott_compare(a, &c) {
                r.check("ott-terms", cmp.passed(), Some(format!("{:?} {:?}", cmp.term_mismatch, cmp.value_mismatch)));
            }
        }
        (Command::TraceId, x) => match simplex_views(x, bound) {
            Ok(views) => views.iter().for_each(|(tag, g)| trace_checks(r, tag, g, opts)),
            Err(e) => r.check("views", false, Some(e.to_string())),
        },
        (Command::DkCheck, x) => {
            match simplex_views(x, bound) {
                Ok(views) => views.iter().for_each(|(tag, g)| dk_checks(r, tag, g)),
                Err(e) => r.check("views", false, Some(e.to_string())),
            }
            if let Loaded::Cover(a) = x {
                let c = include_twisting(a).and_then(|v| sheaf_chern(&v));
                r.check_result("cocycle", c.map_err(|e| e.to_string()).and_then(|c| cocycle_check(&c).map_err(|e| e.to_string())));
            }
        }
        (Command::TotCheck, Loaded::Cover(a)) => {
            let Some(v) = r.check_result("vertex", include_twisting(a)) else { return };
            if let Some(t) = r.check_result("from-vertex", TotSimplex::from_vertex(&v)) {
                let rep = t.validate_ivb_simplex();
                r.check("vertex-simplex", rep.passed(), rep.failures.first().map(|f| f.to_string()));
            }
            if let Some(t) = r.check_result("constant-1-simplex", TotSimplex::constant(&v, 1)) {
                tot_ivb_checks(r, "constant 1-simplex", &t, opts.seed);
            }
            if let Some(c) = r.check_result("sheaf-chern", sheaf_chern(&v)) {
                if let Some(o) = r.check_result("omega-simplex", TotSimplex::from_chern_cocycle(&c)) {
                    let rep = o.validate_omega();
                    r.check("omega-valid", rep.passed(), rep.failures.first().map(|f| f.to_string()));
                }
            }
        }
        (Command::TotCheck, Loaded::Simplex(g)) => {
            let m = g.n() + 1;
            let cover = CoverModel::all_equal(m, g.labeling().ring());
            let level = g.bound().saturating_sub(1).min(2);
            if let Some(t) = r.check_result("pattern-simplex", TotSimplex::from_pattern(&cover, 0, g, level)) {
                tot_ivb_checks(r, "pattern 0-simplex", &t, opts.seed);
            }
        }
        (Command::Homology, Loaded::Cover(a)) => {
            let Some(v) = r.check_result("vertex", include_twisting(a)) else { return };
            let Some(rep) = r.check_result("homology-sheaf", homology_sheaf(&v)) else { return };
            let opens: serde_json::Map<String, Value> =
                rep.opens.iter().enumerate().map(|(i, h)| (format!("U{i}"), Value::String(homology_text(h)))).collect();
            r.put("homology", Value::Object(opens));
            r.put("exact", rep.exact);
            r.put("cohsh", rep.cohsh);
            let bad: Vec<String> = rep.edges.iter().filter(|e| !e.1).map(|e| format!("({})", cell_key(&e.0))).collect();
            r.check("edges-quasi-iso", bad.is_empty(), Some(bad.join(" ")));
        }
        (Command::Homology, Loaded::Simplex(g)) => {
            let lab = g.labeling();
            let hs: Vec<Homology> = lab.objects().iter().map(homology).collect();
            let m: serde_json::Map<String, Value> =
                hs.iter().enumerate().map(|(i, h)| (format!("E{i}"), Value::String(homology_text(h)))).collect();
            r.put("homology", Value::Object(m));
            r.put("cohsh", hs.iter().all(|h| h.concentrated_in_degree_zero()));
            let mut bad = Vec::new();
            for i in 0..lab.objects().len() as u8 {
                for j in 0..lab.objects().len() as u8 {
                    if i == j {
                        continue;
                    }
                    let f = g.get(&[i, j]).cloned().unwrap_or_else(|| HomElement::zero(lab.ring(), lab.object(j).ranks(), lab.object(i).ranks()));
                    match induces_homology_iso(&f, lab.object(j), lab.object(i)) {
                        Ok(true) => {}
                        Ok(false) => bad.push(format!("({i},{j})")),
                        Err(e) => bad.push(format!("({i},{j}): {e}")),
                    }
                }
            }
            r.check("edges-quasi-iso", bad.is_empty(), Some(bad.join(" ")));
        }
        (Command::Corpus, _) => unreachable!(),
    }
}

fn homology_text(h: &Homology) -> String {
    match h {
        Homology::Exact(m) => m.iter().map(|(q, s)| format!("H{q}={s}")).collect::<Vec<_>>().join(" "),
        Homology::RankProfile(m) => m.iter().map(|(q, r)| format!("rank H{q}={r}")).collect::<Vec<_>>().join(" "),
    }
}

fn mc_simplex(r: &mut Report, g: &LabeledCochain, bound: usize) {
    let b = bound.min(g.bound());
    match mc_residual(g, b) {
        Ok(res) => r.check("maurer-cartan", res.is_zero(), Some(format!("nonzero residual on {}", first_cells(&res, 5)))),
        Err(e) => r.check("maurer-cartan", false, Some(e.to_string())),
    }
}

fn decoration_json(dec: &DKDecoration) -> Value {
    let mut m = serde_json::Map::new();
    for k in 0..=dec.n {
        for c in enum_strict(dec.n, k) {
            m.insert(format!("({})", cell_key(&c)), Value::String(dec.get(&c).to_string()));
        }
    }
    Value::Object(m)
}

/// The trace chain identity on seeded random cochains, and closedness of `Tr(Aᵏ)`.
pub fn trace_checks(r: &mut Report, tag: &str, g: &LabeledCochain, opts: &Options) {
    let b = g.bound();
    if b < 2 {
        r.check(format!("{tag}: trace-identity"), false, Some(format!("degree bound {b} < 2")));
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7472_6163_6500);
    let mut bad = None;
    for trial in 0..3 {
        let f = random_cochain(g.labeling(), b - 1, 0.3, 1, &mut rng);
        let lhs = twisted_differential(g, &f).and_then(|x| trace_map(g, &x, b - 1));
        let rhs = trace_map(g, &f, b - 2).map(|t| full_delta(&t));
        match (lhs, rhs) {
            (Ok(l), Ok(rr)) => {
                let d = l.sub(&rr);
                if !d.is_zero() {
                    bad = Some(format!("trial {trial}: sides differ on {}", scalar_witness(&d)));
                    break;
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                bad = Some(e.to_string());
                break;
            }
        }
    }
    r.check(format!("{tag}: trace-identity"), bad.is_none(), bad);
    let closed = atiyah(g).and_then(|a| {
        let mut fails = Vec::new();
        for k in 0..=3 {
            let t = trace_map(g, &power(&a, k)?, b - 1)?;
            let dt = full_delta(&t);
            if !dt.is_zero() {
                fails.push(format!("k={k} on {}", scalar_witness(&dt)));
            }
        }
        Ok(fails)
    });
    match closed {
        Ok(f) => r.check(format!("{tag}: atiyah-powers-closed"), f.is_empty(), Some(f.join("; "))),
        Err(e) => r.check(format!("{tag}: atiyah-powers-closed"), false, Some(e.to_string())),
    }
}

/// Chern decoration validity and naturality under every face and degeneracy.
pub fn dk_checks(r: &mut Report, tag: &str, g: &LabeledCochain) {
    let n = g.n();
    if g.bound() < n + 1 {
        r.check(format!("{tag}: dk-valid"), false, Some(format!("degree bound {} < {}", g.bound(), n + 1)));
        return;
    }
    let base = g.truncate(n + 1);
    match chern_simplex(&base) {
        Ok(dec) => r.check(format!("{tag}: dk-valid"), dk_validate(&dec).is_ok(), dk_validate(&dec).err().map(|e| e.to_string())),
        Err(e) => r.check(format!("{tag}: dk-valid"), false, Some(e.to_string())),
    }
    let mut ops: Vec<(String, NatOp, &LabeledCochain)> = vec![("identity".into(), NatOp::Identity, &base)];
    for j in 0..=n {
        if n >= 1 {
            ops.push((format!("face {j}"), NatOp::Face(j), &base));
        }
        if g.bound() >= n + 2 {
            ops.push((format!("degeneracy {j}"), NatOp::Degeneracy(j), g));
        }
    }
    let mut bad = Vec::new();
    for (name, op, h) in &ops {
        match naturality_check(h, op) {
            Ok(true) => {}
            Ok(false) => bad.push(name.clone()),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    r.check(format!("{tag}: naturality ({} maps)", ops.len()), bad.is_empty(), Some(bad.join(", ")));
}

fn tot_ivb_checks(r: &mut Report, tag: &str, t: &TotSimplex, seed: u64) {
    let rep = t.validate_ivb_simplex();
    r.check(format!("{tag}: valid"), rep.passed(), rep.failures.first().map(|f| f.to_string()));
    match t.materialize(t.level()) {
        Ok(full) => {
            let (inj, det) = violation_trials(&full, 100, seed);
            r.put(format!("{tag}: violations"), format!("{det}/{inj} detected"));
            r.check(format!("{tag}: violations-detected"), inj > 0 && inj == det, Some(format!("{det}/{inj} detected")));
        }
        Err(e) => r.check(format!("{tag}: violations-detected"), false, Some(e.to_string())),
    }
}

fn corpus_cmd(r: &mut Report, opts: &Options) {
    let gs = corpus(opts);
    let mut bad = Vec::new();
    let mut per_n: BTreeMap<usize, usize> = BTreeMap::new();
    let mut scenarios = Vec::new();
    for (i, g) in gs.iter().enumerate() {
        *per_n.entry(g.n()).or_default() += 1;
        match mc_residual(g, g.bound()) {
            Ok(x) if x.is_zero() => {}
            _ => bad.push(i.to_string()),
        }
        scenarios.push(serde_json::to_value(simplex_scenario(g)).expect("scenario serializes"));
    }
    r.check("maurer-cartan", bad.is_empty(), Some(format!("instances {}", bad.join(","))));
    r.put("per_n", json!(per_n.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>()));
    r.put("seeds", json!((0..gs.len()).map(|i| instance_seed(opts.seed, i)).collect::<Vec<_>>()));
    r.put("scenarios", Value::Array(scenarios));
}

/// Built-in scenarios by name.
pub fn builtin(name: &str) -> Option<Loaded> {
    builtin_twisting().into_iter().find(|(n, _)| n == name).map(|(_, a)| Loaded::Cover(a))
}

pub fn builtin_names() -> Vec<String> {
    builtin_twisting().into_iter().map(|(n, _)| n).collect()
}

/// The scenario file of a built-in.
pub fn builtin_scenario(name: &str) -> Option<crate::scenario::Scenario> {
    match builtin(name)? {
        Loaded::Cover(a) => cover_scenario(&a),
        Loaded::Simplex(g) => Some(simplex_scenario(&g)),
    }
}

