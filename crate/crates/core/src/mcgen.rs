//! Seeded random Maurer–Cartan elements on ĥΔⁿ.
//!
//! Every vertex carries a complex `E` with a deformation retraction onto a
//! free module `H` in degree 0. Edges are `ι_a φ_{ab} p_b` plus an exact
//! perturbation, with `φ` a strict cocycle on `H`. Higher components are
//! solved one cell at a time with the homotopy of the Hom complex.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cochain::{Labeling, LabeledCochain};
use crate::forms::{Gens, HolForm};
use crate::perf::{internal_d, FormMatrix, Grading, HomElement, PerfObject};
use crate::poly::{CoordRing, LaurentPoly, Mono, Ring};
use crate::scalar::Scalar;
use crate::simplicial::{cell, enum_nondegenerate, face, Cell};

/// `ι: H → E`, `p: E → H` and `h` on `E` with `id − ι p = D h`.
#[derive(Debug, Clone)]
pub struct Retract {
    pub obj: PerfObject,
    pub h_ranks: Arc<Grading>,
    pub iota: HomElement,
    pub proj: HomElement,
    pub homotopy: HomElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub n: usize,
    pub bound: usize,
    pub nvars: usize,
    pub max_rank_h: usize,
    pub max_pairs: usize,
    pub poly_entries: bool,
    pub connections: bool,
    pub perturb: bool,
}

impl GenConfig {
    pub fn new(n: usize, bound: usize) -> Self {
        GenConfig { n, bound, nvars: 2, max_rank_h: 2, max_pairs: 1, poly_entries: false, connections: true, perturb: true }
    }
}

/// A generated MC element with the data used to build it.
#[derive(Debug, Clone)]
pub struct McInstance {
    pub seed: u64,
    pub config: GenConfig,
    pub g: LabeledCochain,
    pub retracts: Vec<Retract>,
}

pub fn ring_for(nvars: usize) -> Ring {
    let names: Vec<String> = (1..=nvars).map(|i| format!("z{i}")).collect();
    CoordRing::polynomial(&names)
}

fn small_nonzero(rng: &mut ChaCha8Rng) -> Scalar {
    let v = *[-2i64, -1, 1, 2].choose(rng).unwrap();
    Scalar::int(v)
}

fn random_entry(ring: &Ring, rng: &mut ChaCha8Rng, poly: bool) -> LaurentPoly {
    let c = small_nonzero(rng);
    if poly && ring.nvars() > 0 && rng.gen_bool(0.5) {
        let i = rng.gen_range(0..ring.nvars());
        LaurentPoly::monomial(ring, Mono::var(ring.nvars(), i, 1), c)
    } else {
        LaurentPoly::constant(ring, c)
    }
}

/// A random polynomial of degree at most one with small coefficients.
pub fn random_linear(ring: &Ring, rng: &mut ChaCha8Rng) -> LaurentPoly {
    let mut p = LaurentPoly::constant(ring, Scalar::int(rng.gen_range(-2..=2)));
    for i in 0..ring.nvars() {
        if rng.gen_bool(0.4) {
            p.add_term(Mono::var(ring.nvars(), i, 1), &Scalar::int(rng.gen_range(-2..=2)));
        }
    }
    p
}

/// A random 1-form `Σ c_i dz_i` with linear coefficients.
pub fn random_one_form(ring: &Ring, rng: &mut ChaCha8Rng) -> HolForm {
    let mut f = HolForm::zero(ring);
    for i in 0..ring.nvars() {
        if rng.gen_bool(0.6) {
            f.add_scaled(&HolForm::term(random_linear(ring, rng), Gens::single(i)), &Scalar::ONE);
        }
    }
    f
}

/// A random invertible degree-preserving automorphism and its inverse.
fn random_automorphism(ring: &Ring, g: &Arc<Grading>, rng: &mut ChaCha8Rng, poly: bool) -> (HomElement, HomElement) {
    let mut t = HomElement::identity(ring, g);
    let mut ti = HomElement::identity(ring, g);
    for (q, r) in g.degrees() {
        let steps = if r > 1 { rng.gen_range(1..=3) } else { 0 };
        for _ in 0..steps {
            let a = rng.gen_range(0..r);
            let mut b = rng.gen_range(0..r);
            while b == a {
                b = rng.gen_range(0..r);
            }
            let e = random_entry(ring, rng, poly);
            let mut el = HomElement::identity(ring, g);
            el.set_entry(q, q, a, b, HolForm::from_poly(e.clone()));
            let mut eli = HomElement::identity(ring, g);
            eli.set_entry(q, q, a, b, HolForm::from_poly(e.neg()));
            t = t.compose_unchecked(&el);
            ti = eli.compose_unchecked(&ti);
        }
        if rng.gen_bool(0.5) {
            let i = rng.gen_range(0..r);
            let mut flip = HomElement::identity(ring, g);
            flip.set_entry(q, q, i, i, HolForm::constant(ring, -Scalar::ONE));
            t = t.compose_unchecked(&flip);
            ti = flip.compose_unchecked(&ti);
        }
    }
    (t, ti)
}

/// `H ⊕ (contractible pairs)`, conjugated by a random automorphism.
pub fn random_retract(ring: &Ring, rank_h: usize, pair_lows: &[i32], rng: &mut ChaCha8Rng, poly: bool) -> Retract {
    let mut ranks: BTreeMap<i32, usize> = BTreeMap::new();
    *ranks.entry(0).or_default() += rank_h;
    let mut pair_pos = Vec::new();
    for &lo in pair_lows {
        let a = *ranks.entry(lo).or_default();
        let b = *ranks.entry(lo + 1).or_default();
        pair_pos.push((lo, a, b));
        *ranks.get_mut(&lo).unwrap() += 1;
        *ranks.get_mut(&(lo + 1)).unwrap() += 1;
    }
    let grading = Arc::new(Grading::new(ranks));
    let h_ranks = Arc::new(Grading::new([(0, rank_h)]));
    let mut d0 = HomElement::zero(ring, &grading, &grading);
    let mut h0 = HomElement::zero(ring, &grading, &grading);
    for &(lo, a, b) in &pair_pos {
        d0.set_entry(lo + 1, lo, b, a, HolForm::one(ring));
        h0.set_entry(lo, lo + 1, a, b, HolForm::one(ring));
    }
    let mut iota0 = HomElement::zero(ring, &h_ranks, &grading);
    let mut proj0 = HomElement::zero(ring, &grading, &h_ranks);
    for i in 0..rank_h {
        iota0.set_entry(0, 0, i, i, HolForm::one(ring));
        proj0.set_entry(0, 0, i, i, HolForm::one(ring));
    }
    let (t, ti) = random_automorphism(ring, &grading, rng, poly);
    let d = t.compose_unchecked(&d0).compose_unchecked(&ti);
    let homotopy = t.compose_unchecked(&h0).compose_unchecked(&ti);
    let iota = t.compose_unchecked(&iota0);
    let proj = proj0.compose_unchecked(&ti);
    let obj = PerfObject::from_homs(d, HomElement::zero(ring, &grading, &grading)).expect("conjugate of a complex");
    Retract { obj, h_ranks, iota, proj, homotopy }
}

/// Random connection matrices on every degree.
pub fn random_connection(obj: &PerfObject, rng: &mut ChaCha8Rng) -> HomElement {
    let ring = obj.ring();
    let mut gamma = HomElement::zero(ring, obj.ranks(), obj.ranks());
    for (q, r) in obj.ranks().degrees() {
        for i in 0..r {
            for j in 0..r {
                if rng.gen_bool(0.5) {
                    gamma.set_entry(q, q, i, j, random_one_form(ring, rng));
                }
            }
        }
    }
    gamma
}

/// A random element of degree `q` from `src` to `tgt` with function entries.
pub fn random_hom(
    ring: &Ring,
    src: &Arc<Grading>,
    tgt: &Arc<Grading>,
    q: i32,
    density: f64,
    rng: &mut ChaCha8Rng,
    poly: bool,
) -> HomElement {
    let mut h = HomElement::zero(ring, src, tgt);
    for (s, c) in src.degrees() {
        let r = tgt.rank(s + q);
        for i in 0..r {
            for j in 0..c {
                if rng.gen_bool(density) {
                    h.set_entry(s + q, s, i, j, HolForm::from_poly(random_entry(ring, rng, poly)));
                }
            }
        }
    }
    h
}

/// Right-hand side of the dg-nerve relation
/// `Σ_{j=1}^{k−1} (−1)^{j−1} g_{α∖j} + Σ_{j=1}^{k−1} (−1)^{k(j−1)+1} g_{α(0…j)} ∘ g_{α(j…k)}`.
pub fn nerve_rhs(g: &LabeledCochain, alpha: &[u8]) -> HomElement {
    let k = alpha.len() - 1;
    let mut r = g.labeling().zero_on(alpha);
    for j in 1..k {
        if let Some(x) = g.get(&face(alpha, j).unwrap()) {
            r.add_scaled(x, &if (j - 1) % 2 == 0 { Scalar::ONE } else { -Scalar::ONE });
        }
        if let (Some(a), Some(b)) = (g.get(&alpha[..=j]), g.get(&alpha[j..])) {
            let s = if (k * (j - 1) + 1) % 2 == 0 { Scalar::ONE } else { -Scalar::ONE };
            r.add_scaled(&a.compose_unchecked(b), &s);
        }
    }
    r
}

/// Solves `D x = rhs` for `rhs: E_b → E_a` closed of degree `deg` with vanishing image on `H`.
pub fn solve_exact(rhs: &HomElement, ra: &Retract, rb: &Retract, deg: i32) -> HomElement {
    let m = deg - 1;
    // K(f) = h_a f + (−1)^{|f|} ι_a p_a f h_b
    let mut k = ra.homotopy.compose_unchecked(rhs);
    let proj = ra.iota.compose_unchecked(&ra.proj).compose_unchecked(rhs).compose_unchecked(&rb.homotopy);
    k.add_scaled(&proj, &if deg.rem_euclid(2) == 0 { Scalar::ONE } else { -Scalar::ONE });
    if m.rem_euclid(2) == 0 {
        k.neg()
    } else {
        k
    }
}

/// Generates an MC element following `cfg` from `seed`.
pub fn random_mc(cfg: &GenConfig, seed: u64) -> McInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ring = ring_for(cfg.nvars);
    let rank_h = rng.gen_range(1..=cfg.max_rank_h.max(1));
    let mut retracts = Vec::new();
    for _ in 0..=cfg.n {
        let npairs = rng.gen_range(0..=cfg.max_pairs);
        let lows: Vec<i32> = (0..npairs).map(|_| *[-1, 0].choose(&mut rng).unwrap()).collect();
        let mut r = random_retract(&ring, rank_h, &lows, &mut rng, cfg.poly_entries);
        if cfg.connections {
            let gamma = random_connection(&r.obj, &mut rng);
            r.obj = r.obj.with_connection(gamma).unwrap();
        }
        retracts.push(r);
    }
    let psi: Vec<(HomElement, HomElement)> =
        (0..=cfg.n).map(|_| random_automorphism(&ring, &retracts[0].h_ranks, &mut rng, cfg.poly_entries)).collect();
    let lab = Labeling::new(retracts.iter().map(|r| r.obj.clone()).collect()).unwrap();
    let g = solve_from_edges(&lab, &retracts, cfg.bound, &mut rng, cfg.perturb, cfg.poly_entries, |a, b| {
        psi[a].0.compose_unchecked(&psi[b].1)
    });
    McInstance { seed, config: cfg.clone(), g, retracts }
}

/// Fills in all components up to `bound` given the cocycle `φ` on `H`.
pub fn solve_from_edges(
    lab: &Arc<Labeling>,
    retracts: &[Retract],
    bound: usize,
    rng: &mut ChaCha8Rng,
    perturb: bool,
    poly: bool,
    phi: impl Fn(usize, usize) -> HomElement,
) -> LabeledCochain {
    let ring = lab.ring().clone();
    let n = lab.n();
    let mut g = LabeledCochain::zero(lab, bound).with_degenerate_identities();
    if bound == 0 {
        return g;
    }
    for c in enum_nondegenerate(n, 1) {
        let (a, b) = (c[0] as usize, c[1] as usize);
        let mut e = retracts[a].iota.compose_unchecked(&phi(a, b)).compose_unchecked(&retracts[b].proj);
        if perturb {
            let x = random_hom(&ring, retracts[b].obj.ranks(), retracts[a].obj.ranks(), -1, 0.5, rng, poly);
            e.add_scaled(&internal_d(&x, &retracts[b].obj, &retracts[a].obj), &Scalar::ONE);
        }
        g.set(&c, e).unwrap();
    }
    for k in 2..=bound {
        for c in enum_nondegenerate(n, k) {
            let rhs = nerve_rhs(&g, &c);
            let (a, b) = (c[0] as usize, c[k] as usize);
            let deg = 2 - k as i32;
            let mut x = solve_exact(&rhs, &retracts[a], &retracts[b], deg);
            if perturb {
                let y = random_hom(&ring, retracts[b].obj.ranks(), retracts[a].obj.ranks(), deg - 2, 0.3, rng, poly);
                x.add_scaled(&internal_d(&y, &retracts[b].obj, &retracts[a].obj), &Scalar::ONE);
            }
            g.set(&c, x).unwrap();
        }
    }
    g
}

/// A random cochain with components of form degree in `0..=max_form` on a random subset of cells.
pub fn random_cochain(lab: &Arc<Labeling>, bound: usize, density: f64, max_form: usize, rng: &mut ChaCha8Rng) -> LabeledCochain {
    let ring = lab.ring().clone();
    let mut f = LabeledCochain::zero(lab, bound);
    for c in crate::cochain::all_cells(lab.n(), bound) {
        if !rng.gen_bool(density) {
            continue;
        }
        let src = lab.object(*c.last().unwrap()).ranks().clone();
        let tgt = lab.object(c[0]).ranks().clone();
        let q = rng.gen_range(-1..=1);
        let k = rng.gen_range(0..=max_form);
        let mut h = random_hom(&ring, &src, &tgt, q, 0.6, rng, true);
        if k > 0 {
            let w = random_one_form(&ring, rng);
            let mut w2 = w.clone();
            for _ in 1..k {
                w2 = w2.wedge_unchecked(&random_one_form(&ring, rng));
            }
            h = h.twist(|_, _| false);
            let mut hw = HomElement::zero(&ring, &src, &tgt);
            for (&(t, s), m) in h.blocks() {
                hw.set_block(t, s, m.map(|e| w2.wedge_unchecked(e))).unwrap();
            }
            h = hw;
        }
        f.set(&c, h).unwrap();
    }
    f
}

/// Seeds for a corpus of `size` instances cycling through `n = 1, 2, 3`.
pub fn corpus_configs(size: usize, bound: usize) -> Vec<GenConfig> {
    (0..size)
        .map(|i| {
            let n = 1 + i % 3;
            let mut c = GenConfig::new(n, bound);
            c.nvars = 2 + (i / 3) % 2;
            c.poly_entries = i % 4 == 1;
            c
        })
        .collect()
}

/// Strictly increasing cells as raw cells, for convenience.
pub fn strict_cell(ix: &[usize]) -> Cell {
    cell(ix)
}

pub fn block_matrix(ring: &Ring, rows: usize, cols: usize, entries: &[(usize, usize, LaurentPoly)]) -> FormMatrix {
    let mut m = FormMatrix::zero(ring, rows, cols);
    for (i, j, p) in entries {
        m.set(*i, *j, HolForm::from_poly(p.clone()));
    }
    m
}
