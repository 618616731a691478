use std::sync::Arc;

use ivb_core::cochain::*;
use ivb_core::forms::{Gens, HolForm};
use ivb_core::mcgen::*;
use ivb_core::perf::{hom_nabla, Grading, HomElement, PerfObject};
use ivb_core::poly::{CoordRing, LaurentPoly, Mono};
use ivb_core::scalar::Scalar;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every component has total degree `total` and form degree `k`.
fn homogeneous(lab: &Arc<Labeling>, bound: usize, total: i64, k: usize, density: f64, rng: &mut ChaCha8Rng) -> LabeledCochain {
    let ring = lab.ring().clone();
    let mut f = LabeledCochain::zero(lab, bound);
    for c in all_cells(lab.n(), bound) {
        if !rng.gen_bool(density) {
            continue;
        }
        let p = c.len() as i64 - 1;
        let q = (total - k as i64 - p) as i32;
        let src = lab.object(*c.last().unwrap()).ranks().clone();
        let tgt = lab.object(c[0]).ranks().clone();
        let mut h = random_hom(&ring, &src, &tgt, q, 0.7, rng, true);
        if k == 1 {
            let w = random_one_form(&ring, rng);
            let mut hw = HomElement::zero(&ring, &src, &tgt);
            for (&(t, s), m) in h.blocks() {
                hw.set_block(t, s, m.map(|e| w.wedge_unchecked(e))).unwrap();
            }
            h = hw;
        }
        f.set(&c, h).unwrap();
    }
    f
}

fn small_mc(seed: u64, n: usize, bound: usize) -> McInstance {
    let mut cfg = GenConfig::new(n, bound);
    cfg.nvars = 2;
    random_mc(&cfg, seed)
}

#[test]
fn hat_delta_examples() {
    let inst = small_mc(1, 2, 3);
    let lab = inst.g.labeling();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = homogeneous(lab, 1, 0, 0, 1.0, &mut rng);
    let mut one_cells = LabeledCochain::zero(lab, 2);
    for (c, h) in f.sorted() {
        if c.len() == 2 {
            one_cells.set(c, h.clone()).unwrap();
        }
    }
    let d = hat_delta(&one_cells);
    for c in all_cells(2, 2).into_iter().filter(|c| c.len() == 3) {
        let want = one_cells.get_or_zero(&[c[0], c[2]]).neg();
        assert_eq!(d.get_or_zero(&c), want, "{c:?}");
    }
    let mut verts = LabeledCochain::zero(lab, 2);
    for (c, h) in f.sorted() {
        if c.len() == 1 {
            verts.set(c, h.clone()).unwrap();
        }
    }
    assert!(hat_delta(&verts).is_zero());
}

#[test]
fn unit_and_identity_cochains() {
    let inst = small_mc(2, 2, 3);
    let lab = inst.g.labeling();
    let u = LabeledCochain::unit(lab, 3);
    assert!(cochain_d(&u).is_zero());
    assert!(cochain_nabla(&u).is_zero());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_cochain(lab, 3, 0.4, 1, &mut rng);
    assert!(product(&f, &LabeledCochain::zero(lab, 3)).unwrap().is_zero());
    assert_eq!(product(&u, &f).unwrap(), f);
}

#[test]
fn edge_identities_on_a_single_vertex_are_maurer_cartan() {
    let r = ring_for(1);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let e = random_retract(&r, 2, &[-1], &mut rng, true).obj;
    let lab = Labeling::new(vec![e]).unwrap();
    let g = LabeledCochain::zero(&lab, 4).with_degenerate_identities();
    assert!(mc_residual(&g, 4).unwrap().is_zero());
}

#[test]
fn perturbation_is_detected() {
    for seed in 0..6 {
        let inst = small_mc(seed, 1 + seed as usize % 3, 3);
        let mut g = inst.g.clone();
        let (c, h) = g.sorted().into_iter().find(|(c, _)| c.len() == 3 && !ivb_core::simplicial::is_degenerate(c))
            .map(|(c, h)| (c.clone(), h.clone()))
            .unwrap_or_else(|| {
                let (c, h) = inst.g.sorted().into_iter().find(|(c, _)| c.len() == 2 && c[0] != c[1]).unwrap();
                (c.clone(), h.clone())
            });
        let ring = g.labeling().ring().clone();
        let mut bump = HomElement::zero(&ring, h.source(), h.target());
        let q = 2 - c.len() as i32;
        let (s, _) = h.source().degrees().find(|&(s, _)| h.target().rank(s + q) > 0).unwrap();
        bump.set_entry(s + q, s, 0, 0, HolForm::constant(&ring, Scalar::int(3)));
        g.set(&c, h.add(&bump)).unwrap();
        assert!(!mc_residual(&g, 3).unwrap().is_zero(), "seed {seed}");
    }
}

#[test]
fn atiyah_of_a_line_bundle_edge() {
    let l = CoordRing::laurent(&["z"]);
    let o = PerfObject::trivial(&l, Grading::new([(0, 1)]));
    let lab = Labeling::new(vec![o.clone(), o.clone()]).unwrap();
    for n in -3i32..=3 {
        let zn = LaurentPoly::monomial(&l, Mono::var(1, 0, n), Scalar::ONE);
        let g = LabeledCochain::from_rule(&lab, 3, |c| {
            let mut h = HomElement::zero(&l, o.ranks(), o.ranks());
            let p = match c.as_slice() {
                [0, 1] => zn.clone(),
                [1, 0] => zn.inverse().unwrap(),
                [a, b] if a == b => LaurentPoly::one(&l),
                _ => return None,
            };
            h.set_entry(0, 0, 0, 0, HolForm::from_poly(p));
            Some(h)
        })
        .unwrap();
        assert!(mc_residual(&g, 3).unwrap().is_zero());
        let a = atiyah(&g).unwrap();
        let want = LaurentPoly::monomial(&l, Mono::var(1, 0, n - 1), Scalar::int(n as i64));
        let dzn = HolForm::term(want, Gens::single(0));
        assert_eq!(hom_nabla(g.get(&[0, 1]).unwrap(), &o, &o).entry(0, 0, 0, 0), dzn);
        assert_eq!(a.get_or_zero(&[0, 1]).entry(0, 0, 0, 0), dzn.neg());
    }
}

#[test]
fn atiyah_support_and_closedness() {
    for seed in 0..6 {
        let inst = small_mc(seed, 1 + seed as usize % 3, 4);
        let a = atiyah(&inst.g).unwrap();
        for (k, p, q) in a.degrees() {
            assert_eq!((k, q), (1, 1 - p as i32), "seed {seed}");
        }
        assert!(twisted_differential(&inst.g, &a).unwrap().is_zero(), "seed {seed}");
    }
}

#[test]
fn chern_is_local_in_the_bound() {
    use ivb_core::hodge::{chern_simplex, dk_validate};
    for seed in 0..4 {
        let n = 1 + seed as usize % 3;
        let inst = small_mc(seed, n, n + 3);
        let small = chern_simplex(&inst.g.truncate(n + 1)).unwrap();
        let big = chern_simplex(&inst.g).unwrap();
        assert_eq!(small, big);
        dk_validate(&big).unwrap();
        assert!(chern_simplex(&inst.g.truncate(n)).is_err());
    }
}

#[test]
fn trace_of_zero() {
    let inst = small_mc(3, 2, 3);
    let z = LabeledCochain::zero(inst.g.labeling(), 3);
    assert!(trace_map(&inst.g, &z, 2).unwrap().is_zero());
}

#[test]
fn product_of_edge_cochains_lives_on_two_cells() {
    let inst = small_mc(8, 2, 3);
    let lab = inst.g.labeling();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let only = |f: LabeledCochain, len: usize| {
        let mut r = LabeledCochain::zero(lab, 3);
        for (c, h) in f.sorted() {
            if c.len() == len {
                r.set(c, h.clone()).unwrap();
            }
        }
        r
    };
    let f = only(homogeneous(lab, 3, 1, 0, 0.8, &mut rng), 2);
    let g = only(homogeneous(lab, 3, 1, 0, 0.8, &mut rng), 2);
    let fg = product(&f, &g).unwrap();
    assert!(!fg.is_zero());
    assert!(fg.sorted().iter().all(|(c, _)| c.len() == 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hat_delta_squares_to_zero(seed in any::<u64>()) {
        let inst = small_mc(seed % 7, 1 + (seed % 3) as usize, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_cochain(inst.g.labeling(), 3, 0.5, 1, &mut rng);
        prop_assert!(hat_delta(&hat_delta(&f)).is_zero());
    }

    #[test]
    fn internal_d_is_the_bracket_with_d(seed in any::<u64>()) {
        let inst = small_mc(seed % 7, 1 + (seed % 3) as usize, 3);
        let lab = inst.g.labeling();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_cochain(lab, 3, 0.5, 1, &mut rng);
        prop_assert!(cochain_d(&cochain_d(&f)).is_zero());
        let bracket = graded_commutator(&LabeledCochain::differential(lab, 3), 1, &f).unwrap();
        prop_assert_eq!(cochain_d(&f), bracket);
    }

    #[test]
    fn product_is_associative(seed in any::<u64>()) {
        let inst = small_mc(seed % 7, 1 + (seed % 3) as usize, 3);
        let lab = inst.g.labeling();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_cochain(lab, 3, 0.4, 1, &mut rng);
        let g = random_cochain(lab, 3, 0.4, 1, &mut rng);
        let h = random_cochain(lab, 3, 0.4, 0, &mut rng);
        let l = product(&product(&f, &g).unwrap(), &h).unwrap();
        let r = product(&f, &product(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn nabla_anticommutes_with_hat_delta_and_is_a_derivation(seed in any::<u64>(), tf in -1i64..=2, tg in -1i64..=2, kf in 0usize..=1) {
        let inst = small_mc(seed % 7, 1 + (seed % 3) as usize, 3);
        let lab = inst.g.labeling();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = homogeneous(lab, 3, tf, kf, 0.5, &mut rng);
        let g = homogeneous(lab, 3, tg, 0, 0.5, &mut rng);
        prop_assert_eq!(cochain_nabla(&hat_delta(&f)), hat_delta(&cochain_nabla(&f)).scale(&-Scalar::ONE));
        let lhs = cochain_nabla(&product(&f, &g).unwrap());
        let second = product(&f, &cochain_nabla(&g)).unwrap();
        let second = if tf % 2 != 0 { second.scale(&-Scalar::ONE) } else { second };
        let rhs = product(&cochain_nabla(&f), &g).unwrap().add(&second).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn twisted_differential_squares_to_zero(seed in any::<u64>()) {
        let inst = small_mc(seed % 11, 1 + (seed % 3) as usize, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_cochain(inst.g.labeling(), 3, 0.4, 1, &mut rng);
        let once = twisted_differential(&inst.g, &f).unwrap();
        prop_assert!(twisted_differential(&inst.g, &once).unwrap().is_zero());
    }
}

