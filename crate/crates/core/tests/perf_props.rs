use std::collections::BTreeMap;

use ivb_core::forms::HolForm;
use ivb_core::mcgen::*;
use ivb_core::perf::*;
use ivb_core::poly::{CoordRing, LaurentPoly, Ring};
use ivb_core::scalar::Scalar;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn obj(ring: &Ring, rng: &mut ChaCha8Rng) -> PerfObject {
    let lows: Vec<i32> = (0..rng.gen_range(0..=2)).map(|_| if rng.gen_bool(0.5) { -1 } else { 0 }).collect();
    let r = random_retract(ring, rng.gen_range(1..=2), &lows, rng, true);
    let gamma = random_connection(&r.obj, rng);
    r.obj.with_connection(gamma).unwrap()
}

/// A random map of hom degree `q` whose entries are forms of degree `k ≤ 1`.
fn hom(ring: &Ring, src: &PerfObject, tgt: &PerfObject, q: i32, k: usize, rng: &mut ChaCha8Rng) -> HomElement {
    let h = random_hom(ring, src.ranks(), tgt.ranks(), q, 0.7, rng, true);
    if k == 0 {
        return h;
    }
    let w = random_one_form(ring, rng);
    let mut out = HomElement::zero(ring, src.ranks(), tgt.ranks());
    for (&(t, s), m) in h.blocks() {
        out.set_block(t, s, m.map(|e| w.wedge_unchecked(e))).unwrap();
    }
    out
}

fn sign(odd: bool, h: HomElement) -> HomElement {
    if odd {
        h.neg()
    } else {
        h
    }
}

fn total(k: usize, q: i32) -> i64 {
    k as i64 + q as i64
}

#[test]
fn rejects_non_complex() {
    let r = CoordRing::polynomial(&["z"]);
    let one = || ivb_core::perf::FormMatrix::from_polys(1, 1, vec![LaurentPoly::one(&r)]);
    let d = BTreeMap::from([(0, one()), (1, one())]);
    let e = PerfObject::new(&r, Grading::new([(0, 1), (1, 1), (2, 1)]), d, BTreeMap::new());
    assert!(matches!(e, Err(PerfError::NotComplex(_))));
}

#[test]
fn examples() {
    let r = ring_for(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e = obj(&r, &mut rng);
    let f = obj(&r, &mut rng);
    let h = hom(&r, &e, &f, 0, 1, &mut rng);
    assert_eq!(f.identity().compose(&h).unwrap(), h);
    assert!(internal_d(&e.identity(), &e, &e).is_zero());
    assert!(hom_nabla(&e.identity(), &e, &e).is_zero());

    let flat = PerfObject::trivial(&r, Grading::new([(0, 2), (1, 1)]));
    assert_eq!(flat.identity().supertrace().unwrap(), HolForm::constant(&r, Scalar::int(1)));
    let g = hom(&r, &flat, &flat, 0, 0, &mut rng);
    assert_eq!(hom_nabla(&g, &flat, &flat), g.ext_d());
    let off = hom(&r, &flat, &flat, 1, 0, &mut rng);
    assert!(off.supertrace().unwrap().is_zero());
}

#[test]
fn quasi_iso_examples() {
    let r = ring_for(1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let e = obj(&r, &mut rng);
    let zero_h = HomElement::zero(&r, e.ranks(), e.ranks());
    assert!(quasi_iso_check(&e, &e, &e.identity(), &e.identity(), &zero_h, &zero_h));

    let l = CoordRing::laurent(&["z"]);
    let z = LaurentPoly::var(&l, 0);
    let cone = PerfObject::new(
        &l,
        Grading::new([(-1, 1), (0, 1)]),
        BTreeMap::from([(-1, ivb_core::perf::FormMatrix::from_polys(1, 1, vec![z.clone()]))]),
        BTreeMap::new(),
    )
    .unwrap();
    let nothing = PerfObject::trivial(&l, Grading::new([]));
    let g01 = HomElement::zero(&l, nothing.ranks(), cone.ranks());
    let g10 = HomElement::zero(&l, cone.ranks(), nothing.ranks());
    let mut h010 = HomElement::zero(&l, cone.ranks(), cone.ranks());
    h010.set_entry(-1, 0, 0, 0, HolForm::from_poly(z.inverse().unwrap()));
    let h101 = HomElement::zero(&l, nothing.ranks(), nothing.ranks());
    assert!(quasi_iso_check(&cone, &nothing, &g01, &g10, &h010, &h101));

    let line = PerfObject::trivial(&l, Grading::new([(0, 1)]));
    let z0 = HomElement::zero(&l, line.ranks(), line.ranks());
    assert!(!quasi_iso_check(&line, &line, &z0, &z0, &z0, &z0));
}

#[test]
fn euler_char_is_supertrace_of_identity() {
    let r = ring_for(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let e = obj(&r, &mut rng);
        let alt: i64 = e.ranks().degrees().map(|(q, n)| if q % 2 == 0 { n as i64 } else { -(n as i64) }).sum();
        assert_eq!(e.euler_char(), alt);
        assert_eq!(e.identity().supertrace().unwrap(), HolForm::constant(&r, Scalar::int(alt)));
    }
    let r1 = CoordRing::polynomial(&["z"]);
    assert_eq!(PerfObject::trivial(&r1, Grading::new([(0, 1)])).euler_char(), 1);
    assert_eq!(PerfObject::trivial(&r1, Grading::new([(-1, 1), (0, 1)])).euler_char(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squares_to_zero(seed in any::<u64>(), q in -2i32..=1, k in 0usize..=1) {
        let r = ring_for(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, f) = (obj(&r, &mut rng), obj(&r, &mut rng));
        let h = hom(&r, &e, &f, q, k, &mut rng);
        prop_assert!(internal_d(&internal_d(&h, &e, &f), &e, &f).is_zero());
    }

    #[test]
    fn composition_is_associative_and_degrees_add(seed in any::<u64>(), q1 in -1i32..=1, q2 in -1i32..=1, q3 in -1i32..=1) {
        let r = ring_for(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, d) = (obj(&r, &mut rng), obj(&r, &mut rng), obj(&r, &mut rng), obj(&r, &mut rng));
        let (k1, k2) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
        let f = hom(&r, &c, &d, q1, k1, &mut rng);
        let g = hom(&r, &b, &c, q2, k2, &mut rng);
        let h = hom(&r, &a, &b, q3, 0, &mut rng);
        let l = f.compose(&g).unwrap().compose(&h).unwrap();
        let rr = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(l, rr);
        for (k, q) in f.compose(&g).unwrap().degrees() {
            prop_assert_eq!((k, q), (k1 + k2, q1 + q2));
        }
    }

    #[test]
    fn nabla_is_a_graded_derivation(seed in any::<u64>(), q1 in -1i32..=1, q2 in -1i32..=1) {
        let r = ring_for(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (obj(&r, &mut rng), obj(&r, &mut rng), obj(&r, &mut rng));
        let k1 = rng.gen_range(0..=1);
        let k2 = rng.gen_range(0..=1);
        let f = hom(&r, &b, &c, q1, k1, &mut rng);
        let g = hom(&r, &a, &b, q2, k2, &mut rng);
        let lhs = hom_nabla(&f.compose(&g).unwrap(), &a, &c);
        let rhs = hom_nabla(&f, &b, &c).compose(&g).unwrap()
            .add(&sign(total(k1, q1) % 2 != 0, f.compose(&hom_nabla(&g, &a, &b)).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn supertrace_is_graded_cyclic(seed in any::<u64>(), q in -1i32..=1) {
        let r = ring_for(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, f) = (obj(&r, &mut rng), obj(&r, &mut rng));
        let (k1, k2) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
        let h = hom(&r, &e, &f, q, k1, &mut rng);
        let k = hom(&r, &f, &e, -q, k2, &mut rng);
        let a = total(k1, q);
        let b = total(k2, -q);
        let lhs = h.compose(&k).unwrap().supertrace().unwrap();
        let rhs = k.compose(&h).unwrap().supertrace().unwrap();
        prop_assert_eq!(lhs, if (a * b) % 2 != 0 { rhs.neg() } else { rhs });
    }
}
