use ivb_core::chart::{ChartError, ChartMap};
use ivb_core::forms::{Gens, HolForm};
use ivb_core::poly::{CoordRing, LaurentPoly, Mono, Ring};
use ivb_core::scalar::Scalar;
use proptest::prelude::*;

fn laurent2() -> Ring {
    CoordRing::laurent(&["x", "y"])
}

fn poly_strategy(ring: Ring, lo: i32) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((lo..3i32, lo..3i32, -4i64..=4, 1i64..=3), 0..4).prop_map(move |ts| {
        LaurentPoly::from_terms(&ring, ts.into_iter().map(|(a, b, n, d)| (Mono(smallvec::smallvec![a, b]), Scalar::new(n, d))))
    })
}

fn form_strategy(ring: Ring, lo: i32) -> impl Strategy<Value = HolForm> {
    prop::collection::vec((0u32..4, poly_strategy(ring.clone(), lo)), 0..4).prop_map(move |cs| {
        let mut f = HolForm::zero(&ring);
        for (g, p) in cs {
            f.add_scaled(&HolForm::term(p, Gens(g)), &Scalar::ONE);
        }
        f
    })
}

fn homogeneous(f: &HolForm, k: usize) -> HolForm {
    f.part(k)
}

/// Units `c·xᵃyᵇ` as images keep every Laurent element pullable.
fn unit_chart_strategy(src: Ring, tgt: Ring) -> impl Strategy<Value = ChartMap> {
    prop::collection::vec((-2i32..=2, -2i32..=2, prop_oneof![Just(1i64), Just(-1), Just(2), Just(3)]), 2).prop_map(move |v| {
        let imgs = v.into_iter().map(|(a, b, c)| LaurentPoly::monomial(&tgt, Mono(smallvec::smallvec![a, b]), Scalar::int(c))).collect();
        ChartMap::new(&src, &tgt, imgs).unwrap()
    })
}

#[test]
fn examples() {
    let r = CoordRing::polynomial(&["z", "w"]);
    let z = LaurentPoly::var(&r, 0);
    let w = LaurentPoly::var(&r, 1);
    let dz = HolForm::dvar(&r, 0);
    let dw = HolForm::dvar(&r, 1);
    assert!(dz.wedge(&dz).unwrap().is_zero());
    let lhs = dz.mul_poly(&z).wedge(&dw.mul_poly(&w)).unwrap();
    assert_eq!(lhs, HolForm::term(z.mul(&w), Gens::from_indices(&[0, 1]).unwrap()));
    assert_eq!(dz.wedge(&dw).unwrap(), dw.wedge(&dz).unwrap().neg());
    assert_eq!(HolForm::from_poly(z.mul(&z)).ext_d(), dz.mul_poly(&z.scale(&Scalar::int(2))));

    let l = CoordRing::laurent(&["z"]);
    let zl = LaurentPoly::var(&l, 0);
    let inv = zl.inverse().unwrap();
    let dzl = HolForm::dvar(&l, 0);
    assert_eq!(HolForm::from_poly(inv.clone()).ext_d(), dzl.mul_poly(&inv.mul(&inv).neg()));

    let rw = CoordRing::polynomial(&["w"]);
    let phi = ChartMap::new(&rw, &l, vec![inv.clone()]).unwrap();
    for n in 0..4 {
        let wn = LaurentPoly::var(&rw, 0).pow(n).unwrap();
        assert_eq!(phi.pullback_poly(&wn).unwrap(), inv.pow(n).unwrap());
    }
    assert_eq!(phi.pullback(&HolForm::dvar(&rw, 0)).unwrap(), dzl.mul_poly(&inv.mul(&inv).neg()));
    let a = HolForm::dvar(&rw, 0).mul_poly(&LaurentPoly::var(&rw, 0));
    assert_eq!(ChartMap::identity(&rw).pullback(&a).unwrap(), a);
}

#[test]
fn negative_exponent_needs_invertible_image() {
    let src = CoordRing::laurent(&["x"]);
    let tgt = CoordRing::polynomial(&["t"]);
    let t = LaurentPoly::var(&tgt, 0);
    let phi = ChartMap::new(&src, &tgt, vec![t.add(&LaurentPoly::one(&tgt))]).unwrap();
    let xinv = LaurentPoly::var(&src, 0).inverse().unwrap();
    assert!(matches!(phi.pullback_poly(&xinv), Err(ChartError::NotInvertible(_))));
}

#[test]
fn wedge_rejects_ring_mismatch() {
    let a = HolForm::dvar(&CoordRing::polynomial(&["z"]), 0);
    let b = HolForm::dvar(&CoordRing::polynomial(&["w"]), 0);
    assert!(a.wedge(&b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_graded_commutative_and_associative(
        a in form_strategy(laurent2(), -2), b in form_strategy(laurent2(), -2), c in form_strategy(laurent2(), -2),
        ka in 0usize..3, kb in 0usize..3,
    ) {
        let (a, b) = (homogeneous(&a, ka), homogeneous(&b, kb));
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert_eq!(ab, if (ka * kb) % 2 == 1 { ba.neg() } else { ba });
        let l = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let r = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn d_squares_to_zero_and_is_a_derivation(a in form_strategy(laurent2(), -2), b in form_strategy(laurent2(), -2), ka in 0usize..3) {
        let a = homogeneous(&a, ka);
        prop_assert!(a.ext_d().ext_d().is_zero());
        let lhs = a.wedge(&b).unwrap().ext_d();
        let rhs = a.ext_d().wedge(&b).unwrap().add(&{
            let x = a.wedge(&b.ext_d()).unwrap();
            if ka % 2 == 1 { x.neg() } else { x }
        });
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_commutes_with_d(a in form_strategy(laurent2(), -2), phi in unit_chart_strategy(laurent2(), laurent2())) {
        prop_assert_eq!(phi.pullback(&a.ext_d()).unwrap(), phi.pullback(&a).unwrap().ext_d());
    }

    #[test]
    fn polynomial_pullback_commutes_with_d(
        a in form_strategy(CoordRing::polynomial(&["x", "y"]), 0),
        p in poly_strategy(CoordRing::polynomial(&["s", "t"]), 0),
        q in poly_strategy(CoordRing::polynomial(&["s", "t"]), 0),
    ) {
        let src = a.ring().clone();
        let phi = ChartMap::new(&src, p.ring(), vec![p.clone(), q.clone()]).unwrap();
        prop_assert_eq!(phi.pullback(&a.ext_d()).unwrap(), phi.pullback(&a).unwrap().ext_d());
    }

    #[test]
    fn pullback_is_multiplicative(a in form_strategy(laurent2(), -2), b in form_strategy(laurent2(), -2), phi in unit_chart_strategy(laurent2(), laurent2())) {
        let lhs = phi.pullback(&a.wedge(&b).unwrap()).unwrap();
        let rhs = phi.pullback(&a).unwrap().wedge(&phi.pullback(&b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_composes(
        a in form_strategy(laurent2(), -2),
        phi in unit_chart_strategy(laurent2(), laurent2()),
        psi in unit_chart_strategy(laurent2(), laurent2()),
    ) {
        let composed = phi.then(&psi).unwrap();
        prop_assert_eq!(composed.pullback(&a).unwrap(), psi.pullback(&phi.pullback(&a).unwrap()).unwrap());
    }
}
