use ivb_core::cech::*;
use ivb_core::scalar::Scalar;

fn coeff(a: &TwistingCochain) -> Scalar {
    let v = include_twisting(a).unwrap();
    let c = sheaf_chern(&v).unwrap();
    cocycle_check(&c).unwrap();
    p1_class_coefficient(&c).unwrap()
}

#[test]
fn builtins_satisfy_the_twisting_condition() {
    for (name, a) in builtin_twisting() {
        a.check().unwrap_or_else(|e| panic!("{name}: {e}"));
        let v = include_twisting(&a).unwrap();
        v.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(extract_twisting(&v).unwrap(), a, "{name}");
    }
}

#[test]
fn p1_coefficients() {
    for n in -3..=3 {
        assert_eq!(coeff(&p1_line_bundle(n)), Scalar::int(n as i64), "O({n})");
    }
    assert_eq!(coeff(&p1_tangent()), Scalar::int(2));
    assert_eq!(coeff(&p1_skyscraper()), Scalar::ONE);
    assert_eq!(coeff(&p1_cone(-2, 1, 2)), Scalar::int(3));
    assert_eq!(coeff(&p1_trivial(2)), Scalar::ZERO);
    assert_eq!(coeff(&p1_shifted_line(1)), Scalar::int(-1));
}

#[test]
fn coefficient_ignores_connection_choice() {
    for (n, seed) in [(1, 3u64), (-2, 8), (3, 11)] {
        let a = p1_line_bundle(n);
        for i in 0..2 {
            let b = perturb_connection(&a, i, seed).unwrap();
            assert_ne!(b, a);
            assert_eq!(coeff(&b), Scalar::int(n as i64));
        }
    }
}

#[test]
fn ott_components_match() {
    for (name, a) in builtin_twisting() {
        let c = sheaf_chern(&include_twisting(&a).unwrap()).unwrap();
        let r = ott_compare(&a, &c).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
    }
    for seed in 0..4 {
        let a = random_twisting(2, 3, 1, seed);
        a.check().unwrap();
        let c = sheaf_chern(&include_twisting(&a).unwrap()).unwrap();
        cocycle_check(&c).unwrap();
        assert!(ott_compare(&a, &c).unwrap().passed());
    }
}

#[test]
fn three_opens_random() {
    for seed in 0..3 {
        let a = random_twisting(3, 3, 1, seed);
        a.check().unwrap();
        let v = include_twisting(&a).unwrap();
        v.validate().unwrap();
        assert_eq!(extract_twisting(&v).unwrap(), a);
        let c = sheaf_chern(&v).unwrap();
        cocycle_check(&c).unwrap();
    }
}

#[test]
fn homology_reports() {
    let r = homology_sheaf(&include_twisting(&p1_skyscraper()).unwrap()).unwrap();
    assert!(r.exact && r.cohsh && r.edges_ok());
    let r = homology_sheaf(&include_twisting(&p1_split_two_term()).unwrap()).unwrap();
    assert!(!r.cohsh && r.edges_ok());
    let r = homology_sheaf(&include_twisting(&p1_shifted_line(1)).unwrap()).unwrap();
    assert!(!r.cohsh);
}

#[test]
fn coboundary_keeps_cocycle_and_class() {
    use ivb_core::forms::{Gens, HolForm};
    use ivb_core::hodge::UPoly;
    use ivb_core::poly::LaurentPoly;
    use std::collections::BTreeMap;
    let a = p1_line_bundle(2);
    let c = sheaf_chern(&include_twisting(&a).unwrap()).unwrap();
    let cover = c.cover().clone();
    let mut b = BTreeMap::new();
    for i in 0..2u8 {
        let r = cover.ring(&[i]).unwrap();
        let x = LaurentPoly::var(r, 0);
        let w = HolForm::term(x.mul(&x), Gens::single(0));
        b.insert(ivb_core::simplicial::Cell::from(&[i][..]), UPoly::from_form(&w, 1));
    }
    let db = ChernCocycle::coboundary(&cover, 0, &b).unwrap();
    assert!(!db.comps().is_empty());
    let c2 = c.add(&db).unwrap();
    cocycle_check(&c2).unwrap();
    assert_eq!(p1_class_coefficient(&c2).unwrap(), Scalar::int(2));
}

#[test]
fn broken_transition_is_rejected() {
    let mut a = p1_line_bundle(1);
    let h = a.comps()[&ivb_core::simplicial::Cell::from(&[0u8, 1][..])].clone();
    a.set(&[0, 1], h.add(&h)).unwrap();
    assert!(matches!(a.check(), Err(CechError::Twisting(_))));
}

#[test]
fn refinement_of_p1_keeps_the_cocycle() {
    use ivb_core::chart::ChartMap;
    use ivb_core::poly::LaurentPoly;
    use std::collections::BTreeMap;
    let coarse = CoverModel::p1();
    let rw = coarse.ring(&[0]).unwrap().clone();
    let rz = coarse.ring(&[1]).unwrap().clone();
    let rl = coarse.ring(&[0, 1]).unwrap().clone();
    let mut rings = BTreeMap::new();
    rings.insert(vec![0], rw.clone());
    rings.insert(vec![1], rz.clone());
    rings.insert(vec![2], rz.clone());
    rings.insert(vec![1, 2], rz.clone());
    for s in [vec![0, 1], vec![0, 2], vec![0, 1, 2]] {
        rings.insert(s, rl.clone());
    }
    let z = LaurentPoly::var(&rl, 0);
    let w_to = ChartMap::new(&rw, &rl, vec![z.inverse().unwrap()]).unwrap();
    let z_to = ChartMap::new(&rz, &rl, vec![z.clone()]).unwrap();
    let res = vec![
        (vec![0], vec![0, 1], w_to.clone()),
        (vec![1], vec![0, 1], z_to.clone()),
        (vec![0], vec![0, 2], w_to.clone()),
        (vec![2], vec![0, 2], z_to.clone()),
        (vec![1], vec![1, 2], ChartMap::identity(&rz)),
        (vec![2], vec![1, 2], ChartMap::identity(&rz)),
        (vec![0, 1], vec![0, 1, 2], ChartMap::identity(&rl)),
        (vec![0, 2], vec![0, 1, 2], ChartMap::identity(&rl)),
        (vec![1, 2], vec![0, 1, 2], z_to.clone()),
    ];
    let names = vec!["U_w".into(), "U_z".into(), "U_z'".into()];
    let fine = CoverModel::new("P1-refined", names, rings.clone(), res).unwrap();
    fine.check_functoriality().unwrap();
    let charts = rings.iter().map(|(s, r)| (s.clone(), ChartMap::identity(r))).collect();
    let refn = Refinement { fine, coarse: coarse.clone(), map: vec![0, 1, 1], charts };
    refn.check().unwrap();
    let c = sheaf_chern(&include_twisting(&p1_line_bundle(3)).unwrap()).unwrap();
    let pulled = refn.pull_cocycle(&c).unwrap();
    cocycle_check(&pulled).unwrap();
    assert_eq!(pulled.get(&[0, 2]).unwrap(), c.get(&[0, 1]).unwrap());
    Refinement::identity(&coarse).check().unwrap();
}

#[test]
fn single_open_gives_diagonal_data() {
    use std::collections::BTreeMap;
    let a = p1_line_bundle(0);
    let r = a.cover().ring(&[0]).unwrap().clone();
    let cover = CoverModel::new("point", vec!["U".into()], BTreeMap::from([(vec![0], r.clone())]), vec![]).unwrap();
    let t = TwistingCochain::new(&cover, vec![a.bundles()[0].clone()], 2).unwrap();
    t.check().unwrap();
    let v = include_twisting(&t).unwrap();
    for ((tuple, beta), h) in v.comps() {
        assert!(tuple.iter().all(|&i| i == 0));
        assert_eq!(beta.len(), 2);
        assert_eq!(*h, v.bundles()[0].identity());
    }
    v.validate().unwrap();
    assert_eq!(extract_twisting(&v).unwrap(), t);
}

#[test]
fn additivity_over_cones() {
    for (a, b) in [(-1, 0), (-2, 1), (-3, 2), (0, 3)] {
        let cone = coeff(&p1_cone(a, b, 0));
        assert_eq!(cone, coeff(&p1_line_bundle(b)) - coeff(&p1_line_bundle(a)), "cone({a},{b})");
    }
    let v = include_twisting(&p1_skyscraper()).unwrap();
    for e in v.bundles() {
        assert_eq!(euler_char(e), 0);
    }
}

#[test]
fn class_coefficient_reads_only_the_residue() {
    use ivb_core::forms::{Gens, HolForm};
    use ivb_core::hodge::UPoly;
    use ivb_core::poly::{LaurentPoly, Mono};
    let cover = CoverModel::p1();
    let r = cover.ring(&[0, 1]).unwrap().clone();
    for k in [-3i32, -2, 0, 1, 2] {
        let mut c = ChernCocycle::zero(&cover, 1);
        let p = LaurentPoly::monomial(&r, Mono::var(1, 0, k), Scalar::ONE);
        c.set(&[0, 1], UPoly::from_form(&HolForm::term(p, Gens::single(0)), 1));
        assert_eq!(p1_class_coefficient(&c).unwrap(), Scalar::ZERO, "k = {k}");
    }
    let other = ChernCocycle::zero(&CoverModel::interval(), 1);
    assert!(matches!(p1_class_coefficient(&other), Err(CechError::NotP1)));
}

#[test]
fn connections_can_be_forgotten() {
    let a = perturb_connection(&p1_line_bundle(2), 0, 5).unwrap();
    let v = include_twisting(&a).unwrap();
    let f = v.forget_connections();
    f.validate().unwrap();
    assert_eq!(extract_twisting(&f).unwrap(), p1_line_bundle(2));
}

#[test]
fn nerve_classes_match_brute_force() {
    let cover = CoverModel::p1();
    let nerve = build_nerve(&cover, 4);
    for l in 0..=4usize {
        assert_eq!(nerve.levels[l].len(), 2usize.pow(l as u32 + 1));
        let mut brute = std::collections::BTreeMap::new();
        for code in 0..(1u32 << (l + 1)) {
            let t: Vec<u32> = (0..=l).map(|i| (code >> i) & 1).collect();
            let pat: Vec<bool> = t.windows(2).map(|w| w[0] == w[1]).collect();
            *brute.entry(pat).or_insert(0usize) += 1;
        }
        assert_eq!(nerve.classes[l], brute, "level {l}");
    }
    // Each repetition pattern at level 2 is realized by exactly two tuples.
    assert_eq!(nerve.classes[2].len(), 4);
    assert!(nerve.classes[2].values().all(|&c| c == 2));
}
