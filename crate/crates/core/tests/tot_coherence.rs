use ivb_core::cech::*;
use ivb_core::simplicial::{GridMode, GridPath};
use ivb_core::tot::*;

fn rows(k: usize, l: usize, a: &[usize], b: &[usize]) -> GridPath {
    GridPath::from_rows(k, l, a, b, GridMode::Supported).unwrap()
}

#[test]
fn genuine_two_simplex_validates() {
    let t = random_pattern_simplex(2, 2, 1, 2, 5);
    let r = t.validate_ivb_simplex();
    assert!(r.passed(), "{:?}", r.failures);
    for a in 0..=2 {
        let v = t.vertex_face(a).unwrap();
        assert!(v.validate_ivb_simplex().passed());
        v.to_vertex().unwrap().validate().unwrap();
    }
}

#[test]
fn grid_relation_on_all_equal_cover() {
    let t = random_pattern_simplex(2, 2, 1, 2, 9);
    let full = t.materialize(1).unwrap();
    full.validate_coherence().unwrap();
    let hi = rows(2, 1, &[0, 1, 2], &[1, 1, 1]);
    let lo = rows(2, 0, &[0, 1, 2], &[0, 0, 0]);
    let mut nonzero = 0;
    for i0 in 0..2u8 {
        for i1 in 0..2u8 {
            let x = full.resolve(1, &hi, &[i0, i1]).unwrap();
            let y = full.resolve(0, &lo, &[i1]).unwrap();
            assert_eq!(x, y);
            nonzero += x.is_some() as usize;
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn grid_relation_with_nontrivial_restriction() {
    let v = include_twisting(&p1_cone(-2, 1, 2)).unwrap();
    let t = TotSimplex::constant(&v, 2).unwrap();
    assert!(t.validate_ivb_simplex().passed());
    let full = t.materialize(1).unwrap();
    full.validate_coherence().unwrap();
    let phi = v.cover().restriction(&[1], &[0, 1]).unwrap();
    let e1 = v.bundles()[1].pullback(&phi).unwrap();
    let pt = |a| GridPath::from_rows(2, 1, &[a], &[1], GridMode::Supported).unwrap();
    assert_eq!(full.resolve(1, &pt(2), &[0, 1]).unwrap(), Some(Payload::Bundle(e1)));
    let hi = rows(2, 1, &[0, 1], &[1, 1]);
    assert!(matches!(full.resolve(1, &hi, &[0, 1]).unwrap(), Some(Payload::Map(_))));
}

#[test]
fn injected_violations_are_detected() {
    let t = random_pattern_simplex(2, 2, 1, 2, 3).materialize(1).unwrap();
    let (n, d) = violation_trials(&t, 100, 17);
    assert_eq!((n, d), (100, 100));
    let c = sheaf_chern(&include_twisting(&p1_line_bundle(2)).unwrap()).unwrap();
    let o = TotSimplex::from_chern_cocycle(&c).unwrap().materialize(2).unwrap();
    let (n, d) = violation_trials(&o, 100, 4);
    assert_eq!((n, d), (100, 100));
}

#[test]
fn figure_inventory() {
    let one: Vec<String> = monotone_inventory(2, 1, 1).iter().map(|p| format!("{p:?}")).collect();
    assert_eq!(one.len(), 12);
    for s in ["[0 1; 0 0]", "[1 2; 0 0]", "[0 0; 0 1]", "[2 2; 0 1]", "[0 2; 1 1]", "[1 2; 0 1]",
              "[1 1; 0 1]", "[0 1; 0 1]", "[0 1; 1 1]", "[1 2; 1 1]", "[0 2; 0 1]", "[0 2; 0 0]"] {
        assert!(one.contains(&s.to_string()), "{s}");
    }
    let two: Vec<String> = monotone_inventory(2, 1, 2).iter().map(|p| format!("{p:?}")).collect();
    for s in ["[0 1 2; 0 0 0]", "[0 0 2; 0 1 1]", "[0 2 2; 0 0 1]", "[1 2 2; 0 0 1]",
              "[1 1 2; 0 1 1]", "[0 0 1; 0 1 1]", "[0 1 1; 0 0 1]", "[0 1 2; 1 1 1]"] {
        assert!(two.contains(&s.to_string()), "{s}");
    }
}

#[test]
fn omega_data_matches_cocycle_check() {
    for (name, a) in builtin_twisting() {
        let c = sheaf_chern(&include_twisting(&a).unwrap()).unwrap();
        let o = TotSimplex::from_chern_cocycle(&c).unwrap();
        assert!(o.validate_omega().passed(), "{name}");
        assert_eq!(o.to_chern_cocycle().unwrap(), c);
    }
    let c = sheaf_chern(&include_twisting(&p1_line_bundle(1)).unwrap()).unwrap();
    let mut bad = c.clone();
    let w = c.get(&[0, 1]).unwrap();
    bad.set(&[0, 1], w.add(&w));
    assert!(!TotSimplex::from_chern_cocycle(&bad).unwrap().validate_omega().passed());
    assert!(cocycle_check(&bad).is_err());
}

#[test]
fn stored_restriction_must_match() {
    let t = random_pattern_simplex(2, 1, 1, 2, 2);
    let mut full = t.materialize(1).unwrap();
    let key = full.entries().keys().find(|k| k.l == 1 && k.path.dim() == 1 && k.path.beta().iter().all(|&b| b == 1)).unwrap().clone();
    let Payload::Map(h) = full.entries()[&key].clone() else { panic!() };
    full.remove(&key);
    full.insert(key.l, key.path.clone(), &key.tuple, Payload::Map(h.add(&h))).unwrap();
    assert!(!full.validate_ivb_simplex().passed());
}
