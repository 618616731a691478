use ivb_core::cochain::{atiyah, power, trace_on_cell};
use ivb_core::mcgen::{random_mc, GenConfig};
use ivb_core::scalar::Scalar;
use ivb_core::simplicial::{cell, face};
use ivb_core::symbolic::*;

const EDGE: &str = r"tr( g_{101} \nabla g_1 -  g_{010} \nabla g_0 +  g_{10} \nabla g_{01})";

const TRIANGLE: &str = r"tr( g_{20} \nabla g_0 \nabla g_{012}+  g_{20} \nabla g _{01}\nabla g_{12}+ g_{20} \nabla g_{012} \nabla g_2   ) 
\\
 &-  tr(g_{201} \nabla g_1 \nabla g_{12} + g_{201}\nabla g_{12}  \nabla g_2 )  
\\
 &-  tr(g_{120} \nabla g_0 \nabla g_{01} +  g_{120}\nabla g_{01}  \nabla g_1 )  
 \\
 &+ tr(g_{2012}\nabla g_2 \nabla g_2 +  g_{1201} \nabla g _1\nabla g_1 +  g_{0120}\nabla g_0 \nabla g_0 )";

#[test]
fn edge_expansion_is_verbatim() {
    let printed = parse_trace_expression(EDGE).unwrap();
    assert_eq!(printed.len(), 3);
    assert_eq!(printed, tuple_terms(&[0, 1], 1));
}

#[test]
fn triangle_expansion_differs_in_one_sign() {
    let printed = parse_trace_expression(TRIANGLE).unwrap();
    let ours = tuple_terms(&[0, 1, 2], 2);
    assert_eq!(printed.len(), 10);
    assert_eq!(ours.len(), 10);
    let printed_words: Vec<_> = printed.0.keys().collect();
    let our_words: Vec<_> = ours.0.keys().collect();
    assert_eq!(printed_words, our_words);
    let d = printed.diff(&ours);
    assert_eq!(d.len(), 1);
    assert_eq!(format!("{:?}", d[0].0), "g_{20} A_{01} A_{12}");
    assert_eq!((d[0].1, d[0].2), (1, -1));
}

#[test]
fn expansion_evaluates_to_the_trace() {
    for seed in 0..8 {
        let n = 1 + (seed as usize) % 3;
        let inst = random_mc(&GenConfig::new(n, n + 1), seed);
        let a = atiyah(&inst.g).unwrap();
        for k in 0..=n {
            let ak = power(&a, k).unwrap();
            for c in ivb_core::cochain::all_cells(n, n) {
                let lhs = expand_trace_power(&c, k).simplified().evaluate(&inst.g, &a);
                let rhs = trace_on_cell(&inst.g, &ak, &c);
                assert_eq!(lhs, rhs, "seed {seed} k {k} cell {c:?}");
            }
        }
    }
}

#[test]
fn printed_triangle_sign_breaks_the_face_condition() {
    let printed = parse_trace_expression(TRIANGLE).unwrap();
    let ours = tuple_terms(&[0, 1, 2], 2);
    let mut broken = 0;
    for seed in 0..10 {
        let mut cfg = GenConfig::new(3, 4);
        cfg.nvars = 3;
        let inst = random_mc(&cfg, seed);
        let a = atiyah(&inst.g).unwrap();
        let top = cell(&[0, 1, 2, 3]);
        let face_sum = |t: &TermSet| {
            let mut acc = ivb_core::forms::HolForm::zero(inst.g.labeling().ring());
            for j in 0..4 {
                let f = face(&top, j).unwrap();
                let phi: Vec<usize> = f.iter().map(|&v| v as usize).collect();
                let v = t.relabel(&phi).evaluate(&inst.g, &a);
                acc.add_scaled(&v, &if j % 2 == 0 { Scalar::ONE } else { -Scalar::ONE });
            }
            acc
        };
        assert!(face_sum(&ours).is_zero());
        if !face_sum(&printed).is_zero() {
            broken += 1;
        }
    }
    assert!(broken > 0);
}
