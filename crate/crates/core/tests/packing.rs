use std::collections::HashSet;

use kleinian_core::geom::{interiors_disjoint, is_tangent};
use kleinian_core::packing::{
    count_profile, enumerate_circles_geometric, enumerate_curvatures, fit_growth_exponent, log_spaced, swap,
    CirclesQuadruple, DescartesQuadruple,
};
use proptest::prelude::*;

fn non_backtracking(len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..3, len).prop_flat_map(|steps| {
        (0usize..4).prop_map(move |first| {
            let mut word = vec![first];
            for &s in &steps {
                let last = *word.last().unwrap();
                word.push((last + 1 + s) % 4);
            }
            word
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn descartes_holds_along_words(word in non_backtracking(30)) {
        let mut q = DescartesQuadruple::CLASSICAL;
        for &i in &word {
            q = swap(&q, i).unwrap();
            prop_assert!(q.satisfies_descartes());
        }
    }

    #[test]
    fn swap_is_an_involution(word in non_backtracking(10), i in 0usize..4) {
        let mut q = DescartesQuadruple::CLASSICAL;
        for &j in &word {
            q = swap(&q, j).unwrap();
        }
        prop_assert_eq!(swap(&swap(&q, i).unwrap(), i).unwrap(), q);
    }

    // pruning rests on this: after the first move, curvatures never shrink
    #[test]
    fn replaced_curvature_grows_along_words(word in non_backtracking(20)) {
        let mut q = swap(&DescartesQuadruple::CLASSICAL, word[0]).unwrap();
        for &i in &word[1..] {
            let next = swap(&q, i).unwrap();
            prop_assert!(next.0[i] >= q.0[i]);
            q = next;
        }
    }
}

#[test]
fn swap_examples() {
    let root = DescartesQuadruple::CLASSICAL;
    assert_eq!(swap(&root, 3).unwrap(), root);
    assert_eq!(swap(&root, 0).unwrap(), DescartesQuadruple::new([15, 2, 2, 3]));
    assert_eq!(swap(&root, 1).unwrap(), DescartesQuadruple::new([-1, 6, 2, 3]));
}

#[test]
fn orbit_tree_is_injective_to_depth_eight() {
    let root = CirclesQuadruple::from_descartes(&DescartesQuadruple::CLASSICAL).unwrap().to_integral().unwrap();
    let mut seen: HashSet<_> = root.0.iter().copied().collect();
    let mut frontier = vec![(root, 4usize)];
    for _ in 0..8 {
        let mut next = Vec::new();
        for (q, last) in frontier {
            for i in (0..4).filter(|&i| i != last) {
                let child = q.swap(i).unwrap();
                assert!(seen.insert(child.0[i]), "circle {:?} reached twice", child.0[i]);
                next.push((child, i));
            }
        }
        frontier = next;
    }
    assert_eq!(seen.len(), 4 + 4 * (3usize.pow(8) - 1) / 2);
}

#[test]
fn both_enumerations_agree() {
    let root = DescartesQuadruple::CLASSICAL;
    let circles = CirclesQuadruple::from_descartes(&root).unwrap();
    for t in [1.0, 3.0, 10.0, 100.0, 1000.0, 5000.0] {
        let ks = enumerate_curvatures(&root, t).unwrap();
        let gs: Vec<i64> = enumerate_circles_geometric(&circles, t).unwrap().iter().map(|c| c.curv.round() as i64).collect();
        assert_eq!(ks, gs, "T = {t}");
    }
    assert_eq!(enumerate_curvatures(&root, 3.0).unwrap(), vec![2, 2, 3, 3]);
}

#[test]
fn enumerated_circles_form_a_packing() {
    let root = CirclesQuadruple::from_descartes(&DescartesQuadruple::CLASSICAL).unwrap();
    let cs = enumerate_circles_geometric(&root, 200.0).unwrap();
    let mut tangencies = 0;
    for (i, a) in cs.iter().enumerate() {
        let outer = &root.circles[0];
        assert!(interiors_disjoint(a, outer));
        tangencies += usize::from(is_tangent(a, outer));
        for b in &cs[i + 1..] {
            assert!(interiors_disjoint(a, b), "{a:?} overlaps {b:?}");
            tangencies += usize::from(is_tangent(a, b));
        }
    }
    // each circle beyond the root is born tangent to three earlier ones
    assert!(tangencies >= 3 * (cs.len() - 3));
}

#[test]
fn profile_is_monotone_and_fits_a_planted_exponent() {
    let ts = log_spaced(1.0, 1e4, 30);
    let p = count_profile(&DescartesQuadruple::CLASSICAL, &ts).unwrap();
    assert!(p.counts.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(count_profile(&DescartesQuadruple::CLASSICAL, &[1.0]).unwrap().counts, vec![0]);

    let mut planted = p.clone();
    planted.counts = ts.iter().map(|t| (7.0 * t.powf(1.5)).round() as u64).collect();
    let fit = fit_growth_exponent(&planted, 10.0).unwrap();
    assert!((fit.delta - 1.5).abs() < 0.01, "{fit:?}");

    planted.counts = vec![5; ts.len()];
    assert_eq!(fit_growth_exponent(&planted, 10.0).unwrap().delta, 0.0);
}
