use proptest::prelude::*;

use gridposet::chains::{scd, verify_partition};
use gridposet::extremal::{is_p_free, max_l_chain_free_small, max_p_free, max_p_free_with, pipeline_bound, CapMode, DEFAULT_FREE_BUDGET};
use gridposet::grid::{level_profile, width_grid, GridShape, Subset};
use gridposet::lubell::lubell_mass;
use gridposet::patterns::{
    contains_pattern, extremal_weight, is_strict_permutation_pattern, poset_to_pattern, subset_to_pattern, Pattern,
};
use gridposet::poset::{contains_induced_copy, dimension, make_poset, realizer_valid, width_poset, Order, Poset};
use gridposet::Exec;
use num_bigint::BigUint;
use num_rational::BigRational;

fn small_shape(max_points: usize) -> impl Strategy<Value = GridShape> {
    prop::collection::vec(1usize..=4, 1..=4)
        .prop_filter("point cap", move |s| s.iter().product::<usize>() <= max_points)
        .prop_map(|s| GridShape::new(s).unwrap())
}

fn poset(max_size: usize) -> impl Strategy<Value = Poset> {
    (1..=max_size).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        prop::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
            let chosen: Vec<_> = pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&p, _)| p).collect();
            make_poset(n, &chosen).unwrap()
        })
    })
}

fn pattern(max_side: usize) -> impl Strategy<Value = Pattern> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(r, c)| {
        prop::collection::vec(any::<bool>(), r * c).prop_map(move |cells| {
            let ones = (0..r * c).filter(|&x| cells[x]).map(|x| vec![x / c + 1, x % c + 1]);
            Pattern::new(vec![r, c], ones).unwrap()
        })
    })
}

fn subset_of(shape: GridShape) -> impl Strategy<Value = Subset> {
    let len = shape.len().unwrap();
    prop::collection::vec(any::<bool>(), len)
        .prop_map(move |bits| Subset::from_indices(&shape, (0..len).filter(|&i| bits[i])).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn antichains_are_free_of_any_non_antichain(shape in small_shape(16), p in poset(3)) {
        prop_assume!(!p.relations().is_empty());
        let (best, witness) = max_p_free(&shape, &p).unwrap();
        prop_assert!(BigUint::from(best) >= width_grid(&shape));
        prop_assert!(is_p_free(&witness, &p).unwrap());
        prop_assert_eq!(witness.len(), best);
    }

    #[test]
    fn free_witness_is_maximal(shape in small_shape(12), p in poset(3)) {
        let (_, witness) = max_p_free(&shape, &p).unwrap();
        for x in 0..shape.len().unwrap() {
            if witness.contains(x) {
                continue;
            }
            let mut bigger = witness.clone();
            bigger.insert(x).unwrap();
            prop_assert!(!is_p_free(&bigger, &p).unwrap());
        }
    }

    #[test]
    fn sequential_and_parallel_searches_agree(shape in small_shape(16), p in poset(3)) {
        let a = max_p_free_with(&shape, &p, DEFAULT_FREE_BUDGET, Exec::Sequential).unwrap();
        let b = max_p_free_with(&shape, &p, DEFAULT_FREE_BUDGET, Exec::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pipeline_bounds_the_exact_maximum(k in 2usize..=3, n in 2usize..=3, p in poset(3)) {
        let shape = GridShape::uniform(k, n).unwrap();
        let (d, _) = dimension(&p).unwrap();
        prop_assume!(d <= n);
        let cert = pipeline_bound(&shape, &p, CapMode::ExactSearch).unwrap();
        prop_assert!(cert.verify().ok);
        prop_assert!(max_p_free(&shape, &p).unwrap().0 as u64 <= cert.total);
    }

    #[test]
    fn chain_free_maximum_matches_search(shape in small_shape(12), l in 2usize..=4) {
        let exact = max_l_chain_free_small(&shape, l).unwrap();
        prop_assert_eq!(exact, max_p_free(&shape, &Poset::chain(l).unwrap()).unwrap().0);
    }

    #[test]
    fn width_formula_matches_dilworth(shape in small_shape(64)) {
        prop_assert_eq!(width_grid(&shape), BigUint::from(width_poset(&shape.to_poset().unwrap())));
    }

    #[test]
    fn scd_has_width_many_chains(shape in small_shape(256)) {
        let p = scd(&shape).unwrap();
        prop_assert!(verify_partition(&shape, &p, 1, shape.len().unwrap()).ok());
        prop_assert!(p.chains.iter().all(|c| c.is_saturated(&shape) && c.is_symmetric(&shape)));
        prop_assert_eq!(BigUint::from(p.chains.len()), width_grid(&shape));
    }

    #[test]
    fn mass_is_at_least_size_over_width(s in small_shape(64).prop_flat_map(subset_of)) {
        let w = width_grid(s.shape());
        let mass = lubell_mass(&s).total;
        prop_assert!(BigRational::new(s.len().into(), w.into()) <= mass);
        // each level contributes at most 1
        let levels = level_profile(s.shape()).sizes.len();
        prop_assert!(mass <= BigRational::from_integer(levels.into()));
    }

    #[test]
    fn realizer_patterns_are_strict_permutations(p in poset(5)) {
        let (d, r) = dimension(&p).unwrap();
        prop_assert!(realizer_valid(&p, &r).unwrap());
        prop_assert_eq!(r.order_count(), d);
        prop_assert!(is_strict_permutation_pattern(&poset_to_pattern(&p, &r).unwrap()));
    }

    #[test]
    fn realizer_points_carry_an_induced_copy(p in poset(4)) {
        let (_, r) = dimension(&p).unwrap();
        let d = r.order_count();
        let shape = GridShape::uniform(p.size(), d).unwrap();
        let points = (0..p.size()).map(|e| shape.index_of_digits(&r.orders.iter().map(|o| o[e]).collect::<Vec<_>>()));
        let s = Subset::from_indices(&shape, points).unwrap();
        prop_assert_eq!(s.view().len(), p.size());
        prop_assert!(contains_induced_copy(&s.view(), &p).unwrap().is_some());
        prop_assert!(contains_pattern(&subset_to_pattern(&s), &poset_to_pattern(&p, &r).unwrap()).unwrap().is_some());
    }

    #[test]
    fn containment_is_transitive(a in pattern(4), b in pattern(3), c in pattern(2)) {
        let ab = contains_pattern(&a, &b).unwrap();
        let bc = contains_pattern(&b, &c).unwrap();
        if let Some(w) = &ab {
            prop_assert!(w.is_valid(&a, &b));
        }
        if ab.is_some() && bc.is_some() {
            prop_assert!(contains_pattern(&a, &c).unwrap().is_some());
        }
        prop_assert!(contains_pattern(&a, &a).unwrap().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn extremal_weight_grows_with_m(a in pattern(2)) {
        prop_assume!(a.weight() > 0);
        let mut last = 0;
        for m in 1..=4 {
            let (w, witness) = extremal_weight(m, &a).unwrap();
            prop_assert!(w >= last);
            prop_assert!(contains_pattern(&witness, &a).unwrap().is_none());
            last = w;
        }
    }
}
