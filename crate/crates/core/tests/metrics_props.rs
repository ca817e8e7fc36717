mod common;

use pathspace::metrics::{
    modulus, skorokhod_circ_distance, skorokhod_distance, sparse_modulus_w_prime, two_sided_modulus,
    uniform_distance,
};
use pathspace::{Path, StepPath};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn two(seed: u64, jumps: usize) -> (StepPath, StepPath) {
    let mut r = common::rng(seed);
    (common::random_step(&mut r, jumps), common::random_step(&mut r, jumps))
}

fn oscillation(x: &StepPath) -> f64 {
    let v = x.values();
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_matches_alignment_oracle(seed in any::<u64>(), near in any::<bool>()) {
        let (x, mut y) = two(seed, 3);
        if near {
            y = common::perturbed_step(&mut common::rng(seed ^ 1), &x);
        }
        let d = skorokhod_distance(&x, &y, TOL).unwrap().value;
        let o = common::skorokhod_oracle(&x, &y, 1e-3);
        prop_assert!((d - o).abs() <= 1e-3_f64.max(TOL), "dp {d} vs oracle {o}");
    }

    #[test]
    fn below_uniform_and_symmetric(seed in any::<u64>()) {
        let (x, y) = two(seed, 6);
        let d = skorokhod_distance(&x, &y, TOL).unwrap();
        let back = skorokhod_distance(&y, &x, TOL).unwrap();
        let u = uniform_distance(&x.clone().into(), &y.clone().into()).unwrap();
        prop_assert!(d.value <= u + TOL);
        prop_assert!((d.value - back.value).abs() <= 2.0 * TOL);
        prop_assert!(d.lower_bound <= d.value && d.value <= d.upper_bound);
        prop_assert_eq!(skorokhod_distance(&x, &x, TOL).unwrap().value, 0.0);
    }

    #[test]
    fn witness_attains_value(seed in any::<u64>()) {
        let (x, y) = two(seed, 5);
        let r = skorokhod_distance(&x, &y, TOL).unwrap();
        if let Some(l) = r.witness {
            let moved = l.compose(&y.clone().into()).unwrap();
            let cost = l.sup_displacement().max(uniform_distance(&x.clone().into(), &moved).unwrap());
            prop_assert!(cost <= r.value + 1e-6, "witness {cost} vs {}", r.value);
        }
    }

    #[test]
    fn circ_bounds_bracket(seed in any::<u64>()) {
        let (x, y) = two(seed, 4);
        let c = skorokhod_circ_distance(&x, &y, TOL).unwrap();
        prop_assert!(c.lower_bound <= c.upper_bound + TOL);
        prop_assert!(c.value >= c.lower_bound - TOL && c.value <= c.upper_bound + TOL);
    }

    #[test]
    fn single_jump_two_sided_zero(k in 1u32..100, a in -3.0f64..3.0, b in -3.0f64..3.0, delta in 0.001f64..0.999) {
        let x: Path = StepPath::new(vec![0.0, k as f64 / 100.0], vec![a, b], 1.0).unwrap().into();
        prop_assert_eq!(two_sided_modulus(&x, delta, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn w_prime_monotone_and_bounded(seed in any::<u64>(), d1 in 0.001f64..0.5, d2 in 0.001f64..0.5) {
        let mut r = common::rng(seed);
        let x = common::random_step(&mut r, 8);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let p: Path = x.clone().into();
        let a = sparse_modulus_w_prime(&p, lo, 1e-3).unwrap();
        let b = sparse_modulus_w_prime(&p, hi, 1e-3).unwrap();
        prop_assert!(a <= b);
        prop_assert!(b <= oscillation(&x));
        prop_assert!(modulus(&p, lo).unwrap() <= modulus(&p, hi).unwrap());
    }

    #[test]
    fn modulus_bounded_by_oscillation(seed in any::<u64>(), delta in 0.001f64..2.0) {
        let mut r = common::rng(seed);
        let x = common::random_step(&mut r, 8);
        let w = modulus(&x.clone().into(), delta).unwrap();
        prop_assert!(w <= oscillation(&x));
        if delta >= 1.0 {
            prop_assert_eq!(w, oscillation(&x));
        }
    }
}
