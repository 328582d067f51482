use edgewalk::grid::GridPath;
use edgewalk::reflect::*;
use edgewalk::rng;
use proptest::prelude::*;

#[test]
fn environment_partial_sums_by_hand() {
    // delta = site value; position 0, half-width 2.
    let e = env_partial_sums(0, 2, |j| j);
    // E_0 = d0 + 1/2, E_-1 = E_0 + d_-1 + 1/2, E_-2 = E_-1 + d_-2 + 1/2.
    // E_1 = 0, E_2 = -d_1 + 1/2.
    assert_eq!(e, vec![-1.5, 0.0, 0.5, 0.0, -0.5]);
}

#[test]
fn grid_reflection_matches_running_maximum() {
    let free = GridPath::from_fn(0.0, 1.0, 100, |t| (7.0 * t).sin() - t).unwrap();
    let barrier = GridPath::from_fn(0.0, 1.0, 100, |t| -0.5 * t).unwrap();
    let r = skorohod_reflect(&free, &barrier, StartMode::Above).unwrap();
    let (w, f) = (free.values(), barrier.values());
    let t0 = w.iter().zip(f).position(|(a, b)| a <= b).unwrap();
    for k in 0..w.len() {
        let push = if k < t0 { 0.0 } else { (t0..=k).map(|j| f[j] - w[j]).fold(f64::MIN, f64::max) };
        assert!((r.values()[k] - (w[k] + push)).abs() < 1e-12);
        if k >= t0 {
            assert!(r.values()[k] >= f[k] - 1e-12);
        }
    }
}

#[test]
fn zero_barrier_absorption_is_one_half_each_way() {
    // Reflected Brownian value at the midpoint is |B_L|; hitting 0 within
    // L from there has probability E[2 Phi(-|Z|)] = 1/2.
    let f = GridPath::constant(-0.25, 0.25, 2048, 0.0).unwrap();
    let mut g = rng::stream(8, 0);
    let e = absorption_prob_mc(&f, 0.5, 20_000, &mut g).unwrap();
    for (p, se) in [(e.p_minus, e.se_minus), (e.p_plus, e.se_plus)] {
        assert!((p - 0.5).abs() < 4.0 * se + 0.01, "p = {p}");
    }
}

#[test]
fn brownian_grid_has_the_requested_variance() {
    let mut g = rng::stream(1, 0);
    let p = sample_brownian_grid(0.5, -1.0, 1.0, 200_000, Anchor::Node { at: 0.0, value: 3.0 }, &mut g).unwrap();
    assert!((p.eval(0.0) - 3.0).abs() < 1e-12);
    let v = p.values();
    let qv: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    assert!((qv / 2.0 - 0.5).abs() < 0.01, "quadratic variation rate {}", qv / 2.0);
}

fn half_integers(len: usize, m: i64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-m..=m).prop_map(|k| k as f64 / 2.0), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn recursion_equals_max_formula_on_half_integers(
        (steps, barrier) in (1usize..200).prop_flat_map(|n| (half_integers(n, 8), half_integers(n + 1, 10))),
        lift in 0i64..6,
    ) {
        let start = barrier[0] + lift as f64 / 2.0;
        let a = reflect_recursion(start, &steps, &barrier).unwrap();
        let b = reflect_max_formula(start, &steps, &barrier).unwrap();
        prop_assert_eq!(&a, &b);
        for (s, f) in a.iter().zip(&barrier).skip(1) {
            prop_assert!(s >= f);
        }
    }

    #[test]
    fn recursion_equals_max_formula_on_reals(
        (steps, barrier) in (1usize..100).prop_flat_map(|n| (
            proptest::collection::vec(-3.0f64..3.0, n),
            proptest::collection::vec(-5.0f64..5.0, n + 1),
        )),
    ) {
        let a = reflect_recursion(barrier[0], &steps, &barrier).unwrap();
        let b = reflect_max_formula(barrier[0], &steps, &barrier).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn reflection_is_the_minimal_dominating_path(
        (steps, barrier) in (1usize..100).prop_flat_map(|n| (half_integers(n, 6), half_integers(n + 1, 6))),
    ) {
        // Any path with the same increments above the barrier lies above
        // the reflected one once pushed.
        let s = reflect_recursion(barrier[0], &steps, &barrier).unwrap();
        let p = partial_sums(&steps);
        prop_assert_eq!(p.len(), steps.len() + 1);
        let need = (0..p.len()).map(|i| barrier[i] - p[i]).fold(f64::MIN, f64::max);
        let dominating: Vec<f64> = p.iter().map(|x| x + need).collect();
        for (a, b) in s.iter().zip(&dominating) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn length_mismatch_is_rejected(n in 1usize..20, extra in 2usize..4) {
        let steps = vec![0.5; n];
        let barrier = vec![0.0; n + extra];
        prop_assert!(reflect_recursion(0.0, &steps, &barrier).is_err());
    }
}
