use std::collections::HashMap;

use edgewalk::harness::stats::chi_square;
use edgewalk::rng;
use edgewalk::walk_core::*;
use proptest::prelude::*;

/// Law of `X_t` from a zero environment by enumerating all `2^t` paths,
/// with the local times kept in a map and the step probability taken
/// straight from `w(d) / (w(d) + w(-d))`.
fn exact_position_law(t: u32, w: impl Fn(i64) -> f64) -> HashMap<i64, f64> {
    let mut law = HashMap::new();
    for bits in 0u32..(1 << t) {
        let mut delta: HashMap<i64, i64> = HashMap::new();
        let (mut x, mut p) = (0i64, 1.0f64);
        for s in 0..t {
            let d = *delta.get(&x).unwrap_or(&0);
            let right = w(d) / (w(d) + w(-d));
            if bits >> s & 1 == 1 {
                p *= right;
                *delta.entry(x).or_default() -= 1;
                x += 1;
            } else {
                p *= 1.0 - right;
                *delta.entry(x).or_default() += 1;
                x -= 1;
            }
        }
        *law.entry(x).or_default() += p;
    }
    law
}

#[test]
fn short_time_position_law_matches_exhaustive_enumeration() {
    const T: u32 = 10;
    const SAMPLES: u64 = 200_000;
    for beta in [0.5, 1.0, 2.0] {
        let exact = exact_position_law(T, |k| (beta * k as f64).exp());
        let total: f64 = exact.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let table = WeightFunction::exponential(beta).unwrap().transition_table();
        let mut g = rng::stream(11, beta.to_bits());
        let mut counts: HashMap<i64, u64> = HashMap::new();
        for _ in 0..SAMPLES {
            let mut l = WalkLedger::new();
            l.advance(u64::from(T), &table, &mut g);
            *counts.entry(l.position()).or_default() += 1;
        }
        let mut sites: Vec<i64> = exact.keys().copied().filter(|k| exact[k] * SAMPLES as f64 >= 5.0).collect();
        sites.sort_unstable();
        let observed: Vec<u64> = sites.iter().map(|s| counts.get(s).copied().unwrap_or(0)).collect();
        let expected: Vec<f64> = sites.iter().map(|s| exact[s] * SAMPLES as f64).collect();
        let scale: f64 = observed.iter().sum::<u64>() as f64 / expected.iter().sum::<f64>();
        let expected: Vec<f64> = expected.iter().map(|e| e * scale).collect();
        let (_, p) = chi_square(&observed, &expected, 0).unwrap();
        assert!(p > 1e-4, "beta = {beta}: chi-square p = {p}");
    }
}

#[test]
fn step_probability_is_the_weight_ratio() {
    let step = WeightFunction::step(0, 1.0, 3.0).unwrap();
    assert_eq!(step.p_right(0), 0.5);
    assert!((step.p_right(2) - 0.75).abs() < 1e-15);
    assert!((step.p_right(-2) - 0.25).abs() < 1e-15);
}

#[test]
fn anchored_schedule_has_unit_increments() {
    let cfg = SimConfig::at_scale(500);
    let table = WeightFunction::default().transition_table();
    let mut g = rng::stream(3, 0);
    let mut l = WalkLedger::new();
    l.run_until_edge_count(cfg.anchor_level(), 0, EdgeDir::Minus, &table, &mut g, cfg.step_cap())
        .unwrap();
    assert_eq!(l.ell_minus(0), 500);
    let rec = mesoscopic_schedule(&mut l, &table, &mut g, cfg.eps_n(), 6, cfg.step_cap()).unwrap();
    rec.check().unwrap();
    for w in rec.sites.windows(2) {
        assert_eq!((w[1] - w[0]).abs(), cfg.eps_n());
    }
    let z = rec.z_values();
    assert!(z.windows(2).all(|w| (w[1] - w[0]).abs() == 1));
    assert!(rec.to_csv().starts_with("k,T_k,X_T_k,Z_k\n"));
    l.check_invariants().unwrap();
}

#[test]
fn leg_from_anchor_satisfies_chain_recursion() {
    let table = WeightFunction::default().transition_table();
    for seed in 0..20 {
        let mut g = rng::stream(seed, 1);
        let mut l = WalkLedger::new();
        l.run_until_edge_count(200, 0, EdgeDir::Minus, &table, &mut g, 1 << 30).unwrap();
        let side = if seed % 2 == 0 { Side::Plus } else { Side::Minus };
        let leg = capture_leg(&mut l, &table, &mut g, 10, side, 1 << 30).unwrap();
        leg.check_recursion().unwrap();
        leg.check_chain_bookkeeping().unwrap();
    }
}

#[test]
fn overrun_leaves_a_consistent_ledger() {
    let table = WeightFunction::default().transition_table();
    let mut g = rng::stream(0, 0);
    let mut l = WalkLedger::new();
    let e = l.run_until_exit(-1_000_000, 1_000_000, &table, &mut g, 500).unwrap_err();
    assert!(matches!(e, edgewalk::Error::Overrun { cap: 500, time: 500, .. }));
    assert_eq!(l.time(), 500);
    l.check_invariants().unwrap();
}

fn weight_strategy() -> impl Strategy<Value = WeightFunction> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|b| WeightFunction::exponential(b).unwrap()),
        (-2i64..=2, 1.0f64..2.0, 2.5f64..6.0).prop_map(|(t, lo, hi)| WeightFunction::step(t, lo, hi).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ledger_counts_match_a_recount_of_the_path(seed in any::<u64>(), steps in 0u64..3000, w in weight_strategy()) {
        let table = w.transition_table();
        let mut g = rng::stream(seed, 0);
        let mut l = WalkLedger::new();
        l.enable_log(steps as usize + 1);
        l.advance(steps, &table, &mut g);
        prop_assert!(l.check_invariants().is_ok());
        let log: Vec<i64> = l.log().unwrap().iter().map(|(_, x)| x).collect();
        prop_assert_eq!(log.len() as u64, steps + 1);
        let mut plus: HashMap<i64, u64> = HashMap::new();
        let mut minus: HashMap<i64, u64> = HashMap::new();
        for p in log.windows(2) {
            prop_assert_eq!((p[1] - p[0]).abs(), 1);
            if p[1] > p[0] { *plus.entry(p[0]).or_default() += 1 } else { *minus.entry(p[0]).or_default() += 1 }
        }
        let (lo, hi) = l.visited_range();
        prop_assert_eq!(lo, *log.iter().min().unwrap());
        prop_assert_eq!(hi, *log.iter().max().unwrap());
        for i in lo - 1..=hi + 1 {
            prop_assert_eq!(l.ell_plus(i), plus.get(&i).copied().unwrap_or(0));
            prop_assert_eq!(l.ell_minus(i), minus.get(&i).copied().unwrap_or(0));
            prop_assert!((l.ell_minus(i + 1) as i64 - l.ell_plus(i) as i64).abs() <= 1);
            prop_assert_eq!(l.delta(i), l.ell_minus(i) as i64 - l.ell_plus(i) as i64);
        }
    }

    #[test]
    fn random_environment_keeps_the_imbalance_identity(seed in any::<u64>(), steps in 0u64..3000) {
        let w = WeightFunction::default();
        let laws = std::sync::Arc::new(edgewalk::chains::InvariantLaws::new(&w, edgewalk::chains::DEFAULT_TAIL_EPS).unwrap());
        let table = w.transition_table();
        let mut g = rng::stream(seed, 1);
        let mut l = WalkLedger::with_random_environment(laws.clone(), seed);
        let before: Vec<i64> = (-300..=300).map(|i| l.base(i)).collect();
        l.advance(steps, &table, &mut g);
        prop_assert!(l.check_invariants().is_ok());
        for (k, i) in (-300i64..=300).enumerate() {
            prop_assert_eq!(l.base(i), before[k]);
            prop_assert_eq!(l.delta(i), before[k] + l.ell_minus(i) as i64 - l.ell_plus(i) as i64);
        }
        // The environment depends on the seed alone.
        let fresh = WalkLedger::with_random_environment(laws, seed);
        prop_assert!((-300..=300).all(|i| fresh.base(i) == l.base(i)));
    }

    #[test]
    fn exponential_step_probability(beta in 0.05f64..4.0, d in -40i64..=40) {
        let w = WeightFunction::exponential(beta).unwrap();
        let (a, b) = ((beta * d as f64).exp(), (-beta * d as f64).exp());
        prop_assert!((w.p_right(d) - a / (a + b)).abs() < 1e-12);
        prop_assert!((w.p_right(d) + w.p_right(-d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_scale_is_the_integer_two_thirds_power(big_n in 1u64..10_000_000) {
        let n = u128::from(phi(big_n));
        let n2 = u128::from(big_n) * u128::from(big_n);
        prop_assert!(n * n * n <= n2);
        prop_assert!((n + 1) * (n + 1) * (n + 1) > n2);
        let mut c = SimConfig::at_scale(big_n.max(64));
        prop_assert!(c.validate().is_ok());
        c.n = phi(c.big_n) + 1;
        prop_assert!(c.validate().is_err());
    }

    #[test]
    fn replays_are_bit_identical(seed in any::<u64>(), steps in 0u64..2000) {
        let table = WeightFunction::default().transition_table();
        let run = || {
            let mut g = rng::stream(seed, 5);
            let mut l = WalkLedger::new();
            l.advance(steps, &table, &mut g);
            (l.position(), l.visited_range(), (-50..=50).map(|i| l.delta(i)).collect::<Vec<_>>())
        };
        prop_assert_eq!(run(), run());
    }
}
