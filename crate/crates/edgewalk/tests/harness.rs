use edgewalk::harness::*;

fn small_reports(seed: u64) -> Vec<ExperimentReport> {
    vec![
        reflection_equivalence(&ReflectionParams { instances: 200, len: 100 }, seed).unwrap(),
        coupling_sandwich(&SandwichParams { chains: 4, steps_per_chain: 2000 }, seed).unwrap(),
        uniform_limit_ks(
            &UniformParams {
                n: 400,
                reps: 500,
                ..Default::default()
            },
            seed,
        )
        .unwrap(),
        ledger_identities(
            &LedgerParams {
                runs: 200,
                max_prefix: 500,
                max_eps_n: 8,
            },
            seed,
        )
        .unwrap(),
    ]
}

#[test]
fn reports_round_trip_through_json() {
    for r in small_reports(3) {
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.schema_version, SCHEMA_VERSION);
        assert_eq!(back.master_seed, 3);
    }
}

#[test]
fn csv_has_one_row_per_entry() {
    let reports = small_reports(3);
    let csv = reports_to_csv(&reports);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "experiment,section,key,value,reps,rule,passed");
    let rows: usize = reports.iter().map(|r| r.summary.len() + r.criteria.len()).sum();
    assert!(lines.count() >= rows);
}

#[test]
fn exact_checks_pass_on_small_runs() {
    for r in small_reports(5) {
        if r.experiment != "uniform_limit" {
            assert!(r.passed(), "{}", r.to_json());
        }
    }
}

#[test]
fn results_depend_only_on_the_seed() {
    let a = small_reports(9);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| small_reports(9));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| small_reports(9));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_ne!(a[2].summary, small_reports(10)[2].summary);
}

#[test]
fn replication_streams_are_recorded() {
    let r = &small_reports(1)[0];
    assert_eq!(r.replication_streams.len(), 200);
    assert_eq!(r.replication_streams[7], stream_id(streams::REFLECTION, 0, 7));
}

#[test]
fn configuration_errors_name_the_key() {
    let e = uniform_limit_ks(
        &UniformParams {
            reps: 10,
            ..Default::default()
        },
        0,
    )
    .unwrap_err();
    assert!(matches!(e, edgewalk::Error::Config { ref key, .. } if key == "reps"));
    let e = reflection_equivalence(&ReflectionParams { instances: 0, len: 5 }, 0).unwrap_err();
    assert!(matches!(e, edgewalk::Error::Config { ref key, .. } if key == "reps"));
}

#[test]
fn anchored_trajectory_is_reproducible() {
    let cfg = edgewalk::walk_core::SimConfig::at_scale(300);
    let w = edgewalk::walk_core::WeightFunction::default();
    let a = anchored_trajectory(&cfg, 3, &w).unwrap();
    assert_eq!(a, anchored_trajectory(&cfg, 3, &w).unwrap());
    assert_eq!(a.legs(), 3);
}
