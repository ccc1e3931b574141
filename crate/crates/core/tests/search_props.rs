use std::f64::consts::FRAC_PI_2;

use chaingate::hamiltonian::{objective, ControlPoint, CouplingPair};
use chaingate::search::{
    coordinate_descent, coverage_stats_on, grid_points, read_database, run_search, verify_record, write_database,
    SearchConfig,
};
use proptest::prelude::*;

fn config(density: usize) -> SearchConfig {
    SearchConfig {
        couplings: CouplingPair::new(1.0, 0.9).unwrap(),
        density,
        ..SearchConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn descent_never_decreases(e1 in -5.0..5.0f64, e2 in -5.0..5.0f64, e3 in -5.0..5.0f64, tau in 0.5..20.0f64) {
        let cfg = config(2);
        let start = ControlPoint::new(e1, e2, e3, tau);
        let out = coordinate_descent(start, &cfg);
        prop_assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(out.objective >= objective(&start, &cfg.couplings));
        prop_assert!(out.point.tau > 0.0);
        prop_assert!(out.converged);
        let n = out.trace.len();
        prop_assert!(out.trace[n - 1] - out.trace[n - 2] < cfg.conv_tol);
    }

    #[test]
    fn gaps_partition_the_interval(angles in prop::collection::vec(0.0..FRAC_PI_2, 0..50)) {
        let s = coverage_stats_on(&angles, FRAC_PI_2);
        prop_assert_eq!(s.count, angles.len());
        prop_assert!(s.max_gap >= s.mean_gap - 1e-15);
        prop_assert!(s.max_gap <= FRAC_PI_2);
        prop_assert_eq!(s.angle_histogram.iter().sum::<u64>() as usize, angles.len());
        let mut distinct = angles.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup_by(|b, a| (*b - *a).abs() < 1e-6);
        prop_assert!((s.mean_gap * (distinct.len() + 1) as f64 - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn adding_angles_never_widens_gaps(
        base in prop::collection::vec(0.0..FRAC_PI_2, 0..30),
        extra in prop::collection::vec(0.0..FRAC_PI_2, 0..30),
    ) {
        let mut all = base.clone();
        all.extend_from_slice(&extra);
        prop_assert!(coverage_stats_on(&all, FRAC_PI_2).max_gap <= coverage_stats_on(&base, FRAC_PI_2).max_gap);
    }

    #[test]
    fn refinement_contains_coarse_grid(m in 2usize..5, k in 2usize..4) {
        let fine = grid_points(5.0, (m - 1) * k + 1).unwrap();
        for p in grid_points(5.0, m).unwrap() {
            prop_assert!(fine.contains(&p));
        }
    }
}

#[test]
fn every_record_satisfies_its_invariants_and_replays() {
    let cfg = config(5);
    let records = run_search(&cfg).unwrap();
    assert!(!records.is_empty());
    for r in &records {
        assert!(r.objective_value > cfg.obj_threshold);
        assert!(r.class.c1.abs().max(r.class.c2.abs()) <= cfg.angle_tol);
        assert!(r.leakage < 0.0071);
        let report = verify_record(r, &cfg).unwrap();
        assert!(report.passed, "{report:?}");
    }
    assert!(records.windows(2).all(|w| w[0].zz_angle <= w[1].zz_angle));
}

#[test]
fn output_is_independent_of_worker_count() {
    let one = run_search(&SearchConfig { workers: 1, ..config(4) }).unwrap();
    let three = run_search(&SearchConfig { workers: 3, ..config(4) }).unwrap();
    assert_eq!(one, three);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_database(&mut a, &one, &SearchConfig { workers: 1, ..config(4) }).unwrap();
    write_database(&mut b, &three, &SearchConfig { workers: 3, ..config(4) }).unwrap();
    assert_eq!(a, b);
    assert_eq!(read_database(a.as_slice()).unwrap().len(), one.len());
}

#[test]
fn jittered_runs_are_reproducible() {
    let cfg = SearchConfig {
        jitter: 0.2,
        seed: 5,
        ..config(3)
    };
    assert_eq!(run_search(&cfg).unwrap(), run_search(&cfg).unwrap());
}

#[test]
fn tau_penalty_prefers_shorter_relaxations() {
    let start = ControlPoint::new(1.0, -3.0, 5.0, 11.0);
    let plain = coordinate_descent(start, &config(2));
    let penalized = coordinate_descent(
        start,
        &SearchConfig {
            tau_penalty: 0.01,
            ..config(2)
        },
    );
    assert!(penalized.trace.windows(2).all(|w| w[1] >= w[0]));
    assert!(penalized.point.tau <= plain.point.tau + 1e-6);
}

#[test]
fn perturbed_record_fails_replay() {
    let cfg = config(5);
    let records = run_search(&cfg).unwrap();
    let mut bad = records.into_iter().find(|r| r.point.tau > 1.0).expect("a non-trivial record");
    bad.point.tau += 0.1;
    assert!(!verify_record(&bad, &cfg).unwrap().passed);
}
