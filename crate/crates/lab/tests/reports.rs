//! Claim reports on synthetic datasets whose answers are known.

use std::collections::BTreeMap;

use pivotal_lab::plan::Cell;
use pivotal_lab::record::Row;
use pivotal_lab::run::Manifest;
use pivotal_lab::{report, Claim, Dataset, Experiment, ExperimentKind, Plan, Thresholds, Verdict};

fn dataset(e: Experiment, mut fill: impl FnMut(&mut Row, Cell, u32)) -> Dataset {
    let plan = Plan { master_seed: 1, workers: None, output: None, experiments: vec![e.clone()] };
    let digest = plan.digest();
    let mut rows = Vec::new();
    for (ci, cell) in e.cells().into_iter().enumerate() {
        for t in 0..e.trials {
            let mut r = Row::new(&digest, &e, ci as u32, cell, t);
            fill(&mut r, cell, t);
            rows.push(r);
        }
    }
    let manifest = Manifest {
        version: pivotal_lab::VERSION.into(),
        plan_digest: digest,
        master_seed: 1,
        p_c_triangular: 0.5,
        p_c_square_site: 0.592746,
        started_unix: 0,
        finished_unix: 0,
        workers: 1,
        complete: true,
        rows_total: rows.len() as u64,
        rows_per_experiment: BTreeMap::new(),
    };
    Dataset { plan, manifest, rows, foreign_rows: 0 }
}

fn min_height_experiment(trials: u32) -> Experiment {
    let mut e = Experiment::new("thm", ExperimentKind::MinHeight);
    e.n = vec![64, 128, 256];
    e.m = vec![2, 4, 8, 16, 32];
    e.trials = trials;
    e
}

#[test]
fn linear_in_m_over_n_passes_min_height_check() {
    // M_t = floor(2n t / T) puts exactly m T / (2n) trials below m,
    // so P(M < m) = m / (2n).
    let ds = dataset(min_height_experiment(1024), |r, cell, t| {
        r.crossing = Some(true);
        r.min_height = Some(2 * cell.n * t / 1024);
    });
    let rep = report(&ds, Claim::MinHeight, &Thresholds::default(), None).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{}", rep.to_text());
    let slopes: Vec<f64> = rep.checks.iter().filter(|c| c.name.starts_with("slope")).map(|c| c.value).collect();
    assert_eq!(slopes.len(), 3);
    assert!(slopes.iter().all(|s| (s - 1.0).abs() < 1e-9), "{slopes:?}");
    let band = rep.checks.iter().find(|c| c.name.starts_with("band")).unwrap();
    assert!((band.value - 1.0).abs() < 1e-9);
}

#[test]
fn quadratic_in_m_fails_min_height_check() {
    // P(M < m) ∝ m²: count below m is m² T / (4 n²)
    let ds = dataset(min_height_experiment(4096), |r, cell, t| {
        let n = cell.n as f64;
        r.crossing = Some(true);
        r.min_height = Some((2.0 * n * (t as f64 / 4096.0).sqrt()) as u32);
    });
    let rep = report(&ds, Claim::MinHeight, &Thresholds::default(), None).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail, "{}", rep.to_text());
}

#[test]
fn all_zero_cells_are_inconclusive() {
    let ds = dataset(min_height_experiment(500), |r, cell, _| {
        r.crossing = Some(false);
        r.min_height = Some(2 * cell.n);
    });
    let rep = report(&ds, Claim::MinHeight, &Thresholds::default(), None).unwrap();
    assert_eq!(rep.verdict, Verdict::Inconclusive("zero cells".into()));
    assert!(rep.to_text().contains("inconclusive: zero cells"));
}

#[test]
fn horseshoe_exponents_recovered() {
    let mut e = Experiment::new("shoe", ExperimentKind::Horseshoe);
    e.rho = vec![2];
    e.nu = vec![4, 5, 6, 7];
    e.trials = 1 << 16;
    // P(J2) = r^{-1}, P(J3) = r^{-2} with r = 2^{nu - rho}, realised exactly
    let ds = dataset(e, |r, cell, t| {
        let d = cell.nu - cell.rho;
        r.j2 = Some(t % (1 << d) == 0);
        r.j3 = Some(t % (1 << (2 * d)) == 0);
    });
    let rep = report(&ds, Claim::ArmExponents, &Thresholds::default(), None).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{}", rep.to_text());
    let exps: Vec<f64> = rep.checks.iter().map(|c| c.value).collect();
    assert!((exps[0] - 1.0).abs() < 1e-9 && (exps[1] - 2.0).abs() < 1e-9, "{exps:?}");

    // exponent 3/2 for kappa = 3 is outside its band
    let mut e = Experiment::new("shoe", ExperimentKind::Horseshoe);
    e.rho = vec![2];
    e.nu = vec![4, 6, 8];
    e.trials = 1 << 16;
    let ds = dataset(e, |r, cell, t| {
        let d = cell.nu - cell.rho;
        r.j2 = Some(t % (1 << d) == 0);
        r.j3 = Some(t % (1 << (3 * d / 2)) == 0);
    });
    let rep = report(&ds, Claim::ArmExponents, &Thresholds::default(), None).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail, "{}", rep.to_text());
}

#[test]
fn claims_without_matching_experiment_are_errors() {
    let ds = dataset(min_height_experiment(10), |r, _, _| r.min_height = Some(0));
    assert!(report(&ds, Claim::SectorDecay, &Thresholds::default(), None).is_err());
    assert!(report(&ds, Claim::MinHeight, &Thresholds::default(), Some("other")).is_err());
}
