//! Parallel execution of plans.
//!
//! Every trial is a pure function of `(plan, experiment, cell, trial)`, so
//! the work list can be split across any number of threads and resumed from
//! any subset of finished trials. Rows are written in canonical order
//! (plan order of experiments, then cell, then trial), which makes the
//! output files independent of scheduling.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use pivotal_core::armevents::{horseshoe_event, sector_event, ArmPattern, StartArcs};
use pivotal_core::features::{
    exploration_walk, lowest_crossing, lowest_site_height_of_highest_crossing, pivotal_sites,
};
use pivotal_core::lattice::{Aperture, BoxRegion, HorseshoeSpec, SectorRegion};
use pivotal_core::rng::TrialKey;
use pivotal_core::sampling::{sample, MemoConfiguration, SQUARE_SITE_PC};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plan::{ArcMode, Cell, Experiment, ExperimentKind, Plan};
use crate::record::{cell_records, CellTotals, Row, CELL_CSV_HEADER, CSV_HEADER};

pub const ROWS_JSONL: &str = "rows.jsonl";
pub const ROWS_CSV: &str = "rows.csv";
pub const CELLS_CSV: &str = "cells.csv";
pub const MANIFEST: &str = "manifest.json";
pub const PLAN_COPY: &str = "plan.txt";
pub const PARTIAL: &str = "rows.partial.jsonl";

/// Environment variable giving the default worker count.
pub const WORKERS_ENV: &str = "PIVOTAL_WORKERS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the plan and the environment.
    pub workers: Option<usize>,
    /// Keep finished trials of an earlier run with the same plan digest.
    pub resume: bool,
    /// Stop after this many new trials (used to exercise resumption).
    pub max_new_trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub plan_digest: String,
    pub master_seed: u64,
    pub p_c_triangular: f64,
    pub p_c_square_site: f64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub workers: usize,
    pub complete: bool,
    pub rows_total: u64,
    pub rows_per_experiment: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub new_trials: usize,
    pub reused_trials: usize,
}

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Computes the row of one trial.
pub fn run_trial(plan: &Plan, digest: &str, e: &Experiment, cell_index: u32, cell: Cell, trial: u32) -> Row {
    let mut row = Row::new(digest, e, cell_index, cell, trial);
    let key = TrialKey::new(plan.master_seed, e.experiment_id(), row.trial_index);
    let p = e.p_open();
    let expect = "plan validated";
    match e.kind {
        k if k.is_pivotal() => {
            let c = sample(e.lattice, BoxRegion::centered(cell.n), p, key).expect(expect);
            let rep = pivotal_sites(&c);
            row.crossing = Some(rep.crossing);
            row.min_height = Some(rep.min_height);
            row.pivotal_count = Some(rep.pivotal_sites.len() as u32);
            if e.m.iter().all(|&m| m <= cell.n) {
                row.block_counts = Some(e.m.iter().map(|&m| rep.block_indicator_count(m).expect(expect)).collect());
            }
            row.strip_counts = Some(e.m.iter().map(|&m| rep.strip_pivotal_count(m)).collect());
        }
        ExperimentKind::SizeMoments => {
            let c = sample(e.lattice, BoxRegion::centered(cell.n), p, key).expect(expect);
            let rep = pivotal_sites(&c);
            row.crossing = Some(rep.crossing);
            row.pivotal_count = Some(rep.pivotal_sites.len() as u32);
            row.lowest_len = Some(lowest_crossing(&c).map_or(0, |l| l.len() as u32));
            row.pioneer_count = Some(exploration_walk(&c).expect(expect).pioneers.len() as u32);
        }
        ExperimentKind::Stationarity => {
            let c = sample(e.lattice, BoxRegion::centered(cell.n), p, key).expect(expect);
            row.h = lowest_site_height_of_highest_crossing(&c);
            row.crossing = Some(row.h.is_some());
        }
        ExperimentKind::Horseshoe => {
            let spec = HorseshoeSpec::dyadic(cell.rho, cell.nu).expect(expect);
            let c = MemoConfiguration::new(e.lattice, spec.outer_box(), p, key).expect(expect);
            let arcs = match e.arcs {
                ArcMode::Default => StartArcs::Default,
                ArcMode::Whole => StartArcs::WholeBoundary,
            };
            for kappa in &e.kappa {
                let pattern = if *kappa == 2 { ArmPattern::two_arm() } else { ArmPattern::three_arm() };
                let pattern = pattern.with_arcs(arcs.clone()).expect(expect);
                let hit = horseshoe_event(&c, &spec, &pattern).expect(expect).occurred;
                if *kappa == 2 {
                    row.j2 = Some(hit);
                } else {
                    row.j3 = Some(hit);
                }
            }
        }
        ExperimentKind::SectorPair => {
            let q = SectorRegion::new(Aperture::QuarterPlane, cell.l, cell.n).expect(expect);
            let h = SectorRegion::new(Aperture::HalfPlane, cell.l, cell.n).expect(expect);
            let c = MemoConfiguration::new(e.lattice, q.bounding_box(), p, key).expect(expect);
            row.quarter = Some(sector_event(&c, &q).expect(expect).occurred);
            row.half = Some(sector_event(&c, &h).expect(expect).occurred);
        }
        _ => unreachable!(),
    }
    row
}

fn read_rows(path: &Path, digest: &str, out: &mut Vec<Row>) -> Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let f = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    for line in f.lines() {
        let line = line?;
        // a torn final line from an interrupted run is simply redone
        if let Ok(row) = serde_json::from_str::<Row>(&line) {
            if row.plan == digest {
                out.push(row);
            }
        }
    }
    Ok(())
}

fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
    body(&mut w)?;
    w.flush()?;
    drop(w);
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn run_plan(plan: &Plan, out_dir: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let errors = plan.validation_errors();
    anyhow::ensure!(errors.is_empty(), "invalid plan:\n{}", errors.join("\n"));
    let started = now();
    let digest = plan.digest();
    let workers = opts.workers.or(plan.workers).unwrap_or_else(default_workers).max(1);
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut rows = Vec::new();
    if !opts.resume {
        fs::remove_file(out_dir.join(PARTIAL)).ok();
    } else {
        read_rows(&out_dir.join(ROWS_JSONL), &digest, &mut rows)?;
        read_rows(&out_dir.join(PARTIAL), &digest, &mut rows)?;
    }
    let order: BTreeMap<&str, usize> = plan.experiments.iter().enumerate().map(|(i, e)| (e.name.as_str(), i)).collect();
    let cells: Vec<Vec<Cell>> = plan.experiments.iter().map(Experiment::cells).collect();
    // drop rows that no longer belong to the plan, then duplicates
    rows.retain(|r| {
        order.get(r.experiment.as_str()).is_some_and(|&i| {
            let e = &plan.experiments[i];
            (r.cell as usize) < cells[i].len() && r.trial < e.trials
        })
    });
    rows.sort_by(|a, b| (order[a.experiment.as_str()], a.cell, a.trial).cmp(&(order[b.experiment.as_str()], b.cell, b.trial)));
    rows.dedup_by(|a, b| a.key() == b.key());
    let reused = rows.len();
    let done: HashSet<(usize, u32, u32)> = rows.iter().map(|r| (order[r.experiment.as_str()], r.cell, r.trial)).collect();

    let mut work: Vec<(usize, u32, u32)> = Vec::new();
    for (i, e) in plan.experiments.iter().enumerate() {
        for c in 0..cells[i].len() as u32 {
            for t in 0..e.trials {
                if !done.contains(&(i, c, t)) {
                    work.push((i, c, t));
                }
            }
        }
    }
    let total_needed = work.len();
    if let Some(limit) = opts.max_new_trials {
        work.truncate(limit);
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let partial_path = out_dir.join(PARTIAL);
    let mut partial = BufWriter::new(
        fs::OpenOptions::new().create(true).append(true).open(&partial_path).context("opening partial rows")?,
    );
    let chunk = (workers * 512).max(2048);
    for batch in work.chunks(chunk) {
        let fresh: Vec<Row> = pool.install(|| {
            batch
                .par_iter()
                .map(|&(i, c, t)| run_trial(plan, &digest, &plan.experiments[i], c, cells[i][c as usize], t))
                .collect()
        });
        for r in &fresh {
            serde_json::to_writer(&mut partial, r)?;
            partial.write_all(b"\n")?;
        }
        partial.flush()?;
        rows.extend(fresh);
    }
    drop(partial);
    rows.sort_by(|a, b| (order[a.experiment.as_str()], a.cell, a.trial).cmp(&(order[b.experiment.as_str()], b.cell, b.trial)));
    let new_trials = work.len();
    let complete = new_trials == total_needed;

    write_atomic(&out_dir.join(ROWS_JSONL), |w| {
        for r in &rows {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    write_atomic(&out_dir.join(ROWS_CSV), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(CSV_HEADER)?;
        for r in &rows {
            csv.write_record(r.csv_record())?;
        }
        csv.flush()?;
        Ok(())
    })?;
    write_atomic(&out_dir.join(CELLS_CSV), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(CELL_CSV_HEADER)?;
        let mut start = 0;
        for (i, e) in plan.experiments.iter().enumerate() {
            for (c, cell) in cells[i].iter().enumerate() {
                let end = start + rows[start..].iter().take_while(|r| order[r.experiment.as_str()] == i && r.cell == c as u32).count();
                let totals = CellTotals::from_rows(&e.m, &rows[start..end]);
                for rec in cell_records(&digest, e, c as u32, *cell, &totals) {
                    csv.write_record(rec)?;
                }
                start = end;
            }
        }
        csv.flush()?;
        Ok(())
    })?;
    fs::write(out_dir.join(PLAN_COPY), plan.to_text())?;
    if complete {
        fs::remove_file(&partial_path).ok();
    }

    let mut per = BTreeMap::new();
    for r in &rows {
        *per.entry(r.experiment.clone()).or_insert(0u64) += 1;
    }
    let manifest = Manifest {
        version: crate::VERSION.to_string(),
        plan_digest: digest,
        master_seed: plan.master_seed,
        p_c_triangular: 0.5,
        p_c_square_site: SQUARE_SITE_PC,
        started_unix: started,
        finished_unix: now(),
        workers,
        complete,
        rows_total: rows.len() as u64,
        rows_per_experiment: per,
    };
    write_atomic(&out_dir.join(MANIFEST), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        w.write_all(b"\n")?;
        Ok(())
    })?;
    Ok(RunSummary { out_dir: out_dir.to_path_buf(), manifest, new_trials, reused_trials: reused })
}

/// A finished (or partial) run read back from disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub plan: Plan,
    pub manifest: Manifest,
    /// Rows whose plan digest matches the manifest.
    pub rows: Vec<Row>,
    /// Rows dropped because their digest did not match.
    pub foreign_rows: usize,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Dataset> {
        let text = fs::read_to_string(dir.join(PLAN_COPY)).with_context(|| format!("reading plan in {}", dir.display()))?;
        let (plan, _) = Plan::parse(&text)?;
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
        let mut all = Vec::new();
        let f = BufReader::new(File::open(dir.join(ROWS_JSONL))?);
        for line in f.lines() {
            all.push(serde_json::from_str::<Row>(&line?)?);
        }
        let total = all.len();
        all.retain(|r| r.plan == manifest.plan_digest);
        Ok(Dataset { plan, foreign_rows: total - all.len(), manifest, rows: all })
    }

    /// Rows of one experiment grouped by cell index.
    pub fn cell_rows(&self, experiment: &str) -> BTreeMap<u32, Vec<&Row>> {
        let mut out: BTreeMap<u32, Vec<&Row>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.experiment == experiment) {
            out.entry(r.cell).or_default().push(r);
        }
        out
    }
}
