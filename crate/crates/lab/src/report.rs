//! Claim reports: estimates, fits, band checks and a verdict per claim.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use anyhow::{bail, Result};
use pivotal_core::stats::{loglog_fit_with, ratio_band_check, BernoulliEstimate, FitOptions, FitPoint, PowerLawFit};
use serde::Serialize;

use crate::plan::{Experiment, ExperimentKind};
use crate::record::{mean_se, CellTotals, Row};
use crate::run::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// `P(M_n < m) ≍ m/n`.
    MinHeight,
    /// `E X_{n,m} ≍ m/n` and `E X²_{n,m} ≍ m/n`.
    Moments,
    /// `E Q_{n,m} = m^{7/4+o(1)} / n`.
    StripGrowth,
    /// Growth of `E|L_n|`, `E|F_n|`, `E|Q_n|` in `n`.
    SizeMoments,
    /// Horseshoe arm exponents.
    ArmExponents,
    /// Quarter/half sector ratio decay.
    SectorDecay,
    /// Flat density of `h` in the central band.
    Stationarity,
}

impl Claim {
    pub const ALL: [Claim; 7] =
        [Claim::MinHeight, Claim::Moments, Claim::StripGrowth, Claim::SizeMoments, Claim::ArmExponents, Claim::SectorDecay, Claim::Stationarity];

    pub fn name(self) -> &'static str {
        match self {
            Claim::MinHeight => "min-height",
            Claim::Moments => "moments",
            Claim::StripGrowth => "strip-growth",
            Claim::SizeMoments => "size-moments",
            Claim::ArmExponents => "arm-exponents",
            Claim::SectorDecay => "sector-decay",
            Claim::Stationarity => "stationarity",
        }
    }

    fn kinds(self) -> &'static [ExperimentKind] {
        use ExperimentKind::*;
        match self {
            Claim::MinHeight | Claim::Moments | Claim::StripGrowth => &[MinHeight, BlockMoments, StripDensity],
            Claim::SizeMoments => &[SizeMoments],
            Claim::ArmExponents => &[Horseshoe],
            Claim::SectorDecay => &[SectorPair],
            Claim::Stationarity => &[Stationarity],
        }
    }
}

impl FromStr for Claim {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Claim::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown claim `{s}`"))
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Acceptance thresholds. Defaults are the artifact's conventions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub band_max_spread: f64,
    pub min_height_slope: (f64, f64),
    pub min_height_m: (u32, u32),
    pub moments_m: (u32, u32),
    pub moments_max_ratio: f64,
    pub strip_slope: (f64, f64),
    pub strip_m: (u32, u32),
    pub size_lowest: (f64, f64),
    pub size_pioneers: (f64, f64),
    pub size_pivotal: (f64, f64),
    pub arm_kappa2: (f64, f64),
    pub arm_kappa3: (f64, f64),
    pub stationarity_bins: u32,
    pub stationarity_max_ratio: f64,
    pub bootstrap_resamples: u32,
    pub bootstrap_seed: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            band_max_spread: 8.0,
            min_height_slope: (0.75, 1.25),
            min_height_m: (2, 32),
            moments_m: (2, 32),
            moments_max_ratio: 4.0,
            strip_slope: (1.5, 2.0),
            strip_m: (8, 64),
            size_lowest: (4.0 / 3.0 - 0.15, 4.0 / 3.0 + 0.15),
            size_pioneers: (1.6, 1.9),
            size_pivotal: (0.5, 1.0),
            arm_kappa2: (0.85, 1.15),
            arm_kappa3: (1.7, 2.3),
            stationarity_bins: 16,
            stationarity_max_ratio: 4.0,
            bootstrap_resamples: 2000,
            bootstrap_seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail => f.write_str("fail"),
            Verdict::Inconclusive(r) => write!(f, "inconclusive: {r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Bootstrap interval when the check concerns a fitted exponent.
    pub ci: Option<(f64, f64)>,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claim: Claim,
    pub experiment: String,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Human-readable estimates table.
    pub table: String,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "== {} ({}) : {}", self.claim, self.experiment, self.verdict).unwrap();
        s.push_str(&self.table);
        for c in &self.checks {
            let range = match (c.low, c.high) {
                (Some(lo), Some(hi)) => format!("[{lo:.4}, {hi:.4}]"),
                (None, Some(hi)) => format!("<= {hi:.4}"),
                (Some(lo), None) => format!(">= {lo:.4}"),
                (None, None) => String::new(),
            };
            let ci = c.ci.map(|(a, b)| format!(" ci [{a:.4}, {b:.4}]")).unwrap_or_default();
            writeln!(s, "  {:<40} {:>10.4}{ci}  target {range}  {}", c.name, c.value, if c.passed { "ok" } else { "FAIL" })
                .unwrap();
        }
        for n in &self.notes {
            writeln!(s, "  note: {n}").unwrap();
        }
        s
    }
}

/// Builds checks and turns them into a verdict.
struct Builder {
    checks: Vec<Check>,
    notes: Vec<String>,
    table: String,
    inconclusive: Option<String>,
}

impl Builder {
    fn new() -> Self {
        Builder { checks: Vec::new(), notes: Vec::new(), table: String::new(), inconclusive: None }
    }

    fn range(&mut self, name: String, value: f64, low: Option<f64>, high: Option<f64>) {
        let passed = low.is_none_or(|l| value >= l) && high.is_none_or(|h| value <= h);
        self.checks.push(Check { name, value, ci: None, low, high, passed });
    }

    /// Passes when the interval meets `[low, high]`.
    fn interval_meets(&mut self, name: String, fit: &PowerLawFit, sign: f64, (low, high): (f64, f64)) {
        let (a, b) = (sign * fit.slope_ci.0, sign * fit.slope_ci.1);
        let ci = (a.min(b), a.max(b));
        let passed = ci.0 <= high && ci.1 >= low;
        self.checks.push(Check { name, value: sign * fit.slope, ci: Some(ci), low: Some(low), high: Some(high), passed });
    }

    fn inconclusive(&mut self, reason: &str) {
        if self.inconclusive.is_none() {
            self.inconclusive = Some(reason.to_string());
        }
    }

    fn finish(self, claim: Claim, experiment: &str) -> ClaimReport {
        let verdict = match self.inconclusive {
            Some(r) => Verdict::Inconclusive(r),
            None if self.checks.is_empty() => Verdict::Inconclusive("no checks".into()),
            None if self.checks.iter().all(|c| c.passed) => Verdict::Pass,
            None => Verdict::Fail,
        };
        ClaimReport { claim, experiment: experiment.to_string(), verdict, checks: self.checks, notes: self.notes, table: self.table }
    }
}

fn fit(points: &[FitPoint], t: &Thresholds) -> Option<PowerLawFit> {
    let opts = FitOptions { resamples: t.bootstrap_resamples, seed: t.bootstrap_seed, ..FitOptions::default() };
    loglog_fit_with(points, opts).ok()
}

/// Picks the experiment a claim reads: the named one, or the first of a
/// suitable kind.
fn pick<'a>(ds: &'a Dataset, claim: Claim, name: Option<&str>) -> Result<&'a Experiment> {
    let found = ds.plan.experiments.iter().find(|e| {
        claim.kinds().contains(&e.kind) && name.is_none_or(|n| n == e.name)
    });
    match found {
        Some(e) => Ok(e),
        None => bail!("dataset has no experiment with the observables of claim `{claim}`"),
    }
}

fn totals(ds: &Dataset, e: &Experiment) -> Vec<CellTotals> {
    let by_cell = ds.cell_rows(&e.name);
    (0..e.cells().len() as u32)
        .map(|c| CellTotals::from_rows(&e.m, by_cell.get(&c).map(|v| v.iter().copied()).into_iter().flatten()))
        .collect()
}

pub fn report(ds: &Dataset, claim: Claim, t: &Thresholds, experiment: Option<&str>) -> Result<ClaimReport> {
    let e = pick(ds, claim, experiment)?;
    let cells = e.cells();
    let tot = totals(ds, e);
    let mut b = Builder::new();
    if tot.iter().all(|c| c.trials == 0) {
        b.inconclusive("no rows");
        return Ok(b.finish(claim, &e.name));
    }
    match claim {
        Claim::MinHeight => min_height(&mut b, e, &cells, &tot, t),
        Claim::Moments => moments(&mut b, e, &cells, &tot, t),
        Claim::StripGrowth => strip_growth(&mut b, e, &cells, &tot, t),
        Claim::SizeMoments => size_moments(&mut b, &cells, &tot, t),
        Claim::ArmExponents => arm_exponents(&mut b, e, &cells, &tot, t),
        Claim::SectorDecay => sector_decay(&mut b, &cells, &tot, t),
        Claim::Stationarity => stationarity(&mut b, ds, e, t),
    }
    Ok(b.finish(claim, &e.name))
}

fn m_indices(e: &Experiment, n: u32, (lo, hi): (u32, u32)) -> Vec<(usize, u32)> {
    e.m.iter().copied().enumerate().filter(|&(_, m)| m >= lo && m <= hi && m <= n).collect()
}

fn min_height(b: &mut Builder, e: &Experiment, cells: &[crate::plan::Cell], tot: &[CellTotals], t: &Thresholds) {
    writeln!(b.table, "  {:>5} {:>4} {:>8} {:>10} {:>10} {:>22} {:>10}", "n", "m", "trials", "P(M<m)", "P/(m/n)", "wilson95", "P(M<m|LR)")
        .unwrap();
    let mut band = Vec::new();
    let mut zero = 0;
    for (cell, c) in cells.iter().zip(tot) {
        let mut points = Vec::new();
        for (i, m) in m_indices(e, cell.n, t.min_height_m) {
            let est = BernoulliEstimate::new(c.below[i], c.trials).expect("counts");
            let cond = if c.crossings > 0 { c.below_with_crossing[i] as f64 / c.crossings as f64 } else { f64::NAN };
            let r = m as f64 / cell.n as f64;
            writeln!(
                b.table,
                "  {:>5} {:>4} {:>8} {:>10.5} {:>10.4} [{:.5}, {:.5}] {:>10.5}",
                cell.n, m, c.trials, est.p_hat, est.p_hat / r, est.wilson_low, est.wilson_high, cond
            )
            .unwrap();
            match FitPoint::from_estimate(m as f64, &est) {
                Some(p) => {
                    points.push(p);
                    band.push((est.p_hat, r));
                }
                None => zero += 1,
            }
        }
        if points.len() < 3 {
            b.inconclusive("zero cells");
            continue;
        }
        if let Some(f) = fit(&points, t) {
            b.range(format!("slope in m at n={}", cell.n), f.slope, Some(t.min_height_slope.0), Some(t.min_height_slope.1));
        }
    }
    if zero > 0 {
        b.notes.push(format!("{zero} zero cells excluded from fits and band"));
    }
    if let Ok(band) = ratio_band_check(&band) {
        b.range("band spread of P/(m/n)".into(), band.spread, None, Some(t.band_max_spread));
    }
}

fn moments(b: &mut Builder, e: &Experiment, cells: &[crate::plan::Cell], tot: &[CellTotals], t: &Thresholds) {
    writeln!(b.table, "  {:>5} {:>4} {:>8} {:>10} {:>10} {:>10}", "n", "m", "trials", "E X", "E X^2", "E X^2/E X").unwrap();
    let (mut first, mut second) = (Vec::new(), Vec::new());
    let mut worst_ratio: f64 = 0.0;
    for (cell, c) in cells.iter().zip(tot) {
        for (i, m) in m_indices(e, cell.n, t.moments_m) {
            if c.block_sum.is_empty() {
                continue;
            }
            let ex = c.block_sum[i] as f64 / c.trials as f64;
            let ex2 = c.block_sq_sum[i] as f64 / c.trials as f64;
            writeln!(b.table, "  {:>5} {:>4} {:>8} {:>10.5} {:>10.5} {:>10.4}", cell.n, m, c.trials, ex, ex2, ex2 / ex).unwrap();
            if c.block_sum[i] == 0 {
                b.inconclusive("zero cells");
                continue;
            }
            let r = m as f64 / cell.n as f64;
            first.push((ex, r));
            second.push((ex2, r));
            worst_ratio = worst_ratio.max(ex2 / ex);
        }
    }
    if first.is_empty() {
        b.inconclusive("zero cells");
        return;
    }
    let f = ratio_band_check(&first).expect("nonempty");
    let s = ratio_band_check(&second).expect("nonempty");
    b.range("band spread of E X/(m/n)".into(), f.spread, None, Some(t.band_max_spread));
    b.range("band spread of E X^2/(m/n)".into(), s.spread, None, Some(t.band_max_spread));
    b.range("max E X^2 / E X".into(), worst_ratio, None, Some(t.moments_max_ratio));
}

fn strip_growth(b: &mut Builder, e: &Experiment, cells: &[crate::plan::Cell], tot: &[CellTotals], t: &Thresholds) {
    let Some((ci, cell)) = cells.iter().enumerate().max_by_key(|(_, c)| c.n) else { return };
    let c = &tot[ci];
    writeln!(b.table, "  {:>5} {:>4} {:>8} {:>12} {:>10}", "n", "m", "trials", "E Q_{n,m}", "se").unwrap();
    let mut points = Vec::new();
    for (i, m) in m_indices(e, cell.n, t.strip_m) {
        let (mean, se) = mean_se(c.strip_sum[i] as u128, c.strip_sq_sum[i] as u128, c.trials);
        writeln!(b.table, "  {:>5} {:>4} {:>8} {:>12.5} {:>10.5}", cell.n, m, c.trials, mean, se).unwrap();
        match FitPoint::from_mean(m as f64, mean, se) {
            Some(p) => points.push(p),
            None => b.notes.push(format!("zero cell m={m} excluded")),
        }
    }
    if points.len() < 3 {
        b.inconclusive("zero cells");
        return;
    }
    if let Some(f) = fit(&points, t) {
        b.range(format!("slope of E Q_(n,m) in m at n={}", cell.n), f.slope, Some(t.strip_slope.0), Some(t.strip_slope.1));
        b.notes.push(format!("bootstrap ci [{:.4}, {:.4}]", f.slope_ci.0, f.slope_ci.1));
    }
}

fn size_moments(b: &mut Builder, cells: &[crate::plan::Cell], tot: &[CellTotals], t: &Thresholds) {
    writeln!(b.table, "  {:>5} {:>8} {:>12} {:>12} {:>12}", "n", "trials", "E|L_n|", "E|F_n|", "E|Q_n|").unwrap();
    let mut pts: [Vec<FitPoint>; 3] = Default::default();
    for (cell, c) in cells.iter().zip(tot) {
        let stats = [
            mean_se(c.lowest_sum as u128, c.lowest_sq_sum, c.trials),
            mean_se(c.pioneer_sum as u128, c.pioneer_sq_sum, c.trials),
            mean_se(c.pivotal_sum as u128, c.pivotal_sq_sum, c.trials),
        ];
        writeln!(b.table, "  {:>5} {:>8} {:>12.3} {:>12.3} {:>12.4}", cell.n, c.trials, stats[0].0, stats[1].0, stats[2].0).unwrap();
        for (k, (mean, se)) in stats.into_iter().enumerate() {
            if let Some(p) = FitPoint::from_mean(cell.n as f64, mean, se) {
                pts[k].push(p);
            }
        }
    }
    for (k, (name, band)) in
        [("E|L_n|", t.size_lowest), ("E|F_n|", t.size_pioneers), ("E|Q_n|", t.size_pivotal)].into_iter().enumerate()
    {
        if pts[k].len() < 3 {
            b.inconclusive("zero cells");
            continue;
        }
        if let Some(f) = fit(&pts[k], t) {
            b.range(format!("slope of {name} in n"), f.slope, Some(band.0), Some(band.1));
            b.notes.push(format!("{name} bootstrap ci [{:.4}, {:.4}]", f.slope_ci.0, f.slope_ci.1));
        }
    }
}

fn arm_exponents(b: &mut Builder, e: &Experiment, cells: &[crate::plan::Cell], tot: &[CellTotals], t: &Thresholds) {
    writeln!(b.table, "  {:>3} {:>3} {:>8} {:>10} {:>10}", "rho", "nu", "trials", "P(J2)", "P(J3)").unwrap();
    let mut pts: [Vec<FitPoint>; 2] = Default::default();
    for (cell, c) in cells.iter().zip(tot) {
        let j2 = BernoulliEstimate::new(c.j2, c.trials).expect("counts");
        let j3 = BernoulliEstimate::new(c.j3, c.trials).expect("counts");
        writeln!(b.table, "  {:>3} {:>3} {:>8} {:>10.6} {:>10.6}", cell.rho, cell.nu, c.trials, j2.p_hat, j3.p_hat).unwrap();
        let scale = (cell.nu as f64 - cell.rho as f64).exp2();
        for (k, est) in [j2, j3].iter().enumerate() {
            if let Some(p) = FitPoint::from_estimate(scale, est) {
                pts[k].push(p);
            }
        }
    }
    for (k, kappa, band) in [(0, 2, t.arm_kappa2), (1, 3, t.arm_kappa3)] {
        if !e.kappa.contains(&kappa) {
            continue;
        }
        if pts[k].len() < 3 {
            b.inconclusive("zero cells");
            continue;
        }
        if let Some(f) = fit(&pts[k], t) {
            b.interval_meets(format!("exponent for kappa={kappa}"), &f, -1.0, band);
        }
    }
    if e.kappa.contains(&2) {
        b.notes.push("kappa=2 counts both rotational orders".into());
    }
}

fn sector_decay(b: &mut Builder, cells: &[crate::plan::Cell], tot: &[CellTotals], t: &Thresholds) {
    writeln!(b.table, "  {:>3} {:>5} {:>8} {:>10} {:>10} {:>10}", "l", "n", "trials", "quarter", "half", "ratio").unwrap();
    let mut by_l: std::collections::BTreeMap<u32, Vec<(u32, f64, f64)>> = Default::default();
    for (cell, c) in cells.iter().zip(tot) {
        let n = c.trials as f64;
        let (q, h) = (c.quarter as f64 / n, c.half as f64 / n);
        writeln!(b.table, "  {:>3} {:>5} {:>8} {:>10.6} {:>10.6} {:>10.5}", cell.l, cell.n, c.trials, q, h, q / h).unwrap();
        if c.quarter == 0 || c.half == 0 {
            b.inconclusive("zero cells");
            continue;
        }
        let both = c.both as f64 / n;
        // delta method for ln(q/h) with the covariance of the joint indicators
        let var = (1.0 - q) / (n * q) + (1.0 - h) / (n * h) - 2.0 * (both - q * h) / (n * q * h);
        by_l.entry(cell.l).or_default().push((cell.n, q / h, var.max(1e-24).sqrt()));
    }
    for (l, mut pts) in by_l {
        pts.sort_by_key(|p| p.0);
        let decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
        b.range(format!("ratio strictly decreasing in n (l={l})"), decreasing as u8 as f64, Some(1.0), None);
        let fp: Vec<FitPoint> =
            pts.iter().map(|&(n, r, se)| FitPoint { scale: n as f64 / l as f64, value: r, log_se: Some(se) }).collect();
        if fp.len() < 3 {
            b.inconclusive("fewer than three n values");
            continue;
        }
        if let Some(f) = fit(&fp, t) {
            let alpha = -f.slope;
            let ci = (-f.slope_ci.1, -f.slope_ci.0);
            b.range(format!("alpha (l={l})"), alpha, Some(f64::MIN_POSITIVE), None);
            b.checks.push(Check {
                name: format!("alpha ci excludes 0 (l={l})"),
                value: ci.0,
                ci: Some(ci),
                low: Some(0.0),
                high: None,
                passed: ci.0 > 0.0,
            });
        }
    }
}

/// Histogram of `h` over `|h| ≤ n/2` with equal-count bin widths as close as
/// possible; widths differ by at most one, so densities are compared.
pub fn h_histogram(rows: &[&Row], n: u32, bins: u32) -> Vec<(i32, i32, u64)> {
    let half = (n / 2) as i32;
    let width_total = (2 * half + 1) as u32;
    let edges: Vec<i32> = (0..=bins).map(|b| -half + (b as u64 * width_total as u64 / bins as u64) as i32).collect();
    let mut counts = vec![0u64; bins as usize];
    for r in rows {
        if let Some(h) = r.h {
            if h.abs() <= half {
                let k = edges.partition_point(|&e| e <= h) - 1;
                counts[k] += 1;
            }
        }
    }
    (0..bins as usize).map(|k| (edges[k], edges[k + 1] - 1, counts[k])).collect()
}

fn stationarity(b: &mut Builder, ds: &Dataset, e: &Experiment, t: &Thresholds) {
    let by_cell = ds.cell_rows(&e.name);
    for (ci, cell) in e.cells().iter().enumerate() {
        let rows = by_cell.get(&(ci as u32)).cloned().unwrap_or_default();
        if rows.is_empty() {
            continue;
        }
        if cell.n + 1 < t.stationarity_bins {
            b.inconclusive("box too small for the requested bins");
            continue;
        }
        let hist = h_histogram(&rows, cell.n, t.stationarity_bins);
        writeln!(b.table, "  n={} trials={} bins of h:", cell.n, rows.len()).unwrap();
        let dens: Vec<f64> = hist.iter().map(|&(lo, hi, c)| c as f64 / (hi - lo + 1) as f64).collect();
        for (&(lo, hi, c), d) in hist.iter().zip(&dens) {
            writeln!(b.table, "    [{lo:>4}, {hi:>4}] {c:>8} density {d:>10.2}").unwrap();
        }
        let lo = dens.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = dens.iter().copied().fold(0.0, f64::max);
        if lo == 0.0 {
            b.inconclusive("zero cells");
            continue;
        }
        b.range(format!("max/min bin density (n={})", cell.n), hi / lo, None, Some(t.stationarity_max_ratio));
        b.range(format!("bins (n={})", cell.n), hist.len() as f64, Some(16.0), None);
    }
}

/// Reports for every claim the dataset can answer.
pub fn report_all(ds: &Dataset, t: &Thresholds) -> Vec<ClaimReport> {
    Claim::ALL.into_iter().filter_map(|c| report(ds, c, t, None).ok()).collect()
}
