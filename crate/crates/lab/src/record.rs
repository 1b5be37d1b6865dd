//! Per-trial rows and per-cell aggregates.

use serde::{Deserialize, Serialize};

use crate::plan::{Cell, Experiment, ExperimentKind};

/// Observables of one trial. Only the fields of the experiment's kind are
/// present; the rest stay `None` and are omitted from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Row {
    pub plan: String,
    pub experiment: String,
    pub cell: u32,
    pub trial: u32,
    pub trial_index: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n: u32,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub rho: u32,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub nu: u32,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing: Option<bool>,
    /// `M_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_height: Option<u32>,
    /// `|Q_n|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivotal_count: Option<u32>,
    /// `X_{n,m}` for each `m` of the plan, in plan order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_counts: Option<Vec<u32>>,
    /// `Q_{n,m}` for each `m` of the plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip_counts: Option<Vec<u32>>,
    /// `|L_n|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowest_len: Option<u32>,
    /// `|F_n|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pioneer_count: Option<u32>,
    /// Lowest `y` on the highest crossing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j2: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j3: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quarter: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half: Option<bool>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

pub const CSV_HEADER: [&str; 23] = [
    "level",
    "plan",
    "experiment",
    "cell",
    "trial",
    "trial_index",
    "n",
    "rho",
    "nu",
    "l",
    "crossing",
    "min_height",
    "pivotal_count",
    "block_counts",
    "strip_counts",
    "lowest_len",
    "pioneer_count",
    "h",
    "j2",
    "j3",
    "quarter",
    "half",
    "trials",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| (b as u8).to_string()).unwrap_or_default()
}

fn opt_list(v: &Option<Vec<u32>>) -> String {
    v.as_ref()
        .map(|l| l.iter().map(u32::to_string).collect::<Vec<_>>().join(";"))
        .unwrap_or_default()
}

impl Row {
    pub fn new(plan: &str, e: &Experiment, cell_index: u32, cell: Cell, trial: u32) -> Row {
        Row {
            plan: plan.to_string(),
            experiment: e.name.clone(),
            cell: cell_index,
            trial,
            trial_index: trial_index(cell_index, trial),
            n: cell.n,
            rho: cell.rho,
            nu: cell.nu,
            l: cell.l,
            ..Row::default()
        }
    }

    /// Ordering key for the canonical dataset order.
    pub fn key(&self) -> (&str, u32, u32) {
        (&self.experiment, self.cell, self.trial)
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            "trial".into(),
            self.plan.clone(),
            self.experiment.clone(),
            self.cell.to_string(),
            self.trial.to_string(),
            self.trial_index.to_string(),
            self.n.to_string(),
            self.rho.to_string(),
            self.nu.to_string(),
            self.l.to_string(),
            opt_bool(self.crossing),
            opt(&self.min_height),
            opt(&self.pivotal_count),
            opt_list(&self.block_counts),
            opt_list(&self.strip_counts),
            opt(&self.lowest_len),
            opt(&self.pioneer_count),
            opt(&self.h),
            opt_bool(self.j2),
            opt_bool(self.j3),
            opt_bool(self.quarter),
            opt_bool(self.half),
            "1".into(),
        ]
    }
}

/// Trial keys of one experiment: cell in the high word, trial in the low.
pub fn trial_index(cell_index: u32, trial: u32) -> u64 {
    (cell_index as u64) << 32 | trial as u64
}

/// Exact integer sums over the trials of one cell.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellTotals {
    pub trials: u64,
    pub crossings: u64,
    /// Per `m`: trials with `M_n < m`.
    pub below: Vec<u64>,
    /// Per `m`: trials with a crossing and `M_n < m`.
    pub below_with_crossing: Vec<u64>,
    pub block_sum: Vec<u64>,
    pub block_sq_sum: Vec<u64>,
    pub strip_sum: Vec<u64>,
    pub strip_sq_sum: Vec<u64>,
    pub pivotal_sum: u64,
    pub pivotal_sq_sum: u128,
    pub lowest_sum: u64,
    pub lowest_sq_sum: u128,
    pub pioneer_sum: u64,
    pub pioneer_sq_sum: u128,
    pub j2: u64,
    pub j3: u64,
    pub quarter: u64,
    pub half: u64,
    pub both: u64,
}

impl CellTotals {
    pub fn from_rows<'a>(ms: &[u32], rows: impl IntoIterator<Item = &'a Row>) -> CellTotals {
        let k = ms.len();
        let mut t = CellTotals {
            below: vec![0; k],
            below_with_crossing: vec![0; k],
            block_sum: vec![0; k],
            block_sq_sum: vec![0; k],
            strip_sum: vec![0; k],
            strip_sq_sum: vec![0; k],
            ..CellTotals::default()
        };
        for r in rows {
            t.trials += 1;
            let crossing = r.crossing == Some(true);
            t.crossings += crossing as u64;
            if let Some(mh) = r.min_height {
                for (i, &m) in ms.iter().enumerate() {
                    if mh < m {
                        t.below[i] += 1;
                        t.below_with_crossing[i] += crossing as u64;
                    }
                }
            }
            for (sum, sq, list) in [
                (&mut t.block_sum, &mut t.block_sq_sum, &r.block_counts),
                (&mut t.strip_sum, &mut t.strip_sq_sum, &r.strip_counts),
            ] {
                if let Some(list) = list {
                    for (i, &v) in list.iter().enumerate().take(k) {
                        sum[i] += v as u64;
                        sq[i] += v as u64 * v as u64;
                    }
                }
            }
            for (sum, sq, v) in [
                (&mut t.pivotal_sum, &mut t.pivotal_sq_sum, r.pivotal_count),
                (&mut t.lowest_sum, &mut t.lowest_sq_sum, r.lowest_len),
                (&mut t.pioneer_sum, &mut t.pioneer_sq_sum, r.pioneer_count),
            ] {
                if let Some(v) = v {
                    *sum += v as u64;
                    *sq += v as u128 * v as u128;
                }
            }
            t.j2 += (r.j2 == Some(true)) as u64;
            t.j3 += (r.j3 == Some(true)) as u64;
            t.quarter += (r.quarter == Some(true)) as u64;
            t.half += (r.half == Some(true)) as u64;
            t.both += (r.quarter == Some(true) && r.half == Some(true)) as u64;
        }
        t
    }
}

/// `(mean, standard error of the mean)` from exact sums.
pub fn mean_se(sum: u128, sq_sum: u128, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = sum as f64 / nf;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    // n·Σx² − (Σx)² is exact in integers
    let num = (n as u128 * sq_sum).saturating_sub(sum * sum) as f64;
    let var = num / (nf * (nf - 1.0));
    (mean, (var / nf).sqrt())
}

/// Canonical CSV lines for the cell-level aggregates of one experiment.
pub fn cell_records(plan: &str, e: &Experiment, cell_index: u32, cell: Cell, t: &CellTotals) -> Vec<Vec<String>> {
    let base = |label: String, value: String| {
        vec![
            "cell".to_string(),
            plan.to_string(),
            e.name.clone(),
            cell_index.to_string(),
            label,
            value,
            cell.n.to_string(),
            cell.rho.to_string(),
            cell.nu.to_string(),
            cell.l.to_string(),
            t.trials.to_string(),
        ]
    };
    let mut out = vec![base("crossings".into(), t.crossings.to_string())];
    match e.kind {
        k if k.is_pivotal() => {
            for (i, m) in e.m.iter().enumerate() {
                out.push(base(format!("below[m={m}]"), t.below[i].to_string()));
                out.push(base(format!("below_with_crossing[m={m}]"), t.below_with_crossing[i].to_string()));
                out.push(base(format!("block_sum[m={m}]"), t.block_sum[i].to_string()));
                out.push(base(format!("block_sq_sum[m={m}]"), t.block_sq_sum[i].to_string()));
                out.push(base(format!("strip_sum[m={m}]"), t.strip_sum[i].to_string()));
            }
            out.push(base("pivotal_sum".into(), t.pivotal_sum.to_string()));
        }
        ExperimentKind::SizeMoments => {
            out.push(base("lowest_sum".into(), t.lowest_sum.to_string()));
            out.push(base("pioneer_sum".into(), t.pioneer_sum.to_string()));
            out.push(base("pivotal_sum".into(), t.pivotal_sum.to_string()));
        }
        ExperimentKind::Horseshoe => {
            out.push(base("j2".into(), t.j2.to_string()));
            out.push(base("j3".into(), t.j3.to_string()));
        }
        ExperimentKind::SectorPair => {
            out.push(base("quarter".into(), t.quarter.to_string()));
            out.push(base("half".into(), t.half.to_string()));
            out.push(base("both".into(), t.both.to_string()));
        }
        _ => {}
    }
    out
}

pub const CELL_CSV_HEADER: [&str; 11] =
    ["level", "plan", "experiment", "cell", "quantity", "value", "n", "rho", "nu", "l", "trials"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_skips_absent_fields() {
        let e = Experiment::new("x", ExperimentKind::MinHeight);
        let mut r = Row::new("d", &e, 2, Cell { n: 8, rho: 0, nu: 0, l: 0 }, 5);
        r.min_height = Some(3);
        r.block_counts = Some(vec![0, 1]);
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains("rho") && !s.contains("j2"));
        assert_eq!(serde_json::from_str::<Row>(&s).unwrap(), r);
        assert_eq!(r.trial_index, (2 << 32) | 5);
        assert_eq!(r.csv_record().len(), CSV_HEADER.len());
        assert_eq!(r.csv_record()[13], "0;1");
    }

    #[test]
    fn totals_are_exact() {
        let e = Experiment::new("x", ExperimentKind::MinHeight);
        let c = Cell { n: 4, rho: 0, nu: 0, l: 0 };
        let rows: Vec<Row> = (0..4)
            .map(|t| {
                let mut r = Row::new("d", &e, 0, c, t);
                r.crossing = Some(t != 3);
                r.min_height = Some(if t == 3 { 8 } else { t });
                r.block_counts = Some(vec![(t < 2) as u32, 2]);
                r
            })
            .collect();
        let t = CellTotals::from_rows(&[1, 2], &rows);
        assert_eq!(t.trials, 4);
        assert_eq!(t.crossings, 3);
        assert_eq!(t.below, vec![1, 2]);
        assert_eq!(t.block_sum, vec![2, 8]);
        assert_eq!(t.block_sq_sum, vec![2, 16]);
        let (m, se) = mean_se(8, 16, 4);
        assert_eq!((m, se), (2.0, 0.0));
        let (m, se) = mean_se(2, 2, 4);
        assert!((m - 0.5).abs() < 1e-15 && (se - (1.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }
}
