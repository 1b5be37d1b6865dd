//! Experiment plans and their text format.
//!
//! ```text
//! # global settings
//! master_seed = 20240601
//! workers = 4
//! output = runs/min-height
//!
//! [experiment min-height]
//! type = min-height
//! lattice = triangular
//! n = 64, 128, 256
//! m = 2, 4, 8, 16, 32
//! trials = 20000
//! ```
//!
//! Keys per section: `type`, `lattice`, `trials`, `p` (defaults to the
//! critical value), grid lists `n`, `m`, `rho`, `nu`, `l`, `kappa`, and
//! `arcs` (`default` or `whole`) for horseshoes. Blank lines and `#`
//! comments are ignored; unknown keys produce warnings.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use pivotal_core::lattice::{HorseshoeSpec, LatticeKind};
use pivotal_core::sampling::critical_p;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlanError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid plan:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    MinHeight,
    BlockMoments,
    StripDensity,
    SizeMoments,
    Stationarity,
    Horseshoe,
    SectorPair,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::MinHeight,
        ExperimentKind::BlockMoments,
        ExperimentKind::StripDensity,
        ExperimentKind::SizeMoments,
        ExperimentKind::Stationarity,
        ExperimentKind::Horseshoe,
        ExperimentKind::SectorPair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MinHeight => "min-height",
            ExperimentKind::BlockMoments => "block-moments",
            ExperimentKind::StripDensity => "strip-density",
            ExperimentKind::SizeMoments => "size-moments",
            ExperimentKind::Stationarity => "stationarity",
            ExperimentKind::Horseshoe => "horseshoe",
            ExperimentKind::SectorPair => "sector-pair",
        }
    }

    /// The three pivotal experiments record the same observables.
    pub fn is_pivotal(self) -> bool {
        matches!(self, ExperimentKind::MinHeight | ExperimentKind::BlockMoments | ExperimentKind::StripDensity)
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment type `{s}`"))
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArcMode {
    #[default]
    Default,
    Whole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub kind: ExperimentKind,
    pub lattice: LatticeKind,
    pub trials: u32,
    /// `None` means the lattice's critical value.
    pub p: Option<f64>,
    pub n: Vec<u32>,
    pub m: Vec<u32>,
    pub rho: Vec<u32>,
    pub nu: Vec<u32>,
    pub l: Vec<u32>,
    pub kappa: Vec<u32>,
    pub arcs: ArcMode,
}

impl Experiment {
    pub fn new(name: &str, kind: ExperimentKind) -> Self {
        Experiment {
            name: name.to_string(),
            kind,
            lattice: LatticeKind::Triangular,
            trials: 1,
            p: None,
            n: Vec::new(),
            m: Vec::new(),
            rho: Vec::new(),
            nu: Vec::new(),
            l: Vec::new(),
            kappa: if kind == ExperimentKind::Horseshoe { vec![2, 3] } else { Vec::new() },
            arcs: ArcMode::Default,
        }
    }

    pub fn p_open(&self) -> f64 {
        self.p.unwrap_or_else(|| critical_p(self.lattice))
    }

    /// Low 32 bits of the SHA-256 of the name; keeps experiments of one plan
    /// on disjoint random streams.
    pub fn experiment_id(&self) -> u32 {
        let d = Sha256::digest(self.name.as_bytes());
        u32::from_le_bytes([d[0], d[1], d[2], d[3]])
    }

    /// Grid cells in canonical order.
    pub fn cells(&self) -> Vec<Cell> {
        match self.kind {
            ExperimentKind::Horseshoe => {
                let mut out = Vec::new();
                for &rho in &self.rho {
                    for &nu in &self.nu {
                        out.push(Cell { n: 0, rho, nu, l: 0 });
                    }
                }
                out
            }
            ExperimentKind::SectorPair => {
                let mut out = Vec::new();
                for &l in &self.l {
                    for &n in &self.n {
                        out.push(Cell { n, rho: 0, nu: 0, l });
                    }
                }
                out
            }
            _ => self.n.iter().map(|&n| Cell { n, rho: 0, nu: 0, l: 0 }).collect(),
        }
    }

    fn validate(&self, errors: &mut Vec<String>) {
        let mut err = |msg: String| errors.push(format!("[experiment {}] {msg}", self.name));
        if self.trials == 0 {
            err("trials must be at least 1".into());
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                err(format!("p = {p} is outside [0, 1]"));
            }
        }
        for (key, list) in [("n", &self.n), ("m", &self.m), ("rho", &self.rho), ("nu", &self.nu), ("l", &self.l)] {
            if list.contains(&0) {
                err(format!("{key} values must be positive"));
            }
        }
        let need = |key: &str, list: &Vec<u32>, err: &mut dyn FnMut(String)| {
            if list.is_empty() {
                err(format!("`{key}` is required for {}", self.kind));
            }
        };
        match self.kind {
            k if k.is_pivotal() => {
                need("n", &self.n, &mut err);
                need("m", &self.m, &mut err);
                for &n in &self.n {
                    for &m in &self.m {
                        let limit = if k == ExperimentKind::StripDensity { 2 * n } else { n };
                        if m > limit {
                            err(format!("cell n={n} m={m}: m must not exceed {}", if limit == n { "n" } else { "2n" }));
                        }
                    }
                }
            }
            ExperimentKind::SizeMoments | ExperimentKind::Stationarity => {
                need("n", &self.n, &mut err);
                if self.kind == ExperimentKind::SizeMoments && self.lattice != LatticeKind::Triangular {
                    err("size-moments needs the triangular lattice (exploration walk)".into());
                }
            }
            ExperimentKind::Horseshoe => {
                need("rho", &self.rho, &mut err);
                need("nu", &self.nu, &mut err);
                if self.kappa.is_empty() || self.kappa.iter().any(|k| !(2..=3).contains(k)) {
                    err("kappa must list values from {2, 3}".into());
                }
                for &rho in &self.rho {
                    for &nu in &self.nu {
                        if rho > nu {
                            err(format!("cell rho={rho} nu={nu}: rho must not exceed nu"));
                        } else if nu >= 16 || HorseshoeSpec::dyadic(rho, nu).is_err() {
                            err(format!("cell rho={rho} nu={nu}: horseshoe too large"));
                        }
                    }
                }
            }
            ExperimentKind::SectorPair => {
                need("l", &self.l, &mut err);
                need("n", &self.n, &mut err);
                for &l in &self.l {
                    for &n in &self.n {
                        if 2 * l > n {
                            err(format!("cell l={l} n={n}: l must not exceed n/2"));
                        } else if l < 2 {
                            err(format!("cell l={l} n={n}: l must be at least 2"));
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}

/// One grid point. Unused coordinates are 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub n: u32,
    pub rho: u32,
    pub nu: u32,
    pub l: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub master_seed: u64,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub experiments: Vec<Experiment>,
}

fn parse_list(v: &str) -> Result<Vec<u32>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|e| format!("bad integer `{s}`: {e}")))
        .collect()
}

fn join(list: &[u32]) -> String {
    list.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
}

impl Plan {
    /// Parses and validates. Unknown keys become warnings.
    pub fn parse(text: &str) -> Result<(Plan, Vec<String>), PlanError> {
        let mut warnings = Vec::new();
        let mut plan = Plan { master_seed: 0, workers: None, output: None, experiments: Vec::new() };
        let mut seed_seen = false;
        let mut typed: Vec<bool> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let syntax = |msg: String| PlanError::Syntax { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let inner = rest.strip_suffix(']').ok_or_else(|| syntax("unterminated section header".into()))?;
                let name = inner
                    .trim()
                    .strip_prefix("experiment")
                    .map(str::trim)
                    .filter(|n| !n.is_empty() && !n.contains(char::is_whitespace))
                    .ok_or_else(|| syntax("expected `[experiment NAME]`".into()))?;
                if plan.experiments.iter().any(|e| e.name == name) {
                    return Err(syntax(format!("duplicate experiment `{name}`")));
                }
                // kind is filled in by the mandatory `type` key
                let mut e = Experiment::new(name, ExperimentKind::MinHeight);
                e.kappa.clear();
                plan.experiments.push(e);
                typed.push(false);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match plan.experiments.last_mut() {
                None => match key {
                    "master_seed" => {
                        plan.master_seed = value.parse().map_err(|e| syntax(format!("master_seed: {e}")))?;
                        seed_seen = true;
                    }
                    "workers" => plan.workers = Some(value.parse().map_err(|e| syntax(format!("workers: {e}")))?),
                    "output" => plan.output = Some(PathBuf::from(value)),
                    _ => warnings.push(format!("line {line_no}: unknown global key `{key}` ignored")),
                },
                Some(e) => match key {
                    "type" => {
                        e.kind = value.parse().map_err(syntax)?;
                        *typed.last_mut().unwrap() = true;
                        if e.kind == ExperimentKind::Horseshoe && e.kappa.is_empty() {
                            e.kappa = vec![2, 3];
                        }
                    }
                    "lattice" => e.lattice = value.parse().map_err(|_| syntax(format!("unknown lattice `{value}`")))?,
                    "trials" => e.trials = value.parse().map_err(|err| syntax(format!("trials: {err}")))?,
                    "p" => e.p = Some(value.parse().map_err(|err| syntax(format!("p: {err}")))?),
                    "n" => e.n = parse_list(value).map_err(syntax)?,
                    "m" => e.m = parse_list(value).map_err(syntax)?,
                    "rho" => e.rho = parse_list(value).map_err(syntax)?,
                    "nu" => e.nu = parse_list(value).map_err(syntax)?,
                    "l" => e.l = parse_list(value).map_err(syntax)?,
                    "kappa" => e.kappa = parse_list(value).map_err(syntax)?,
                    "arcs" => {
                        e.arcs = match value {
                            "default" => ArcMode::Default,
                            "whole" => ArcMode::Whole,
                            _ => return Err(syntax(format!("arcs must be `default` or `whole`, got `{value}`"))),
                        }
                    }
                    _ => warnings.push(format!("line {line_no}: unknown key `{key}` in [experiment {}] ignored", e.name)),
                },
            }
        }
        if !seed_seen {
            warnings.push("master_seed not given; using 0".into());
        }
        let mut errors: Vec<String> = plan
            .experiments
            .iter()
            .zip(&typed)
            .filter(|(_, t)| !**t)
            .map(|(e, _)| format!("[experiment {}] missing `type`", e.name))
            .collect();
        errors.extend(plan.validation_errors());
        if !errors.is_empty() {
            return Err(PlanError::Invalid(errors));
        }
        Ok((plan, warnings))
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.experiments.is_empty() {
            errors.push("plan has no experiments".into());
        }
        if self.workers == Some(0) {
            errors.push("workers must be at least 1".into());
        }
        for e in &self.experiments {
            e.validate(&mut errors);
        }
        errors
    }

    /// Canonical text; `parse(to_text())` gives back an equal plan.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "master_seed = {}", self.master_seed).unwrap();
        if let Some(w) = self.workers {
            writeln!(s, "workers = {w}").unwrap();
        }
        if let Some(o) = &self.output {
            writeln!(s, "output = {}", o.display()).unwrap();
        }
        for e in &self.experiments {
            s.push_str(&e.section_text());
        }
        s
    }

    /// SHA-256 over everything that affects results: the seed and the
    /// experiment sections (not workers or output), plus the artifact version.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("pivotal-lab {}\n", crate::VERSION));
        h.update(format!("master_seed = {}\n", self.master_seed));
        for e in &self.experiments {
            h.update(e.section_text());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Experiment {
    fn section_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "\n[experiment {}]", self.name).unwrap();
        writeln!(s, "type = {}", self.kind).unwrap();
        writeln!(s, "lattice = {}", self.lattice.name()).unwrap();
        writeln!(s, "trials = {}", self.trials).unwrap();
        if let Some(p) = self.p {
            writeln!(s, "p = {p:?}").unwrap();
        }
        for (key, list) in
            [("n", &self.n), ("m", &self.m), ("rho", &self.rho), ("nu", &self.nu), ("l", &self.l), ("kappa", &self.kappa)]
        {
            if !list.is_empty() {
                writeln!(s, "{key} = {}", join(list)).unwrap();
            }
        }
        if self.kind == ExperimentKind::Horseshoe {
            writeln!(s, "arcs = {}", if self.arcs == ArcMode::Whole { "whole" } else { "default" }).unwrap();
        }
        s
    }
}
