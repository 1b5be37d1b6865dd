use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pivotal_core::features::{exploration_walk, highest_crossing, lowest_crossing};
use pivotal_core::lattice::{BoxRegion, LatticeKind};
use pivotal_core::rng::TrialKey;
use pivotal_core::sampling::{critical_p, sample};
use pivotal_lab::formats::{write_config, write_path};
use pivotal_lab::oracle::{run_duality_suite, run_oracle_suite};
use pivotal_lab::run::WORKERS_ENV;
use pivotal_lab::{report, report_all, run_plan, Claim, Dataset, Plan, RunOptions, Thresholds};

#[derive(Parser)]
#[command(name = "pivotal", version, about = "Pivotal-site experiments for critical site percolation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan file utilities.
    Plan {
        #[command(subcommand)]
        cmd: PlanCmd,
    },
    /// Run a plan.
    Run {
        plan: PathBuf,
        /// Output directory (defaults to the plan's `output`, then `runs/<stem>`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Keep trials already written by an interrupted run of the same plan.
        #[arg(long)]
        resume: bool,
    },
    /// Write report.txt and report.json for a finished run.
    Report {
        dir: PathBuf,
        /// One claim; all answerable claims when omitted.
        #[arg(long)]
        claim: Option<Claim>,
        /// Restrict to one experiment section.
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Compare fast observables against brute-force definitions.
    Oracle {
        #[arg(long, default_value = "triangular", value_parser = parse_lattice)]
        lattice: LatticeKind,
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        configs: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print one sampled configuration and its crossings.
    DumpConfig {
        #[arg(long, default_value = "triangular", value_parser = parse_lattice)]
        lattice: LatticeKind,
        #[arg(long, default_value_t = 8)]
        n: u32,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Also print lowest, highest and exploration paths.
        #[arg(long)]
        paths: bool,
    },
}

#[derive(Subcommand)]
enum PlanCmd {
    /// Parse and validate, printing the canonical form and digest.
    Validate { file: PathBuf },
}

fn parse_lattice(s: &str) -> Result<LatticeKind, String> {
    s.parse().map_err(|_| format!("unknown lattice `{s}`"))
}

fn load_plan(path: &PathBuf) -> Result<Plan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (plan, warnings) = Plan::parse(&text)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(plan)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Plan { cmd: PlanCmd::Validate { file } } => {
            let plan = load_plan(&file)?;
            print!("{}", plan.to_text());
            println!("# digest {}", plan.digest());
        }
        Cmd::Run { plan: path, out, workers, resume } => {
            let plan = load_plan(&path)?;
            let out = out.or_else(|| plan.output.clone()).unwrap_or_else(|| {
                PathBuf::from("runs").join(path.file_stem().map(|s| s.to_owned()).unwrap_or_else(|| "run".into()))
            });
            let s = run_plan(&plan, &out, &RunOptions { workers, resume, max_new_trials: None })?;
            println!(
                "{}: {} rows ({} new, {} reused), digest {}",
                s.out_dir.display(),
                s.manifest.rows_total,
                s.new_trials,
                s.reused_trials,
                s.manifest.plan_digest
            );
        }
        Cmd::Report { dir, claim, experiment } => {
            let ds = Dataset::load(&dir)?;
            let t = Thresholds::default();
            let reports = match claim {
                Some(c) => vec![report(&ds, c, &t, experiment.as_deref())?],
                None if experiment.is_some() => bail!("--experiment needs --claim"),
                None => report_all(&ds, &t),
            };
            if reports.is_empty() {
                bail!("no claim can be evaluated from {}", dir.display());
            }
            let text: String = reports.iter().map(|r| r.to_text()).collect();
            fs::write(dir.join("report.txt"), &text)?;
            fs::write(dir.join("report.json"), serde_json::to_string_pretty(&reports)?)?;
            print!("{text}");
            if !reports.iter().all(|r| r.passed()) {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Oracle { lattice, n, configs, seed } => {
            let s = run_oracle_suite(lattice, n, configs, seed);
            let dual = run_duality_suite(lattice, n + 2, configs * 10, seed);
            println!("{}", serde_json::to_string_pretty(&s)?);
            println!("duality violations on B({}) over {} configs: {dual}", n + 2, configs * 10);
            if s.mismatches() + dual > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::DumpConfig { lattice, n, p, seed, trial, paths } => {
            let c = sample(lattice, BoxRegion::centered(n), p.unwrap_or(critical_p(lattice)), TrialKey::new(seed, 0, trial))?;
            print!("{}", write_config(&c));
            if paths {
                for path in [lowest_crossing(&c), highest_crossing(&c)].into_iter().flatten() {
                    print!("{}", write_path(&path));
                }
                if let Ok(w) = exploration_walk(&c) {
                    print!("{}", write_path(&w.path));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
