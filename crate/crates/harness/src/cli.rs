//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, 3 audit failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use nqovi_core::linear_mg::{to_json, validate};
use nqovi_core::nqovi::LearnerConfig;

use crate::audit::{audit, AuditToggles};
use crate::baseline::baseline_lsvi_ucb;
use crate::config::{ExperimentConfig, GenSpec, HarnessError, ModelSource};
use crate::experiment::run_experiment;
use crate::record_io::{load_record, save_record, write_trajectories};
use crate::sweep::{sweep, SweepAxis};

#[derive(Parser)]
#[command(name = "nqovi", about = "Nash Q-learning with optimistic value iteration on linear Markov games", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Model JSON file.
    #[arg(long, conflicts_with = "gen")]
    model: Option<PathBuf>,
    /// Generator spec, e.g. "d=8,S=4,A=2x2,H=3,n=2" (add kind=one_hot for a
    /// tabular embedding).
    #[arg(long)]
    gen: Option<String>,
}

impl ModelArgs {
    fn source(&self) -> Result<ModelSource, HarnessError> {
        match (&self.model, &self.gen) {
            (Some(path), None) => Ok(ModelSource::Path(path.clone())),
            (None, Some(spec)) => Ok(ModelSource::Gen(GenSpec::parse(spec)?)),
            _ => Err(HarnessError::Usage(
                "exactly one of --model or --gen is required".into(),
            )),
        }
    }
}

#[derive(Args)]
struct LearnerArgs {
    /// Number of episodes K.
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    /// Bonus-scale constant in beta = c_beta * d * H * sqrt(iota).
    #[arg(long, default_value_t = 1.0)]
    c_beta: f64,
    /// Explicit bonus scale; overrides c_beta.
    #[arg(long)]
    beta: Option<f64>,
    /// Ridge regularizer.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Confidence level in iota = ln(dKH/delta).
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Comma-separated seed list.
    #[arg(long, default_value = "0", value_delimiter = ',')]
    seed: Vec<u64>,
}

impl LearnerArgs {
    fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            episodes: self.episodes,
            lambda: self.lambda,
            c_beta: self.c_beta,
            beta_override: self.beta,
            delta: self.delta,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random model and write its JSON document.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the learner across seeds and measure Nash-gap regret.
    Run {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        /// Gap-evaluation cadence (default: every episode up to K=2000).
        #[arg(long)]
        cadence: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated audits: weight_bound, elliptical, optimism,
        /// collapse (or deterministic / all).
        #[arg(long)]
        audits: Option<String>,
        /// Optimism-audit sample budget.
        #[arg(long, default_value_t = 10_000)]
        audit_samples: usize,
    },
    /// Audit a stored run record against a model.
    Audit {
        /// Run-record JSON written by `run`.
        #[arg(long)]
        record: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Seed for a generated model (defaults to the record's seed).
        #[arg(long)]
        model_seed: Option<u64>,
        #[arg(long, default_value = "deterministic")]
        audits: String,
        #[arg(long, default_value_t = 10_000)]
        audit_samples: usize,
    },
    /// Sweep one parameter axis, one experiment per value.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        /// Axis: K, c_beta, d, H or seed_count.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        cadence: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the single-agent LSVI-UCB reference.
    Baseline {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn experiment_config(
    model: &ModelArgs,
    learner: &LearnerArgs,
    cadence: Option<usize>,
    out: &PathBuf,
    audits: AuditToggles,
    audit_samples: usize,
) -> Result<ExperimentConfig, HarnessError> {
    Ok(ExperimentConfig {
        source: model.source()?,
        learner: learner.learner(),
        seeds: learner.seed.clone(),
        cadence,
        out_dir: out.clone(),
        audits,
        audit_samples,
    })
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Generate { model, seed, out } => {
            let source = model.source()?;
            let mg = source.load(seed)?;
            let report = validate(&mg);
            std::fs::write(&out, to_json(&mg)?)?;
            println!(
                "wrote {} (d={}, |S|={}, H={}, n={}, max row-sum deviation {:.3e})",
                out.display(),
                mg.dim(),
                mg.num_states,
                mg.horizon,
                mg.num_agents,
                report.max_row_sum_deviation
            );
            Ok(())
        }
        Command::Run {
            model,
            learner,
            cadence,
            out,
            audits,
            audit_samples,
        } => {
            let toggles = match &audits {
                Some(list) => AuditToggles::parse(list)?,
                None => AuditToggles::default(),
            };
            let cfg = experiment_config(&model, &learner, cadence, &out, toggles, audit_samples)?;
            let output = run_experiment(&cfg)?;
            for s in &output.seeds {
                println!(
                    "seed {}: K={} cadence={} final cum regret {:.6} mean gap (last 10%) {:.6}",
                    s.seed,
                    s.summary.episodes,
                    output.cadence,
                    s.summary.final_cum_regret,
                    s.summary.mean_gap_last_decile
                );
                if let Some(r) = &s.audit {
                    println!("seed {}: audits passed = {}", s.seed, r.passed());
                }
            }
            Ok(())
        }
        Command::Audit {
            record,
            model,
            model_seed,
            audits,
            audit_samples,
        } => {
            let rec = load_record(&record)?;
            let source = model.source()?;
            let mg = source.load(model_seed.unwrap_or(rec.config.seed))?;
            let toggles = AuditToggles::parse(&audits)?;
            if !toggles.any() {
                return Err(HarnessError::Usage("no audits selected".into()));
            }
            let report = audit(&rec, &mg, &toggles, audit_samples)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if report.passed() {
                Ok(())
            } else {
                Err(HarnessError::Audit("one or more audits failed".into()))
            }
        }
        Command::Sweep {
            model,
            learner,
            axis,
            values,
            cadence,
            out,
        } => {
            let axis = SweepAxis::parse(&axis)?;
            let cfg = experiment_config(
                &model,
                &learner,
                cadence,
                &out,
                AuditToggles::default(),
                0,
            )?;
            let rows = sweep(&cfg, axis, &values)?;
            for r in &rows {
                println!(
                    "value {}: mean final gap {:.6}, mean cum regret {:.6}",
                    r.value, r.mean_final_gap, r.mean_cum_regret
                );
            }
            Ok(())
        }
        Command::Baseline {
            model,
            learner,
            out,
        } => {
            let source = model.source()?;
            let seeds = learner.seed.clone();
            let mg = source.load(*seeds.first().unwrap_or(&0))?;
            std::fs::create_dir_all(&out)?;
            for seed in seeds {
                let mut cfg = learner.learner();
                cfg.seed = seed;
                cfg.full_policy_every = None;
                let rec = baseline_lsvi_ucb(&mg, &cfg)?;
                save_record(&rec, &out.join(format!("baseline_record_seed{seed}.json")))?;
                write_trajectories(&rec, &out.join(format!("baseline_traj_seed{seed}.csv")))?;
                let total: f64 = rec
                    .trajectories
                    .iter()
                    .map(|t| t.rewards.iter().map(|r| r[0]).sum::<f64>())
                    .sum();
                println!(
                    "seed {seed}: K={} total reward {:.6}",
                    rec.trajectories.len(),
                    total
                );
            }
            Ok(())
        }
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
