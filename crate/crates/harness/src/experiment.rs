//! Experiment orchestration: seeded runs, Nash-gap measurement at a cadence,
//! and CSV/JSON/SVG persistence.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use nqovi_core::nqovi::{run, RunRecord};
use nqovi_core::oracle::{evaluate_policy, nash_gap, JointPolicy};
use nqovi_core::LinearMG;

use crate::audit::{audit, AuditReport};
use crate::config::{ExperimentConfig, HarnessError, ModelSource};
use crate::record_io::save_record;
use crate::svg::regret_chart;

/// One evaluated row of the regret series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapPoint {
    pub episode: usize,
    pub nash_gap: f64,
    pub cum_regret: f64,
    pub max_bonus: f64,
    pub stage_solver_max_eps: f64,
}

/// Per-seed JSON summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub episodes: usize,
    pub cadence: usize,
    pub beta: f64,
    pub final_cum_regret: f64,
    /// Mean Nash gap over the last 10% of evaluated episodes.
    pub mean_gap_last_decile: f64,
    pub mean_gap_first_decile: f64,
    pub stage_solver_max_eps: f64,
    pub solver_non_convergences: usize,
    pub wall_ms_total: u128,
}

pub struct SeedOutput {
    pub seed: u64,
    pub record: RunRecord,
    pub gaps: Vec<GapPoint>,
    pub summary: SeedSummary,
    pub audit: Option<AuditReport>,
}

pub struct ExperimentOutput {
    pub model: LinearMG,
    pub cadence: usize,
    pub seeds: Vec<SeedOutput>,
    /// Files written, for reporting.
    pub files: Vec<PathBuf>,
}

fn decile_mean(gaps: &[GapPoint], from_tail: bool) -> f64 {
    if gaps.is_empty() {
        return 0.0;
    }
    let w = (gaps.len() / 10).max(1);
    let slice = if from_tail {
        &gaps[gaps.len() - w..]
    } else {
        &gaps[..w]
    };
    slice.iter().map(|g| g.nash_gap).sum::<f64>() / w as f64
}

/// Evaluate the recorded full policies into a regret series.
///
/// Each recorded episode contributes its gap once per `cadence` episodes, so
/// the cumulative column approximates the full sum when cadence > 1 and is
/// exact at cadence 1.
pub fn evaluate_gaps(
    mg: &LinearMG,
    record: &RunRecord,
    cadence: usize,
) -> Result<Vec<GapPoint>, HarnessError> {
    let mut out = Vec::with_capacity(record.full_policies.len());
    let mut cum = 0.0;
    for (k, policy) in &record.full_policies {
        let joint = JointPolicy {
            profiles: policy.clone(),
        };
        let gap = nash_gap(mg, &joint)?;
        cum += gap * cadence as f64;
        let summary = &record.summaries[*k - 1];
        out.push(GapPoint {
            episode: *k,
            nash_gap: gap,
            cum_regret: cum,
            max_bonus: summary.max_bonus,
            stage_solver_max_eps: summary.stage_solver_max_eps,
        });
    }
    Ok(out)
}

fn write_gap_csv(
    gaps: &[GapPoint],
    wall_ms: &[u128],
    path: &std::path::Path,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "episode",
        "nash_gap",
        "cum_regret",
        "max_bonus",
        "stage_solver_max_eps",
        "wall_ms",
    ])?;
    for (g, ms) in gaps.iter().zip(wall_ms) {
        w.write_record([
            g.episode.to_string(),
            format!("{}", g.nash_gap),
            format!("{}", g.cum_regret),
            format!("{}", g.max_bonus),
            format!("{}", g.stage_solver_max_eps),
            ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Run the full experiment: one learner run per seed, gap evaluation at the
/// configured cadence, and per-seed regret CSV, summary JSON, run-record JSON
/// and SVG chart under the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    cfg.check()?;
    let cadence = cfg.resolved_cadence();
    let mg = cfg.source.load(cfg.seeds[0])?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut files = Vec::new();
    if let ModelSource::Gen(_) = cfg.source {
        let path = cfg.out_dir.join("model.json");
        std::fs::write(&path, nqovi_core::linear_mg::to_json(&mg)?)?;
        files.push(path);
    }

    let mut seeds = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let started = Instant::now();
        let mut learner = cfg.learner.clone();
        learner.seed = seed;
        learner.full_policy_every = Some(cadence);
        let record = run(&mg, &learner)?;
        let gaps = evaluate_gaps(&mg, &record, cadence)?;
        // Wall clock is cumulative from run start at each evaluated row;
        // identical reruns differ only in this column.
        let total_ms = started.elapsed().as_millis();
        let wall_ms: Vec<u128> = gaps
            .iter()
            .map(|g| total_ms * g.episode as u128 / record.config.episodes.max(1) as u128)
            .collect();

        let report = if cfg.audits.any() {
            let r = audit(&record, &mg, &cfg.audits, cfg.audit_samples)?;
            if !r.passed() {
                return Err(HarnessError::Audit(format!(
                    "audit failed for seed {seed}: {r:?}"
                )));
            }
            Some(r)
        } else {
            None
        };

        let summary = SeedSummary {
            seed,
            episodes: learner.episodes,
            cadence,
            beta: record.beta,
            final_cum_regret: gaps.last().map(|g| g.cum_regret).unwrap_or(0.0),
            mean_gap_last_decile: decile_mean(&gaps, true),
            mean_gap_first_decile: decile_mean(&gaps, false),
            stage_solver_max_eps: record
                .summaries
                .iter()
                .map(|s| s.stage_solver_max_eps)
                .fold(0.0, f64::max),
            solver_non_convergences: record
                .summaries
                .iter()
                .map(|s| s.solver_non_convergences)
                .sum(),
            wall_ms_total: total_ms,
        };

        let csv_path = cfg.out_dir.join(format!("regret_seed{seed}.csv"));
        write_gap_csv(&gaps, &wall_ms, &csv_path)?;
        files.push(csv_path);

        let summary_path = cfg.out_dir.join(format!("summary_seed{seed}.json"));
        std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
        files.push(summary_path);

        let record_path = cfg.out_dir.join(format!("record_seed{seed}.json"));
        save_record(&record, &record_path)?;
        files.push(record_path);

        let svg_path = cfg.out_dir.join(format!("regret_seed{seed}.svg"));
        let episodes: Vec<usize> = gaps.iter().map(|g| g.episode).collect();
        let gap_series: Vec<f64> = gaps.iter().map(|g| g.nash_gap).collect();
        let cum_series: Vec<f64> = gaps.iter().map(|g| g.cum_regret).collect();
        std::fs::write(&svg_path, regret_chart(&episodes, &gap_series, &cum_series))?;
        files.push(svg_path);

        if let Some(r) = &report {
            let audit_path = cfg.out_dir.join(format!("audit_seed{seed}.json"));
            std::fs::write(&audit_path, serde_json::to_string_pretty(r)?)?;
            files.push(audit_path);
        }

        seeds.push(SeedOutput {
            seed,
            record,
            gaps,
            summary,
            audit: report,
        });
    }

    // Sanity check shared with the oracle contract: V values computed along
    // the way stay within [0, H]; evaluate once on the last recorded policy.
    if let Some(last) = seeds.last() {
        if let Some((_, policy)) = last.record.full_policies.last() {
            let joint = JointPolicy {
                profiles: policy.clone(),
            };
            let table = evaluate_policy(&mg, &joint)?;
            let h_f = mg.horizon as f64;
            for per_agent in &table.v {
                for per_h in per_agent {
                    for &v in per_h {
                        if !(-1e-9..=h_f + 1e-9).contains(&v) {
                            return Err(HarnessError::Validation(format!(
                                "policy value {v} escapes [0, H]"
                            )));
                        }
                    }
                }
            }
        }
    }

    Ok(ExperimentOutput {
        model: mg,
        cadence,
        seeds,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::AuditToggles;
    use crate::config::GenSpec;

    fn base_config(dir: &std::path::Path) -> ExperimentConfig {
        let mut learner = nqovi_core::nqovi::LearnerConfig::default();
        learner.episodes = 8;
        learner.c_beta = 0.3;
        ExperimentConfig {
            source: ModelSource::Gen(GenSpec::parse("S=2,A=2x2,H=2,n=2,kind=one_hot").unwrap()),
            learner,
            seeds: vec![3],
            cadence: Some(1),
            out_dir: dir.to_path_buf(),
            audits: AuditToggles::default(),
            audit_samples: 0,
        }
    }

    #[test]
    fn csv_row_count_matches_cadence() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = base_config(dir.path());
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.seeds[0].gaps.len(), 8);
        let csv = std::fs::read_to_string(dir.path().join("regret_seed3.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 8);

        let dir2 = tempfile::tempdir().unwrap();
        let mut cfg2 = base_config(dir2.path());
        cfg2.cadence = Some(2);
        let out2 = run_experiment(&cfg2).unwrap();
        assert_eq!(out2.seeds[0].gaps.len(), 4);
    }

    #[test]
    fn gaps_are_nonnegative_and_cumulative() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&base_config(dir.path())).unwrap();
        let gaps = &out.seeds[0].gaps;
        let mut cum = 0.0;
        for g in gaps {
            assert!(g.nash_gap >= -1e-9);
            cum += g.nash_gap;
            assert!((g.cum_regret - cum).abs() <= 1e-9);
        }
    }

    #[test]
    fn outputs_are_deterministic_modulo_wall_time() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_experiment(&base_config(dir_a.path())).unwrap();
        run_experiment(&base_config(dir_b.path())).unwrap();
        for name in [
            "model.json",
            "summary_seed3.json",
            "record_seed3.json",
            "regret_seed3.svg",
        ] {
            let a = std::fs::read_to_string(dir_a.path().join(name)).unwrap();
            let b = std::fs::read_to_string(dir_b.path().join(name)).unwrap();
            // The summary carries wall time; compare it field-stripped.
            if name.starts_with("summary") {
                let strip = |t: &str| -> String {
                    t.lines()
                        .filter(|l| !l.contains("wall_ms"))
                        .collect::<Vec<_>>()
                        .join("\n")
                };
                assert_eq!(strip(&a), strip(&b));
            } else {
                assert_eq!(a, b, "{name}");
            }
        }
        let strip_wall = |t: &str| -> String {
            t.lines()
                .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = std::fs::read_to_string(dir_a.path().join("regret_seed3.csv")).unwrap();
        let b = std::fs::read_to_string(dir_b.path().join("regret_seed3.csv")).unwrap();
        assert_eq!(strip_wall(&a), strip_wall(&b));
    }

    #[test]
    fn two_seeds_write_two_csvs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = base_config(dir.path());
        cfg.seeds = vec![1, 2];
        run_experiment(&cfg).unwrap();
        let a = std::fs::read_to_string(dir.path().join("regret_seed1.csv")).unwrap();
        let b = std::fs::read_to_string(dir.path().join("regret_seed2.csv")).unwrap();
        assert_eq!(a.lines().next(), b.lines().next());
    }
}
