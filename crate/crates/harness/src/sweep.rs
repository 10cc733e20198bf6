//! Single-axis parameter sweeps with an aggregated summary CSV.

use std::path::Path;

use crate::config::{ExperimentConfig, HarnessError, ModelSource};
use crate::experiment::run_experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Episodes,
    CBeta,
    Dim,
    Horizon,
    SeedCount,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<Self, HarnessError> {
        match name {
            "K" => Ok(SweepAxis::Episodes),
            "c_beta" => Ok(SweepAxis::CBeta),
            "d" => Ok(SweepAxis::Dim),
            "H" => Ok(SweepAxis::Horizon),
            "seed_count" => Ok(SweepAxis::SeedCount),
            other => Err(HarnessError::Usage(format!(
                "unknown sweep axis `{other}` (expected K, c_beta, d, H, seed_count)"
            ))),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            SweepAxis::Episodes => "K",
            SweepAxis::CBeta => "c_beta",
            SweepAxis::Dim => "d",
            SweepAxis::Horizon => "H",
            SweepAxis::SeedCount => "seed_count",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    /// Mean over seeds of the per-seed mean gap over the last decile.
    pub mean_final_gap: f64,
    /// Mean over seeds of final cumulative regret.
    pub mean_cum_regret: f64,
}

fn integral(v: f64, axis: &str) -> Result<usize, HarnessError> {
    if v.fract() != 0.0 || v < 1.0 {
        return Err(HarnessError::Usage(format!(
            "sweep axis {axis} needs positive integers, got {v}"
        )));
    }
    Ok(v as usize)
}

/// One `run_experiment` per value, each under `<out>/<axis>_<value>/`, plus
/// an aggregated `sweep.csv` at the sweep root.
pub fn sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Usage("sweep: at least one value required".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut cfg = base.clone();
        match axis {
            SweepAxis::Episodes => cfg.learner.episodes = integral(v, "K")?,
            SweepAxis::CBeta => {
                if v < 0.0 {
                    return Err(HarnessError::Usage("sweep: c_beta must be >= 0".into()));
                }
                cfg.learner.c_beta = v;
            }
            SweepAxis::Dim => {
                let d = integral(v, "d")?;
                match &mut cfg.source {
                    ModelSource::Gen(spec) => spec.d = Some(d),
                    ModelSource::Path(_) => {
                        return Err(HarnessError::Usage(
                            "sweep over d requires a generator model source".into(),
                        ))
                    }
                }
            }
            SweepAxis::Horizon => {
                let h = integral(v, "H")?;
                match &mut cfg.source {
                    ModelSource::Gen(spec) => spec.horizon = h,
                    ModelSource::Path(_) => {
                        return Err(HarnessError::Usage(
                            "sweep over H requires a generator model source".into(),
                        ))
                    }
                }
            }
            SweepAxis::SeedCount => {
                let count = integral(v, "seed_count")?;
                let first = *base.seeds.first().unwrap_or(&0);
                cfg.seeds = (0..count as u64).map(|i| first + i).collect();
            }
        }
        let tag = if v.fract() == 0.0 {
            format!("{}", v as i64)
        } else {
            format!("{v}")
        };
        cfg.out_dir = base.out_dir.join(format!("{}_{}", axis.label(), tag));
        let out = run_experiment(&cfg)?;
        let k = out.seeds.len() as f64;
        rows.push(SweepRow {
            value: v,
            mean_final_gap: out
                .seeds
                .iter()
                .map(|s| s.summary.mean_gap_last_decile)
                .sum::<f64>()
                / k,
            mean_cum_regret: out
                .seeds
                .iter()
                .map(|s| s.summary.final_cum_regret)
                .sum::<f64>()
                / k,
        });
    }
    write_sweep_csv(&rows, axis, &base.out_dir)?;
    Ok(rows)
}

fn write_sweep_csv(rows: &[SweepRow], axis: SweepAxis, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    w.write_record(["axis", "value", "mean_final_gap", "mean_cum_regret"])?;
    for r in rows {
        w.write_record([
            axis.label().to_string(),
            format!("{}", r.value),
            format!("{}", r.mean_final_gap),
            format!("{}", r.mean_cum_regret),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::AuditToggles;
    use crate::config::GenSpec;
    use nqovi_core::nqovi::LearnerConfig;

    fn base(dir: &Path) -> ExperimentConfig {
        let mut learner = LearnerConfig::default();
        learner.episodes = 4;
        learner.c_beta = 0.3;
        ExperimentConfig {
            source: ModelSource::Gen(GenSpec::parse("S=2,A=2x2,H=2,n=2,kind=one_hot").unwrap()),
            learner,
            seeds: vec![1],
            cadence: Some(1),
            out_dir: dir.to_path_buf(),
            audits: AuditToggles::default(),
            audit_samples: 0,
        }
    }

    #[test]
    fn c_beta_sweep_emits_one_row_per_value() {
        let dir = tempfile::tempdir().unwrap();
        let rows = sweep(&base(dir.path()), SweepAxis::CBeta, &[0.01, 0.1, 1.0]).unwrap();
        assert_eq!(rows.len(), 3);
        let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn empty_values_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = sweep(&base(dir.path()), SweepAxis::Episodes, &[]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_axis_is_a_usage_error() {
        let err = SweepAxis::parse("gamma").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn d_sweep_requires_generator_source() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = base(dir.path());
        cfg.source = ModelSource::Path(dir.path().join("missing.json"));
        let err = sweep(&cfg, SweepAxis::Dim, &[4.0]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
