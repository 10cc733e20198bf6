//! Invariant audits over completed runs.
//!
//! The deterministic audits (weight-norm bound, elliptical potential, Gram
//! inverse drift) must never fail on a correct implementation; a failure is a
//! build-breaking signal. The optimism audit is statistical and reports a
//! satisfaction rate over sampled tuples.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use nqovi_core::nqovi::{optimistic_q_value, GramState, RunRecord};
use nqovi_core::oracle::{best_response_value, JointPolicy};
use nqovi_core::rng::stream_rng;
use nqovi_core::LinearMG;
use rand::Rng;

use crate::baseline::baseline_lsvi_ucb;
use crate::config::HarnessError;

pub const WEIGHT_BOUND_SLACK: f64 = 1e-8;
pub const ELLIPTICAL_SLACK: f64 = 1e-6;
pub const DRIFT_AT_REFRESH: f64 = 1e-8;
pub const DRIFT_BETWEEN: f64 = 1e-6;
pub const OPTIMISM_SLACK: f64 = 1e-9;
pub const OPTIMISM_MIN_RATE: f64 = 0.99;
pub const COLLAPSE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditToggles {
    pub weight_bound: bool,
    pub elliptical: bool,
    pub optimism: bool,
    pub collapse: bool,
}

impl AuditToggles {
    pub fn deterministic() -> Self {
        Self {
            weight_bound: true,
            elliptical: true,
            optimism: false,
            collapse: false,
        }
    }

    pub fn any(&self) -> bool {
        self.weight_bound || self.elliptical || self.optimism || self.collapse
    }

    /// Parse a comma-separated list like `weight_bound,elliptical`.
    /// `all` and `deterministic` are accepted as shorthands.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut t = Self::default();
        for name in text.split(',') {
            match name.trim() {
                "" => {}
                "weight_bound" => t.weight_bound = true,
                "elliptical" => t.elliptical = true,
                "optimism" => t.optimism = true,
                "collapse" => t.collapse = true,
                "deterministic" => {
                    t.weight_bound = true;
                    t.elliptical = true;
                }
                "all" => {
                    t.weight_bound = true;
                    t.elliptical = true;
                    t.optimism = true;
                    t.collapse = true;
                }
                other => {
                    return Err(HarnessError::Usage(format!(
                        "unknown audit `{other}` (expected weight_bound, elliptical, optimism, collapse, deterministic, all)"
                    )))
                }
            }
        }
        Ok(t)
    }
}

/// One audit's verdict. For deterministic audits `worst_margin` is the exact
/// slack left under the bound (negative means violated); for the optimism
/// audit it is the satisfaction rate minus the required rate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub pass: bool,
    pub worst_margin: f64,
    pub checked: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimismOutcome {
    pub pass: bool,
    pub rate: f64,
    pub satisfied: usize,
    pub checked: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub weight_bound: Option<AuditOutcome>,
    pub elliptical: Option<AuditOutcome>,
    /// Always reported; the run already tracked its own drift.
    pub gram_drift: AuditOutcome,
    pub optimism: Option<OptimismOutcome>,
    pub collapse: Option<AuditOutcome>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.gram_drift.pass
            && self.weight_bound.map(|o| o.pass).unwrap_or(true)
            && self.elliptical.map(|o| o.pass).unwrap_or(true)
            && self.optimism.as_ref().map(|o| o.pass).unwrap_or(true)
            && self.collapse.map(|o| o.pass).unwrap_or(true)
    }
}

fn weight_bound_audit(record: &RunRecord) -> AuditOutcome {
    let d = record.dim as f64;
    let h_f = record.horizon as f64;
    let lambda = record.config.lambda;
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for (k0, per_h) in record.weights.iter().enumerate() {
        let bound = (1.0 + h_f) * (d * k0 as f64 / lambda).sqrt();
        for per_i in per_h {
            for w in per_i {
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                worst = worst.min(bound - norm);
                checked += 1;
            }
        }
    }
    AuditOutcome {
        pass: worst >= -WEIGHT_BOUND_SLACK,
        worst_margin: worst,
        checked,
    }
}

/// Per-step feature vectors at the realized `(x, a)` of each episode.
fn realized_features(record: &RunRecord, mg: &LinearMG) -> Result<Vec<Vec<DVector<f64>>>, HarnessError> {
    let mut out = vec![Vec::with_capacity(record.trajectories.len()); record.horizon];
    for traj in &record.trajectories {
        for h in 0..record.horizon {
            out[h].push(DVector::from_vec(
                mg.feature(traj.states[h], traj.joint_actions[h])?,
            ));
        }
    }
    Ok(out)
}

/// Recomputes `sum_k phi_k^T (Lambda^k)^-1 phi_k` per step with direct
/// inversion every episode, independent of the learner's incremental state.
fn elliptical_audit(record: &RunRecord, mg: &LinearMG) -> Result<AuditOutcome, HarnessError> {
    if (record.config.lambda - 1.0).abs() > 1e-12 {
        return Err(HarnessError::Validation(
            "elliptical audit requires lambda = 1".into(),
        ));
    }
    let d = record.dim;
    let k_total = record.trajectories.len();
    let bound = 2.0 * d as f64 * ((k_total as f64) + 1.0).ln();
    let features = realized_features(record, mg)?;
    let mut worst = f64::INFINITY;
    for per_k in &features {
        let mut gram = DMatrix::<f64>::identity(d, d);
        let mut total = 0.0;
        for phi in per_k {
            let inv = gram.clone().try_inverse().ok_or_else(|| {
                HarnessError::Validation("audit Gram matrix not invertible".into())
            })?;
            total += phi.dot(&(&inv * phi));
            gram.ger(1.0, phi, phi, 1.0);
        }
        worst = worst.min(bound - total);
    }
    Ok(AuditOutcome {
        pass: worst >= -ELLIPTICAL_SLACK,
        worst_margin: worst,
        checked: record.horizon * k_total,
    })
}

fn drift_audit(record: &RunRecord) -> AuditOutcome {
    let margin_refresh = DRIFT_AT_REFRESH - record.gram_drift_at_refresh;
    let margin_between = DRIFT_BETWEEN - record.gram_drift_between;
    AuditOutcome {
        pass: margin_refresh >= 0.0 && margin_between >= 0.0,
        worst_margin: margin_refresh.min(margin_between),
        checked: 2,
    }
}

/// Samples `(i, x, a, h, k)` tuples over the episodes with recorded full
/// policies and checks `Q^{i,k}_h(x,a) >= Q^{i,br,pi_{-i}}_h(x,a) - slack`.
fn optimism_audit(
    record: &RunRecord,
    mg: &LinearMG,
    samples: usize,
) -> Result<OptimismOutcome, HarnessError> {
    if record.full_policies.is_empty() {
        return Err(HarnessError::Validation(
            "optimism audit requires recorded full policies (set a recording cadence)".into(),
        ));
    }
    if samples == 0 {
        return Err(HarnessError::Validation(
            "optimism audit requires a positive sample budget".into(),
        ));
    }
    let n = record.num_agents;
    let num_joint = mg.num_joint_actions();
    let features = realized_features(record, mg)?;

    // Tuples first, then grouped by episode so Gram states and best
    // responses are built once per episode in increasing k.
    let mut rng = stream_rng(record.config.seed, "audit-sampling");
    let mut by_episode: Vec<Vec<(usize, usize, usize, usize)>> =
        vec![Vec::new(); record.full_policies.len()];
    for _ in 0..samples {
        let slot = rng.gen_range(0..record.full_policies.len());
        let i = rng.gen_range(0..n);
        let h = rng.gen_range(0..record.horizon);
        let x = rng.gen_range(0..mg.num_states);
        let a = rng.gen_range(0..num_joint);
        by_episode[slot].push((i, h, x, a));
    }

    let mut grams: Vec<GramState> = (0..record.horizon)
        .map(|_| GramState::new(record.dim, record.config.lambda, usize::MAX))
        .collect();
    let mut folded = 0usize; // episodes already in the Gram states

    let mut satisfied = 0usize;
    let mut checked = 0usize;
    for (slot, (k, policy)) in record.full_policies.iter().enumerate() {
        if by_episode[slot].is_empty() {
            continue;
        }
        while folded + 1 < *k {
            for h in 0..record.horizon {
                grams[h].update(&features[h][folded])?;
            }
            folded += 1;
        }
        for h in 0..record.horizon {
            grams[h].refresh()?;
        }
        let joint = JointPolicy {
            profiles: policy.clone(),
        };
        let responses: Vec<_> = (0..n)
            .map(|i| best_response_value(mg, i, &joint))
            .collect::<Result<_, _>>()?;
        for &(i, h, x, a) in &by_episode[slot] {
            let w = DVector::from_vec(record.weights[*k - 1][h][i].clone());
            let phi = DVector::from_vec(mg.feature(x, a)?);
            let q = optimistic_q_value(&w, record.beta, &grams[h], &phi, record.horizon)?;
            let target = responses[i].q_joint(mg, h, x, a);
            if q >= target - OPTIMISM_SLACK {
                satisfied += 1;
            }
            checked += 1;
        }
    }
    let rate = satisfied as f64 / checked as f64;
    Ok(OptimismOutcome {
        pass: rate >= OPTIMISM_MIN_RATE,
        rate,
        satisfied,
        checked,
    })
}

/// Re-runs the independent LSVI-UCB reference on the same model and config
/// and compares realized sequences and weights entrywise.
fn collapse_audit(record: &RunRecord, mg: &LinearMG) -> Result<AuditOutcome, HarnessError> {
    if record.num_agents != 1 {
        return Err(HarnessError::Validation(
            "collapse audit applies only to single-agent runs".into(),
        ));
    }
    let reference = baseline_lsvi_ucb(mg, &record.config)?;
    let mut worst = f64::INFINITY;
    let mut checked = 0usize;
    let mut pass = true;
    for k in 0..record.trajectories.len() {
        if record.trajectories[k].states != reference.trajectories[k].states
            || record.trajectories[k].joint_actions != reference.trajectories[k].joint_actions
        {
            pass = false;
        }
        for h in 0..record.horizon {
            for (a, b) in record.weights[k][h][0].iter().zip(&reference.weights[k][h][0]) {
                worst = worst.min(COLLAPSE_TOL - (a - b).abs());
                checked += 1;
            }
        }
    }
    Ok(AuditOutcome {
        pass: pass && worst >= 0.0,
        worst_margin: worst,
        checked,
    })
}

pub fn audit(
    record: &RunRecord,
    mg: &LinearMG,
    toggles: &AuditToggles,
    optimism_samples: usize,
) -> Result<AuditReport, HarnessError> {
    Ok(AuditReport {
        weight_bound: toggles.weight_bound.then(|| weight_bound_audit(record)),
        elliptical: toggles
            .elliptical
            .then(|| elliptical_audit(record, mg))
            .transpose()?,
        gram_drift: drift_audit(record),
        optimism: toggles
            .optimism
            .then(|| optimism_audit(record, mg, optimism_samples))
            .transpose()?,
        collapse: toggles
            .collapse
            .then(|| collapse_audit(record, mg))
            .transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nqovi_core::linear_mg::{random_linear_mg, random_tabular_mg};
    use nqovi_core::nqovi::{run, LearnerConfig};

    #[test]
    fn toggles_parse() {
        let t = AuditToggles::parse("weight_bound,elliptical").unwrap();
        assert!(t.weight_bound && t.elliptical && !t.optimism && !t.collapse);
        assert_eq!(AuditToggles::parse("all").unwrap(), AuditToggles {
            weight_bound: true,
            elliptical: true,
            optimism: true,
            collapse: true,
        });
        assert!(AuditToggles::parse("weightbound").is_err());
    }

    #[test]
    fn deterministic_audits_pass_on_a_run() {
        let (mg, _) = random_linear_mg(7, 4, 3, &[2, 2], 3, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 40,
            c_beta: 0.2,
            seed: 4,
            full_policy_every: None,
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        let report = audit(&rec, &mg, &AuditToggles::deterministic(), 0).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.weight_bound.unwrap().worst_margin >= 0.0);
        assert!(report.elliptical.unwrap().worst_margin >= 0.0);
    }

    #[test]
    fn optimism_audit_needs_full_policies() {
        let (mg, _) = random_tabular_mg(2, 2, &[2, 2], 2, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 5,
            seed: 1,
            full_policy_every: None,
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        let toggles = AuditToggles {
            optimism: true,
            ..Default::default()
        };
        let err = audit(&rec, &mg, &toggles, 100).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn optimism_holds_with_theoretical_beta() {
        let (mg, _) = random_tabular_mg(21, 2, &[2, 2], 2, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 15,
            c_beta: 1.0,
            seed: 21,
            full_policy_every: Some(1),
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        let toggles = AuditToggles {
            optimism: true,
            ..Default::default()
        };
        let report = audit(&rec, &mg, &toggles, 500).unwrap();
        let opt = report.optimism.unwrap();
        assert_eq!(opt.checked, 500);
        assert!(opt.pass, "rate = {}", opt.rate);
    }

    #[test]
    fn collapse_audit_passes_for_single_agent_runs() {
        let (mg, _) = random_linear_mg(13, 4, 2, &[3], 3, 1).unwrap();
        let cfg = LearnerConfig {
            episodes: 20,
            c_beta: 0.3,
            seed: 8,
            full_policy_every: None,
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        let toggles = AuditToggles {
            collapse: true,
            ..Default::default()
        };
        let report = audit(&rec, &mg, &toggles, 0).unwrap();
        assert!(report.collapse.unwrap().pass);
    }

    #[test]
    fn collapse_audit_rejects_multi_agent_runs() {
        let (mg, _) = random_tabular_mg(2, 2, &[2, 2], 2, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 3,
            seed: 1,
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        let toggles = AuditToggles {
            collapse: true,
            ..Default::default()
        };
        assert!(audit(&rec, &mg, &toggles, 0).is_err());
    }
}
