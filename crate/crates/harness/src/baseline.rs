//! Single-agent LSVI-UCB reference.
//!
//! Independent of the learner's stage-game machinery: regression targets are
//! plain maxima over the next step's optimistic Q and rollouts are greedy
//! with lexicographic tie-breaking. Used as the collapse-equivalence
//! reference for single-agent models.

use nalgebra::DVector;

use nqovi_core::nqovi::{
    optimistic_q_value, regress_weights, EpisodeSummary, FullPolicy, GramState, LearnerConfig,
    RunRecord, Trajectory,
};
use nqovi_core::rng::{sample_index, stream_rng};
use nqovi_core::stage_game::MixedProfile;
use nqovi_core::LinearMG;

use crate::config::HarnessError;

/// Lexicographically first maximizer.
fn argmax_lex(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = a;
        }
    }
    best
}

/// LSVI-UCB on a single-agent model. Errors on multi-agent input.
pub fn baseline_lsvi_ucb(mg: &LinearMG, cfg: &LearnerConfig) -> Result<RunRecord, HarnessError> {
    if mg.num_agents != 1 {
        return Err(HarnessError::Validation(format!(
            "baseline requires a single-agent model, got n = {}",
            mg.num_agents
        )));
    }
    cfg.check()?;
    mg.check()?;
    let d = mg.dim();
    let horizon = mg.horizon;
    let num_actions = mg.num_joint_actions();
    let beta = cfg.resolved_beta(d, horizon)?;

    // The action-sampling stream is opened for stream parity with the
    // learner, but greedy rollouts never draw from it.
    let _action_rng = stream_rng(cfg.seed, "action-sampling");
    let mut transition_rng = stream_rng(cfg.seed, "transition-sampling");

    let mut phi_table = Vec::with_capacity(mg.num_states * num_actions);
    for x in 0..mg.num_states {
        for a in 0..num_actions {
            phi_table.push(DVector::from_vec(mg.feature(x, a)?));
        }
    }
    let phi = |x: usize, a: usize| &phi_table[x * num_actions + a];

    let mut grams: Vec<GramState> = (0..horizon)
        .map(|_| GramState::new(d, cfg.lambda, cfg.refresh_period))
        .collect();

    let mut record = RunRecord {
        config: cfg.clone(),
        beta,
        dim: d,
        horizon,
        num_agents: 1,
        trajectories: Vec::with_capacity(cfg.episodes),
        weights: Vec::with_capacity(cfg.episodes),
        visited_profiles: Vec::with_capacity(cfg.episodes),
        full_policies: Vec::new(),
        summaries: Vec::with_capacity(cfg.episodes),
        gram_drift_at_refresh: 0.0,
        gram_drift_between: 0.0,
    };

    for k in 1..=cfg.episodes {
        if k > 1 {
            let prev = &record.trajectories[k - 2];
            for h in 0..horizon {
                grams[h].update(phi(prev.states[h], prev.joint_actions[h]))?;
            }
        }

        // Backward value iteration with max targets.
        let mut weights: Vec<DVector<f64>> = Vec::new();
        for h in (0..horizon).rev() {
            let v_next = |x: usize| -> Result<f64, HarnessError> {
                if h + 1 >= horizon {
                    return Ok(0.0);
                }
                let w = &weights[0]; // front slot holds step h+1 during this pass
                let mut q = Vec::with_capacity(num_actions);
                for a in 0..num_actions {
                    q.push(optimistic_q_value(w, beta, &grams[h + 1], phi(x, a), horizon)?);
                }
                Ok(q[argmax_lex(&q)])
            };
            let mut feats = Vec::with_capacity(k - 1);
            let mut targets = Vec::with_capacity(k - 1);
            for traj in record.trajectories.iter() {
                feats.push(phi(traj.states[h], traj.joint_actions[h]).clone());
                targets.push(traj.rewards[h][0] + v_next(traj.states[h + 1])?);
            }
            weights.insert(0, regress_weights(&grams[h], &feats, &targets)?);
        }

        // Greedy rollout.
        let greedy = |h: usize, x: usize| -> Result<usize, HarnessError> {
            let mut q = Vec::with_capacity(num_actions);
            for a in 0..num_actions {
                q.push(optimistic_q_value(&weights[h], beta, &grams[h], phi(x, a), horizon)?);
            }
            Ok(argmax_lex(&q))
        };
        let mut states = Vec::with_capacity(horizon + 1);
        let mut joint_actions = Vec::with_capacity(horizon);
        let mut rewards = Vec::with_capacity(horizon);
        let mut bonuses = Vec::with_capacity(horizon);
        let mut profiles = Vec::with_capacity(horizon);
        let mut max_bonus = 0.0f64;
        let mut x = mg.initial_state;
        states.push(x);
        for h in 0..horizon {
            let a = greedy(h, x)?;
            let bonus = beta * grams[h].quad_form(phi(x, a))?.sqrt();
            max_bonus = max_bonus.max(bonus);
            rewards.push(vec![mg.reward(h, 0, x, a)]);
            bonuses.push(bonus);
            joint_actions.push(a);
            profiles.push(MixedProfile::pure(&mg.action_dims, &[a]));
            let next = sample_index(&mut transition_rng, mg.kernel(h, x, a));
            states.push(next);
            x = next;
        }

        if cfg
            .full_policy_every
            .map(|m| m >= 1 && k % m == 0)
            .unwrap_or(false)
        {
            let mut policy: FullPolicy = Vec::with_capacity(horizon);
            for h in 0..horizon {
                let mut per_state = Vec::with_capacity(mg.num_states);
                for xs in 0..mg.num_states {
                    let a = greedy(h, xs)?;
                    per_state.push(MixedProfile::pure(&mg.action_dims, &[a]));
                }
                policy.push(per_state);
            }
            record.full_policies.push((k, policy));
        }

        record.trajectories.push(Trajectory {
            states,
            joint_actions,
            rewards,
            bonuses,
        });
        record
            .weights
            .push(weights.iter().map(|w| vec![w.as_slice().to_vec()]).collect());
        record.visited_profiles.push(profiles);
        record.summaries.push(EpisodeSummary {
            max_bonus,
            stage_solver_max_eps: 0.0,
            solver_non_convergences: 0,
        });
    }

    record.gram_drift_at_refresh = grams
        .iter()
        .map(|g| g.drift_at_refresh)
        .fold(0.0, f64::max);
    record.gram_drift_between = grams.iter().map(|g| g.drift_between).fold(0.0, f64::max);

    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nqovi_core::linear_mg::random_linear_mg;

    #[test]
    fn rejects_multi_agent_models() {
        let (mg, _) = random_linear_mg(0, 4, 2, &[2, 2], 2, 2).unwrap();
        let err = baseline_lsvi_ucb(&mg, &LearnerConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn first_episode_is_greedy_on_pure_bonus() {
        let (mg, _) = random_linear_mg(2, 4, 3, &[3], 3, 1).unwrap();
        let cfg = LearnerConfig {
            episodes: 1,
            seed: 3,
            ..Default::default()
        };
        let rec = baseline_lsvi_ucb(&mg, &cfg).unwrap();
        let traj = &rec.trajectories[0];
        for h in 0..mg.horizon {
            let x = traj.states[h];
            // w = 0, so the greedy pick maximizes min(beta ||phi||, H).
            let q: Vec<f64> = (0..3)
                .map(|a| {
                    let phi = mg.feature(x, a).unwrap();
                    let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
                    (rec.beta * norm).min(mg.horizon as f64)
                })
                .collect();
            assert_eq!(traj.joint_actions[h], argmax_lex(&q));
        }
    }

    #[test]
    fn collapse_matches_learner_on_single_agent_model() {
        let (mg, _) = random_linear_mg(5, 4, 3, &[2], 3, 1).unwrap();
        let cfg = LearnerConfig {
            episodes: 25,
            c_beta: 0.3,
            seed: 11,
            full_policy_every: None,
            ..Default::default()
        };
        let ours = nqovi_core::nqovi::run(&mg, &cfg).unwrap();
        let reference = baseline_lsvi_ucb(&mg, &cfg).unwrap();
        for k in 0..cfg.episodes {
            assert_eq!(
                ours.trajectories[k].states, reference.trajectories[k].states,
                "state divergence at k = {}",
                k + 1
            );
            assert_eq!(
                ours.trajectories[k].joint_actions,
                reference.trajectories[k].joint_actions
            );
            for h in 0..mg.horizon {
                for (a, b) in ours.weights[k][h][0].iter().zip(&reference.weights[k][h][0]) {
                    assert!((a - b).abs() <= 1e-10);
                }
            }
        }
    }
}
