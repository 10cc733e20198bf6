//! Exact dynamic-programming evaluation on finite models.
//!
//! Policy evaluation, best-response values against fixed opponents, and the
//! per-episode Nash gap that accumulates into the regret metric.

use thiserror::Error;

use crate::linear_mg::{decode_joint, LinearMG};
use crate::stage_game::MixedProfile;

/// Guard on the marginalized |S| * |A_i| tables formed per step.
pub const MARGINAL_GUARD: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("contract error: {0}")]
    Contract(String),
    #[error("capacity error: {0}")]
    Capacity(String),
}

/// A product joint policy defined at every `(h, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPolicy {
    /// `profiles[h][x]`.
    pub profiles: Vec<Vec<MixedProfile>>,
}

impl JointPolicy {
    pub fn check(&self, mg: &LinearMG) -> Result<(), OracleError> {
        if self.profiles.len() != mg.horizon {
            return Err(OracleError::Contract(format!(
                "policy covers {} steps, model has H = {}",
                self.profiles.len(),
                mg.horizon
            )));
        }
        for (h, per_state) in self.profiles.iter().enumerate() {
            if per_state.len() != mg.num_states {
                return Err(OracleError::Contract(format!(
                    "policy at step {h} covers {} states, model has {}",
                    per_state.len(),
                    mg.num_states
                )));
            }
            for (x, p) in per_state.iter().enumerate() {
                if !p.is_valid(&mg.action_dims, 1e-9) {
                    return Err(OracleError::Contract(format!(
                        "invalid mixed profile at (h={h}, x={x})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Values `V^{i,pi}_h(x)` for every agent, step and state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    /// `v[i][h][x]`, `h` zero-based in `0..=H` (index `H` is the zero
    /// boundary).
    pub v: Vec<Vec<Vec<f64>>>,
}

impl ValueTable {
    pub fn at_initial(&self, mg: &LinearMG, agent: usize) -> f64 {
        self.v[agent][0][mg.initial_state]
    }
}

/// Backward Bellman recursion for a fixed joint policy.
pub fn evaluate_policy(mg: &LinearMG, policy: &JointPolicy) -> Result<ValueTable, OracleError> {
    policy.check(mg)?;
    let n = mg.num_agents;
    let num_joint = mg.num_joint_actions();
    let mut v = vec![vec![vec![0.0; mg.num_states]; mg.horizon + 1]; n];
    for h in (0..mg.horizon).rev() {
        for x in 0..mg.num_states {
            let profile = &policy.profiles[h][x];
            for i in 0..n {
                let mut value = 0.0;
                for a in 0..num_joint {
                    let p = profile.joint_prob(&mg.action_dims, a);
                    if p == 0.0 {
                        continue;
                    }
                    let mut q = mg.reward(h, i, x, a);
                    let kernel = mg.kernel(h, x, a);
                    for (xp, &t) in kernel.iter().enumerate() {
                        if t > 0.0 {
                            q += t * v[i][h + 1][xp];
                        }
                    }
                    value += p * q;
                }
                v[i][h][x] = value;
            }
        }
    }
    Ok(ValueTable { v })
}

/// Best-response values of one agent against the opponents' components of a
/// joint policy.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub agent: usize,
    /// `v[h][x]`, zero boundary at index `H`.
    pub v: Vec<Vec<f64>>,
    /// Greedy own action per `(h, x)`.
    pub actions: Vec<Vec<usize>>,
}

impl BestResponse {
    pub fn at_initial(&self, mg: &LinearMG) -> f64 {
        self.v[0][mg.initial_state]
    }

    /// `Q^{i,br,pi_{-i}}_h(x, a)` at a joint action, from the best-response
    /// continuation values.
    pub fn q_joint(&self, mg: &LinearMG, h: usize, x: usize, joint: usize) -> f64 {
        let mut q = mg.reward(h, self.agent, x, joint);
        for (xp, &t) in mg.kernel(h, x, joint).iter().enumerate() {
            if t > 0.0 {
                q += t * self.v[h + 1][xp];
            }
        }
        q
    }
}

/// Solve the single-agent MDP induced by marginalizing the opponents out of
/// the model, by backward maximization.
pub fn best_response_value(
    mg: &LinearMG,
    agent: usize,
    policy: &JointPolicy,
) -> Result<BestResponse, OracleError> {
    policy.check(mg)?;
    if agent >= mg.num_agents {
        return Err(OracleError::Contract(format!(
            "agent {agent} out of range (n = {})",
            mg.num_agents
        )));
    }
    let own_dim = mg.action_dims[agent];
    if mg
        .num_states
        .checked_mul(own_dim)
        .map(|t| t > MARGINAL_GUARD)
        .unwrap_or(true)
    {
        return Err(OracleError::Capacity(
            "marginalized table exceeds the size guard".into(),
        ));
    }
    let num_joint = mg.num_joint_actions();
    let mut v = vec![vec![0.0; mg.num_states]; mg.horizon + 1];
    let mut actions = vec![vec![0usize; mg.num_states]; mg.horizon];
    for h in (0..mg.horizon).rev() {
        for x in 0..mg.num_states {
            let profile = &policy.profiles[h][x];
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for own in 0..own_dim {
                // Expected reward-to-go with opponents drawn from pi_{-i}.
                let mut q = 0.0;
                for joint in 0..num_joint {
                    let acts = decode_joint(&mg.action_dims, joint);
                    if acts[agent] != own {
                        continue;
                    }
                    let mut p = 1.0;
                    for (j, s) in profile.strategies.iter().enumerate() {
                        if j != agent {
                            p *= s[acts[j]];
                        }
                    }
                    if p == 0.0 {
                        continue;
                    }
                    let mut qa = mg.reward(h, agent, x, joint);
                    for (xp, &t) in mg.kernel(h, x, joint).iter().enumerate() {
                        if t > 0.0 {
                            qa += t * v[h + 1][xp];
                        }
                    }
                    q += p * qa;
                }
                if q > best {
                    best = q;
                    best_a = own;
                }
            }
            v[h][x] = best;
            actions[h][x] = best_a;
        }
    }
    Ok(BestResponse { agent, v, actions })
}

/// `max_i (V_1^{i,br,pi_{-i}}(s_o) - V_1^{i,pi}(s_o))`; zero iff `pi` is a
/// Nash equilibrium of the Markov game.
pub fn nash_gap(mg: &LinearMG, policy: &JointPolicy) -> Result<f64, OracleError> {
    let values = evaluate_policy(mg, policy)?;
    let mut gap = f64::NEG_INFINITY;
    for i in 0..mg.num_agents {
        let br = best_response_value(mg, i, policy)?;
        gap = gap.max(br.at_initial(mg) - values.at_initial(mg, i));
    }
    Ok(gap)
}

/// Prefix sums of per-episode gaps.
pub fn cumulative_regret(gaps: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(gaps.len());
    let mut acc = 0.0;
    for &g in gaps {
        acc += g;
        out.push(acc);
    }
    out
}

/// Exhaustive deterministic-policy best response; test-scale oracle for
/// [`best_response_value`].
pub fn brute_force_best_response(
    mg: &LinearMG,
    agent: usize,
    policy: &JointPolicy,
) -> Result<f64, OracleError> {
    policy.check(mg)?;
    let own_dim = mg.action_dims[agent];
    let cells = mg.horizon * mg.num_states;
    let total = (own_dim as u128).pow(cells as u32);
    if total > 1_000_000 {
        return Err(OracleError::Capacity(
            "too many deterministic policies to enumerate".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    for code in 0..total as usize {
        // Decode one deterministic policy for the agent.
        let mut c = code;
        let mut choice = vec![vec![0usize; mg.num_states]; mg.horizon];
        for h in 0..mg.horizon {
            for x in 0..mg.num_states {
                choice[h][x] = c % own_dim;
                c /= own_dim;
            }
        }
        let profiles = (0..mg.horizon)
            .map(|h| {
                (0..mg.num_states)
                    .map(|x| {
                        let mut strategies = policy.profiles[h][x].strategies.clone();
                        let mut pure = vec![0.0; own_dim];
                        pure[choice[h][x]] = 1.0;
                        strategies[agent] = pure;
                        MixedProfile { strategies }
                    })
                    .collect()
            })
            .collect();
        let table = evaluate_policy(mg, &JointPolicy { profiles })?;
        best = best.max(table.at_initial(mg, agent));
    }
    Ok(best)
}

/// Build a uniform product policy; handy default in tests and baselines.
pub fn uniform_policy(mg: &LinearMG) -> JointPolicy {
    let profiles = (0..mg.horizon)
        .map(|_| {
            (0..mg.num_states)
                .map(|_| MixedProfile::uniform(&mg.action_dims))
                .collect()
        })
        .collect();
    JointPolicy { profiles }
}

/// Point-mass product policy from per-(h, x) joint actions.
pub fn pure_policy(mg: &LinearMG, actions: &[Vec<Vec<usize>>]) -> JointPolicy {
    let profiles = (0..mg.horizon)
        .map(|h| {
            (0..mg.num_states)
                .map(|x| MixedProfile::pure(&mg.action_dims, &actions[h][x]))
                .collect()
        })
        .collect();
    JointPolicy { profiles }
}
