//! Episodic linear Markov games over finite state and action spaces.
//!
//! A model carries a feature map `phi`, per-step transition parameters `mu`
//! and per-agent reward parameters `theta`, together with the explicit
//! kernels and reward tables they induce:
//! `P_h(x'|x,a) = <phi(x,a), mu_h(x')>` and `r^i_h(x,a) = <phi(x,a), theta^i_h>`.
//!
//! States are dense integer indices; a joint action is the mixed-radix
//! encoding of `(a_1, ..., a_n)` with `a_1` most significant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::stream_rng;
use rand::Rng;

/// Tolerance below which a negative kernel entry is clamped to zero.
pub const KERNEL_CLAMP: f64 = 1e-12;
/// Tolerance on kernel row sums and reward range checks.
pub const MODEL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("model validation failed: {0}")]
    Invalid(String),
    #[error("generation error: violated assumption: {0}")]
    Generation(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

/// Number of joint actions `prod_i |A_i|`.
pub fn joint_action_count(action_dims: &[usize]) -> usize {
    action_dims.iter().product()
}

/// Mixed-radix encoding of a joint action, `a_1` most significant.
pub fn joint_index(action_dims: &[usize], actions: &[usize]) -> usize {
    debug_assert_eq!(action_dims.len(), actions.len());
    let mut idx = 0;
    for (&dim, &a) in action_dims.iter().zip(actions) {
        debug_assert!(a < dim);
        idx = idx * dim + a;
    }
    idx
}

/// Inverse of [`joint_index`].
pub fn decode_joint(action_dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut actions = vec![0; action_dims.len()];
    for i in (0..action_dims.len()).rev() {
        actions[i] = idx % action_dims[i];
        idx /= action_dims[i];
    }
    actions
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    OneHot,
    Simplex,
    Explicit,
}

/// A feature map `phi : S x A -> R^d` with `||phi|| <= 1` and `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// `d = |S| * prod|A_i|`; the 1-entry sits at the lexicographic rank of
    /// `(x, a_1, ..., a_n)`.
    OneHot {
        num_states: usize,
        action_dims: Vec<usize>,
    },
    /// Dense per-(state, joint action) rows, row-major `(x * |A| + a) -> d`.
    Table {
        kind: FeatureKind,
        dim: usize,
        num_states: usize,
        action_dims: Vec<usize>,
        rows: Vec<f64>,
    },
}

impl FeatureMap {
    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureMap::OneHot { .. } => FeatureKind::OneHot,
            FeatureMap::Table { kind, .. } => *kind,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::OneHot {
                num_states,
                action_dims,
            } => num_states * joint_action_count(action_dims),
            FeatureMap::Table { dim, .. } => *dim,
        }
    }

    pub fn num_states(&self) -> usize {
        match self {
            FeatureMap::OneHot { num_states, .. } => *num_states,
            FeatureMap::Table { num_states, .. } => *num_states,
        }
    }

    pub fn action_dims(&self) -> &[usize] {
        match self {
            FeatureMap::OneHot { action_dims, .. } => action_dims,
            FeatureMap::Table { action_dims, .. } => action_dims,
        }
    }

    /// Evaluate `phi(x, a)` for a joint-action index.
    pub fn eval(&self, state: usize, joint: usize) -> Result<Vec<f64>, ModelError> {
        let num_joint = joint_action_count(self.action_dims());
        if state >= self.num_states() || joint >= num_joint {
            return Err(ModelError::Index(format!(
                "feature lookup (x={state}, a={joint}) outside {}x{}",
                self.num_states(),
                num_joint
            )));
        }
        match self {
            FeatureMap::OneHot { .. } => {
                let mut v = vec![0.0; self.dim()];
                v[state * num_joint + joint] = 1.0;
                Ok(v)
            }
            FeatureMap::Table { dim, rows, .. } => {
                let start = (state * num_joint + joint) * dim;
                Ok(rows[start..start + dim].to_vec())
            }
        }
    }
}

/// One-hot tabular embedding with `d = |S| * prod|A_i|`.
pub fn make_tabular_features(
    num_states: usize,
    action_dims: &[usize],
) -> Result<FeatureMap, ModelError> {
    if num_states == 0 || action_dims.is_empty() || action_dims.iter().any(|&a| a == 0) {
        return Err(ModelError::Config(
            "tabular features need |S| >= 1 and every |A_i| >= 1".into(),
        ));
    }
    let mut d = num_states;
    for &a in action_dims {
        d = d
            .checked_mul(a)
            .ok_or_else(|| ModelError::Config("feature dimension overflows".into()))?;
    }
    if d < 2 {
        return Err(ModelError::Config(format!(
            "feature dimension d={d} < 2 is not supported"
        )));
    }
    Ok(FeatureMap::OneHot {
        num_states,
        action_dims: action_dims.to_vec(),
    })
}

/// Finite episodic linear Markov game.
///
/// Immutable after construction; the explicit kernel and reward tables are
/// derived from `(phi, mu, theta)` at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMG {
    pub num_agents: usize,
    pub action_dims: Vec<usize>,
    pub num_states: usize,
    pub horizon: usize,
    pub initial_state: usize,
    pub features: FeatureMap,
    /// `mu[h][j * |S| + x']`, i.e. row `j` of the `d x |S|` matrix for step `h`.
    pub mu: Vec<Vec<f64>>,
    /// `theta[h][i]` is the reward parameter of agent `i` at step `h`.
    pub theta: Vec<Vec<Vec<f64>>>,
    pub seed: Option<u64>,
    /// `kernels[h][x * |A| + a][x']`.
    kernels: Vec<Vec<Vec<f64>>>,
    /// `rewards[h][i][x * |A| + a]`.
    rewards: Vec<Vec<Vec<f64>>>,
}

impl LinearMG {
    /// Build from linear parameters, deriving the explicit tables, then
    /// enforce the model invariants.
    pub fn from_parameters(
        features: FeatureMap,
        mu: Vec<Vec<f64>>,
        theta: Vec<Vec<Vec<f64>>>,
        horizon: usize,
        initial_state: usize,
        seed: Option<u64>,
    ) -> Result<Self, ModelError> {
        let mg = Self::from_parameters_unvalidated(features, mu, theta, horizon, initial_state, seed)?;
        mg.check()?;
        Ok(mg)
    }

    /// Same derivation as [`from_parameters`](Self::from_parameters) but
    /// skipping the kernel/reward invariant checks. Structural checks
    /// (shapes, `H >= 2`, index ranges) still apply.
    pub fn from_parameters_unvalidated(
        features: FeatureMap,
        mu: Vec<Vec<f64>>,
        theta: Vec<Vec<Vec<f64>>>,
        horizon: usize,
        initial_state: usize,
        seed: Option<u64>,
    ) -> Result<Self, ModelError> {
        let d = features.dim();
        let num_states = features.num_states();
        let action_dims = features.action_dims().to_vec();
        let num_agents = if theta.is_empty() { 0 } else { theta[0].len() };
        if horizon < 2 {
            return Err(ModelError::Config("horizon H must be >= 2".into()));
        }
        if num_agents == 0 {
            return Err(ModelError::Config("at least one agent is required".into()));
        }
        if action_dims.len() != num_agents {
            return Err(ModelError::Config(format!(
                "theta carries {num_agents} agents but action_dims has {}",
                action_dims.len()
            )));
        }
        if initial_state >= num_states {
            return Err(ModelError::Index(format!(
                "initial state {initial_state} >= |S| = {num_states}"
            )));
        }
        if mu.len() != horizon || theta.len() != horizon {
            return Err(ModelError::Config(
                "mu and theta must each have one entry per step".into(),
            ));
        }
        for h in 0..horizon {
            if mu[h].len() != d * num_states {
                return Err(ModelError::Config(format!(
                    "mu[{h}] has {} entries, expected d*|S| = {}",
                    mu[h].len(),
                    d * num_states
                )));
            }
            for th in &theta[h] {
                if th.len() != d {
                    return Err(ModelError::Config(format!(
                        "theta[{h}] entries must have length d = {d}"
                    )));
                }
            }
        }

        let num_joint = joint_action_count(&action_dims);
        let mut kernels = Vec::with_capacity(horizon);
        let mut rewards = Vec::with_capacity(horizon);
        for h in 0..horizon {
            let mut kern = vec![vec![0.0; num_states]; num_states * num_joint];
            let mut rew = vec![vec![0.0; num_states * num_joint]; num_agents];
            for x in 0..num_states {
                for a in 0..num_joint {
                    let phi = features.eval(x, a)?;
                    let row = &mut kern[x * num_joint + a];
                    for xp in 0..num_states {
                        let mut p = 0.0;
                        for j in 0..d {
                            p += phi[j] * mu[h][j * num_states + xp];
                        }
                        if p < 0.0 && p >= -KERNEL_CLAMP {
                            p = 0.0;
                        }
                        row[xp] = p;
                    }
                    for i in 0..num_agents {
                        let mut r = 0.0;
                        for j in 0..d {
                            r += phi[j] * theta[h][i][j];
                        }
                        rew[i][x * num_joint + a] = r;
                    }
                }
            }
            kernels.push(kern);
            rewards.push(rew);
        }

        Ok(Self {
            num_agents,
            action_dims,
            num_states,
            horizon,
            initial_state,
            features,
            mu,
            theta,
            seed,
            kernels,
            rewards,
        })
    }

    /// Build a one-hot embedded model from explicit kernels and rewards.
    ///
    /// `kernels[h][x * |A| + a][x']`, `rewards[h][i][x * |A| + a]`.
    pub fn tabular(
        action_dims: &[usize],
        num_states: usize,
        horizon: usize,
        initial_state: usize,
        kernels: &[Vec<Vec<f64>>],
        rewards: &[Vec<Vec<f64>>],
        seed: Option<u64>,
    ) -> Result<Self, ModelError> {
        let features = make_tabular_features(num_states, action_dims)?;
        let d = features.dim();
        let num_joint = joint_action_count(action_dims);
        if kernels.len() != horizon || rewards.len() != horizon {
            return Err(ModelError::Config(
                "kernels and rewards must each have one entry per step".into(),
            ));
        }
        // One-hot realizability: mu_h(x') at coordinate (x,a) is exactly
        // P_h(x'|x,a) and theta at (x,a) is r^i_h(x,a).
        let mut mu = Vec::with_capacity(horizon);
        let mut theta = Vec::with_capacity(horizon);
        for h in 0..horizon {
            let mut m = vec![0.0; d * num_states];
            for x in 0..num_states {
                for a in 0..num_joint {
                    let j = x * num_joint + a;
                    for xp in 0..num_states {
                        m[j * num_states + xp] = kernels[h][j][xp];
                    }
                }
            }
            mu.push(m);
            let n = rewards[h].len();
            let mut th = vec![vec![0.0; d]; n];
            for (i, th_i) in th.iter_mut().enumerate() {
                th_i.copy_from_slice(&rewards[h][i]);
            }
            theta.push(th);
        }
        Self::from_parameters(features, mu, theta, horizon, initial_state, seed)
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn num_joint_actions(&self) -> usize {
        joint_action_count(&self.action_dims)
    }

    /// `phi(x, a)` for a joint-action index.
    pub fn feature(&self, state: usize, joint: usize) -> Result<Vec<f64>, ModelError> {
        self.features.eval(state, joint)
    }

    /// Transition distribution `P_h(. | x, a)`, `h` zero-based.
    pub fn kernel(&self, h: usize, state: usize, joint: usize) -> &[f64] {
        &self.kernels[h][state * self.num_joint_actions() + joint]
    }

    /// Reward `r^i_h(x, a)`, `h` zero-based.
    pub fn reward(&self, h: usize, agent: usize, state: usize, joint: usize) -> f64 {
        self.rewards[h][agent][state * self.num_joint_actions() + joint]
    }

    /// Enforce the model invariants: stochastic kernel rows, rewards in
    /// `[0,1]`, unit-bounded features, `d >= 2`.
    pub fn check(&self) -> Result<(), ModelError> {
        if self.dim() < 2 {
            return Err(ModelError::Config("feature dimension d must be >= 2".into()));
        }
        let num_joint = self.num_joint_actions();
        for h in 0..self.horizon {
            for x in 0..self.num_states {
                for a in 0..num_joint {
                    let phi = self.feature(x, a)?;
                    let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 1.0 + MODEL_TOL {
                        return Err(ModelError::Invalid(format!(
                            "||phi({x},{a})|| = {norm} > 1"
                        )));
                    }
                    let row = self.kernel(h, x, a);
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > MODEL_TOL {
                        return Err(ModelError::Invalid(format!(
                            "kernel row sum at (h={h}, x={x}, a={a}) is {sum}"
                        )));
                    }
                    if let Some(&min) = row
                        .iter()
                        .min_by(|p, q| p.partial_cmp(q).unwrap())
                    {
                        if min < 0.0 {
                            return Err(ModelError::Invalid(format!(
                                "negative kernel entry {min} at (h={h}, x={x}, a={a})"
                            )));
                        }
                    }
                    for i in 0..self.num_agents {
                        let r = self.reward(h, i, x, a);
                        if !(-MODEL_TOL..=1.0 + MODEL_TOL).contains(&r) {
                            return Err(ModelError::Invalid(format!(
                                "reward r^{i}_{h}({x},{a}) = {r} outside [0,1]"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Descriptive report over a model's assumption set. Never mutates or fails.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelValidationReport {
    pub max_row_sum_deviation: f64,
    pub min_kernel_entry: f64,
    pub reward_range_violations: usize,
    /// `theta_norms[h][i] = ||theta^i_h||`.
    pub theta_norms: Vec<Vec<f64>>,
    /// Per-step surrogate `sum_{x'} ||mu_h(x')||` for the measure-norm bound.
    pub measure_norm_surrogate: Vec<f64>,
    pub feature_norm_ok: bool,
    pub theta_norm_ok: bool,
    pub measure_norm_ok: bool,
}

/// Full-enumeration audit of the assumptions `||phi|| <= 1`,
/// `||theta_h|| <= sqrt(d)` and `sum ||mu_h(x')|| <= sqrt(d)`.
pub fn validate(mg: &LinearMG) -> ModelValidationReport {
    let d = mg.dim() as f64;
    let sqrt_d = d.sqrt();
    let num_joint = mg.num_joint_actions();

    let mut max_dev = 0.0f64;
    let mut min_entry = f64::INFINITY;
    let mut reward_violations = 0;
    let mut feature_norm_ok = true;
    for h in 0..mg.horizon {
        for x in 0..mg.num_states {
            for a in 0..num_joint {
                let phi = mg.feature(x, a).expect("in-range enumeration");
                if phi.iter().map(|v| v * v).sum::<f64>().sqrt() > 1.0 + MODEL_TOL {
                    feature_norm_ok = false;
                }
                let row = mg.kernel(h, x, a);
                let sum: f64 = row.iter().sum();
                max_dev = max_dev.max((sum - 1.0).abs());
                for &p in row {
                    min_entry = min_entry.min(p);
                }
                for i in 0..mg.num_agents {
                    let r = mg.reward(h, i, x, a);
                    if !(-MODEL_TOL..=1.0 + MODEL_TOL).contains(&r) {
                        reward_violations += 1;
                    }
                }
            }
        }
    }

    let mut theta_norms = Vec::with_capacity(mg.horizon);
    let mut theta_norm_ok = true;
    for h in 0..mg.horizon {
        let norms: Vec<f64> = mg.theta[h]
            .iter()
            .map(|th| th.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        if norms.iter().any(|&n| n > sqrt_d + MODEL_TOL) {
            theta_norm_ok = false;
        }
        theta_norms.push(norms);
    }

    let mut measure_norm_surrogate = Vec::with_capacity(mg.horizon);
    let mut measure_norm_ok = true;
    for h in 0..mg.horizon {
        let mut total = 0.0;
        for xp in 0..mg.num_states {
            let mut sq = 0.0;
            for j in 0..mg.dim() {
                let v = mg.mu[h][j * mg.num_states + xp];
                sq += v * v;
            }
            total += sq.sqrt();
        }
        if total > sqrt_d + MODEL_TOL {
            measure_norm_ok = false;
        }
        measure_norm_surrogate.push(total);
    }

    ModelValidationReport {
        max_row_sum_deviation: max_dev,
        min_kernel_entry: min_entry,
        reward_range_violations: reward_violations,
        theta_norms,
        measure_norm_surrogate,
        feature_norm_ok,
        theta_norm_ok,
        measure_norm_ok,
    }
}

fn simplex_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    // Dirichlet(1,...,1) via normalized exponentials.
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            -u.ln()
        })
        .collect();
    let sum: f64 = v.iter().sum();
    for x in &mut v {
        *x /= sum;
    }
    v
}

/// Random linear MG with simplex features.
///
/// `phi(x,a)` sits on the probability simplex of `R^d` and each `mu_h` row is
/// a distribution over states, so every kernel row is a convex combination of
/// distributions and therefore exactly stochastic. `theta` entries are
/// uniform in `[0,1]`, which keeps every realized reward in `[0,1]` and
/// `||theta|| <= sqrt(d)`.
pub fn random_linear_mg(
    seed: u64,
    d: usize,
    num_states: usize,
    action_dims: &[usize],
    horizon: usize,
    num_agents: usize,
) -> Result<(LinearMG, ModelValidationReport), ModelError> {
    if d < 2 {
        return Err(ModelError::Generation("d >= 2".into()));
    }
    if horizon < 2 {
        return Err(ModelError::Generation("H >= 2".into()));
    }
    if num_states == 0 {
        return Err(ModelError::Generation("|S| >= 1".into()));
    }
    if num_agents == 0 || action_dims.len() != num_agents || action_dims.iter().any(|&a| a == 0) {
        return Err(ModelError::Generation(
            "n >= 1 agents with |A_i| >= 1 each".into(),
        ));
    }
    let mut rng = stream_rng(seed, "model-gen");

    let num_joint = joint_action_count(action_dims);
    let mut rows = Vec::with_capacity(num_states * num_joint * d);
    for _ in 0..num_states * num_joint {
        rows.extend(simplex_point(&mut rng, d));
    }
    let features = FeatureMap::Table {
        kind: FeatureKind::Simplex,
        dim: d,
        num_states,
        action_dims: action_dims.to_vec(),
        rows,
    };

    let mut mu = Vec::with_capacity(horizon);
    let mut theta = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut m = vec![0.0; d * num_states];
        for j in 0..d {
            let dist = simplex_point(&mut rng, num_states);
            m[j * num_states..(j + 1) * num_states].copy_from_slice(&dist);
        }
        mu.push(m);
        let th: Vec<Vec<f64>> = (0..num_agents)
            .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
            .collect();
        theta.push(th);
    }

    let mg = LinearMG::from_parameters(features, mu, theta, horizon, 0, Some(seed))?;
    let report = validate(&mg);
    Ok((mg, report))
}

/// Random one-hot tabular model: uniform-normalized kernels, rewards uniform
/// in `[0,1]`.
pub fn random_tabular_mg(
    seed: u64,
    num_states: usize,
    action_dims: &[usize],
    horizon: usize,
    num_agents: usize,
) -> Result<(LinearMG, ModelValidationReport), ModelError> {
    if horizon < 2 {
        return Err(ModelError::Generation("H >= 2".into()));
    }
    if num_agents == 0 || action_dims.len() != num_agents || action_dims.iter().any(|&a| a == 0) {
        return Err(ModelError::Generation(
            "n >= 1 agents with |A_i| >= 1 each".into(),
        ));
    }
    let mut rng = stream_rng(seed, "model-gen");
    let num_joint = joint_action_count(action_dims);
    let mut kernels = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let kern: Vec<Vec<f64>> = (0..num_states * num_joint)
            .map(|_| simplex_point(&mut rng, num_states))
            .collect();
        let rew: Vec<Vec<f64>> = (0..num_agents)
            .map(|_| {
                (0..num_states * num_joint)
                    .map(|_| rng.gen::<f64>())
                    .collect()
            })
            .collect();
        kernels.push(kern);
        rewards.push(rew);
    }
    let mg = LinearMG::tabular(
        action_dims,
        num_states,
        horizon,
        0,
        &kernels,
        &rewards,
        Some(seed),
    )?;
    let report = validate(&mg);
    Ok((mg, report))
}

/// On-disk model document.
///
/// `mu` is `H x d x |S|` row-major, `theta` is `H x n x d`. `phi` carries the
/// dense feature table for the `simplex`/`explicit` kinds; it is omitted for
/// `one_hot`, which is fully determined by the sizes.
#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    n: usize,
    #[serde(rename = "H")]
    h: usize,
    num_states: usize,
    action_dims: Vec<usize>,
    d: usize,
    feature_kind: FeatureKind,
    mu: Vec<Vec<f64>>,
    theta: Vec<Vec<Vec<f64>>>,
    s0: usize,
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<Vec<f64>>>,
}

/// Serialize a model to its JSON document.
pub fn to_json(mg: &LinearMG) -> Result<String, ModelError> {
    let phi = match &mg.features {
        FeatureMap::OneHot { .. } => None,
        FeatureMap::Table { dim, rows, .. } => Some(
            rows.chunks(*dim)
                .map(|c| c.to_vec())
                .collect::<Vec<Vec<f64>>>(),
        ),
    };
    let doc = ModelDoc {
        n: mg.num_agents,
        h: mg.horizon,
        num_states: mg.num_states,
        action_dims: mg.action_dims.clone(),
        d: mg.dim(),
        feature_kind: mg.features.kind(),
        mu: mg.mu.clone(),
        theta: mg.theta.clone(),
        s0: mg.initial_state,
        seed: mg.seed,
        phi,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| ModelError::Serde(e.to_string()))
}

/// Deserialize a model from its JSON document and re-derive its tables.
pub fn from_json(text: &str) -> Result<LinearMG, ModelError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ModelError::Serde(e.to_string()))?;
    let features = match doc.feature_kind {
        FeatureKind::OneHot => make_tabular_features(doc.num_states, &doc.action_dims)?,
        kind => {
            let rows = doc
                .phi
                .ok_or_else(|| ModelError::Serde("missing phi table for non-one-hot model".into()))?;
            let expected = doc.num_states * joint_action_count(&doc.action_dims);
            if rows.len() != expected || rows.iter().any(|r| r.len() != doc.d) {
                return Err(ModelError::Serde("phi table shape mismatch".into()));
            }
            FeatureMap::Table {
                kind,
                dim: doc.d,
                num_states: doc.num_states,
                action_dims: doc.action_dims.clone(),
                rows: rows.into_iter().flatten().collect(),
            }
        }
    };
    if features.dim() != doc.d {
        return Err(ModelError::Serde(format!(
            "declared d = {} does not match feature dimension {}",
            doc.d,
            features.dim()
        )));
    }
    LinearMG::from_parameters(features, doc.mu, doc.theta, doc.h, doc.s0, doc.seed)
}
