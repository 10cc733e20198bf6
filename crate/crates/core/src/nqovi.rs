//! Nash Q-learning with optimistic value iteration.
//!
//! Per episode: a backward pass (steps H..1) accumulates the per-step Gram
//! matrix, ridge-regresses per-agent weights against stage-game Nash targets,
//! and forms clipped optimistic Q-functions; a forward rollout then plays a
//! stage-game Nash profile at each realized state.
//!
//! The stage-game equilibrium used in the regression targets is solved once
//! per distinct next-state per (episode, step) and shared by all agents.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linear_mg::{LinearMG, ModelError};
use crate::rng::{sample_index, stream_rng};
use crate::stage_game::{
    build_stage_game, expected_payoff, solve, MixedProfile, SolveResult, SolverSettings,
    StageGameError,
};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    StageGame(#[from] StageGameError),
}

/// `beta = c_beta * d * H * sqrt(iota)` with `iota = ln(d K H / delta)`.
///
/// Natural log; `iota` must be positive, i.e. `dKH/delta > 1`.
pub fn theoretical_beta(
    c_beta: f64,
    d: usize,
    k: usize,
    h: usize,
    delta: f64,
) -> Result<f64, LearnerError> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(LearnerError::Domain("delta must lie in (0,1)".into()));
    }
    if d == 0 || k == 0 || h == 0 {
        return Err(LearnerError::Domain("d, K, H must all be >= 1".into()));
    }
    let iota = ((d * k * h) as f64 / delta).ln();
    if iota <= 0.0 {
        return Err(LearnerError::Domain(format!(
            "iota = ln(dKH/delta) = {iota} must be positive"
        )));
    }
    Ok(c_beta * d as f64 * h as f64 * iota.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub episodes: usize,
    pub lambda: f64,
    /// Bonus-scale constant; used to derive `beta` unless overridden.
    pub c_beta: f64,
    /// Explicit bonus scale; when set, takes precedence over `c_beta`.
    pub beta_override: Option<f64>,
    pub delta: f64,
    /// Gram-inverse refresh period.
    pub refresh_period: usize,
    pub solver_eps: f64,
    pub solver_max_iters: usize,
    pub seed: u64,
    /// Record the full per-state joint policy every this many episodes
    /// (`None` records only visited-state profiles).
    pub full_policy_every: Option<usize>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            episodes: 100,
            lambda: 1.0,
            c_beta: 1.0,
            beta_override: None,
            delta: 0.1,
            refresh_period: 64,
            solver_eps: 1e-6,
            solver_max_iters: 100_000,
            seed: 0,
            full_policy_every: Some(1),
        }
    }
}

impl LearnerConfig {
    pub fn check(&self) -> Result<(), LearnerError> {
        if self.episodes == 0 {
            return Err(LearnerError::Config("K must be >= 1".into()));
        }
        if self.lambda <= 0.0 {
            return Err(LearnerError::Config("lambda must be > 0".into()));
        }
        if self.refresh_period == 0 {
            return Err(LearnerError::Config("refresh period must be >= 1".into()));
        }
        if let Some(b) = self.beta_override {
            if b < 0.0 {
                return Err(LearnerError::Config("beta must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// Bonus scale for a model of feature dimension `d`.
    pub fn resolved_beta(&self, d: usize, h: usize) -> Result<f64, LearnerError> {
        match self.beta_override {
            Some(b) => Ok(b),
            None => theoretical_beta(self.c_beta, d, self.episodes, h, self.delta),
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            approx_eps: self.solver_eps,
            approx_max_iters: self.solver_max_iters,
        }
    }
}

/// Regularized per-step covariance `Lambda = lambda I + sum phi phi^T` with a
/// maintained inverse.
///
/// The inverse is kept current by the rank-one (Sherman-Morrison) identity
/// and recomputed from `Lambda` by direct factorization every
/// `refresh_period` updates.
#[derive(Debug, Clone, PartialEq)]
pub struct GramState {
    pub lambda: f64,
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub updates: usize,
    refresh_period: usize,
    since_refresh: usize,
    /// Worst observed `||Lambda Lambda^-1 - I||_inf`, split by whether it was
    /// measured right after a refresh.
    pub drift_at_refresh: f64,
    pub drift_between: f64,
}

impl GramState {
    pub fn new(d: usize, lambda: f64, refresh_period: usize) -> Self {
        Self {
            lambda,
            matrix: DMatrix::identity(d, d) * lambda,
            inverse: DMatrix::identity(d, d) / lambda,
            updates: 0,
            refresh_period,
            since_refresh: 0,
            drift_at_refresh: 0.0,
            drift_between: 0.0,
        }
    }

    /// `Lambda += phi phi^T` with the matching rank-one inverse update.
    pub fn update(&mut self, phi: &DVector<f64>) -> Result<(), LearnerError> {
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::Numeric("non-finite feature vector".into()));
        }
        self.matrix.ger(1.0, phi, phi, 1.0);
        let iv = &self.inverse * phi;
        let denom = 1.0 + phi.dot(&iv);
        self.inverse.ger(-1.0 / denom, &iv, &iv, 1.0);
        self.updates += 1;
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_period {
            self.refresh()?;
            self.drift_at_refresh = self.drift_at_refresh.max(self.identity_drift());
        } else {
            self.drift_between = self.drift_between.max(self.identity_drift());
        }
        Ok(())
    }

    /// Recompute the inverse directly from `Lambda`.
    pub fn refresh(&mut self) -> Result<(), LearnerError> {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| LearnerError::Numeric("Gram matrix not invertible".into()))?;
        self.inverse = inv;
        self.since_refresh = 0;
        Ok(())
    }

    /// `||Lambda Lambda^-1 - I||_inf`.
    pub fn identity_drift(&self) -> f64 {
        let prod = &self.matrix * &self.inverse;
        let d = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `phi^T Lambda^-1 phi`, clamped for tiny negative rounding.
    pub fn quad_form(&self, phi: &DVector<f64>) -> Result<f64, LearnerError> {
        let q = phi.dot(&(&self.inverse * phi));
        if q < -1e-12 {
            return Err(LearnerError::Numeric(format!(
                "negative quadratic form {q} in the bonus radicand"
            )));
        }
        Ok(q.max(0.0))
    }
}

/// Ridge solution `w = Lambda^-1 sum_tau phi_tau * target_tau`.
pub fn regress_weights(
    gram: &GramState,
    features: &[DVector<f64>],
    targets: &[f64],
) -> Result<DVector<f64>, LearnerError> {
    if features.len() != targets.len() {
        return Err(LearnerError::Config(
            "features and targets must have equal length".into(),
        ));
    }
    let d = gram.matrix.nrows();
    let mut b = DVector::zeros(d);
    for (phi, &y) in features.iter().zip(targets) {
        b.axpy(y, phi, 1.0);
    }
    Ok(&gram.inverse * b)
}

/// `min{ w . phi + beta sqrt(phi^T Lambda^-1 phi), H }`.
pub fn optimistic_q_value(
    w: &DVector<f64>,
    beta: f64,
    gram: &GramState,
    phi: &DVector<f64>,
    horizon: usize,
) -> Result<f64, LearnerError> {
    let bonus = beta * gram.quad_form(phi)?.sqrt();
    Ok((w.dot(phi) + bonus).min(horizon as f64))
}

/// One episode's realized path. `states` has length `H + 1` (the trailing
/// entry is the post-episode state); everything else has length `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub joint_actions: Vec<usize>,
    /// `rewards[h][i]`.
    pub rewards: Vec<Vec<f64>>,
    /// Optimism bonus at the realized `(x, a)` of each step.
    pub bonuses: Vec<f64>,
}

/// Profiles played at the realized states, one per step.
pub type VisitedProfiles = Vec<MixedProfile>;

/// Full per-state joint policy for one episode: `[h][x] -> MixedProfile`.
pub type FullPolicy = Vec<Vec<MixedProfile>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub max_bonus: f64,
    /// Worst achieved exploitability among this episode's stage solves.
    pub stage_solver_max_eps: f64,
    pub solver_non_convergences: usize,
}

/// Everything a completed run exposes for evaluation and audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: LearnerConfig,
    pub beta: f64,
    pub dim: usize,
    pub horizon: usize,
    pub num_agents: usize,
    pub trajectories: Vec<Trajectory>,
    /// `weights[k][h][i]` as plain vectors.
    pub weights: Vec<Vec<Vec<Vec<f64>>>>,
    pub visited_profiles: Vec<VisitedProfiles>,
    /// Full policies at the configured cadence, keyed by episode (1-based).
    pub full_policies: Vec<(usize, FullPolicy)>,
    pub summaries: Vec<EpisodeSummary>,
    pub gram_drift_at_refresh: f64,
    pub gram_drift_between: f64,
}

struct EpisodeTracker {
    max_bonus: f64,
    max_eps: f64,
    non_convergences: usize,
}

impl EpisodeTracker {
    fn new() -> Self {
        Self {
            max_bonus: 0.0,
            max_eps: 0.0,
            non_convergences: 0,
        }
    }

    fn observe(&mut self, res: &SolveResult) {
        self.max_eps = self.max_eps.max(res.exploitability);
        if !res.converged {
            self.non_convergences += 1;
        }
    }
}

/// Run NQOVI for `cfg.episodes` episodes on `mg`.
pub fn run(mg: &LinearMG, cfg: &LearnerConfig) -> Result<RunRecord, LearnerError> {
    cfg.check()?;
    mg.check()?;
    let d = mg.dim();
    let horizon = mg.horizon;
    let n = mg.num_agents;
    let num_joint = mg.num_joint_actions();
    let beta = cfg.resolved_beta(d, horizon)?;
    let settings = cfg.solver_settings();

    let mut action_rng = stream_rng(cfg.seed, "action-sampling");
    let mut transition_rng = stream_rng(cfg.seed, "transition-sampling");

    // Pre-evaluate features once; (x, a) -> DVector.
    let mut phi_table = Vec::with_capacity(mg.num_states * num_joint);
    for x in 0..mg.num_states {
        for a in 0..num_joint {
            phi_table.push(DVector::from_vec(mg.feature(x, a)?));
        }
    }
    let phi = |x: usize, a: usize| &phi_table[x * num_joint + a];

    let mut grams: Vec<GramState> = (0..horizon)
        .map(|_| GramState::new(d, cfg.lambda, cfg.refresh_period))
        .collect();

    let mut record = RunRecord {
        config: cfg.clone(),
        beta,
        dim: d,
        horizon,
        num_agents: n,
        trajectories: Vec::with_capacity(cfg.episodes),
        weights: Vec::with_capacity(cfg.episodes),
        visited_profiles: Vec::with_capacity(cfg.episodes),
        full_policies: Vec::new(),
        summaries: Vec::with_capacity(cfg.episodes),
        gram_drift_at_refresh: 0.0,
        gram_drift_between: 0.0,
    };

    for k in 1..=cfg.episodes {
        // Fold episode k-1 into each step's Gram state incrementally.
        if k > 1 {
            let prev = &record.trajectories[k - 2];
            for h in 0..horizon {
                grams[h].update(phi(prev.states[h], prev.joint_actions[h]))?;
            }
        }

        let mut tracker = EpisodeTracker::new();

        // Backward pass: weights[h][i], h = H..1 (0-based H-1..0).
        let mut weights: Vec<Vec<DVector<f64>>> = vec![Vec::new(); horizon];
        for h in (0..horizon).rev() {
            // Optimistic Q at step h+1 from the weights finalized this
            // episode; zero beyond the horizon.
            let q_next = |i: usize, x: usize, a: usize| -> Result<f64, LearnerError> {
                if h + 1 >= horizon {
                    Ok(0.0)
                } else {
                    optimistic_q_value(&weights[h + 1][i], beta, &grams[h + 1], phi(x, a), horizon)
                }
            };

            // Nash value of the next-step stage game, solved once per
            // distinct regression state and shared across agents.
            let mut v_next: Vec<Option<Vec<f64>>> = vec![None; mg.num_states];
            let mut v_next_at = |x: usize,
                                 tracker: &mut EpisodeTracker|
             -> Result<Vec<f64>, LearnerError> {
                if let Some(v) = &v_next[x] {
                    return Ok(v.clone());
                }
                let v = if h + 1 >= horizon {
                    vec![0.0; n]
                } else {
                    let mut q = vec![vec![0.0; num_joint]; n];
                    for (i, qi) in q.iter_mut().enumerate() {
                        for (a, qa) in qi.iter_mut().enumerate() {
                            *qa = q_next(i, x, a)?;
                        }
                    }
                    let game = build_stage_game(&mg.action_dims, x, |i, _, a| q[i][a])?;
                    let res = solve(&game, &settings)?;
                    tracker.observe(&res);
                    (0..n)
                        .map(|i| expected_payoff(&game, &res.profile, i))
                        .collect()
                };
                v_next[x] = Some(v.clone());
                Ok(v)
            };

            let mut step_weights = Vec::with_capacity(n);
            let mut feats = Vec::with_capacity(k - 1);
            let mut targets: Vec<Vec<f64>> = vec![Vec::with_capacity(k - 1); n];
            for traj in record.trajectories.iter() {
                let (x, a) = (traj.states[h], traj.joint_actions[h]);
                feats.push(phi(x, a).clone());
                let v = v_next_at(traj.states[h + 1], &mut tracker)?;
                for (i, t) in targets.iter_mut().enumerate() {
                    t.push(traj.rewards[h][i] + v[i]);
                }
            }
            for targets_i in &targets {
                step_weights.push(regress_weights(&grams[h], &feats, targets_i)?);
            }
            weights[h] = step_weights;
        }

        // Q^{i,k}_h for this episode's finalized weights.
        let q_at = |i: usize, h: usize, x: usize, a: usize| -> Result<f64, LearnerError> {
            optimistic_q_value(&weights[h][i], beta, &grams[h], phi(x, a), horizon)
        };
        let solve_at = |h: usize,
                        x: usize,
                        tracker: &mut EpisodeTracker|
         -> Result<MixedProfile, LearnerError> {
            let mut q = vec![vec![0.0; num_joint]; n];
            for (i, qi) in q.iter_mut().enumerate() {
                for (a, qa) in qi.iter_mut().enumerate() {
                    *qa = q_at(i, h, x, a)?;
                }
            }
            let game = build_stage_game(&mg.action_dims, x, |i, _, a| q[i][a])?;
            let res = solve(&game, &settings)?;
            tracker.observe(&res);
            Ok(res.profile)
        };

        // Forward rollout.
        let mut states = Vec::with_capacity(horizon + 1);
        let mut joint_actions = Vec::with_capacity(horizon);
        let mut rewards = Vec::with_capacity(horizon);
        let mut bonuses = Vec::with_capacity(horizon);
        let mut profiles = Vec::with_capacity(horizon);
        let mut x = mg.initial_state;
        states.push(x);
        for h in 0..horizon {
            let profile = solve_at(h, x, &mut tracker)?;
            let mut actions = Vec::with_capacity(n);
            for s in &profile.strategies {
                actions.push(sample_index(&mut action_rng, s));
            }
            let a = crate::linear_mg::joint_index(&mg.action_dims, &actions);
            let bonus = beta * grams[h].quad_form(phi(x, a))?.sqrt();
            tracker.max_bonus = tracker.max_bonus.max(bonus);
            rewards.push((0..n).map(|i| mg.reward(h, i, x, a)).collect());
            bonuses.push(bonus);
            joint_actions.push(a);
            profiles.push(profile);
            let next = sample_index(&mut transition_rng, mg.kernel(h, x, a));
            states.push(next);
            x = next;
        }

        // Optional full-policy materialization at every state.
        if cfg
            .full_policy_every
            .map(|m| m >= 1 && k % m == 0)
            .unwrap_or(false)
        {
            let mut policy: FullPolicy = Vec::with_capacity(horizon);
            for h in 0..horizon {
                let mut per_state = Vec::with_capacity(mg.num_states);
                for xs in 0..mg.num_states {
                    // Reuse the rollout's profile at the realized state so
                    // the recorded policy is exactly the executed one.
                    if xs == states[h] {
                        per_state.push(profiles[h].clone());
                    } else {
                        per_state.push(solve_at(h, xs, &mut tracker)?);
                    }
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
            .push(weights.iter().map(|ws| ws.iter().map(|w| w.as_slice().to_vec()).collect()).collect());
        record.visited_profiles.push(profiles);
        record.summaries.push(EpisodeSummary {
            max_bonus: tracker.max_bonus,
            stage_solver_max_eps: tracker.max_eps,
            solver_non_convergences: tracker.non_convergences,
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
    use crate::linear_mg::{random_linear_mg, random_tabular_mg};
    use approx::assert_abs_diff_eq;

    #[test]
    fn beta_formula_matches_hand_computation() {
        let b = theoretical_beta(1.0, 2, 10, 2, 0.1).unwrap();
        assert_abs_diff_eq!(b, 4.0 * (400.0f64).ln().sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b, 9.791061306549202, epsilon = 1e-4);
        assert_eq!(theoretical_beta(0.0, 2, 10, 2, 0.1).unwrap(), 0.0);
        let b2 = theoretical_beta(2.0, 2, 10, 2, 0.1).unwrap();
        assert_abs_diff_eq!(b2, 2.0 * b, epsilon = 1e-12);
    }

    #[test]
    fn gram_update_diagonal_case() {
        let mut gs = GramState::new(2, 1.0, 64);
        gs.update(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(gs.matrix[(0, 0)], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.matrix[(1, 1)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.inverse[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.inverse[(1, 1)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gram_update_zero_feature_is_identity() {
        let mut gs = GramState::new(3, 1.0, 64);
        let before = gs.matrix.clone();
        gs.update(&DVector::zeros(3)).unwrap();
        assert_eq!(gs.matrix, before);
    }

    #[test]
    fn gram_determinant_is_monotone_and_bounded() {
        let mut gs = GramState::new(3, 1.0, 8);
        let mut rng = stream_rng(3, "t");
        let mut prev_det = gs.matrix.determinant();
        let k = 40;
        for _ in 0..k {
            let mut v: Vec<f64> = (0..3).map(|_| rand::Rng::gen::<f64>(&mut rng) - 0.5).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 {
                for x in &mut v {
                    *x /= norm;
                }
            }
            gs.update(&DVector::from_vec(v)).unwrap();
            let det = gs.matrix.determinant();
            assert!(det >= prev_det - 1e-9);
            prev_det = det;
        }
        assert!(prev_det <= ((k as f64) + 1.0).powi(3) + 1e-6);
    }

    #[test]
    fn regress_empty_history_gives_zero() {
        let gs = GramState::new(4, 1.0, 64);
        let w = regress_weights(&gs, &[], &[]).unwrap();
        assert_eq!(w, DVector::zeros(4));
    }

    #[test]
    fn regress_single_one_hot_sample() {
        let mut gs = GramState::new(3, 1.0, 64);
        let e1 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        gs.update(&e1).unwrap();
        let w = regress_weights(&gs, &[e1], &[0.8]).unwrap();
        assert_abs_diff_eq!(w[1], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(w[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn optimistic_q_clip_and_arithmetic() {
        let gs = GramState::new(2, 1.0, 64);
        let phi = DVector::from_vec(vec![1.0, 0.0]);
        let w = DVector::zeros(2);
        // Large beta: clip dominates.
        assert_eq!(optimistic_q_value(&w, 100.0, &gs, &phi, 2).unwrap(), 2.0);
        // Zero feature: both terms vanish.
        let zero = DVector::zeros(2);
        assert_eq!(optimistic_q_value(&w, 100.0, &gs, &zero, 2).unwrap(), 0.0);
        // Below the clip it is plain arithmetic.
        let w = DVector::from_vec(vec![0.3, 0.0]);
        let v = optimistic_q_value(&w, 0.2, &gs, &phi, 2).unwrap();
        assert_abs_diff_eq!(v, 0.3 + 0.2, epsilon = 1e-12);
    }

    #[test]
    fn first_episode_collapses_to_pure_bonus() {
        let (mg, _) = random_linear_mg(11, 4, 3, &[2, 2], 3, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 1,
            seed: 5,
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        // k = 1: empty history means w = 0 everywhere.
        for h in 0..mg.horizon {
            for i in 0..mg.num_agents {
                assert!(rec.weights[0][h][i].iter().all(|&v| v == 0.0));
            }
        }
        // Q^{i,1}(x,a) = min(beta ||phi||, H): the realized bonus must match.
        let traj = &rec.trajectories[0];
        for h in 0..mg.horizon {
            let phi = mg.feature(traj.states[h], traj.joint_actions[h]).unwrap();
            let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_abs_diff_eq!(traj.bonuses[h], rec.beta * norm, epsilon = 1e-9);
        }
    }

    #[test]
    fn run_is_deterministic_in_seed() {
        let (mg, _) = random_tabular_mg(3, 2, &[2, 2], 2, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 12,
            c_beta: 0.2,
            seed: 42,
            ..Default::default()
        };
        let a = run(&mg, &cfg).unwrap();
        let b = run(&mg, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weight_norm_bound_holds() {
        let (mg, _) = random_linear_mg(9, 5, 3, &[2, 2], 3, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 30,
            seed: 1,
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        let d = mg.dim() as f64;
        let h_f = mg.horizon as f64;
        for (k0, per_h) in rec.weights.iter().enumerate() {
            let bound = (1.0 + h_f) * (d * k0 as f64 / cfg.lambda).sqrt();
            for per_i in per_h {
                for w in per_i {
                    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    assert!(
                        norm <= bound + 1e-8,
                        "||w|| = {norm} exceeds bound {bound} at k = {}",
                        k0 + 1
                    );
                }
            }
        }
    }

    #[test]
    fn trajectory_shape_invariants() {
        let (mg, _) = random_tabular_mg(8, 3, &[2], 4, 1).unwrap();
        let cfg = LearnerConfig {
            episodes: 5,
            seed: 2,
            ..Default::default()
        };
        let rec = run(&mg, &cfg).unwrap();
        assert_eq!(rec.trajectories.len(), 5);
        for t in &rec.trajectories {
            assert_eq!(t.states.len(), mg.horizon + 1);
            assert_eq!(t.states[0], mg.initial_state);
            assert_eq!(t.joint_actions.len(), mg.horizon);
        }
    }
}
