//! Normal-form stage games and their Nash solvers.
//!
//! The solver cascade is: exact pure search, then exact bimatrix support
//! enumeration for two players, then regret matching as the approximate
//! fallback. Tie-breaking is lexicographic on action indices throughout so
//! that identical payoff tensors always produce identical results.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linear_mg::{decode_joint, joint_action_count, joint_index};

/// Guard on pure-NE enumeration.
pub const PURE_ENUM_GUARD: usize = 1_000_000;
/// Exactness threshold for the exact solvers.
pub const EXACT_TOL: f64 = 1e-10;
/// Classification tolerance.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum StageGameError {
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// An n-player normal-form game; `payoffs[i][joint]` is agent i's payoff at
/// the mixed-radix joint-action index.
#[derive(Debug, Clone, PartialEq)]
pub struct StageGame {
    pub action_dims: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

impl StageGame {
    pub fn new(action_dims: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self, StageGameError> {
        let num_joint = joint_action_count(&action_dims);
        if payoffs.is_empty() || payoffs.len() != action_dims.len() {
            return Err(StageGameError::Shape(
                "one payoff tensor per agent is required".into(),
            ));
        }
        for (i, g) in payoffs.iter().enumerate() {
            if g.len() != num_joint {
                return Err(StageGameError::Shape(format!(
                    "agent {i} tensor has {} entries, expected {num_joint}",
                    g.len()
                )));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(StageGameError::Numeric(format!(
                    "non-finite payoff for agent {i}"
                )));
            }
        }
        Ok(Self {
            action_dims,
            payoffs,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.action_dims.len()
    }

    pub fn num_joint_actions(&self) -> usize {
        joint_action_count(&self.action_dims)
    }
}

/// Build the stage game `g_i[a] = Q^i(x, a)` from per-agent Q evaluators.
pub fn build_stage_game<F>(
    action_dims: &[usize],
    state: usize,
    q_values: F,
) -> Result<StageGame, StageGameError>
where
    F: Fn(usize, usize, usize) -> f64, // (agent, state, joint) -> Q
{
    let num_joint = joint_action_count(action_dims);
    let mut payoffs = Vec::with_capacity(action_dims.len());
    for i in 0..action_dims.len() {
        let mut g = Vec::with_capacity(num_joint);
        for a in 0..num_joint {
            let q = q_values(i, state, a);
            if !q.is_finite() {
                return Err(StageGameError::Numeric(format!(
                    "Q^{i}({state},{a}) is not finite"
                )));
            }
            g.push(q);
        }
        payoffs.push(g);
    }
    StageGame::new(action_dims.to_vec(), payoffs)
}

/// Per-agent mixed strategies; the joint measure is their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub strategies: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn pure(action_dims: &[usize], actions: &[usize]) -> Self {
        let strategies = action_dims
            .iter()
            .zip(actions)
            .map(|(&dim, &a)| {
                let mut s = vec![0.0; dim];
                s[a] = 1.0;
                s
            })
            .collect();
        Self { strategies }
    }

    pub fn uniform(action_dims: &[usize]) -> Self {
        let strategies = action_dims
            .iter()
            .map(|&dim| vec![1.0 / dim as f64; dim])
            .collect();
        Self { strategies }
    }

    /// Probability of a joint-action index under the product measure.
    pub fn joint_prob(&self, action_dims: &[usize], joint: usize) -> f64 {
        let actions = decode_joint(action_dims, joint);
        self.strategies
            .iter()
            .zip(&actions)
            .map(|(s, &a)| s[a])
            .product()
    }

    pub fn is_valid(&self, action_dims: &[usize], tol: f64) -> bool {
        self.strategies.len() == action_dims.len()
            && self
                .strategies
                .iter()
                .zip(action_dims)
                .all(|(s, &dim)| {
                    s.len() == dim
                        && s.iter().all(|&p| p >= -tol)
                        && (s.iter().sum::<f64>() - 1.0).abs() <= tol
                })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverTag {
    Pure,
    BimatrixExact,
    Approx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub profile: MixedProfile,
    /// Independently recomputable exploitability of `profile`.
    pub exploitability: f64,
    pub tag: SolverTag,
    pub iterations: usize,
    pub converged: bool,
}

/// Expected payoff of agent `i` under a product profile.
pub fn expected_payoff(game: &StageGame, profile: &MixedProfile, agent: usize) -> f64 {
    let mut total = 0.0;
    for joint in 0..game.num_joint_actions() {
        let p = profile.joint_prob(&game.action_dims, joint);
        if p > 0.0 {
            total += p * game.payoffs[agent][joint];
        }
    }
    total
}

/// Expected payoff of agent `i` when it deviates to pure action `a_i` while
/// opponents keep their profile components.
pub fn deviation_payoff(game: &StageGame, profile: &MixedProfile, agent: usize, action: usize) -> f64 {
    let mut total = 0.0;
    for joint in 0..game.num_joint_actions() {
        let actions = decode_joint(&game.action_dims, joint);
        if actions[agent] != action {
            continue;
        }
        let mut p = 1.0;
        for (j, s) in profile.strategies.iter().enumerate() {
            if j != agent {
                p *= s[actions[j]];
            }
        }
        if p > 0.0 {
            total += p * game.payoffs[agent][joint];
        }
    }
    total
}

/// Maximum unilateral gain available at `profile`; zero exactly at an NE.
pub fn exploitability(game: &StageGame, profile: &MixedProfile) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..game.num_agents() {
        let current = expected_payoff(game, profile, i);
        let best = (0..game.action_dims[i])
            .map(|a| deviation_payoff(game, profile, i, a))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(best - current);
    }
    worst.max(0.0)
}

/// Lexicographically smallest pure Nash equilibrium, if one exists.
pub fn solve_pure(game: &StageGame) -> Result<Option<MixedProfile>, StageGameError> {
    let num_joint = game.num_joint_actions();
    if num_joint > PURE_ENUM_GUARD {
        return Err(StageGameError::Capacity(format!(
            "{num_joint} joint actions exceeds the enumeration guard"
        )));
    }
    'joint: for joint in 0..num_joint {
        let actions = decode_joint(&game.action_dims, joint);
        for i in 0..game.num_agents() {
            let own = game.payoffs[i][joint];
            let mut alt = actions.clone();
            for a in 0..game.action_dims[i] {
                alt[i] = a;
                if game.payoffs[i][joint_index(&game.action_dims, &alt)] > own {
                    continue 'joint;
                }
            }
        }
        return Ok(Some(MixedProfile::pure(&game.action_dims, &actions)));
    }
    Ok(None)
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    // Lexicographic order over sorted index lists.
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, size, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, size, 0, &mut cur, &mut out);
    out
}

/// Solve the indifference system for one side of a support pair.
///
/// Find `y` on `support_cols` making every row of `support_rows` achieve the
/// same value `v`, with `y >= 0` and no profitable row outside the support.
/// `payoff(r, c)` is the optimizing player's payoff.
fn support_system<P>(
    rows: usize,
    cols: usize,
    support_rows: &[usize],
    support_cols: &[usize],
    payoff: P,
) -> Option<(Vec<f64>, f64)>
where
    P: Fn(usize, usize) -> f64,
{
    let s = support_cols.len();
    debug_assert_eq!(support_rows.len(), s);
    // Unknowns: y over support_cols plus the common value v.
    let mut a = DMatrix::zeros(s + 1, s + 1);
    let mut b = DVector::zeros(s + 1);
    for (eq, &r) in support_rows.iter().enumerate() {
        for (j, &c) in support_cols.iter().enumerate() {
            a[(eq, j)] = payoff(r, c);
        }
        a[(eq, s)] = -1.0;
    }
    for j in 0..s {
        a[(s, j)] = 1.0;
    }
    b[s] = 1.0;

    let lu = a.lu();
    let sol = lu.solve(&b)?;
    let v = sol[s];
    let mut y = vec![0.0; cols];
    for (j, &c) in support_cols.iter().enumerate() {
        let p = sol[j];
        if p < -EXACT_TOL {
            return None;
        }
        y[c] = p.max(0.0);
    }
    let total: f64 = y.iter().sum();
    if total <= 0.0 {
        return None;
    }
    for p in &mut y {
        *p /= total;
    }
    // No profitable deviation outside the support rows.
    for r in 0..rows {
        if support_rows.contains(&r) {
            continue;
        }
        let val: f64 = (0..cols).map(|c| payoff(r, c) * y[c]).sum();
        if val > v + EXACT_TOL {
            return None;
        }
    }
    Some((y, v))
}

/// Exact mixed NE of a two-player game by equal-size support enumeration.
///
/// Support pairs are visited smaller first, then lexicographically, so the
/// returned equilibrium is deterministic. Singular or infeasible systems
/// fall through to the next pair.
pub fn solve_bimatrix(game: &StageGame) -> Result<SolveResult, StageGameError> {
    if game.num_agents() != 2 {
        return Err(StageGameError::Shape("solve_bimatrix needs n = 2".into()));
    }
    let (m, n) = (game.action_dims[0], game.action_dims[1]);
    let pay = |agent: usize, r: usize, c: usize| game.payoffs[agent][r * n + c];

    let mut tried = 0usize;
    for size in 1..=m.min(n) {
        for s1 in subsets_of_size(m, size) {
            for s2 in subsets_of_size(n, size) {
                tried += 1;
                // Row player indifferent over s1 given y on s2.
                let Some((y, v1)) = support_system(m, n, &s1, &s2, |r, c| pay(0, r, c)) else {
                    continue;
                };
                // Column player indifferent over s2 given x on s1.
                let Some((x, _v2)) = support_system(n, m, &s2, &s1, |c, r| pay(1, r, c)) else {
                    continue;
                };
                let _ = v1;
                let profile = MixedProfile {
                    strategies: vec![x, y],
                };
                let eps = exploitability(game, &profile);
                if eps <= EXACT_TOL {
                    return Ok(SolveResult {
                        profile,
                        exploitability: eps,
                        tag: SolverTag::BimatrixExact,
                        iterations: tried,
                        converged: true,
                    });
                }
            }
        }
    }
    Err(StageGameError::Solver(
        "support enumeration found no equilibrium (degenerate game)".into(),
    ))
}

/// Regret matching on the time-averaged profile.
///
/// Returns once the averaged profile's exploitability drops to `target_eps`
/// or the iteration budget runs out; the achieved exploitability is always
/// the recomputed value, never the target.
pub fn solve_approx(
    game: &StageGame,
    target_eps: f64,
    max_iters: usize,
) -> Result<SolveResult, StageGameError> {
    if target_eps <= 0.0 {
        return Err(StageGameError::Solver("target epsilon must be > 0".into()));
    }
    let n = game.num_agents();
    let dims = &game.action_dims;
    let mut regrets: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    let mut avg: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    let mut current = MixedProfile::uniform(dims);

    let check_every = 64usize;
    let mut iters = 0usize;
    while iters < max_iters {
        iters += 1;
        // Counterfactual action values under the current product profile.
        for i in 0..n {
            let u_cur = expected_payoff(game, &current, i);
            for a in 0..dims[i] {
                let u_a = deviation_payoff(game, &current, i, a);
                regrets[i][a] += u_a - u_cur;
            }
        }
        for i in 0..n {
            let positive: f64 = regrets[i].iter().map(|&r| r.max(0.0)).sum();
            for a in 0..dims[i] {
                current.strategies[i][a] = if positive > 0.0 {
                    regrets[i][a].max(0.0) / positive
                } else {
                    1.0 / dims[i] as f64
                };
                avg[i][a] += current.strategies[i][a];
            }
        }
        if iters % check_every == 0 || iters == max_iters {
            let profile = normalize_average(&avg, iters);
            let eps = exploitability(game, &profile);
            if eps <= target_eps {
                return Ok(SolveResult {
                    profile,
                    exploitability: eps,
                    tag: SolverTag::Approx,
                    iterations: iters,
                    converged: true,
                });
            }
        }
    }
    let profile = normalize_average(&avg, iters.max(1));
    let eps = exploitability(game, &profile);
    Ok(SolveResult {
        profile,
        exploitability: eps,
        tag: SolverTag::Approx,
        iterations: iters,
        converged: eps <= target_eps,
    })
}

fn normalize_average(avg: &[Vec<f64>], iters: usize) -> MixedProfile {
    let strategies = avg
        .iter()
        .map(|s| s.iter().map(|&v| v / iters as f64).collect())
        .collect();
    MixedProfile { strategies }
}

/// Cascade settings for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub approx_eps: f64,
    pub approx_max_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            approx_eps: 1e-6,
            approx_max_iters: 100_000,
        }
    }
}

/// Solver cascade: pure, then exact bimatrix for `n = 2`, then regret
/// matching. Exact routes report zero/tiny exploitability; the approximate
/// route reports whatever it achieved.
pub fn solve(game: &StageGame, settings: &SolverSettings) -> Result<SolveResult, StageGameError> {
    if let Some(profile) = solve_pure(game)? {
        let eps = exploitability(game, &profile);
        return Ok(SolveResult {
            profile,
            exploitability: eps,
            tag: SolverTag::Pure,
            iterations: 0,
            converged: true,
        });
    }
    if game.num_agents() == 2 {
        match solve_bimatrix(game) {
            Ok(res) => return Ok(res),
            Err(StageGameError::Solver(_)) => {} // degenerate; fall through
            Err(e) => return Err(e),
        }
    }
    solve_approx(game, settings.approx_eps, settings.approx_max_iters)
}

/// Equilibrium class flags per the global-optimal / saddle definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyFlags {
    pub is_nash: bool,
    pub is_global_optimal: bool,
    pub is_saddle: bool,
}

/// Classify a profile.
///
/// Expected payoffs are multilinear in the per-agent strategies, so maxima
/// over product profiles are attained at pure profiles and both the
/// global-optimal and saddle conditions are decided exactly by pure-deviation
/// enumeration. The opponents-deviation side of the saddle condition allows
/// correlated deviations, which pure joint deviations also cover by
/// linearity.
pub fn classify(game: &StageGame, profile: &MixedProfile, tol: f64) -> ClassifyFlags {
    let n = game.num_agents();
    let num_joint = game.num_joint_actions();
    let is_nash = exploitability(game, profile) <= tol;

    let values: Vec<f64> = (0..n).map(|i| expected_payoff(game, profile, i)).collect();

    let mut is_global_optimal = true;
    for i in 0..n {
        let best = game.payoffs[i]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if values[i] < best - tol {
            is_global_optimal = false;
            break;
        }
    }

    let mut is_saddle = true;
    'outer: for i in 0..n {
        // Unilateral own deviations cannot gain.
        for a in 0..game.action_dims[i] {
            if deviation_payoff(game, profile, i, a) > values[i] + tol {
                is_saddle = false;
                break 'outer;
            }
        }
        // Any (possibly correlated) opponents' deviation cannot lower i's
        // payoff below the equilibrium value; checked at pure joint
        // opponent actions.
        for joint in 0..num_joint {
            let actions = decode_joint(&game.action_dims, joint);
            // Expectation over i's own equilibrium strategy with opponents
            // pinned at `actions`.
            let mut value = 0.0;
            let mut alt = actions.clone();
            for (a, &p) in profile.strategies[i].iter().enumerate() {
                if p > 0.0 {
                    alt[i] = a;
                    value += p * game.payoffs[i][joint_index(&game.action_dims, &alt)];
                }
            }
            if value < values[i] - tol {
                is_saddle = false;
                break 'outer;
            }
        }
    }

    ClassifyFlags {
        is_nash,
        is_global_optimal,
        is_saddle,
    }
}
