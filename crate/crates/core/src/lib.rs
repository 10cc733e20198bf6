//! Nash Q-learning with optimistic value iteration on episodic general-sum
//! linear Markov games, plus the exact dynamic-programming oracle used to
//! measure Nash-gap regret.

pub mod linear_mg;
pub mod nqovi;
pub mod oracle;
pub mod rng;
pub mod stage_game;

pub use linear_mg::{LinearMG, FeatureKind, FeatureMap, ModelError, ModelValidationReport};
pub use nqovi::{GramState, LearnerConfig, LearnerError, RunRecord, Trajectory};
pub use oracle::{JointPolicy, OracleError, ValueTable};
pub use stage_game::{MixedProfile, SolveResult, SolverSettings, StageGame, StageGameError};
