//! Self-play reinforcement learning on turn-based two-player zero-sum games.
//!
//! The crate is organized around a small environment contract ([`env`]) that
//! six built-in games implement ([`games`]), a role-and-game-conditioned
//! tabular softmax policy ([`policy`]), role-conditioned EMA baselines
//! ([`advantage`]), a clipped policy-gradient learner ([`learner`]), a
//! synchronous actor-learner training loop ([`runtime`]), and an evaluation
//! harness with exact oracles for Kuhn Poker and TicTacToe ([`eval`]).
//!
//! All numeric code is generic over the scalar type via [`scalar::Scalar`];
//! the type aliases below pin the default `f64` instantiation used by the
//! CLI and the checkpoint format.

pub mod ablate;
pub mod advantage;
pub mod agents;
pub mod checkpoint;
pub mod config;
pub mod env;
pub mod eval;
pub mod games;
pub mod learner;
pub mod metrics;
pub mod policy;
pub mod runtime;
pub mod scalar;
pub mod seeds;
pub mod trajectory;

pub use env::{ActionToken, EnvError, GameId, GameState, ObservationKey, Outcome, OutcomeReason, Role};
pub use scalar::Scalar;

/// Default scalar type for training runs and checkpoints.
pub type DefaultScalar = f64;

/// Tabular policy over the default scalar.
pub type Policy = policy::PolicyParams<DefaultScalar>;
/// Per-(game, role) baseline table over the default scalar.
pub type Baselines = advantage::BaselineTable<DefaultScalar>;
/// Optimizer state over the default scalar.
pub type Optimizer = learner::OptimizerState<DefaultScalar>;
/// Collected trajectory over the default scalar.
pub type Traj = trajectory::Trajectory<DefaultScalar>;
/// Training checkpoint over the default scalar.
pub type Checkpoint = checkpoint::Checkpoint<DefaultScalar>;

/// Single-precision policy, for callers that trade accuracy for memory.
pub type PolicyF32 = policy::PolicyParams<f32>;
