//! Variational extragradient solver for two-player zero-sum matrix games.
//!
//! Mixed strategies are Born distributions of layered RY/RZ/CZ circuits,
//! simulated here on a classical statevector. Circuit parameters are moved by
//! projected extragradient using parameter-shift gradients, optionally with
//! finite-shot noise, and every iterate is certified by its Nash gap on the
//! original game. An exact linear-programming solver supplies ground truth.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! - [`game`]: payoff matrices, strategies, Nash gap, dominated embedding,
//!   instance generators
//! - [`lp`]: simplex and support-enumeration equilibria
//! - [`qstate`]: statevector and ansatz
//! - [`oracle`]: payoff, parameter-shift gradients and the saddle operator
//! - [`vqeg`]: the projected extragradient engine

#![no_std]

extern crate alloc;

pub mod error;
pub mod game;
pub mod lp;
pub mod oracle;
pub mod qstate;
pub mod rng;
pub mod vqeg;

pub use error::{Error, Result};
pub use game::{
    deviation_gains, embed_dominated, extend_strategy, nash_gap, payoff, restrict_strategy, EmbeddedGame, GameInstance,
    GameKind, MixedStrategy, PayoffMatrix, DEFAULT_C_MARGIN,
};
pub use lp::{solve_lp, solve_support_enum, ExactSolution};
pub use oracle::{GradientEstimate, JointParams, OpponentMode, PayoffOracle, SaddleField, ShotMode};
pub use qstate::{AnsatzSpec, StateVector};
pub use rng::StreamKey;
pub use vqeg::{
    default_layers, eg_step, project_box, projected_residual, run, EgConfig, RunResult, RunTrace, TraceRecord,
    PASS_TOLERANCE,
};
