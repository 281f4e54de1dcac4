//! Simulation engine for quantum approximate counting and amplitude
//! estimation using Grover iterations only (no quantum Fourier transform).
//!
//! The estimator brackets the Grover angle `θ = arcsin √(K/N)` with an
//! interval `[θ_min, θ_max]`. A rough exponential search finds a constant
//! factor bracket, then each refinement round picks an odd iteration count
//! `r` that makes the two endpoints statistically distinguishable and
//! shrinks the interval ratio by a factor 0.9. The estimator only observes
//! coin flips from a [`CoinBackend`]; the backend is either an exact
//! analytic model of `sin²(rθ)` or a statevector simulation.
//!
//! Monte Carlo trials are data parallel. With the default `parallel`
//! feature they run on a rayon pool (capped by `QCOUNT_THREADS`);
//! without it they run sequentially with identical results.

pub mod accounting;
pub mod coin;
mod error;
pub mod estimator;
pub mod harness;
pub mod report;
pub mod rng;
pub mod rotation;
pub mod trials;

pub use accounting::{theoretical_envelope, IterationRecord, Phase, QueryLedger};
pub use coin::{
    analytic_heads_prob, grover_angle, statevector_grover_state, statevector_heads_prob,
    BackendKind, CoinBackend, GroverAngle, MarkedSetProblem, DEFAULT_DENSE_CAP,
};
pub use error::{Error, Result};
pub use estimator::{
    approximate_count, classical_baseline_count, estimate_amplitude, pad_problem,
    AmplitudeProblem, EstimateResult, EstimatorConfig,
};
pub use rotation::{choose_r, decision_round, r_bounds, update_interval, AngleInterval, RotationChoice};
