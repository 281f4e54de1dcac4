//! Choosing the odd iteration count that separates the two ends of the
//! current angle bracket, and the 0.9γ bracket update.
//!
//! With `Δθ = θ_max − θ_min`, `k = round(θ_min / 4Δθ)` and
//! `r = nearest odd to 2πk/θ_min`, the product `rθ_min` sits near `2πk` and
//! `rθ_max` near `2πk + π/2`. A coin with heads probability `sin²(rθ)` is then
//! mostly tails when θ is near `θ_min` and mostly heads when θ is near
//! `θ_max`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::accounting::{Phase, QueryLedger};
use crate::coin::CoinBackend;
use crate::error::{Error, Result};

/// Largest `θ_max` the rotation construction is guaranteed for.
pub const MAX_BRACKET_ANGLE: f64 = PI / 1000.0;

/// Largest ratio parameter γ the rotation construction accepts.
pub const MAX_GAMMA: f64 = 0.2;

/// Default per-round shrink factor for γ.
pub const SHRINK: f64 = 0.9;

/// Slack for floating comparisons against the γ and θ_max limits.
const LIMIT_TOL: f64 = 1e-12;

/// Values this close (relative) to an x.5 boundary count as ties.
const TIE_TOL: f64 = 1e-9;

/// A bracket `[θ_min, θ_max]` around the Grover angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl AngleInterval {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite() && theta_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bracket [{theta_min}, {theta_max}] needs finite positive endpoints"
            )));
        }
        if theta_min > theta_max {
            return Err(Error::InvalidParameter(format!(
                "bracket endpoints reversed: {theta_min} > {theta_max}"
            )));
        }
        Ok(AngleInterval { theta_min, theta_max })
    }

    /// `θ_max/θ_min − 1`.
    pub fn gamma(&self) -> f64 {
        self.theta_max / self.theta_min - 1.0
    }

    pub fn width(&self) -> f64 {
        self.theta_max - self.theta_min
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.theta_min <= theta && theta <= self.theta_max
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.theta_min + self.theta_max)
    }
}

/// The odd iteration count for one refinement round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationChoice {
    pub r: u64,
    /// Number of full turns `r·θ_min` is placed near.
    pub k: u64,
    pub delta_theta: f64,
}

/// Rounds half toward +∞; values within a relative `TIE_TOL` of a tie round up.
fn round_half_up(x: f64) -> f64 {
    (x + 0.5 + TIE_TOL * x.abs().max(1.0)).floor()
}

/// Nearest odd integer, choosing the larger one on ties.
fn nearest_odd(x: f64) -> f64 {
    2.0 * round_half_up((x - 1.0) / 2.0) + 1.0
}

/// Builds the rotation without the `θ_max ≤ π/1000` guarantee check. The
/// estimator uses this so a rough bracket that overshoots after an unlikely
/// early exit still yields a round instead of an error.
pub(crate) fn construct(interval: &AngleInterval) -> Result<RotationChoice> {
    let gamma = interval.gamma();
    if !(gamma > 0.0) {
        return Err(Error::RotationPrecondition(format!(
            "degenerate bracket [{}, {}]",
            interval.theta_min, interval.theta_max
        )));
    }
    if gamma > MAX_GAMMA + LIMIT_TOL {
        return Err(Error::RotationPrecondition(format!("γ = {gamma} exceeds 1/5")));
    }
    let delta_theta = interval.width();
    let k = round_half_up(interval.theta_min / (4.0 * delta_theta));
    let r = nearest_odd(2.0 * PI * k / interval.theta_min);
    if !(r.is_finite() && r < 2f64.powi(63)) {
        return Err(Error::RotationOverflow(r));
    }
    Ok(RotationChoice { r: r.max(1.0) as u64, k: k as u64, delta_theta })
}

/// Odd iteration count for `interval`, which must satisfy
/// `0 < θ_min ≤ θ_max ≤ π/1000` and `0 < γ ≤ 1/5`.
pub fn choose_r(interval: &AngleInterval) -> Result<RotationChoice> {
    if interval.theta_max > MAX_BRACKET_ANGLE * (1.0 + LIMIT_TOL) {
        return Err(Error::RotationPrecondition(format!(
            "θ_max = {} exceeds π/1000",
            interval.theta_max
        )));
    }
    construct(interval)
}

/// The guaranteed range `π/(γθ)(1/2 ∓ γ) ∓ 1` for the rotation count at an
/// angle θ inside the bracket.
pub fn r_bounds(interval: &AngleInterval, theta: f64) -> Result<(f64, f64)> {
    if !interval.contains(theta) {
        return Err(Error::InvalidParameter(format!(
            "θ = {theta} outside [{}, {}]",
            interval.theta_min, interval.theta_max
        )));
    }
    let gamma = interval.gamma();
    let scale = PI / (gamma * theta);
    Ok((scale * (0.5 - gamma) - 1.0, scale * (0.5 + gamma) + 1.0))
}

/// Shrinks γ by 0.9: heads raises `θ_min`, tails lowers `θ_max`.
pub fn update_interval(interval: &AngleInterval, heads_majority: bool) -> AngleInterval {
    update_interval_with(interval, heads_majority, SHRINK)
}

pub(crate) fn update_interval_with(
    interval: &AngleInterval,
    heads_majority: bool,
    shrink: f64,
) -> AngleInterval {
    let factor = 1.0 + shrink * interval.gamma();
    if heads_majority {
        AngleInterval { theta_min: interval.theta_max / factor, theta_max: interval.theta_max }
    } else {
        AngleInterval { theta_min: interval.theta_min, theta_max: factor * interval.theta_min }
    }
}

/// Outcome of one refinement round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub choice: RotationChoice,
    pub samples: u64,
    pub heads: u64,
    pub interval: AngleInterval,
}

/// Flips the coin `m` times at `choose_r(interval).r` and applies the update;
/// "at least half" heads (`2·heads ≥ m`) takes the heads branch.
pub fn decision_round(
    interval: &AngleInterval,
    backend: &mut CoinBackend,
    m: u64,
    ledger: &mut QueryLedger,
) -> Result<RoundOutcome> {
    let choice = choose_r(interval)?;
    round_with(interval, choice, backend, m, SHRINK, ledger)
}

pub(crate) fn round_with(
    interval: &AngleInterval,
    choice: RotationChoice,
    backend: &mut CoinBackend,
    m: u64,
    shrink: f64,
    ledger: &mut QueryLedger,
) -> Result<RoundOutcome> {
    let heads = backend.flip_batch(choice.r, m, Phase::Step2, ledger)?;
    let majority = u128::from(heads) * 2 >= u128::from(m);
    Ok(RoundOutcome {
        choice,
        samples: m,
        heads,
        interval: update_interval_with(interval, majority, shrink),
    })
}
