//! Approximate counting, amplitude estimation, zero detection and the
//! classical coin-doubling baseline.
//!
//! A run has two phases against a seeded [`CoinBackend`]:
//!
//! 1. Rough search: for `t = 0, 1, 2, …` flip the coin
//!    `⌈10⁵·ln(120/δ)⌉` times at `r` = largest odd `≤ (12/11)^t` and stop once
//!    at least a third of the flips land heads. The bracket is then
//!    `[(5/8)(11/12)^{t+1}, (5/8)(11/12)^{t−1}]`, so `γ = (12/11)² − 1`.
//! 2. Refinement: round `t` flips `⌈1000·ln((100/δε)·0.9^t)⌉` times at the
//!    rotation count for the current bracket and shrinks γ by 0.9, until
//!    `θ_max ≤ (1 + ε/5)·θ_min`.
//!
//! The counting estimate is `N'·sin²(θ_max)` on the padded universe `N'`; the
//! amplitude estimate is `1000·sin(θ_max)`.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::accounting::{IterationRecord, Phase, QueryLedger};
use crate::coin::{BackendKind, CoinBackend, MarkedSetProblem};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::rotation::{self, AngleInterval};

/// Padding multiplier that guarantees `K ≤ 10⁻⁶·N'`.
pub const PADDING_FACTOR: u64 = 1_000_000;

/// Amplitude of `|0⟩` prepared by the ancilla rotation is `1/AMPLITUDE_SCALE`.
pub const AMPLITUDE_SCALE: f64 = 1000.0;

/// Sample-count constant for the classical baseline's second phase.
pub const CLASSICAL_SAMPLE_CONSTANT: f64 = 32.0;

/// Divisor applied to both sample multipliers by [`EstimatorConfig::with_fast_constants`].
pub const FAST_CONSTANTS_DIVISOR: f64 = 100.0;

/// Exact fraction used for the rough-search stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    /// `heads/m ≥ num/den`, without floating point.
    pub fn reached(&self, heads: u64, m: u64) -> bool {
        u128::from(heads) * u128::from(self.den) >= u128::from(m) * u128::from(self.num)
    }
}

/// Accuracy targets and algorithm constants. [`EstimatorConfig::new`] uses the
/// published constants; any override makes the run non-conforming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub step1_sample_multiplier: f64,
    pub step1_log_arg: f64,
    pub step2_sample_multiplier: f64,
    pub step2_log_base_arg: f64,
    pub growth_ratio: f64,
    pub init_coeff: f64,
    pub shrink: f64,
    pub step1_threshold: Fraction,
    pub padding_factor: u64,
    pub dense_cap: u64,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        let config = EstimatorConfig {
            epsilon,
            delta,
            step1_sample_multiplier: 1e5,
            step1_log_arg: 120.0,
            step2_sample_multiplier: 1000.0,
            step2_log_base_arg: 100.0,
            growth_ratio: 12.0 / 11.0,
            init_coeff: 5.0 / 8.0,
            shrink: 0.9,
            step1_threshold: Fraction { num: 1, den: 3 },
            padding_factor: PADDING_FACTOR,
            dense_cap: crate::coin::DEFAULT_DENSE_CAP,
        };
        config.validate()?;
        Ok(config)
    }

    /// Divides both sample multipliers by [`FAST_CONSTANTS_DIVISOR`] for smoke
    /// runs. The result is non-conforming.
    pub fn with_fast_constants(mut self) -> Self {
        self.step1_sample_multiplier /= FAST_CONSTANTS_DIVISOR;
        self.step2_sample_multiplier /= FAST_CONSTANTS_DIVISOR;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.step1_sample_multiplier > 0.0 && self.step2_sample_multiplier > 0.0) {
            return bad("sample multipliers must be positive");
        }
        if !(self.growth_ratio > 1.0 && self.init_coeff > 0.0) {
            return bad("growth ratio must exceed 1 and init coefficient must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        let th = self.step1_threshold;
        if th.den == 0 || th.num == 0 || th.num > th.den {
            return bad("step-1 threshold must be a fraction in (0, 1]");
        }
        if self.padding_factor == 0 {
            return bad("padding factor must be at least 1");
        }
        Ok(())
    }

    /// True when every algorithm constant has its published value.
    pub fn is_conforming(&self) -> bool {
        let published = EstimatorConfig::new(self.epsilon, self.delta);
        matches!(published, Ok(p) if p == *self)
    }

    /// `⌈10⁵·ln(120/δ)⌉`.
    pub fn step1_samples(&self) -> u64 {
        ceil_count(self.step1_sample_multiplier * (self.step1_log_arg / self.delta).ln())
    }

    /// `⌈1000·ln((100/δε)·0.9^t)⌉`, floored at one sample.
    pub fn step2_samples(&self, t: u32) -> u64 {
        let arg = self.step2_log_base_arg / (self.delta * self.epsilon)
            * self.shrink.powi(t as i32);
        ceil_count(self.step2_sample_multiplier * arg.ln())
    }

    /// Largest odd integer `≤ growth^t`, or `None` past 63 bits.
    pub fn step1_rotation(&self, t: u32) -> Option<u64> {
        let x = self.growth_ratio.powi(t as i32).floor();
        if !(x < 2f64.powi(62)) {
            return None;
        }
        let x = x as u64;
        Some(if x.is_multiple_of(2) { x.saturating_sub(1).max(1) } else { x })
    }

    /// Bracket implied by a rough-search exit at `t`.
    pub fn step1_bracket(&self, t: u32) -> AngleInterval {
        let t = t as i32;
        AngleInterval {
            theta_min: self.init_coeff / self.growth_ratio.powi(t + 1),
            theta_max: self.init_coeff / self.growth_ratio.powi(t - 1),
        }
    }

    /// Rough-search cap for a padded universe of `n_padded` items:
    /// `⌈log_{12/11}(5/(8·arcsin√(1/N')))⌉ + 1`. Any `K ≥ 1` exits by then
    /// with high probability, so reaching it marks a zero candidate.
    pub fn step1_cap(&self, n_padded: u64) -> u32 {
        let floor_angle = zero_threshold(n_padded);
        let steps = (self.init_coeff / floor_angle).ln() / self.growth_ratio.ln();
        steps.ceil().max(0.0) as u32 + 1
    }

    /// `(1 + ε/5)`: refinement stops once `θ_max/θ_min` is at most this.
    pub fn exit_ratio(&self) -> f64 {
        1.0 + self.epsilon / 5.0
    }
}

fn ceil_count(x: f64) -> u64 {
    if x.is_nan() || x < 1.0 {
        1
    } else {
        x.ceil() as u64
    }
}

/// `arcsin √(1/N')`: the smallest angle a nonempty marked set can have.
pub fn zero_threshold(n_padded: u64) -> f64 {
    (1.0 / (n_padded as f64).sqrt()).asin()
}

/// An amplitude `0 < a < 1` standing in for the state-preparation unitary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeProblem {
    a: f64,
}

impl AmplitudeProblem {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!("amplitude {a} outside (0, 1)")));
        }
        Ok(AmplitudeProblem { a })
    }

    pub fn amplitude(&self) -> f64 {
        self.a
    }

    /// `arcsin(a/1000)`, at most π/1000 for every valid `a`.
    pub fn angle(&self) -> f64 {
        (self.a / AMPLITUDE_SCALE).asin()
    }
}

/// Output of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// `K̂` for counting, `â` for amplitude estimation; 0 when zero detection fired.
    pub estimate: f64,
    /// `K̂` rounded to the nearest integer (counting only).
    pub estimate_rounded: Option<u64>,
    /// Final bracket; `None` for the classical baseline.
    pub final_interval: Option<AngleInterval>,
    /// Rough-search exit iteration (the cap when no marked item was seen).
    pub t_step1: u32,
    pub iterations_step2: u32,
    pub ledger: QueryLedger,
    pub trace: Vec<IterationRecord>,
    pub conforming: bool,
    pub zero_detected: bool,
}

/// Result of the rough exponential search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoughBounds {
    /// The coin reached the heads threshold at iteration `t`.
    Bracket { t: u32, interval: AngleInterval },
    /// No exit up to the cap; the bracket is the one the cap implies.
    ZeroCandidate { t_cap: u32, interval: AngleInterval },
}

impl RoughBounds {
    pub fn interval(&self) -> AngleInterval {
        match *self {
            RoughBounds::Bracket { interval, .. } | RoughBounds::ZeroCandidate { interval, .. } => {
                interval
            }
        }
    }

    pub fn t(&self) -> u32 {
        match *self {
            RoughBounds::Bracket { t, .. } => t,
            RoughBounds::ZeroCandidate { t_cap, .. } => t_cap,
        }
    }
}

/// Virtual padding: `factor·N` items with the same marked set.
pub fn pad_problem(problem: &MarkedSetProblem, factor: u64) -> Result<MarkedSetProblem> {
    if factor == 0 {
        return Err(Error::InvalidParameter("padding factor must be at least 1".into()));
    }
    let n = problem
        .n_items()
        .checked_mul(factor)
        .ok_or(Error::CounterOverflow("padded universe size"))?;
    Ok(problem.with_universe(n))
}

/// Rough exponential search. `t_cap` bounds the loop for counting; with
/// `None` the loop only ends on exit or when `r` would overflow.
pub fn step1_rough_bounds(
    backend: &mut CoinBackend,
    config: &EstimatorConfig,
    t_cap: Option<u32>,
    ledger: &mut QueryLedger,
    trace: &mut Vec<IterationRecord>,
) -> Result<RoughBounds> {
    let m = config.step1_samples();
    let mut t = 0u32;
    loop {
        if let Some(cap) = t_cap {
            if t > cap {
                return Ok(RoughBounds::ZeroCandidate {
                    t_cap: cap,
                    interval: config.step1_bracket(cap),
                });
            }
        }
        let r = config.step1_rotation(t).ok_or(Error::RoughSearchExhausted(t))?;
        let heads = backend.flip_batch(r, m, Phase::Step1, ledger)?;
        let exit = config.step1_threshold.reached(heads, m);
        let interval = config.step1_bracket(t);
        trace.push(IterationRecord {
            phase: Phase::Step1,
            t,
            r,
            samples: m,
            heads,
            interval_after: exit.then_some(interval),
        });
        if exit {
            return Ok(RoughBounds::Bracket { t, interval });
        }
        t += 1;
    }
}

/// Outcome of the refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub interval: AngleInterval,
    pub iterations: u32,
    pub zero_detected: bool,
}

/// Refinement rounds until `θ_max ≤ (1+ε/5)θ_min`. With a `zero_floor`, the
/// loop stops with a zero verdict as soon as `θ_max ≤ zero_floor`.
pub fn step2_refine(
    backend: &mut CoinBackend,
    start: AngleInterval,
    config: &EstimatorConfig,
    zero_floor: Option<f64>,
    ledger: &mut QueryLedger,
    trace: &mut Vec<IterationRecord>,
) -> Result<Refinement> {
    let below_floor = |iv: &AngleInterval| zero_floor.is_some_and(|f| iv.theta_max <= f);
    let mut interval = start;
    let mut t = 0u32;
    if below_floor(&interval) {
        return Ok(Refinement { interval, iterations: 0, zero_detected: true });
    }
    loop {
        let choice = rotation::construct(&interval)?;
        let m = config.step2_samples(t);
        let round = rotation::round_with(&interval, choice, backend, m, config.shrink, ledger)?;
        interval = round.interval;
        trace.push(IterationRecord {
            phase: Phase::Step2,
            t,
            r: choice.r,
            samples: m,
            heads: round.heads,
            interval_after: Some(interval),
        });
        t += 1;
        if below_floor(&interval) {
            return Ok(Refinement { interval, iterations: t, zero_detected: true });
        }
        if interval.theta_max <= config.exit_ratio() * interval.theta_min {
            return Ok(Refinement { interval, iterations: t, zero_detected: false });
        }
    }
}

/// Estimates `K = |S|` to relative error ε with failure probability δ.
pub fn approximate_count(
    problem: &MarkedSetProblem,
    config: &EstimatorConfig,
    kind: BackendKind,
    seed: u64,
) -> Result<EstimateResult> {
    config.validate()?;
    if kind == BackendKind::Statevector && problem.n_items() > config.dense_cap {
        return Err(Error::DenseCapExceeded { items: problem.n_items(), cap: config.dense_cap });
    }
    let padded = pad_problem(problem, config.padding_factor)?;
    let n = padded.n_items();
    let mut coin = CoinBackend::for_problem(kind, &padded, seed, config.dense_cap);
    let mut ledger = QueryLedger::counting();
    let mut trace = Vec::new();

    let rough = step1_rough_bounds(
        &mut coin,
        config,
        Some(config.step1_cap(n)),
        &mut ledger,
        &mut trace,
    )?;
    let refined = step2_refine(
        &mut coin,
        rough.interval(),
        config,
        Some(zero_threshold(n)),
        &mut ledger,
        &mut trace,
    )?;

    let estimate = if refined.zero_detected {
        0.0
    } else {
        n as f64 * refined.interval.theta_max.sin().powi(2)
    };
    Ok(EstimateResult {
        estimate,
        estimate_rounded: Some(estimate.round() as u64),
        final_interval: Some(refined.interval),
        t_step1: rough.t(),
        iterations_step2: refined.iterations,
        ledger,
        trace,
        conforming: config.is_conforming(),
        zero_detected: refined.zero_detected,
    })
}

/// Estimates `a` for a unitary preparing `a|φ⟩|0⟩ + √(1−a²)|φ̃⟩|1⟩`.
///
/// An ancilla rotation scales the marked amplitude by 1/1000, so the coin
/// runs at `θ = arcsin(a/1000) ≤ π/1000` and no padding is needed. Each
/// Grover application costs one `U` and one `U†`.
pub fn estimate_amplitude(
    problem: &AmplitudeProblem,
    config: &EstimatorConfig,
    kind: BackendKind,
    seed: u64,
) -> Result<EstimateResult> {
    config.validate()?;
    let mut coin =
        CoinBackend::for_amplitude(kind, problem.amplitude() / AMPLITUDE_SCALE, seed)?;
    let mut ledger = QueryLedger::amplitude();
    let mut trace = Vec::new();

    let rough = step1_rough_bounds(&mut coin, config, None, &mut ledger, &mut trace)?;
    let refined = step2_refine(&mut coin, rough.interval(), config, None, &mut ledger, &mut trace)?;

    Ok(EstimateResult {
        estimate: AMPLITUDE_SCALE * refined.interval.theta_max.sin(),
        estimate_rounded: None,
        final_interval: Some(refined.interval),
        t_step1: rough.t(),
        iterations_step2: refined.iterations,
        ledger,
        trace,
        conforming: config.is_conforming(),
        zero_detected: false,
    })
}

/// Classical estimate from uniform membership queries.
///
/// Rough phase: draw `2^t` items for `t = 0, 1, …` until one is marked,
/// giving `K̂_rough = N/2^t`. Refinement draws
/// `⌈32·(N/K̂_rough)·ln(1/δ)/ε²⌉` items and returns `N·hits/draws`. If no
/// marked item appears before `2^t ≥ N·ln(2/δ)` the estimate is zero.
pub fn classical_baseline_count(
    problem: &MarkedSetProblem,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<EstimateResult> {
    EstimatorConfig::new(epsilon, delta)?;
    let n = problem.n_items() as f64;
    let p = problem.marked_count() as f64 / n;
    let mut rng = rng::stream(seed, Stream::Classical);
    let mut ledger = QueryLedger::counting();
    let mut trace = Vec::new();
    let limit = n * (2.0 / delta).ln();

    let draw = |m: u64, rng: &mut _| -> Result<u64> {
        let dist = Binomial::new(m, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(dist.sample(rng))
    };

    let mut t = 0u32;
    let rough_draws = loop {
        let m = 1u64
            .checked_shl(t)
            .filter(|&m| m < 1 << 62)
            .ok_or(Error::CounterOverflow("classical draws"))?;
        let hits = draw(m, &mut rng)?;
        ledger.record_classical_draws(m)?;
        trace.push(IterationRecord {
            phase: Phase::Step1,
            t,
            r: 1,
            samples: m,
            heads: hits,
            interval_after: None,
        });
        if hits > 0 {
            break Some(m);
        }
        if m as f64 >= limit {
            break None;
        }
        t += 1;
    };

    let Some(rough_draws) = rough_draws else {
        return Ok(EstimateResult {
            estimate: 0.0,
            estimate_rounded: Some(0),
            final_interval: None,
            t_step1: t,
            iterations_step2: 0,
            ledger,
            trace,
            conforming: true,
            zero_detected: true,
        });
    };

    let m = ceil_count(
        CLASSICAL_SAMPLE_CONSTANT * rough_draws as f64 * (1.0 / delta).ln() / (epsilon * epsilon),
    );
    let hits = draw(m, &mut rng)?;
    ledger.record_classical_draws(m)?;
    trace.push(IterationRecord {
        phase: Phase::Step2,
        t: 0,
        r: 1,
        samples: m,
        heads: hits,
        interval_after: None,
    });
    let estimate = n * hits as f64 / m as f64;
    Ok(EstimateResult {
        estimate,
        estimate_rounded: Some(estimate.round() as u64),
        final_interval: None,
        t_step1: t,
        iterations_step2: 1,
        ledger,
        trace,
        conforming: true,
        zero_detected: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{grover_angle, GroverAngle};

    fn published(eps: f64, delta: f64) -> EstimatorConfig {
        EstimatorConfig::new(eps, delta).unwrap()
    }

    #[test]
    fn defaults_are_conforming_and_overrides_are_not() {
        let c = published(0.1, 0.05);
        assert!(c.is_conforming());
        assert!(!c.clone().with_fast_constants().is_conforming());
        let mut d = c.clone();
        d.padding_factor = 10;
        assert!(!d.is_conforming());
    }

    #[test]
    fn config_rejects_bad_targets() {
        assert!(EstimatorConfig::new(0.0, 0.05).is_err());
        assert!(EstimatorConfig::new(0.1, 0.0).is_err());
        assert!(EstimatorConfig::new(0.1, 1.0).is_err());
        assert!(EstimatorConfig::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn sample_schedules() {
        let c = published(0.1, 0.05);
        assert_eq!(c.step1_samples(), (1e5 * 2400f64.ln()).ceil() as u64);
        assert_eq!(c.step2_samples(0), (1000.0 * 20_000f64.ln()).ceil() as u64);
        assert_eq!(c.step2_samples(10), (1000.0 * (20_000.0 * 0.9f64.powi(10)).ln()).ceil() as u64);
        assert!(c.step2_samples(10_000) == 1);
    }

    #[test]
    fn rough_rotation_is_largest_odd_below_power() {
        let c = published(0.1, 0.05);
        assert_eq!(c.step1_rotation(0), Some(1));
        assert_eq!(c.step1_rotation(1), Some(1));
        // (12/11)^8 = 2.005…, (12/11)^13 = 3.097…, (12/11)^16 = 4.02…
        assert_eq!(c.step1_rotation(8), Some(1));
        assert_eq!(c.step1_rotation(13), Some(3));
        assert_eq!(c.step1_rotation(16), Some(3));
        for t in 0..400 {
            let r = c.step1_rotation(t).unwrap();
            let x = c.growth_ratio.powi(t as i32);
            assert!(r % 2 == 1 && r as f64 <= x && (r as f64 + 2.0) > x);
        }
        assert_eq!(c.step1_rotation(2000), None);
    }

    #[test]
    fn rough_bracket_ratio() {
        let c = published(0.1, 0.05);
        for t in [0, 1, 50, 120] {
            let g = c.step1_bracket(t).gamma();
            assert!((g - ((12.0f64 / 11.0).powi(2) - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn padding() {
        let p = MarkedSetProblem::new(4, [1]).unwrap();
        let q = pad_problem(&p, 1_000_000).unwrap();
        assert_eq!(q.n_items(), 4_000_000);
        assert!((q.angle().radians() - 5e-4f64.asin()).abs() < 1e-18);
        assert!(!q.is_marked(3_999_999));
        assert_eq!(pad_problem(&p, 1).unwrap(), p);
        let empty = MarkedSetProblem::new(9, []).unwrap();
        assert_eq!(pad_problem(&empty, 7).unwrap().marked_count(), 0);
        assert!(pad_problem(&p, 0).is_err());
        assert!(pad_problem(&MarkedSetProblem::new(u64::MAX, [0]).unwrap(), 2).is_err());
    }

    #[test]
    fn rough_search_exit_is_near_t0() {
        // t₀ = largest t with (12/11)^t·θ ≤ 5/8.
        let theta = 0.0005;
        let t0 = (5.0f64 / 8.0 / theta).ln() / (12.0f64 / 11.0).ln();
        let t0 = t0.floor() as u32;
        assert_eq!(t0, 81);
        let c = published(0.1, 0.05);
        for seed in 0..50 {
            let mut coin = CoinBackend::analytic(GroverAngle::new(theta).unwrap(), seed);
            let mut ledger = QueryLedger::counting();
            let mut trace = Vec::new();
            let rough = step1_rough_bounds(&mut coin, &c, None, &mut ledger, &mut trace).unwrap();
            let RoughBounds::Bracket { t, interval } = rough else { panic!() };
            assert!(t == t0 || t == t0 + 1, "seed {seed}: t = {t}");
            assert!(interval.contains(theta));
            assert_eq!(trace.len() as u32, t + 1);
            assert_eq!(ledger.step2_queries, 0);
        }
    }

    #[test]
    fn refinement_iteration_count_is_deterministic_and_bounded() {
        let c = published(0.1, 0.05);
        let start = c.step1_bracket(82);
        let mut counts = Vec::new();
        for seed in 0..20 {
            let mut coin = CoinBackend::analytic(GroverAngle::new(0.0005).unwrap(), seed);
            let mut ledger = QueryLedger::counting();
            let mut trace = Vec::new();
            let out = step2_refine(&mut coin, start, &c, None, &mut ledger, &mut trace).unwrap();
            counts.push(out.iterations);
            // γ follows γ₀·0.9^t regardless of outcomes.
            for (i, rec) in trace.iter().enumerate() {
                let g = rec.interval_after.unwrap().gamma();
                let expect = start.gamma() * 0.9f64.powi(i as i32 + 1);
                assert!((g / expect - 1.0).abs() < 1e-9);
            }
        }
        assert!(counts.windows(2).all(|w| w[0] == w[1]));
        assert!(counts[0] <= 38);
        assert!((counts[0] as f64) < (5.0f64 / 0.1).ln() / (1.0f64 / 0.9).ln());
    }

    #[test]
    fn empty_marked_set_is_detected() {
        let p = MarkedSetProblem::new(1 << 10, []).unwrap();
        let c = published(0.1, 0.05);
        for kind in [BackendKind::Analytic, BackendKind::Statevector] {
            let res = approximate_count(&p, &c, kind, 5).unwrap();
            assert!(res.zero_detected);
            assert_eq!(res.estimate, 0.0);
            assert_eq!(res.t_step1, c.step1_cap(p.n_items() * PADDING_FACTOR));
            assert_eq!(res.iterations_step2, 0);
        }
    }

    #[test]
    fn single_marked_item_is_not_mistaken_for_zero() {
        let p = MarkedSetProblem::new(1 << 10, [17]).unwrap();
        let c = published(0.2, 0.1);
        for seed in 0..10 {
            let res = approximate_count(&p, &c, BackendKind::Analytic, seed).unwrap();
            assert!(!res.zero_detected);
            assert!((res.estimate - 1.0).abs() < 0.2, "{}", res.estimate);
        }
    }

    #[test]
    fn counting_estimate_uses_theta_max() {
        let p = MarkedSetProblem::first_k(1 << 12, 40).unwrap();
        let c = published(0.1, 0.05);
        let res = approximate_count(&p, &c, BackendKind::Analytic, 11).unwrap();
        let n = (1u64 << 12) * PADDING_FACTOR;
        let th = res.final_interval.unwrap().theta_max;
        assert_eq!(res.estimate, n as f64 * th.sin().powi(2));
        assert!(res.conforming);
        let truth = grover_angle(40, n).unwrap().radians();
        assert!(res.final_interval.unwrap().contains(truth));
    }

    #[test]
    fn statevector_requires_small_unpadded_universe() {
        let p = MarkedSetProblem::first_k(5000, 3).unwrap();
        let c = published(0.1, 0.05);
        assert!(matches!(
            approximate_count(&p, &c, BackendKind::Statevector, 1),
            Err(Error::DenseCapExceeded { .. })
        ));
    }

    #[test]
    fn statevector_and_analytic_agree_on_outcomes() {
        // Same seed and numerically equal probabilities give identical heads counts
        // almost surely, so the whole runs coincide.
        let p = MarkedSetProblem::first_k(256, 9).unwrap();
        let c = published(0.1, 0.05);
        let a = approximate_count(&p, &c, BackendKind::Analytic, 3).unwrap();
        let s = approximate_count(&p, &c, BackendKind::Statevector, 3).unwrap();
        assert_eq!(a.ledger, s.ledger);
        assert!((a.estimate - s.estimate).abs() < 1e-9);
    }

    #[test]
    fn amplitude_examples() {
        assert!(AmplitudeProblem::new(0.0).is_err());
        assert!(AmplitudeProblem::new(1.0).is_err());
        let near_one = AmplitudeProblem::new(1.0 - 1e-12).unwrap();
        assert!(near_one.angle() < std::f64::consts::PI / 1000.0);
        let c = published(0.1, 0.05);
        let res = estimate_amplitude(&AmplitudeProblem::new(0.5).unwrap(), &c, BackendKind::Analytic, 1)
            .unwrap();
        assert!((res.estimate - 0.5).abs() < 0.05);
        assert_eq!(res.ledger.oracle_queries, 2 * res.ledger.grover_applications);
    }

    #[test]
    fn classical_baseline_full_set_exits_immediately() {
        let p = MarkedSetProblem::first_k(64, 64).unwrap();
        let res = classical_baseline_count(&p, 0.1, 0.05, 0).unwrap();
        assert_eq!(res.t_step1, 0);
        assert_eq!(res.estimate, 64.0);
    }

    #[test]
    fn classical_baseline_empty_set() {
        let p = MarkedSetProblem::new(1000, []).unwrap();
        let res = classical_baseline_count(&p, 0.1, 0.05, 0).unwrap();
        assert!(res.zero_detected);
        assert_eq!(res.estimate, 0.0);
    }

    #[test]
    fn determinism() {
        let p = MarkedSetProblem::first_k(1 << 16, 100).unwrap();
        let c = published(0.2, 0.1);
        let a = approximate_count(&p, &c, BackendKind::Analytic, 77).unwrap();
        let b = approximate_count(&p, &c, BackendKind::Analytic, 77).unwrap();
        assert_eq!(a, b);
        let d = approximate_count(&p, &c, BackendKind::Analytic, 78).unwrap();
        assert_ne!(a.trace, d.trace);
    }
}
