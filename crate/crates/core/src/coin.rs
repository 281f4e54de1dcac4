//! The Grover coin.
//!
//! For odd `r`, preparing `G^{(r-1)/2}|ψ⟩` and measuring yields a marked item
//! with probability `sin²(rθ)`. [`CoinBackend`] realizes this coin either
//! from that closed form or by simulating `G` directly, and only ever hands
//! back heads counts.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::accounting::{Phase, QueryLedger};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Largest universe simulated with a dense N-dimensional state.
pub const DEFAULT_DENSE_CAP: u64 = 4096;

/// The Grover angle θ in radians, `0 < θ ≤ π/2`, or the zero sentinel used
/// when no items are marked.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct GroverAngle(f64);

impl GroverAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "Grover angle {theta} outside (0, π/2]"
            )));
        }
        Ok(GroverAngle(theta))
    }

    /// Sentinel for an empty marked set. Only the zero-detection path uses it.
    pub const fn zero() -> Self {
        GroverAngle(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0.0
    }

    pub fn radians(&self) -> f64 {
        self.0
    }
}

/// `arcsin √(k/n)`, formed as `√k/√n` so tiny ratios keep full precision.
pub fn grover_angle(k: u64, n: u64) -> Result<GroverAngle> {
    if n == 0 {
        return Err(Error::InvalidParameter("universe size must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Ok(GroverAngle::zero());
    }
    let s = ((k as f64).sqrt() / (n as f64).sqrt()).min(1.0);
    GroverAngle::new(s.asin())
}

fn check_odd(r: u64) -> Result<()> {
    if r.is_multiple_of(2) {
        Err(Error::EvenIterations(r))
    } else {
        Ok(())
    }
}

/// `sin²(rθ)` for odd `r`.
pub fn analytic_heads_prob(r: u64, angle: GroverAngle) -> Result<f64> {
    check_odd(r)?;
    let s = (r as f64 * angle.radians()).sin();
    Ok((s * s).clamp(0.0, 1.0))
}

/// A universe of `n_items` items with a set of marked indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSetProblem {
    n_items: u64,
    marked: BTreeSet<u64>,
}

impl MarkedSetProblem {
    pub fn new(n_items: u64, marked: impl IntoIterator<Item = u64>) -> Result<Self> {
        if n_items == 0 {
            return Err(Error::InvalidParameter("universe size must be positive".into()));
        }
        let marked: BTreeSet<u64> = marked.into_iter().collect();
        if let Some(&last) = marked.last() {
            if last >= n_items {
                return Err(Error::InvalidParameter(format!(
                    "marked index {last} out of range for N = {n_items}"
                )));
            }
        }
        Ok(MarkedSetProblem { n_items, marked })
    }

    /// Problem whose marked set is the first `k` indices.
    pub fn first_k(n_items: u64, k: u64) -> Result<Self> {
        if k > n_items {
            return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n_items}")));
        }
        Self::new(n_items, 0..k)
    }

    pub fn n_items(&self) -> u64 {
        self.n_items
    }

    pub fn marked_count(&self) -> u64 {
        self.marked.len() as u64
    }

    /// Membership oracle. Indices at or beyond the original list (padding)
    /// are never marked.
    pub fn is_marked(&self, index: u64) -> bool {
        self.marked.contains(&index)
    }

    pub fn marked(&self) -> impl Iterator<Item = u64> + '_ {
        self.marked.iter().copied()
    }

    pub fn angle(&self) -> GroverAngle {
        grover_angle(self.marked_count(), self.n_items).expect("validated at construction")
    }

    pub(crate) fn with_universe(&self, n_items: u64) -> Self {
        MarkedSetProblem { n_items, marked: self.marked.clone() }
    }
}

fn check_dense(problem: &MarkedSetProblem, cap: u64) -> Result<()> {
    let (k, n) = (problem.marked_count(), problem.n_items());
    if k == 0 || k == n {
        return Err(Error::DegenerateSubspace { marked: k, items: n });
    }
    if n > cap {
        return Err(Error::DenseCapExceeded { items: n, cap });
    }
    Ok(())
}

/// Applies `G = (2|ψ⟩⟨ψ| − I)U` to a dense state in place. This is the
/// operator `(I − 2|ψ⟩⟨ψ|)U` up to a global phase of −1, so amplitudes match
/// `sin(rθ)/√K` and `cos(rθ)/√(N−K)` with no sign alternation.
fn apply_grover_dense(state: &mut [f64], mask: &[bool]) {
    for (a, &m) in state.iter_mut().zip(mask) {
        if m {
            *a = -*a;
        }
    }
    let mean = state.iter().sum::<f64>() / state.len() as f64;
    for a in state.iter_mut() {
        *a = 2.0 * mean - *a;
    }
}

fn dense_state(problem: &MarkedSetProblem, j: u64) -> Vec<f64> {
    let n = problem.n_items() as usize;
    let mut mask = vec![false; n];
    for i in problem.marked() {
        mask[i as usize] = true;
    }
    let mut state = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..j {
        apply_grover_dense(&mut state, &mask);
    }
    state
}

/// Exact N-dimensional state after `j` Grover iterations on the uniform
/// superposition. Requires `1 ≤ K < N ≤` [`DEFAULT_DENSE_CAP`].
pub fn statevector_grover_state(problem: &MarkedSetProblem, j: u64) -> Result<Vec<f64>> {
    check_dense(problem, DEFAULT_DENSE_CAP)?;
    Ok(dense_state(problem, j))
}

/// Probability of measuring a marked item from the dense simulation.
pub fn statevector_heads_prob(problem: &MarkedSetProblem, r: u64) -> Result<f64> {
    check_odd(r)?;
    check_dense(problem, DEFAULT_DENSE_CAP)?;
    let state = dense_state(problem, (r - 1) / 2);
    Ok(marked_mass(problem, &state))
}

fn marked_mass(problem: &MarkedSetProblem, state: &[f64]) -> f64 {
    problem
        .marked()
        .map(|i| state[i as usize] * state[i as usize])
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Row-major 2×2 matrix acting on (marked, unmarked) coordinates.
#[derive(Clone, Copy)]
struct Mat2([f64; 4]);

impl Mat2 {
    const IDENTITY: Mat2 = Mat2([1.0, 0.0, 0.0, 1.0]);

    fn mul(self, o: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    fn pow(mut self, mut exp: u64) -> Mat2 {
        let mut acc = Mat2::IDENTITY;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(self);
            }
            self = self.mul(self);
            exp >>= 1;
        }
        acc
    }
}

/// Grover dynamics restricted to span{normalized marked, normalized unmarked}.
///
/// `sin` and `cos` are the initial overlaps with the two basis vectors.
#[derive(Debug, Clone, Copy)]
struct Subspace {
    sin: f64,
    cos: f64,
}

impl Subspace {
    fn from_counts(k: u64, n: u64) -> Self {
        let sin = (k as f64).sqrt() / (n as f64).sqrt();
        let cos = ((n - k) as f64).sqrt() / (n as f64).sqrt();
        Subspace { sin, cos }
    }

    fn from_sin(sin: f64) -> Self {
        Subspace { sin, cos: (1.0 - sin * sin).sqrt() }
    }

    /// `(2|ψ⟩⟨ψ| − I)·diag(−1, 1)` in (marked, unmarked) coordinates.
    fn grover(&self) -> Mat2 {
        let (s, c) = (self.sin, self.cos);
        let reflect = Mat2([2.0 * s * s - 1.0, 2.0 * s * c, 2.0 * s * c, 2.0 * c * c - 1.0]);
        reflect.mul(Mat2([-1.0, 0.0, 0.0, 1.0]))
    }

    fn state(&self, j: u64) -> (f64, f64) {
        let [a, b, c, d] = self.grover().pow(j).0;
        (a * self.sin + b * self.cos, c * self.sin + d * self.cos)
    }

    fn heads_prob(&self, r: u64) -> f64 {
        let (marked, _) = self.state((r - 1) / 2);
        (marked * marked).clamp(0.0, 1.0)
    }
}

/// How a backend computes `sin²(rθ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Analytic,
    Statevector,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendKind::Analytic => f.write_str("analytic"),
            BackendKind::Statevector => f.write_str("statevector"),
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(BackendKind::Analytic),
            "statevector" => Ok(BackendKind::Statevector),
            other => Err(Error::InvalidParameter(format!("unknown backend {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Model {
    Analytic(GroverAngle),
    Dense(MarkedSetProblem),
    Subspace(Subspace),
}

/// A seeded Grover coin.
///
/// Heads counts for a batch of `m` flips are drawn from `Binomial(m, p)`,
/// which has the same law as `m` independent measurements. Each phase draws
/// from its own random stream, so rough-search outcomes do not depend on how
/// many refinement flips a run makes. Not safe for concurrent flipping; give
/// each trial its own backend.
#[derive(Debug, Clone)]
pub struct CoinBackend {
    kind: BackendKind,
    model: Model,
    rough_rng: ChaCha8Rng,
    refine_rng: ChaCha8Rng,
}

impl CoinBackend {
    fn with_model(kind: BackendKind, model: Model, seed: u64) -> Self {
        CoinBackend {
            kind,
            model,
            rough_rng: rng::stream(seed, Stream::RoughSearch),
            refine_rng: rng::stream(seed, Stream::Refinement),
        }
    }

    /// Analytic coin with a known angle.
    pub fn analytic(angle: GroverAngle, seed: u64) -> Self {
        Self::with_model(BackendKind::Analytic, Model::Analytic(angle), seed)
    }

    /// Coin for a marked-set problem. The statevector kind simulates the full
    /// N-dimensional state when `1 ≤ K < N ≤ dense_cap` and the exact
    /// 2-dimensional invariant subspace otherwise.
    pub fn for_problem(
        kind: BackendKind,
        problem: &MarkedSetProblem,
        seed: u64,
        dense_cap: u64,
    ) -> Self {
        let (k, n) = (problem.marked_count(), problem.n_items());
        let model = match kind {
            BackendKind::Analytic => Model::Analytic(problem.angle()),
            BackendKind::Statevector if check_dense(problem, dense_cap).is_ok() => {
                Model::Dense(problem.clone())
            }
            BackendKind::Statevector => Model::Subspace(Subspace::from_counts(k, n)),
        };
        Self::with_model(kind, model, seed)
    }

    /// Coin whose marked amplitude in the prepared state is `amplitude`,
    /// i.e. `θ = arcsin(amplitude)`.
    pub fn for_amplitude(kind: BackendKind, amplitude: f64, seed: u64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude {amplitude} outside (0, 1)"
            )));
        }
        let model = match kind {
            BackendKind::Analytic => Model::Analytic(GroverAngle::new(amplitude.asin())?),
            BackendKind::Statevector => Model::Subspace(Subspace::from_sin(amplitude)),
        };
        Ok(Self::with_model(kind, model, seed))
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    /// Exact heads probability for `r` iterations. Exposed for validation;
    /// the estimator only uses [`flip_batch`](Self::flip_batch).
    pub fn heads_probability(&self, r: u64) -> Result<f64> {
        check_odd(r)?;
        Ok(match &self.model {
            Model::Analytic(angle) => analytic_heads_prob(r, *angle)?,
            Model::Dense(problem) => marked_mass(problem, &dense_state(problem, (r - 1) / 2)),
            Model::Subspace(sub) => sub.heads_prob(r),
        })
    }

    /// Flips the coin `m` times at `r` iterations and returns the number of
    /// heads, charging `m·(r−1)/2` Grover applications to `ledger`.
    pub fn flip_batch(
        &mut self,
        r: u64,
        m: u64,
        phase: Phase,
        ledger: &mut QueryLedger,
    ) -> Result<u64> {
        if m == 0 {
            return Err(Error::InvalidParameter("flip batch needs m >= 1".into()));
        }
        let p = self.heads_probability(r)?;
        ledger.record_flip_batch(r, m, phase)?;
        let rng = match phase {
            Phase::Step1 => &mut self.rough_rng,
            Phase::Step2 => &mut self.refine_rng,
        };
        let dist = Binomial::new(m, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(dist.sample(rng))
    }
}
