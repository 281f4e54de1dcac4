//! Query accounting and per-iteration history.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotation::AngleInterval;

/// Which part of the estimator consumed a batch of coin flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Rough exponential search for a constant-factor bracket.
    Step1,
    /// Interval refinement rounds.
    Step2,
}

/// Running query totals for one estimate.
///
/// One Grover application costs `oracle_cost` oracle invocations: 1 for
/// counting (`G` contains one `U`), 2 for amplitude estimation (one `U` and
/// one `U†`). `step1_queries` and `step2_queries` split `grover_applications`
/// by phase. Classical draws count as oracle queries and coin flips only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub grover_applications: u64,
    pub oracle_queries: u64,
    pub coin_flips: u64,
    pub step1_queries: u64,
    pub step2_queries: u64,
    oracle_cost: u64,
}

impl QueryLedger {
    pub fn new(oracle_cost: u64) -> Self {
        QueryLedger {
            grover_applications: 0,
            oracle_queries: 0,
            coin_flips: 0,
            step1_queries: 0,
            step2_queries: 0,
            oracle_cost,
        }
    }

    /// Ledger for approximate counting.
    pub fn counting() -> Self {
        Self::new(1)
    }

    /// Ledger for amplitude estimation.
    pub fn amplitude() -> Self {
        Self::new(2)
    }

    pub fn oracle_cost(&self) -> u64 {
        self.oracle_cost
    }

    /// Charges `m` preparations of `G^{(r-1)/2}|ψ⟩` followed by a measurement.
    pub fn record_flip_batch(&mut self, r: u64, m: u64, phase: Phase) -> Result<()> {
        if r.is_multiple_of(2) {
            return Err(Error::EvenIterations(r));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("flip batch needs m >= 1".into()));
        }
        let apps = m
            .checked_mul((r - 1) / 2)
            .ok_or(Error::CounterOverflow("grover applications"))?;
        let queries = apps
            .checked_mul(self.oracle_cost)
            .ok_or(Error::CounterOverflow("oracle queries"))?;

        let grover = add(self.grover_applications, apps, "grover applications")?;
        let oracle = add(self.oracle_queries, queries, "oracle queries")?;
        let flips = add(self.coin_flips, m, "coin flips")?;
        let bucket = match phase {
            Phase::Step1 => &self.step1_queries,
            Phase::Step2 => &self.step2_queries,
        };
        let bucket = add(*bucket, apps, "phase queries")?;

        self.grover_applications = grover;
        self.oracle_queries = oracle;
        self.coin_flips = flips;
        match phase {
            Phase::Step1 => self.step1_queries = bucket,
            Phase::Step2 => self.step2_queries = bucket,
        }
        Ok(())
    }

    /// Charges `m` classical membership queries on uniformly drawn items.
    pub fn record_classical_draws(&mut self, m: u64) -> Result<()> {
        self.oracle_queries = add(self.oracle_queries, m, "oracle queries")?;
        self.coin_flips = add(self.coin_flips, m, "coin flips")?;
        Ok(())
    }
}

fn add(a: u64, b: u64, what: &'static str) -> Result<u64> {
    a.checked_add(b).ok_or(Error::CounterOverflow(what))
}

/// One batch of coin flips in an estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub phase: Phase,
    pub t: u32,
    pub r: u64,
    pub samples: u64,
    pub heads: u64,
    /// Bracket after this iteration. Rough-search rounds only carry one on
    /// the exit round.
    pub interval_after: Option<AngleInterval>,
}

/// Comparison envelope `c·√(n/k)·(1/ε)·ln(1/δ)` for total query counts.
pub fn theoretical_envelope(n: f64, k: f64, epsilon: f64, delta: f64, c: f64) -> f64 {
    c * (n / k).sqrt() / epsilon * (1.0 / delta).ln()
}
