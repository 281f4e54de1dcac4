//! Monte Carlo drivers behind the command-line tool: batches of seeded
//! estimates, the rotation-lemma sweep and the query-scaling study.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;

use crate::coin::{analytic_heads_prob, BackendKind, GroverAngle, MarkedSetProblem};
use crate::error::{Error, Result};
use crate::estimator::{
    approximate_count, estimate_amplitude, AmplitudeProblem, EstimateResult, EstimatorConfig,
};
use crate::report::{LemmaViolation, ResultRow, ScalingCell};
use crate::rng::{self, derive_seed, Stream};
use crate::rotation::{choose_r, r_bounds, AngleInterval, MAX_BRACKET_ANGLE, MAX_GAMMA};
use crate::trials::map_trials;

/// Heads probability ceiling on the lower part of the bracket.
pub const LOW_SIDE_MAX_PROB: f64 = 0.47;
/// Heads probability floor on the upper part of the bracket.
pub const HIGH_SIDE_MIN_PROB: f64 = 0.662;
/// Multiplier applied to the largest observed query ratio when fitting the
/// envelope constant.
pub const ENVELOPE_HEADROOM: f64 = 1.1;

/// A batch of counting trials.
#[derive(Debug, Clone)]
pub struct CountRun {
    pub n: u64,
    pub k: u64,
    pub config: EstimatorConfig,
    pub backend: BackendKind,
    pub seed: u64,
    pub trials: u64,
}

/// A batch of amplitude-estimation trials.
#[derive(Debug, Clone)]
pub struct AmplitudeRun {
    pub a: f64,
    pub config: EstimatorConfig,
    pub backend: BackendKind,
    pub seed: u64,
    pub trials: u64,
}

/// `(1−ε)·truth < estimate < (1+ε)·truth`; for a zero truth, an exact zero.
pub fn within_relative_error(estimate: f64, truth: f64, epsilon: f64) -> bool {
    if truth == 0.0 {
        estimate == 0.0
    } else {
        (1.0 - epsilon) * truth < estimate && estimate < (1.0 + epsilon) * truth
    }
}

#[allow(clippy::too_many_arguments)]
fn to_row(
    trial: u64,
    n: Option<u64>,
    truth: f64,
    config: &EstimatorConfig,
    seed: u64,
    backend: BackendKind,
    res: &EstimateResult,
    wall_ms: f64,
) -> ResultRow {
    let iv = res.final_interval;
    ResultRow {
        trial,
        n,
        k_true: truth,
        epsilon: config.epsilon,
        delta: config.delta,
        seed,
        backend,
        k_hat: res.estimate,
        theta_min: iv.map_or(f64::NAN, |i| i.theta_min),
        theta_max: iv.map_or(f64::NAN, |i| i.theta_max),
        t_step1: res.t_step1,
        iters_step2: res.iterations_step2,
        grover_apps: res.ledger.grover_applications,
        oracle_queries: res.ledger.oracle_queries,
        coin_flips: res.ledger.coin_flips,
        success: within_relative_error(res.estimate, truth, config.epsilon),
        conforming: res.conforming,
        wall_ms,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Runs `trials` independent counting estimates; row `i` uses the seed
/// derived from `(seed, i)`.
pub fn run_count(run: &CountRun) -> Result<Vec<ResultRow>> {
    run.config.validate()?;
    let problem = MarkedSetProblem::first_k(run.n, run.k)?;
    map_trials(run.trials, |trial| {
        let seed = derive_seed(run.seed, trial);
        let (res, ms) = timed(|| approximate_count(&problem, &run.config, run.backend, seed));
        res.map(|r| to_row(trial, Some(run.n), run.k as f64, &run.config, run.seed, run.backend, &r, ms))
    })
    .into_iter()
    .collect()
}

/// Runs `trials` independent amplitude estimates.
pub fn run_amplitude(run: &AmplitudeRun) -> Result<Vec<ResultRow>> {
    run.config.validate()?;
    let problem = AmplitudeProblem::new(run.a)?;
    map_trials(run.trials, |trial| {
        let seed = derive_seed(run.seed, trial);
        let (res, ms) = timed(|| estimate_amplitude(&problem, &run.config, run.backend, seed));
        res.map(|r| to_row(trial, None, run.a, &run.config, run.seed, run.backend, &r, ms))
    })
    .into_iter()
    .collect()
}

/// Fraction of rows whose estimate missed the target.
pub fn failure_rate(rows: &[ResultRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|r| !r.success).count() as f64 / rows.len() as f64
}

/// Summary of a rotation-lemma sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub sweeps: u64,
    pub checks: u64,
    pub violations: Vec<LemmaViolation>,
}

/// Angles probed inside `[lo, hi]`: both ends, an even grid and random draws.
fn probe_points<R: Rng>(lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=8).map(|i| lo + (hi - lo) * i as f64 / 8.0).collect();
    pts.extend((0..4).map(|_| lo + (hi - lo) * rng.random::<f64>()));
    pts
}

/// Checks every rotation-lemma guarantee on one bracket.
///
/// Returns an error (not a violation) when the bracket breaks the lemma's
/// preconditions. `checks` is incremented once per individual comparison.
pub fn check_lemma_interval<R: Rng>(
    interval: &AngleInterval,
    sweep: u64,
    rng: &mut R,
    checks: &mut u64,
) -> Result<Vec<LemmaViolation>> {
    let choice = choose_r(interval)?;
    let gamma = interval.gamma();
    let r = choice.r;
    let mut out = Vec::new();
    let mut check = |name: &str, ok: bool, theta: f64, value: f64, bound: f64| {
        *checks += 1;
        if !ok {
            out.push(LemmaViolation {
                sweep,
                check: name.to_string(),
                theta_min: interval.theta_min,
                theta_max: interval.theta_max,
                gamma,
                r,
                theta,
                value,
                bound,
            });
        }
    };

    check("r_odd", r % 2 == 1, f64::NAN, r as f64, f64::NAN);

    let turns = r as f64 * interval.theta_min - 2.0 * PI * choice.k as f64;
    check(
        "r_theta_min_near_turn",
        turns.abs() <= interval.theta_min * (1.0 + 1e-9),
        interval.theta_min,
        turns.abs(),
        interval.theta_min,
    );

    for theta in [interval.theta_min, interval.midpoint(), interval.theta_max] {
        let (lo, hi) = r_bounds(interval, theta)?;
        check("r_lower_bound", lo <= r as f64, theta, r as f64, lo);
        check("r_upper_bound", r as f64 <= hi, theta, r as f64, hi);
    }

    let split = 1.0 + 0.9 * gamma;
    let low_hi = (interval.theta_max / split).max(interval.theta_min);
    for theta in probe_points(interval.theta_min, low_hi, rng) {
        let p = analytic_heads_prob(r, GroverAngle::new(theta)?)?;
        check("low_side_prob", p <= LOW_SIDE_MAX_PROB, theta, p, LOW_SIDE_MAX_PROB);
    }
    let high_lo = (split * interval.theta_min).min(interval.theta_max);
    for theta in probe_points(high_lo, interval.theta_max, rng) {
        let p = analytic_heads_prob(r, GroverAngle::new(theta)?)?;
        check("high_side_prob", p >= HIGH_SIDE_MIN_PROB, theta, p, HIGH_SIDE_MIN_PROB);
    }
    Ok(out)
}

/// Samples `sweeps` brackets with γ uniform in (0.01, 0.2] and θ_max uniform
/// in (0, π/1000], and checks each with [`check_lemma_interval`].
pub fn lemma_check(sweeps: u64, seed: u64) -> Result<LemmaReport> {
    if sweeps == 0 {
        return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, Stream::LemmaSweep);
    let mut checks = 0;
    let mut violations = Vec::new();
    for sweep in 0..sweeps {
        // 1 − U[0,1) lands in (0, 1], giving the half-open ranges above.
        let gamma = 0.01 + (MAX_GAMMA - 0.01) * (1.0 - rng.random::<f64>());
        let theta_max = MAX_BRACKET_ANGLE * (1.0 - rng.random::<f64>());
        let interval = AngleInterval::new(theta_max / (1.0 + gamma), theta_max)?;
        violations.extend(check_lemma_interval(&interval, sweep, &mut rng, &mut checks)?);
    }
    Ok(LemmaReport { sweeps, checks, violations })
}

/// Axes of a scaling study. Every `(k, ε)` pair is one cell.
#[derive(Debug, Clone)]
pub struct ScalingGrid {
    pub n: u64,
    pub ks: Vec<u64>,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub backend: BackendKind,
    pub fast_constants: bool,
}

/// Per-cell statistics plus fits. Fits are `None` when their axis has a
/// single value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub cells: Vec<ScalingCell>,
    /// Log-log slope of median queries against 1/ε.
    pub epsilon_slope: Option<f64>,
    /// Log-log slope of median queries against √(N/K).
    pub sqrt_nk_slope: Option<f64>,
    /// Envelope constant `c` over the padded universe; `None` for a
    /// single-cell grid.
    pub envelope_c: Option<f64>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Least-squares slope of `y` on `x` after removing a separate mean per group.
pub fn within_group_slope(points: &[(usize, f64, f64)]) -> Option<f64> {
    let groups = points.iter().map(|p| p.0).max()? + 1;
    let mut sum = vec![(0.0, 0.0, 0usize); groups];
    for &(g, x, y) in points {
        sum[g].0 += x;
        sum[g].1 += y;
        sum[g].2 += 1;
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(g, x, y) in points {
        let (mx, my) = (sum[g].0 / sum[g].2 as f64, sum[g].1 / sum[g].2 as f64);
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Median query counts across the grid, log-log slopes for both axes and a
/// fitted envelope constant.
pub fn scaling_study(grid: &ScalingGrid, trials_per_cell: u64, seed: u64) -> Result<ScalingReport> {
    if grid.ks.is_empty() || grid.epsilons.is_empty() {
        return Err(Error::InvalidParameter("scaling grid is empty".into()));
    }
    if trials_per_cell == 0 {
        return Err(Error::InvalidParameter("trials per cell must be at least 1".into()));
    }
    if grid.ks.contains(&0) {
        return Err(Error::InvalidParameter("scaling study needs k >= 1".into()));
    }

    let mut cells = Vec::new();
    let mut ratio_max: f64 = 0.0;
    let mut padded_n = 0;
    for &k in &grid.ks {
        for &epsilon in &grid.epsilons {
            let mut config = EstimatorConfig::new(epsilon, grid.delta)?;
            if grid.fast_constants {
                config = config.with_fast_constants();
            }
            padded_n = grid.n.saturating_mul(config.padding_factor);
            let problem = MarkedSetProblem::first_k(grid.n, k)?;
            let ledgers = map_trials(trials_per_cell, |trial| {
                approximate_count(&problem, &config, grid.backend, derive_seed(seed, trial))
                    .map(|r| r.ledger)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let sorted = |f: fn(&crate::accounting::QueryLedger) -> u64| {
                let mut v: Vec<f64> = ledgers.iter().map(|l| f(l) as f64).collect();
                v.sort_by(f64::total_cmp);
                v
            };
            let total = sorted(|l| l.oracle_queries);
            let s1 = sorted(|l| l.step1_queries);
            let s2 = sorted(|l| l.step2_queries);

            let scale = crate::accounting::theoretical_envelope(
                padded_n as f64,
                k as f64,
                epsilon,
                grid.delta,
                1.0,
            );
            ratio_max = total.iter().fold(ratio_max, |m, &q| m.max(q / scale));

            cells.push(ScalingCell {
                n: grid.n,
                k,
                epsilon,
                delta: grid.delta,
                trials: trials_per_cell,
                seed,
                median_queries: quantile(&total, 0.5),
                q1_queries: quantile(&total, 0.25),
                q3_queries: quantile(&total, 0.75),
                median_step1: quantile(&s1, 0.5),
                median_step2: quantile(&s2, 0.5),
            });
        }
    }

    let k_index = |k: u64| grid.ks.iter().position(|&x| x == k).unwrap_or(0);
    let e_index = |e: f64| grid.epsilons.iter().position(|&x| x == e).unwrap_or(0);

    let epsilon_slope = (distinct(cells.iter().map(|c| c.epsilon)) > 1)
        .then(|| {
            let pts: Vec<_> = cells
                .iter()
                .map(|c| (k_index(c.k), (1.0 / c.epsilon).ln(), c.median_queries.ln()))
                .collect();
            within_group_slope(&pts)
        })
        .flatten();
    let sqrt_nk_slope = (distinct(cells.iter().map(|c| c.k as f64)) > 1)
        .then(|| {
            let pts: Vec<_> = cells
                .iter()
                .map(|c| {
                    let x = 0.5 * (padded_n as f64 / c.k as f64).ln();
                    (e_index(c.epsilon), x, c.median_queries.ln())
                })
                .collect();
            within_group_slope(&pts)
        })
        .flatten();
    let envelope_c = (cells.len() > 1).then_some(ENVELOPE_HEADROOM * ratio_max);

    Ok(ScalingReport { cells, epsilon_slope, sqrt_nk_slope, envelope_c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_window_is_open() {
        assert!(within_relative_error(1000.0, 1024.0, 0.1));
        assert!(!within_relative_error(921.6, 1024.0, 0.1));
        assert!(!within_relative_error(1126.4, 1024.0, 0.1));
        assert!(within_relative_error(0.0, 0.0, 0.1));
        assert!(!within_relative_error(0.5, 0.0, 0.1));
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }

    #[test]
    fn grouped_slope_recovers_exact_lines() {
        // Two groups with different intercepts and the same slope 1.5.
        let pts: Vec<_> = (0..4)
            .flat_map(|i| {
                let x = i as f64;
                [(0, x, 1.5 * x + 2.0), (1, x, 1.5 * x - 7.0)]
            })
            .collect();
        assert!((within_group_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(within_group_slope(&[(0, 1.0, 2.0)]), None);
    }

    #[test]
    fn lemma_rejects_wide_gamma_and_accepts_boundary() {
        let mut rng = rng::stream(1, Stream::LemmaSweep);
        let mut checks = 0;
        let wide = AngleInterval::new(0.001, 0.00125).unwrap();
        assert!(matches!(
            check_lemma_interval(&wide, 0, &mut rng, &mut checks),
            Err(Error::RotationPrecondition(_))
        ));
        let edge = AngleInterval::new(MAX_BRACKET_ANGLE / 1.15, MAX_BRACKET_ANGLE).unwrap();
        let v = check_lemma_interval(&edge, 0, &mut rng, &mut checks).unwrap();
        assert!(checks > 0);
        assert!(v.iter().all(|x| x.check == "r_upper_bound" && x.theta > edge.theta_min), "{v:?}");
    }

    #[test]
    fn small_lemma_sweep_only_trips_overstated_bounds() {
        // Only the upper r bound above θ_min and the 0.662 floor can fail; both
        // overstate what the construction delivers.
        let report = lemma_check(200, 3).unwrap();
        for v in &report.violations {
            match v.check.as_str() {
                "r_upper_bound" => assert!(v.theta > v.theta_min),
                "high_side_prob" => assert!(v.value > 0.55),
                other => panic!("unexpected violation {other}: {v:?}"),
            }
        }
        assert!(lemma_check(0, 3).is_err());
    }

    #[test]
    fn count_rows_are_ordered_and_seeded() {
        let run = CountRun {
            n: 1 << 12,
            k: 30,
            config: EstimatorConfig::new(0.2, 0.1).unwrap().with_fast_constants(),
            backend: BackendKind::Analytic,
            seed: 5,
            trials: 8,
        };
        let a = run_count(&run).unwrap();
        let b = run_count(&run).unwrap();
        assert_eq!(a.iter().map(|r| r.trial).collect::<Vec<_>>(), (0..8).collect::<Vec<_>>());
        assert_eq!(
            a.iter().map(ResultRow::without_timing).collect::<Vec<_>>(),
            b.iter().map(ResultRow::without_timing).collect::<Vec<_>>()
        );
        assert!(a.iter().all(|r| !r.conforming && r.seed == 5));
    }

    #[test]
    fn single_cell_study_has_no_fits() {
        let grid = ScalingGrid {
            n: 1 << 12,
            ks: vec![16],
            epsilons: vec![0.2],
            delta: 0.1,
            backend: BackendKind::Analytic,
            fast_constants: true,
        };
        let rep = scaling_study(&grid, 3, 1).unwrap();
        assert_eq!(rep.cells.len(), 1);
        assert_eq!((rep.epsilon_slope, rep.sqrt_nk_slope, rep.envelope_c), (None, None, None));
    }
}
