//! Monte Carlo engine and higher-level studies: scaled minimum-weight limit
//! estimation, sub-additive mean comparisons, shape checks, minimum-edge
//! means and the saturation scan.
//!
//! Every trial derives its generator from `(master_seed, trial_index)` and
//! aggregation runs in trial-index order, so results are identical for any
//! worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::solvers::{max_size_planar, min_weight_profile, segmentation_matching};
use crate::stats::{mean_and_variance, ols_slope, std_error};
use crate::stochastic::{
    sample_states, sample_weights, substream, EdgeProbabilityModel, SeedSpec, WeightDistribution,
};

/// Which per-trial statistic a run computes.
#[derive(Debug, Clone)]
pub enum TrialConfig {
    /// Maximum size of a length-constrained planar matching on sampled states.
    MaxSize { model: EdgeProbabilityModel, length_cap: usize },
    /// Maximum size with no length constraint.
    UnconstrainedMaxSize { model: EdgeProbabilityModel },
    /// Minimum weight of a planar matching with at least `tau` edges.
    MinWeight { dist: WeightDistribution, n: usize, tau: usize },
    /// 1 when the segmentation construction finds `tau` blocks under the
    /// threshold, else 0.
    SegmentationSuccess { dist: WeightDistribution, n: usize, tau: usize, threshold: f64 },
}

impl TrialConfig {
    fn validate(&self) -> Result<()> {
        match self {
            TrialConfig::MaxSize { .. } | TrialConfig::UnconstrainedMaxSize { .. } => Ok(()),
            TrialConfig::MinWeight { n, tau, .. } => {
                if *tau < 1 || tau > n {
                    Err(Error::InvalidTau { tau: *tau, max: *n })
                } else {
                    Ok(())
                }
            }
            TrialConfig::SegmentationSuccess { n, tau, .. } => {
                if *tau < 1 || 4 * tau > *n {
                    Err(Error::InvalidTau { tau: *tau, max: n / 4 })
                } else {
                    Ok(())
                }
            }
        }
    }

    fn run_one(&self, seed: SeedSpec) -> f64 {
        match self {
            TrialConfig::MaxSize { model, length_cap } => {
                let inst = sample_states(model, seed);
                max_size_planar(&inst, *length_cap).expect("sampled instance has states").size
                    as f64
            }
            TrialConfig::UnconstrainedMaxSize { model } => {
                let inst = sample_states(model, seed);
                let cap = model.n().saturating_sub(1);
                max_size_planar(&inst, cap).expect("sampled instance has states").size as f64
            }
            TrialConfig::MinWeight { dist, n, tau } => {
                let inst = sample_weights(dist, *n, seed);
                let profile = min_weight_profile(&inst).expect("sampled instance has weights");
                profile[*tau..].iter().copied().fold(f64::INFINITY, f64::min)
            }
            TrialConfig::SegmentationSuccess { dist, n, tau, threshold } => {
                let inst = sample_weights(dist, *n, seed);
                f64::from(segmentation_matching(&inst, *tau, *threshold).is_ok())
            }
        }
    }
}

/// One trial outcome; the seed echo makes the instance recomputable.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub trial_index: u64,
    pub value: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SummaryStats {
    pub trials: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub summaries: Vec<TrialSummary>,
    pub stats: SummaryStats,
}

impl TrialRun {
    pub fn values(&self) -> Vec<f64> {
        self.summaries.iter().map(|s| s.value).collect()
    }

    /// CSV table of per-trial outcomes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial_index,value,seed\n");
        for s in &self.summaries {
            out.push_str(&format!("{},{},{}\n", s.trial_index, s.value, s.seed));
        }
        out
    }
}

fn summarize(values: &[f64]) -> SummaryStats {
    let (mean, variance) = mean_and_variance(values);
    SummaryStats {
        trials: values.len(),
        mean,
        variance,
        std_error: std_error(values),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Runs `trials` independent trials of the configured statistic. Trials
/// execute in parallel; summaries come back in trial-index order.
pub fn run_trials(config: &TrialConfig, master_seed: u64, trials: usize) -> Result<TrialRun> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let summaries: Vec<TrialSummary> = (0..trials as u64)
        .into_par_iter()
        .map(|trial_index| {
            let seed = SeedSpec::new(master_seed, trial_index);
            TrialSummary { trial_index, value: config.run_one(seed), seed: seed.derived_seed() }
        })
        .collect();
    let values: Vec<f64> = summaries.iter().map(|s| s.value).collect();
    Ok(TrialRun { summaries, stats: summarize(&values) })
}

/// Scaled-limit estimate for the minimum weight at edge fraction `rho`.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaEstimate {
    pub rho: f64,
    pub n_grid: Vec<usize>,
    pub taus: Vec<usize>,
    /// Mean of (minimum weight) / n per grid size.
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Variance of (minimum weight) / n per grid size.
    pub variances: Vec<f64>,
    /// Point estimate: the mean at the largest grid size.
    pub theta_hat: f64,
    pub theta_se: f64,
    /// Set when the per-size means increase along the grid by more than
    /// 3 pooled standard errors (the sub-additive trend runs the other way).
    pub trend_violation: bool,
}

/// Edge-count constraint for fraction `rho` of `n`: the ceiling keeps the
/// constraint at least as strict as `rho * n`.
pub fn tau_for_fraction(rho: f64, n: usize) -> usize {
    ((rho * n as f64).ceil() as usize).clamp(1, n)
}

/// Estimates the scaled minimum-weight limit at fraction `rho` over a grid
/// of sizes. Each grid size draws its trials from its own seed substream.
pub fn estimate_theta(
    rho: f64,
    n_grid: &[usize],
    trials: usize,
    dist: &WeightDistribution,
    master_seed: u64,
) -> Result<ThetaEstimate> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!("rho={rho} outside (0, 1]")));
    }
    if n_grid.is_empty() {
        return Err(Error::TooFewPoints { got: 0, needed: 1 });
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();

    let rho_seed = substream(master_seed, rho.to_bits());
    let mut taus = Vec::new();
    let mut means = Vec::new();
    let mut std_errors = Vec::new();
    let mut variances = Vec::new();
    for &n in &grid {
        let tau = tau_for_fraction(rho, n);
        let run = run_trials(
            &TrialConfig::MinWeight { dist: dist.clone(), n, tau },
            substream(rho_seed, n as u64),
            trials,
        )?;
        let scaled: Vec<f64> = run.values().iter().map(|v| v / n as f64).collect();
        let (mean, var) = mean_and_variance(&scaled);
        taus.push(tau);
        means.push(mean);
        std_errors.push(std_error(&scaled));
        variances.push(var);
    }

    let mut trend_violation = false;
    for k in 1..means.len() {
        let pooled = (std_errors[k - 1].powi(2) + std_errors[k].powi(2)).sqrt();
        if means[k] > means[k - 1] + 3.0 * pooled {
            trend_violation = true;
        }
    }

    Ok(ThetaEstimate {
        rho,
        theta_hat: *means.last().unwrap(),
        theta_se: *std_errors.last().unwrap(),
        n_grid: grid,
        taus,
        means,
        std_errors,
        variances,
        trend_violation,
    })
}

/// CSV table over a family of estimates: one row per (rho, n) point.
pub fn theta_table_csv(estimates: &[ThetaEstimate]) -> String {
    let mut out = String::from("rho,n,tau,mean_over_n,std_error,variance,theta_hat,theta_se\n");
    for e in estimates {
        for (idx, &n) in e.n_grid.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                e.rho,
                n,
                e.taus[idx],
                e.means[idx],
                e.std_errors[idx],
                e.variances[idx],
                e.theta_hat,
                e.theta_se,
            ));
        }
    }
    out
}

/// Compares the mean minimum weight of the combined instance against the
/// sum for the two halves. The combined graph can only do better, so the
/// claim is `mean(lhs) <= mean(rhs1) + mean(rhs2)` up to `slack_sigma`
/// pooled standard errors.
#[allow(clippy::too_many_arguments)]
pub fn check_superadditivity(
    n1: usize,
    n2: usize,
    rho1: f64,
    rho2: f64,
    trials: usize,
    dist: &WeightDistribution,
    master_seed: u64,
    slack_sigma: f64,
) -> Result<BoundReport> {
    for (name, rho) in [("rho1", rho1), ("rho2", rho2)] {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("{name}={rho} outside (0, 1]")));
        }
    }
    let tau1 = tau_for_fraction(rho1, n1);
    let tau2 = tau_for_fraction(rho2, n2);
    let combined_n = n1 + n2;
    let combined_tau = tau1 + tau2;

    let run = |n: usize, tau: usize, tag: u64| {
        run_trials(
            &TrialConfig::MinWeight { dist: dist.clone(), n, tau },
            substream(master_seed, tag),
            trials,
        )
    };
    let combined = run(combined_n, combined_tau, 0xC0)?;
    let left = run(n1, tau1, 0xC1)?;
    let right = run(n2, tau2, 0xC2)?;

    let pooled_se = (combined.stats.std_error.powi(2)
        + left.stats.std_error.powi(2)
        + right.stats.std_error.powi(2))
    .sqrt();
    let rhs_mean = left.stats.mean + right.stats.mean;
    Ok(BoundReport::upper(
        "superadditivity",
        combined.stats.mean,
        rhs_mean + slack_sigma * pooled_se,
    )
    .with_param("n1", n1 as f64)
    .with_param("n2", n2 as f64)
    .with_param("tau1", tau1 as f64)
    .with_param("tau2", tau2 as f64)
    .with_param("rho1", rho1)
    .with_param("rho2", rho2)
    .with_param("rhs_mean", rhs_mean)
    .with_param("pooled_se", pooled_se)
    .with_param("slack_sigma", slack_sigma)
    .with_param("trials", trials as f64))
}

/// Runs the sub-additive mean comparison on `count` randomized
/// configurations drawn from the given ranges.
#[allow(clippy::too_many_arguments)]
pub fn superadditivity_sweep(
    count: usize,
    n_range: (usize, usize),
    rho_range: (f64, f64),
    trials: usize,
    dist: &WeightDistribution,
    master_seed: u64,
    slack_sigma: f64,
) -> Result<Vec<BoundReport>> {
    use rand::Rng;
    let (n_lo, n_hi) = n_range;
    let (r_lo, r_hi) = rho_range;
    if n_lo < 1 || n_hi < n_lo || !(r_lo > 0.0 && r_hi <= 1.0 && r_lo <= r_hi) {
        return Err(Error::InvalidParameter("bad sweep ranges".into()));
    }
    let mut rng = SeedSpec::new(master_seed, 0xD0).rng();
    let mut reports = Vec::with_capacity(count);
    for idx in 0..count {
        let n1 = rng.random_range(n_lo..=n_hi);
        let n2 = rng.random_range(n_lo..=n_hi);
        let rho1 = rng.random_range(r_lo..=r_hi);
        let rho2 = rng.random_range(r_lo..=r_hi);
        let mut report = check_superadditivity(
            n1,
            n2,
            rho1,
            rho2,
            trials,
            dist,
            substream(master_seed, 0xE0 + idx as u64),
            slack_sigma,
        )?;
        report.bound_id = format!("superadditivity_{idx}");
        reports.push(report);
    }
    Ok(reports)
}

/// Shape checks over a family of estimates at increasing `rho`:
/// non-decreasing means, non-negative discrete second differences, the
/// strict `theta < mu rho` gap at interior points (all up to `slack_sigma`
/// standard errors), and the per-fraction variance-decay proxy for the
/// squared-mean convergence.
pub fn check_theta_shape(
    estimates: &[ThetaEstimate],
    mu: f64,
    slack_sigma: f64,
) -> Result<Vec<BoundReport>> {
    if estimates.len() < 3 {
        return Err(Error::TooFewPoints { got: estimates.len(), needed: 3 });
    }
    let mut sorted: Vec<&ThetaEstimate> = estimates.iter().collect();
    sorted.sort_by(|a, b| a.rho.partial_cmp(&b.rho).unwrap());

    let mut reports = Vec::new();
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let pooled = (a.theta_se.powi(2) + b.theta_se.powi(2)).sqrt();
        reports.push(
            BoundReport::lower(
                &format!("theta_monotone_{}_{}", a.rho, b.rho),
                b.theta_hat - a.theta_hat,
                -slack_sigma * pooled,
            )
            .with_param("rho_lo", a.rho)
            .with_param("rho_hi", b.rho)
            .with_param("pooled_se", pooled),
        );
    }
    for triple in sorted.windows(3) {
        let (a, b, c) = (triple[0], triple[1], triple[2]);
        let d2 = c.theta_hat - 2.0 * b.theta_hat + a.theta_hat;
        let se = (a.theta_se.powi(2) + 4.0 * b.theta_se.powi(2) + c.theta_se.powi(2)).sqrt();
        reports.push(
            BoundReport::lower(&format!("theta_convex_{}", b.rho), d2, -slack_sigma * se)
                .with_param("rho", b.rho)
                .with_param("second_difference", d2)
                .with_param("se", se),
        );
    }
    for e in &sorted {
        if e.rho > 0.0 && e.rho < 1.0 {
            reports.push(
                BoundReport::upper(
                    &format!("theta_below_mean_line_{}", e.rho),
                    e.theta_hat,
                    mu * e.rho - slack_sigma * e.theta_se,
                )
                .with_param("rho", e.rho)
                .with_param("mu", mu)
                .with_param("se", e.theta_se),
            );
        }
    }
    for e in &sorted {
        if e.variances.len() >= 2 {
            let worst_ratio = e
                .variances
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(f64::NEG_INFINITY, f64::max);
            reports.push(
                BoundReport::upper(&format!("theta_variance_decay_{}", e.rho), worst_ratio, 1.0)
                    .with_param("rho", e.rho),
            );
        }
    }
    Ok(reports)
}

/// Mean of the minimum weight over the `r^2` edges of a complete bipartite
/// instance, compared against the mean edge weight. The gap is strict, so
/// the claim is `mean + slack <= mu`. Closed-form means of the minimum are
/// attached when the family has one.
pub fn check_min_edge_mean(
    r: usize,
    trials: usize,
    dist: &WeightDistribution,
    master_seed: u64,
    slack_sigma: f64,
) -> Result<BoundReport> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("r={r} must be at least 2")));
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let inst = sample_weights(dist, r, SeedSpec::new(master_seed, trial));
            inst.weights()
                .expect("sampled weights")
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (mean, _) = mean_and_variance(&values);
    let se = std_error(&values);
    let mu = dist.mean();
    let draws = (r * r) as f64;
    let mut report = BoundReport::upper("min_edge_mean", mean, mu - slack_sigma * se)
        .with_param("r", r as f64)
        .with_param("mu", mu)
        .with_param("se_mean", se)
        .with_param("trials", trials as f64);
    let oracle = match dist {
        WeightDistribution::Uniform01 => Some(1.0 / (draws + 1.0)),
        WeightDistribution::Exponential { lambda } => Some(1.0 / (draws * lambda)),
        WeightDistribution::Constant { value } => Some(*value),
        WeightDistribution::Power { .. } => None,
    };
    if let Some(o) = oracle {
        report = report.with_param("oracle_mean", o);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SaturationRow {
    pub tau: usize,
    pub mean: f64,
    pub std_error: f64,
    pub mean_over_n: f64,
    pub variance: f64,
}

/// Scan of the mean minimum weight across an edge-count grid at fixed `n`.
#[derive(Debug, Clone, Serialize)]
pub struct SaturationTable {
    pub n: usize,
    pub rows: Vec<SaturationRow>,
    /// Least-squares slope of `ln mean` against `ln tau`.
    pub loglog_slope: Option<f64>,
    /// `1 + 2/alpha` for the power family, where the mean scales like
    /// `tau (tau/n)^(2/alpha)`.
    pub expected_slope: Option<f64>,
}

impl SaturationTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,mean,std_error,mean_over_n,variance\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.tau, row.mean, row.std_error, row.mean_over_n, row.variance
            ));
        }
        out
    }

    /// Two-sided check of the fitted log-log slope against its expected
    /// value, when the family has one.
    pub fn slope_report(&self, tolerance: f64) -> Option<BoundReport> {
        let (slope, expected) = (self.loglog_slope?, self.expected_slope?);
        Some(
            BoundReport::upper("saturation_slope", (slope - expected).abs(), tolerance)
                .with_param("slope", slope)
                .with_param("expected", expected)
                .with_param("n", self.n as f64),
        )
    }
}

/// Estimates the mean minimum weight for every `tau` in the grid. All
/// constraint counts share each trial's instance: one profile per sampled
/// instance serves the whole grid.
pub fn saturation_scan(
    n: usize,
    tau_grid: &[usize],
    dist: &WeightDistribution,
    trials: usize,
    master_seed: u64,
) -> Result<SaturationTable> {
    if tau_grid.is_empty() {
        return Err(Error::TooFewPoints { got: 0, needed: 1 });
    }
    for &tau in tau_grid {
        if tau < 1 || tau > n {
            return Err(Error::InvalidTau { tau, max: n });
        }
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let inst = sample_weights(dist, n, SeedSpec::new(master_seed, trial));
            let profile = min_weight_profile(&inst).expect("sampled instance has weights");
            // Suffix minimum turns the exact-count profile into at-least counts.
            let mut suffix = profile;
            for k in (0..suffix.len() - 1).rev() {
                suffix[k] = suffix[k].min(suffix[k + 1]);
            }
            tau_grid.iter().map(|&tau| suffix[tau]).collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(tau_grid.len());
    for (idx, &tau) in tau_grid.iter().enumerate() {
        let values: Vec<f64> = per_trial.iter().map(|v| v[idx]).collect();
        let (mean, variance) = mean_and_variance(&values);
        rows.push(SaturationRow {
            tau,
            mean,
            std_error: std_error(&values),
            mean_over_n: mean / n as f64,
            variance,
        });
    }

    let (loglog_slope, expected_slope) = match dist {
        WeightDistribution::Power { alpha } => (fit_slope(&rows), Some(1.0 + 2.0 / alpha)),
        WeightDistribution::Uniform01 => (fit_slope(&rows), Some(3.0)),
        _ => (None, None),
    };
    Ok(SaturationTable { n, rows, loglog_slope, expected_slope })
}

fn fit_slope(rows: &[SaturationRow]) -> Option<f64> {
    if rows.len() < 2 || rows.iter().any(|r| r.mean <= 0.0) {
        return None;
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.tau as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
    Some(ols_slope(&x, &y))
}
