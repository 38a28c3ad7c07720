//! Random models for instances: inhomogeneous Bernoulli edge states,
//! edge-weight distributions with cdf envelopes, the derived quantiles,
//! and the deterministic seeding contract used by every sampler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteInstance;
use crate::error::{Error, Result};

/// Identifies one trial of one run. The derived per-trial seed is a pure
/// function of `(master_seed, trial_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        SeedSpec { master_seed, trial_index }
    }

    /// SplitMix64 finalizer over the combined state. The constants are part
    /// of the reproducibility contract and must never change.
    pub fn derived_seed(&self) -> u64 {
        let mut z = self
            .master_seed
            .wrapping_add(self.trial_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Per-trial generator. ChaCha8 keyed by the derived seed, so identical
    /// specs reproduce identical streams on every platform and thread count.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derived_seed())
    }
}

/// Derives an independent seed stream for a named sub-experiment, so that
/// e.g. each `(rho, n)` grid point of a study draws non-overlapping trials.
pub fn substream(master_seed: u64, tag: u64) -> u64 {
    SeedSpec::new(master_seed, tag ^ 0xA076_1D64_78BD_642F).derived_seed()
}

/// Per-edge presence probabilities for the random subgraph of `K_{n,n}`.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeProbabilityModel {
    /// Every edge present with the same probability.
    Homogeneous { n: usize, p: f64 },
    /// `p(i, j) = min(1, c / (1 + |i - j|))`.
    DistanceDecay { n: usize, c: f64 },
    /// Explicit row-major probability matrix.
    Matrix { n: usize, probs: Vec<f64> },
}

impl EdgeProbabilityModel {
    pub fn homogeneous(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { i: 0, j: 0, value: p });
        }
        Ok(EdgeProbabilityModel::Homogeneous { n, p })
    }

    pub fn distance_decay(n: usize, c: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidProbability { i: 0, j: 0, value: c });
        }
        Ok(EdgeProbabilityModel::DistanceDecay { n, c })
    }

    pub fn matrix(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n * n {
            return Err(Error::Format(format!(
                "probability matrix has {} entries, expected {}",
                probs.len(),
                n * n
            )));
        }
        for (idx, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { i: idx / n + 1, j: idx % n + 1, value: p });
            }
        }
        Ok(EdgeProbabilityModel::Matrix { n, probs })
    }

    pub fn n(&self) -> usize {
        match self {
            EdgeProbabilityModel::Homogeneous { n, .. }
            | EdgeProbabilityModel::DistanceDecay { n, .. }
            | EdgeProbabilityModel::Matrix { n, .. } => *n,
        }
    }

    /// Presence probability of edge `(u_i, v_j)` (1-based).
    pub fn probability(&self, i: usize, j: usize) -> f64 {
        match self {
            EdgeProbabilityModel::Homogeneous { p, .. } => *p,
            EdgeProbabilityModel::DistanceDecay { c, .. } => {
                (c / (1.0 + i.abs_diff(j) as f64)).min(1.0)
            }
            EdgeProbabilityModel::Matrix { n, probs } => probs[(i - 1) * n + (j - 1)],
        }
    }
}

/// Presence probability averaged over all edges of length at most `L`.
///
/// Accepts `L = n` with the same clamp as `count_length_bounded_edges`.
pub fn average_edge_probability(model: &EdgeProbabilityModel, length_cap: usize) -> Result<f64> {
    let n = model.n();
    let count = crate::bipartite::count_length_bounded_edges(n, length_cap)?;
    let mut sum = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            if i.abs_diff(j) <= length_cap {
                sum += model.probability(i, j);
            }
        }
    }
    Ok(sum / count as f64)
}

/// A named edge-weight law. For these i.i.d. families the lower and upper
/// cdf envelopes coincide with the cdf itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightDistribution {
    /// cdf `x^alpha` on `[0, 1]`.
    Power { alpha: f64 },
    Uniform01,
    Exponential { lambda: f64 },
    /// Every weight equal to `value`; degenerate law for deterministic checks.
    Constant { value: f64 },
}

impl WeightDistribution {
    /// Mean edge weight.
    pub fn mean(&self) -> f64 {
        match self {
            WeightDistribution::Power { alpha } => alpha / (alpha + 1.0),
            WeightDistribution::Uniform01 => 0.5,
            WeightDistribution::Exponential { lambda } => 1.0 / lambda,
            WeightDistribution::Constant { value } => *value,
        }
    }

    /// Cumulative distribution function (also both cdf envelopes).
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            WeightDistribution::Power { alpha } => x.min(1.0).powf(*alpha),
            WeightDistribution::Uniform01 => x.min(1.0),
            WeightDistribution::Exponential { lambda } => 1.0 - (-lambda * x).exp(),
            WeightDistribution::Constant { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper end of the support, or `+inf` when unbounded.
    pub fn support_upper(&self) -> f64 {
        match self {
            WeightDistribution::Power { .. } | WeightDistribution::Uniform01 => 1.0,
            WeightDistribution::Exponential { .. } => f64::INFINITY,
            WeightDistribution::Constant { value } => *value,
        }
    }

    /// Inverse cdf at `q` in `[0, 1)`, used for sampling and closed-form
    /// quantiles.
    fn inverse_cdf(&self, q: f64) -> f64 {
        match self {
            WeightDistribution::Power { alpha } => q.powf(1.0 / alpha),
            WeightDistribution::Uniform01 => q,
            WeightDistribution::Exponential { lambda } => -(1.0 - q).ln() / lambda,
            WeightDistribution::Constant { value } => *value,
        }
    }

    fn check_tau(n: usize, tau: usize) {
        assert!(
            (1..=n).contains(&tau),
            "tau={tau} outside 1..={n} (caller precondition)"
        );
    }
}

/// Lower quantile `inf {x > 0 : F_up(x) >= (tau / 64n)^2}`.
pub fn quantile_s(dist: &WeightDistribution, n: usize, tau: usize) -> f64 {
    WeightDistribution::check_tau(n, tau);
    let level = (tau as f64 / (64.0 * n as f64)).powi(2);
    dist.inverse_cdf(level)
}

/// Upper quantile `sup {x > 0 : F_low(x) <= (8 tau / n)^2}`.
///
/// When the level reaches 1 the supremum degenerates: the support's upper
/// end for bounded laws, `+inf` for unbounded ones. Checks involving a
/// `+inf` result are skipped by the bound evaluators.
pub fn quantile_t(dist: &WeightDistribution, n: usize, tau: usize) -> f64 {
    WeightDistribution::check_tau(n, tau);
    let level = (8.0 * tau as f64 / n as f64).powi(2);
    if level >= 1.0 {
        return dist.support_upper();
    }
    match dist {
        // A step cdf sits below any level < 1 up to the jump point.
        WeightDistribution::Constant { value } => *value,
        _ => dist.inverse_cdf(level),
    }
}

/// Generalized-inverse evaluation by bisection, for cross-checking the
/// closed forms: smallest `x` with `cdf(x) >= level`. The bracket is grown
/// by doubling, then bisected to `1e-12` with a 200-iteration cap.
pub fn quantile_by_bisection(dist: &WeightDistribution, level: f64) -> f64 {
    assert!((0.0..1.0).contains(&level));
    if level == 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while dist.cdf(hi) < level {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Samples edge states independently in row-major edge order.
///
/// Deterministic: the same `(master_seed, trial_index)` reproduces a
/// bit-identical instance regardless of platform or thread count.
pub fn sample_states(model: &EdgeProbabilityModel, seed: SeedSpec) -> BipartiteInstance {
    let n = model.n();
    let mut rng = seed.rng();
    let mut states = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            let u: f64 = rng.random();
            states.push(u < model.probability(i, j));
        }
    }
    BipartiteInstance::from_states(n, states).expect("sampled state array is well-formed")
}

/// Samples edge weights independently in row-major edge order by inverse-cdf
/// transform of one uniform draw per edge. Same determinism contract as
/// `sample_states`.
pub fn sample_weights(dist: &WeightDistribution, n: usize, seed: SeedSpec) -> BipartiteInstance {
    let mut rng = seed.rng();
    let mut weights = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let u: f64 = rng.random();
        weights.push(dist.inverse_cdf(u));
    }
    BipartiteInstance::from_weights(n, weights).expect("sampled weights are finite and nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_probability_homogeneous() {
        let model = EdgeProbabilityModel::homogeneous(10, 0.3).unwrap();
        for cap in 0..10 {
            let p = average_edge_probability(&model, cap).unwrap();
            assert!((p - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn average_probability_distance_decay() {
        // n=3, L=1: three length-0 edges at p=1, four length-1 edges at p=1/2.
        let model = EdgeProbabilityModel::distance_decay(3, 1.0).unwrap();
        let p = average_edge_probability(&model, 1).unwrap();
        assert!((p - 5.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn average_probability_matrix() {
        let model = EdgeProbabilityModel::matrix(2, vec![0.2, 0.4, 0.6, 0.8]).unwrap();
        let p = average_edge_probability(&model, 1).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn average_probability_rejects_bad_cap() {
        let model = EdgeProbabilityModel::homogeneous(3, 0.5).unwrap();
        assert!(average_edge_probability(&model, 4).is_err());
    }

    #[test]
    fn quantile_s_power_closed_form() {
        // alpha=2, n=64, tau=64: level (1/64)^2, quantile (1/64)^(2/2).
        let dist = WeightDistribution::Power { alpha: 2.0 };
        let s = quantile_s(&dist, 64, 64);
        assert!((s - 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn quantile_s_rejects_tau_zero() {
        quantile_s(&WeightDistribution::Power { alpha: 1.0 }, 8, 0);
    }

    #[test]
    fn quantile_t_power_closed_form() {
        let dist = WeightDistribution::Power { alpha: 1.0 };
        let t = quantile_t(&dist, 64, 4);
        assert!((t - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quantile_t_degenerate_levels() {
        let power = WeightDistribution::Power { alpha: 2.0 };
        assert_eq!(quantile_t(&power, 64, 8), 1.0);
        assert_eq!(quantile_t(&power, 64, 40), 1.0);
        let exp = WeightDistribution::Exponential { lambda: 1.5 };
        assert_eq!(quantile_t(&exp, 64, 8), f64::INFINITY);
    }

    #[test]
    fn quantiles_match_bisection() {
        let families = [
            WeightDistribution::Power { alpha: 0.7 },
            WeightDistribution::Power { alpha: 2.0 },
            WeightDistribution::Uniform01,
            WeightDistribution::Exponential { lambda: 1.0 },
            WeightDistribution::Exponential { lambda: 0.25 },
        ];
        for dist in &families {
            for (n, tau) in [(100usize, 100usize), (64, 4), (200, 17)] {
                let level_s = (tau as f64 / (64.0 * n as f64)).powi(2);
                let s = quantile_s(dist, n, tau);
                assert!(
                    (s - quantile_by_bisection(dist, level_s)).abs() < 1e-10,
                    "{dist:?} n={n} tau={tau}"
                );
                let level_t = (8.0 * tau as f64 / n as f64).powi(2);
                if level_t < 1.0 {
                    let t = quantile_t(dist, n, tau);
                    assert!(
                        (t - quantile_by_bisection(dist, level_t)).abs() < 1e-10,
                        "{dist:?} n={n} tau={tau}"
                    );
                }
            }
        }
    }

    #[test]
    fn quantile_s_below_quantile_t_everywhere() {
        let families = [
            WeightDistribution::Power { alpha: 0.5 },
            WeightDistribution::Power { alpha: 1.0 },
            WeightDistribution::Power { alpha: 3.0 },
            WeightDistribution::Uniform01,
            WeightDistribution::Exponential { lambda: 2.0 },
            WeightDistribution::Constant { value: 0.7 },
        ];
        for dist in &families {
            for n in [8usize, 64, 129] {
                for tau in 1..=n {
                    let s = quantile_s(dist, n, tau);
                    let t = quantile_t(dist, n, tau);
                    assert!(s <= t, "{dist:?} n={n} tau={tau}: s={s} t={t}");
                }
            }
        }
    }

    #[test]
    fn sampling_extremes() {
        let none = sample_states(
            &EdgeProbabilityModel::homogeneous(6, 0.0).unwrap(),
            SeedSpec::new(1, 0),
        );
        assert!(none.present_edges().unwrap().is_empty());
        let all = sample_states(
            &EdgeProbabilityModel::homogeneous(6, 1.0).unwrap(),
            SeedSpec::new(1, 0),
        );
        assert_eq!(all.present_edges().unwrap().len(), 36);
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = EdgeProbabilityModel::homogeneous(20, 0.37).unwrap();
        let a = sample_states(&model, SeedSpec::new(99, 7));
        let b = sample_states(&model, SeedSpec::new(99, 7));
        assert_eq!(a, b);
        let c = sample_states(&model, SeedSpec::new(99, 8));
        assert_ne!(a, c);

        let dist = WeightDistribution::Exponential { lambda: 2.0 };
        let w1 = sample_weights(&dist, 15, SeedSpec::new(3, 11));
        let w2 = sample_weights(&dist, 15, SeedSpec::new(3, 11));
        assert_eq!(w1, w2);
    }

    #[test]
    fn bernoulli_calibration_within_four_standard_errors() {
        let n = 20usize;
        let p = 0.35;
        let trials = 200u64;
        let model = EdgeProbabilityModel::homogeneous(n, p).unwrap();
        let mut present = 0usize;
        for t in 0..trials {
            present += sample_states(&model, SeedSpec::new(4242, t))
                .present_edges()
                .unwrap()
                .len();
        }
        let draws = (n * n) as f64 * trials as f64;
        let se = (draws * p * (1.0 - p)).sqrt();
        assert!((present as f64 - draws * p).abs() <= 4.0 * se);
    }

    #[test]
    fn uniform_weights_pass_kolmogorov_check() {
        // 10^4 draws from the alpha=1 power law against the identity cdf.
        let dist = WeightDistribution::Power { alpha: 1.0 };
        let inst = sample_weights(&dist, 100, SeedSpec::new(2024, 0));
        let mut values = inst.weights().unwrap().to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = values.len() as f64;
        let mut ks: f64 = 0.0;
        for (k, &x) in values.iter().enumerate() {
            let hi = (k + 1) as f64 / m - x;
            let lo = x - k as f64 / m;
            ks = ks.max(hi).max(lo);
        }
        assert!(ks < 0.02, "KS distance {ks}");
    }

    #[test]
    fn constant_family_is_degenerate() {
        let dist = WeightDistribution::Constant { value: 0.7 };
        let inst = sample_weights(&dist, 4, SeedSpec::new(0, 0));
        assert!(inst.weights().unwrap().iter().all(|&w| w == 0.7));
        assert_eq!(quantile_s(&dist, 16, 4), 0.7);
        assert_eq!(quantile_t(&dist, 16, 1), 0.7);
    }

    #[test]
    fn distribution_spec_json_round_trip() {
        let spec = r#"{"family":"power","alpha":1.0}"#;
        let dist: WeightDistribution = serde_json::from_str(spec).unwrap();
        assert_eq!(dist, WeightDistribution::Power { alpha: 1.0 });
        let spec = r#"{"family":"uniform01"}"#;
        let dist: WeightDistribution = serde_json::from_str(spec).unwrap();
        assert_eq!(dist, WeightDistribution::Uniform01);
        let spec = r#"{"family":"exponential","lambda":0.5}"#;
        let dist: WeightDistribution = serde_json::from_str(spec).unwrap();
        assert_eq!(dist, WeightDistribution::Exponential { lambda: 0.5 });
    }
}
