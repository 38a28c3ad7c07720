//! Oracle-equivalence sweep: the fast solvers against the exhaustive
//! enumerators, exhaustively over all state patterns where feasible and on
//! seeded random instances beyond that. Mismatches are dumped as
//! reproducer CSV files.

use std::path::PathBuf;

use planarmatch::solvers::{brute_force_min_weight_profile, min_weight_profile};
use planarmatch::{
    brute_force_max_size, max_size_planar, sample_states, sample_weights, BipartiteInstance,
    EdgeProbabilityModel, Error, Result, SeedSpec, WeightDistribution,
};

pub const ORACLE_CHECK_MAX_N: usize = 8;

/// Sizes up to this get the full `2^(n^2)` pattern sweep.
const EXHAUSTIVE_MAX_N: usize = 4;

pub struct OracleCheckOutcome {
    pub comparisons: u64,
    pub mismatches: u64,
}

fn dump_reproducer(inst: &BipartiteInstance, label: &str) -> Result<PathBuf> {
    let path = PathBuf::from(format!("mismatch_{label}.csv"));
    let mut buf = Vec::new();
    if inst.has_states() {
        inst.write_states_csv(&mut buf)?;
    } else {
        inst.write_weights_csv(&mut buf)?;
    }
    std::fs::write(&path, buf)?;
    Ok(path)
}

fn check_sizes(
    inst: &BipartiteInstance,
    label: &str,
    outcome: &mut OracleCheckOutcome,
) -> Result<()> {
    let n = inst.n();
    for cap in 0..n.max(1) {
        outcome.comparisons += 1;
        let fast = max_size_planar(inst, cap)?.size;
        let slow = brute_force_max_size(inst, cap)?;
        if fast != slow {
            outcome.mismatches += 1;
            let path = dump_reproducer(inst, &format!("{label}_L{cap}"))?;
            eprintln!(
                "size mismatch: n={n} L={cap} fast={fast} brute={slow}; instance at {}",
                path.display()
            );
        }
    }
    Ok(())
}

fn check_weights(
    inst: &BipartiteInstance,
    label: &str,
    outcome: &mut OracleCheckOutcome,
) -> Result<()> {
    let n = inst.n();
    // One exact profile and one exhaustive profile cover every tau.
    let fast_profile = min_weight_profile(inst)?;
    let slow_profile = brute_force_min_weight_profile(inst)?;
    for tau in 1..=n {
        outcome.comparisons += 1;
        let tail_min = |p: &[f64]| p[tau..].iter().copied().fold(f64::INFINITY, f64::min);
        let fast = tail_min(&fast_profile);
        let slow = tail_min(&slow_profile);
        if (fast - slow).abs() > 1e-12 {
            outcome.mismatches += 1;
            let path = dump_reproducer(inst, &format!("{label}_tau{tau}"))?;
            eprintln!(
                "weight mismatch: n={n} tau={tau} fast={fast} brute={slow}; instance at {}",
                path.display()
            );
        }
    }
    Ok(())
}

/// Runs both oracle-equivalence suites up to `n_max`.
///
/// Sizes: exhaustive over every state pattern for `n <= 4`, then `trials`
/// seeded Bernoulli(1/2) patterns per size. Weights: `trials` seeded
/// uniform instances per size, every `tau`, tolerance `1e-12`.
pub fn run_oracle_check(n_max: usize, trials: usize, seed: u64) -> Result<OracleCheckOutcome> {
    if !(1..=ORACLE_CHECK_MAX_N).contains(&n_max) {
        return Err(Error::InvalidParameter(format!(
            "n-max must lie in 1..={ORACLE_CHECK_MAX_N}, got {n_max}"
        )));
    }
    let mut outcome = OracleCheckOutcome { comparisons: 0, mismatches: 0 };

    for n in 1..=n_max {
        if n <= EXHAUSTIVE_MAX_N {
            for pattern in 0u32..1 << (n * n) {
                let states: Vec<bool> = (0..n * n).map(|b| pattern >> b & 1 == 1).collect();
                let inst = BipartiteInstance::from_states(n, states)?;
                check_sizes(&inst, &format!("states_n{n}_pattern{pattern}"), &mut outcome)?;
            }
            println!("sizes n={n}: exhaustive over {} patterns", 1u64 << (n * n));
        } else {
            let model = EdgeProbabilityModel::homogeneous(n, 0.5)?;
            for trial in 0..trials as u64 {
                let inst = sample_states(&model, SeedSpec::new(seed, trial));
                check_sizes(&inst, &format!("states_n{n}_trial{trial}"), &mut outcome)?;
            }
            println!("sizes n={n}: {trials} random patterns");
        }
    }

    let dist = WeightDistribution::Uniform01;
    for n in 2..=n_max {
        for trial in 0..trials as u64 {
            let inst = sample_weights(&dist, n, SeedSpec::new(seed ^ 0x57A7, trial));
            check_weights(&inst, &format!("weights_n{n}_trial{trial}"), &mut outcome)?;
        }
        println!("weights n={n}: {trials} random instances, all tau");
    }

    Ok(outcome)
}
