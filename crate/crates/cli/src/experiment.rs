//! Drives one configured experiment: runs the trials, evaluates the
//! bounds, and writes the output files (CSV tables, a JSON-lines report
//! stream and a JSON manifest sufficient to re-run bit-identically).

use std::fmt::Write as _;
use std::path::Path;

use planarmatch::bounds::{
    bound_appendix_rn, bound_chernoff, bound_degree_cap, bound_stable_set, bound_theorem21_size,
    bound_theorem31, reports_to_csv, BoundReport, MinWeightGridPoint,
};
use planarmatch::experiments::{
    check_min_edge_mean, check_superadditivity, check_theta_shape, estimate_theta, run_trials,
    saturation_scan, superadditivity_sweep, theta_table_csv, ThetaEstimate, TrialConfig,
};
use planarmatch::stochastic::substream;
use planarmatch::{
    average_edge_probability, build_conflict_graph, max_size_planar, quantile_s, quantile_t,
    sample_states, Error, Result, SeedSpec,
};

use crate::config::{ExperimentConfig, StatesSpec};

/// Aggregate verdict of one run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOutcome {
    pub deterministic_violations: usize,
    pub probabilistic_failures: usize,
    pub skipped: usize,
}

impl RunOutcome {
    fn absorb(&mut self, reports: &[BoundReport]) {
        for r in reports {
            if r.skipped {
                self.skipped += 1;
            } else if !r.holds {
                if r.deterministic {
                    self.deterministic_violations += 1;
                } else {
                    self.probabilistic_failures += 1;
                }
            }
        }
    }
}

struct OutputDir<'a> {
    dir: &'a Path,
}

impl OutputDir<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        std::fs::create_dir_all(self.dir)?;
        std::fs::write(self.dir.join(name), contents)?;
        Ok(())
    }
}

fn manifest_json(config: &ExperimentConfig) -> String {
    let manifest = serde_json::json!({
        "tool": "planarmatch",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    text
}

fn reports_jsonl(reports: &[BoundReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.json_line());
        out.push('\n');
    }
    out
}

fn print_reports(reports: &[BoundReport]) {
    for r in reports {
        let tag = if r.skipped {
            "skip"
        } else if r.holds {
            " ok "
        } else if r.deterministic {
            "FAIL*"
        } else {
            "FAIL"
        };
        let reason = r.skip_reason.as_deref().unwrap_or("");
        println!("[{tag}] {} lhs={} rhs={} {reason}", r.bound_id, r.lhs, r.rhs);
    }
}

/// Runs the configured experiment, writing outputs under `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    if config.trials() == 0 && !matches!(config, ExperimentConfig::Chernoff { .. }) {
        return Err(Error::NoTrials);
    }
    let dir = OutputDir { dir: out };
    let mut outcome = RunOutcome::default();
    let mut reports: Vec<BoundReport> = Vec::new();

    match config {
        ExperimentConfig::Theorem21 {
            n,
            length_cap,
            states,
            trials,
            master_seed,
            slack_sigma,
            check_conflict_bounds,
        } => {
            let model = states.resolve(*n)?;
            let p_av = average_edge_probability(&model, *length_cap)?;
            let run = run_trials(
                &TrialConfig::MaxSize { model: model.clone(), length_cap: *length_cap },
                *master_seed,
                *trials,
            )?;
            reports.extend(bound_theorem21_size(
                &run.values(),
                *n,
                *length_cap,
                p_av,
                *slack_sigma,
            )?);
            if *check_conflict_bounds {
                let mut violations = [0usize; 3];
                for summary in &run.summaries {
                    let inst = sample_states(&model, SeedSpec::new(*master_seed, summary.trial_index));
                    let cg = build_conflict_graph(&inst, *length_cap)?;
                    let size = max_size_planar(&inst, *length_cap)?.size;
                    let (lo, hi) = bound_stable_set(&cg, size);
                    violations[0] += usize::from(!lo.holds);
                    violations[1] += usize::from(!hi.holds);
                    violations[2] += usize::from(!bound_degree_cap(&cg, *length_cap).holds);
                }
                for (idx, id) in ["stable_set_lower_violations", "stable_set_upper_violations", "degree_cap_violations"]
                    .iter()
                    .enumerate()
                {
                    reports.push(
                        BoundReport::upper(id, violations[idx] as f64, 0.0)
                            .deterministic()
                            .with_param("trials", *trials as f64),
                    );
                }
            }
            dir.write("trials.csv", &run.to_csv())?;
        }

        ExperimentConfig::Theorem31 { n_grid, tau, weights, trials, master_seed, stability_factor } => {
            let mut grid = Vec::new();
            let mut table = String::from("n,tau,s_n,t_n,mean,variance,max_ratio_t,min_ratio_s\n");
            for &n in n_grid {
                let tau_n = tau.tau_for(n);
                if tau_n < 1 || tau_n > n {
                    return Err(Error::InvalidTau { tau: tau_n, max: n });
                }
                let run = run_trials(
                    &TrialConfig::MinWeight { dist: weights.clone(), n, tau: tau_n },
                    substream(*master_seed, n as u64),
                    *trials,
                )?;
                let point = MinWeightGridPoint {
                    n,
                    tau: tau_n,
                    quantile_s: quantile_s(weights, n, tau_n),
                    quantile_t: quantile_t(weights, n, tau_n),
                    values: run.values(),
                };
                writeln!(
                    table,
                    "{},{},{},{},{},{},{},{}",
                    n,
                    tau_n,
                    point.quantile_s,
                    point.quantile_t,
                    run.stats.mean,
                    run.stats.variance,
                    point.max_ratio_t(),
                    point.min_ratio_s(),
                )
                .expect("string write");
                grid.push(point);
            }
            reports.extend(bound_theorem31(&grid, *stability_factor)?);
            dir.write("ratios.csv", &table)?;
        }

        ExperimentConfig::Theta { rho_grid, n_grid, weights, trials, master_seed, slack_sigma } => {
            let mut estimates: Vec<ThetaEstimate> = Vec::new();
            for &rho in rho_grid {
                estimates.push(estimate_theta(rho, n_grid, *trials, weights, *master_seed)?);
            }
            dir.write("theta.csv", &theta_table_csv(&estimates))?;
            reports.extend(check_theta_shape(&estimates, weights.mean(), *slack_sigma)?);
        }

        ExperimentConfig::Appendix { n, states, trials, master_seed, slack_sigma } => {
            let StatesSpec::Homogeneous { p } = states else {
                return Err(Error::InvalidParameter(
                    "the appendix experiment needs a homogeneous state model".into(),
                ));
            };
            let model = states.resolve(*n)?;
            let run = run_trials(
                &TrialConfig::UnconstrainedMaxSize { model },
                *master_seed,
                *trials,
            )?;
            reports.extend(bound_appendix_rn(&run.values(), *n, *p, *slack_sigma)?);
            dir.write("trials.csv", &run.to_csv())?;
        }

        ExperimentConfig::Chernoff { r_grid, p_grid, gamma_grid, trials, master_seed } => {
            for &r in r_grid {
                for &p in p_grid {
                    for &gamma in gamma_grid {
                        let mut rep = bound_chernoff(r, p, gamma, *trials, *master_seed)?;
                        rep.bound_id = format!("chernoff_r{r}_p{p}_g{gamma}");
                        reports.push(rep);
                    }
                }
            }
        }

        ExperimentConfig::Saturation {
            n,
            tau_grid,
            weights,
            trials,
            master_seed,
            slope_tolerance,
            min_edge_r_grid,
            min_edge_trials,
            slack_sigma,
        } => {
            let table = saturation_scan(*n, tau_grid, weights, *trials, *master_seed)?;
            dir.write("saturation.csv", &table.to_csv())?;
            if let Some(rep) = table.slope_report(*slope_tolerance) {
                reports.push(rep);
            }
            for &r in min_edge_r_grid {
                let mut rep = check_min_edge_mean(
                    r,
                    *min_edge_trials,
                    weights,
                    substream(*master_seed, 0xF0 + r as u64),
                    *slack_sigma,
                )?;
                rep.bound_id = format!("min_edge_mean_r{r}");
                reports.push(rep);
            }
        }

        ExperimentConfig::Superadd {
            weights,
            trials,
            master_seed,
            random_configs,
            n_min,
            n_max,
            rho_min,
            rho_max,
            pairs,
            slack_sigma,
        } => {
            if *random_configs > 0 {
                reports.extend(superadditivity_sweep(
                    *random_configs,
                    (*n_min, *n_max),
                    (*rho_min, *rho_max),
                    *trials,
                    weights,
                    *master_seed,
                    *slack_sigma,
                )?);
            }
            for (idx, pair) in pairs.iter().enumerate() {
                let mut rep = check_superadditivity(
                    pair.n1,
                    pair.n2,
                    pair.rho1,
                    pair.rho2,
                    *trials,
                    weights,
                    substream(*master_seed, 0xAB00 + idx as u64),
                    *slack_sigma,
                )?;
                rep.bound_id = format!("superadditivity_pair{idx}");
                reports.push(rep);
            }
        }
    }

    outcome.absorb(&reports);
    dir.write("bounds.csv", &reports_to_csv(&reports))?;
    dir.write("bounds.jsonl", &reports_jsonl(&reports))?;
    dir.write("manifest.json", &manifest_json(config))?;
    print_reports(&reports);
    Ok(outcome)
}
