//! Dyadic moment-decay experiment: Monte Carlo densities of X_{s,t} on a
//! geometric s-grid, block moments per j, and a fitted log₂-slope compared
//! with −(α + β).

use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::kernel::{
    block_moment, estimate_density, fit_dyadic_decay, sample_x, DensityEstimate, DensityOptions, Estimator, SampleBatch,
    SamplerConfig, SmallJumpMode,
};
use crate::littlewood_paley::{build_dyadic_partition, DyadicPartition};
use crate::verify::config::{CruSpec, ExperimentConfig};
use crate::verify::report::{Criterion, ExperimentReport};

/// One row of `cru_decay.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub j: usize,
    pub statistic: f64,
    pub stderr: f64,
    pub fitted_slope: f64,
}

/// CSV with header `j,statistic,stderr,fitted_slope`.
pub fn cru_decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("j,statistic,stderr,fitted_slope\n");
    for r in rows {
        let _ = writeln!(out, "{},{:?},{:?},{:?}", r.j, r.statistic, r.stderr, r.fitted_slope);
    }
    out
}

/// τ = t − s nodes t·2^{−depth·k/(m−1)}, k = 0, …, m − 1, returned as s ascending.
pub fn s_nodes(t: f64, nodes: usize, depth: f64) -> Vec<f64> {
    (0..nodes).map(|k| t - t * 2f64.powf(-depth * k as f64 / (nodes - 1) as f64)).collect()
}

fn derived_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Block moments m[j] = ∫|x|^β|Δⱼp(x)|dx for every requested β and block.
fn moments(
    density: &DensityEstimate,
    betas: &[f64],
    blocks: &[usize],
    partition: &DyadicPartition,
) -> Result<Vec<Vec<f64>>> {
    betas.iter().map(|&b| blocks.iter().map(|&j| block_moment(density, j, b, partition)).collect()).collect()
}

/// Trapezoid in s of per-node moments, one value per (β, j).
fn integrate(s: &[f64], per_node: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let (nb, nj) = (per_node[0].len(), per_node[0][0].len());
    (0..nb)
        .map(|b| {
            (0..nj)
                .map(|j| s.windows(2).enumerate().map(|(k, w)| 0.5 * (w[1] - w[0]) * (per_node[k][b][j] + per_node[k + 1][b][j])).sum())
                .collect()
        })
        .collect()
}

struct Setup<'a> {
    config: &'a ExperimentConfig,
    spec: CruSpec,
    alpha: f64,
    betas: Vec<f64>,
    blocks: Vec<usize>,
    grid: TorusGrid,
    partition: DyadicPartition,
    options: DensityOptions,
    mode: SmallJumpMode,
    s: Vec<f64>,
}

impl Setup<'_> {
    fn batch(&self, k: usize) -> Result<SampleBatch> {
        let nu = self.config.measure()?;
        let coeff = self.config.coefficients()?;
        let kappa = crate::operator::FrozenKappa::freeze(&coeff.kappa, [0.0, 0.0]);
        let sigma = coeff.sigma.clone();
        let tau = self.spec.t - self.s[k];
        let eps = (self.spec.jump_cutoff_factor * tau.powf(1.0 / self.alpha)).min(0.5);
        let mut sampler =
            SamplerConfig::new(eps, self.spec.samples, derived_seed(self.config.seed, k as u64), self.mode)?;
        if !sigma.time_independent {
            sampler = sampler.with_time_steps(16)?;
        }
        sample_x(&nu, &kappa, &|r| sigma.eval(r, [0.0, 0.0]), self.s[k], self.spec.t, &sampler)
    }
}

/// Runs the experiment for every β in `[cru] betas` (default `params.beta`),
/// sharing the sampled densities between them.
pub fn run_cru_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = config.cru.clone().unwrap_or_default();
    let alpha = config.alpha()?;
    let betas = match &spec.betas {
        Some(b) => b.clone(),
        None => vec![config.params()?.beta],
    };
    for &b in &betas {
        if !(b >= 0.0 && b < alpha) {
            return Err(Error::config(format!("β = {b} must lie in [0, α) = [0, {alpha}); the |x|^β moment diverges")));
        }
    }
    if spec.nodes < 2 || !(spec.depth > 0.0) || !(spec.t > 0.0) {
        return Err(Error::config("[cru] needs nodes ≥ 2, depth > 0 and t > 0"));
    }
    if spec.samples < 10_000 {
        return Err(Error::Budget(format!("[cru] samples = {} is below the ECF minimum of 10⁴", spec.samples)));
    }
    let [j_lo, j_hi] = spec.blocks;
    if j_hi < j_lo + 2 {
        return Err(Error::config("[cru] blocks must span at least three values of j"));
    }
    let blocks: Vec<usize> = (j_lo..=j_hi).collect();
    let dim = config.dim()?;
    let grid = TorusGrid::new(dim, spec.half_period, spec.n)?;
    let partition = build_dyadic_partition(&grid)?;
    if j_hi > partition.j_max() {
        return Err(Error::config(format!("block {j_hi} exceeds j_max = {} of the density grid", partition.j_max())));
    }
    let options = DensityOptions {
        estimator: Estimator::Ecf,
        bandwidth: None,
        threshold: spec.threshold,
        // block moments read the unclipped spectrum, whose mass is exactly 1;
        // periodization and the clipped-mass check do not affect them
        min_coverage: 0.0,
        mass_tolerance: f64::INFINITY,
    };
    let mode = spec.small_jump_mode.unwrap_or_else(|| SmallJumpMode::default_for(alpha));
    let s = s_nodes(spec.t, spec.nodes, spec.depth);
    let setup = Setup { config, spec: spec.clone(), alpha, betas: betas.clone(), blocks: blocks.clone(), grid, partition, options, mode, s };

    let mut per_node = Vec::with_capacity(setup.s.len());
    let mut batches = Vec::with_capacity(setup.s.len());
    let mut clipped_mass = Vec::with_capacity(setup.s.len());
    let mut coverage = Vec::with_capacity(setup.s.len());
    for k in 0..setup.s.len() {
        let batch = setup.batch(k)?;
        let density = estimate_density(&batch, &setup.grid, &setup.options)?;
        clipped_mass.push(density.integral());
        coverage.push(density.coverage);
        per_node.push(moments(&density, &setup.betas, &setup.blocks, &setup.partition)?);
        batches.push(batch);
    }
    let statistic = integrate(&setup.s, &per_node);

    // bootstrap over paths, node by node
    let replicates = (0..spec.bootstrap)
        .into_par_iter()
        .map(|r| {
            let nodes = batches
                .iter()
                .enumerate()
                .map(|(k, batch)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream((1 << 40) | ((r as u64) << 20) | k as u64);
                    let idx: Vec<usize> = (0..batch.len()).map(|_| rng.random_range(0..batch.len())).collect();
                    let density = estimate_density(&batch.select(&idx), &setup.grid, &setup.options)?;
                    moments(&density, &setup.betas, &setup.blocks, &setup.partition)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(integrate(&setup.s, &nodes))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new("cru", config.to_value());
    let tau_min = spec.t - setup.s[setup.s.len() - 1];
    report.record(
        "s_grid",
        json!({ "s": setup.s, "tau_min": tau_min, "jump_cutoff_factor": spec.jump_cutoff_factor, "small_jump_mode": mode }),
    );
    report.record("clipped_mass", &clipped_mass);
    report.record("coverage", &coverage);
    for (bi, &beta) in betas.iter().enumerate() {
        let values: Vec<(usize, f64)> = blocks.iter().zip(&statistic[bi]).map(|(&j, &v)| (j, v)).collect();
        let fit = fit_dyadic_decay(&values)?;
        let stderr: Vec<f64> = (0..blocks.len())
            .map(|ji| {
                let xs: Vec<f64> = replicates.iter().map(|r| r[bi][ji]).collect();
                std_dev(&xs)
            })
            .collect();
        let slopes: Vec<f64> = replicates
            .iter()
            .filter_map(|r| {
                let v: Vec<(usize, f64)> = blocks.iter().zip(&r[bi]).map(|(&j, &v)| (j, v)).collect();
                fit_dyadic_decay(&v).ok().map(|f| f.slope)
            })
            .collect();
        // normal-approximation interval; resampling duplicates raise the ECF
        // noise floor, so replicate slopes are biased towards zero
        let slope_stderr = std_dev(&slopes);
        let ci = [fit.slope - 1.96 * slope_stderr, fit.slope + 1.96 * slope_stderr];
        let target = -(alpha + beta);
        report.check(
            format!("slope_beta_{beta}"),
            fit.slope,
            Criterion::Within { target, tolerance: spec.slope_tolerance },
        );
        // contribution of s ∈ [t − τ_min, t], bounded by τ_min·sup block moment at τ_min
        let last = &per_node[per_node.len() - 1][bi];
        let endpoint: Vec<f64> = last.iter().map(|m| tau_min * m).collect();
        report.record(
            format!("beta_{beta}"),
            json!({
                "alpha": alpha,
                "beta": beta,
                "target_slope": target,
                "fit": fit,
                "slope_stderr": slope_stderr,
                "slope_ci95": ci,
                "statistic": statistic[bi],
                "stderr": stderr,
                "endpoint_bound": endpoint,
            }),
        );
        let rows: Vec<DecayRow> = blocks
            .iter()
            .enumerate()
            .map(|(ji, &j)| DecayRow { j, statistic: statistic[bi][ji], stderr: stderr[ji], fitted_slope: fit.slope })
            .collect();
        let name = if betas.len() == 1 { "cru_decay.csv".to_string() } else { format!("cru_decay_beta_{beta}.csv") };
        report.attach_table(name, cru_decay_csv(&rows));
    }
    Ok(report)
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            "seed = 3\n[params]\nalpha = 1.5\nbeta = 0.3\n[measure]\nkind = \"standard\"\ndim = 1\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn node_grid() {
        let s = s_nodes(1.0, 5, 8.0);
        assert_eq!(s[0], 0.0);
        assert!((1.0 - s[4] - 2f64.powi(-8)).abs() < 1e-15);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_divergent_moments_and_small_budgets() {
        let c = config("[cru]\nbetas = [1.6]\n");
        assert!(matches!(run_cru_experiment(&c), Err(Error::Config(_))));
        let c = config("[cru]\nsamples = 5000\n");
        assert!(matches!(run_cru_experiment(&c), Err(Error::Budget(_))));
    }

    #[test]
    fn small_run_is_deterministic() {
        let c = config("[cru]\nsamples = 10000\nnodes = 6\ndepth = 8\nn = 2048\nbootstrap = 2\n");
        let a = run_cru_experiment(&c).unwrap();
        let b = run_cru_experiment(&c).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.tables["cru_decay.csv"], b.tables["cru_decay.csv"]);
        assert!(a.tables["cru_decay.csv"].starts_with("j,statistic,stderr,fitted_slope\n"));
    }
}
