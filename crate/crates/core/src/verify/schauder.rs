//! Schauder-ratio measurements ‖u‖_{C^{α+β}} / ‖f‖_{C^β} on a refinement ladder.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::littlewood_paley::{besov_norm, block_decompose, build_dyadic_partition, holder_norm};
use crate::operator::Source;
use crate::solver::{solve, source_sup, SolveConfig, SolverResult};
use crate::verify::config::ExperimentConfig;
use crate::verify::report::{Criterion, ExperimentReport};

/// Bound of the maximum-principle check ‖u‖ ≤ factor·T‖f‖.
pub const MAX_PRINCIPLE_FACTOR: f64 = 1.05;

/// One checkpoint of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchauderRow {
    pub n: usize,
    pub t: f64,
    pub holder_num: f64,
    pub besov_num: f64,
    pub denom: f64,
    pub ratio: f64,
}

/// CSV with header `N,t,holder_num,besov_num,denom,ratio`.
pub fn schauder_csv(rows: &[SchauderRow]) -> String {
    let mut out = String::from("N,t,holder_num,besov_num,denom,ratio\n");
    for r in rows {
        let _ = writeln!(out, "{},{:?},{:?},{:?},{:?},{:?}", r.n, r.t, r.holder_num, r.besov_num, r.denom, r.ratio);
    }
    out
}

/// sup over checkpoint times of ‖f(t)‖_{C^β}.
fn source_norm(f: &Source, cfg: &SolveConfig, beta: f64) -> Result<f64> {
    if f.zero {
        return Ok(0.0);
    }
    let times = if f.time_independent { vec![0.0] } else { cfg.checkpoint_times() };
    times.into_iter().try_fold(0.0f64, |acc, t| {
        let sample = GridFunction::from_fn(cfg.grid, |x| f.eval(t, x));
        Ok(acc.max(holder_norm(&sample, beta)?))
    })
}

struct Level {
    rows: Vec<SchauderRow>,
    blocks: Vec<(f64, Vec<f64>)>,
    ratio: f64,
    besov_ratio: f64,
    result: SolverResult,
    f_sup: f64,
}

fn measure(cfg: &SolveConfig, order: f64, beta: f64) -> Result<Level> {
    let result = solve(cfg)?;
    let partition = build_dyadic_partition(&cfg.grid)?;
    let denom = source_norm(&cfg.coeff.source, cfg, beta)?;
    let mut rows = Vec::with_capacity(result.history.len());
    let mut blocks = Vec::with_capacity(result.history.len());
    for u in &result.history {
        let t = u.time.unwrap_or(cfg.t_final);
        let holder_num = holder_norm(u, order)?;
        let besov_num = besov_norm(u, order, &partition)?;
        let ratio = if denom > 0.0 { holder_num / denom } else { 0.0 };
        rows.push(SchauderRow { n: cfg.grid.n(), t, holder_num, besov_num, denom, ratio });
        blocks.push((t, block_decompose(u, &partition)?.profile(order)));
    }
    let sup = |f: fn(&SchauderRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (ratio, besov_ratio) =
        if denom > 0.0 { (sup(|r| r.holder_num) / denom, sup(|r| r.besov_num) / denom) } else { (0.0, 0.0) };
    let f_sup = source_sup(&cfg.coeff.source, &cfg.grid, cfg.t_final);
    Ok(Level { rows, blocks, ratio, besov_ratio, result, f_sup })
}

fn default_ladder(dim: usize) -> Vec<usize> {
    if dim == 1 {
        vec![128, 256, 512]
    } else {
        vec![64, 128, 256]
    }
}

/// Solves on every ladder level, tabulates the ratio at each checkpoint and
/// checks its stability across the ladder, its invariance under f → λf and
/// the maximum principle.
pub fn run_schauder_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let gate = config.gate()?;
    if !gate.is_valid() {
        return Err(Error::config(format!("parameter gate rejects the run: {}", gate.summary())));
    }
    let params = config.params()?;
    let order = params.alpha + params.beta;
    let spec = config.schauder.clone().unwrap_or_default();
    let ladder = spec.ladder.clone().unwrap_or_else(|| default_ladder(config.dim().unwrap_or(1)));
    let scales = spec.scales.clone().unwrap_or_else(|| vec![0.5, 10.0]);
    let stability_factor = spec.stability_factor.unwrap_or(2.0);
    let linearity_tolerance = spec.linearity_tolerance.unwrap_or(1e-8);
    if ladder.is_empty() {
        return Err(Error::config("[schauder] ladder is empty"));
    }

    let mut report = ExperimentReport::new("schauder", config.to_value());
    report.record("gate", gate.summary());
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for &n in &ladder {
        let cfg = config.solve_config(config.grid_with(n)?)?;
        let level = measure(&cfg, order, params.beta)?;
        let t_final = cfg.t_final;
        let u_sup = level.result.sup_history();
        if level.f_sup > 0.0 {
            report.check(
                format!("max_principle_n{n}"),
                u_sup / (t_final * level.f_sup),
                Criterion::AtMost { bound: MAX_PRINCIPLE_FACTOR },
            );
        }
        rows.extend(level.rows.iter().copied());
        levels.push((n, cfg, level));
    }
    report.trivial = levels.iter().all(|(_, cfg, _)| cfg.coeff.source.zero);
    report.record(
        "ratios",
        levels
            .iter()
            .map(|(n, _, l)| json!({ "n": n, "ratio": l.ratio, "besov_ratio": l.besov_ratio }))
            .collect::<Vec<_>>(),
    );
    report.record(
        "block_table",
        levels
            .iter()
            .flat_map(|(n, _, l)| l.blocks.iter().map(move |(t, p)| json!({ "n": n, "t": t, "weighted_block_sup": p })))
            .collect::<Vec<_>>(),
    );
    report.record(
        "diagnostics",
        levels.iter().map(|(n, _, l)| json!({ "n": n, "diagnostics": l.result.diagnostics })).collect::<Vec<_>>(),
    );

    if report.trivial {
        let numerator = rows.iter().map(|r| r.holder_num).fold(0.0, f64::max);
        report.check("numerator", numerator, Criterion::AtMost { bound: 0.0 });
    } else {
        let ratios: Vec<f64> = levels.iter().map(|(_, _, l)| l.ratio).collect();
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        report.check("ratio_stability", hi / lo, Criterion::AtMost { bound: stability_factor });

        let (_, base_cfg, base) = &levels[0];
        for &lambda in &scales {
            let scaled = base_cfg.with_source(base_cfg.coeff.source.scaled(lambda));
            let level = measure(&scaled, order, params.beta)?;
            report.check(
                format!("linearity_lambda_{lambda}"),
                (level.ratio / base.ratio - 1.0).abs(),
                Criterion::AtMost { bound: linearity_tolerance },
            );
        }
    }
    report.attach_table("schauder_ratio.csv", schauder_csv(&rows));
    Ok(report)
}
