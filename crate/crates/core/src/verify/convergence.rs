//! Convergence of solutions under coefficient mollification: uₙ solves the
//! problem with σₙ = σ ∗ ρₙ and bₙ = b ∧ n, and ‖uₙ − u₂ₙ‖ over the trust window
//! should shrink along the ladder.

use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::solver::{mollify_coefficients, solve, source_sup, SolverResult};
use crate::verify::config::ExperimentConfig;
use crate::verify::report::{Criterion, ExperimentReport};
use crate::verify::schauder::MAX_PRINCIPLE_FACTOR;

/// sup over the window [−W, W]^d of |u − v|.
pub fn window_distance(u: &GridFunction, v: &GridFunction, window: f64) -> Result<f64> {
    let grid = *u.grid();
    grid.ensure_same(v.grid())?;
    Ok((0..grid.len())
        .filter(|&i| grid.point(i).iter().take(grid.dim()).all(|c| c.abs() <= window))
        .map(|i| (u.values()[i] - v.values()[i]).abs())
        .fold(0.0, f64::max))
}

/// sup over shared checkpoints of the window distance.
fn history_distance(a: &SolverResult, b: &SolverResult, window: f64) -> Result<f64> {
    a.history.iter().zip(&b.history).try_fold(0.0f64, |acc, (u, v)| Ok(acc.max(window_distance(u, v, window)?)))
}

pub fn run_mollified_convergence(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = config.mollify.as_ref().map(|m| m.ns.clone()).unwrap_or_else(|| vec![4, 8, 16, 32]);
    if ns.len() < 2 || ns.iter().any(|&n| n == 0) {
        return Err(Error::config("[mollify] ns needs at least two positive entries"));
    }
    let base = config.solve_config(config.grid()?)?;
    let window = base.window();
    let mut levels: Vec<usize> = ns.iter().flat_map(|&n| [n, 2 * n]).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut results = Vec::with_capacity(levels.len());
    for &n in &levels {
        let cfg = crate::solver::SolveConfig { coeff: mollify_coefficients(&base.coeff, n)?, ..base.clone() };
        results.push((n, solve(&cfg)?));
    }
    let find = |n: usize| &results.iter().find(|(m, _)| *m == n).expect("level solved").1;

    let mut report = ExperimentReport::new("mollified_convergence", config.to_value());
    let f_sup = source_sup(&base.coeff.source, &base.grid, base.t_final);
    if f_sup > 0.0 {
        let u_sup = results.iter().map(|(_, r)| r.sup_history()).fold(0.0, f64::max);
        report.check("max_principle", u_sup / (base.t_final * f_sup), Criterion::AtMost { bound: MAX_PRINCIPLE_FACTOR });
    }
    let mut distances = Vec::with_capacity(ns.len());
    for &n in &ns {
        distances.push((n, history_distance(find(n), find(2 * n), window)?));
    }
    let increases = distances.windows(2).filter(|w| !(w[1].1 < w[0].1)).count();
    report.check("non_decreasing_steps", increases as f64, Criterion::AtMost { bound: 0.0 });
    // zero differences would mean the mollification never acted
    report.check(
        "smallest_difference",
        distances.last().map_or(0.0, |d| d.1),
        Criterion::AtLeast { bound: f64::MIN_POSITIVE },
    );
    report.record(
        "differences",
        distances.iter().map(|(n, d)| json!({ "n": n, "two_n": 2 * n, "window_sup": d })).collect::<Vec<_>>(),
    );
    report.record("window", window);
    report.record(
        "diagnostics",
        results.iter().map(|(n, r)| json!({ "n": n, "diagnostics": r.diagnostics })).collect::<Vec<_>>(),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    #[test]
    fn window_restriction() {
        let g = TorusGrid::new(1, 4.0, 16).unwrap();
        let u = GridFunction::from_fn(g, |x| x[0]);
        let v = GridFunction::zeros(g);
        assert_eq!(window_distance(&u, &v, 2.0).unwrap(), 2.0);
        assert_eq!(window_distance(&u, &v, 10.0).unwrap(), 4.0);
    }

    #[test]
    fn rough_sigma_converges() {
        let c = ExperimentConfig::from_toml_str(
            r#"
[params]
alpha = 1.5
beta = 0.3
gamma = 0.5
[measure]
kind = "standard"
dim = 1
[coefficients]
sigma = "diag_abs_sin(eps=0.5, gamma=0.5)"
drift = "holder(beta=0.5)"
source = "cos(1)"
[grid]
n = 128
[solver]
t_final = 0.2
dt = 0.01
[mollify]
ns = [2, 4, 8]
"#,
        )
        .unwrap();
        let r = run_mollified_convergence(&c).unwrap();
        assert!(r.passed(), "{}", r.to_json().unwrap());
    }
}
