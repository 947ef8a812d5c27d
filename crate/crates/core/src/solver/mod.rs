//! Solvers for the Cauchy problem
//!
//! ```text
//! ∂ₜu = Lu + b·∇u + f,   u(0) = 0
//! ```
//!
//! on a torus grid: an exact spectral Duhamel path for x-independent
//! coefficients and a splitting scheme with semi-Lagrangian characteristics
//! for variable coefficients.

mod characteristics;
mod duhamel;
mod mollify;
mod splitting;

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

pub use characteristics::integrate_characteristics;
pub use duhamel::solve_constant_coeff;
pub use mollify::{clamp_drift, mollify_coefficients, mollify_sigma};
pub use splitting::solve_variable_coeff;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::levy::StableLevyMeasure;
use crate::operator::{CoefficientField, QuadratureScheme, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveScheme {
    DuhamelSpectral,
    Splitting,
}

/// Everything a solver run needs.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub t_final: f64,
    /// Requested step; the run uses T/n ≤ dt with n a multiple of `checkpoints`.
    pub dt: f64,
    pub grid: TorusGrid,
    pub scheme: SolveScheme,
    pub nu: StableLevyMeasure,
    pub coeff: CoefficientField,
    pub cfl_safety: f64,
    /// Treat a constant reference multiplier exactly (splitting only).
    pub integrating_factor: bool,
    /// `false` drops L entirely (pure transport runs).
    pub nonlocal: bool,
    /// Number of equally spaced checkpoints in (0, T]; the last one is T.
    pub checkpoints: usize,
    /// Trust window |x|∞ ≤ W for unbounded drifts (default L/2).
    pub window: Option<f64>,
    pub quadrature: QuadratureScheme,
}

impl SolveConfig {
    pub fn new(
        grid: TorusGrid,
        nu: StableLevyMeasure,
        coeff: CoefficientField,
        t_final: f64,
        dt: f64,
        scheme: SolveScheme,
    ) -> Result<Self> {
        let config = Self {
            t_final,
            dt,
            grid,
            scheme,
            nu,
            coeff,
            cfl_safety: 0.9,
            integrating_factor: true,
            nonlocal: true,
            checkpoints: 4,
            window: None,
            quadrature: QuadratureScheme::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::config(format!("T must be > 0, got {}", self.t_final)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::config(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if self.checkpoints == 0 {
            return Err(Error::config("at least one checkpoint (T itself) is required"));
        }
        if self.grid.dim() != self.nu.dim() || self.coeff.dim != self.nu.dim() {
            return Err(Error::Shape(format!(
                "dimensions differ: grid {}, coefficients {}, measure {}",
                self.grid.dim(),
                self.coeff.dim,
                self.nu.dim()
            )));
        }
        Ok(())
    }

    pub fn window(&self) -> f64 {
        self.window.unwrap_or(0.5 * self.grid.half_period())
    }

    /// Number of steps: ⌈T/dt⌉ rounded up to a multiple of the checkpoint count.
    pub fn step_count(&self) -> usize {
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        n.div_ceil(self.checkpoints) * self.checkpoints
    }

    pub fn checkpoint_times(&self) -> Vec<f64> {
        let m = self.checkpoints;
        (1..=m).map(|k| self.t_final * k as f64 / m as f64).collect()
    }

    /// Same run with the source replaced.
    pub fn with_source(&self, source: Source) -> Self {
        Self { coeff: self.coeff.with_source(source), ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub dt: f64,
    /// dt·max|b|/h over the trust window.
    pub cfl_transport: f64,
    /// dt·ρ/2 for the explicitly treated part of L (≤ cfl_safety when accepted).
    pub cfl_nonlocal: f64,
    /// Fraction of characteristic feet that left the trust window.
    pub window_exit_fraction: f64,
    /// T‖f‖∞ − max‖u(t_k)‖∞.
    pub max_principle_margin: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Output of a solver run. u(0) ≡ 0 is implied and not stored.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub u_final: GridFunction,
    /// Solutions at the checkpoint times, in increasing time.
    pub history: Vec<GridFunction>,
    pub diagnostics: Diagnostics,
    pub scheme: SolveScheme,
    pub t_final: f64,
}

impl SolverResult {
    /// Run manifest: configuration echo, CFL numbers and margins.
    pub fn manifest(&self, config: &SolveConfig) -> serde_json::Value {
        let c = &config.coeff;
        json!({
            "scheme": config.scheme,
            "T": config.t_final,
            "dt_requested": config.dt,
            "grid": { "dim": config.grid.dim(), "half_period": config.grid.half_period(), "n": config.grid.n() },
            "measure": config.nu.to_document(),
            "coefficients": {
                "kappa": c.kappa.name, "sigma": c.sigma.name, "drift": c.drift.name, "source": c.source.name, "c0": c.c0,
            },
            "cfl_safety": config.cfl_safety,
            "integrating_factor": config.integrating_factor,
            "nonlocal": config.nonlocal,
            "window": config.window(),
            "checkpoint_times": self.history.iter().map(|u| u.time).collect::<Vec<_>>(),
            "diagnostics": self.diagnostics,
        })
    }

    /// Writes `checkpoint_<k>.bin` (grid-function binary format) and `manifest.json`.
    pub fn save(&self, config: &SolveConfig, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (k, u) in self.history.iter().enumerate() {
            u.save_binary(&dir.join(format!("checkpoint_{k}.bin")))?;
        }
        let text = serde_json::to_string_pretty(&self.manifest(config)).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }

    /// max over checkpoints of ‖u(t)‖∞.
    pub fn sup_history(&self) -> f64 {
        self.history.iter().map(GridFunction::sup_norm).fold(self.u_final.sup_norm(), f64::max)
    }
}

/// Runs the scheme named in the config with its own source.
pub fn solve(config: &SolveConfig) -> Result<SolverResult> {
    match config.scheme {
        SolveScheme::DuhamelSpectral => solve_constant_coeff(config, &config.coeff.source),
        SolveScheme::Splitting => solve_variable_coeff(config),
    }
}

/// sup over t ∈ [0, T] and the grid of |f(t, x)|, sampled at 65 times for
/// time-dependent sources.
pub fn source_sup(f: &Source, grid: &TorusGrid, t_final: f64) -> f64 {
    if f.zero {
        return 0.0;
    }
    let times: Vec<f64> = if f.time_independent { vec![0.0] } else { (0..=64).map(|k| t_final * k as f64 / 64.0).collect() };
    times
        .iter()
        .map(|&t| (0..grid.len()).map(|i| f.eval(t, grid.point(i)).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// T‖f‖∞ − max over checkpoints of ‖u(t)‖∞; negative values mean the bound
/// u ≤ T‖f‖ is violated on the grid.
pub fn check_max_principle(result: &SolverResult, f: &Source, t_final: f64) -> f64 {
    t_final * source_sup(f, result.u_final.grid(), t_final) - result.sup_history()
}

fn finish(
    config: &SolveConfig,
    mut history: Vec<GridFunction>,
    mut diagnostics: Diagnostics,
    started: std::time::Instant,
) -> Result<SolverResult> {
    let u_final = history.last().cloned().ok_or_else(|| Error::config("run produced no checkpoint"))?;
    for u in history.iter_mut() {
        u.check_finite()?;
    }
    diagnostics.wall_time = started.elapsed();
    let mut result = SolverResult { u_final, history, diagnostics, scheme: config.scheme, t_final: config.t_final };
    result.diagnostics.max_principle_margin = check_max_principle(&result, &config.coeff.source, config.t_final);
    Ok(result)
}
