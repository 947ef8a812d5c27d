use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Vec2, IDENTITY};
use crate::grid::{GridFunction, TorusGrid};
use crate::levy::{levy_symbol, SpectralKind};
use crate::operator::{
    apply_directional, directional_applicable, frozen_multiplier, frozen_symbol_apply, CoefficientField, Drift,
    FrozenKappa, NonlocalOperator,
};
use crate::solver::characteristics::rk4_step;
use crate::solver::{finish, Diagnostics, SolveConfig, SolverResult};
use crate::spectral::{Interpolator, Spectrum};

/// How L is evaluated inside the time loop.
enum Path {
    Off,
    /// κ and σ independent of x: exact multiplier.
    Frozen,
    Directional,
    Quadrature(Box<NonlocalOperator>),
}

impl Path {
    fn choose(config: &SolveConfig) -> Result<Self> {
        let c = &config.coeff;
        if !config.nonlocal {
            return Ok(Path::Off);
        }
        if c.kappa.x_independent && c.sigma.x_independent {
            return Ok(Path::Frozen);
        }
        if directional_applicable(c, &config.nu) {
            return Ok(Path::Directional);
        }
        Ok(Path::Quadrature(Box::new(NonlocalOperator::new(config.grid, c, &config.nu, &config.quadrature)?)))
    }

    fn apply(&self, config: &SolveConfig, u: &GridFunction, t: f64) -> Result<GridFunction> {
        let c = &config.coeff;
        match self {
            Path::Off => Ok(GridFunction::zeros(*u.grid())),
            Path::Frozen => {
                let mut kappa0 = FrozenKappa::freeze(&c.kappa, [0.0, 0.0]);
                if !(c.kappa.time_independent && c.sigma.time_independent) {
                    kappa0 = kappa0.uncached();
                }
                frozen_symbol_apply(u, &kappa0, &c.sigma.eval(t, [0.0, 0.0]), &config.nu, t)
            }
            Path::Directional => apply_directional(u, c, &config.nu, t),
            Path::Quadrature(op) => op.apply(u, t),
        }
    }
}

/// sup over directions of |ψ_ν| divided by its infimum; σ can rotate ξ
/// towards the stiffest direction unless it is diagonal or ν is isotropic.
fn anisotropy(config: &SolveConfig) -> Result<f64> {
    let nu = &config.nu;
    if config.coeff.sigma.diagonal || nu.dim() == 1 || matches!(nu.spherical.kind(), SpectralKind::Uniform { .. }) {
        return Ok(1.0);
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..64 {
        let phi = PI * k as f64 / 64.0;
        let v = levy_symbol(nu, &[phi.cos(), phi.sin()])?.norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi / lo)
}

/// Upper bound of |ψ_{κ,σ}(ξ)|/|ψ_ν(ξ)|: κ_up · σ_up^α · anisotropy.
fn symbol_ratio_bound(config: &SolveConfig) -> Result<f64> {
    let c = &config.coeff;
    Ok(c.kappa.upper * c.sigma.upper.powf(config.nu.alpha()) * anisotropy(config)?)
}

/// max |b| over the trust window, sampled at the grid points inside it.
fn drift_sup(drift: &Drift, grid: &TorusGrid, window: f64, t_final: f64) -> f64 {
    if drift.zero {
        return 0.0;
    }
    let times: &[f64] = if drift.autonomous { &[0.0] } else { &[0.0, 0.25, 0.5, 0.75, 1.0] };
    let mut sup: f64 = 0.0;
    for &s in times {
        for i in 0..grid.len() {
            let x = grid.point(i);
            if x[0].abs().max(x[1].abs()) <= window {
                let b = drift.eval(s * t_final, x);
                sup = sup.max((b[0] * b[0] + b[1] * b[1]).sqrt());
            }
        }
    }
    match drift.bound {
        Some(c) => sup.min(c),
        None => sup,
    }
}

/// Semi-Lagrangian transport step for ∂ₜu = b·∇u over [t, t + dt]:
/// u(t + dt, x) = u(t, X) with X the foot of the +b flow started at x and run
/// backwards in time (the time reversal of θ̇ = −b). Returns the new values
/// and the number of grid points inside the trust window whose foot leaves it.
fn transport(u: &GridFunction, drift: &Drift, t: f64, dt: f64, window: f64) -> (GridFunction, usize) {
    let grid = *u.grid();
    let factor = if grid.dim() == 1 { 4 } else { 2 };
    let interp = Interpolator::new(u, factor);
    let t1 = t + dt;
    let flow = |s: f64, y: Vec2| drift.eval(t1 - s, y);
    let (values, exits): (Vec<f64>, Vec<bool>) = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let foot = rk4_step(flow, 0.0, x, dt);
            let inside = |y: Vec2| y[0].abs().max(y[1].abs()) <= window;
            (interp.eval(foot), inside(x) && !inside(foot))
        })
        .unzip();
    (GridFunction::from_vec(grid, values), exits.into_iter().filter(|e| *e).count())
}

fn window_points(grid: &TorusGrid, window: f64) -> usize {
    (0..grid.len()).filter(|&i| grid.point(i).iter().all(|c| c.abs() <= window)).count()
}

fn source_on(c: &CoefficientField, grid: &TorusGrid, t: f64) -> GridFunction {
    GridFunction::from_fn(*grid, |x| c.source.eval(t, x))
}

/// Lie splitting per step of length dt (the source enters as two half steps
/// around the transport and nonlocal substeps, i.e. the trapezoid rule along
/// characteristics):
///
/// 1. u ← u + dt/2·f(t)
/// 2. transport along b (RK4 backtrace, spectral interpolation at the foot)
/// 3. u ← E(u + dt·(Lu − ψ_ref u)) with E = e^{dt ψ_ref}, or u ← u + dt·Lu
///    without the integrating factor
/// 4. u ← u + dt/2·f(t + dt)
///
/// ψ_ref = s·ψ_ν with s = κ_up σ_up^α (anisotropy-corrected), so the explicit
/// residual never amplifies and only the transport CFL constrains dt.
pub fn solve_variable_coeff(config: &SolveConfig) -> Result<SolverResult> {
    let started = std::time::Instant::now();
    config.validate()?;
    config.nu.ensure_supported()?;
    let grid = config.grid;
    let c = &config.coeff;
    let steps = config.step_count();
    let dt = config.t_final / steps as f64;
    let h = grid.spacing();
    let window = config.window();

    let b_max = drift_sup(&c.drift, &grid, window, config.t_final);
    let transport_limit = if b_max > 0.0 { config.cfl_safety * h / b_max } else { f64::INFINITY };

    let path = Path::choose(config)?;
    let base = if matches!(path, Path::Off) {
        None
    } else {
        Some(frozen_multiplier(&grid, &FrozenKappa::constant(1.0), &IDENTITY, &config.nu, 0.0)?)
    };
    let psi_max = base.as_ref().map_or(0.0, |t| t.iter().map(|p| p.norm()).fold(0.0, f64::max));
    let ratio = if base.is_some() { symbol_ratio_bound(config)? } else { 0.0 };
    let reference = if config.integrating_factor { ratio } else { 0.0 };
    // explicit part has spectral radius ≤ ρ; forward Euler needs dt·ρ ≤ 2
    let rho = (ratio - reference).max(0.0) * psi_max;
    let nonlocal_limit = if rho > 0.0 { 2.0 * config.cfl_safety / rho } else { f64::INFINITY };
    let limit = transport_limit.min(nonlocal_limit);
    if config.dt > limit * (1.0 + 1e-12) {
        return Err(Error::config(format!(
            "CFL violated: dt = {} exceeds {limit:e} (transport h/max|b| limit {transport_limit:e}, nonlocal limit {nonlocal_limit:e}); use dt ≤ {:e}",
            config.dt,
            0.99 * limit
        )));
    }

    let reference_tables = match (&base, config.integrating_factor) {
        (Some(t), true) => {
            let psi: Vec<Complex64> = t.iter().map(|p| p * reference).collect();
            let expo: Vec<Complex64> = psi.iter().map(|p| (p * dt).exp()).collect();
            Some((psi, expo))
        }
        _ => None,
    };

    let stationary = c.source.time_independent.then(|| source_on(c, &grid, 0.0));
    let source = |t: f64| match &stationary {
        Some(f) => f.clone(),
        None => source_on(c, &grid, t),
    };
    let per_checkpoint = steps / config.checkpoints;
    let mut u = GridFunction::zeros(grid);
    let mut history = Vec::with_capacity(config.checkpoints);
    let mut exits = 0usize;
    let diverged = |step: usize, u: &GridFunction| -> Result<()> {
        if u.values().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Divergence { step, msg: "non-finite values in the solution".into() })
        }
    };
    for n in 0..steps {
        let t = n as f64 * dt;
        let mut v = u;
        if !c.source.zero {
            let f = source(t);
            v.values_mut().iter_mut().zip(f.values()).for_each(|(a, b)| *a += 0.5 * dt * b);
        }
        if !c.drift.zero {
            let (moved, out) = transport(&v, &c.drift, t, dt, window);
            v = moved;
            exits += out;
            diverged(n + 1, &v)?;
        }
        u = match (&path, &reference_tables) {
            (Path::Off, _) => v,
            (_, Some((psi, expo))) => {
                let lv = path.apply(config, &v, t + 0.5 * dt)?;
                let refv = Spectrum::of(&v).multiplied_by(psi).to_function();
                let w: Vec<f64> = v
                    .values()
                    .iter()
                    .zip(lv.values())
                    .zip(refv.values())
                    .map(|((a, l), r)| a + dt * (l - r))
                    .collect();
                Spectrum::of(&GridFunction::from_vec(grid, w)).multiplied_by(expo).to_function()
            }
            (_, None) => {
                let lv = path.apply(config, &v, t + 0.5 * dt)?;
                let w = v.values().iter().zip(lv.values()).map(|(a, l)| a + dt * l).collect();
                GridFunction::from_vec(grid, w)
            }
        };
        if !c.source.zero {
            let f = source(t + dt);
            u.values_mut().iter_mut().zip(f.values()).for_each(|(a, b)| *a += 0.5 * dt * b);
        }
        diverged(n + 1, &u)?;
        if (n + 1) % per_checkpoint == 0 {
            history.push(u.clone().with_time((n + 1) as f64 * dt));
        }
    }
    let diagnostics = Diagnostics {
        steps,
        dt,
        cfl_transport: dt * b_max / h,
        cfl_nonlocal: 0.5 * dt * rho,
        window_exit_fraction: if c.drift.zero { 0.0 } else { exits as f64 / (steps * window_points(&grid, window)).max(1) as f64 },
        max_principle_margin: 0.0,
        wall_time: Default::default(),
    };
    finish(config, history, diagnostics, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::StableLevyMeasure;
    use crate::operator::catalog_source;
    use crate::solver::{solve_constant_coeff, SolveScheme};

    fn cfg(alpha: f64, n: usize, field: CoefficientField, dt: f64) -> SolveConfig {
        let grid = TorusGrid::new(1, PI, n).unwrap();
        let nu = StableLevyMeasure::standard(1, alpha).unwrap();
        SolveConfig::new(grid, nu, field, 1.0, dt, SolveScheme::Splitting).unwrap()
    }

    #[test]
    fn pure_transport_matches_characteristics() {
        let field = CoefficientField::from_catalog(1, "one", "identity", "const(1)", "cos(1)").unwrap();
        let mut c = cfg(1.5, 1024, field, 1e-3);
        c.nonlocal = false;
        let res = solve_variable_coeff(&c).unwrap();
        for u in &res.history {
            let t = u.time.unwrap();
            let exact = GridFunction::from_fn(c.grid, |x| (x[0] + t).sin() - x[0].sin());
            assert!(u.distance(&exact).unwrap() <= 1e-4, "t={t}: {}", u.distance(&exact).unwrap());
        }
    }

    #[test]
    fn zero_source_stays_zero() {
        let field = CoefficientField::from_catalog(1, "osc(0.2)", "diag_cos(0.1)", "sin", "zero").unwrap();
        let res = solve_variable_coeff(&cfg(1.2, 64, field, 0.01)).unwrap();
        assert!(res.history.iter().all(|u| u.sup_norm() == 0.0));
    }

    #[test]
    fn constant_coefficients_match_duhamel() {
        for integrating_factor in [true, false] {
            let field = CoefficientField::standard(1, catalog_source(1, "cos(1)").unwrap()).unwrap();
            let mut c = cfg(1.0, 32, field, 1e-3);
            c.integrating_factor = integrating_factor;
            let split = solve_variable_coeff(&c).unwrap();
            let exact = solve_constant_coeff(&c, &c.coeff.source).unwrap();
            let err = split.u_final.distance(&exact.u_final).unwrap();
            assert!(err <= 2.0 * c.dt, "IF={integrating_factor}: {err}");
        }
    }

    #[test]
    fn cfl_violation_suggests_dt() {
        let field = CoefficientField::from_catalog(1, "one", "identity", "const(3)", "cos(1)").unwrap();
        let err = solve_variable_coeff(&cfg(1.5, 256, field, 0.05)).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config(_)) && msg.contains("use dt ≤"), "{msg}");
        let field = CoefficientField::standard(1, catalog_source(1, "cos(1)").unwrap()).unwrap();
        let mut c = cfg(1.5, 256, field, 0.05);
        c.integrating_factor = false;
        assert!(matches!(solve_variable_coeff(&c), Err(Error::Config(_))));
    }

    #[test]
    fn mean_tracks_source_without_drift() {
        let field = CoefficientField::standard(1, catalog_source(1, "const(0.7)").unwrap()).unwrap();
        let res = solve_variable_coeff(&cfg(0.7, 64, field, 0.01)).unwrap();
        for u in &res.history {
            assert!((u.mean() - 0.7 * u.time.unwrap()).abs() < 1e-8, "{}", u.mean());
        }
    }
}
