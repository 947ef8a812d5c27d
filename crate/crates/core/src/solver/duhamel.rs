use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::{GridFunction, TorusGrid};
use crate::operator::{frozen_symbol, FrozenKappa, Source};
use crate::quadrature::GaussLegendre;
use crate::solver::{finish, Diagnostics, SolveConfig, SolveScheme, SolverResult};
use crate::spectral::Spectrum;

/// Frequencies sharing one FFT bin (±ξ on Nyquist axes).
fn bin_points(grid: &TorusGrid, idx: usize) -> Vec<Vec2> {
    let mut points = vec![grid.frequency(idx)];
    for axis in 0..grid.dim() {
        if grid.is_nyquist(idx, axis) {
            let mut more = points.clone();
            for p in more.iter_mut() {
                p[axis] = -p[axis];
            }
            points.extend(more);
        }
    }
    points
}

/// (e^z − 1)/z, with the z → 0 limit.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-8 {
        return Complex64::new(1.0, 0.0) + z * 0.5;
    }
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    let em1 = Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin());
    em1 / z
}

struct Symbol<'a> {
    config: &'a SolveConfig,
    kappa0: FrozenKappa,
    time_dependent: bool,
}

impl Symbol<'_> {
    /// ψ(t, ·) at every bin point.
    fn table(&self, t: f64) -> Result<Vec<Vec<Complex64>>> {
        let grid = self.config.grid;
        let sigma0 = self.config.coeff.sigma.eval(t, [0.0, 0.0]);
        let table = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                bin_points(&grid, i)
                    .into_iter()
                    .map(|xi| frozen_symbol(&self.kappa0, &sigma0, &self.config.nu, t, xi))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, row) in table.iter().enumerate() {
            for p in row {
                if p.re > 1e-12 * (1.0 + p.norm()) {
                    return Err(Error::Stability(format!(
                        "Re ψ = {:e} > 0 at ξ = {:?}, t = {t}",
                        p.re,
                        grid.frequency(i)
                    )));
                }
            }
        }
        Ok(table)
    }
}

/// Composite Gauss-Legendre nodes on [0, t], with panels halving towards s = t
/// where e^{(t−s)ψ} varies on the scale 1/|ψ|.
fn time_nodes(t: f64, psi_max: f64) -> Vec<(f64, f64)> {
    let levels = ((t * psi_max).max(1.0).log2().ceil() as usize + 3).min(60);
    let rule = GaussLegendre::order16();
    let mut nodes = Vec::new();
    let mut lo = 0.0;
    for k in 1..=levels {
        let hi = t - t * 0.5f64.powi(k as i32);
        nodes.extend(rule.mapped(lo, hi));
        lo = hi;
    }
    nodes.extend(rule.mapped(lo, t));
    nodes
}

/// û(t, ξ) = ∫₀ᵗ exp(∫ₛᵗ ψ(r, ξ) dr) f̂(s, ξ) ds per discrete frequency.
pub fn solve_constant_coeff(config: &SolveConfig, f: &Source) -> Result<SolverResult> {
    let started = std::time::Instant::now();
    config.validate()?;
    let c = &config.coeff;
    if !(c.kappa.x_independent && c.sigma.x_independent && c.drift.zero) {
        return Err(Error::config(format!(
            "duhamel_spectral needs x-independent κ and σ and b ≡ 0 (κ = {}, σ = {}, b = {})",
            c.kappa.name, c.sigma.name, c.drift.name
        )));
    }
    config.nu.ensure_supported()?;
    let grid = config.grid;
    let time_dependent = !(c.kappa.time_independent && c.sigma.time_independent);
    let mut kappa0 = FrozenKappa::freeze(&c.kappa, [0.0, 0.0]);
    if time_dependent {
        kappa0 = kappa0.uncached();
    }
    let symbol = Symbol { config, kappa0, time_dependent };
    let psi_end = symbol.table(config.t_final)?;
    let psi_start = if time_dependent { Some(symbol.table(0.0)?) } else { None };
    let psi_max = psi_end
        .iter()
        .chain(psi_start.iter().flatten())
        .flat_map(|row| row.iter().map(|p| p.norm()))
        .fold(0.0, f64::max);

    let source_at = |s: f64| Spectrum::of(&GridFunction::from_fn(grid, |x| f.eval(s, x)));
    let stationary = f.time_independent.then(|| source_at(0.0));
    let mut history = Vec::with_capacity(config.checkpoints);
    for t in config.checkpoint_times() {
        let coeffs: Vec<Complex64> = if f.zero {
            vec![Complex64::new(0.0, 0.0); grid.len()]
        } else if let (false, Some(fhat)) = (symbol.time_dependent, &stationary) {
            // (e^{tψ} − 1)/ψ · f̂, with the ψ → 0 limit t·f̂
            fhat.coeffs()
                .iter()
                .zip(&psi_end)
                .map(|(c, row)| {
                    let m: Complex64 = row.iter().map(|p| phi1(p * t) * t).sum::<Complex64>() / row.len() as f64;
                    c * m
                })
                .collect()
        } else {
            let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
            let inner = GaussLegendre::order8();
            for (s, w) in time_nodes(t, psi_max) {
                let fhat = match &stationary {
                    Some(fh) => fh.clone(),
                    None => source_at(s),
                };
                // ∫ₛᵗ ψ(r) dr per bin point
                let integral: Vec<Vec<Complex64>> = if symbol.time_dependent {
                    let mut sum: Option<Vec<Vec<Complex64>>> = None;
                    for (r, wr) in inner.mapped(s, t) {
                        let tab = symbol.table(r)?;
                        sum = Some(match sum {
                            None => tab.into_iter().map(|row| row.into_iter().map(|p| p * wr).collect()).collect(),
                            Some(mut a) => {
                                for (ra, rt) in a.iter_mut().zip(tab) {
                                    for (pa, pt) in ra.iter_mut().zip(rt) {
                                        *pa += pt * wr;
                                    }
                                }
                                a
                            }
                        });
                    }
                    sum.unwrap_or_else(|| psi_end.iter().map(|row| vec![Complex64::new(0.0, 0.0); row.len()]).collect())
                } else {
                    psi_end.iter().map(|row| row.iter().map(|p| p * (t - s)).collect()).collect()
                };
                for ((a, c), row) in acc.iter_mut().zip(fhat.coeffs()).zip(&integral) {
                    let e: Complex64 = row.iter().map(|z| z.exp()).sum::<Complex64>() / row.len() as f64;
                    *a += c * e * w;
                }
            }
            acc
        };
        history.push(Spectrum::from_coeffs(grid, coeffs).to_function().with_time(t));
    }
    let diagnostics = Diagnostics {
        steps: 0,
        dt: 0.0,
        cfl_transport: 0.0,
        cfl_nonlocal: 0.0,
        window_exit_fraction: 0.0,
        max_principle_margin: 0.0,
        wall_time: Default::default(),
    };
    let cfg = SolveConfig { scheme: SolveScheme::DuhamelSpectral, coeff: c.with_source(f.clone()), ..config.clone() };
    finish(&cfg, history, diagnostics, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::StableLevyMeasure;
    use crate::operator::{catalog_source, CoefficientField};
    use std::f64::consts::PI;

    fn config(alpha: f64, n: usize, source: &str) -> SolveConfig {
        let grid = TorusGrid::new(1, PI, n).unwrap();
        let nu = StableLevyMeasure::standard(1, alpha).unwrap();
        let coeff = CoefficientField::standard(1, catalog_source(1, source).unwrap()).unwrap();
        SolveConfig::new(grid, nu, coeff, 1.0, 0.01, SolveScheme::DuhamelSpectral).unwrap()
    }

    #[test]
    fn cosine_forcing_closed_form() {
        let cfg = config(1.0, 64, "cos(1)");
        let res = solve_constant_coeff(&cfg, &cfg.coeff.source).unwrap();
        let amp = (1.0 - (-PI).exp()) / PI;
        let expect = GridFunction::from_fn(cfg.grid, |x| amp * x[0].cos());
        assert!(res.u_final.distance(&expect).unwrap() <= 1e-6 * amp);
        assert!((amp - 0.30455).abs() < 5e-6);
        assert_eq!(res.history.len(), 4);
        assert!(res.diagnostics.max_principle_margin > 0.0);
    }

    #[test]
    fn zero_source_gives_zero() {
        let cfg = config(1.5, 32, "zero");
        let res = solve_constant_coeff(&cfg, &cfg.coeff.source).unwrap();
        assert_eq!(res.u_final.sup_norm(), 0.0);
        assert_eq!(res.diagnostics.max_principle_margin, 0.0);
    }

    #[test]
    fn mean_grows_linearly() {
        let cfg = config(0.7, 32, "const(0.4)");
        let res = solve_constant_coeff(&cfg, &cfg.coeff.source).unwrap();
        for u in &res.history {
            assert!((u.mean() - 0.4 * u.time.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn time_dependent_source_uses_quadrature() {
        // f = cos(w t) cos x with ψ = −π: u = ∫₀¹ e^{−π(1−s)} cos(ws) ds · cos x
        let cfg = config(1.0, 32, "cos_time(1, 3)");
        let res = solve_constant_coeff(&cfg, &cfg.coeff.source).unwrap();
        let (a, w) = (PI, 3.0f64);
        // ∫₀¹ e^{−a(1−s)} cos(ws) ds = (a cos w + w sin w − a e^{−a}) / (a² + w²)
        let amp = (a * w.cos() + w * w.sin() - a * (-a).exp()) / (a * a + w * w);
        let expect = GridFunction::from_fn(cfg.grid, |x| amp * x[0].cos());
        assert!(res.u_final.distance(&expect).unwrap() < 1e-10);
    }

    #[test]
    fn time_dependent_sigma() {
        // σ(t) = (1 + t)·I, α = 1: ∫ₛ¹ψ = −π ∫ₛ¹(1 + r) dr at ξ = 1
        let grid = TorusGrid::new(1, PI, 16).unwrap();
        let nu = StableLevyMeasure::standard(1, 1.0).unwrap();
        let coeff = CoefficientField::from_catalog(1, "one", "time_linear(1)", "zero", "cos(1)").unwrap();
        let cfg = SolveConfig::new(grid, nu, coeff, 1.0, 0.01, SolveScheme::DuhamelSpectral).unwrap();
        let res = solve_constant_coeff(&cfg, &cfg.coeff.source).unwrap();
        let rule = GaussLegendre::order16();
        let amp: f64 = (0..64)
            .map(|k| {
                rule.integrate(k as f64 / 64.0, (k + 1) as f64 / 64.0, |s: f64| {
                    (-PI * ((1.0 - s) + 0.5 * (1.0 - s * s))).exp()
                })
            })
            .sum();
        let expect = GridFunction::from_fn(grid, |x| amp * x[0].cos());
        assert!(res.u_final.distance(&expect).unwrap() < 1e-9, "{}", res.u_final.distance(&expect).unwrap());
    }

    #[test]
    fn drift_is_rejected() {
        let grid = TorusGrid::new(1, PI, 16).unwrap();
        let nu = StableLevyMeasure::standard(1, 1.5).unwrap();
        let coeff = CoefficientField::from_catalog(1, "one", "identity", "const(1)", "cos(1)").unwrap();
        let cfg = SolveConfig::new(grid, nu, coeff, 1.0, 0.01, SolveScheme::DuhamelSpectral).unwrap();
        assert!(matches!(solve_constant_coeff(&cfg, &cfg.coeff.source), Err(Error::Config(_))));
    }
}
