//! Real-space evaluation of
//!
//! ```text
//! Lu(x) = ∫ (u(x + σz) − u(x) − σz^{(α)}·∇u(x)) κ(t, x, z) ν(dz).
//! ```
//!
//! Jumps are split by size. Below ρ₀ the integrand is replaced by its
//! second-order Taylor form with the spectral gradient and Hessian. On
//! [ρ₀, 1] composite Gauss-Legendre panels integrate displaced values from the
//! upsampled interpolator. Beyond r = 1, where κ must not depend on |z|, the
//! jump integral is applied exactly in Fourier space through the far-field
//! radial function F of [`far_field_symbol`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dot, mat_vec, norm, transpose, Mat2, Vec2};
use crate::grid::{GridFunction, TorusGrid};
use crate::levy::{radial_symbol, SpectralKind, StableLevyMeasure};
use crate::operator::coefficients::CoefficientField;
use crate::quadrature::{self, GaussLegendre};
use crate::spectral::{self, Interpolator, Spectrum};

/// Discretization parameters of [`apply_nonlocal`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    /// Upper bound for the Taylor radius ρ₀; the radius actually used also
    /// shrinks with the grid bandwidth so the remainder stays below `tolerance`.
    pub small_jump_cutoff: f64,
    /// Relative bound on the Taylor remainder.
    pub tolerance: f64,
    /// Angles on S¹ for uniform Σ in d = 2 (`None`: chosen from the bandwidth).
    pub angles: Option<usize>,
    /// Upsampling factor of the interpolator (`None`: 8).
    pub upsample: Option<usize>,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self { small_jump_cutoff: 1e-3, tolerance: 1e-6, angles: None, upsample: None }
    }
}

/// Smallest Taylor radius accepted before reporting a numeric error.
const MIN_TAYLOR_RADIUS: f64 = 1e-12;

/// S(u) = ∫₀¹ (e^{iur} − 1 − iur·1_{α≥1}) r^{-1-α} dr as a power series.
fn inner_series(alpha: f64, u: f64) -> Complex64 {
    let k0 = if alpha < 1.0 { 1 } else { 2 };
    let mut acc = Complex64::new(0.0, 0.0);
    // (iu)^k / k!
    let mut pw = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        pw *= Complex64::new(0.0, u) / k as f64;
        if k < k0 {
            continue;
        }
        let term = pw / (k as f64 - alpha);
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) && k as f64 > u.abs() {
            break;
        }
    }
    acc
}

/// F(u) = ∫₁^∞ (e^{iur} − 1 − iur·1_{α>1}) r^{-1-α} dr.
pub fn far_field_symbol(alpha: f64, u: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = u.abs();
    let mut f = if a <= 12.0 {
        return radial_symbol(alpha, u) - inner_series(alpha, u);
    } else if a >= 40.0 {
        crate::levy::oscillatory_tail(u, 1.0, 1.0 + alpha)
    } else {
        // panels of half a period up to |u|R = 40, asymptotic tail beyond
        let outer = 40.0 / a;
        let rule = GaussLegendre::order16();
        let hp = PI / a;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut lo = 1.0;
        while lo < outer {
            let hi = (lo + hp).min(outer);
            acc += rule.integrate(lo, hi, |r: f64| Complex64::from_polar(r.powf(-1.0 - alpha), u * r));
            lo = hi;
        }
        acc + crate::levy::oscillatory_tail(u, outer, 1.0 + alpha)
    };
    f -= Complex64::new(1.0 / alpha, 0.0);
    if alpha > 1.0 {
        f -= Complex64::new(0.0, u / (alpha - 1.0));
    }
    f
}

/// Multiplier value at FFT bin `idx`; Nyquist bins average ±ξ per axis so that
/// real inputs stay real.
pub(crate) fn try_bin_multiplier(
    grid: &TorusGrid,
    idx: usize,
    mut m: impl FnMut(Vec2) -> Result<Complex64>,
) -> Result<Complex64> {
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
    let n = points.len() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in points {
        acc += m(p)?;
    }
    Ok(acc / n)
}

pub(crate) fn bin_multiplier(grid: &TorusGrid, idx: usize, m: impl Fn(Vec2) -> Complex64) -> Complex64 {
    try_bin_multiplier(grid, idx, |xi| Ok(m(xi))).expect("infallible multiplier")
}

/// ∫₀^{2π} f(φ) dφ for integrands with kinks at φ₀ ± π/2.
pub(crate) fn angular_integral(phi0: f64, tol: f64, f: impl FnMut(f64) -> Complex64) -> Result<Complex64> {
    let pts = [phi0 - PI / 2.0, phi0 + PI / 2.0, phi0 + 1.5 * PI];
    Ok(quadrature::adaptive(&pts, tol, 1e-11, 20_000, f)?.value)
}

/// One quadrature direction θ (and −θ when `paired`) with its weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Direction {
    pub theta: Vec2,
    pub weight: f64,
    pub paired: bool,
}

/// Direction set of Σ. Symmetric measures with symmetric κ are folded into
/// ± pairs; uniform Σ in d = 2 uses `angles` equally spaced directions.
pub(crate) fn direction_set(nu: &StableLevyMeasure, kappa_symmetric: bool, angles: usize) -> Vec<Direction> {
    let fold = kappa_symmetric && nu.spherical.is_symmetric();
    let atoms = match nu.spherical.kind() {
        SpectralKind::Uniform { .. } if nu.dim() == 2 => {
            let m = angles.max(4).next_multiple_of(2);
            nu.spherical.directions(m)
        }
        _ => nu.spherical.directions(2),
    };
    if !fold {
        return atoms
            .into_iter()
            .map(|a| Direction { theta: a.direction, weight: a.weight, paired: false })
            .collect();
    }
    let mut used = vec![false; atoms.len()];
    let mut out = Vec::new();
    for i in 0..atoms.len() {
        if used[i] {
            continue;
        }
        let a = atoms[i];
        let j = (0..atoms.len())
            .find(|&j| {
                j != i
                    && !used[j]
                    && (a.direction[0] + atoms[j].direction[0]).abs() < 1e-9
                    && (a.direction[1] + atoms[j].direction[1]).abs() < 1e-9
            })
            .expect("symmetric measure has a partner for every atom");
        used[i] = true;
        used[j] = true;
        out.push(Direction { theta: a.direction, weight: a.weight, paired: true });
    }
    out
}

/// Prepared nonlocal operator for one (coefficients, measure, grid, scheme).
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    grid: TorusGrid,
    coeff: CoefficientField,
    nu: StableLevyMeasure,
    scheme: QuadratureScheme,
}

struct NearField {
    rho0: f64,
    /// (r, Gauss weight · r^{-1-α}) on [ρ₀, 1]
    nodes: Vec<(f64, f64)>,
    dirs: Vec<Direction>,
    taylor_first: f64,
    taylor_second: f64,
}

impl NonlocalOperator {
    pub fn new(grid: TorusGrid, coeff: &CoefficientField, nu: &StableLevyMeasure, scheme: &QuadratureScheme) -> Result<Self> {
        nu.ensure_supported()?;
        if coeff.dim != nu.dim() || grid.dim() != nu.dim() {
            return Err(Error::Shape(format!(
                "dimensions differ: grid {}, coefficients {}, measure {}",
                grid.dim(),
                coeff.dim,
                nu.dim()
            )));
        }
        if nu.alpha() == 1.0 && !coeff.kappa.symmetric {
            coeff.validate(nu, 0x5eed)?;
        }
        Ok(Self { grid, coeff: coeff.clone(), nu: nu.clone(), scheme: scheme.clone() })
    }

    fn near_field(&self, bandwidth: f64) -> Result<NearField> {
        let alpha = self.nu.alpha();
        let sup_sigma = self.coeff.sigma.upper;
        let scale = (bandwidth * sup_sigma).max(1e-300);
        let paired_all = self.coeff.kappa.symmetric && self.nu.spherical.is_symmetric();
        // remainder of order k: (ρ₀|ξ||σ|)^{k−α}/(k!(k−α)) relative to the local scale
        let k = if paired_all { 4.0 } else { 3.0 };
        let fact = if paired_all { 24.0 } else { 6.0 };
        let c = (self.scheme.tolerance * fact * (k - alpha)).powf(1.0 / (k - alpha));
        let rho0 = self.scheme.small_jump_cutoff.min(c / scale);
        if rho0 < MIN_TAYLOR_RADIUS {
            return Err(Error::Numeric {
                msg: format!("Taylor radius {rho0:e} needed for tolerance {:e} is below {MIN_TAYLOR_RADIUS:e}", self.scheme.tolerance),
                achieved: (MIN_TAYLOR_RADIUS * scale).powf(k - alpha) / (fact * (k - alpha)),
            });
        }
        let width = PI / (2.0 * scale);
        let rule = GaussLegendre::order8();
        let mut nodes = Vec::new();
        let mut lo = rho0;
        while lo < 1.0 {
            let hi = (2.0 * lo).min(lo + width).min(1.0);
            for (r, w) in rule.mapped(lo, hi) {
                nodes.push((r, w * r.powf(-1.0 - alpha)));
            }
            lo = hi;
        }
        let angles = self.scheme.angles.unwrap_or_else(|| {
            let rho = scale;
            (rho + 10.0 * rho.cbrt() + 16.0).ceil() as usize
        });
        let dirs = direction_set(&self.nu, self.coeff.kappa.symmetric, angles);
        // ∫₀^ρ₀ r^{-α} dr (only used for α < 1) and ∫₀^ρ₀ r^{1-α} dr
        let taylor_first = if alpha < 1.0 { rho0.powf(1.0 - alpha) / (1.0 - alpha) } else { 0.0 };
        let taylor_second = rho0.powf(2.0 - alpha) / (2.0 - alpha);
        Ok(NearField { rho0, nodes, dirs, taylor_first, taylor_second })
    }

    /// Far-field multiplier Σ_θ w κ F(ξ·σθ) for fixed σ and angular κ profile.
    fn far_multiplier(&self, xi: Vec2, sigma: &Mat2, kappa_at: &impl Fn(Vec2) -> f64, dirs: &[Direction], exact_angles: bool) -> Result<Complex64> {
        let alpha = self.nu.alpha();
        let xs = mat_vec(&transpose(sigma), &xi);
        if xs[0] == 0.0 && xs[1] == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if exact_angles {
            if let SpectralKind::Uniform { total_mass } = self.nu.spherical.kind() {
                if self.nu.dim() == 2 {
                    let phi0 = xs[1].atan2(xs[0]);
                    let scale = norm(&xs).powf(alpha).max(1e-300);
                    let v = angular_integral(phi0, 1e-12 * scale, |phi| {
                        let th = [phi.cos(), phi.sin()];
                        far_field_symbol(alpha, dot(&xs, &th)) * kappa_at(th)
                    })?;
                    return Ok(v * (total_mass / (2.0 * PI)));
                }
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for d in dirs {
            let u = dot(&xs, &d.theta);
            acc += far_field_symbol(alpha, u) * (d.weight * kappa_at(d.theta));
            if d.paired {
                let neg = [-d.theta[0], -d.theta[1]];
                acc += far_field_symbol(alpha, -u) * (d.weight * kappa_at(neg));
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, u: &GridFunction, t: f64) -> Result<GridFunction> {
        u.check_finite()?;
        u.grid().ensure_same(&self.grid)?;
        let grid = self.grid;
        let alpha = self.nu.alpha();
        let spec = Spectrum::of(u);
        // the grid bandwidth keeps the node set independent of u, so L stays linear
        let near = self.near_field(grid.max_frequency())?;
        let factor = self.scheme.upsample.unwrap_or(8);
        let interp = Interpolator::new(u, factor);
        let grad = spectral::gradient(u);
        let hess = spectral::hessian(u);
        let kappa = &self.coeff.kappa;
        let sigma = &self.coeff.sigma;
        let frozen = self.coeff.is_frozen();
        let d = grid.dim();

        // FFT round-off below this level carries no signal and would cost O(N²)
        let noise_floor = f64::EPSILON * spec.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        // far field: one multiplier table when coefficients are frozen
        let far_frozen = if frozen {
            let s0 = sigma.eval(t, [0.0, 0.0]);
            let kap = |th: Vec2| kappa.eval(t, [0.0, 0.0], th);
            let table = (0..grid.len())
                .into_par_iter()
                .map(|i| try_bin_multiplier(&grid, i, |xi| self.far_multiplier(xi, &s0, &kap, &near.dirs, true)))
                .collect::<Result<Vec<_>>>()?;
            Some(spec.multiplied_by(&table).to_function())
        } else {
            None
        };

        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let x = grid.point(i);
                let s = sigma.eval(t, x);
                let u0 = u.values()[i];
                let g: Vec2 = [grad[0].values()[i], if d == 2 { grad[1].values()[i] } else { 0.0 }];
                let h: Mat2 = if d == 2 {
                    [
                        [hess[0][0].values()[i], hess[0][1].values()[i]],
                        [hess[1][0].values()[i], hess[1][1].values()[i]],
                    ]
                } else {
                    [[hess[0][0].values()[i], 0.0], [0.0, 0.0]]
                };
                let mut acc = 0.0;
                for dir in &near.dirs {
                    let v = mat_vec(&s, &dir.theta);
                    let vhv = dot(&v, &mat_vec(&h, &v));
                    let kap_small = kappa.eval(t, x, [0.5 * near.rho0 * dir.theta[0], 0.5 * near.rho0 * dir.theta[1]]);
                    let mut sum = 0.0;
                    if dir.paired {
                        sum += kap_small * vhv * near.taylor_second;
                        for &(r, w) in &near.nodes {
                            let k = if kappa.direction_only {
                                kap_small
                            } else {
                                kappa.eval(t, x, [r * dir.theta[0], r * dir.theta[1]])
                            };
                            let p = interp.eval([x[0] + r * v[0], x[1] + r * v[1]]);
                            let m = interp.eval([x[0] - r * v[0], x[1] - r * v[1]]);
                            sum += w * k * (p + m - 2.0 * u0);
                        }
                    } else {
                        let vg = dot(&v, &g);
                        sum += kap_small * (vg * near.taylor_first + 0.5 * vhv * near.taylor_second);
                        let comp = alpha >= 1.0;
                        for &(r, w) in &near.nodes {
                            let k = if kappa.direction_only {
                                kap_small
                            } else {
                                kappa.eval(t, x, [r * dir.theta[0], r * dir.theta[1]])
                            };
                            let p = interp.eval([x[0] + r * v[0], x[1] + r * v[1]]);
                            let lin = if comp { r * vg } else { 0.0 };
                            sum += w * k * (p - u0 - lin);
                        }
                    }
                    acc += dir.weight * sum;
                }
                let far = match &far_frozen {
                    Some(f) => f.values()[i],
                    None => {
                        let kap = |th: Vec2| kappa.eval(t, x, th);
                        let mut total = Complex64::new(0.0, 0.0);
                        for (j, c) in spec.coeffs().iter().enumerate() {
                            if c.norm() <= noise_floor {
                                continue;
                            }
                            let m = try_bin_multiplier(&grid, j, |xi| {
                                self.far_multiplier(xi, &s, &kap, &near.dirs, false)
                            })?;
                            let xi = grid.frequency(j);
                            let l = grid.half_period();
                            let phase = xi[0] * (x[0] + l) + xi[1] * (x[1] + l);
                            total += c * m * Complex64::from_polar(1.0, phase);
                        }
                        total.re / grid.len() as f64
                    }
                };
                Ok(acc + far)
            })
            .collect::<Result<Vec<f64>>>()?;
        GridFunction::new(grid, values).map_err(|e| Error::Numeric { msg: e.to_string(), achieved: f64::NAN })
    }
}

/// Lu at time t by real-space quadrature (see module docs).
pub fn apply_nonlocal(
    u: &GridFunction,
    coeff: &CoefficientField,
    nu: &StableLevyMeasure,
    t: f64,
    scheme: &QuadratureScheme,
) -> Result<GridFunction> {
    NonlocalOperator::new(*u.grid(), coeff, nu, scheme)?.apply(u, t)
}

/// Whether the factorized directional evaluation applies: Σ made of axis
/// atoms (or uniform in d = 1), σ diagonal and κ depending on z through z/|z| only.
pub fn directional_applicable(coeff: &CoefficientField, nu: &StableLevyMeasure) -> bool {
    if !(coeff.sigma.diagonal && coeff.kappa.direction_only) {
        return false;
    }
    if nu.alpha() == 1.0 && !(coeff.kappa.symmetric && nu.spherical.is_symmetric()) {
        return false;
    }
    match nu.spherical.kind() {
        SpectralKind::Uniform { .. } => nu.dim() == 1,
        SpectralKind::Atomic(atoms) => atoms.iter().all(|a| {
            let d = a.direction;
            (d[0].abs() == 1.0 && d[1] == 0.0) || (d[1].abs() == 1.0 && d[0] == 0.0)
        }),
    }
}

/// Factorized evaluation for axis directions and diagonal σ:
/// Lu(x) = Σ_a w_a κ(t, x, θ_a) |σ_kk(t, x)|^α (D_a u)(x), with D_a the
/// one-dimensional multiplier I_α(ξ·θ_a) (plus a ln|σ_kk| drift correction at α = 1).
pub fn apply_directional(u: &GridFunction, coeff: &CoefficientField, nu: &StableLevyMeasure, t: f64) -> Result<GridFunction> {
    u.check_finite()?;
    nu.ensure_supported()?;
    if !directional_applicable(coeff, nu) {
        return Err(Error::Unsupported(
            "directional evaluation needs axis atoms, diagonal σ and direction-only κ".into(),
        ));
    }
    let grid = *u.grid();
    let alpha = nu.alpha();
    let spec = Spectrum::of(u);
    let atoms = nu.spherical.directions(2);
    let grad = if alpha == 1.0 { Some(spectral::gradient(u)) } else { None };
    let mut out = vec![0.0; grid.len()];
    for atom in &atoms {
        let axis = if atom.direction[0] != 0.0 { 0 } else { 1 };
        let sign = atom.direction[axis];
        let plus = spec.multiplied(|i, _| bin_multiplier(&grid, i, |xi| radial_symbol(alpha, sign * xi[axis]))).to_function();
        let minus = spec.multiplied(|i, _| bin_multiplier(&grid, i, |xi| radial_symbol(alpha, -sign * xi[axis]))).to_function();
        for (i, o) in out.iter_mut().enumerate() {
            let x = grid.point(i);
            let skk = coeff.sigma.eval(t, x)[axis][axis];
            let a = skk.abs();
            let k = coeff.kappa.eval(t, x, atom.direction);
            let du = if skk > 0.0 { plus.values()[i] } else { minus.values()[i] };
            let mut val = du;
            if let Some(g) = &grad {
                // rescaled compensator 1_{r ≤ 1/|σ_kk|}
                val -= a.ln() * sign * skk.signum() * g[axis].values()[i];
            }
            *o += atom.weight * k * a.powf(alpha) * val;
        }
    }
    GridFunction::new(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::coefficients::Source;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, PI, n).unwrap()
    }

    #[test]
    fn far_field_symbol_matches_direct_quadrature() {
        for alpha in [0.4, 1.0, 1.6] {
            for u in [0.3, -5.0, 12.5, 25.0, -60.0] {
                let f = far_field_symbol(alpha, u);
                // direct: adaptive on [1, R] plus the same asymptotic tail
                let outer = 1.0f64.max(200.0 / u.abs());
                let mut pts = vec![1.0];
                let hp = PI / u.abs();
                let mut p = 1.0 + hp;
                while p < outer {
                    pts.push(p);
                    p += hp;
                }
                pts.push(outer);
                let mid = quadrature::adaptive(&pts, 1e-14, 1e-12, 100_000, |r: f64| {
                    Complex64::from_polar(r.powf(-1.0 - alpha), u * r)
                })
                .unwrap()
                .value;
                let mut direct = mid + crate::levy::oscillatory_tail(u, outer, 1.0 + alpha) - 1.0 / alpha;
                if alpha > 1.0 {
                    direct -= Complex64::new(0.0, u / (alpha - 1.0));
                }
                assert!((f - direct).norm() < 1e-9 * (1.0 + direct.norm()), "α={alpha} u={u}: {f} vs {direct}");
            }
        }
    }

    #[test]
    fn constant_is_annihilated() {
        let nu = StableLevyMeasure::standard(1, 1.3).unwrap();
        let c = CoefficientField::standard(1, Source::zero()).unwrap();
        let u = GridFunction::constant(grid1(64), 3.0);
        let lu = apply_nonlocal(&u, &c, &nu, 0.0, &QuadratureScheme::default()).unwrap();
        assert!(lu.sup_norm() <= 1e-8);
    }

    #[test]
    fn cosine_eigenfunction_alpha_one() {
        let nu = StableLevyMeasure::standard(1, 1.0).unwrap();
        let c = CoefficientField::standard(1, Source::zero()).unwrap();
        let g = grid1(64);
        let u = GridFunction::from_fn(g, |x| x[0].cos());
        let lu = apply_nonlocal(&u, &c, &nu, 0.0, &QuadratureScheme::default()).unwrap();
        let expect = u.scaled(-PI);
        assert!(lu.distance(&expect).unwrap() <= 1e-3 * PI, "{}", lu.distance(&expect).unwrap());
    }

    #[test]
    fn cosine_eigenfunction_alpha_three_halves() {
        let nu = StableLevyMeasure::standard(1, 1.5).unwrap();
        let c = CoefficientField::standard(1, Source::zero()).unwrap();
        let g = grid1(64);
        let u = GridFunction::from_fn(g, |x| (2.0 * x[0]).cos());
        let lu = apply_nonlocal(&u, &c, &nu, 0.0, &QuadratureScheme::default()).unwrap();
        let psi2 = crate::levy::levy_symbol(&nu, &[2.0, 0.0]).unwrap().re;
        let expect = u.scaled(psi2);
        assert!(lu.distance(&expect).unwrap() <= 1e-3 * psi2.abs());
    }

    #[test]
    fn directional_matches_quadrature_for_variable_sigma() {
        let nu = StableLevyMeasure::cylindrical(2, 1.5).unwrap();
        let c = CoefficientField::from_catalog(2, "osc(0.2)", "diag_cos(0.1)", "zero", "zero").unwrap();
        let g = TorusGrid::new(2, PI, 16).unwrap();
        let u = GridFunction::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin() + 0.5 * (x[0]).cos());
        let a = apply_directional(&u, &c, &nu, 0.0).unwrap();
        let b = apply_nonlocal(&u, &c, &nu, 0.0, &QuadratureScheme::default()).unwrap();
        assert!(a.distance(&b).unwrap() < 1e-3 * a.sup_norm(), "{}", a.distance(&b).unwrap());
    }

    #[test]
    fn directional_alpha_one_log_correction() {
        let nu = StableLevyMeasure::standard(1, 1.0).unwrap();
        let sigma = crate::operator::coefficients::catalog_sigma(1, "diag_cos(0.3)").unwrap();
        let mut kappa = crate::operator::coefficients::Kappa::new("asym", 0.5, 1.5, |_, _, z| if z[0] > 0.0 { 1.2 } else { 0.8 });
        kappa.direction_only = true;
        kappa.x_independent = true;
        kappa.time_independent = true;
        let c = CoefficientField::new(1, kappa, sigma, crate::operator::coefficients::Drift::zero(), Source::zero()).unwrap();
        assert!(!directional_applicable(&c, &nu));
        let nu15 = StableLevyMeasure::standard(1, 1.5).unwrap();
        assert!(directional_applicable(&c, &nu15));
        let u = GridFunction::from_fn(grid1(32), |x| x[0].sin() + (3.0 * x[0]).cos());
        let a = apply_directional(&u, &c, &nu15, 0.0).unwrap();
        let b = apply_nonlocal(&u, &c, &nu15, 0.0, &QuadratureScheme::default()).unwrap();
        assert!(a.distance(&b).unwrap() < 1e-4 * a.sup_norm(), "{}", a.distance(&b).unwrap());
    }
}
