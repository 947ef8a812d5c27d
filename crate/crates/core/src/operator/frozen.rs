//! Frozen-coefficient operator: κ₀(t, z) and σ₀ constant in x, applied as the
//! Fourier multiplier
//!
//! ```text
//! ψ₀(ξ) = ∫ (e^{iξ·σ₀z} − 1 − iξ·σ₀z^{(α)}) κ₀(t, z) ν(dz).
//! ```
//!
//! Multiplier tables are cached per (κ₀ name, σ₀, ν, grid, t) and shared
//! between threads.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dot, mat_vec, norm, transpose, Mat2, Vec2};
use crate::grid::{GridFunction, TorusGrid};
use crate::levy::{
    levy_symbol, radial_symbol, radial_symbol_quadrature, RadialQuadrature, SpectralKind, StableLevyMeasure,
    UNIFORM_ANGLES,
};
use crate::operator::coefficients::Kappa;
use crate::operator::nonlocal::{angular_integral, try_bin_multiplier};
use crate::spectral::Spectrum;

type FrozenFn = dyn Fn(f64, Vec2) -> f64 + Send + Sync;

/// Jump intensity κ₀(t, z) of a frozen operator.
#[derive(Clone)]
pub struct FrozenKappa {
    /// Identifies κ₀ in the multiplier cache; an empty name disables caching.
    pub name: String,
    eval: Arc<FrozenFn>,
    constant: Option<f64>,
    upper: Option<f64>,
    direction_only: bool,
    time_independent: bool,
}

impl FrozenKappa {
    pub fn constant(c: f64) -> Self {
        Self {
            name: format!("const({c:?})"),
            eval: Arc::new(move |_, _| c),
            constant: Some(c),
            upper: Some(c),
            direction_only: true,
            time_independent: true,
        }
    }

    /// κ₀ depending on z through z/|z| only.
    pub fn directional(name: impl Into<String>, f: impl Fn(f64, Vec2) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            constant: None,
            upper: None,
            direction_only: true,
            time_independent: false,
        }
    }

    /// General κ₀(t, z); must not depend on |z| for |z| ≥ 1.
    pub fn new(name: impl Into<String>, f: impl Fn(f64, Vec2) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            constant: None,
            upper: None,
            direction_only: false,
            time_independent: false,
        }
    }

    pub fn time_independent(mut self) -> Self {
        self.time_independent = true;
        self
    }

    /// Tables built for this κ₀ are not cached (time-dependent runs).
    pub fn uncached(mut self) -> Self {
        self.name.clear();
        self
    }

    /// Declares sup κ₀, needed for Poisson thinning in the samplers.
    pub fn with_upper(mut self, bound: f64) -> Self {
        self.upper = Some(bound);
        self
    }

    pub fn upper(&self) -> Option<f64> {
        self.upper
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    pub fn is_direction_only(&self) -> bool {
        self.direction_only
    }

    /// κ frozen at the point x.
    pub fn freeze(kappa: &Kappa, x: Vec2) -> Self {
        if let Some(c) = kappa.constant_value() {
            return Self::constant(c);
        }
        let k = kappa.clone();
        Self {
            name: if kappa.x_independent { kappa.name.clone() } else { format!("{}@{:?}", kappa.name, x) },
            eval: Arc::new(move |t, z| k.eval(t, x, z)),
            constant: None,
            upper: Some(kappa.upper),
            direction_only: kappa.direction_only,
            time_independent: kappa.time_independent,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, z: Vec2) -> f64 {
        (self.eval)(t, z)
    }
}

impl fmt::Debug for FrozenKappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrozenKappa({})", self.name)
    }
}

/// ψ₀(ξ) for one frequency.
pub fn frozen_symbol(kappa0: &FrozenKappa, sigma0: &Mat2, nu: &StableLevyMeasure, t: f64, xi: Vec2) -> Result<Complex64> {
    nu.ensure_supported()?;
    let xs = mat_vec(&transpose(sigma0), &xi);
    if let Some(c) = kappa0.constant {
        return Ok(levy_symbol(nu, &xs)? * c);
    }
    let alpha = nu.alpha();
    if xs[0] == 0.0 && xs[1] == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if alpha == 1.0 && !nu.spherical.is_symmetric() {
        return Err(Error::Unsupported("α = 1 needs a symmetric spectral measure".into()));
    }
    let uniform_plane = matches!(nu.spherical.kind(), SpectralKind::Uniform { .. }) && nu.dim() == 2;
    if kappa0.direction_only {
        if let (true, SpectralKind::Uniform { total_mass }) = (uniform_plane, nu.spherical.kind()) {
            let phi0 = xs[1].atan2(xs[0]);
            let scale = norm(&xs).powf(alpha);
            let v = angular_integral(phi0, 1e-13 * scale, |phi| {
                let th = [phi.cos(), phi.sin()];
                radial_symbol(alpha, dot(&xs, &th)) * kappa0.eval(t, th)
            })?;
            return Ok(v * (total_mass / (2.0 * PI)));
        }
        return Ok(nu
            .spherical
            .directions(2)
            .into_iter()
            .map(|a| radial_symbol(alpha, dot(&xs, &a.direction)) * (a.weight * kappa0.eval(t, a.direction)))
            .sum());
    }
    let opts = RadialQuadrature::default();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in nu.spherical.directions(UNIFORM_ANGLES) {
        let th = a.direction;
        let est = radial_symbol_quadrature(alpha, dot(&xs, &th), |r| kappa0.eval(t, [r * th[0], r * th[1]]), &opts)?;
        acc += est.value * a.weight;
    }
    Ok(acc)
}

type Table = Arc<Vec<Complex64>>;

fn cache() -> &'static RwLock<HashMap<String, Table>> {
    static CACHE: OnceLock<RwLock<HashMap<String, Table>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// ψ₀ on every FFT bin of `grid`, Nyquist bins averaged over ±ξ.
pub fn frozen_multiplier(
    grid: &TorusGrid,
    kappa0: &FrozenKappa,
    sigma0: &Mat2,
    nu: &StableLevyMeasure,
    t: f64,
) -> Result<Table> {
    let key = (!kappa0.name.is_empty()).then(|| {
        let time = if kappa0.time_independent { String::new() } else { format!("{t:?}") };
        format!(
            "{}|{}|{:?}|{}|{}|{:?}|{}",
            kappa0.name,
            time,
            sigma0,
            nu.to_json(),
            grid.n(),
            grid.half_period(),
            grid.dim()
        )
    });
    if let Some(k) = &key {
        if let Some(table) = cache().read().expect("cache lock").get(k) {
            return Ok(table.clone());
        }
    }
    let table = (0..grid.len())
        .into_par_iter()
        .map(|i| try_bin_multiplier(grid, i, |xi| frozen_symbol(kappa0, sigma0, nu, t, xi)))
        .collect::<Result<Vec<_>>>()?;
    let table = Arc::new(table);
    if let Some(k) = key {
        cache().write().expect("cache lock").entry(k).or_insert_with(|| table.clone());
    }
    Ok(table)
}

/// Applies the frozen operator to u spectrally.
pub fn frozen_symbol_apply(
    u: &GridFunction,
    kappa0: &FrozenKappa,
    sigma0: &Mat2,
    nu: &StableLevyMeasure,
    t: f64,
) -> Result<GridFunction> {
    u.check_finite()?;
    if nu.dim() != u.grid().dim() {
        return Err(Error::Shape(format!("measure dimension {} on a {}-d grid", nu.dim(), u.grid().dim())));
    }
    let table = frozen_multiplier(u.grid(), kappa0, sigma0, nu, t)?;
    Ok(Spectrum::of(u).multiplied_by(&table).to_function())
}
