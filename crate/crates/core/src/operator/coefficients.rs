//! Coefficient fields κ, σ, b, f and the named catalog used by configs.
//!
//! Catalog (d ∈ {1, 2}, x = (x₁, x₂), ẑ = z/|z|):
//!
//! | field | expression | formula |
//! |-------|------------|---------|
//! | κ | `one` | 1 |
//! | κ | `const(c)` | c |
//! | κ | `osc(eps)` | 1 + eps·cos(x₁ + x₂) |
//! | κ | `angular(eps)` | 1 + eps·(ẑ₁² − ẑ₂²) |
//! | κ | `shell(eps)` | 1 + eps·η(2|z|), η the dyadic bump (radially varying inside the unit ball) |
//! | σ | `identity` | I |
//! | σ | `scalar(c)` | c·I |
//! | σ | `diag(a, b)` | diag(a, b) |
//! | σ | `rotation(angle)` | rotation by `angle` |
//! | σ | `diag_cos(eps)` | diag(1 + eps·cos x₁, 1 + eps·cos x₂) |
//! | σ | `diag_abs_sin(eps, gamma)` | diag(1 + eps·|sin x₁|^gamma, 1 + eps·|sin x₂|^gamma) |
//! | σ | `time_linear(rate)` | (1 + rate·t)·I |
//! | b | `zero` | 0 |
//! | b | `const(v)` / `const(v1, v2)` | constant vector |
//! | b | `linear` | x (no wrap; unbounded) |
//! | b | `sin` | (sin x₁, sin x₂) |
//! | b | `holder(beta)` | (|sin x₁|^β, |sin x₂|^β) |
//! | f | `zero` | 0 |
//! | f | `const(c)` | c |
//! | f | `cos(k)` | cos(k x₁) in d = 1, cos(k x₁)·cos(k x₂) in d = 2 |
//! | f | `cos_time(k, w)` | cos(w t)·cos(k x₁) (times cos(k x₂) in d = 2) |
//! | f | `weierstrass(s, jmax)` | Σ_{j≤jmax} 2^{−js}(cos(2^j x₁) [+ cos(2^j x₂)]) |
//! | f | `clamp_identity(c)` | c·tanh(x₁/c) |

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{diag, norm, singular_values, Mat2, Vec2, IDENTITY};
use crate::levy::{StableLevyMeasure, UNIFORM_ANGLES};
use crate::littlewood_paley::bump;
use crate::quadrature::GaussLegendre;

type KappaFn = dyn Fn(f64, Vec2, Vec2) -> f64 + Send + Sync;
type SigmaFn = dyn Fn(f64, Vec2) -> Mat2 + Send + Sync;
type DriftFn = dyn Fn(f64, Vec2) -> Vec2 + Send + Sync;
type ScalarFn = dyn Fn(f64, Vec2) -> f64 + Send + Sync;

/// Jump intensity κ(t, x, z).
#[derive(Clone)]
pub struct Kappa {
    pub name: String,
    eval: Arc<KappaFn>,
    /// Declared bounds lower ≤ κ ≤ upper.
    pub lower: f64,
    pub upper: f64,
    pub x_independent: bool,
    pub time_independent: bool,
    /// κ depends on z only through z/|z|.
    pub direction_only: bool,
    /// κ(t, x, z) = κ(t, x, −z).
    pub symmetric: bool,
}

impl Kappa {
    /// A general κ with conservative flags. κ must not depend on |z| for |z| ≥ 1.
    pub fn new(
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        f: impl Fn(f64, Vec2, Vec2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            lower,
            upper,
            x_independent: false,
            time_independent: false,
            direction_only: false,
            symmetric: false,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            name: if c == 1.0 { "one".into() } else { format!("const({c:?})") },
            eval: Arc::new(move |_, _, _| c),
            lower: c,
            upper: c,
            x_independent: true,
            time_independent: true,
            direction_only: true,
            symmetric: true,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: Vec2, z: Vec2) -> f64 {
        (self.eval)(t, x, z)
    }

    pub fn constant_value(&self) -> Option<f64> {
        (self.x_independent && self.time_independent && self.direction_only && self.lower == self.upper)
            .then_some(self.lower)
    }
}

impl fmt::Debug for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kappa({})", self.name)
    }
}

/// Diffusion matrix σ(t, x).
#[derive(Clone)]
pub struct Sigma {
    pub name: String,
    eval: Arc<SigmaFn>,
    /// Smallest and largest singular value bounds.
    pub lower: f64,
    pub upper: f64,
    pub x_independent: bool,
    pub time_independent: bool,
    pub diagonal: bool,
    /// Lipschitz constant in x.
    pub lipschitz: f64,
}

impl Sigma {
    pub fn new(
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        lipschitz: f64,
        f: impl Fn(f64, Vec2) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            lower,
            upper,
            x_independent: false,
            time_independent: false,
            diagonal: false,
            lipschitz,
        }
    }

    pub fn constant(m: Mat2) -> Self {
        let (lo, hi) = singular_values(&m, 2);
        Self {
            name: format!("matrix({:?})", m),
            eval: Arc::new(move |_, _| m),
            lower: lo,
            upper: hi,
            x_independent: true,
            time_independent: true,
            diagonal: m[0][1] == 0.0 && m[1][0] == 0.0,
            lipschitz: 0.0,
        }
    }

    pub fn identity() -> Self {
        Self { name: "identity".into(), ..Self::constant(IDENTITY) }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: Vec2) -> Mat2 {
        (self.eval)(t, x)
    }

    pub fn constant_value(&self) -> Option<Mat2> {
        (self.x_independent && self.time_independent).then(|| self.eval(0.0, [0.0, 0.0]))
    }
}

impl fmt::Debug for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sigma({})", self.name)
    }
}

/// Drift b(t, x).
#[derive(Clone)]
pub struct Drift {
    pub name: String,
    eval: Arc<DriftFn>,
    pub zero: bool,
    /// sup |b| when b is bounded.
    pub bound: Option<f64>,
    /// c with |b(t, x)| ≤ c(1 + |x|).
    pub growth: f64,
    pub autonomous: bool,
}

impl Drift {
    pub fn new(
        name: impl Into<String>,
        bound: Option<f64>,
        growth: f64,
        f: impl Fn(f64, Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(f), zero: false, bound, growth, autonomous: false }
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            eval: Arc::new(|_, _| [0.0, 0.0]),
            zero: true,
            bound: Some(0.0),
            growth: 0.0,
            autonomous: true,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: Vec2) -> Vec2 {
        (self.eval)(t, x)
    }
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Drift({})", self.name)
    }
}

/// Source term f(t, x).
#[derive(Clone)]
pub struct Source {
    pub name: String,
    eval: Arc<ScalarFn>,
    pub zero: bool,
    pub time_independent: bool,
}

impl Source {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, Vec2) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), eval: Arc::new(f), zero: false, time_independent: false }
    }

    pub fn zero() -> Self {
        Self { name: "zero".into(), eval: Arc::new(|_, _| 0.0), zero: true, time_independent: true }
    }

    pub fn stationary(mut self) -> Self {
        self.time_independent = true;
        self
    }

    #[inline]
    pub fn eval(&self, t: f64, x: Vec2) -> f64 {
        (self.eval)(t, x)
    }

    /// The same source multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{c:?}*{}", self.name),
            eval: Arc::new(move |t, x| c * inner(t, x)),
            zero: self.zero || c == 0.0,
            time_independent: self.time_independent,
        }
    }
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Source({})", self.name)
    }
}

/// κ, σ, b, f together with the declared constants c₀, β, γ.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub dim: usize,
    pub kappa: Kappa,
    pub sigma: Sigma,
    pub drift: Drift,
    pub source: Source,
    pub c0: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CoefficientField {
    /// Assemble a field; c₀ is the smallest constant certified by the declared bounds.
    pub fn new(dim: usize, kappa: Kappa, sigma: Sigma, drift: Drift, source: Source) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::validation(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(kappa.lower > 0.0 && kappa.upper >= kappa.lower) {
            return Err(Error::validation(format!("κ bounds [{}, {}] are not positive", kappa.lower, kappa.upper)));
        }
        if !(sigma.lower > 0.0 && sigma.upper >= sigma.lower) {
            return Err(Error::validation(format!(
                "σ singular-value bounds [{}, {}] are not elliptic",
                sigma.lower, sigma.upper
            )));
        }
        let c0 = [
            kappa.upper,
            1.0 / kappa.lower,
            sigma.upper * sigma.upper,
            1.0 / (sigma.lower * sigma.lower),
            drift.bound.unwrap_or(0.0),
            1.0,
        ]
        .into_iter()
        .fold(1.0, f64::max);
        Ok(Self { dim, kappa, sigma, drift, source, c0, beta: 0.5, gamma: 1.0 })
    }

    /// Constant-coefficient field κ ≡ 1, σ ≡ I, b ≡ 0 with the given source.
    pub fn standard(dim: usize, source: Source) -> Result<Self> {
        Self::new(dim, Kappa::constant(1.0), Sigma::identity(), Drift::zero(), source)
    }

    pub fn from_catalog(dim: usize, kappa: &str, sigma: &str, drift: &str, source: &str) -> Result<Self> {
        Self::new(
            dim,
            catalog_kappa(kappa)?,
            catalog_sigma(dim, sigma)?,
            catalog_drift(dim, drift)?,
            catalog_source(dim, source)?,
        )
    }

    pub fn with_source(&self, source: Source) -> Self {
        Self { source, ..self.clone() }
    }

    pub fn with_regularity(mut self, beta: f64, gamma: f64) -> Self {
        self.beta = beta;
        self.gamma = gamma;
        self
    }

    /// Both κ and σ are independent of x and t.
    pub fn is_frozen(&self) -> bool {
        self.kappa.x_independent
            && self.kappa.time_independent
            && self.sigma.x_independent
            && self.sigma.time_independent
    }

    /// Runtime spot checks of the declared bounds and, for α = 1, of the
    /// odd-part cancellation ∫_{r≤|z|≤R} z κ ν(dz) = 0.
    pub fn validate(&self, nu: &StableLevyMeasure, seed: u64) -> Result<()> {
        const EPS: f64 = 1e-6;
        let c0 = self.c0 * (1.0 + EPS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = |rng: &mut ChaCha8Rng| -> (f64, Vec2) {
            let t = rng.random_range(0.0..4.0);
            let mut x = [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)];
            if self.dim == 1 {
                x[1] = 0.0;
            }
            (t, x)
        };
        for _ in 0..64 {
            let (t, x) = point(&mut rng);
            let phi = rng.random_range(0.0..2.0 * PI);
            let r = 10f64.powf(rng.random_range(-3.0..2.0));
            let z = if self.dim == 1 {
                [if phi < PI { r } else { -r }, 0.0]
            } else {
                [r * phi.cos(), r * phi.sin()]
            };
            let k = self.kappa.eval(t, x, z);
            if !(k >= 1.0 / c0 && k <= c0) {
                return Err(Error::validation(format!(
                    "κ({t}, {x:?}, {z:?}) = {k} outside [1/c₀, c₀] with c₀ = {}",
                    self.c0
                )));
            }
            let s = self.sigma.eval(t, x);
            let (lo, hi) = singular_values(&s, self.dim);
            if !(lo * lo >= 1.0 / c0 && hi * hi <= c0) {
                return Err(Error::validation(format!(
                    "|σξ|²/|ξ|² range [{}, {}] at ({t}, {x:?}) violates ellipticity with c₀ = {}",
                    lo * lo,
                    hi * hi,
                    self.c0
                )));
            }
        }
        if let Some(b0) = self.drift.bound {
            let b = self.drift.eval(0.0, [0.0, 0.0]);
            if norm(&b) > b0 * (1.0 + EPS) + EPS {
                return Err(Error::validation(format!("|b(0, 0)| exceeds declared bound {b0}")));
            }
        }
        if nu.alpha() == 1.0 {
            let dirs = nu.spherical.directions(UNIFORM_ANGLES);
            let rule = GaussLegendre::order16();
            for _ in 0..5 {
                let (t, x) = point(&mut rng);
                let r = 10f64.powf(rng.random_range(-3.0..0.0));
                let big = r * 10f64.powf(rng.random_range(0.1..3.0));
                let mut acc = [0.0, 0.0];
                for d in &dirs {
                    // ∫_r^R κ(t,x,ρθ) ρ^{-1} dρ in log variables
                    let radial = rule.integrate(r.ln(), big.ln(), |s: f64| {
                        let rho = s.exp();
                        self.kappa.eval(t, x, [rho * d.direction[0], rho * d.direction[1]])
                    });
                    acc[0] += d.weight * d.direction[0] * radial;
                    acc[1] += d.weight * d.direction[1] * radial;
                }
                if norm(&acc) > 1e-8 * nu.spherical.mass() * (big / r).ln() * self.kappa.upper {
                    return Err(Error::Unsupported(format!(
                        "α = 1 requires ∫_{{r≤|z|≤R}} z κ ν(dz) = 0; got {acc:?} for r = {r}, R = {big}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parsed catalog expression `name(arg, key=value, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogCall {
    pub name: String,
    pub args: Vec<(Option<String>, f64)>,
}

impl CatalogCall {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = match text.find('(') {
            None => (text, None),
            Some(i) => {
                if !text.ends_with(')') {
                    return Err(Error::config(format!("unbalanced parentheses in `{text}`")));
                }
                (&text[..i], Some(&text[i + 1..text.len() - 1]))
            }
        };
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::config(format!("bad catalog name in `{text}`")));
        }
        let mut args = Vec::new();
        if let Some(rest) = rest {
            for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (key, val) = match part.split_once('=') {
                    Some((k, v)) => (Some(k.trim().to_string()), v.trim()),
                    None => (None, part),
                };
                let v: f64 = val
                    .parse()
                    .map_err(|_| Error::config(format!("argument `{part}` of `{text}` is not a number")))?;
                args.push((key, v));
            }
        }
        Ok(Self { name: name.to_string(), args })
    }

    /// Bind arguments to parameter names: positional first, then by key.
    fn bind(&self, params: &[&str], defaults: &[Option<f64>]) -> Result<Vec<f64>> {
        let mut out: Vec<Option<f64>> = defaults.to_vec();
        let mut positional = 0;
        for (key, v) in &self.args {
            let slot = match key {
                None => {
                    let s = positional;
                    positional += 1;
                    s
                }
                Some(k) => params
                    .iter()
                    .position(|p| p == k)
                    .ok_or_else(|| Error::config(format!("`{}` has no parameter `{k}`", self.name)))?,
            };
            if slot >= params.len() {
                return Err(Error::config(format!("`{}` takes at most {} arguments", self.name, params.len())));
            }
            out[slot] = Some(*v);
        }
        out.into_iter()
            .zip(params)
            .map(|(v, p)| v.ok_or_else(|| Error::config(format!("`{}` needs parameter `{p}`", self.name))))
            .collect()
    }

    fn no_args(&self) -> Result<()> {
        if self.args.is_empty() {
            Ok(())
        } else {
            Err(Error::config(format!("`{}` takes no arguments", self.name)))
        }
    }
}

fn small_eps(name: &str, eps: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::config(format!("`{name}` needs 0 ≤ eps < 1, got {eps}")))
    }
}

pub fn catalog_kappa(expr: &str) -> Result<Kappa> {
    let call = CatalogCall::parse(expr)?;
    let mut k = match call.name.as_str() {
        "one" => {
            call.no_args()?;
            Kappa::constant(1.0)
        }
        "const" => {
            let c = call.bind(&["c"], &[None])?[0];
            if !(c > 0.0) {
                return Err(Error::config(format!("κ constant must be > 0, got {c}")));
            }
            Kappa::constant(c)
        }
        "osc" => {
            let eps = call.bind(&["eps"], &[Some(0.1)])?[0];
            small_eps("osc", eps)?;
            let mut k = Kappa::new("", 1.0 - eps, 1.0 + eps, move |_, x, _| 1.0 + eps * (x[0] + x[1]).cos());
            k.time_independent = true;
            k.direction_only = true;
            k.symmetric = true;
            k
        }
        "angular" => {
            let eps = call.bind(&["eps"], &[Some(0.1)])?[0];
            small_eps("angular", eps)?;
            let mut k = Kappa::new("", 1.0 - eps, 1.0 + eps, move |_, _, z| {
                let r2 = z[0] * z[0] + z[1] * z[1];
                1.0 + eps * (z[0] * z[0] - z[1] * z[1]) / r2
            });
            k.time_independent = true;
            k.x_independent = true;
            k.direction_only = true;
            k.symmetric = true;
            k
        }
        "shell" => {
            let eps = call.bind(&["eps"], &[Some(0.5)])?[0];
            small_eps("shell", eps)?;
            let mut k = Kappa::new("", 1.0, 1.0 + eps, move |_, _, z| 1.0 + eps * bump(2.0 * norm(&z)));
            k.time_independent = true;
            k.x_independent = true;
            k.symmetric = true;
            k
        }
        other => return Err(Error::config(format!("unknown κ catalog entry `{other}`"))),
    };
    k.name = expr.trim().to_string();
    Ok(k)
}

pub fn catalog_sigma(dim: usize, expr: &str) -> Result<Sigma> {
    let call = CatalogCall::parse(expr)?;
    let mut s = match call.name.as_str() {
        "identity" => {
            call.no_args()?;
            Sigma::identity()
        }
        "scalar" => {
            let c = call.bind(&["c"], &[None])?[0];
            if c == 0.0 {
                return Err(Error::config("σ scalar must be nonzero"));
            }
            Sigma::constant(diag(c, c))
        }
        "diag" => {
            let v = call.bind(&["a", "b"], &[None, Some(1.0)])?;
            if v[0] == 0.0 || v[1] == 0.0 {
                return Err(Error::config("σ diagonal entries must be nonzero"));
            }
            Sigma::constant(diag(v[0], if dim == 1 { v[0] } else { v[1] }))
        }
        "rotation" => {
            if dim == 1 {
                return Err(Error::config("rotation σ needs d = 2"));
            }
            let a = call.bind(&["angle"], &[None])?[0];
            Sigma::constant([[a.cos(), -a.sin()], [a.sin(), a.cos()]])
        }
        "diag_cos" => {
            let eps = call.bind(&["eps"], &[Some(0.1)])?[0];
            small_eps("diag_cos", eps)?;
            let mut s = Sigma::new("", 1.0 - eps, 1.0 + eps, eps, move |_, x| {
                diag(1.0 + eps * x[0].cos(), 1.0 + eps * x[1].cos())
            });
            s.time_independent = true;
            s.diagonal = true;
            s
        }
        "diag_abs_sin" => {
            let v = call.bind(&["eps", "gamma"], &[Some(0.1), Some(0.5)])?;
            let (eps, gamma) = (v[0], v[1]);
            small_eps("diag_abs_sin", eps)?;
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(Error::config(format!("diag_abs_sin needs 0 < gamma ≤ 1, got {gamma}")));
            }
            let lip = if gamma == 1.0 { eps } else { f64::INFINITY };
            let mut s = Sigma::new("", 1.0, 1.0 + eps, lip, move |_, x| {
                diag(1.0 + eps * x[0].sin().abs().powf(gamma), 1.0 + eps * x[1].sin().abs().powf(gamma))
            });
            s.time_independent = true;
            s.diagonal = true;
            s
        }
        "time_linear" => {
            let rate = call.bind(&["rate"], &[Some(1.0)])?[0];
            if rate < 0.0 {
                return Err(Error::config("time_linear needs rate ≥ 0"));
            }
            // bounds certified on t ∈ [0, 4]
            let mut s = Sigma::new("", 1.0, 1.0 + 4.0 * rate, 0.0, move |t, _| {
                let c = 1.0 + rate * t;
                diag(c, c)
            });
            s.x_independent = true;
            s.diagonal = true;
            s
        }
        other => return Err(Error::config(format!("unknown σ catalog entry `{other}`"))),
    };
    s.name = expr.trim().to_string();
    Ok(s)
}

pub fn catalog_drift(dim: usize, expr: &str) -> Result<Drift> {
    let call = CatalogCall::parse(expr)?;
    let two = dim == 2;
    let mut b = match call.name.as_str() {
        "zero" => {
            call.no_args()?;
            Drift::zero()
        }
        "const" => {
            let v = call.bind(&["v1", "v2"], &[None, Some(f64::NAN)])?;
            let v2 = if v[1].is_nan() { v[0] } else { v[1] };
            let vec = if two { [v[0], v2] } else { [v[0], 0.0] };
            let mut b = Drift::new("", Some(norm(&vec)), norm(&vec), move |_, _| vec);
            b.autonomous = true;
            b.zero = vec == [0.0, 0.0];
            b
        }
        "linear" => {
            call.no_args()?;
            let mut b = Drift::new("", None, 1.0, move |_, x| if two { x } else { [x[0], 0.0] });
            b.autonomous = true;
            b
        }
        "sin" => {
            call.no_args()?;
            let mut b = Drift::new("", Some((dim as f64).sqrt()), (dim as f64).sqrt(), move |_, x| {
                [x[0].sin(), if two { x[1].sin() } else { 0.0 }]
            });
            b.autonomous = true;
            b
        }
        "holder" => {
            let beta = call.bind(&["beta"], &[None])?[0];
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::config(format!("holder drift needs 0 < beta ≤ 1, got {beta}")));
            }
            let mut b = Drift::new("", Some((dim as f64).sqrt()), (dim as f64).sqrt(), move |_, x| {
                [x[0].sin().abs().powf(beta), if two { x[1].sin().abs().powf(beta) } else { 0.0 }]
            });
            b.autonomous = true;
            b
        }
        other => return Err(Error::config(format!("unknown drift catalog entry `{other}`"))),
    };
    b.name = expr.trim().to_string();
    Ok(b)
}

pub fn catalog_source(dim: usize, expr: &str) -> Result<Source> {
    let call = CatalogCall::parse(expr)?;
    let two = dim == 2;
    let mut f = match call.name.as_str() {
        "zero" => {
            call.no_args()?;
            Source::zero()
        }
        "const" => {
            let c = call.bind(&["c"], &[None])?[0];
            let mut f = Source::new("", move |_, _| c).stationary();
            f.zero = c == 0.0;
            f
        }
        "cos" => {
            let k = call.bind(&["k"], &[Some(1.0)])?[0];
            Source::new("", move |_, x| {
                let a = (k * x[0]).cos();
                if two {
                    a * (k * x[1]).cos()
                } else {
                    a
                }
            })
            .stationary()
        }
        "cos_time" => {
            let v = call.bind(&["k", "w"], &[Some(1.0), Some(1.0)])?;
            let (k, w) = (v[0], v[1]);
            Source::new("", move |t, x| {
                let a = (w * t).cos() * (k * x[0]).cos();
                if two {
                    a * (k * x[1]).cos()
                } else {
                    a
                }
            })
        }
        "weierstrass" => {
            let v = call.bind(&["s", "jmax"], &[None, Some(10.0)])?;
            let (s, jmax) = (v[0], v[1]);
            if !(s > 0.0) || jmax < 0.0 || jmax.fract() != 0.0 {
                return Err(Error::config("weierstrass needs s > 0 and integer jmax ≥ 0"));
            }
            let jmax = jmax as i32;
            Source::new("", move |_, x| {
                (0..=jmax)
                    .map(|j| {
                        let f = 2f64.powi(j);
                        let a = 2f64.powf(-s * j as f64);
                        a * ((f * x[0]).cos() + if two { (f * x[1]).cos() } else { 0.0 })
                    })
                    .sum()
            })
            .stationary()
        }
        "clamp_identity" => {
            let c = call.bind(&["c"], &[Some(1.0)])?[0];
            if !(c > 0.0) {
                return Err(Error::config("clamp_identity needs c > 0"));
            }
            Source::new("", move |_, x| c * (x[0] / c).tanh()).stationary()
        }
        other => return Err(Error::config(format!("unknown source catalog entry `{other}`"))),
    };
    f.name = expr.trim().to_string();
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_calls() {
        let c = CatalogCall::parse("diag_cos(eps=0.1)").unwrap();
        assert_eq!(c.name, "diag_cos");
        assert_eq!(c.args, vec![(Some("eps".into()), 0.1)]);
        assert_eq!(CatalogCall::parse("one").unwrap().args, vec![]);
        assert!(CatalogCall::parse("holder(beta=0.3").is_err());
        assert!(catalog_drift(1, "holder(gamma=0.3)").is_err());
        assert!(catalog_kappa("nope").is_err());
    }

    #[test]
    fn catalog_formulas() {
        let b = catalog_drift(1, "linear").unwrap();
        assert_eq!(b.eval(0.0, [2.5, 0.0]), [2.5, 0.0]);
        let s = catalog_sigma(2, "diag_cos(eps=0.1)").unwrap();
        assert_eq!(s.eval(0.0, [0.0, PI]), diag(1.1, 0.9));
        let f = catalog_source(1, "weierstrass(s=0.5, jmax=3)").unwrap();
        assert!((f.eval(0.0, [0.0, 0.0]) - (1.0 + 2f64.powf(-0.5) + 0.5 + 2f64.powf(-1.5))).abs() < 1e-14);
        let h = catalog_drift(2, "holder(0.3)").unwrap();
        assert_eq!(h.eval(0.0, [0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn validation_catches_bad_declarations() {
        let nu = StableLevyMeasure::standard(1, 1.5).unwrap();
        let field = CoefficientField::from_catalog(1, "osc(eps=0.2)", "diag_cos(eps=0.1)", "holder(0.3)", "cos(1)").unwrap();
        field.validate(&nu, 7).unwrap();
        let lying = Kappa::new("liar", 0.9, 1.1, |_, x, _| 1.0 + x[0].abs());
        let bad = CoefficientField::new(1, lying, Sigma::identity(), Drift::zero(), Source::zero()).unwrap();
        assert!(matches!(bad.validate(&nu, 7), Err(Error::Validation(_))));
    }

    #[test]
    fn odd_kappa_rejected_at_alpha_one() {
        let nu = StableLevyMeasure::standard(1, 1.0).unwrap();
        let mut odd = Kappa::new("odd", 0.5, 1.5, |_, _, z| 1.0 + 0.5 * z[0].signum());
        odd.direction_only = true;
        let field = CoefficientField::new(1, odd, Sigma::identity(), Drift::zero(), Source::zero()).unwrap();
        assert!(matches!(field.validate(&nu, 1), Err(Error::Unsupported(_))));
        let even = CoefficientField::from_catalog(1, "shell(0.5)", "identity", "zero", "zero").unwrap();
        even.validate(&nu, 1).unwrap();
    }
}
