//! α-stable Lévy measures ν(dz) = r^{-1-α} dr Σ(dθ) with a finite spherical
//! measure Σ on the unit sphere of ℝ^d, d ∈ {1, 2}.
//!
//! The Lévy symbol
//!
//! ```text
//! ψ(ξ) = ∫ (e^{iξ·z} − 1 − iξ·z^{(α)}) ν(dz),
//! z^{(α)} = z·1_{α∈(1,2)} + z·1_{|z|≤1}·1_{α=1},
//! ```
//!
//! reduces per direction θ to the radial integral `I_α(ξ·θ)` of
//! [`radial_symbol`]. Two independent evaluation routes are provided: the
//! closed form of that radial integral, and an adaptive radial quadrature
//! ([`levy_symbol_quadrature`]) that never uses homogeneity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, Vec2};
use crate::quadrature::{self, Estimate};

/// Tolerance on unit directions and symmetry matching.
const DIRECTION_TOL: f64 = 1e-12;
/// Default threshold below which a measure is called degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Angles used for the trapezoid rule on S¹ when Σ is uniform.
pub const UNIFORM_ANGLES: usize = 512;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Stability index α ∈ (0, 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StabilityIndex(f64);

impl StabilityIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::validation(format!("stability index must satisfy 0 < α < 2, got {alpha}")));
        }
        Ok(Self(alpha))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Which part of the jump is compensated.
    pub fn compensator(self) -> Compensator {
        if self.0 > 1.0 {
            Compensator::Full
        } else if self.0 == 1.0 {
            Compensator::UnitBall
        } else {
            Compensator::None
        }
    }
}

impl TryFrom<f64> for StabilityIndex {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StabilityIndex> for f64 {
    fn from(a: StabilityIndex) -> f64 {
        a.0
    }
}

/// The compensator selector z^{(α)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compensator {
    /// α < 1: no compensation.
    None,
    /// α = 1: compensate jumps with |z| ≤ 1.
    UnitBall,
    /// α > 1: compensate every jump.
    Full,
}

impl Compensator {
    /// Indicator of the compensator at jump size `r = |z|`.
    #[inline]
    pub fn active(self, r: f64) -> bool {
        match self {
            Compensator::None => false,
            Compensator::UnitBall => r <= 1.0,
            Compensator::Full => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub direction: Vec2,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralKind {
    Uniform { total_mass: f64 },
    Atomic(Vec<Atom>),
}

/// Spherical measure Σ on S^{d-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    dim: usize,
    kind: SpectralKind,
}

impl SpectralMeasure {
    pub fn uniform(dim: usize, total_mass: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(Error::validation(format!("uniform total_mass must be > 0, got {total_mass}")));
        }
        Ok(Self { dim, kind: SpectralKind::Uniform { total_mass } })
    }

    pub fn atomic(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        check_dim(dim)?;
        if atoms.is_empty() {
            return Err(Error::validation("atomic spherical measure needs at least one atom (zero mass)"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::validation(format!("atom {i}: weight must be > 0, got {}", a.weight)));
            }
            if dim == 1 && a.direction[1] != 0.0 {
                return Err(Error::validation(format!("atom {i}: second coordinate must vanish in d=1")));
            }
            let n = norm(&a.direction);
            if (n - 1.0).abs() > DIRECTION_TOL {
                return Err(Error::validation(format!("atom {i}: direction has norm {n}, expected 1")));
            }
        }
        Ok(Self { dim, kind: SpectralKind::Atomic(atoms) })
    }

    /// Surface measure on S^{d-1}, giving ν(dz) = dz/|z|^{d+α}.
    pub fn standard(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mass = if dim == 1 { 2.0 } else { 2.0 * PI };
        Self::uniform(dim, mass)
    }

    /// Unit atoms at ±e_k, the axis-concentrated (cylindrical) measure
    /// ν(dz) = Σ_k dz_k/|z_k|^{1+α} ⊗ δ_0(other coordinates).
    pub fn cylindrical(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut atoms = Vec::new();
        for k in 0..dim {
            let mut e = [0.0; 2];
            e[k] = 1.0;
            atoms.push(Atom { direction: e, weight: 1.0 });
            e[k] = -1.0;
            atoms.push(Atom { direction: e, weight: 1.0 });
        }
        Self::atomic(dim, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SpectralKind {
        &self.kind
    }

    /// Total mass Σ(S^{d-1}).
    pub fn mass(&self) -> f64 {
        match &self.kind {
            SpectralKind::Uniform { total_mass } => *total_mass,
            SpectralKind::Atomic(atoms) => atoms.iter().map(|a| a.weight).sum(),
        }
    }

    /// Σ(A) = Σ(-A).
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            SpectralKind::Uniform { .. } => true,
            SpectralKind::Atomic(atoms) => {
                let mut used = vec![false; atoms.len()];
                for (i, a) in atoms.iter().enumerate() {
                    if used[i] {
                        continue;
                    }
                    let partner = atoms.iter().enumerate().position(|(j, b)| {
                        j != i
                            && !used[j]
                            && (a.direction[0] + b.direction[0]).abs() <= DIRECTION_TOL
                            && (a.direction[1] + b.direction[1]).abs() <= DIRECTION_TOL
                            && (a.weight - b.weight).abs() <= DIRECTION_TOL * a.weight.max(1.0)
                    });
                    match partner {
                        Some(j) => {
                            used[i] = true;
                            used[j] = true;
                        }
                        None => return false,
                    }
                }
                true
            }
        }
    }

    /// Σ as a finite list of weighted directions: the atoms themselves, the two
    /// points of S⁰, or `angles` equally spaced directions on S¹.
    pub fn directions(&self, angles: usize) -> Vec<Atom> {
        match &self.kind {
            SpectralKind::Atomic(atoms) => atoms.clone(),
            SpectralKind::Uniform { total_mass } => {
                if self.dim == 1 {
                    let w = total_mass / 2.0;
                    vec![
                        Atom { direction: [1.0, 0.0], weight: w },
                        Atom { direction: [-1.0, 0.0], weight: w },
                    ]
                } else {
                    let w = total_mass / angles as f64;
                    let at = |k: usize| {
                        let phi = 2.0 * PI * k as f64 / angles as f64;
                        [phi.cos(), phi.sin()]
                    };
                    // antipodes are exact negations so odd parts cancel exactly
                    let half = if angles % 2 == 0 { angles / 2 } else { angles };
                    (0..angles)
                        .map(|k| {
                            let direction = if k < half { at(k) } else { at(k - half).map(|c| -c) };
                            Atom { direction, weight: w }
                        })
                        .collect()
                }
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::validation(format!("dimension must be 1 or 2, got {dim}")))
    }
}

/// The α-stable Lévy measure ν^{(α)}.
#[derive(Debug, Clone, PartialEq)]
pub struct StableLevyMeasure {
    pub index: StabilityIndex,
    pub spherical: SpectralMeasure,
}

impl StableLevyMeasure {
    pub fn new(alpha: f64, spherical: SpectralMeasure) -> Result<Self> {
        Ok(Self { index: StabilityIndex::new(alpha)?, spherical })
    }

    pub fn standard(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(alpha, SpectralMeasure::standard(dim)?)
    }

    pub fn cylindrical(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(alpha, SpectralMeasure::cylindrical(dim)?)
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.index.value()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.spherical.dim()
    }

    /// ν({|z| > ε}) = mass·ε^{-α}/α.
    pub fn tail_mass(&self, eps: f64) -> f64 {
        self.spherical.mass() * eps.powf(-self.alpha()) / self.alpha()
    }

    /// Rejects α = 1 with an asymmetric spherical measure.
    pub fn ensure_supported(&self) -> Result<()> {
        if self.alpha() == 1.0 && !self.spherical.is_symmetric() {
            return Err(Error::Unsupported(
                "α = 1 requires a symmetric spherical measure (odd-part cancellation)".into(),
            ));
        }
        Ok(())
    }

    pub fn to_document(&self) -> MeasureDocument {
        let (kind, atoms, total_mass) = match self.spherical.kind() {
            SpectralKind::Uniform { total_mass } => ("uniform".to_string(), Vec::new(), Some(*total_mass)),
            SpectralKind::Atomic(atoms) => (
                "atomic".to_string(),
                atoms
                    .iter()
                    .map(|a| AtomDocument {
                        theta: a.direction[..self.dim()].to_vec(),
                        weight: a.weight,
                    })
                    .collect(),
                None,
            ),
        };
        MeasureDocument { alpha: self.alpha(), dimension: self.dim(), kind, atoms, total_mass }
    }

    pub fn from_document(doc: &MeasureDocument) -> Result<Self> {
        let spherical = match doc.kind.as_str() {
            "uniform" => {
                let mass = doc
                    .total_mass
                    .ok_or_else(|| Error::validation("uniform measure needs total_mass"))?;
                SpectralMeasure::uniform(doc.dimension, mass)?
            }
            "atomic" => {
                let mut atoms = Vec::with_capacity(doc.atoms.len());
                for a in &doc.atoms {
                    if a.theta.len() != doc.dimension {
                        return Err(Error::validation(format!(
                            "atom direction has {} coordinates, dimension is {}",
                            a.theta.len(),
                            doc.dimension
                        )));
                    }
                    let mut d = [0.0; 2];
                    d[..a.theta.len()].copy_from_slice(&a.theta);
                    atoms.push(Atom { direction: d, weight: a.weight });
                }
                SpectralMeasure::atomic(doc.dimension, atoms)?
            }
            other => return Err(Error::validation(format!("unknown spherical measure kind `{other}`"))),
        };
        Self::new(doc.alpha, spherical)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("measure document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeasureDocument = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_document(&doc)
    }
}

/// Serialized form of a stable measure.
///
/// ```json
/// {"alpha": 1.5, "dimension": 2, "kind": "atomic",
///  "atoms": [{"theta": [1.0, 0.0], "weight": 1.0}], "total_mass": null}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDocument {
    pub alpha: f64,
    pub dimension: usize,
    pub kind: String,
    #[serde(default)]
    pub atoms: Vec<AtomDocument>,
    #[serde(default)]
    pub total_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDocument {
    pub theta: Vec<f64>,
    pub weight: f64,
}

/// Outcome of the non-degeneracy check.
#[derive(Debug, Clone, PartialEq)]
pub struct NonDegeneracyReport {
    /// min over probe directions θ₀ of ∫|θ₀·θ|^α Σ(dθ).
    pub lambda_min: f64,
    pub probe_count: usize,
    pub degenerate: bool,
    /// Probe direction achieving the minimum.
    pub argmin: Vec2,
}

fn projected_moment(nu: &StableLevyMeasure, dirs: &[Atom], probe: &Vec2) -> f64 {
    let alpha = nu.alpha();
    dirs.iter().map(|a| a.weight * dot(probe, &a.direction).abs().powf(alpha)).sum()
}

/// Minimum over probe directions of ∫|θ₀·θ|^α Σ(dθ).
///
/// In d = 1 the probes are {−1, +1}. In d = 2, `probe_count` equally spaced
/// angles on [0, π) are scanned and the best bracket is refined by golden
/// section search. Uniform Σ is integrated with the 512-angle trapezoid rule.
pub fn validate_spectral_measure(nu: &StableLevyMeasure, probe_count: usize) -> Result<NonDegeneracyReport> {
    // re-run constructors' checks for measures built by hand
    StabilityIndex::new(nu.alpha())?;
    match nu.spherical.kind() {
        SpectralKind::Uniform { total_mass } => {
            SpectralMeasure::uniform(nu.dim(), *total_mass)?;
        }
        SpectralKind::Atomic(atoms) => {
            SpectralMeasure::atomic(nu.dim(), atoms.clone())?;
        }
    }
    let dirs = nu.spherical.directions(UNIFORM_ANGLES);
    if nu.dim() == 1 {
        let lo = projected_moment(nu, &dirs, &[-1.0, 0.0]);
        let hi = projected_moment(nu, &dirs, &[1.0, 0.0]);
        let (lambda_min, argmin) = if hi < lo { (hi, [1.0, 0.0]) } else { (lo, [-1.0, 0.0]) };
        return Ok(NonDegeneracyReport {
            lambda_min,
            probe_count: 2,
            degenerate: lambda_min <= DEGENERACY_TOL,
            argmin,
        });
    }
    if probe_count < 8 {
        return Err(Error::validation(format!("d = 2 needs at least 8 probes, got {probe_count}")));
    }
    let probe = |phi: f64| projected_moment(nu, &dirs, &[phi.cos(), phi.sin()]);
    let step = PI / probe_count as f64;
    let (mut best_phi, mut best) = (0.0, f64::INFINITY);
    for k in 0..probe_count {
        let phi = k as f64 * step;
        let v = probe(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    // golden section on [best - step, best + step]
    let (mut a, mut b) = (best_phi - step, best_phi + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (probe(c), probe(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = probe(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = probe(d);
        }
    }
    for (phi, v) in [(c, fc), (d, fd)] {
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    Ok(NonDegeneracyReport {
        lambda_min: best,
        probe_count,
        degenerate: best <= DEGENERACY_TOL,
        argmin: [best_phi.cos(), best_phi.sin()],
    })
}

/// ∫(|z|^{γ₁} ∧ |z|^{γ₂}) ν(dz) = mass·[1/(γ₁−α) + 1/(α−γ₂)].
pub fn radial_moment(nu: &StableLevyMeasure, gamma1: f64, gamma2: f64) -> Result<f64> {
    let alpha = nu.alpha();
    if !(gamma1 > alpha) {
        return Err(Error::domain(format!("γ₁ = {gamma1} must exceed α = {alpha}: integral diverges at 0")));
    }
    if !(gamma2 < alpha && gamma2 >= 0.0) {
        return Err(Error::domain(format!("γ₂ = {gamma2} must lie in [0, α = {alpha}): integral diverges at ∞")));
    }
    let mass = nu.spherical.mass();
    if !(mass > 0.0) {
        return Err(Error::validation("spherical measure has zero mass"));
    }
    Ok(mass * (1.0 / (gamma1 - alpha) + 1.0 / (alpha - gamma2)))
}

/// Re I_α(u)/|u|^α = Γ(−α)cos(πα/2), written without the pole at α = 1.
pub fn radial_real_constant(alpha: f64) -> f64 {
    -PI / (2.0 * gamma(1.0 + alpha) * (PI * alpha / 2.0).sin())
}

/// ∫_{S¹} |cos φ|^α dφ.
pub fn circle_moment(alpha: f64) -> f64 {
    2.0 * PI.sqrt() * gamma(0.5 * (alpha + 1.0)) / gamma(0.5 * alpha + 1.0)
}

/// c_{d,α} with ψ(ξ) = −c_{d,α}|ξ|^α for the standard measure ν(dz) = dz/|z|^{d+α}.
pub fn standard_constant(dim: usize, alpha: f64) -> f64 {
    let re = radial_real_constant(alpha);
    if dim == 1 {
        -2.0 * re
    } else {
        -re * circle_moment(alpha)
    }
}

/// Closed form of I_α(u) = ∫₀^∞ (e^{iru} − 1 − iru·1_{comp}(r)) r^{-1-α} dr.
pub fn radial_symbol(alpha: f64, u: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = u.abs();
    let re = radial_real_constant(alpha) * a.powf(alpha);
    let im = if alpha == 1.0 {
        u * (1.0 - EULER_GAMMA - a.ln())
    } else {
        // −Γ(−α) sin(πα/2) = π / (2 cos(πα/2) Γ(1+α))
        u.signum() * a.powf(alpha) * PI / (2.0 * (PI * alpha / 2.0).cos() * gamma(1.0 + alpha))
    };
    Complex64::new(re, im)
}

/// Closed-form ψ(ξ).
pub fn levy_symbol(nu: &StableLevyMeasure, xi: &Vec2) -> Result<Complex64> {
    nu.ensure_supported()?;
    let alpha = nu.alpha();
    if xi[0] == 0.0 && xi[1] == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(match nu.spherical.kind() {
        SpectralKind::Uniform { total_mass } => {
            let r = norm(xi).powf(alpha) * radial_real_constant(alpha);
            let v = if nu.dim() == 1 {
                total_mass * r
            } else {
                total_mass / (2.0 * PI) * circle_moment(alpha) * r
            };
            Complex64::new(v, 0.0)
        }
        SpectralKind::Atomic(atoms) => atoms
            .iter()
            .map(|a| radial_symbol(alpha, dot(xi, &a.direction)) * a.weight)
            .sum(),
    })
}

/// Asymptotic expansion of J(u, R) = ∫_R^∞ e^{iur} r^{-p} dr for |u|R ≫ 1.
pub fn oscillatory_tail(u: f64, r0: f64, p: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(r0.powf(1.0 - p) / (p - 1.0), 0.0);
    }
    let iur = Complex64::new(0.0, u * r0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        term = term * (p + k as f64) / iur;
        let m = term.norm();
        if m > prev || m < 1e-18 * sum.norm() {
            break;
        }
        prev = m;
        sum += term;
    }
    let phase = Complex64::from_polar(1.0, u * r0);
    -phase / Complex64::new(0.0, u) * r0.powf(-p) * sum
}

/// Tolerances of the radial quadrature route.
#[derive(Debug, Clone, Copy)]
pub struct RadialQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_segments: 200_000 }
    }
}

#[inline]
fn sin_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() - x
    }
}

/// Adaptive radial quadrature of ∫₀^∞ (e^{iru} − 1 − iru·1_{comp}(r)) κ(r) r^{-1-α} dr.
///
/// `kappa` is the radial profile of the jump intensity along the direction;
/// it is taken as constant (its value at the split radius) on the Taylor
/// region near the origin and on the far tail, where the oscillatory part is
/// integrated by its asymptotic expansion.
pub fn radial_symbol_quadrature(
    alpha: f64,
    u: f64,
    kappa: impl Fn(f64) -> f64,
    opts: &RadialQuadrature,
) -> Result<Estimate<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    if u == 0.0 {
        return Ok(Estimate { value: zero, error: 0.0 });
    }
    let comp = StabilityIndex::new(alpha)?.compensator();
    let a = u.abs();
    let inner = 1e-2 * (1.0f64).min(1.0 / a);
    let outer = (1.0f64).max(64.0 / a);

    // Taylor region [0, inner]: cos(ru)−1 and sin(ru)−ru·c as power series.
    let k0 = kappa(0.5 * inner);
    let mut re = 0.0;
    let mut im = 0.0;
    let mut fact = 1.0; // k!
    for k in 1..=12usize {
        fact *= k as f64;
        let pw = k as f64 - alpha;
        let term = u.powi(k as i32) * inner.powf(pw) / (fact * pw);
        match k % 4 {
            0 => re += term,
            1 => {
                if comp == Compensator::None {
                    im += term;
                }
            }
            2 => re -= term,
            _ => im -= term,
        }
    }
    let taylor = Complex64::new(re, im) * k0;

    // Oscillatory middle [inner, outer], split at r = 1 and at half periods.
    let mut points = vec![inner];
    let mut g = inner * 10.0;
    while g < (1.0f64).min(1.0 / a) {
        points.push(g);
        g *= 10.0;
    }
    let half_period = PI / a;
    let mut k = ((points.last().copied().unwrap_or(inner)) / half_period).floor() + 1.0;
    loop {
        let p = k * half_period;
        if p >= outer {
            break;
        }
        points.push(p);
        k += 1.0;
    }
    points.push(1.0);
    points.push(outer);
    points.retain(|p| *p >= inner && *p <= outer);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|x, y| (*x - *y).abs() < 1e-15 * y.abs().max(1.0));

    let integrand = |r: f64| {
        let x = r * u;
        let s = (0.5 * x).sin();
        let c = -2.0 * s * s;
        let sn = if comp.active(r) { sin_minus_x(x) } else { x.sin() };
        Complex64::new(c, sn) * (kappa(r) * r.powf(-1.0 - alpha))
    };
    let mid = quadrature::adaptive(&points, opts.abs_tol, opts.rel_tol, opts.max_segments, integrand)?;

    // Tail [outer, ∞): κ frozen at `outer`.
    let kt = kappa(outer);
    let osc = oscillatory_tail(u, outer, 1.0 + alpha);
    let mut tail = osc - Complex64::new(outer.powf(-alpha) / alpha, 0.0);
    if comp == Compensator::Full {
        tail -= Complex64::new(0.0, u * outer.powf(1.0 - alpha) / (alpha - 1.0));
    }
    let value = taylor + mid.value + tail * kt;
    Ok(Estimate { value, error: mid.error })
}

/// ψ(ξ) by adaptive radial quadrature along every direction of Σ (uniform Σ in
/// d = 2 uses the 512-angle trapezoid rule on S¹).
pub fn levy_symbol_quadrature(nu: &StableLevyMeasure, xi: &Vec2, opts: &RadialQuadrature) -> Result<Complex64> {
    nu.ensure_supported()?;
    let alpha = nu.alpha();
    let mut acc = Complex64::new(0.0, 0.0);
    for atom in nu.spherical.directions(UNIFORM_ANGLES) {
        let u = dot(xi, &atom.direction);
        let est = radial_symbol_quadrature(alpha, u, |_| 1.0, opts)?;
        acc += est.value * atom.weight;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_1d(alpha: f64) -> StableLevyMeasure {
        StableLevyMeasure::standard(1, alpha).unwrap()
    }

    #[test]
    fn rejects_invalid_index_and_atoms() {
        assert!(StabilityIndex::new(0.0).is_err());
        assert!(StabilityIndex::new(2.0).is_err());
        assert!(SpectralMeasure::atomic(2, vec![Atom { direction: [1.0, 0.1], weight: 1.0 }]).is_err());
        assert!(SpectralMeasure::atomic(2, vec![Atom { direction: [1.0, 0.0], weight: 0.0 }]).is_err());
        assert!(SpectralMeasure::atomic(2, vec![]).is_err());
        assert!(SpectralMeasure::uniform(2, 0.0).is_err());
        assert!(SpectralMeasure::uniform(3, 1.0).is_err());
    }

    #[test]
    fn nondegeneracy_of_axis_atoms() {
        let sigma = SpectralMeasure::atomic(
            2,
            vec![
                Atom { direction: [1.0, 0.0], weight: 1.0 },
                Atom { direction: [0.0, 1.0], weight: 1.0 },
            ],
        )
        .unwrap();
        let nu = StableLevyMeasure::new(1.5, sigma).unwrap();
        let rep = validate_spectral_measure(&nu, 64).unwrap();
        // dense scan of |cos φ|^1.5 + |sin φ|^1.5
        let oracle = (0..=200_000)
            .map(|k| {
                let phi = PI * k as f64 / 200_000.0;
                phi.cos().abs().powf(1.5) + phi.sin().abs().powf(1.5)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((rep.lambda_min - oracle).abs() < 1e-9, "{} vs {}", rep.lambda_min, oracle);
        assert!(!rep.degenerate);
    }

    #[test]
    fn single_atom_is_degenerate() {
        let sigma = SpectralMeasure::atomic(2, vec![Atom { direction: [1.0, 0.0], weight: 1.0 }]).unwrap();
        let nu = StableLevyMeasure::new(1.5, sigma).unwrap();
        let rep = validate_spectral_measure(&nu, 8).unwrap();
        assert!(rep.lambda_min < 1e-20);
        assert!(rep.degenerate);
        assert!(validate_spectral_measure(&nu, 4).is_err());
    }

    #[test]
    fn one_dimensional_pair() {
        for alpha in [0.3, 1.0, 1.7] {
            let rep = validate_spectral_measure(&pair_1d(alpha), 2).unwrap();
            assert_eq!(rep.lambda_min, 2.0);
            assert_eq!(rep.probe_count, 2);
            assert!(!rep.degenerate);
        }
    }

    #[test]
    fn radial_moment_values_and_domain() {
        let nu = pair_1d(1.5);
        assert!((radial_moment(&nu, 2.0, 1.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((radial_moment(&nu, 1.6, 1.4).unwrap() - 40.0).abs() < 1e-9);
        assert!(matches!(radial_moment(&nu, 1.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(radial_moment(&nu, 2.0, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn symbol_at_zero_and_asymmetric_alpha_one() {
        let nu = StableLevyMeasure::cylindrical(2, 0.7).unwrap();
        assert_eq!(levy_symbol(&nu, &[0.0, 0.0]).unwrap(), Complex64::new(0.0, 0.0));
        let sigma = SpectralMeasure::atomic(1, vec![Atom { direction: [1.0, 0.0], weight: 1.0 }]).unwrap();
        let nu = StableLevyMeasure::new(1.0, sigma).unwrap();
        assert!(matches!(levy_symbol(&nu, &[1.0, 0.0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn closed_form_agrees_with_quadrature_per_atom() {
        let opts = RadialQuadrature::default();
        for alpha in [0.3, 0.6, 1.0, 1.3, 1.5, 1.9] {
            for u in [-7.5, -1.0, 0.02, 0.5, 3.0, 40.0] {
                let q = radial_symbol_quadrature(alpha, u, |_| 1.0, &opts).unwrap().value;
                let c = radial_symbol(alpha, u);
                let err = (q - c).norm() / c.norm();
                assert!(err < 1e-8, "α={alpha} u={u}: {q} vs {c} ({err:e})");
            }
        }
    }

    #[test]
    fn serialization_round_trip_is_bit_exact() {
        let phi: f64 = 0.123_456_789_012_345_67;
        let sigma = SpectralMeasure::atomic(
            2,
            vec![
                Atom { direction: [phi.cos(), phi.sin()], weight: 0.3 },
                Atom { direction: [-phi.sin(), phi.cos()], weight: 1.7 },
            ],
        )
        .unwrap();
        let nu = StableLevyMeasure::new(1.25, sigma).unwrap();
        let back = StableLevyMeasure::from_json(&nu.to_json()).unwrap();
        assert_eq!(nu, back);
        let uni = StableLevyMeasure::standard(2, 0.8).unwrap();
        assert_eq!(uni, StableLevyMeasure::from_json(&uni.to_json()).unwrap());
    }
}
