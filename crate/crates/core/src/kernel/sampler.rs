//! Monte Carlo paths of the driving Lévy process L^κ_{s,t} and of
//! X_{s,t} = ∫_s^t σ(r) dL_r.
//!
//! Jumps with |z| > ε form a marked Poisson process: proposals arrive at rate
//! sup κ · ν(|z| > ε), directions follow the normalized Σ, radii the Pareto law
//! ε·U^{-1/α}, and each proposal survives with probability κ/sup κ. Jumps below
//! ε are dropped or replaced by a Gaussian with their mean and covariance.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mat_vec, norm, Mat2, Vec2, IDENTITY};
use crate::levy::{SpectralKind, StableLevyMeasure, UNIFORM_ANGLES};
use crate::operator::FrozenKappa;
use crate::quadrature;

/// Paths simulated per independently seeded chunk.
const CHUNK: usize = 2048;
/// Largest expected jump count per path.
const MAX_EXPECTED_JUMPS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallJumpMode {
    Drop,
    Gaussian,
}

impl SmallJumpMode {
    /// Gaussian replacement from α = 0.8 upward, dropping below.
    pub fn default_for(alpha: f64) -> Self {
        if alpha >= 0.8 {
            SmallJumpMode::Gaussian
        } else {
            SmallJumpMode::Drop
        }
    }

    fn code(self) -> u64 {
        match self {
            SmallJumpMode::Drop => 0,
            SmallJumpMode::Gaussian => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub jump_cutoff: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub time_steps: usize,
    pub small_jump_mode: SmallJumpMode,
}

impl SamplerConfig {
    pub fn new(jump_cutoff: f64, sample_count: usize, seed: u64, small_jump_mode: SmallJumpMode) -> Result<Self> {
        let c = Self { jump_cutoff, sample_count, seed, time_steps: 1, small_jump_mode };
        c.validate()?;
        Ok(c)
    }

    pub fn with_time_steps(mut self, steps: usize) -> Result<Self> {
        self.time_steps = steps;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.jump_cutoff > 0.0 && self.jump_cutoff < 1.0) {
            return Err(Error::validation(format!("jump cutoff must lie in (0, 1), got {}", self.jump_cutoff)));
        }
        if self.sample_count < 1000 {
            return Err(Error::validation(format!("need at least 1000 samples, got {}", self.sample_count)));
        }
        if self.time_steps == 0 {
            return Err(Error::validation("time_steps must be positive"));
        }
        Ok(())
    }
}

/// Realizations of X_{s,t} (or L_{s,t}) in ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub dim: usize,
    pub alpha: f64,
    pub s: f64,
    pub t: f64,
    pub config: SamplerConfig,
    /// Expected number of jumps above the cutoff per path.
    pub expected_jumps: f64,
    values: Vec<f64>,
}

const BATCH_MAGIC: &[u8; 8] = b"STLBATCH";
const BATCH_VERSION: u64 = 1;

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample i, padded with 0 in d = 1.
    pub fn point(&self, i: usize) -> Vec2 {
        let d = self.dim;
        if d == 1 {
            [self.values[i], 0.0]
        } else {
            [self.values[2 * i], self.values[2 * i + 1]]
        }
    }

    /// Flat coordinates, d per sample.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coordinate(&self, axis: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)[axis]).collect()
    }

    /// Rows `idx` of the batch (used for resampling).
    pub fn select(&self, idx: &[usize]) -> Self {
        let d = self.dim;
        let mut values = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            values.extend_from_slice(&self.values[i * d..(i + 1) * d]);
        }
        Self { values, config: SamplerConfig { sample_count: idx.len(), ..self.config }, ..self.clone() }
    }

    /// Header (magic, version, d, n, s, t, seed, α, ε, steps, mode, expected
    /// jumps) followed by little-endian f64 coordinates.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(BATCH_MAGIC)?;
        for v in [BATCH_VERSION, self.dim as u64, self.len() as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.s.to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        w.write_all(&self.config.seed.to_le_bytes())?;
        w.write_all(&self.alpha.to_le_bytes())?;
        w.write_all(&self.config.jump_cutoff.to_le_bytes())?;
        w.write_all(&(self.config.time_steps as u64).to_le_bytes())?;
        w.write_all(&self.config.small_jump_mode.code().to_le_bytes())?;
        w.write_all(&self.expected_jumps.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BATCH_MAGIC {
            return Err(Error::Format("not a sample batch file".into()));
        }
        let mut word = || -> Result<[u8; 8]> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(b)
        };
        let version = u64::from_le_bytes(word()?);
        if version != BATCH_VERSION {
            return Err(Error::Format(format!("unsupported sample batch version {version}")));
        }
        let dim = u64::from_le_bytes(word()?) as usize;
        let n = u64::from_le_bytes(word()?) as usize;
        if dim != 1 && dim != 2 {
            return Err(Error::Format(format!("bad dimension {dim}")));
        }
        let s = f64::from_le_bytes(word()?);
        let t = f64::from_le_bytes(word()?);
        let seed = u64::from_le_bytes(word()?);
        let alpha = f64::from_le_bytes(word()?);
        let jump_cutoff = f64::from_le_bytes(word()?);
        let time_steps = u64::from_le_bytes(word()?) as usize;
        let small_jump_mode = match u64::from_le_bytes(word()?) {
            0 => SmallJumpMode::Drop,
            1 => SmallJumpMode::Gaussian,
            m => return Err(Error::Format(format!("unknown small-jump mode {m}"))),
        };
        let expected_jumps = f64::from_le_bytes(word()?);
        let mut values = Vec::with_capacity(n * dim);
        for _ in 0..n * dim {
            values.push(f64::from_le_bytes(word()?));
        }
        let config = SamplerConfig { jump_cutoff, sample_count: n, seed, time_steps, small_jump_mode };
        Ok(Self { dim, alpha, s, t, config, expected_jumps, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_binary(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// ∫_lo^hi κ(r) r^{-p} dr with κ constant beyond r = 1 (hi may be ∞).
fn radial_moment_of(kappa: &impl Fn(f64) -> f64, p: f64, lo: f64, hi: f64, constant: bool) -> Result<f64> {
    let power = |a: f64, b: f64| -> f64 {
        if (p - 1.0).abs() < 1e-15 {
            (b / a).ln()
        } else if b.is_infinite() {
            a.powf(1.0 - p) / (p - 1.0)
        } else {
            (b.powf(1.0 - p) - a.powf(1.0 - p)) / (1.0 - p)
        }
    };
    if constant {
        if lo == 0.0 {
            return Ok(kappa(1.0) * hi.powf(1.0 - p) / (1.0 - p));
        }
        return Ok(kappa(1.0) * power(lo, hi));
    }
    let mut acc = 0.0;
    let inner_hi = hi.min(1.0);
    if lo < inner_hi {
        if lo == 0.0 {
            // v = r^{1-p} removes the singularity at 0 (p < 1)
            let q = 1.0 - p;
            let top = inner_hi.powf(q);
            acc += quadrature::adaptive(&[0.0, top], 1e-14, 1e-12, 10_000, |v: f64| kappa(v.powf(1.0 / q)))?.value / q;
        } else {
            let (a, b) = (lo.ln(), inner_hi.ln());
            acc += quadrature::adaptive(&[a, b], 1e-14, 1e-12, 10_000, |u: f64| kappa(u.exp()) * ((1.0 - p) * u).exp())?
                .value;
        }
    }
    if hi > 1.0 {
        acc += kappa(1.0) * power(lo.max(1.0), hi);
    }
    Ok(acc)
}

/// Per-step jump statistics: proposal rate, big-jump mean, small-jump mean
/// and Cholesky factor of the small-jump covariance.
#[derive(Debug, Clone, Copy, Default)]
struct StepLaw {
    rate: f64,
    big_mean: Vec2,
    small_mean: Vec2,
    small_chol: [[f64; 2]; 2],
}

fn step_law(
    nu: &StableLevyMeasure,
    kappa: &FrozenKappa,
    time: f64,
    dt: f64,
    eps: f64,
    mode: SmallJumpMode,
) -> Result<(StepLaw, f64)> {
    let alpha = nu.alpha();
    let constant = kappa.is_direction_only();
    let mut law = StepLaw::default();
    let mut cov = [[0.0; 2]; 2];
    let mut intensity = 0.0;
    let mut odd_unit = [0.0; 2];
    let mut odd_scale = 0.0;
    for atom in nu.spherical.directions(UNIFORM_ANGLES) {
        let th = atom.direction;
        let w = atom.weight * dt;
        let k = |r: f64| kappa.eval(time, [r * th[0], r * th[1]]);
        intensity += w * radial_moment_of(&k, 1.0 + alpha, eps, f64::INFINITY, constant)?;
        if alpha > 1.0 {
            let m = w * radial_moment_of(&k, alpha, eps, f64::INFINITY, constant)?;
            law.big_mean[0] += m * th[0];
            law.big_mean[1] += m * th[1];
        }
        if alpha == 1.0 {
            let m = w * radial_moment_of(&k, alpha, eps, 1.0, constant)?;
            odd_unit[0] += m * th[0];
            odd_unit[1] += m * th[1];
            odd_scale += m.abs();
        }
        if mode == SmallJumpMode::Gaussian {
            let c = w * radial_moment_of(&k, alpha - 1.0, 0.0, eps, constant)?;
            for a in 0..2 {
                for b in 0..2 {
                    cov[a][b] += c * th[a] * th[b];
                }
            }
            if alpha < 1.0 {
                let m = w * radial_moment_of(&k, alpha, 0.0, eps, constant)?;
                law.small_mean[0] += m * th[0];
                law.small_mean[1] += m * th[1];
            }
        }
    }
    if alpha == 1.0 && norm(&odd_unit) > 1e-9 * odd_scale.max(1e-300) {
        return Err(Error::Unsupported(
            "α = 1 needs κν symmetric: the first moment over ε < |z| ≤ 1 does not vanish".into(),
        ));
    }
    let l11 = cov[0][0].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { cov[1][0] / l11 } else { 0.0 };
    let l22 = (cov[1][1] - l21 * l21).max(0.0).sqrt();
    law.small_chol = [[l11, 0.0], [l21, l22]];
    let upper = kappa.upper().ok_or_else(|| {
        Error::config(format!("κ₀ `{}` needs a declared upper bound for thinning", kappa.name))
    })?;
    law.rate = upper * nu.tail_mass(eps) * dt;
    Ok((law, intensity))
}

enum Directions {
    Atoms { dirs: Vec<Vec2>, cumulative: Vec<f64> },
    Circle,
}

impl Directions {
    fn new(nu: &StableLevyMeasure) -> Self {
        match nu.spherical.kind() {
            SpectralKind::Uniform { .. } if nu.dim() == 2 => Directions::Circle,
            _ => {
                let atoms = nu.spherical.directions(2);
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                let mut acc = 0.0;
                let cumulative = atoms
                    .iter()
                    .map(|a| {
                        acc += a.weight / total;
                        acc
                    })
                    .collect();
                Directions::Atoms { dirs: atoms.iter().map(|a| a.direction).collect(), cumulative }
            }
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> Vec2 {
        match self {
            Directions::Circle => {
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                [phi.cos(), phi.sin()]
            }
            Directions::Atoms { dirs, cumulative } => {
                let u: f64 = rng.random();
                let i = cumulative.partition_point(|&c| c <= u).min(dirs.len() - 1);
                dirs[i]
            }
        }
    }
}

/// Paths and accepted jump counts.
fn simulate(
    nu: &StableLevyMeasure,
    kappa: &FrozenKappa,
    sigma_of_t: &(dyn Fn(f64) -> Mat2 + Sync),
    s: f64,
    t: f64,
    config: &SamplerConfig,
) -> Result<(SampleBatch, Vec<u32>)> {
    config.validate()?;
    nu.ensure_supported()?;
    if !(s < t) || !s.is_finite() || !t.is_finite() {
        return Err(Error::validation(format!("need s < t, got s = {s}, t = {t}")));
    }
    let alpha = nu.alpha();
    let eps = config.jump_cutoff;
    let steps = config.time_steps;
    let dt = (t - s) / steps as f64;
    let mut laws = Vec::with_capacity(steps);
    let mut expected = 0.0;
    for i in 0..steps {
        let mid = s + (i as f64 + 0.5) * dt;
        let (law, lambda) = step_law(nu, kappa, mid, dt, eps, config.small_jump_mode)?;
        expected += lambda;
        laws.push((law, sigma_of_t(mid)));
    }
    if expected > MAX_EXPECTED_JUMPS {
        return Err(Error::Budget(format!(
            "expected {expected:.3e} jumps per path above ε = {eps}; increase the cutoff"
        )));
    }
    let dirs = Directions::new(nu);
    let thin = kappa.constant_value().is_none();
    let upper = kappa.upper().unwrap_or(1.0);
    let dim = nu.dim();
    let n = config.sample_count;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<u32>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut out = Vec::with_capacity(len * dim);
            let mut counts = Vec::with_capacity(len);
            let poissons: Vec<Option<Poisson<f64>>> =
                laws.iter().map(|(l, _)| (l.rate > 0.0).then(|| Poisson::new(l.rate).expect("positive rate"))).collect();
            for _ in 0..len {
                let mut x = [0.0; 2];
                let mut accepted = 0u32;
                for (step, (law, sig)) in laws.iter().enumerate() {
                    let a = s + step as f64 * dt;
                    let mut inc = [0.0; 2];
                    let count = poissons[step].as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
                    for _ in 0..count {
                        let th = dirs.draw(&mut rng);
                        let u: f64 = 1.0 - rng.random::<f64>();
                        let r = eps * u.powf(-1.0 / alpha);
                        let z = [r * th[0], r * th[1]];
                        if thin {
                            let time = a + dt * rng.random::<f64>();
                            if rng.random::<f64>() * upper >= kappa.eval(time, z) {
                                continue;
                            }
                        }
                        inc[0] += z[0];
                        inc[1] += z[1];
                        accepted += 1;
                    }
                    inc[0] -= law.big_mean[0];
                    inc[1] -= law.big_mean[1];
                    if config.small_jump_mode == SmallJumpMode::Gaussian {
                        let g0: f64 = StandardNormal.sample(&mut rng);
                        let g1: f64 = if dim == 2 { StandardNormal.sample(&mut rng) } else { 0.0 };
                        let l = law.small_chol;
                        inc[0] += law.small_mean[0] + l[0][0] * g0;
                        inc[1] += law.small_mean[1] + l[1][0] * g0 + l[1][1] * g1;
                    }
                    let y = mat_vec(sig, &inc);
                    x[0] += y[0];
                    x[1] += y[1];
                }
                out.extend_from_slice(&x[..dim]);
                counts.push(accepted);
            }
            (out, counts)
        })
        .collect();
    let mut values = Vec::with_capacity(n * dim);
    let mut counts = Vec::with_capacity(n);
    for (v, c) in parts {
        values.extend(v);
        counts.extend(c);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric { msg: "non-finite sample".into(), achieved: f64::NAN });
    }
    Ok((SampleBatch { dim, alpha, s, t, config: *config, expected_jumps: expected, values }, counts))
}

/// Samples of X_{s,t} = Σ_i σ(r_i)·(L_{t_{i+1}} − L_{t_i}) over `config.time_steps`
/// equal subintervals with midpoints r_i.
pub fn sample_x(
    nu: &StableLevyMeasure,
    kappa: &FrozenKappa,
    sigma_of_t: &(dyn Fn(f64) -> Mat2 + Sync),
    s: f64,
    t: f64,
    config: &SamplerConfig,
) -> Result<SampleBatch> {
    Ok(simulate(nu, kappa, sigma_of_t, s, t, config)?.0)
}

/// Number of accepted jumps above the cutoff on each path of `sample_increments`.
pub fn jump_counts(
    nu: &StableLevyMeasure,
    kappa: &FrozenKappa,
    s: f64,
    t: f64,
    config: &SamplerConfig,
) -> Result<Vec<u32>> {
    Ok(simulate(nu, kappa, &|_| IDENTITY, s, t, config)?.1)
}

/// Samples of the increment L^κ_{s,t} (σ ≡ I).
pub fn sample_increments(
    nu: &StableLevyMeasure,
    kappa: &FrozenKappa,
    s: f64,
    t: f64,
    config: &SamplerConfig,
) -> Result<SampleBatch> {
    sample_x(nu, kappa, &|_| IDENTITY, s, t, config)
}
