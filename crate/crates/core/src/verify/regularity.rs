//! Randomized checks of three elementary Hölder-space facts on 1D grids:
//!
//! * HB: |f(x) − f(y)| ≤ 2[f]_s·|x − y| whenever |x − y| > 1, where [f]_s is
//!   the Hölder seminorm restricted to |h| ≤ 1;
//! * CutF: ‖(f − f(x₀))χ(· − x₀)‖_{C^s} ≤ C(s)·[f]_s with C(s) = 2 + 2^{−s}[χ]_{C^s};
//! * FuHe: ‖f(· + φ(·))‖_{C^β} ≤ 2(1 + [φ]_{C^γ}^{β/γ})‖f‖_{C^{β/γ}}.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::littlewood_paley::{holder_norm, local_holder_seminorm_with, ShiftOptions};
use crate::operator::make_cutoff;
use crate::verify::report::{Criterion, ExperimentReport};

/// Relative slack for floating-point rounding in every comparison.
pub const ROUNDING: f64 = 1e-12;
/// Half-period and resolution of the non-periodic HB/CutF grid.
const LOCAL_HALF_PERIOD: f64 = 8.0;
const LOCAL_POINTS: usize = 1024;
/// FuHe runs on the 2π-torus; ‖f‖ is measured on a grid `FINE` times finer.
const TORUS_POINTS: usize = 1024;
const FINE: usize = 4;

/// Catalog of 1D test functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Constant { c: f64 },
    Harmonic { amplitude: f64, k: f64, phase: f64 },
    /// Σ_{j ≤ jmax} 2^{−sj} cos(2^j x + phase_j), of exact order s.
    Weierstrass { amplitude: f64, s: f64, phases: Vec<f64> },
    /// c·tanh(x/c), the identity clamped smoothly at ±c.
    Clamp { c: f64 },
    Identity,
    /// amplitude·|sin x|^γ.
    AbsSin { amplitude: f64, gamma: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant { c } => *c,
            TestFunction::Harmonic { amplitude, k, phase } => amplitude * (k * x + phase).cos(),
            TestFunction::Weierstrass { amplitude, s, phases } => {
                amplitude
                    * phases
                        .iter()
                        .enumerate()
                        .map(|(j, p)| 2f64.powf(-s * j as f64) * (2f64.powi(j as i32) * x + p).cos())
                        .sum::<f64>()
            }
            TestFunction::Clamp { c } => c * (x / c).tanh(),
            TestFunction::Identity => x,
            TestFunction::AbsSin { amplitude, gamma } => amplitude * x.sin().abs().powf(*gamma),
        }
    }

    pub fn sample(&self, grid: TorusGrid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x[0]))
    }

    /// A random member of the catalog; `periodic` keeps to 2π-periodic entries.
    fn random(rng: &mut ChaCha8Rng, periodic: bool) -> Self {
        let kinds = if periodic { 3 } else { 5 };
        let phase = |rng: &mut ChaCha8Rng| rng.random_range(0.0..2.0 * PI);
        match rng.random_range(0..kinds) {
            0 => TestFunction::Constant { c: rng.random_range(-2.0..2.0) },
            1 => TestFunction::Harmonic {
                amplitude: rng.random_range(0.1..2.0),
                k: rng.random_range(1..=8) as f64,
                phase: phase(rng),
            },
            2 => {
                let jmax = rng.random_range(1..=6);
                TestFunction::Weierstrass {
                    amplitude: rng.random_range(0.1..2.0),
                    s: rng.random_range(0.1..0.95),
                    phases: (0..=jmax).map(|_| phase(rng)).collect(),
                }
            }
            3 => TestFunction::Clamp { c: rng.random_range(0.2..4.0) },
            _ => TestFunction::Identity,
        }
    }

    /// A random periodic perturbation φ, including φ ≡ 0.
    fn random_perturbation(rng: &mut ChaCha8Rng, gamma: f64) -> Self {
        let amplitude = rng.random_range(0.05..1.0);
        match rng.random_range(0..4) {
            0 => TestFunction::Constant { c: 0.0 },
            1 => TestFunction::Harmonic { amplitude, k: rng.random_range(1..=4) as f64, phase: 0.0 },
            2 => TestFunction::AbsSin { amplitude, gamma },
            _ => {
                let jmax = rng.random_range(1..=5);
                TestFunction::Weierstrass {
                    amplitude,
                    s: gamma,
                    phases: (0..=jmax).map(|_| rng.random_range(0.0..2.0 * PI)).collect(),
                }
            }
        }
    }
}

/// [f]_s over |h| ≤ 1, without wrapping pairs.
fn local_seminorm(f: &GridFunction, s: f64) -> Result<f64> {
    local_holder_seminorm_with(f, s, &ShiftOptions { periodic: false, ..Default::default() })
}

/// Global Hölder seminorm sup |δ_h f|/|h|^s over every grid shift.
fn global_seminorm(f: &GridFunction, s: f64) -> Result<f64> {
    Ok(holder_norm(f, s)? - f.sup_norm())
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + ROUNDING)
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseOutcome {
    pub lemma: &'static str,
    pub case: usize,
    pub function: TestFunction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<TestFunction>,
    pub exponent: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// CutF constant C(s) for this case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    pub holds: bool,
}

/// max over grid pairs |x − y| > 1 of |f(x) − f(y)| / (2[f]_s|x − y|), returned as (lhs, rhs)
/// at the worst pair.
pub fn two_point_check(f: &GridFunction, s: f64) -> Result<(f64, f64)> {
    let seminorm = local_seminorm(f, s)?;
    let grid = f.grid();
    let h = grid.spacing();
    let v = f.values();
    let n = v.len();
    let first = (1.0 / h).floor() as usize + 1;
    let worst = (first..n)
        .into_par_iter()
        .map(|m| {
            let d = (0..n - m).map(|i| (v[i + m] - v[i]).abs()).fold(0.0, f64::max);
            let dist = m as f64 * h;
            (d / dist, d, dist)
        })
        .reduce(|| (0.0, 0.0, 1.0), |a, b| if b.0 > a.0 { b } else { a });
    Ok((worst.1, 2.0 * seminorm * worst.2))
}

/// (‖(f − f(x₀))χ(· − x₀)‖_{C^s}, C(s)·[f]_s, C(s)).
pub fn cutoff_check(f: &GridFunction, x0_index: usize, s: f64) -> Result<(f64, f64, f64)> {
    let grid = *f.grid();
    let x0 = grid.point(x0_index);
    if grid.half_period() - x0[0].abs() < 2.0 {
        return Err(Error::config("the cutoff centre must lie at least 2 from the edge"));
    }
    let chi = make_cutoff(&grid, x0)?;
    let f0 = f.values()[x0_index];
    let g = f.map(|v| v - f0).mul(chi.samples())?;
    let constant = 2.0 + 2f64.powf(-s) * global_seminorm(chi.samples(), s)?;
    Ok((holder_norm(&g, s)?, constant * local_seminorm(f, s)?, constant))
}

/// (‖f(· + φ(·))‖_{C^β}, 2(1 + [φ]_γ^{β/γ})‖f‖_{C^{β/γ}}).
pub fn composition_check(f: &TestFunction, phi: &TestFunction, beta: f64, gamma: f64) -> Result<(f64, f64)> {
    let coarse = TorusGrid::new(1, PI, TORUS_POINTS)?;
    let fine = TorusGrid::new(1, PI, TORUS_POINTS * FINE)?;
    let g = GridFunction::from_fn(coarse, |x| f.eval(x[0] + phi.eval(x[0])));
    let phi_g = phi.sample(coarse);
    let phi_semi = if gamma < 1.0 {
        global_seminorm(&phi_g, gamma)?
    } else {
        // Lipschitz constant from adjacent differences, wrap pair included
        let v = phi_g.values();
        let wrap = (v[0] - v[v.len() - 1]).abs();
        v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(wrap, f64::max) / coarse.spacing()
    };
    let f_norm = holder_norm(&f.sample(fine), beta / gamma)?;
    Ok((holder_norm(&g, beta)?, 2.0 * (1.0 + phi_semi.powf(beta / gamma)) * f_norm))
}

fn case_rng(seed: u64, case: usize, lemma: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lemma << 32 | case as u64);
    rng
}

fn run_case(seed: u64, case: usize, local: TorusGrid) -> Result<[CaseOutcome; 3]> {
    // HB
    let mut rng = case_rng(seed, case, 1);
    let (function, s) = if case == 0 {
        (TestFunction::Identity, 0.5)
    } else {
        (TestFunction::random(&mut rng, false), rng.random_range(0.1..0.95))
    };
    let (lhs, rhs) = two_point_check(&function.sample(local), s)?;
    let hb = CaseOutcome {
        lemma: "hb",
        case,
        function,
        perturbation: None,
        exponent: s,
        holds: within(lhs, rhs),
        lhs,
        rhs,
        constant: None,
    };

    // CutF
    let mut rng = case_rng(seed, case, 2);
    let function = TestFunction::random(&mut rng, false);
    let s = rng.random_range(0.1..0.95);
    let margin = (2.0 / local.spacing()).ceil() as usize;
    let x0_index = rng.random_range(margin..local.n() - margin);
    let (lhs, rhs, constant) = cutoff_check(&function.sample(local), x0_index, s)?;
    let cutf = CaseOutcome {
        lemma: "cutf",
        case,
        function,
        perturbation: None,
        exponent: s,
        holds: within(lhs, rhs),
        lhs,
        rhs,
        constant: Some(constant),
    };

    // FuHe
    let mut rng = case_rng(seed, case, 3);
    let function = TestFunction::random(&mut rng, true);
    let gamma = if rng.random_bool(0.25) { 1.0 } else { rng.random_range(0.3..0.95) };
    let beta = gamma * rng.random_range(0.1..0.9);
    let phi = if case == 0 { TestFunction::Constant { c: 0.0 } } else { TestFunction::random_perturbation(&mut rng, gamma) };
    let (lhs, rhs) = composition_check(&function, &phi, beta, gamma)?;
    let fuhe = CaseOutcome {
        lemma: "fuhe",
        case,
        function,
        perturbation: Some(phi),
        exponent: beta,
        holds: within(lhs, rhs),
        lhs,
        rhs,
        constant: None,
    };
    Ok([hb, cutf, fuhe])
}

/// Runs `case_count` randomized cases of each check. Case 0 always uses
/// f(x) = x for HB and φ ≡ 0 for FuHe.
pub fn run_regularity_suite(seed: u64, case_count: usize) -> Result<ExperimentReport> {
    if case_count < 100 {
        return Err(Error::config(format!("case_count must be ≥ 100, got {case_count}")));
    }
    let local = TorusGrid::new(1, LOCAL_HALF_PERIOD, LOCAL_POINTS)?;
    let outcomes = (0..case_count)
        .into_par_iter()
        .map(|case| run_case(seed, case, local))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ExperimentReport::new(
        "regularity_suite",
        json!({
            "seed": seed,
            "case_count": case_count,
            "local_grid": { "half_period": LOCAL_HALF_PERIOD, "n": LOCAL_POINTS, "periodic": false },
            "torus_grid": { "half_period": PI, "n": TORUS_POINTS, "fine_factor": FINE },
            "rounding": ROUNDING,
        }),
    );
    for (k, lemma) in ["hb", "cutf", "fuhe"].into_iter().enumerate() {
        let cases: Vec<&CaseOutcome> = outcomes.iter().map(|o| &o[k]).collect();
        let violations = cases.iter().filter(|c| !c.holds).count();
        let worst = cases
            .iter()
            .map(|c| if c.rhs > 0.0 { c.lhs / c.rhs } else if c.lhs > 0.0 { f64::INFINITY } else { 0.0 })
            .fold(0.0, f64::max);
        report.check(format!("{lemma}_violations"), violations as f64, Criterion::AtMost { bound: 0.0 });
        report.check(format!("{lemma}_max_ratio"), worst, Criterion::AtMost { bound: 1.0 + ROUNDING });
        let failures: Vec<&&CaseOutcome> = cases.iter().filter(|c| !c.holds).collect();
        report.record(format!("{lemma}_failures"), failures);
    }
    let constants: Vec<f64> = outcomes.iter().filter_map(|o| o[1].constant).collect();
    report.record("cutf_suite_constant_max", constants.iter().copied().fold(0.0, f64::max));
    report.record("cutf_suite_constant_min", constants.iter().copied().fold(f64::INFINITY, f64::min));
    report.record("identity_hb_case", &outcomes[0][0]);
    Ok(report)
}
