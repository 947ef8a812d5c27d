//! Discrete Hölder norms from grid-aligned shifts.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::spectral;

/// Which grid-aligned shifts enter a Hölder seminorm.
#[derive(Debug, Clone)]
pub struct ShiftOptions {
    /// When false, pairs whose difference crosses the wrap at ±L are skipped.
    pub periodic: bool,
    /// Largest shift length; `None` means the half period.
    pub max_shift: Option<f64>,
    /// In 2D, every shift with |m₁|, |m₂| ≤ box_radius is used in addition to
    /// the axis and diagonal shifts of all lengths.
    pub box_radius: usize,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        Self { periodic: true, max_shift: None, box_radius: 8 }
    }
}

fn shift_set(grid: &TorusGrid, opts: &ShiftOptions) -> Vec<[i64; 2]> {
    let half = (grid.n() / 2) as i64;
    let h = grid.spacing();
    let limit = opts.max_shift.unwrap_or(grid.half_period()) * (1.0 + 1e-12);
    let mut out = Vec::new();
    let mut push = |m: [i64; 2]| {
        let len = h * ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
        if len > 0.0 && len <= limit && !out.contains(&m) {
            out.push(m);
        }
    };
    if grid.dim() == 1 {
        for m in 1..=half {
            push([m, 0]);
        }
        return out;
    }
    for m in 1..=half {
        push([m, 0]);
        push([0, m]);
        push([m, m]);
        push([m, -m]);
    }
    let r = opts.box_radius as i64;
    for a in 0..=r {
        for b in -r..=r {
            if a == 0 && b <= 0 {
                continue;
            }
            push([a, b]);
        }
    }
    out
}

/// sup over shifts of |δ_h F|/|h|^exponent for a vector field F given by its components.
fn seminorm(grid: &TorusGrid, components: &[&[f64]], exponent: f64, opts: &ShiftOptions) -> f64 {
    let n = grid.n() as i64;
    let h = grid.spacing();
    let shifts = shift_set(grid, opts);
    shifts
        .par_iter()
        .map(|m| {
            let len = h * ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
            let scale = len.powf(-exponent);
            let mut best = 0.0f64;
            for idx in 0..grid.len() {
                let ix = grid.unflatten(idx);
                let mut jx = [0usize; 2];
                let mut crosses = false;
                for axis in 0..grid.dim() {
                    let t = ix[axis] as i64 + m[axis];
                    if !(0..n).contains(&t) {
                        crosses = true;
                    }
                    jx[axis] = t.rem_euclid(n) as usize;
                }
                if crosses && !opts.periodic {
                    continue;
                }
                let j = grid.flatten(jx);
                let mut sq = 0.0;
                for c in components {
                    let d = c[j] - c[idx];
                    sq += d * d;
                }
                best = best.max(sq);
            }
            best.sqrt() * scale
        })
        .reduce(|| 0.0, f64::max)
}

fn check_index(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::domain(format!("Hölder index must lie in (0, 2), got {beta}")));
    }
    if beta == 1.0 {
        return Err(Error::Unsupported("integer Hölder index 1 is not supported".into()));
    }
    Ok(())
}

/// ‖f‖_∞ + … + ‖∇^{[β]}f‖_∞ + sup_h ‖δ_h∇^{[β]}f‖_∞/|h|^{β−[β]} over all grid shifts.
pub fn holder_norm(f: &GridFunction, beta: f64) -> Result<f64> {
    holder_norm_with(f, beta, &ShiftOptions::default())
}

pub fn holder_norm_with(f: &GridFunction, beta: f64, opts: &ShiftOptions) -> Result<f64> {
    check_index(beta)?;
    f.check_finite()?;
    let grid = f.grid();
    if beta < 1.0 {
        return Ok(f.sup_norm() + seminorm(grid, &[f.values()], beta, opts));
    }
    let grad = spectral::gradient(f);
    let comps: Vec<&[f64]> = grad.iter().map(|g| g.values()).collect();
    let grad_sup = (0..grid.len())
        .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(f.sup_norm() + grad_sup + seminorm(grid, &comps, beta - 1.0, opts))
}

/// [f]_γ restricted to shifts |h| ≤ 1.
pub fn local_holder_seminorm(f: &GridFunction, gamma: f64) -> Result<f64> {
    local_holder_seminorm_with(f, gamma, &ShiftOptions::default())
}

pub fn local_holder_seminorm_with(f: &GridFunction, gamma: f64, opts: &ShiftOptions) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("local seminorm exponent must lie in (0, 1), got {gamma}")));
    }
    f.check_finite()?;
    let opts = ShiftOptions { max_shift: Some(1.0), ..opts.clone() };
    Ok(seminorm(f.grid(), &[f.values()], gamma, &opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute_sup(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        (1..=200_000).map(|k| f(lo + (hi - lo) * k as f64 / 200_000.0)).fold(0.0, f64::max)
    }

    #[test]
    fn constants_have_trivial_norms() {
        let g = TorusGrid::new(2, PI, 16).unwrap();
        let f = GridFunction::constant(g, -2.5);
        assert!((holder_norm(&f, 0.7).unwrap() - 2.5).abs() < 1e-12);
        assert!((holder_norm(&f, 1.4).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(local_holder_seminorm(&f, 0.5).unwrap(), 0.0);
        assert!(matches!(holder_norm(&f, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cosine_holder_norm_matches_shift_search() {
        let g = TorusGrid::new(1, PI, 4096).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0].cos());
        let oracle = 1.0 + brute_sup(|h| 2.0 * (h / 2.0).sin().abs() / h.sqrt(), 0.0, PI);
        let v = holder_norm(&f, 0.5).unwrap();
        assert!((v - oracle).abs() < 1e-3, "{v} vs {oracle}");
        assert!((v - 2.204).abs() < 0.01);
        let local = local_holder_seminorm(&f, 0.5).unwrap();
        let local_oracle = brute_sup(|h| 2.0 * (h / 2.0).sin().abs() / h.sqrt(), 0.0, 1.0);
        assert!((local - local_oracle).abs() < 1e-3, "{local} vs {local_oracle}");
    }

    #[test]
    fn sawtooth_local_seminorm_away_from_wrap() {
        let g = TorusGrid::new(1, PI, 1024).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0]);
        let opts = ShiftOptions { periodic: false, ..Default::default() };
        let v = local_holder_seminorm_with(&f, 0.5, &opts).unwrap();
        // largest grid shift ≤ 1 is h·⌊1/h⌋
        let h = g.spacing();
        let expect = (h * (1.0 / h).floor()).sqrt();
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 1.0).abs() < 0.01);
    }
}
