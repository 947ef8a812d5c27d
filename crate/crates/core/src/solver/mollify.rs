use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{norm, Mat2, Vec2};
use crate::operator::{CoefficientField, Drift, Sigma};
use crate::quadrature::GaussLegendre;

/// Radial clamp b·min(1, n/|b|).
pub fn clamp_drift(b: &Drift, n: f64) -> Drift {
    if b.zero {
        return b.clone();
    }
    let inner = b.clone();
    let mut out = Drift::new(format!("{}∧{n}", b.name), Some(b.bound.map_or(n, |c| c.min(n))), b.growth, move |t, x| {
        let v = inner.eval(t, x);
        let m = norm(&v);
        if m > n {
            [v[0] * n / m, v[1] * n / m]
        } else {
            v
        }
    });
    out.autonomous = b.autonomous;
    out
}

/// Nodes y and normalized weights of the standard mollifier
/// ρ(y) ∝ exp(−1/(1 − |y|²)) on the unit ball.
fn mollifier_nodes(dim: usize) -> Vec<(Vec2, f64)> {
    let rule = GaussLegendre::order16();
    let per_axis = if dim == 1 { 2 } else { 1 };
    let axis: Vec<(f64, f64)> = (0..per_axis)
        .flat_map(|p| {
            let lo = -1.0 + 2.0 * p as f64 / per_axis as f64;
            rule.mapped(lo, lo + 2.0 / per_axis as f64).collect::<Vec<_>>()
        })
        .collect();
    let bump = |r2: f64| if r2 < 1.0 { (-1.0 / (1.0 - r2)).exp() } else { 0.0 };
    let mut nodes = Vec::new();
    if dim == 1 {
        for &(y, w) in &axis {
            nodes.push(([y, 0.0], w * bump(y * y)));
        }
    } else {
        for &(y1, w1) in &axis {
            for &(y2, w2) in &axis {
                let v = w1 * w2 * bump(y1 * y1 + y2 * y2);
                if v > 0.0 {
                    nodes.push(([y1, y2], v));
                }
            }
        }
    }
    let total: f64 = nodes.iter().map(|n| n.1).sum();
    nodes.into_iter().map(|(y, w)| (y, w / total)).collect()
}

/// σ(t, ·) ∗ ρ_n with ρ_n(x) = n^d ρ(nx), by a fixed quadrature over the
/// mollifier support. Weights sum to one, so constants are reproduced exactly.
pub fn mollify_sigma(sigma: &Sigma, dim: usize, n: usize) -> Sigma {
    if sigma.x_independent {
        return sigma.clone();
    }
    let nodes = Arc::new(mollifier_nodes(dim));
    let inner = sigma.clone();
    let width = 1.0 / n as f64;
    let mut out = Sigma::new(format!("{}*rho_{n}", sigma.name), sigma.lower, sigma.upper, sigma.lipschitz, move |t, x| {
        let mut acc: Mat2 = [[0.0; 2]; 2];
        for (y, w) in nodes.iter() {
            let s = inner.eval(t, [x[0] - width * y[0], x[1] - width * y[1]]);
            for r in 0..2 {
                for c in 0..2 {
                    acc[r][c] += w * s[r][c];
                }
            }
        }
        acc
    });
    out.time_independent = sigma.time_independent;
    out.diagonal = sigma.diagonal;
    out
}

/// bₙ = b ∧ n (radial clamp) and σₙ = σ ∗ ρₙ; κ and f unchanged.
pub fn mollify_coefficients(coeff: &CoefficientField, n: usize) -> Result<CoefficientField> {
    if n == 0 {
        return Err(Error::config("mollification index n must be ≥ 1"));
    }
    let field = CoefficientField::new(
        coeff.dim,
        coeff.kappa.clone(),
        mollify_sigma(&coeff.sigma, coeff.dim, n),
        clamp_drift(&coeff.drift, n as f64),
        coeff.source.clone(),
    )?;
    Ok(field.with_regularity(coeff.beta, coeff.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{catalog_drift, catalog_sigma};

    #[test]
    fn constant_sigma_is_unchanged() {
        let s = catalog_sigma(2, "diag(1.5, 0.7)").unwrap();
        let m = mollify_sigma(&s, 2, 3);
        assert_eq!(m.eval(0.3, [1.0, 2.0]), s.eval(0.3, [1.0, 2.0]));
    }

    #[test]
    fn clamp_definition() {
        let b = catalog_drift(1, "linear").unwrap();
        let c = clamp_drift(&b, 3.0);
        assert_eq!(c.eval(0.0, [5.0, 0.0])[0], 3.0);
        assert_eq!(c.eval(0.0, [2.0, 0.0])[0], 2.0);
        assert_eq!(c.eval(0.0, [-7.0, 0.0])[0], -3.0);
        assert_eq!(c.bound, Some(3.0));
        // direction preserved in d = 2
        let b2 = catalog_drift(2, "linear").unwrap();
        let v = clamp_drift(&b2, 1.0).eval(0.0, [3.0, 4.0]);
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_bound() {
        for dim in [1, 2] {
            let s = catalog_sigma(dim, "diag_cos(0.3)").unwrap();
            for n in [1, 4, 16] {
                let m = mollify_sigma(&s, dim, n);
                let mut worst: f64 = 0.0;
                for k in 0..200 {
                    let x = [-3.0 + 0.031 * k as f64, 0.7 - 0.013 * k as f64];
                    let (a, b) = (m.eval(0.0, x), s.eval(0.0, x));
                    worst = worst.max((a[0][0] - b[0][0]).abs()).max((a[1][1] - b[1][1]).abs());
                }
                assert!(worst <= s.lipschitz / n as f64, "d={dim} n={n}: {worst}");
                assert!(worst > 0.0);
            }
        }
    }

    #[test]
    fn mollified_field_keeps_kappa() {
        let c = CoefficientField::from_catalog(1, "osc(0.2)", "diag_abs_sin(0.2, 0.5)", "linear", "cos(1)").unwrap();
        let m = mollify_coefficients(&c, 4).unwrap();
        assert_eq!(m.kappa.name, c.kappa.name);
        assert!(m.sigma.diagonal);
        assert_eq!(m.drift.bound, Some(4.0));
        assert!(mollify_coefficients(&c, 0).is_err());
    }
}
