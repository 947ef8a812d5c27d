//! The localizing cutoff χ and the commutator [χ, L].

use crate::error::{Error, Result};
use crate::geometry::{norm, Vec2};
use crate::grid::{GridFunction, TorusGrid};
use crate::levy::StableLevyMeasure;
use crate::littlewood_paley::bump;
use crate::operator::coefficients::CoefficientField;
use crate::operator::nonlocal::{NonlocalOperator, QuadratureScheme};

/// χ(· − x₀) with χ = 1 on |x| ≤ 1/4 and χ = 0 for |x| ≥ 1/2, sampled on a grid
/// and available in closed form.
#[derive(Debug, Clone)]
pub struct Cutoff {
    center: Vec2,
    samples: GridFunction,
}

impl Cutoff {
    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn samples(&self) -> &GridFunction {
        &self.samples
    }

    /// Closed-form value at an arbitrary point (minimum-image distance).
    pub fn eval(&self, x: Vec2) -> f64 {
        let grid = self.samples.grid();
        let mut d = [grid.wrap(x[0] - self.center[0]), 0.0];
        if grid.dim() == 2 {
            d[1] = grid.wrap(x[1] - self.center[1]);
        }
        profile(norm(&d))
    }
}

fn profile(r: f64) -> f64 {
    bump(4.0 * r)
}

pub fn make_cutoff(grid: &TorusGrid, x0: Vec2) -> Result<Cutoff> {
    if grid.half_period() < 1.0 {
        return Err(Error::config(format!(
            "half-period {} < 1 lets the cutoff support wrap",
            grid.half_period()
        )));
    }
    let center = if grid.dim() == 1 { [x0[0], 0.0] } else { x0 };
    let mut c = Cutoff { center, samples: GridFunction::zeros(*grid) };
    c.samples = GridFunction::from_fn(*grid, |x| c.eval(x));
    Ok(c)
}

/// [χ, L]u = χ·Lu − L(χu).
pub fn commutator_with_cutoff(
    u: &GridFunction,
    chi: &Cutoff,
    coeff: &CoefficientField,
    nu: &StableLevyMeasure,
    t: f64,
    scheme: &QuadratureScheme,
) -> Result<GridFunction> {
    u.grid().ensure_same(chi.samples.grid())?;
    let op = NonlocalOperator::new(*u.grid(), coeff, nu, scheme)?;
    let lu = op.apply(u, t)?;
    let l_chi_u = op.apply(&chi.samples.mul(u)?, t)?;
    chi.samples.mul(&lu)?.sub(&l_chi_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::coefficients::Source;
    use std::f64::consts::PI;

    #[test]
    fn cutoff_values() {
        let g = TorusGrid::new(2, PI, 32).unwrap();
        let c = make_cutoff(&g, [0.5, -0.25]).unwrap();
        assert_eq!(c.eval([0.5, -0.25]), 1.0);
        assert_eq!(c.eval([0.5 + 0.6, -0.25]), 0.0);
        let mid = c.eval([0.5 + 0.375, -0.25]);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 1.0;
        for k in 0..=40 {
            let v = c.eval([0.5, -0.25 + 0.6 * k as f64 / 40.0]);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        assert!(matches!(make_cutoff(&TorusGrid::new(1, 0.9, 16).unwrap(), [0.0, 0.0]), Err(Error::Config(_))));
    }

    #[test]
    fn constant_input_and_linearity() {
        let g = TorusGrid::new(1, PI, 64).unwrap();
        let nu = StableLevyMeasure::standard(1, 0.7).unwrap();
        let coeff = CoefficientField::standard(1, Source::zero()).unwrap();
        let chi = make_cutoff(&g, [0.0, 0.0]).unwrap();
        let scheme = QuadratureScheme::default();
        let c = GridFunction::constant(g, 2.0);
        let com = commutator_with_cutoff(&c, &chi, &coeff, &nu, 0.0, &scheme).unwrap();
        let op = NonlocalOperator::new(g, &coeff, &nu, &scheme).unwrap();
        let l_chi = op.apply(chi.samples(), 0.0).unwrap();
        assert!(com.distance(&l_chi.scaled(-2.0)).unwrap() <= 1e-6);

        let u = GridFunction::from_fn(g, |x| (2.0 * x[0]).sin());
        let v = GridFunction::from_fn(g, |x| (x[0]).cos() * 0.3);
        let a = commutator_with_cutoff(&u.add(&v).unwrap(), &chi, &coeff, &nu, 0.0, &scheme).unwrap();
        let b = commutator_with_cutoff(&u, &chi, &coeff, &nu, 0.0, &scheme)
            .unwrap()
            .add(&commutator_with_cutoff(&v, &chi, &coeff, &nu, 0.0, &scheme).unwrap())
            .unwrap();
        assert!(a.distance(&b).unwrap() <= 1e-8);
    }
}
