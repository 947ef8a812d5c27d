use crate::error::Result;
use crate::grid::GridFunction;
use crate::operator::coefficients::CoefficientField;
use crate::spectral;

/// b(t, ·)·∇u with a spectral gradient. b is evaluated at the grid points
/// without periodic wrap.
pub fn apply_drift(u: &GridFunction, coeff: &CoefficientField, t: f64) -> Result<GridFunction> {
    u.check_finite()?;
    let grid = *u.grid();
    if coeff.drift.zero {
        return Ok(GridFunction::zeros(grid));
    }
    let grad = spectral::gradient(u);
    let values = (0..grid.len())
        .map(|i| {
            let b = coeff.drift.eval(t, grid.point(i));
            grad.iter().enumerate().map(|(k, g)| b[k] * g.values()[i]).sum()
        })
        .collect();
    GridFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::operator::coefficients::Source;
    use std::f64::consts::PI;

    #[test]
    fn constant_and_linear_drift() {
        let g = TorusGrid::new(1, PI, 64).unwrap();
        let u = GridFunction::from_fn(g, |x| x[0].sin());
        let c = CoefficientField::from_catalog(1, "one", "identity", "const(2)", "zero").unwrap();
        let d = apply_drift(&u, &c, 0.0).unwrap();
        let expect = GridFunction::from_fn(g, |x| 2.0 * x[0].cos());
        assert!(d.distance(&expect).unwrap() < 1e-12);

        let zero = CoefficientField::standard(1, Source::zero()).unwrap();
        assert_eq!(apply_drift(&u, &zero, 0.0).unwrap().sup_norm(), 0.0);

        let lin = CoefficientField::from_catalog(1, "one", "identity", "linear", "zero").unwrap();
        let d = apply_drift(&u, &lin, 0.0).unwrap();
        for i in 0..g.len() {
            let x = g.point(i)[0];
            if x.abs() < 2.5 {
                let e = x * x.cos();
                assert!((d.values()[i] - e).abs() <= 1e-8 * e.abs().max(1e-300) + 1e-13);
            }
        }
    }
}
