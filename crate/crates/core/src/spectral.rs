//! FFT transforms, spectral derivatives, Fourier multipliers and the
//! upsampled interpolator used for displaced evaluations.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::geometry::Vec2;
use crate::grid::{GridFunction, TorusGrid};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transform(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let fft = plan(n, inverse);
    if grid.dim() == 1 {
        fft.process(data);
        return;
    }
    // rows are contiguous
    fft.process(data);
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for ix in 0..n {
        for iy in 0..n {
            column[iy] = data[iy * n + ix];
        }
        fft.process(&mut column);
        for iy in 0..n {
            data[iy * n + ix] = column[iy];
        }
    }
}

/// Unnormalized forward DFT in place.
pub fn forward_in_place(grid: &TorusGrid, data: &mut [Complex64]) {
    transform(grid, data, false);
}

/// Inverse DFT in place, normalized so that it inverts [`forward_in_place`].
pub fn inverse_in_place(grid: &TorusGrid, data: &mut [Complex64]) {
    transform(grid, data, true);
    let s = 1.0 / grid.len() as f64;
    for v in data.iter_mut() {
        *v *= s;
    }
}

/// Fourier coefficients of a grid function (FFT ordering).
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &GridFunction) -> Self {
        Self::of_values(*f.grid(), f.values())
    }

    pub fn of_values(grid: TorusGrid, values: &[f64]) -> Self {
        let mut coeffs: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        forward_in_place(&grid, &mut coeffs);
        Self { grid, coeffs }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Multiply each coefficient by `m(bin, ξ)`.
    pub fn multiplied(&self, m: impl Fn(usize, Vec2) -> Complex64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(i, self.grid.frequency(i)))
            .collect();
        Spectrum { grid: self.grid, coeffs }
    }

    /// Multiply by a precomputed table of per-bin factors.
    pub fn multiplied_by(&self, table: &[Complex64]) -> Spectrum {
        assert_eq!(table.len(), self.coeffs.len());
        let coeffs = self.coeffs.iter().zip(table).map(|(c, m)| c * m).collect();
        Spectrum { grid: self.grid, coeffs }
    }

    /// Real part of the inverse transform.
    pub fn to_function(&self) -> GridFunction {
        let mut data = self.coeffs.clone();
        inverse_in_place(&self.grid, &mut data);
        GridFunction::from_vec(self.grid, data.into_iter().map(|c| c.re).collect())
    }

    /// ∂^{order} of the underlying function. The Nyquist bin is dropped along
    /// every axis differentiated an odd number of times.
    pub fn derivative(&self, order: [u32; 2]) -> GridFunction {
        let grid = self.grid;
        self.multiplied(|i, xi| {
            let mut m = Complex64::new(1.0, 0.0);
            for axis in 0..grid.dim() {
                let k = order[axis];
                if k == 0 {
                    continue;
                }
                if k % 2 == 1 && grid.is_nyquist(i, axis) {
                    return Complex64::new(0.0, 0.0);
                }
                m *= Complex64::new(0.0, xi[axis]).powu(k);
            }
            m
        })
        .to_function()
    }

    /// Trigonometric interpolant at an arbitrary point, O(N^d).
    pub fn eval_at(&self, x: Vec2) -> f64 {
        let grid = self.grid;
        let l = grid.half_period();
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let xi = grid.frequency(i);
            // Nyquist bins contribute their cosine part only
            let mut e = Complex64::new(1.0, 0.0);
            for axis in 0..grid.dim() {
                let theta = xi[axis] * (x[axis] + l);
                e *= if grid.is_nyquist(i, axis) {
                    Complex64::new(theta.cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, theta)
                };
            }
            let re = (c * e).re;
            acc += re;
        }
        acc / grid.len() as f64
    }
}

/// Apply the Fourier multiplier `m(ξ)` and return the real part.
pub fn apply_multiplier(f: &GridFunction, m: impl Fn(Vec2) -> Complex64) -> GridFunction {
    Spectrum::of(f).multiplied(|_, xi| m(xi)).to_function()
}

pub fn gradient(f: &GridFunction) -> Vec<GridFunction> {
    let s = Spectrum::of(f);
    (0..f.grid().dim())
        .map(|a| {
            let mut o = [0, 0];
            o[a] = 1;
            s.derivative(o)
        })
        .collect()
}

/// Hessian entries ∂_a∂_b f, indexed `[a][b]`.
pub fn hessian(f: &GridFunction) -> Vec<Vec<GridFunction>> {
    let s = Spectrum::of(f);
    let d = f.grid().dim();
    let mut out = vec![Vec::with_capacity(d); d];
    for a in 0..d {
        for b in 0..d {
            let mut o = [0, 0];
            o[a] += 1;
            o[b] += 1;
            out[a].push(s.derivative(o));
        }
    }
    out
}

const LAGRANGE_POINTS: usize = 8;
const LAGRANGE_OFFSET: i64 = 3;

fn lagrange_weights(t: f64) -> [f64; LAGRANGE_POINTS] {
    let mut w = [0.0; LAGRANGE_POINTS];
    for (m, wm) in w.iter_mut().enumerate() {
        let xm = m as f64 - LAGRANGE_OFFSET as f64;
        let mut num = 1.0;
        let mut den = 1.0;
        for k in 0..LAGRANGE_POINTS {
            if k == m {
                continue;
            }
            let xk = k as f64 - LAGRANGE_OFFSET as f64;
            num *= t - xk;
            den *= xm - xk;
        }
        *wm = num / den;
    }
    w
}

/// Evaluates a grid function at arbitrary points: trigonometric upsampling by
/// `factor` followed by 8-point periodic Lagrange interpolation per axis.
#[derive(Debug, Clone)]
pub struct Interpolator {
    fine: TorusGrid,
    values: Vec<f64>,
}

impl Interpolator {
    pub fn new(f: &GridFunction, factor: usize) -> Self {
        let coarse = *f.grid();
        let fine = TorusGrid::new(coarse.dim(), coarse.half_period(), coarse.n() * factor.max(1))
            .expect("upsampled grid is valid");
        let spec = Spectrum::of(f);
        let mut data = vec![Complex64::new(0.0, 0.0); fine.len()];
        let n = coarse.n() as i64;
        let nf = fine.n() as i64;
        let to_fine = |k: i64| -> usize { k.rem_euclid(nf) as usize };
        for (i, c) in spec.coeffs().iter().enumerate() {
            let ix = coarse.unflatten(i);
            // Nyquist bins are split evenly between ±N/2
            let mut targets: Vec<([i64; 2], f64)> = vec![([0, 0], 1.0)];
            for axis in 0..coarse.dim() {
                let k = coarse.wavenumber(ix[axis]);
                let mut next = Vec::with_capacity(targets.len() * 2);
                for (t, w) in &targets {
                    if k == n / 2 {
                        let mut a = *t;
                        a[axis] = k;
                        let mut b = *t;
                        b[axis] = -k;
                        next.push((a, w * 0.5));
                        next.push((b, w * 0.5));
                    } else {
                        let mut a = *t;
                        a[axis] = k;
                        next.push((a, *w));
                    }
                }
                targets = next;
            }
            for (t, w) in targets {
                let j = fine.flatten([to_fine(t[0]), to_fine(t[1])]);
                data[j] += c * w;
            }
        }
        let scale = (fine.len() / coarse.len()) as f64;
        inverse_in_place(&fine, &mut data);
        let values = data.into_iter().map(|c| c.re * scale).collect();
        Self { fine, values }
    }

    pub fn fine_grid(&self) -> &TorusGrid {
        &self.fine
    }

    #[inline]
    fn locate(&self, x: f64) -> (i64, f64) {
        let s = (x + self.fine.half_period()) / self.fine.spacing();
        let i0 = s.floor();
        (i0 as i64, s - i0)
    }

    /// Value at `x` (periodic wrap).
    pub fn eval(&self, x: Vec2) -> f64 {
        let nf = self.fine.n() as i64;
        let (i0, tx) = self.locate(x[0]);
        let wx = lagrange_weights(tx);
        if self.fine.dim() == 1 {
            let mut acc = 0.0;
            for (m, w) in wx.iter().enumerate() {
                let j = (i0 + m as i64 - LAGRANGE_OFFSET).rem_euclid(nf) as usize;
                acc += w * self.values[j];
            }
            return acc;
        }
        let (j0, ty) = self.locate(x[1]);
        let wy = lagrange_weights(ty);
        let mut acc = 0.0;
        for (my, vy) in wy.iter().enumerate() {
            let row = (j0 + my as i64 - LAGRANGE_OFFSET).rem_euclid(nf) as usize * nf as usize;
            let mut s = 0.0;
            for (mx, vx) in wx.iter().enumerate() {
                let col = (i0 + mx as i64 - LAGRANGE_OFFSET).rem_euclid(nf) as usize;
                s += vx * self.values[row + col];
            }
            acc += vy * s;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_harmonics() {
        let g = TorusGrid::new(1, PI, 64).unwrap();
        let f = GridFunction::from_fn(g, |x| (3.0 * x[0]).sin());
        let d = Spectrum::of(&f).derivative([1, 0]);
        for (i, v) in d.values().iter().enumerate() {
            assert!((v - 3.0 * (3.0 * g.point(i)[0]).cos()).abs() < 1e-12);
        }
        let g2 = TorusGrid::new(2, 2.0, 32).unwrap();
        let f = GridFunction::from_fn(g2, |x| (PI * x[0] / 2.0).cos() * (PI * x[1]).sin());
        let h = hessian(&f);
        for i in 0..g2.len() {
            let x = g2.point(i);
            let exact = -(PI / 2.0) * PI * (PI * x[0] / 2.0).sin() * (PI * x[1]).cos();
            assert!((h[0][1].values()[i] - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolator_matches_trigonometric_interpolant() {
        let g = TorusGrid::new(2, PI, 32).unwrap();
        let f = GridFunction::from_fn(g, |x| (2.0 * x[0] + x[1]).cos() + 0.3 * (5.0 * x[1]).sin());
        let it = Interpolator::new(&f, 4);
        for x in [[0.123f64, -2.9], [3.1, 3.1], [-7.0, 0.5]] {
            let exact = (2.0 * x[0] + x[1]).cos() + 0.3 * (5.0 * x[1]).sin();
            assert!((it.eval(x) - exact).abs() < 1e-7, "{x:?} {}", it.eval(x) - exact);
            assert!((Spectrum::of(&f).eval_at(x) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn nyquist_mode_is_interpolated_as_cosine() {
        let g = TorusGrid::new(1, PI, 16).unwrap();
        let f = GridFunction::from_fn(g, |x| (8.0 * x[0]).cos());
        let it = Interpolator::new(&f, 8);
        let s = Spectrum::of(&f);
        for x in [0.05f64, 0.3, -1.1] {
            let exact = (8.0 * x).cos();
            assert!((s.eval_at([x, 0.0]) - exact).abs() < 1e-12);
            assert!((it.eval([x, 0.0]) - exact).abs() < 1e-4);
        }
    }
}
