use crate::error::{Error, Result};
use crate::geometry::{norm, Vec2};
use crate::operator::Drift;

/// Paths with |θ| above this are treated as blow-up.
const BLOW_UP: f64 = 1e6;

/// One classical RK4 step of y' = g(s, y) from s to s + h.
pub(crate) fn rk4_step(g: impl Fn(f64, Vec2) -> Vec2, s: f64, y: Vec2, h: f64) -> Vec2 {
    let shift = |y: Vec2, k: Vec2, c: f64| [y[0] + c * k[0], y[1] + c * k[1]];
    let k1 = g(s, y);
    let k2 = g(s + 0.5 * h, shift(y, k1, 0.5 * h));
    let k3 = g(s + 0.5 * h, shift(y, k2, 0.5 * h));
    let k4 = g(s + h, shift(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// RK4 trajectory of θ̇ = −b(t, θ), θ₀ = x₀, on [0, T] (the backward
/// freezing flow). Returns (t, θ_t) including both end points; the step is
/// T/⌈T/dt⌉.
pub fn integrate_characteristics(b: &Drift, x0: Vec2, t_final: f64, dt: f64) -> Result<Vec<(f64, Vec2)>> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::config(format!("T must be ≥ 0, got {t_final}")));
    }
    let limit = 1e-2 / (1.0 + b.growth);
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::config(format!(
            "dt = {dt} must lie in (0, 1e-2/(1 + c)] = (0, {limit:e}] for growth constant c = {}",
            b.growth
        )));
    }
    let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let mut path = Vec::with_capacity(steps + 1);
    let mut theta = x0;
    path.push((0.0, theta));
    let flow = |t: f64, y: Vec2| {
        let v = b.eval(t, y);
        [-v[0], -v[1]]
    };
    for k in 0..steps {
        let t = k as f64 * h;
        theta = rk4_step(flow, t, theta, h);
        if !(norm(&theta) <= BLOW_UP) {
            return Err(Error::Divergence {
                step: k + 1,
                msg: format!("|θ| = {:e} exceeds {BLOW_UP:e}; b violates the declared linear growth", norm(&theta)),
            });
        }
        path.push((t + h, theta));
    }
    Ok(path)
}
