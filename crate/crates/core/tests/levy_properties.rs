use std::f64::consts::PI;

use proptest::prelude::*;

use stablelab::levy::{levy_symbol, levy_symbol_quadrature, radial_moment, RadialQuadrature, StableLevyMeasure};

fn measure(kind: u8, dim: usize, alpha: f64) -> StableLevyMeasure {
    match kind {
        0 => StableLevyMeasure::standard(dim, alpha).unwrap(),
        _ => StableLevyMeasure::cylindrical(dim, alpha).unwrap(),
    }
}

fn frequency() -> impl Strategy<Value = [f64; 2]> {
    (-6.0..6.0f64, -6.0..6.0f64).prop_filter("away from 0", |(a, b)| a.hypot(*b) > 1e-2).prop_map(|(a, b)| [a, b])
}

/// ∫₀^∞ g(e^{−s}) ds by composite Simpson on [0, S].
fn simpson(g: impl Fn(f64) -> f64, upper: f64, panels: usize) -> f64 {
    let h = upper / panels as f64;
    let mut acc = g(0.0) + g(upper);
    for k in 1..panels {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    acc * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_is_homogeneous(alpha in 0.1..1.95f64, kind in 0u8..2, dim in 1usize..3, xi in frequency()) {
        let nu = measure(kind, dim, alpha);
        let xi = if dim == 1 { [xi[0].abs().max(1e-2), 0.0] } else { xi };
        let base = levy_symbol(&nu, &xi).unwrap();
        for lambda in [0.5, 2.0, 4.0] {
            let scaled = levy_symbol(&nu, &[lambda * xi[0], lambda * xi[1]]).unwrap();
            let expect = base * lambda.powf(alpha);
            prop_assert!((scaled - expect).norm() <= 1e-8 * expect.norm(), "λ={lambda}: {scaled} vs {expect}");
        }
    }

    #[test]
    fn symmetric_symbols_are_real_and_nonpositive(alpha in 0.1..1.95f64, kind in 0u8..2, dim in 1usize..3, xi in frequency()) {
        let nu = measure(kind, dim, alpha);
        let xi = if dim == 1 { [xi[0], 0.0] } else { xi };
        for psi in [levy_symbol(&nu, &xi).unwrap(), levy_symbol_quadrature(&nu, &xi, &RadialQuadrature::default()).unwrap()] {
            prop_assert!(psi.im.abs() <= 1e-10 * psi.norm().max(1.0), "{psi}");
            prop_assert!(psi.re <= 0.0);
        }
    }

    #[test]
    fn uniform_planar_symbol_is_radial(alpha in 0.1..1.95f64, r in 0.1..8.0f64, phi in 0.0..(2.0 * PI)) {
        let nu = StableLevyMeasure::standard(2, alpha).unwrap();
        let on_axis = levy_symbol(&nu, &[r, 0.0]).unwrap();
        let rotated = levy_symbol(&nu, &[r * phi.cos(), r * phi.sin()]).unwrap();
        prop_assert!((on_axis - rotated).norm() <= 1e-12 * on_axis.norm());
        let quad = levy_symbol_quadrature(&nu, &[r * phi.cos(), r * phi.sin()], &RadialQuadrature::default()).unwrap();
        // the 512-angle trapezoid converges like h^{1+α} at the |cos|^α kinks
        let tolerance = (2.0 * PI / 512.0).powf(1.0 + alpha);
        prop_assert!((quad - on_axis).norm() <= tolerance * on_axis.norm(), "{quad} vs {on_axis}");
    }
}

#[test]
fn radial_moment_matches_brute_force() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let alpha: f64 = rng.random_range(0.1..1.9);
        let gamma1 = rng.random_range(alpha + 0.05..alpha + 2.0);
        let gamma2 = rng.random_range(0.0..alpha - 0.05).max(0.0);
        let (kind, dim) = (rng.random_range(0u8..2), rng.random_range(1usize..3));
        let nu = measure(kind, dim, alpha);
        let mass = match (kind, dim) {
            (0, 1) => 2.0,
            (0, _) => 2.0 * PI,
            (_, d) => 2.0 * d as f64,
        };
        // r = e^{−s} on (0, 1] and r = e^{s} on [1, ∞)
        let near = simpson(|s| (-(gamma1 - alpha) * s).exp(), 60.0 / (gamma1 - alpha), 200_000);
        let far = simpson(|s| (-(alpha - gamma2) * s).exp(), 60.0 / (alpha - gamma2), 200_000);
        let brute = mass * (near + far);
        let closed = radial_moment(&nu, gamma1, gamma2).unwrap();
        assert!((closed - brute).abs() <= 1e-10 * brute, "α={alpha} γ₁={gamma1} γ₂={gamma2}: {closed} vs {brute}");
    }
}
