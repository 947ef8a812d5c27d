use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stablelab::geometry::IDENTITY;
use stablelab::grid::{GridFunction, TorusGrid};
use stablelab::levy::StableLevyMeasure;
use stablelab::littlewood_paley::holder_norm;
use stablelab::operator::{apply_nonlocal, frozen_symbol_apply, CoefficientField, FrozenKappa, QuadratureScheme, Source};

/// Suite constant for ‖Lu‖_{C^β} ≤ C‖u‖_{C^{α+β}} on the randomized family below.
const BOUNDEDNESS_SUITE_CONSTANT: f64 = 10.0;

fn band_limited(grid: TorusGrid, seed: u64, kmax: i64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<([f64; 2], f64, f64)> = (0..5)
        .map(|_| {
            let k = [rng.random_range(-kmax..=kmax) as f64, if grid.dim() == 2 { rng.random_range(-kmax..=kmax) as f64 } else { 0.0 }];
            (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    GridFunction::from_fn(grid, |x| modes.iter().map(|(k, a, p)| a * (k[0] * x[0] + k[1] * x[1] + p).cos()).sum())
}

fn measure(kind: u8, dim: usize, alpha: f64) -> StableLevyMeasure {
    if kind == 0 {
        StableLevyMeasure::standard(dim, alpha).unwrap()
    } else {
        StableLevyMeasure::cylindrical(dim, alpha).unwrap()
    }
}

fn grid_for(dim: usize) -> TorusGrid {
    TorusGrid::new(dim, PI, if dim == 1 { 64 } else { 16 }).unwrap()
}

fn shifted(u: &GridFunction, m: [usize; 2]) -> GridFunction {
    let g = *u.grid();
    let n = g.n();
    let values = (0..g.len())
        .map(|i| {
            let ix = g.unflatten(i);
            let src = [(ix[0] + m[0]) % n, if g.dim() == 2 { (ix[1] + m[1]) % n } else { 0 }];
            u.values()[g.flatten(src)]
        })
        .collect();
    GridFunction::new(g, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constant_coefficient_operator_is_linear_and_shift_equivariant(
        seed in any::<u64>(), alpha in prop::sample::select(vec![0.6, 1.0, 1.5]), kind in 0u8..2, dim in 1usize..3,
        m in (0usize..16, 0usize..16), a in -3.0..3.0f64,
    ) {
        let grid = grid_for(dim);
        let nu = measure(kind, dim, alpha);
        let coeff = CoefficientField::standard(dim, Source::zero()).unwrap();
        let scheme = QuadratureScheme::default();
        let u = band_limited(grid, seed, 4);
        let v = band_limited(grid, seed.wrapping_add(1), 4);
        let lu = apply_nonlocal(&u, &coeff, &nu, 0.0, &scheme).unwrap();
        let lv = apply_nonlocal(&v, &coeff, &nu, 0.0, &scheme).unwrap();
        let shift = [m.0, m.1];
        let l_shifted = apply_nonlocal(&shifted(&u, shift), &coeff, &nu, 0.0, &scheme).unwrap();
        let gap = l_shifted.distance(&shifted(&lu, shift)).unwrap();
        // round-off of the FFT-based interpolator grows with ‖Lu‖
        let scale = lu.sup_norm().max(1.0);
        prop_assert!(gap <= 1e-10 * scale, "shift gap {gap:e}, sup {scale}");
        let combo = u.scaled(a).add(&v).unwrap();
        let l_combo = apply_nonlocal(&combo, &coeff, &nu, 0.0, &scheme).unwrap();
        let scale = lu.sup_norm().max(lv.sup_norm()).max(1.0) * (1.0 + a.abs());
        prop_assert!(l_combo.distance(&lu.scaled(a).add(&lv).unwrap()).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn quadrature_agrees_with_the_frozen_symbol(
        seed in any::<u64>(), alpha in prop::sample::select(vec![0.6, 1.0, 1.5]), kind in 0u8..2, dim in 1usize..3,
    ) {
        let grid = grid_for(dim);
        let nu = measure(kind, dim, alpha);
        let u = band_limited(grid, seed, 4);
        let coeff = CoefficientField::standard(dim, Source::zero()).unwrap();
        let a = apply_nonlocal(&u, &coeff, &nu, 0.0, &QuadratureScheme::default()).unwrap();
        let b = frozen_symbol_apply(&u, &FrozenKappa::constant(1.0), &IDENTITY, &nu, 0.0).unwrap();
        prop_assert!(a.distance(&b).unwrap() <= 1e-3 * b.sup_norm());
    }
}

#[test]
fn operator_is_bounded_between_holder_scales() {
    let (alpha, beta) = (1.5, 0.3);
    let grid = TorusGrid::new(1, PI, 64).unwrap();
    let nu = StableLevyMeasure::standard(1, alpha).unwrap();
    let coeff = CoefficientField::from_catalog(1, "osc(eps=0.2)", "diag_cos(eps=0.2)", "zero", "zero").unwrap();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let u = band_limited(grid, seed, 12);
        let lu = apply_nonlocal(&u, &coeff, &nu, 0.0, &QuadratureScheme::default()).unwrap();
        let ratio = holder_norm(&lu, beta).unwrap() / holder_norm(&u, alpha + beta).unwrap();
        assert!(ratio.is_finite());
        worst = worst.max(ratio);
    }
    assert!(worst <= BOUNDEDNESS_SUITE_CONSTANT, "suite constant {worst}");
}

#[test]
fn refinement_changes_the_output_at_first_order_or_better() {
    let nu = StableLevyMeasure::standard(1, 1.2).unwrap();
    let coeff = CoefficientField::from_catalog(1, "one", "diag_cos(eps=0.2)", "zero", "zero").unwrap();
    let output = |n: usize| {
        let grid = TorusGrid::new(1, PI, n).unwrap();
        let u = GridFunction::from_fn(grid, |x| (0.5 * x[0]).sin().abs().powi(3));
        apply_nonlocal(&u, &coeff, &nu, 0.0, &QuadratureScheme::default()).unwrap()
    };
    let levels: Vec<GridFunction> = [32, 64, 128].into_iter().map(output).collect();
    // coarse points are every second fine point
    let gap = |coarse: &GridFunction, fine: &GridFunction| {
        (0..coarse.values().len()).map(|i| (coarse.values()[i] - fine.values()[2 * i]).abs()).fold(0.0, f64::max)
    };
    let (d1, d2) = (gap(&levels[0], &levels[1]), gap(&levels[1], &levels[2]));
    assert!(d2 <= 0.5 * d1 || d2 <= 1e-9, "{d1:e} → {d2:e}");
}
