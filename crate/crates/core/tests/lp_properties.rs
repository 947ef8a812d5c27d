use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stablelab::grid::{GridFunction, TorusGrid};
use stablelab::littlewood_paley::{
    besov_norm, block_decompose, build_dyadic_partition, cutoff, holder_norm, local_holder_seminorm, low_pass,
};

fn trig_polynomial(grid: TorusGrid, seed: u64, kmax: i64, terms: usize) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<([f64; 2], f64, f64)> = (0..terms)
        .map(|_| {
            let k = [rng.random_range(-kmax..=kmax) as f64, if grid.dim() == 2 { rng.random_range(-kmax..=kmax) as f64 } else { 0.0 }];
            (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    GridFunction::from_fn(grid, |x| modes.iter().map(|(k, a, p)| a * (k[0] * x[0] + k[1] * x[1] + p).cos()).sum())
}

fn inner(f: &GridFunction, g: &GridFunction) -> f64 {
    f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<f64>() / f.values().len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_sums_telescope(r in 0.0..5000.0f64, k in 0usize..14) {
        let partial: f64 = (0..=k).map(|j| cutoff(j, r)).sum();
        prop_assert!((partial - low_pass(2f64.powi(-(k as i32)) * r)).abs() <= 4.0 * f64::EPSILON);
        prop_assert!((0..=k).all(|j| (0.0..=1.0).contains(&cutoff(j, r))));
    }

    #[test]
    fn fattened_block_reproduces_the_block(seed in any::<u64>(), dim in 1usize..3) {
        let grid = TorusGrid::new(dim, PI, if dim == 1 { 256 } else { 32 }).unwrap();
        let p = build_dyadic_partition(&grid).unwrap();
        let f = trig_polynomial(grid, seed, grid.n() as i64 / 2 - 1, 8);
        let blocks = block_decompose(&f, &p).unwrap();
        for j in 0..=p.j_max() {
            let again = block_decompose(&blocks.fattened(j), &p).unwrap();
            prop_assert!(again.blocks[j].distance(&blocks.blocks[j]).unwrap() <= 1e-10, "j={j}");
        }
    }

    #[test]
    fn blocks_are_self_adjoint(seed in any::<u64>(), dim in 1usize..3) {
        let grid = TorusGrid::new(dim, PI, if dim == 1 { 128 } else { 32 }).unwrap();
        let p = build_dyadic_partition(&grid).unwrap();
        let f = trig_polynomial(grid, seed, grid.n() as i64 / 2 - 1, 8);
        let g = trig_polynomial(grid, seed ^ 0x9e37_79b9, grid.n() as i64 / 2 - 1, 8);
        let (bf, bg) = (block_decompose(&f, &p).unwrap(), block_decompose(&g, &p).unwrap());
        for j in 0..=p.j_max() {
            prop_assert!((inner(&bf.blocks[j], &g) - inner(&f, &bg.blocks[j])).abs() <= 1e-10, "j={j}");
        }
    }
}

#[test]
fn besov_and_holder_norms_are_equivalent() {
    let grid = TorusGrid::new(1, PI, 1024).unwrap();
    let p = build_dyadic_partition(&grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for s in [0.3, 0.5, 0.9] {
        for _ in 0..10 {
            let terms: Vec<(f64, f64, f64)> = (0..=8)
                .map(|j| {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (2f64.powi(j), sign * rng.random_range(0.5..1.0) * 2f64.powf(-s * j as f64), rng.random_range(0.0..2.0 * PI))
                })
                .collect();
            let f = GridFunction::from_fn(grid, |x| terms.iter().map(|(k, a, ph)| a * (k * x[0] + ph).cos()).sum());
            let ratio = besov_norm(&f, s, &p).unwrap() / holder_norm(&f, s).unwrap();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let c = hi.max(1.0 / lo);
    assert!(c <= 10.0, "suite constant {c} (ratios in [{lo}, {hi}])");
}

#[test]
fn long_range_increments_obey_the_two_point_bound() {
    let grid = TorusGrid::new(1, PI, 256).unwrap();
    for case in 0..20u64 {
        let s = [0.3, 0.5, 0.7, 0.9][case as usize % 4];
        let f = trig_polynomial(grid, 100 + case, 12, 6);
        let seminorm = local_holder_seminorm(&f, s).unwrap();
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let d = (grid.point(i)[0] - grid.point(j)[0]).abs();
                if d > 1.0 {
                    let lhs = (f.values()[i] - f.values()[j]).abs();
                    assert!(lhs <= 2.0 * seminorm * d * (1.0 + 1e-12), "case {case}: {lhs} > 2·{seminorm}·{d}");
                }
            }
        }
    }
}
