use proptest::prelude::*;

use stablelab::geometry::IDENTITY;
use stablelab::grid::TorusGrid;
use stablelab::kernel::{cru_statistic, estimate_density, sample_x, DensityEstimate, DensityOptions, SampleBatch, SamplerConfig, SmallJumpMode};
use stablelab::levy::StableLevyMeasure;
use stablelab::littlewood_paley::build_dyadic_partition;
use stablelab::operator::FrozenKappa;

fn batch(alpha: f64, dim: usize, eps: f64, n: usize, seed: u64, t: f64) -> SampleBatch {
    let nu = StableLevyMeasure::standard(dim, alpha).unwrap();
    let sampler = SamplerConfig::new(eps, n, seed, SmallJumpMode::default_for(alpha)).unwrap();
    sample_x(&nu, &FrozenKappa::constant(1.0), &|_| IDENTITY, 0.0, t, &sampler).unwrap()
}

fn density(b: &SampleBatch, half_period: f64, n: usize) -> DensityEstimate {
    let grid = TorusGrid::new(b.dim, half_period, n).unwrap();
    estimate_density(b, &grid, &DensityOptions::default()).unwrap()
}

fn sup_gap(a: &[f64], b: &[f64], scale: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (scale * x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn batches_do_not_depend_on_thread_count(seed in any::<u64>(), alpha in 0.5..1.9f64, dim in 1usize..3) {
        let runs: Vec<Vec<f64>> = [1, 3, 8]
            .iter()
            .map(|&threads| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                pool.install(|| batch(alpha, dim, 0.05, 20_000, seed, 1.0).values().to_vec())
            })
            .collect();
        prop_assert!(runs.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn densities_are_self_similar() {
    let alpha = 1.5;
    let (n, samples, half_period) = (2048, 100_000, 128.0);
    let reference = density(&batch(alpha, 1, 0.05, samples, 1, 1.0), half_period, n);
    let replicate = density(&batch(alpha, 1, 0.05, samples, 2, 1.0), half_period, n);
    let noise = sup_gap(replicate.density.values(), reference.density.values(), 1.0);
    for (k, t) in [0.5f64, 2.0].into_iter().enumerate() {
        let scale = t.powf(1.0 / alpha);
        // the grid scales with t^{1/α}, so grid points correspond one to one
        let est = density(&batch(alpha, 1, 0.05, samples, 10 + k as u64, t), half_period * scale, n);
        let gap = sup_gap(est.density.values(), reference.density.values(), scale);
        assert!(gap <= 3.0 * noise, "t={t}: discrepancy {gap:e} vs noise {noise:e}");
    }
}

#[test]
fn cauchy_origin_density_is_robust_to_the_jump_cutoff() {
    let replicates = 8;
    let p0 = |eps: f64, seed: u64| {
        let est = density(&batch(1.0, 1, eps, 20_000, seed, 1.0), 4096.0, 16384);
        est.density.values()[est.density.grid().len() / 2]
    };
    let stats = |eps: f64, offset: u64| {
        let xs: Vec<f64> = (0..replicates).map(|r| p0(eps, offset + r)).collect();
        let mean = xs.iter().sum::<f64>() / replicates as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64;
        (mean, var / replicates as f64)
    };
    let (m1, v1) = stats(0.1, 100);
    let (m2, v2) = stats(0.05, 200);
    let width = 1.96 * (v1 + v2).sqrt();
    assert!((m1 - m2).abs() < width, "|{m1} − {m2}| ≥ {width}");
}

#[test]
fn moment_statistic_grows_with_the_time_range() {
    let alpha = 1.5;
    let grid = TorusGrid::new(1, 128.0, 2048).unwrap();
    let partition = build_dyadic_partition(&grid).unwrap();
    let nu = StableLevyMeasure::standard(1, alpha).unwrap();
    let densities: Vec<DensityEstimate> = [0.0, 0.3, 0.5, 0.7, 0.85, 0.95]
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let sampler = SamplerConfig::new(0.05, 10_000, 40 + k as u64, SmallJumpMode::Gaussian).unwrap();
            let b = sample_x(&nu, &FrozenKappa::constant(1.0), &|_| IDENTITY, s, 1.0, &sampler).unwrap();
            estimate_density(&b, &grid, &DensityOptions { min_coverage: 0.99, ..DensityOptions::default() }).unwrap()
        })
        .collect();
    for j in 1..=5 {
        for beta in [0.0, 0.3] {
            let partial: Vec<f64> = (2..=densities.len()).map(|m| cru_statistic(&densities[..m], j, beta, &partition).unwrap()).collect();
            assert!(partial.windows(2).all(|w| w[1] >= w[0]), "j={j} β={beta}: {partial:?}");
        }
    }
}
