//! Dyadic frequency decomposition on the torus and the norms built on it.

mod norms;

pub use norms::{holder_norm, holder_norm_with, local_holder_seminorm, local_holder_seminorm_with, ShiftOptions};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::grid::{GridFunction, TorusGrid};
use crate::spectral::Spectrum;

#[inline]
fn edge(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth radial profile: 1 on [0, 1], 0 on [2, ∞), C^∞ transition in between.
pub fn bump(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = edge(2.0 - r);
        a / (a + edge(r - 1.0))
    }
}

/// φ₀(ξ) = bump(|ξ|).
#[inline]
pub fn low_pass(abs_xi: f64) -> f64 {
    bump(abs_xi)
}

/// φⱼ at frequency modulus `abs_xi`.
pub fn cutoff(j: usize, abs_xi: f64) -> f64 {
    if j == 0 {
        low_pass(abs_xi)
    } else {
        let s = 2f64.powi(-(j as i32));
        low_pass(s * abs_xi) - low_pass(2.0 * s * abs_xi)
    }
}

/// The cutoffs φ₀, …, φ_{j_max} tabulated on the discrete frequencies of a grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: TorusGrid,
    j_max: usize,
    cutoffs: Vec<Vec<f64>>,
}

impl DyadicPartition {
    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    #[inline]
    pub fn j_max(&self) -> usize {
        self.j_max
    }
    pub fn cutoff(&self, j: usize) -> &[f64] {
        &self.cutoffs[j]
    }
    pub fn cutoffs(&self) -> &[Vec<f64>] {
        &self.cutoffs
    }
}

/// Partition with j_max the largest j such that 2^{j−1} ≤ max|ξ| on the grid.
pub fn build_dyadic_partition(grid: &TorusGrid) -> Result<DyadicPartition> {
    if grid.n() < 16 {
        return Err(Error::config(format!("dyadic partition needs N ≥ 16, got {}", grid.n())));
    }
    let top = grid.max_frequency();
    let mut j_max = 0usize;
    while 2f64.powi(j_max as i32) <= top {
        j_max += 1;
    }
    let moduli: Vec<f64> = (0..grid.len()).map(|i| norm(&grid.frequency(i))).collect();
    let cutoffs = (0..=j_max)
        .map(|j| moduli.iter().map(|r| cutoff(j, *r)).collect())
        .collect();
    Ok(DyadicPartition { grid: *grid, j_max, cutoffs })
}

/// The block images Δⱼf of a function.
#[derive(Debug, Clone)]
pub struct BlockSet {
    pub source: GridFunction,
    pub blocks: Vec<GridFunction>,
}

impl BlockSet {
    /// ∑ⱼ Δⱼf.
    pub fn reconstruct(&self) -> GridFunction {
        let mut acc = GridFunction::zeros(*self.source.grid());
        for b in &self.blocks {
            for (a, v) in acc.values_mut().iter_mut().zip(b.values()) {
                *a += v;
            }
        }
        acc
    }

    /// Fattened block Δ̃ⱼ = Δ_{j−1} + Δⱼ + Δ_{j+1}.
    pub fn fattened(&self, j: usize) -> GridFunction {
        let lo = j.saturating_sub(1);
        let hi = (j + 1).min(self.blocks.len() - 1);
        let mut acc = GridFunction::zeros(*self.source.grid());
        for b in &self.blocks[lo..=hi] {
            for (a, v) in acc.values_mut().iter_mut().zip(b.values()) {
                *a += v;
            }
        }
        acc
    }

    /// 2^{js}‖Δⱼf‖_∞ for every block.
    pub fn profile(&self, s: f64) -> Vec<f64> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(j, b)| 2f64.powf(j as f64 * s) * b.sup_norm())
            .collect()
    }
}

/// Δⱼ applied to a precomputed spectrum.
pub fn block_from_spectrum(spec: &Spectrum, partition: &DyadicPartition, j: usize) -> GridFunction {
    let phi = partition.cutoff(j);
    spec.multiplied(|i, _| phi[i].into()).to_function()
}

pub fn block_decompose(f: &GridFunction, partition: &DyadicPartition) -> Result<BlockSet> {
    f.grid().ensure_same(partition.grid())?;
    let spec = Spectrum::of(f);
    let blocks = (0..=partition.j_max())
        .into_par_iter()
        .map(|j| block_from_spectrum(&spec, partition, j))
        .collect();
    Ok(BlockSet { source: f.clone(), blocks })
}

/// sup_j 2^{js}‖Δⱼf‖_∞.
pub fn besov_norm(f: &GridFunction, s: f64, partition: &DyadicPartition) -> Result<f64> {
    if !(s > -2.0 && s < 3.0) {
        return Err(Error::domain(format!("Besov index must lie in (−2, 3), got {s}")));
    }
    let blocks = block_decompose(f, partition)?;
    Ok(blocks.profile(s).into_iter().fold(0.0, f64::max))
}

/// ‖∇^kΔⱼf‖_∞ / (2^{kj}‖Δⱼf‖_∞), with |∇^k| the Euclidean (Hilbert-Schmidt for k = 2) norm.
pub fn bernstein_ratio(f: &GridFunction, j: usize, k: usize, partition: &DyadicPartition) -> Result<f64> {
    f.grid().ensure_same(partition.grid())?;
    if k > 2 {
        return Err(Error::domain(format!("derivative order must be 0, 1 or 2, got {k}")));
    }
    if j > partition.j_max() {
        return Err(Error::domain(format!("block {j} exceeds j_max = {}", partition.j_max())));
    }
    let spec = Spectrum::of(f);
    let block = block_from_spectrum(&spec, partition, j);
    let base = block.sup_norm();
    if !(base > 1e-12 * f.sup_norm()) {
        return Err(Error::domain(format!("block {j} vanishes; ratio undefined")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let bspec = Spectrum::of(&block);
    let dim = f.grid().dim();
    let mut sq = vec![0.0; f.grid().len()];
    let mut orders = Vec::new();
    if k == 1 {
        for a in 0..dim {
            let mut o = [0, 0];
            o[a] = 1;
            orders.push(o);
        }
    } else {
        for a in 0..dim {
            for b in 0..dim {
                let mut o = [0, 0];
                o[a] += 1;
                o[b] += 1;
                orders.push(o);
            }
        }
    }
    for o in orders {
        let d = bspec.derivative(o);
        for (s, v) in sq.iter_mut().zip(d.values()) {
            *s += v * v;
        }
    }
    let top = sq.into_iter().fold(0.0, f64::max).sqrt();
    Ok(top / (2f64.powi((k * j) as i32) * base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(1, PI, n).unwrap()
    }

    #[test]
    fn partition_values() {
        assert_eq!(low_pass(1.0), 1.0);
        assert_eq!(low_pass(2.5), 0.0);
        assert_eq!(cutoff(5, 32.0), 1.0);
        let p = build_dyadic_partition(&grid(64)).unwrap();
        // Nyquist 32 = 2^5 ⇒ j_max = 6
        assert_eq!(p.j_max(), 6);
        assert!(build_dyadic_partition(&grid(8)).is_err());
    }

    #[test]
    fn partial_sums_telescope_exactly() {
        let g = TorusGrid::new(2, PI, 32).unwrap();
        let p = build_dyadic_partition(&g).unwrap();
        for i in 0..g.len() {
            let r = norm(&g.frequency(i));
            let mut s = 0.0;
            for j in 0..=p.j_max() {
                s += p.cutoff(j)[i];
                let expect = low_pass(2f64.powi(-(j as i32)) * r);
                assert!((s - expect).abs() < 1e-15);
            }
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_harmonic_occupies_one_block() {
        let g = grid(4096);
        let p = build_dyadic_partition(&g).unwrap();
        let f = GridFunction::from_fn(g, |x| (32.0 * x[0]).cos());
        let bs = block_decompose(&f, &p).unwrap();
        for (j, b) in bs.blocks.iter().enumerate() {
            if j == 5 {
                assert!(b.distance(&f).unwrap() < 1e-10);
            } else {
                assert!(b.sup_norm() < 1e-10, "block {j}");
            }
        }
        let v = besov_norm(&f, 0.5, &p).unwrap();
        assert!((v - 2f64.powf(2.5)).abs() < 1e-9);
        assert!((bernstein_ratio(&f, 5, 1, &p).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(bernstein_ratio(&f, 5, 0, &p).unwrap(), 1.0);
        assert!(bernstein_ratio(&f, 2, 1, &p).is_err());
    }

    #[test]
    fn weierstrass_profile() {
        let g = grid(4096);
        let p = build_dyadic_partition(&g).unwrap();
        let s = 0.5;
        let f = GridFunction::from_fn(g, |x| (0..=10).map(|j| 2f64.powf(-s * j as f64) * (2f64.powi(j) * x[0]).cos()).sum());
        let bs = block_decompose(&f, &p).unwrap();
        let prof = bs.profile(s);
        for (j, v) in prof.iter().enumerate().take(10).skip(2) {
            assert!((v - 1.0).abs() < 1e-9, "j={j}: {v}");
        }
        let b = besov_norm(&f, s, &p).unwrap();
        assert!((1.0..=1.5).contains(&b));
    }
}
