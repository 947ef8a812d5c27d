//! Dyadic moment decay of the transition density:
//!
//! ```text
//! S_j = ∫₀ᵗ ∫ |x|^β |Δⱼ p_{s,t}(x)| dx ds,
//! ```
//!
//! expected to decay like 2^{−(α+β)j}.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::kernel::density::DensityEstimate;
use crate::littlewood_paley::{block_from_spectrum, DyadicPartition};

/// ∫ |x|^β |Δⱼ p(x)| dx for one density, by the grid Riemann sum.
pub fn block_moment(density: &DensityEstimate, j: usize, beta: f64, partition: &DyadicPartition) -> Result<f64> {
    let grid = density.grid();
    grid.ensure_same(partition.grid())?;
    if j > partition.j_max() {
        return Err(Error::domain(format!("block {j} exceeds j_max = {}", partition.j_max())));
    }
    let block = block_from_spectrum(&density.spectrum, partition, j);
    let h_d = grid.spacing().powi(grid.dim() as i32);
    Ok(block
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let r = norm(&grid.point(i));
            let w = if beta == 0.0 { 1.0 } else { r.powf(beta) };
            w * v.abs()
        })
        .sum::<f64>()
        * h_d)
}

/// Trapezoid rule in s of the block moments of `densities` (one per s-node,
/// any order, all sharing the grid and the end time t).
pub fn cru_statistic(densities: &[DensityEstimate], j: usize, beta: f64, partition: &DyadicPartition) -> Result<f64> {
    if densities.len() < 2 {
        return Err(Error::validation("the s-integral needs at least two densities"));
    }
    if !(beta >= 0.0) {
        return Err(Error::domain(format!("β must be ≥ 0, got {beta}")));
    }
    if let Some(alpha) = densities.iter().find_map(|d| d.alpha) {
        if beta >= alpha {
            return Err(Error::domain(format!("β = {beta} ≥ α = {alpha}: the |x|^β moment diverges")));
        }
    }
    let t = densities[0].t;
    if densities.iter().any(|d| d.t != t) {
        return Err(Error::validation("densities must share the end time t"));
    }
    let mut nodes = densities
        .iter()
        .map(|d| Ok((d.s, block_moment(d, j, beta, partition)?)))
        .collect::<Result<Vec<_>>>()?;
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(nodes.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum())
}

/// Least-squares line through (j, log₂ v_j).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_dyadic_decay(values: &[(usize, f64)]) -> Result<DecayFit> {
    if values.len() < 3 {
        return Err(Error::validation(format!("need at least 3 points, got {}", values.len())));
    }
    if let Some((j, v)) = values.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("value at j = {j} is {v}, not positive")));
    }
    let n = values.len() as f64;
    let xs: Vec<f64> = values.iter().map(|(j, _)| *j as f64).collect();
    let ys: Vec<f64> = values.iter().map(|(_, v)| v.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::validation("all points share the same j"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(DecayFit { slope, intercept, r2 })
}

/// One row of a CRU table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CruRow {
    pub j: usize,
    pub statistic: f64,
    pub stderr: f64,
}

/// CSV with header `j,statistic,stderr`.
pub fn write_cru_table(rows: &[CruRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "j,statistic,stderr")?;
    for r in rows {
        writeln!(w, "{},{:?},{:?}", r.j, r.statistic, r.stderr)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridFunction, TorusGrid};
    use crate::littlewood_paley::build_dyadic_partition;
    use std::f64::consts::PI;

    #[test]
    fn exact_log_linear_data() {
        let v: Vec<(usize, f64)> = (2..=6).map(|j| (j, 8.0 * 2f64.powf(-1.8 * j as f64))).collect();
        let fit = fit_dyadic_decay(&v).unwrap();
        assert!((fit.slope + 1.8).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-14);
        assert!(matches!(fit_dyadic_decay(&[(1, 1.0), (2, 0.0), (3, 1.0)]), Err(Error::Domain(_))));
        assert!(fit_dyadic_decay(&[(1, 1.0), (2, 0.5)]).is_err());
    }

    #[test]
    fn noisy_halving() {
        let v: Vec<(usize, f64)> =
            (1..=8).map(|j| (j, 2f64.powi(-(j as i32)) * (1.0 + 1e-3 * ((j * 7) as f64).sin()))).collect();
        let fit = fit_dyadic_decay(&v).unwrap();
        // |log₂(1 ± 1e-3)| ≤ 1.45e-3 per point bounds the slope error
        assert!((fit.slope + 1.0).abs() < 1.5e-3);
    }

    fn gaussian(grid: TorusGrid, var: f64) -> GridFunction {
        GridFunction::from_fn(grid, |x| (-x[0] * x[0] / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
    }

    #[test]
    fn empty_block_gives_zero() {
        let grid = TorusGrid::new(1, 4.0 * PI, 1024).unwrap();
        let part = build_dyadic_partition(&grid).unwrap();
        // band-limited well below block 6 (|ξ| ≥ 32)
        let p = GridFunction::from_fn(grid, |x| (1.0 + (x[0] / 4.0).cos()) / (8.0 * PI));
        let ds: Vec<_> = [0.0, 0.5, 1.0].iter().map(|s| DensityEstimate::from_density(p.clone(), *s, 1.0, None)).collect();
        assert!(cru_statistic(&ds, 6, 0.0, &part).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_family_decays_fast() {
        let grid = TorusGrid::new(1, 4.0 * PI, 1024).unwrap();
        let part = build_dyadic_partition(&grid).unwrap();
        let ds: Vec<_> =
            [0.0, 0.5, 1.0].iter().map(|s| DensityEstimate::from_density(gaussian(grid, 1.0), *s, 1.0, None)).collect();
        let s: Vec<f64> = (1..=4).map(|j| cru_statistic(&ds, j, 0.0, &part).unwrap()).collect();
        // brute-force oracle for block 1
        let block = block_from_spectrum(&ds[0].spectrum, &part, 1);
        let brute: f64 = block.values().iter().map(|v| v.abs()).sum::<f64>() * grid.spacing();
        assert!((s[0] - brute).abs() < 1e-12 * brute);
        for w in s.windows(2) {
            if w[1] > 1e-13 {
                assert!(w[0] / w[1] >= 4.0, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn beta_gate() {
        let grid = TorusGrid::new(1, 4.0 * PI, 256).unwrap();
        let part = build_dyadic_partition(&grid).unwrap();
        let ds: Vec<_> = [0.0, 1.0]
            .iter()
            .map(|s| DensityEstimate::from_density(gaussian(grid, 1.0), *s, 1.0, Some(1.5)))
            .collect();
        assert!(matches!(cru_statistic(&ds, 2, 1.6, &part), Err(Error::Domain(_))));
        assert!(cru_statistic(&ds, 2, 0.3, &part).is_ok());
    }
}
