//! Monte Carlo transition kernels: path sampling, density estimation and the
//! dyadic moment-decay statistic.

pub mod cru;
pub mod density;
pub mod sampler;

pub use cru::{block_moment, cru_statistic, fit_dyadic_decay, write_cru_table, CruRow, DecayFit};
pub use density::{empirical_characteristic_function, estimate_density, DensityEstimate, DensityOptions, Estimator};
pub use sampler::{jump_counts, sample_increments, sample_x, SampleBatch, SamplerConfig, SmallJumpMode};
