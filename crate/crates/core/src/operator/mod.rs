//! The nonlocal operator L, the drift term, frozen-coefficient multipliers and
//! the cutoff commutator.

pub mod coefficients;
pub mod cutoff;
pub mod drift;
pub mod frozen;
pub mod nonlocal;

pub use coefficients::{
    catalog_drift, catalog_kappa, catalog_sigma, catalog_source, CatalogCall, CoefficientField, Drift, Kappa, Sigma,
    Source,
};
pub use cutoff::{commutator_with_cutoff, make_cutoff, Cutoff};
pub use drift::apply_drift;
pub use frozen::{frozen_multiplier, frozen_symbol, frozen_symbol_apply, FrozenKappa};
pub use nonlocal::{
    apply_directional, apply_nonlocal, directional_applicable, far_field_symbol, NonlocalOperator, QuadratureScheme,
};
