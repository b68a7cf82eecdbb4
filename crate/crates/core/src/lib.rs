//! Collective spontaneous emission of disordered atom arrays in a bidirectional waveguide.
//!
//! Three trajectory engines (DTWA in full and eliminated form, QSD with a product-state
//! closure) are cross-checked against exact oracles and analytic bounds.

pub mod error;
pub mod model;
pub mod stream;
pub mod observables;
pub mod dtwa;
pub mod qsdmf;
pub mod exact;
pub mod bounds;
pub mod harness;
