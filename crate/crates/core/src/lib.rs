//! Bootstrap particle filtering with a block-adaptive number of particles.
//!
//! The filter runs in blocks of `W` time steps. At every step it draws `K`
//! fictitious observations from the particle approximation of the one-step
//! predictive density and records the rank of the actual observation among
//! them. When the filter is accurate those ranks are i.i.d. uniform on
//! `{0, ..., K}`; at the end of each block a statistical test on the ranks
//! decides whether to grow, shrink or keep the particle population.
//!
//! The crate is `no_std` (it needs `alloc`). All randomness flows through a
//! caller supplied [`rand::Rng`], so runs are reproducible given a seeded
//! generator.
//!
//! Modules:
//! - [`model`]: the state-space model trait and the bundled benchmark models.
//! - [`filter`]: particle sets, propagation, weighting and resampling.
//! - [`diagnostics`]: rank and predictive-CDF statistics and their tests.
//! - [`adapt`]: the block-adaptive controller.
//! - [`oracle`]: exact reference computations (Kalman filter, exact samplers).
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adapt;
pub mod diagnostics;
mod error;
pub mod filter;
pub mod math;
pub mod model;
pub mod oracle;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{
    GrowthModel, GrowthParams, Lgss, LgssParams, Lorenz63, Lorenz63Params, StateSpaceModel,
    StateVector,
};
