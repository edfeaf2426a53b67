//! Co-evolutionary SIR dynamics on dense dynamic random graphs.
//!
//! The crate has three computational layers that share the model types in
//! [`model`]:
//!
//! * [`sim`]: exact event-driven simulation of the finite-`n` process (and of
//!   the mimicking process driven by a deterministic force of infection);
//! * [`limit`]: the deterministic large-population limit, an age-structured
//!   system coupled to the edge-connection kernel `H`;
//! * [`graphon`]: empirical and limiting graphons and the distances used to
//!   compare them.
//!
//! [`analysis`] holds the closed-form epidemic summaries (R0, final size,
//! peaks) and [`config`] the scenario description shared by all of them.

pub mod analysis;
pub mod config;
pub mod error;
pub mod format;
pub mod graphon;
pub mod limit;
pub mod model;
pub mod sim;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
