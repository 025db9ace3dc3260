//! Pinching-antenna downlink serving a semantic user and a bit user with NOMA.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this file pin the common `f64` instantiations.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod multi_opt;
pub mod noma;
pub mod oracle;
pub mod params;
pub mod scalar;
pub mod semantics;
pub mod sim;
pub mod single_opt;
pub mod verify;

pub use baselines::{solve, Scheme};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Config = params::ScenarioConfig<f64>;
pub type Config32 = params::ScenarioConfig<f32>;
pub type Point = channel::Point3<f64>;
pub type UserPair = channel::Users<f64>;
pub type Gain = channel::ComplexGain<f64>;
pub type Layout = channel::SingleWgLayout<f64>;
pub type MultiLayout = channel::MultiWgLayout<f64>;
pub type AoState = single_opt::AoState<f64>;
pub type MultiAoState = multi_opt::MultiAoState<f64>;
pub type Realization = sim::RealizationResult<f64>;
