//! Joint power, power-splitting and trajectory optimization for a UAV relay that
//! powers its transmitter purely from energy harvested off the source signal.
//!
//! The crate is generic over the floating point type (see [`Scalar`]); the
//! aliases at the bottom of this file fix it to `f64` or `f32`.

pub mod baselines;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod profile;
pub mod scalar;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{Profile, Protocol, Scenario, ScenarioParams, SlotGeometry, Trajectory};
pub use scalar::{Point, Scalar};

pub type ScenarioF64 = Scenario<f64>;
pub type ScenarioParamsF64 = ScenarioParams<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type ProfileF64 = Profile<f64>;
pub type SlotGeometryF64 = SlotGeometry<f64>;

pub type ScenarioF32 = Scenario<f32>;
pub type ScenarioParamsF32 = ScenarioParams<f32>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type ProfileF32 = Profile<f32>;
pub type SlotGeometryF32 = SlotGeometry<f32>;
