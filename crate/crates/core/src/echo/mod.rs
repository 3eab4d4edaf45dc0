//! Broadcast synthesis and multi-glint echo simulation at one ear.

pub mod absorption;
pub mod bessel;
pub mod broadcast;
pub mod geometry;
pub mod model;
pub mod scene;

pub use absorption::AbsorptionModel;
pub use broadcast::{Broadcast, Window};
pub use geometry::{Ear, SonarGeometry, Vec3};
pub use model::{directivity_gain, echo_transfer, EchoModelConstants, EchoPath};
pub use scene::{matched_filter_delay, simulate_scene, Scene, Target, TimeSeries};
