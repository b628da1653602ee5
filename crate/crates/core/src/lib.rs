//! Fresnel-zone spot-beamfocusing simulator for modular programmable
//! metasurface arrays.
//!
//! The crate models a planar phased array split into rectangular sub-array
//! modules, a multipath indoor channel (direct path plus first-order wall
//! images), quantized phase-shifter beamforming, and a distributed
//! reinforcement-learning optimizer: one revised-TD3 agent per module with
//! a k-nearest-neighbor refinement over the quantized action lattice,
//! followed by phase fusion of the converged per-module vectors into the
//! full-array beamforming vector.
//!
//! Everything learnable can be checked against the matched-phase
//! (perfect-CSI) oracle in [`beamforming`], which is also the normalizer
//! for all reported power fractions.

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod knn;
pub mod nn;
pub mod orchestrator;
pub mod selfcheck;
pub mod td3;
pub mod vec3;

pub use beamforming::{BeamVector, FocusMetrics, PhaseCodebook, PowerField, SignalModel};
pub use channel::{ChannelParams, ChannelVector, PathSet, RoomEnv};
pub use config::{ExperimentConfig, RunManifest};
pub use error::{Error, Result};
pub use geometry::{ArrayLayout, FresnelBounds, Zone};
pub use knn::{Neighbor, NeighborList};
pub use nn::{Adam, DenseNet, Layer};
pub use td3::{Agent, AgentMode, Experience, ReplayBuffer, Td3Hyper};
pub use vec3::Vec3;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
