//! Fault-tolerant field-oriented control of a permanent-magnet synchronous
//! generator fed by a two-level converter with an open-switch fault.
//!
//! The crate contains the machine model, an ideal converter with its
//! open-switch voltage tables, space-vector modulation, the current
//! controller with its fault-tolerant extensions, a fixed-step closed-loop
//! simulator and harmonic analysis utilities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod controller;
pub mod converter;
pub mod error;
pub mod frames;
pub mod modulation;
pub mod ode;
pub mod pmsm;
pub mod presets;
pub mod scenario;
pub mod simulator;
pub mod trace;

pub use error::{AnalysisError, ConfigError, SimError};
pub use simulator::{run, ControlStage, Feature, Features, LoadMode, SimConfig, TimelineEvent};
pub use trace::{Trace, TraceRecord};
