//! Smart-home activity pipeline: inertial preprocessing and features,
//! forward-only neural inference, ambient sensor ingestion, single-person
//! occupancy, contextual activity fusion, priority-based window labelling,
//! day/week profiling, and a synthetic household simulator.

pub mod ambient;
pub mod error;
pub mod features;
pub mod fusion;
pub mod labelling;
pub mod nn;
pub mod occupancy;
pub mod patterns;
pub mod pipeline;
pub mod signal;
pub mod sim;

pub use error::{Error, Result};
