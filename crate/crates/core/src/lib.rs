//! Spiking actor networks trained with TD3 and surrogate gradients.

pub mod actor;
pub mod checkpoint;
pub mod critic;
pub mod envs;
pub mod error;
pub mod experiment;
pub mod gradcheck;
pub mod replay;
pub mod surrogate;
pub mod td3;
pub mod tensor;

pub use error::{Error, Result};
