//! Virtual resource distillation of coherence and entanglement.
//!
//! A quasi-channel Γ̃ = C(p₊Γ₊ − p₋Γ₋) is simulated by sampling branches and
//! reweighting outcomes, so Tr[O Γ̃(ρ)] can be estimated for states Γ̃(ρ) that
//! no physical free operation would produce from ρ.

pub mod channels;
pub mod error;
pub mod estimator;
pub mod metrics;
pub mod numcore;
pub mod optics;
pub mod protocols;
pub mod rng;
pub mod states;
pub mod teleport;
pub mod tomography;

pub use error::{Result, VrdError};
