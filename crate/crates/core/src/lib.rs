//! Entanglement certification with rotationally covariant polarization
//! detectors.

pub mod certify;
pub mod compton;
pub mod error;
pub mod fit;
pub mod format;
pub mod povm;
pub mod qubit;
pub mod record;
pub mod sdp;
pub mod semidi;
pub mod states;
pub mod steering;

pub use error::{Error, Result};
