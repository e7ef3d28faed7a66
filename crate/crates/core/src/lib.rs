//! Channel steering: channel extensions, channel assemblages, and
//! semidefinite certificates of (un)steerability.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod par;
pub mod sdp;
pub mod steering;
pub mod sweep;
pub mod tomography;
pub mod tol;

pub use error::{Error, Result};
