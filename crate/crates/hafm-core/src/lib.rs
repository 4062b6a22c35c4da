//! Pitch-adaptive Gabor analysis with harmonic-aligned frame masks.
//!
//! The crate builds non-stationary Gabor transforms whose frequency grid
//! follows a fundamental-frequency contour, reconstructs signals through the
//! painless-case canonical dual, and estimates complex frame masks that map
//! one voiced signal's coefficients onto another's for comparison and
//! conversion.

pub mod error;
pub mod eval;
pub mod f0;
pub mod features;
pub mod mask;
pub mod nsgt;
pub mod signal;
pub mod wav;
pub mod window;

pub use error::{Error, Result};
pub use eval::{EvalConfig, EvalReport, SyntheticSpeaker};
pub use f0::{F0Point, F0Track};
pub use features::{FeatureMapping, FeatureVector, PairingMode, PairingPolicy};
pub use mask::{AlignedCoefficients, FrameMask, MaskEstimationConfig};
pub use nsgt::{NsgtPlan, RaggedCoefficients};
pub use signal::Signal;
pub use window::Window;
