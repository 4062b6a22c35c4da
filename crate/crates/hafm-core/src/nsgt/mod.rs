//! Pitch-dependent non-stationary Gabor transforms.
//!
//! A plan fixes the sampling lattice: a constant time hop `a` and, per frame
//! `n`, a frequency hop `b_n` derived from the f0 contour so that harmonic
//! partials land on fixed channel multiples. Transforms evaluate the analysis
//! inner products and the painless-case dual synthesis on that lattice.

mod plan;
mod transform;

pub mod nsgc;

pub use nsgc::{read_nsgc, read_nsgc_file, write_nsgc, write_nsgc_file};
pub use plan::{
    choose_padded_length, compute_freq_hop, padded_dims, snap_hop_to_divisor, NsgtPlan,
};
pub use transform::{
    coefficient_energy_identity, frame_bounds, frame_diagonal, is_painless, nsgt_forward,
    nsgt_forward_naive, nsgt_inverse, FrameBounds, FrameDiagonal, RaggedCoefficients,
};
