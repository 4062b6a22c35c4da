//! Harmonic-aligned frame masks: alignment of two coefficient sets onto a
//! common grid, mask estimation, and mask application.
//!
//! Ragged coefficient sets are periodically extended along the channel axis
//! to a common height so that two systems with different per-frame channel
//! counts become comparable matrices. A mask is an entrywise complex
//! transfer function between the two; the Tikhonov estimator solves the
//! regularized least-squares objective
//! `||C_B - sigma . C_A||^2 + mu ||sigma - sigma_ref||^2` in closed form.
//! Applying a mask folds the masked extended rows back to the target
//! system's native channel counts (averaging each residue class, so that
//! periodic duplicates collapse to their source row) before dual synthesis.

mod file;

pub use file::{read_hafm, read_hafm_file, write_hafm, write_hafm_file, MaskFile};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nsgt::{nsgt_inverse, NsgtPlan, RaggedCoefficients};
use crate::signal::Signal;
use crate::window::Window;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// How the per-signal harmonic scaling factor `p` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentMode {
    /// `p = 1` for both signals: harmonics align one-to-one.
    UnitP,
    /// `p = round(anchor_hz / mean_f0)`: the neighborhood of a fixed anchor
    /// frequency is aligned across signals with different pitch.
    Anchor,
}

/// Alignment parameters shared by a paired analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentParams {
    pub mode: AlignmentMode,
    /// Anchor frequency in Hz; only consulted in `Anchor` mode and must stay
    /// below the Nyquist frequency of the signals it is applied to.
    pub anchor_hz: f64,
    pub q: usize,
}

/// Harmonic scaling factor for one signal: 1 in unit mode, otherwise the
/// anchor frequency divided by the signal's mean f0, rounded half away from
/// zero and clamped to at least 1.
pub fn choose_p(params: &AlignmentParams, mean_f0_hz: f64) -> usize {
    match params.mode {
        AlignmentMode::UnitP => 1,
        AlignmentMode::Anchor => ((params.anchor_hz / mean_f0_hz).round() as usize).max(1),
    }
}

/// Coefficients on the common `target_m x N` grid, alongside the native
/// channel counts they were extended from.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedCoefficients {
    matrix: Array2<Complex64>,
    native_m: Vec<usize>,
    plan: NsgtPlan,
}

impl AlignedCoefficients {
    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn native_channel_counts(&self) -> &[usize] {
        &self.native_m
    }

    pub fn plan(&self) -> &NsgtPlan {
        &self.plan
    }

    /// Common grid height (rows of the matrix).
    pub fn target_m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn frame_count(&self) -> usize {
        self.matrix.ncols()
    }

    /// Drop the periodic extension, recovering the original ragged set.
    pub fn truncate_to_native(&self) -> Result<RaggedCoefficients> {
        let per_frame = self
            .native_m
            .iter()
            .enumerate()
            .map(|(n, &m)| (0..m).map(|r| self.matrix[[r, n]]).collect())
            .collect();
        RaggedCoefficients::new(per_frame, self.plan.clone())
    }
}

/// Height of the common grid for a pair of plans: the larger of the two
/// maximal channel counts.
pub fn common_channel_count(plan_a: &NsgtPlan, plan_b: &NsgtPlan) -> usize {
    plan_a.max_channel_count().max(plan_b.max_channel_count())
}

/// Periodically extend each frame's coefficients along the channel axis:
/// row `m` of column `n` is `c[m mod M_n][n]`. `target_m` must cover the
/// largest native count.
pub fn align_extend(
    coeffs: &RaggedCoefficients,
    target_m: usize,
) -> Result<AlignedCoefficients> {
    let plan = coeffs.plan().clone();
    let max_native = plan.max_channel_count();
    if target_m < max_native {
        return Err(Error::argument(format!(
            "target height {target_m} is below the largest native channel count {max_native}"
        )));
    }
    let n_frames = plan.frame_count();
    let matrix = Array2::from_shape_fn((target_m, n_frames), |(m, n)| {
        let frame = coeffs.frame(n);
        frame[m % frame.len()]
    });
    Ok(AlignedCoefficients {
        matrix,
        native_m: plan.channel_counts().to_vec(),
        plan,
    })
}

/// Complex mask on the common grid; all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMask {
    sigma: Array2<Complex64>,
}

impl FrameMask {
    pub fn new(sigma: Array2<Complex64>) -> Result<Self> {
        if let Some(bad) = sigma.iter().find(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::argument(format!("mask entry {bad} is not finite")));
        }
        Ok(FrameMask { sigma })
    }

    /// Mask holding `value` everywhere (e.g. the identity mask, 1).
    pub fn constant(rows: usize, cols: usize, value: Complex64) -> Self {
        FrameMask {
            sigma: Array2::from_elem((rows, cols), value),
        }
    }

    pub fn sigma(&self) -> &Array2<Complex64> {
        &self.sigma
    }

    pub fn rows(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn cols(&self) -> usize {
        self.sigma.ncols()
    }
}

/// Regularization target sigma_ref: the all-ones broadcast or a full matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskReference {
    Ones,
    Matrix(Array2<Complex64>),
}

impl MaskReference {
    /// Reference value at grid position `(m, n)`.
    pub fn value_at(&self, m: usize, n: usize) -> Complex64 {
        match self {
            MaskReference::Ones => ONE,
            MaskReference::Matrix(a) => a[[m, n]],
        }
    }

    fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if let MaskReference::Matrix(a) = self {
            if a.dim() != (rows, cols) {
                return Err(Error::argument(format!(
                    "reference mask shape {:?} does not match coefficients ({rows}, {cols})",
                    a.dim()
                )));
            }
        }
        Ok(())
    }
}

/// Estimation settings: regularization weight and reference mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskEstimationConfig {
    mu: f64,
    sigma_ref: MaskReference,
}

impl MaskEstimationConfig {
    pub fn new(mu: f64, sigma_ref: MaskReference) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::argument(format!(
                "regularization weight must be finite and nonnegative, got {mu}"
            )));
        }
        Ok(MaskEstimationConfig { mu, sigma_ref })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma_ref(&self) -> &MaskReference {
        &self.sigma_ref
    }
}

impl Default for MaskEstimationConfig {
    /// Empirical defaults: `mu = 1e-7`, all-ones reference.
    fn default() -> Self {
        MaskEstimationConfig {
            mu: 1e-7,
            sigma_ref: MaskReference::Ones,
        }
    }
}

fn ensure_same_shape(ca: &AlignedCoefficients, cb: &AlignedCoefficients) -> Result<()> {
    if ca.matrix.dim() != cb.matrix.dim() {
        return Err(Error::argument(format!(
            "coefficient shapes differ: {:?} vs {:?}",
            ca.matrix.dim(),
            cb.matrix.dim()
        )));
    }
    Ok(())
}

/// Raw ratio estimate with a guard; invalid entries (|c_A| <= epsilon) are
/// set to 1 and reported in the companion validity map.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMaskEstimate {
    pub mask: FrameMask,
    /// `true` where the ratio was formed, `false` where the guard fired.
    pub validity: Array2<bool>,
}

pub fn estimate_mask_naive(
    ca: &AlignedCoefficients,
    cb: &AlignedCoefficients,
    epsilon: f64,
) -> Result<NaiveMaskEstimate> {
    ensure_same_shape(ca, cb)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::argument(format!(
            "guard epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    let mut validity = Array2::from_elem(ca.matrix.dim(), true);
    let sigma = Array2::from_shape_fn(ca.matrix.dim(), |(m, n)| {
        let a = ca.matrix[[m, n]];
        if a.norm() > epsilon {
            cb.matrix[[m, n]] / a
        } else {
            validity[[m, n]] = false;
            ONE
        }
    });
    Ok(NaiveMaskEstimate {
        mask: FrameMask::new(sigma)?,
        validity,
    })
}

/// Single-entry closed-form Tikhonov solution; where `c_A` vanishes the
/// algebraic limit `mu * ref / mu = ref` is taken exactly.
pub(crate) fn tikhonov_value(
    ca: Complex64,
    cb: Complex64,
    sigma_ref: Complex64,
    mu: f64,
) -> Complex64 {
    if ca == Complex64::new(0.0, 0.0) {
        sigma_ref
    } else {
        (ca.conj() * cb + mu * sigma_ref) / (ca.norm_sqr() + mu)
    }
}

/// Closed-form minimizer of the regularized objective, entrywise:
/// `sigma = (conj(C_A) . C_B + mu sigma_ref) / (|C_A|^2 + mu)`.
pub fn estimate_mask_tikhonov(
    ca: &AlignedCoefficients,
    cb: &AlignedCoefficients,
    config: &MaskEstimationConfig,
) -> Result<FrameMask> {
    ensure_same_shape(ca, cb)?;
    config.sigma_ref.check_shape(ca.target_m(), ca.frame_count())?;
    if config.mu <= 0.0 {
        return Err(Error::argument(
            "Tikhonov estimation needs mu > 0; use the naive estimator for mu = 0",
        ));
    }
    let sigma = Array2::from_shape_fn(ca.matrix.dim(), |(m, n)| {
        tikhonov_value(
            ca.matrix[[m, n]],
            cb.matrix[[m, n]],
            config.sigma_ref.value_at(m, n),
            config.mu,
        )
    });
    FrameMask::new(sigma)
}

/// Value of the estimation objective
/// `||C_B - sigma . C_A||_F^2 + mu ||sigma - sigma_ref||_F^2`.
pub fn mask_objective(
    sigma: &FrameMask,
    ca: &AlignedCoefficients,
    cb: &AlignedCoefficients,
    config: &MaskEstimationConfig,
) -> Result<f64> {
    ensure_same_shape(ca, cb)?;
    if sigma.sigma.dim() != ca.matrix.dim() {
        return Err(Error::argument(format!(
            "mask shape {:?} does not match coefficients {:?}",
            sigma.sigma.dim(),
            ca.matrix.dim()
        )));
    }
    config.sigma_ref.check_shape(ca.target_m(), ca.frame_count())?;
    let mut fit = 0.0;
    let mut reg = 0.0;
    for ((m, n), s) in sigma.sigma.indexed_iter() {
        fit += (cb.matrix[[m, n]] - s * ca.matrix[[m, n]]).norm_sqr();
        reg += (s - config.sigma_ref.value_at(m, n)).norm_sqr();
    }
    Ok(fit + config.mu * reg)
}

/// Convert through a mask: multiply the aligned source coefficients
/// entrywise, fold each column back to the target system's native channel
/// count (mean over each residue class, so periodic duplicates collapse to
/// their source row and the identity mask reduces to perfect
/// reconstruction), then synthesize with the target plan's dual.
pub fn apply_mask(
    sigma: &FrameMask,
    ca: &AlignedCoefficients,
    target_plan: &NsgtPlan,
    window: &Window,
) -> Result<Signal> {
    if sigma.sigma.dim() != ca.matrix.dim() {
        return Err(Error::argument(format!(
            "mask shape {:?} does not match coefficients {:?}",
            sigma.sigma.dim(),
            ca.matrix.dim()
        )));
    }
    if target_plan.frame_count() != ca.frame_count() {
        return Err(Error::argument(format!(
            "target plan has {} frames, coefficients have {}",
            target_plan.frame_count(),
            ca.frame_count()
        )));
    }
    let rows = ca.target_m();
    if target_plan.max_channel_count() > rows {
        return Err(Error::argument(format!(
            "target channel count {} exceeds the aligned grid height {rows}",
            target_plan.max_channel_count()
        )));
    }
    let per_frame: Vec<Vec<Complex64>> = target_plan
        .channel_counts()
        .iter()
        .enumerate()
        .map(|(n, &m_b)| {
            let mut folded = vec![Complex64::new(0.0, 0.0); m_b];
            let mut counts = vec![0usize; m_b];
            for m in 0..rows {
                folded[m % m_b] += sigma.sigma[[m, n]] * ca.matrix[[m, n]];
                counts[m % m_b] += 1;
            }
            folded
                .into_iter()
                .zip(counts)
                .map(|(z, k)| z / k as f64)
                .collect()
        })
        .collect();
    let coeffs = RaggedCoefficients::new(per_frame, target_plan.clone())?;
    nsgt_inverse(&coeffs, target_plan, window)
}
