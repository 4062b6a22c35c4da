//! Forward and inverse transforms on an `NsgtPlan` lattice.
//!
//! Analysis takes inner products with modulated, circularly shifted window
//! copies: `c[m][n] = sum_l f[l] g[l - n*a] exp(-2*pi*i*m*b_n*(l - n*a)/L)`.
//! Because `M_n * b_n = L`, the modulation only sees the window offset modulo
//! `M_n`, so the fast path folds the windowed segment into `M_n` bins and
//! runs one DFT per frame; a naive inner-product path is kept as the
//! reference semantics. In the painless case (every `M_n` at least the
//! window support length) the frame operator is diagonal, and synthesis
//! divides by that diagonal to realize the canonical dual.
//!
//! Both transforms may parallelize over frames but are bitwise deterministic:
//! frames are computed independently and combined in fixed frame order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::plan::NsgtPlan;
use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::window::Window;

/// Per-frame coefficient vectors; frame `n` has length `M_n`, so the set is
/// ragged rather than a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RaggedCoefficients {
    per_frame: Vec<Vec<Complex64>>,
    plan: NsgtPlan,
}

impl RaggedCoefficients {
    pub fn new(per_frame: Vec<Vec<Complex64>>, plan: NsgtPlan) -> Result<Self> {
        if per_frame.len() != plan.frame_count() {
            return Err(Error::argument(format!(
                "{} coefficient frames for a plan with {} frames",
                per_frame.len(),
                plan.frame_count()
            )));
        }
        for (n, (frame, &m)) in per_frame.iter().zip(plan.channel_counts()).enumerate() {
            if frame.len() != m {
                return Err(Error::argument(format!(
                    "frame {n} holds {} coefficients, plan expects {m}",
                    frame.len()
                )));
            }
        }
        Ok(RaggedCoefficients { per_frame, plan })
    }

    pub fn per_frame(&self) -> &[Vec<Complex64>] {
        &self.per_frame
    }

    pub fn frame(&self, n: usize) -> &[Complex64] {
        &self.per_frame[n]
    }

    pub fn plan(&self) -> &NsgtPlan {
        &self.plan
    }

    /// Total squared magnitude over all coefficients.
    pub fn energy(&self) -> f64 {
        self.per_frame
            .iter()
            .flat_map(|frame| frame.iter())
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// Diagonal of the painless frame operator: `s[l] = sum_n M_n g[l - n*a]^2`,
/// strictly positive at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDiagonal {
    values: Vec<f64>,
}

impl FrameDiagonal {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Optimal frame bounds; for a diagonal frame operator these are its extreme
/// diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    lower: f64,
    upper: f64,
}

impl FrameBounds {
    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// True iff every frame offers at least as many channels as the window
/// support length, which makes the frame operator diagonal.
pub fn is_painless(plan: &NsgtPlan, window: &Window) -> bool {
    plan.min_channel_count() >= window.support_length()
}

fn ensure_painless(plan: &NsgtPlan, window: &Window) -> Result<()> {
    if is_painless(plan, window) {
        Ok(())
    } else {
        Err(Error::NonPainless {
            min_channels: plan.min_channel_count(),
            support: window.support_length(),
        })
    }
}

fn ensure_shape(coeffs: &RaggedCoefficients, plan: &NsgtPlan) -> Result<()> {
    if coeffs.per_frame.len() != plan.frame_count()
        || coeffs
            .per_frame
            .iter()
            .zip(plan.channel_counts())
            .any(|(frame, &m)| frame.len() != m)
    {
        return Err(Error::argument(
            "coefficient shape does not match the plan's channel counts",
        ));
    }
    Ok(())
}

fn wrap(idx: isize, len: usize) -> usize {
    idx.rem_euclid(len as isize) as usize
}

fn plan_ffts(plan: &NsgtPlan, forward: bool) -> HashMap<usize, Arc<dyn Fft<f64>>> {
    let mut planner = FftPlanner::new();
    let mut map: HashMap<usize, Arc<dyn Fft<f64>>> = HashMap::new();
    for &m in plan.channel_counts() {
        map.entry(m).or_insert_with(|| {
            if forward {
                planner.plan_fft_forward(m)
            } else {
                planner.plan_fft_inverse(m)
            }
        });
    }
    map
}

/// Analysis coefficients via the per-frame fold-and-DFT fast path.
pub fn nsgt_forward(
    signal: &Signal,
    plan: &NsgtPlan,
    window: &Window,
) -> Result<RaggedCoefficients> {
    if signal.len() != plan.signal_len() {
        return Err(Error::argument(format!(
            "signal length {} does not match plan length {} (zero-pad first)",
            signal.len(),
            plan.signal_len()
        )));
    }
    let f = signal.samples();
    let big_l = plan.signal_len();
    let ffts = plan_ffts(plan, true);
    let per_frame: Vec<Vec<Complex64>> = (0..plan.frame_count())
        .into_par_iter()
        .map(|n| {
            let m_n = plan.channel_counts()[n];
            let start = (n * plan.time_hop()) as isize;
            let mut folded = vec![0.0f64; m_n];
            for (j, v) in window.iter() {
                folded[wrap(j, m_n)] += v * f[wrap(start + j, big_l)];
            }
            let mut buf: Vec<Complex64> =
                folded.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            ffts[&m_n].process(&mut buf);
            buf
        })
        .collect();
    RaggedCoefficients::new(per_frame, plan.clone())
}

/// Analysis coefficients by direct evaluation of the inner products; the
/// reference semantics for `nsgt_forward`. Phases are reduced modulo `L` in
/// exact integer arithmetic before the trigonometric evaluation.
pub fn nsgt_forward_naive(
    signal: &Signal,
    plan: &NsgtPlan,
    window: &Window,
) -> Result<RaggedCoefficients> {
    if signal.len() != plan.signal_len() {
        return Err(Error::argument(format!(
            "signal length {} does not match plan length {} (zero-pad first)",
            signal.len(),
            plan.signal_len()
        )));
    }
    let f = signal.samples();
    let big_l = plan.signal_len();
    let mut per_frame = Vec::with_capacity(plan.frame_count());
    for n in 0..plan.frame_count() {
        let m_n = plan.channel_counts()[n];
        let b_n = plan.freq_hops()[n];
        let start = (n * plan.time_hop()) as isize;
        let mut frame = Vec::with_capacity(m_n);
        for m in 0..m_n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in window.iter() {
                let phase_idx =
                    ((m as i128) * (b_n as i128) * (j as i128)).rem_euclid(big_l as i128);
                let angle = -2.0 * PI * phase_idx as f64 / big_l as f64;
                acc += v * f[wrap(start + j, big_l)] * Complex64::new(angle.cos(), angle.sin());
            }
            frame.push(acc);
        }
        per_frame.push(frame);
    }
    RaggedCoefficients::new(per_frame, plan.clone())
}

/// Painless frame-operator diagonal `s[l] = sum_n M_n g[l - n*a]^2`. Errors
/// if the plan is not painless or the shifted windows leave any sample with a
/// vanishing diagonal entry.
pub fn frame_diagonal(plan: &NsgtPlan, window: &Window) -> Result<FrameDiagonal> {
    ensure_painless(plan, window)?;
    let big_l = plan.signal_len();
    let mut values = vec![0.0f64; big_l];
    for n in 0..plan.frame_count() {
        let weight = plan.channel_counts()[n] as f64;
        let start = (n * plan.time_hop()) as isize;
        for (j, v) in window.iter() {
            values[wrap(start + j, big_l)] += weight * v * v;
        }
    }
    if let Some(l) = values.iter().position(|&s| s <= 1e-300) {
        return Err(Error::Coverage(l));
    }
    Ok(FrameDiagonal { values })
}

/// Optimal bounds of the diagonal frame operator: its extreme entries.
pub fn frame_bounds(diag: &FrameDiagonal) -> FrameBounds {
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for &s in diag.values() {
        lower = lower.min(s);
        upper = upper.max(s);
    }
    FrameBounds { lower, upper }
}

/// Canonical-dual synthesis: per frame, an inverse DFT spreads the
/// coefficients back over the window support; the accumulated signal is
/// divided pointwise by the frame diagonal. The imaginary residue (rounding
/// noise for coefficients of real signals) is discarded.
pub fn nsgt_inverse(
    coeffs: &RaggedCoefficients,
    plan: &NsgtPlan,
    window: &Window,
) -> Result<Signal> {
    ensure_shape(coeffs, plan)?;
    let diag = frame_diagonal(plan, window)?;
    let big_l = plan.signal_len();
    let ffts = plan_ffts(plan, false);
    let contributions: Vec<Vec<Complex64>> = (0..plan.frame_count())
        .into_par_iter()
        .map(|n| {
            let m_n = plan.channel_counts()[n];
            let mut buf = coeffs.frame(n).to_vec();
            ffts[&m_n].process(&mut buf);
            window.iter().map(|(j, v)| buf[wrap(j, m_n)] * v).collect()
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); big_l];
    for (n, contribution) in contributions.iter().enumerate() {
        let start = (n * plan.time_hop()) as isize;
        for ((j, _), &value) in window.iter().zip(contribution) {
            acc[wrap(start + j, big_l)] += value;
        }
    }
    let samples = acc
        .iter()
        .zip(diag.values())
        .map(|(z, s)| z.re / s)
        .collect();
    Signal::new(samples, plan.sample_rate_hz())
}

/// Both sides of the diagonal-frame energy identity
/// `sum |c|^2 = sum_l s[l] |f[l]|^2`, for test assertions.
pub fn coefficient_energy_identity(
    signal: &Signal,
    coeffs: &RaggedCoefficients,
    diag: &FrameDiagonal,
) -> (f64, f64) {
    let lhs = coeffs.energy();
    let rhs = signal
        .samples()
        .iter()
        .zip(diag.values())
        .map(|(f, s)| s * f * f)
        .sum();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_plan(
        signal_len: usize,
        time_hop: usize,
        channels: usize,
        rate: f64,
    ) -> NsgtPlan {
        let n = signal_len / time_hop;
        NsgtPlan::from_channel_counts(signal_len, time_hop, vec![channels; n], 1, 1, rate)
            .unwrap()
    }

    fn random_signal(rng: &mut ChaCha8Rng, len: usize, rate: f64) -> Signal {
        let samples = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Signal::new(samples, rate).unwrap()
    }

    /// Atom value g_{m,n}[l] built directly from the definition, with the
    /// window periodized modulo L.
    fn atom(
        plan: &NsgtPlan,
        window: &Window,
        m: usize,
        n: usize,
        l: usize,
    ) -> Complex64 {
        let big_l = plan.signal_len() as isize;
        let mut value = Complex64::new(0.0, 0.0);
        for (j, v) in window.iter() {
            if (l as isize - (n * plan.time_hop()) as isize - j).rem_euclid(big_l) == 0 {
                let angle = 2.0 * PI * (m * plan.freq_hops()[n]) as f64 * j as f64
                    / plan.signal_len() as f64;
                value += v * Complex64::new(angle.cos(), angle.sin());
            }
        }
        value
    }

    #[test]
    fn full_length_rect_window_is_plain_dft() {
        // One frame, unit hop in frequency: the transform degenerates to an
        // ordinary DFT, so a constant signal concentrates in channel 0.
        let plan = uniform_plan(15, 15, 15, 8000.0);
        let window = Window::new(-7, vec![1.0; 15]).unwrap();
        assert!(is_painless(&plan, &window));
        let sig = Signal::new(vec![1.0; 15], 8000.0).unwrap();
        let coeffs = nsgt_forward(&sig, &plan, &window).unwrap();
        assert!((coeffs.frame(0)[0].re - 15.0).abs() <= 1e-12);
        assert!(coeffs.frame(0)[0].im.abs() <= 1e-12);
        for m in 1..15 {
            assert!(
                coeffs.frame(0)[m].norm() <= 1e-12,
                "channel {m} should vanish, got {}",
                coeffs.frame(0)[m].norm()
            );
        }
        let diag = frame_diagonal(&plan, &window).unwrap();
        assert!(diag.values().iter().all(|&s| s == 15.0));
        let bounds = frame_bounds(&diag);
        assert_eq!((bounds.lower(), bounds.upper()), (15.0, 15.0));
    }

    #[test]
    fn self_inner_product_is_window_energy() {
        let plan = uniform_plan(64, 8, 64, 8000.0);
        let window = Window::hann(16).unwrap();
        let n0 = 3;
        let samples: Vec<f64> = (0..64)
            .map(|l| atom(&plan, &window, 0, n0, l).re)
            .collect();
        let sig = Signal::new(samples, 8000.0).unwrap();
        let coeffs = nsgt_forward(&sig, &plan, &window).unwrap();
        let c = coeffs.frame(n0)[0];
        assert!((c.re - window.energy()).abs() <= 1e-12 * window.energy());
        assert!(c.im.abs() <= 1e-12);
    }

    #[test]
    fn fast_path_matches_naive_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let plan = NsgtPlan::from_channel_counts(
            64,
            8,
            vec![64, 32, 16, 8, 64, 32, 16, 8],
            1,
            1,
            8000.0,
        )
        .unwrap();
        let window = Window::hann(16).unwrap();
        let sig = random_signal(&mut rng, 64, 8000.0);
        let fast = nsgt_forward(&sig, &plan, &window).unwrap();
        let naive = nsgt_forward_naive(&sig, &plan, &window).unwrap();
        for n in 0..plan.frame_count() {
            for m in 0..plan.channel_counts()[n] {
                let diff = (fast.frame(n)[m] - naive.frame(n)[m]).norm();
                assert!(diff <= 1e-10, "frame {n} channel {m}: diff {diff}");
            }
        }
    }

    #[test]
    fn forward_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let plan = uniform_plan(64, 8, 16, 8000.0);
        let window = Window::hann(16).unwrap();
        let f = random_signal(&mut rng, 64, 8000.0);
        let g = random_signal(&mut rng, 64, 8000.0);
        let (alpha, beta) = (0.7, -1.3);
        let combined: Vec<f64> = f
            .samples()
            .iter()
            .zip(g.samples())
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let cf = nsgt_forward(&f, &plan, &window).unwrap();
        let cg = nsgt_forward(&g, &plan, &window).unwrap();
        let cc = nsgt_forward(
            &Signal::new(combined, 8000.0).unwrap(),
            &plan,
            &window,
        )
        .unwrap();
        for n in 0..plan.frame_count() {
            for m in 0..plan.channel_counts()[n] {
                let expect = alpha * cf.frame(n)[m] + beta * cg.frame(n)[m];
                assert!((cc.frame(n)[m] - expect).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let plan = uniform_plan(64, 8, 16, 8000.0);
        let window = Window::hann(16).unwrap();
        let sig = random_signal(&mut rng, 64, 8000.0);
        let coeffs = nsgt_forward(&sig, &plan, &window).unwrap();
        let back = nsgt_inverse(&coeffs, &plan, &window).unwrap();
        let err: f64 = sig
            .samples()
            .iter()
            .zip(back.samples())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm = sig.energy().sqrt();
        assert!(err / norm <= 1e-10, "relative error {}", err / norm);
    }

    #[test]
    fn zero_coefficients_give_zero_signal() {
        let plan = uniform_plan(64, 8, 16, 8000.0);
        let window = Window::hann(16).unwrap();
        let zeros: Vec<Vec<Complex64>> = plan
            .channel_counts()
            .iter()
            .map(|&m| vec![Complex64::new(0.0, 0.0); m])
            .collect();
        let coeffs = RaggedCoefficients::new(zeros, plan.clone()).unwrap();
        let out = nsgt_inverse(&coeffs, &plan, &window).unwrap();
        assert!(out.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn doubled_coefficients_double_the_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let plan = uniform_plan(64, 8, 16, 8000.0);
        let window = Window::hann(16).unwrap();
        let sig = random_signal(&mut rng, 64, 8000.0);
        let coeffs = nsgt_forward(&sig, &plan, &window).unwrap();
        let doubled = RaggedCoefficients::new(
            coeffs
                .per_frame()
                .iter()
                .map(|f| f.iter().map(|c| 2.0 * c).collect())
                .collect(),
            plan.clone(),
        )
        .unwrap();
        let once = nsgt_inverse(&coeffs, &plan, &window).unwrap();
        let twice = nsgt_inverse(&doubled, &plan, &window).unwrap();
        for (a, b) in once.samples().iter().zip(twice.samples()) {
            assert_eq!(2.0 * a, *b, "scaling by 2 must be exact");
        }
    }

    #[test]
    fn brute_force_frame_operator_is_diagonal() {
        // Assemble S[l][k] = sum_{m,n} g_{m,n}[l] conj(g_{m,n}[k]) from
        // explicitly constructed atoms and compare with the closed form.
        let plan = uniform_plan(32, 8, 16, 8000.0);
        let window = Window::hann(16).unwrap();
        let diag = frame_diagonal(&plan, &window).unwrap();
        for l in 0..32 {
            for k in 0..32 {
                let mut s_lk = Complex64::new(0.0, 0.0);
                for n in 0..plan.frame_count() {
                    for m in 0..plan.channel_counts()[n] {
                        s_lk += atom(&plan, &window, m, n, l)
                            * atom(&plan, &window, m, n, k).conj();
                    }
                }
                if l == k {
                    let expect = diag.values()[l];
                    assert!(
                        (s_lk.re - expect).abs() <= 1e-9 * expect.max(1.0),
                        "diagonal {l}: {} vs {expect}",
                        s_lk.re
                    );
                    assert!(s_lk.im.abs() <= 1e-9);
                } else {
                    assert!(
                        s_lk.norm() <= 1e-9,
                        "off-diagonal ({l},{k}) = {}",
                        s_lk.norm()
                    );
                }
            }
        }
    }

    #[test]
    fn energy_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let plan = uniform_plan(64, 8, 16, 8000.0);
        let window = Window::hann(16).unwrap();
        let sig = random_signal(&mut rng, 64, 8000.0);
        let coeffs = nsgt_forward(&sig, &plan, &window).unwrap();
        let diag = frame_diagonal(&plan, &window).unwrap();
        let (lhs, rhs) = coefficient_energy_identity(&sig, &coeffs, &diag);
        assert!((lhs - rhs).abs() <= 1e-10 * rhs, "lhs {lhs} vs rhs {rhs}");
        let bounds = frame_bounds(&diag);
        let norm_sq = sig.energy();
        assert!(bounds.lower() * norm_sq <= lhs && lhs <= bounds.upper() * norm_sq);
    }

    #[test]
    fn frame_bounds_of_explicit_diagonal() {
        let diag = FrameDiagonal {
            values: vec![1.0, 2.0, 4.0],
        };
        let bounds = frame_bounds(&diag);
        assert_eq!((bounds.lower(), bounds.upper()), (1.0, 4.0));
    }

    #[test]
    fn painless_predicate_examples() {
        let window = Window::hann(160).unwrap();
        let wide = uniform_plan(1000, 200, 200, 8000.0);
        assert!(is_painless(&wide, &window));
        let narrow = uniform_plan(1000, 200, 100, 8000.0);
        assert!(!is_painless(&narrow, &window));
        let spike = Window::new(0, vec![1.0]).unwrap();
        let tiny = uniform_plan(16, 4, 1, 8000.0);
        assert!(is_painless(&tiny, &spike));
    }

    #[test]
    fn uncovered_samples_raise_coverage_error() {
        // Hann(4) spans offsets -2..=2; hops of 8 leave gaps between shifts.
        let plan = uniform_plan(32, 8, 32, 8000.0);
        let window = Window::hann(4).unwrap();
        match frame_diagonal(&plan, &window) {
            Err(Error::Coverage(_)) => {}
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn non_painless_synthesis_is_rejected() {
        let plan = uniform_plan(32, 8, 8, 8000.0);
        let window = Window::hann(16).unwrap();
        assert!(!is_painless(&plan, &window));
        match frame_diagonal(&plan, &window) {
            Err(Error::NonPainless { .. }) => {}
            other => panic!("expected non-painless error, got {other:?}"),
        }
        let zeros: Vec<Vec<Complex64>> = plan
            .channel_counts()
            .iter()
            .map(|&m| vec![Complex64::new(0.0, 0.0); m])
            .collect();
        let coeffs = RaggedCoefficients::new(zeros, plan.clone()).unwrap();
        match nsgt_inverse(&coeffs, &plan, &window) {
            Err(Error::NonPainless { .. }) => {}
            other => panic!("expected non-painless error, got {other:?}"),
        }
    }

    #[test]
    fn length_mismatch_is_an_argument_error() {
        let plan = uniform_plan(64, 8, 16, 8000.0);
        let window = Window::hann(16).unwrap();
        let sig = Signal::new(vec![0.5; 60], 8000.0).unwrap();
        match nsgt_forward(&sig, &plan, &window) {
            Err(Error::Argument(_)) => {}
            other => panic!("expected argument error, got {other:?}"),
        }
    }
}
