//! Lattice construction: padded length selection, f0-driven frequency hops,
//! and the `NsgtPlan` tying them together.
//!
//! Channel counts must satisfy `M_n * b_n = L` exactly, so the ideal
//! real-valued hop is rounded to an integer and then snapped to a divisor of
//! `L`. `L` itself is chosen 7-smooth (and a multiple of the time hop) to
//! keep plenty of divisors near any target.

use crate::error::{Error, Result};
use crate::f0::F0Track;

/// The full analysis lattice: padded length `L`, constant time hop `a` with
/// `N * a = L`, and per-frame frequency hops `b_n` with channel counts
/// `M_n = L / b_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NsgtPlan {
    signal_len: usize,
    time_hop: usize,
    freq_hops: Vec<usize>,
    channel_counts: Vec<usize>,
    p: usize,
    q: usize,
    sample_rate_hz: f64,
    /// Largest relative deviation |b_n - target| / target introduced by
    /// snapping hops to divisors of L.
    max_hop_rel_deviation: f64,
}

/// Smallest integer >= `raw_len` whose prime factors are all <= 7.
pub fn choose_padded_length(raw_len: usize) -> usize {
    assert!(raw_len >= 1, "length must be positive");
    (raw_len..).find(|&n| is_seven_smooth(n)).unwrap()
}

fn is_seven_smooth(mut n: usize) -> bool {
    for p in [2usize, 3, 5, 7] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Padded signal length and frame count for a raw length and time hop:
/// the 7-smooth padded length raised to the next multiple of the hop.
pub fn padded_dims(raw_len: usize, time_hop: usize) -> (usize, usize) {
    assert!(time_hop >= 1, "time hop must be positive");
    let smooth = choose_padded_length(raw_len);
    let signal_len = smooth.div_ceil(time_hop) * time_hop;
    (signal_len, signal_len / time_hop)
}

/// Ideal integer frequency hop for one frame: the bin count closest to
/// `p * f0 / q` Hz, i.e. `round((p*f0/q) / (rate/L))` with halves rounded
/// away from zero, clamped to at least 1.
pub fn compute_freq_hop(
    f0_hz: f64,
    p: usize,
    q: usize,
    sample_rate_hz: f64,
    signal_len: usize,
) -> usize {
    let target = (p as f64 * f0_hz / q as f64) / (sample_rate_hz / signal_len as f64);
    (target.round() as usize).max(1)
}

/// Divisor of `signal_len` closest to `target_b`; ties go to the smaller
/// divisor (finer frequency resolution, preserving painless headroom).
pub fn snap_hop_to_divisor(target_b: usize, signal_len: usize) -> usize {
    let t = target_b.clamp(1, signal_len);
    for delta in 0..signal_len {
        if t > delta && signal_len.is_multiple_of(t - delta) {
            return t - delta;
        }
        if t + delta <= signal_len && signal_len.is_multiple_of(t + delta) {
            return t + delta;
        }
    }
    1
}

impl NsgtPlan {
    /// Assemble a plan from an f0 contour. The padded length is
    /// `padded_dims(raw_len, time_hop)`; the track must hold exactly one
    /// value per resulting frame, each below the Nyquist frequency.
    pub fn build(
        f0_track: &F0Track,
        time_hop: usize,
        p: usize,
        q: usize,
        sample_rate_hz: f64,
        raw_len: usize,
    ) -> Result<Self> {
        if time_hop == 0 {
            return Err(Error::argument("time hop must be positive"));
        }
        if p == 0 || q == 0 {
            return Err(Error::argument("alignment parameters p, q must be positive"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::argument(format!(
                "sample rate must be finite and positive, got {sample_rate_hz}"
            )));
        }
        if raw_len == 0 {
            return Err(Error::argument("signal length must be positive"));
        }
        let (signal_len, frame_count) = padded_dims(raw_len, time_hop);
        if time_hop > signal_len {
            return Err(Error::argument(format!(
                "time hop {time_hop} exceeds padded length {signal_len}"
            )));
        }
        if f0_track.len() != frame_count {
            return Err(Error::argument(format!(
                "f0 track has {} frames but the plan needs {frame_count} \
                 (padded length {signal_len}, hop {time_hop})",
                f0_track.len()
            )));
        }
        let mut freq_hops = Vec::with_capacity(frame_count);
        let mut max_dev = 0.0f64;
        for (n, &f0) in f0_track.values().iter().enumerate() {
            if f0 >= sample_rate_hz / 2.0 {
                return Err(Error::argument(format!(
                    "frame {n}: f0 {f0} Hz is not below the Nyquist frequency"
                )));
            }
            let ideal = compute_freq_hop(f0, p, q, sample_rate_hz, signal_len);
            let snapped = snap_hop_to_divisor(ideal, signal_len);
            max_dev = max_dev.max((snapped as f64 - ideal as f64).abs() / ideal as f64);
            freq_hops.push(snapped);
        }
        let channel_counts = freq_hops.iter().map(|b| signal_len / b).collect();
        Ok(NsgtPlan {
            signal_len,
            time_hop,
            freq_hops,
            channel_counts,
            p,
            q,
            sample_rate_hz,
            max_hop_rel_deviation: max_dev,
        })
    }

    /// Rebuild a plan from stored channel counts (as read from a coefficient
    /// or mask file). Every count must divide `signal_len`, which must be
    /// `frame_count * time_hop`.
    pub fn from_channel_counts(
        signal_len: usize,
        time_hop: usize,
        channel_counts: Vec<usize>,
        p: usize,
        q: usize,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        if time_hop == 0 || signal_len == 0 {
            return Err(Error::argument("lengths and hops must be positive"));
        }
        if p == 0 || q == 0 {
            return Err(Error::argument("alignment parameters p, q must be positive"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::argument(format!(
                "sample rate must be finite and positive, got {sample_rate_hz}"
            )));
        }
        if channel_counts.is_empty() || channel_counts.len() * time_hop != signal_len {
            return Err(Error::argument(format!(
                "{} frames with hop {time_hop} do not tile length {signal_len}",
                channel_counts.len()
            )));
        }
        let mut freq_hops = Vec::with_capacity(channel_counts.len());
        for (n, &m) in channel_counts.iter().enumerate() {
            if m == 0 || !signal_len.is_multiple_of(m) {
                return Err(Error::argument(format!(
                    "frame {n}: channel count {m} does not divide length {signal_len}"
                )));
            }
            freq_hops.push(signal_len / m);
        }
        Ok(NsgtPlan {
            signal_len,
            time_hop,
            freq_hops,
            channel_counts,
            p,
            q,
            sample_rate_hz,
            max_hop_rel_deviation: 0.0,
        })
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn time_hop(&self) -> usize {
        self.time_hop
    }

    pub fn frame_count(&self) -> usize {
        self.freq_hops.len()
    }

    pub fn freq_hops(&self) -> &[usize] {
        &self.freq_hops
    }

    pub fn channel_counts(&self) -> &[usize] {
        &self.channel_counts
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn max_hop_rel_deviation(&self) -> f64 {
        self.max_hop_rel_deviation
    }

    pub fn min_channel_count(&self) -> usize {
        *self.channel_counts.iter().min().unwrap()
    }

    pub fn max_channel_count(&self) -> usize {
        *self.channel_counts.iter().max().unwrap()
    }

    pub fn total_coefficients(&self) -> usize {
        self.channel_counts.iter().sum()
    }
}
