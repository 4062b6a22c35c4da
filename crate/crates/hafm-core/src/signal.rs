//! Time-domain signals.

use crate::error::{Error, Result};

/// A mono signal: finite real samples plus a sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::argument("signal must contain at least one sample"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::argument("signal contains non-finite samples"));
        }
        if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
            return Err(Error::argument("sample rate must be positive and finite"));
        }
        Ok(Signal {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Copy of the samples zero-padded (or truncated) to `len`.
    pub fn padded_samples(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        let n = self.samples.len().min(len);
        out[..n].copy_from_slice(&self.samples[..n]);
        out
    }

    /// Shortens the signal in place; errors if `len` is zero or beyond the end.
    pub fn truncate(&mut self, len: usize) -> Result<()> {
        if len == 0 || len > self.samples.len() {
            return Err(Error::argument(format!(
                "cannot truncate signal of {} samples to {}",
                self.samples.len(),
                len
            )));
        }
        self.samples.truncate(len);
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}

/// Signal-to-noise ratio in dB of `actual` against `reference`, over the
/// common prefix. Returns +inf for an exact match.
pub fn snr_db(reference: &[f64], actual: &[f64]) -> f64 {
    let n = reference.len().min(actual.len());
    let sig: f64 = reference[..n].iter().map(|s| s * s).sum();
    let err: f64 = reference[..n]
        .iter()
        .zip(&actual[..n])
        .map(|(r, a)| (r - a) * (r - a))
        .sum();
    if err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (sig / err).log10()
    }
}
