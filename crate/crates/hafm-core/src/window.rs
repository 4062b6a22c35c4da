//! Analysis windows symmetric around zero with explicit integer support.
//!
//! A window stores its values on an inclusive offset range `[c, d]` centered
//! at zero (`c = -d`). The support length is the conservative span `d - c`;
//! a single-sample window is assigned length 1 so the painless inequality
//! `M_n >= length` stays meaningful.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// Offset of the first stored value (`c`); the last is `c + len - 1`.
    support_lo: isize,
    values: Vec<f64>,
}

impl Window {
    /// Build a window from explicit values; `values[i]` sits at offset
    /// `support_lo + i`. The range must be centered (`d = -c`) and the values
    /// an exact mirror pair-for-pair.
    pub fn new(support_lo: isize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("window has no values"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::argument(format!("window value {v} is not finite")));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::argument("window must have a nonzero value"));
        }
        let support_hi = support_lo + values.len() as isize - 1;
        if support_lo != -support_hi {
            return Err(Error::argument(format!(
                "window support [{support_lo}, {support_hi}] is not centered at zero"
            )));
        }
        for i in 0..values.len() / 2 {
            if values[i] != values[values.len() - 1 - i] {
                return Err(Error::argument(format!(
                    "window is not symmetric at offset {}",
                    support_lo + i as isize
                )));
            }
        }
        Ok(Window { support_lo, values })
    }

    /// Symmetric Hann window `g[l] = 0.5 * (1 + cos(2*pi*l / W))` on
    /// `|l| <= W/2`, with `g[0] = 1` and exact zeros at the endpoints.
    /// `support_samples` (`W`) must be even and positive.
    pub fn hann(support_samples: usize) -> Result<Self> {
        if support_samples == 0 || !support_samples.is_multiple_of(2) {
            return Err(Error::argument(format!(
                "Hann support must be a positive even sample count, got {support_samples}"
            )));
        }
        let half = support_samples / 2;
        let mut right: Vec<f64> = (0..=half)
            .map(|l| 0.5 * (1.0 + (2.0 * PI * l as f64 / support_samples as f64).cos()))
            .collect();
        right[half] = 0.0;
        let mut values: Vec<f64> = right[1..].iter().rev().copied().collect();
        values.extend_from_slice(&right);
        Window::new(-(half as isize), values)
    }

    /// First support offset `c`.
    pub fn support_lo(&self) -> isize {
        self.support_lo
    }

    /// Last support offset `d`.
    pub fn support_hi(&self) -> isize {
        self.support_lo + self.values.len() as isize - 1
    }

    /// Conservative support length `d - c`, with single-sample windows mapped
    /// to 1.
    pub fn support_length(&self) -> usize {
        ((self.support_hi() - self.support_lo) as usize).max(1)
    }

    /// Window value at integer offset `l`; zero outside the stored support.
    pub fn value(&self, l: isize) -> f64 {
        let idx = l - self.support_lo;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    /// Stored values in offset order (`c..=d`).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterate `(offset, value)` over the stored support.
    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.support_lo + i as isize, v))
    }

    /// Sum of squared values over the support.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}
