//! Fundamental-frequency tracks: CSV I/O, resampling onto an analysis grid,
//! and a normalized-autocorrelation estimator.
//!
//! A track stores one positive f0 value per analysis frame. CSV files carry
//! sparse `(time_s, f0_hz)` points with strictly increasing times; those are
//! resampled onto the frame grid by linear interpolation, clamping before the
//! first point and after the last.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::signal::Signal;

const CSV_HEADER: &str = "time_s,f0_hz";

/// One sparse f0 observation at an absolute time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Point {
    pub time_s: f64,
    pub f0_hz: f64,
}

/// A dense per-frame f0 contour. Every value is finite and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    values: Vec<f64>,
}

impl F0Track {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("f0 track must hold at least one frame"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::argument(format!(
                "f0 values must be finite and positive, got {v}"
            )));
        }
        Ok(F0Track { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean_hz(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// View the track as sparse points on the frame grid `n * hop / rate`.
    pub fn to_points(&self, hop_samples: usize, sample_rate_hz: f64) -> Vec<F0Point> {
        self.values
            .iter()
            .enumerate()
            .map(|(n, &f0_hz)| F0Point {
                time_s: (n * hop_samples) as f64 / sample_rate_hz,
                f0_hz,
            })
            .collect()
    }
}

fn validate_points(points: &[F0Point]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::argument("f0 point list is empty"));
    }
    for (i, p) in points.iter().enumerate() {
        if !p.time_s.is_finite() || p.time_s < 0.0 {
            return Err(Error::argument(format!(
                "f0 point {i} has invalid time {}",
                p.time_s
            )));
        }
        if !p.f0_hz.is_finite() || p.f0_hz <= 0.0 {
            return Err(Error::argument(format!(
                "f0 point {i} has invalid frequency {}",
                p.f0_hz
            )));
        }
        if i > 0 && p.time_s <= points[i - 1].time_s {
            return Err(Error::argument(format!(
                "f0 point times must be strictly increasing (point {i})"
            )));
        }
    }
    Ok(())
}

/// Parse a `time_s,f0_hz` CSV. Blank lines are ignored; any malformed row,
/// nonpositive frequency, or non-monotone time is reported with its 1-based
/// line number.
pub fn read_f0_csv(reader: impl BufRead) -> Result<Vec<F0Point>> {
    let mut points: Vec<F0Point> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected header '{CSV_HEADER}', got '{line}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let (time, freq) = match (fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(f), None) => (t, f),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected exactly two comma-separated fields".into(),
                })
            }
        };
        let time_s: f64 = time.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid time '{time}'"),
        })?;
        let f0_hz: f64 = freq.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid frequency '{freq}'"),
        })?;
        if !time_s.is_finite() || time_s < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("time must be finite and nonnegative, got {time_s}"),
            });
        }
        if !f0_hz.is_finite() || f0_hz <= 0.0 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("frequency must be finite and positive, got {f0_hz}"),
            });
        }
        if let Some(prev) = points.last() {
            if time_s <= prev.time_s {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "times must be strictly increasing ({time_s} after {})",
                        prev.time_s
                    ),
                });
            }
        }
        points.push(F0Point { time_s, f0_hz });
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            msg: format!("missing header '{CSV_HEADER}'"),
        });
    }
    Ok(points)
}

/// Write points in the same CSV dialect `read_f0_csv` accepts. Values are
/// printed with the shortest representation that parses back bit-exactly.
pub fn write_f0_csv(points: &[F0Point], mut writer: impl Write) -> Result<()> {
    validate_points(points)?;
    writeln!(writer, "{CSV_HEADER}")?;
    for p in points {
        writeln!(writer, "{},{}", p.time_s, p.f0_hz)?;
    }
    Ok(())
}

/// Resample sparse points onto the analysis grid: frame `n` receives the
/// linear interpolation of f0 at time `n * hop / rate`, clamped to the first
/// and last points outside their span.
pub fn sample_f0_track(
    points: &[F0Point],
    hop_samples: usize,
    frame_count: usize,
    sample_rate_hz: f64,
) -> Result<F0Track> {
    validate_points(points)?;
    if hop_samples == 0 {
        return Err(Error::argument("hop must be at least one sample"));
    }
    if frame_count == 0 {
        return Err(Error::argument("frame count must be at least one"));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::argument(format!(
            "sample rate must be finite and positive, got {sample_rate_hz}"
        )));
    }
    let values = (0..frame_count)
        .map(|n| {
            let t = (n * hop_samples) as f64 / sample_rate_hz;
            interpolate(points, t)
        })
        .collect();
    F0Track::new(values)
}

fn interpolate(points: &[F0Point], t: f64) -> f64 {
    let first = &points[0];
    let last = &points[points.len() - 1];
    if t <= first.time_s {
        return first.f0_hz;
    }
    if t >= last.time_s {
        return last.f0_hz;
    }
    // First point with time >= t; its predecessor exists because t > first.
    let hi = points.partition_point(|p| p.time_s < t);
    let (a, b) = (&points[hi - 1], &points[hi]);
    let w = (t - a.time_s) / (b.time_s - a.time_s);
    a.f0_hz + (b.f0_hz - a.f0_hz) * w
}

/// Estimate a per-frame f0 contour by unweighted normalized autocorrelation
/// with an integer-lag peak pick.
///
/// Frames start every `hop_samples` (the last frame may start anywhere inside
/// the signal, so the track has `ceil(len / hop)` entries) and use up to
/// `window_samples` samples without running past the signal end. The lag
/// search spans `[rate/fmax, rate/fmin]`; near-ties go to the smaller lag so
/// that an exactly periodic input cannot flip to a subharmonic on round-off.
/// A frame falls back to the previous frame's estimate (or `fmin` at the
/// start) when it is silent or too short to search the full lag range.
pub fn estimate_f0_autocorrelation(
    signal: &Signal,
    hop_samples: usize,
    window_samples: usize,
    fmin_hz: f64,
    fmax_hz: f64,
) -> Result<F0Track> {
    let rate = signal.sample_rate_hz();
    if hop_samples == 0 {
        return Err(Error::argument("hop must be at least one sample"));
    }
    if !(fmin_hz > 0.0 && fmin_hz < fmax_hz && fmax_hz < rate / 2.0) {
        return Err(Error::argument(format!(
            "need 0 < fmin < fmax < rate/2, got fmin={fmin_hz}, fmax={fmax_hz}, rate={rate}"
        )));
    }
    let min_window = (2.0 * rate / fmin_hz).ceil() as usize;
    if window_samples < min_window {
        return Err(Error::argument(format!(
            "window of {window_samples} samples covers less than two periods of \
             {fmin_hz} Hz (need at least {min_window})"
        )));
    }
    let lag_min = (rate / fmax_hz).ceil() as usize;
    let lag_max = (rate / fmin_hz).floor() as usize;
    debug_assert!(lag_min >= 1 && lag_min <= lag_max);

    // Near-tie margin for the peak pick: correlations this close are treated
    // as equal and the smaller lag (higher f0) wins.
    const OCTAVE_MARGIN: f64 = 0.02;

    let samples = signal.samples();
    let frame_count = samples.len().div_ceil(hop_samples);
    let mut values = Vec::with_capacity(frame_count);
    let mut previous = fmin_hz;
    for n in 0..frame_count {
        let start = n * hop_samples;
        let end = (start + window_samples).min(samples.len());
        let frame = &samples[start..end];
        let estimate = if frame.len() < lag_max + 2 {
            None
        } else {
            pick_lag(frame, lag_min, lag_max, OCTAVE_MARGIN).map(|lag| rate / lag as f64)
        };
        let f0 = estimate.unwrap_or(previous);
        values.push(f0);
        previous = f0;
    }
    F0Track::new(values)
}

/// Integer lag in `[lag_min, lag_max]` of the best normalized-autocorrelation
/// peak, or `None` when no lag has positive energy on both sides of the shift
/// (e.g. a silent frame).
///
/// A signal whose period is a non-integer number of samples can correlate
/// slightly better at a multiple of the period (the double lag may round to a
/// nearer integer), so a bare argmax octave-flips downward. The peak picker
/// therefore takes the smallest *local maximum* whose correlation is within
/// `octave_margin` of the global maximum; subharmonic lags lose unless they
/// beat the true period by more than the margin.
fn pick_lag(frame: &[f64], lag_min: usize, lag_max: usize, octave_margin: f64) -> Option<usize> {
    let mut rs = Vec::with_capacity(lag_max - lag_min + 1);
    for lag in lag_min..=lag_max {
        let overlap = frame.len() - lag;
        let mut num = 0.0;
        let mut e0 = 0.0;
        let mut e1 = 0.0;
        for t in 0..overlap {
            num += frame[t] * frame[t + lag];
            e0 += frame[t] * frame[t];
            e1 += frame[t + lag] * frame[t + lag];
        }
        if e0 <= 0.0 || e1 <= 0.0 {
            rs.push(f64::NEG_INFINITY);
        } else {
            rs.push(num / (e0 * e1).sqrt());
        }
    }
    let best_r = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !best_r.is_finite() {
        return None;
    }
    for (i, &r) in rs.iter().enumerate() {
        let left_ok = i == 0 || r >= rs[i - 1];
        let right_ok = i + 1 == rs.len() || r >= rs[i + 1];
        if left_ok && right_ok && r >= best_r - octave_margin {
            return Some(lag_min + i);
        }
    }
    Some(lag_min + rs.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0)
}

/// Frame count produced by `estimate_f0_autocorrelation` for a signal length.
pub fn estimator_frame_count(signal_len: usize, hop_samples: usize) -> usize {
    signal_len.div_ceil(hop_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::io::Cursor;

    fn tone(freq: f64, rate: f64, len: usize) -> Signal {
        let samples = (0..len)
            .map(|i| (2.0 * PI * freq * i as f64 / rate).sin())
            .collect();
        Signal::new(samples, rate).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let points = vec![
            F0Point { time_s: 0.0, f0_hz: 110.0 },
            F0Point { time_s: 0.25, f0_hz: 115.5 },
            F0Point { time_s: 0.5, f0_hz: 109.875 },
        ];
        let mut buf = Vec::new();
        write_f0_csv(&points, &mut buf).unwrap();
        let back = read_f0_csv(Cursor::new(&buf)).unwrap();
        assert_eq!(points, back);
    }

    #[test]
    fn csv_rejects_bad_rows_with_line_numbers() {
        let err = read_f0_csv(Cursor::new("time_s,f0_hz\n0.0,100\n0.1,abc\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = read_f0_csv(Cursor::new("time_s,f0_hz\n0.2,100\n0.1,100\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = read_f0_csv(Cursor::new("time,f0\n0.0,100\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = read_f0_csv(Cursor::new("time_s,f0_hz\n0.0,-5\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sampling_interpolates_and_clamps() {
        // 100 Hz at t=0, 200 Hz at t=1; hop of 1000 samples at 8 kHz is
        // 0.125 s per frame.
        let points = vec![
            F0Point { time_s: 0.0, f0_hz: 100.0 },
            F0Point { time_s: 1.0, f0_hz: 200.0 },
        ];
        let track = sample_f0_track(&points, 1000, 12, 8000.0).unwrap();
        assert_eq!(track.len(), 12);
        assert!((track.values()[0] - 100.0).abs() < 1e-12);
        assert!((track.values()[4] - 150.0).abs() < 1e-12);
        // Frames 9..12 start at t >= 1.125 and clamp to the last point.
        assert_eq!(track.values()[9], 200.0);
        assert_eq!(track.values()[11], 200.0);
    }

    #[test]
    fn pure_tone_estimates_are_tight() {
        for freq in [100.0, 250.0] {
            let sig = tone(freq, 8000.0, 8000);
            let track = estimate_f0_autocorrelation(&sig, 32, 320, 60.0, 400.0).unwrap();
            assert_eq!(track.len(), 250);
            for (n, &f0) in track.values().iter().enumerate() {
                assert!(
                    (f0 - freq).abs() <= 2.0,
                    "frame {n}: estimated {f0} Hz for a {freq} Hz tone"
                );
            }
        }
    }

    #[test]
    fn periodic_signal_with_harmonics_does_not_octave_flip() {
        // Exactly periodic at 125 Hz (period 64 samples) with five harmonics;
        // both lag 64 and lag 128 correlate at ~1, and the near-tie rule must
        // keep the smaller lag.
        let rate = 8000.0;
        let samples: Vec<f64> = (0..8000)
            .map(|i| {
                (1..=5)
                    .map(|h| (2.0 * PI * 125.0 * h as f64 * i as f64 / rate).cos() / h as f64)
                    .sum()
            })
            .collect();
        let sig = Signal::new(samples, rate).unwrap();
        let track = estimate_f0_autocorrelation(&sig, 80, 320, 60.0, 400.0).unwrap();
        for (n, &f0) in track.values().iter().enumerate() {
            assert!(
                (f0 - 125.0).abs() <= 2.0,
                "frame {n}: estimated {f0} Hz for a 125 Hz periodic signal"
            );
        }
    }

    #[test]
    fn silence_falls_back_to_fmin_then_previous() {
        let mut samples = vec![0.0; 4000];
        let rate = 8000.0;
        for (i, s) in samples.iter_mut().enumerate().skip(2000) {
            *s = (2.0 * PI * 200.0 * i as f64 / rate).sin();
        }
        let sig = Signal::new(samples, rate).unwrap();
        let track = estimate_f0_autocorrelation(&sig, 400, 320, 60.0, 400.0).unwrap();
        // Leading silence: no previous frame, so fmin.
        assert_eq!(track.values()[0], 60.0);
        // Voiced region locks on.
        assert!((track.values()[6] - 200.0).abs() <= 2.0);
    }

    #[test]
    fn window_must_cover_two_periods() {
        let sig = tone(100.0, 8000.0, 4000);
        match estimate_f0_autocorrelation(&sig, 32, 200, 60.0, 400.0) {
            Err(Error::Argument(_)) => {}
            other => panic!("expected argument error, got {other:?}"),
        }
    }

    #[test]
    fn track_points_round_trip_through_sampling() {
        let track = F0Track::new(vec![100.0, 120.0, 140.0, 130.0]).unwrap();
        let points = track.to_points(64, 8000.0);
        let back = sample_f0_track(&points, 64, 4, 8000.0).unwrap();
        for (a, b) in track.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
