//! Column-wise mask features for speaker comparison.
//!
//! Each feature vector is the single-column regularized mask between one
//! frame of the source system and one frame of the target system, mapped to
//! real values (magnitudes by default) and truncated or zero-padded to a
//! fixed length so downstream classifiers see a rectangular design matrix.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mask::{tikhonov_value, AlignedCoefficients, MaskEstimationConfig, MaskReference};

/// One extracted vector with its origin: the label of the signal pair it
/// came from and the `(source frame, target frame)` column pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub source_label: String,
    pub pair_index: (usize, usize),
}

/// Which column pairs are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingMode {
    /// Pair frame `n` of the source with frame `n` of the target.
    Aligned,
    /// Pair every source frame with every target frame, row-major, capped by
    /// the policy's `max_pairs`.
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingPolicy {
    pub mode: PairingMode,
    pub max_pairs: usize,
}

impl Default for PairingPolicy {
    fn default() -> Self {
        PairingPolicy {
            mode: PairingMode::AllPairs,
            max_pairs: 10_000,
        }
    }
}

/// Complex-to-real mapping for mask entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureMapping {
    /// Entrywise magnitude; vector length is the grid height.
    #[default]
    Magnitude,
    /// Real parts followed by imaginary parts; twice the grid height.
    RealImag,
}

/// Compute one feature vector per selected column pair: the single-column
/// closed-form mask from source column `nA` and target column `nB`, mapped
/// to reals and resized to `feature_len` (zero-padded or truncated). With a
/// full-matrix reference the source column `nA` of the reference is used.
pub fn extract_features(
    ca: &AlignedCoefficients,
    cb: &AlignedCoefficients,
    config: &MaskEstimationConfig,
    policy: &PairingPolicy,
    feature_len: usize,
    label: &str,
    mapping: FeatureMapping,
) -> Result<Vec<FeatureVector>> {
    if ca.target_m() != cb.target_m() {
        return Err(Error::argument(format!(
            "aligned grid heights differ: {} vs {}",
            ca.target_m(),
            cb.target_m()
        )));
    }
    if feature_len == 0 {
        return Err(Error::argument("feature length must be positive"));
    }
    if policy.max_pairs == 0 {
        return Err(Error::argument("pair cap must be positive"));
    }
    if config.mu() <= 0.0 {
        return Err(Error::argument("feature extraction needs mu > 0"));
    }
    if let MaskReference::Matrix(a) = config.sigma_ref() {
        if a.dim() != (ca.target_m(), ca.frame_count()) {
            return Err(Error::argument(format!(
                "reference mask shape {:?} does not match the source grid ({}, {})",
                a.dim(),
                ca.target_m(),
                ca.frame_count()
            )));
        }
    }
    let pairs: Vec<(usize, usize)> = match policy.mode {
        PairingMode::Aligned => {
            if ca.frame_count() != cb.frame_count() {
                return Err(Error::argument(format!(
                    "aligned pairing needs equal frame counts, got {} vs {}",
                    ca.frame_count(),
                    cb.frame_count()
                )));
            }
            (0..ca.frame_count()).map(|n| (n, n)).collect()
        }
        PairingMode::AllPairs => (0..ca.frame_count())
            .flat_map(|na| (0..cb.frame_count()).map(move |nb| (na, nb)))
            .take(policy.max_pairs)
            .collect(),
    };
    if pairs.is_empty() {
        return Err(Error::argument("no column pairs selected"));
    }
    let rows = ca.target_m();
    let features = pairs
        .into_iter()
        .map(|(na, nb)| {
            let column: Vec<Complex64> = (0..rows)
                .map(|m| {
                    tikhonov_value(
                        ca.matrix()[[m, na]],
                        cb.matrix()[[m, nb]],
                        config.sigma_ref().value_at(m, na),
                        config.mu(),
                    )
                })
                .collect();
            let mut values: Vec<f64> = match mapping {
                FeatureMapping::Magnitude => column.iter().map(|c| c.norm()).collect(),
                FeatureMapping::RealImag => column
                    .iter()
                    .map(|c| c.re)
                    .chain(column.iter().map(|c| c.im))
                    .collect(),
            };
            values.resize(feature_len, 0.0);
            FeatureVector {
                values,
                source_label: label.to_string(),
                pair_index: (na, nb),
            }
        })
        .collect();
    Ok(features)
}

/// Write features as CSV: header `label,nA,nB,f0,...,f{D-1}`, one row per
/// vector. Values print in the shortest form that parses back bit-exactly.
pub fn write_features_csv(features: &[FeatureVector], mut writer: impl Write) -> Result<()> {
    let first = features
        .first()
        .ok_or_else(|| Error::argument("no feature vectors to write"))?;
    let dim = first.values.len();
    for (i, fv) in features.iter().enumerate() {
        if fv.values.len() != dim {
            return Err(Error::argument(format!(
                "vector {i} has length {} but the set is {dim}-dimensional",
                fv.values.len()
            )));
        }
        if fv.source_label.contains(',') || fv.source_label.contains('\n') {
            return Err(Error::argument(format!(
                "label '{}' must not contain commas or newlines",
                fv.source_label
            )));
        }
    }
    write!(writer, "label,nA,nB")?;
    for d in 0..dim {
        write!(writer, ",f{d}")?;
    }
    writeln!(writer)?;
    for fv in features {
        write!(
            writer,
            "{},{},{}",
            fv.source_label, fv.pair_index.0, fv.pair_index.1
        )?;
        for v in &fv.values {
            write!(writer, ",{v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Parse the CSV dialect written by `write_features_csv`.
pub fn read_features_csv(reader: impl BufRead) -> Result<Vec<FeatureVector>> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })
        .and_then(|(i, l)| Ok((i, l?)))?;
    let header = header.trim_end_matches('\r');
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 4 || fields[0] != "label" || fields[1] != "nA" || fields[2] != "nB" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header '{header}'"),
        });
    }
    let dim = fields.len() - 3;
    for (d, name) in fields[3..].iter().enumerate() {
        if *name != format!("f{d}") {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected value column '{name}'"),
            });
        }
    }
    let mut features = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} fields, got {}", dim + 3, fields.len()),
            });
        }
        let parse_idx = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid {what} '{s}'"),
            })
        };
        let na = parse_idx(fields[1], "source frame")?;
        let nb = parse_idx(fields[2], "target frame")?;
        let mut values = Vec::with_capacity(dim);
        for raw in &fields[3..] {
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid value '{raw}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value '{raw}'"),
                });
            }
            values.push(v);
        }
        features.push(FeatureVector {
            values,
            source_label: fields[0].to_string(),
            pair_index: (na, nb),
        });
    }
    Ok(features)
}
