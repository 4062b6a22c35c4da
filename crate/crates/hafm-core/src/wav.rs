//! WAV reading and writing.
//!
//! Reads mono RIFF/WAVE files holding 16-bit integer PCM or 32-bit IEEE
//! float samples; writes mono 32-bit float. Integer samples are scaled by
//! 1/32768 so that the most negative code maps to exactly -1.0.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::signal::Signal;

const PCM_SCALE: f64 = 32768.0;

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        other => Error::format(other.to_string()),
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let reader = WavReader::open(path.as_ref()).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::format(format!(
            "expected mono audio, got {} channels",
            spec.channels
        )));
    }
    let samples = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / PCM_SCALE).map_err(map_hound))
            .collect::<Result<Vec<f64>>>()?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from).map_err(map_hound))
            .collect::<Result<Vec<f64>>>()?,
        (fmt, bits) => {
            return Err(Error::format(format!(
                "unsupported WAV encoding: {bits}-bit {fmt:?} (want 16-bit PCM or 32-bit float)"
            )))
        }
    };
    Signal::new(samples, f64::from(spec.sample_rate))
}

pub fn write_wav(signal: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let rate = signal.sample_rate_hz();
    let rate_int = rate.round();
    if (rate - rate_int).abs() > 1e-6 || rate_int < 1.0 || rate_int > f64::from(u32::MAX) {
        return Err(Error::argument(format!(
            "sample rate {rate} cannot be stored in a WAV header"
        )));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: rate_int as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path.as_ref(), spec).map_err(map_hound)?;
    for &s in signal.samples() {
        writer.write_sample(s as f32).map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    /// Minimal mono PCM16 WAV with the given samples.
    fn pcm16_bytes(samples: &[i16], rate: u32, channels: u16) -> Vec<u8> {
        let data_len = (samples.len() * 2) as u32;
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(36 + data_len).to_le_bytes());
        b.extend_from_slice(b"WAVE");
        b.extend_from_slice(b"fmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&1u16.to_le_bytes()); // PCM
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&rate.to_le_bytes());
        b.extend_from_slice(&(rate * u32::from(channels) * 2).to_le_bytes());
        b.extend_from_slice(&(channels * 2).to_le_bytes());
        b.extend_from_slice(&16u16.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&data_len.to_le_bytes());
        for s in samples {
            b.extend_from_slice(&s.to_le_bytes());
        }
        b
    }

    fn write_temp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn pcm16_scaling() {
        let f = write_temp(&pcm16_bytes(&[0, 16384, -32768], 8000, 1));
        let sig = read_wav(f.path()).unwrap();
        assert_eq!(sig.sample_rate_hz(), 8000.0);
        assert_eq!(sig.samples(), &[0.0, 0.5, -1.0]);
    }

    #[test]
    fn stereo_is_rejected() {
        let f = write_temp(&pcm16_bytes(&[0, 0], 8000, 2));
        match read_wav(f.path()) {
            Err(Error::Format(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_data_is_io_error() {
        let bytes = pcm16_bytes(&[1, 2, 3, 4], 8000, 1);
        let f = write_temp(&bytes[..bytes.len() - 3]);
        match read_wav(f.path()) {
            Err(Error::Io(_)) => {}
            other => panic!("expected I/O error, got {other:?}"),
        }
    }

    #[test]
    fn float_data_chunk_is_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.wav");
        write_wav(&Signal::new(vec![0.25], 8000.0).unwrap(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let pos = bytes
            .windows(4)
            .position(|w| w == b"data")
            .expect("no data chunk");
        let len = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap());
        assert_eq!(len, 4);
        let val = f32::from_le_bytes(bytes[pos + 8..pos + 12].try_into().unwrap());
        assert_eq!(val, 0.25);
    }

    #[test]
    fn round_trip_is_identity_on_f32_samples() {
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.wav");
        let second = dir.path().join("b.wav");

        let f = write_temp(&pcm16_bytes(&[0, 123, -456, 32767, -32768], 22050, 1));
        let sig = read_wav(f.path()).unwrap();
        write_wav(&sig, &first).unwrap();
        let sig2 = read_wav(&first).unwrap();
        assert_eq!(sig.samples(), sig2.samples());
        write_wav(&sig2, &second).unwrap();
        let sig3 = read_wav(&second).unwrap();
        assert_eq!(sig2, sig3);
    }

    #[test]
    fn float_round_trip_error_within_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let samples: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin() * 0.9).collect();
        let sig = Signal::new(samples.clone(), 8000.0).unwrap();
        write_wav(&sig, &path).unwrap();
        let back = read_wav(&path).unwrap();
        for (a, b) in samples.iter().zip(back.samples()) {
            let rel = if *a == 0.0 {
                (a - b).abs()
            } else {
                ((a - b) / a).abs()
            };
            assert!(rel <= 2f64.powi(-23), "sample moved by {rel}");
        }
    }

    #[test]
    fn empty_path_is_io_error() {
        let sig = Signal::new(vec![0.1], 8000.0).unwrap();
        match write_wav(&sig, "") {
            Err(Error::Io(_)) => {}
            other => panic!("expected I/O error, got {other:?}"),
        }
    }
}
