//! HAFM mask files.
//!
//! Layout (little-endian): magic `HAFM`, version u32 = 1, u64 grid height
//! `M`, u64 frame count `N`, f64 `mu`, then the `M x N` mask column-major as
//! paired IEEE-754 f64 (real, imaginary), then `N` u64 native channel counts
//! of the target system. Payload values survive a write/read cycle
//! bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use num_complex::Complex64;

use super::FrameMask;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"HAFM";
const VERSION: u32 = 1;

/// A stored mask: the grid, the regularization weight it was estimated with,
/// and the target system's native channel counts needed to apply it.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskFile {
    pub mask: FrameMask,
    pub mu: f64,
    pub target_channel_counts: Vec<usize>,
}

impl MaskFile {
    pub fn new(mask: FrameMask, mu: f64, target_channel_counts: Vec<usize>) -> Result<Self> {
        if target_channel_counts.len() != mask.cols() {
            return Err(Error::argument(format!(
                "{} channel counts for a mask with {} columns",
                target_channel_counts.len(),
                mask.cols()
            )));
        }
        if target_channel_counts.contains(&0) {
            return Err(Error::argument("channel counts must be positive"));
        }
        Ok(MaskFile {
            mask,
            mu,
            target_channel_counts,
        })
    }
}

fn map_read(err: std::io::Error) -> Error {
    if err.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::format("unexpected end of file inside HAFM data")
    } else {
        Error::Io(err)
    }
}

pub fn write_hafm(file: &MaskFile, mut writer: impl Write) -> Result<()> {
    let sigma = file.mask.sigma();
    writer.write_all(MAGIC)?;
    writer.write_u32::<LittleEndian>(VERSION)?;
    writer.write_u64::<LittleEndian>(sigma.nrows() as u64)?;
    writer.write_u64::<LittleEndian>(sigma.ncols() as u64)?;
    writer.write_f64::<LittleEndian>(file.mu)?;
    for n in 0..sigma.ncols() {
        for m in 0..sigma.nrows() {
            writer.write_f64::<LittleEndian>(sigma[[m, n]].re)?;
            writer.write_f64::<LittleEndian>(sigma[[m, n]].im)?;
        }
    }
    for &count in &file.target_channel_counts {
        writer.write_u64::<LittleEndian>(count as u64)?;
    }
    Ok(())
}

pub fn read_hafm(mut reader: impl Read) -> Result<MaskFile> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(map_read)?;
    if &magic != MAGIC {
        return Err(Error::format(format!(
            "bad magic {magic:?}, not an HAFM file"
        )));
    }
    let version = reader.read_u32::<LittleEndian>().map_err(map_read)?;
    if version != VERSION {
        return Err(Error::format(format!(
            "unsupported HAFM version {version} (expected {VERSION})"
        )));
    }
    let rows = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
    let cols = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
    let mu = reader.read_f64::<LittleEndian>().map_err(map_read)?;
    if rows == 0 || cols == 0 {
        return Err(Error::format(format!("empty mask grid {rows}x{cols}")));
    }
    let mut sigma = Array2::from_elem((rows, cols), Complex64::new(0.0, 0.0));
    for n in 0..cols {
        for m in 0..rows {
            let re = reader.read_f64::<LittleEndian>().map_err(map_read)?;
            let im = reader.read_f64::<LittleEndian>().map_err(map_read)?;
            sigma[[m, n]] = Complex64::new(re, im);
        }
    }
    let mut counts = Vec::new();
    for _ in 0..cols {
        let count = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
        counts.push(count);
    }
    let mask = FrameMask::new(sigma).map_err(|e| Error::format(format!("bad mask data: {e}")))?;
    MaskFile::new(mask, mu, counts).map_err(|e| Error::format(format!("bad HAFM header: {e}")))
}

pub fn write_hafm_file(file: &MaskFile, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_hafm(file, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub fn read_hafm_file(path: impl AsRef<Path>) -> Result<MaskFile> {
    read_hafm(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mask_file(seed: u64) -> MaskFile {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = Array2::from_shape_fn((12, 5), |_| {
            Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
        });
        MaskFile::new(FrameMask::new(sigma).unwrap(), 1e-7, vec![12, 6, 4, 6, 12]).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let file = random_mask_file(51);
        let mut buf = Vec::new();
        write_hafm(&file, &mut buf).unwrap();
        let back = read_hafm(buf.as_slice()).unwrap();
        assert_eq!(file.mask.sigma(), back.mask.sigma());
        assert_eq!(file.mu.to_bits(), back.mu.to_bits());
        assert_eq!(file.target_channel_counts, back.target_channel_counts);
    }

    #[test]
    fn bad_magic_and_version_are_format_errors() {
        let file = random_mask_file(52);
        let mut buf = Vec::new();
        write_hafm(&file, &mut buf).unwrap();
        let mut corrupt = buf.clone();
        corrupt[2] = b'!';
        match read_hafm(corrupt.as_slice()) {
            Err(Error::Format(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
        let mut wrong_version = buf;
        wrong_version[4] = 2;
        match read_hafm(wrong_version.as_slice()) {
            Err(Error::Format(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_is_a_format_error() {
        let file = random_mask_file(53);
        let mut buf = Vec::new();
        write_hafm(&file, &mut buf).unwrap();
        for keep in [2usize, 10, 30, buf.len() - 5] {
            match read_hafm(&buf[..keep]) {
                Err(Error::Format(_)) => {}
                other => panic!("keep={keep}: expected format error, got {other:?}"),
            }
        }
    }
}
