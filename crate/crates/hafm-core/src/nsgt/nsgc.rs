//! NSGC coefficient files.
//!
//! Layout (all integers little-endian): magic `NSGC`, version u32 = 1, then
//! u64 `L`, `a`, `N`, `p`, `q`, f64 sample rate, `N` u64 channel counts
//! `M_n`, and the coefficients frame-major, channel-minor, each one as two
//! IEEE-754 f64 values (real, imaginary). Payload values survive a
//! write/read cycle bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::plan::NsgtPlan;
use super::transform::RaggedCoefficients;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"NSGC";
const VERSION: u32 = 1;

/// Truncation shows up as an unexpected EOF mid-record; report it as a
/// malformed file rather than an I/O failure.
fn map_read(err: std::io::Error) -> Error {
    if err.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::format("unexpected end of file inside NSGC data")
    } else {
        Error::Io(err)
    }
}

pub fn write_nsgc(coeffs: &RaggedCoefficients, mut writer: impl Write) -> Result<()> {
    let plan = coeffs.plan();
    writer.write_all(MAGIC)?;
    writer.write_u32::<LittleEndian>(VERSION)?;
    writer.write_u64::<LittleEndian>(plan.signal_len() as u64)?;
    writer.write_u64::<LittleEndian>(plan.time_hop() as u64)?;
    writer.write_u64::<LittleEndian>(plan.frame_count() as u64)?;
    writer.write_u64::<LittleEndian>(plan.p() as u64)?;
    writer.write_u64::<LittleEndian>(plan.q() as u64)?;
    writer.write_f64::<LittleEndian>(plan.sample_rate_hz())?;
    for &m in plan.channel_counts() {
        writer.write_u64::<LittleEndian>(m as u64)?;
    }
    for frame in coeffs.per_frame() {
        for c in frame {
            writer.write_f64::<LittleEndian>(c.re)?;
            writer.write_f64::<LittleEndian>(c.im)?;
        }
    }
    Ok(())
}

pub fn read_nsgc(mut reader: impl Read) -> Result<RaggedCoefficients> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(map_read)?;
    if &magic != MAGIC {
        return Err(Error::format(format!(
            "bad magic {magic:?}, not an NSGC file"
        )));
    }
    let version = reader.read_u32::<LittleEndian>().map_err(map_read)?;
    if version != VERSION {
        return Err(Error::format(format!(
            "unsupported NSGC version {version} (expected {VERSION})"
        )));
    }
    let signal_len = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
    let time_hop = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
    let frame_count = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
    let p = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
    let q = reader.read_u64::<LittleEndian>().map_err(map_read)? as usize;
    let sample_rate = reader.read_f64::<LittleEndian>().map_err(map_read)?;
    let mut channel_counts = Vec::new();
    for _ in 0..frame_count {
        channel_counts.push(reader.read_u64::<LittleEndian>().map_err(map_read)? as usize);
    }
    let plan = NsgtPlan::from_channel_counts(
        signal_len,
        time_hop,
        channel_counts,
        p,
        q,
        sample_rate,
    )
    .map_err(|e| Error::format(format!("inconsistent NSGC header: {e}")))?;
    let mut per_frame = Vec::new();
    for &m in plan.channel_counts() {
        let mut frame = Vec::new();
        for _ in 0..m {
            let re = reader.read_f64::<LittleEndian>().map_err(map_read)?;
            let im = reader.read_f64::<LittleEndian>().map_err(map_read)?;
            frame.push(Complex64::new(re, im));
        }
        per_frame.push(frame);
    }
    RaggedCoefficients::new(per_frame, plan)
}

pub fn write_nsgc_file(coeffs: &RaggedCoefficients, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_nsgc(coeffs, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub fn read_nsgc_file(path: impl AsRef<Path>) -> Result<RaggedCoefficients> {
    read_nsgc(BufReader::new(File::open(path)?))
}
