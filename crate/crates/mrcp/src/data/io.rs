//! The "EPO1" binary epoch container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "EPO1"
//! version u32      = 1
//! K       u32      class count
//! N       u32      trial count
//! C       u32      channels
//! T       u32      samples per channel
//! fs      f32      sampling rate, Hz
//! trial record × N:
//!     label u16
//!     onset i32    movement-onset sample, -1 when absent
//! payload: N × C × T f32 samples, trial-major then channel-major
//! ```
//!
//! Samples are stored as f32. In memory the crate computes in f64, so
//! [`write_epochs`] narrows to f32; every `Epochs` produced by this crate
//! (synthetic generation, `read_epochs`) carries exactly f32-representable
//! values, making write → read → write byte-stable and read(write(e)) == e.
//! Channel names are not persisted; `read_epochs` assigns `ch0..chN`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::{Epochs, Trial};

pub const EPOCH_MAGIC: [u8; 4] = *b"EPO1";
const VERSION: u32 = 1;
const DIM_LIMIT: u64 = 1 << 31;

fn check_dim(what: &'static str, value: usize) -> Result<u32> {
    if (value as u64) >= DIM_LIMIT {
        return Err(Error::UnrepresentableDim {
            what,
            value: value as u64,
            limit: DIM_LIMIT,
        });
    }
    Ok(value as u32)
}

/// Serialize epochs into the EPO1 byte layout.
pub fn epochs_to_bytes(epochs: &Epochs) -> Result<Vec<u8>> {
    epochs.validate()?;
    let k = check_dim("class count", epochs.class_count)?;
    let n = check_dim("trial count", epochs.len())?;
    let c = check_dim("channels", epochs.channels())?;
    let t = check_dim("samples", epochs.samples())?;

    let mut buf = Vec::with_capacity(24 + epochs.len() * (6 + epochs.channels() * epochs.samples() * 4));
    buf.extend_from_slice(&EPOCH_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&k.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&c.to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    buf.extend_from_slice(&(epochs.fs() as f32).to_le_bytes());

    for trial in &epochs.trials {
        if trial.label > u16::MAX as usize {
            return Err(Error::UnrepresentableDim {
                what: "label",
                value: trial.label as u64,
                limit: u16::MAX as u64 + 1,
            });
        }
        buf.extend_from_slice(&(trial.label as u16).to_le_bytes());
        let onset = trial.onset_sample.map(|o| o as i32).unwrap_or(-1);
        buf.extend_from_slice(&onset.to_le_bytes());
    }
    for trial in &epochs.trials {
        for row in trial.data.rows() {
            for &v in row {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    Ok(buf)
}

/// Write epochs to `path` in the EPO1 format.
pub fn write_epochs(epochs: &Epochs, path: impl AsRef<Path>) -> Result<()> {
    let bytes = epochs_to_bytes(epochs)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Truncated {
                what,
                needed: self.pos + n - self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn i32(&mut self, what: &'static str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f32(&mut self, what: &'static str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Parse epochs from EPO1 bytes.
pub fn epochs_from_bytes(bytes: &[u8]) -> Result<Epochs> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    if magic != EPOCH_MAGIC {
        return Err(Error::BadMagic {
            expected: EPOCH_MAGIC,
            found: magic,
        });
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::invalid("epoch file", format!("unknown version {version}")));
    }
    let k = cur.u32("class count")? as usize;
    let n = cur.u32("trial count")? as usize;
    let c = cur.u32("channels")? as usize;
    let t = cur.u32("samples")? as usize;
    let fs = cur.f32("fs")? as f64;

    let mut headers = Vec::with_capacity(n);
    for _ in 0..n {
        let label = cur.u16("trial label")? as usize;
        if label >= k {
            return Err(Error::LabelOutOfRange { label, classes: k });
        }
        let onset = cur.i32("trial onset")?;
        let onset = if onset < 0 { None } else { Some(onset as usize) };
        headers.push((label, onset));
    }

    let mut trials = Vec::with_capacity(n);
    for (label, onset) in headers {
        let mut data = Array2::zeros((c, t));
        for ch in 0..c {
            for s in 0..t {
                data[[ch, s]] = cur.f32("sample payload")? as f64;
            }
        }
        trials.push(Trial::new(data, fs, label, onset)?);
    }
    Epochs::new(trials, k, Epochs::default_channel_names(c))
}

/// Read epochs from an EPO1 file.
pub fn read_epochs(path: impl AsRef<Path>) -> Result<Epochs> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    epochs_from_bytes(&bytes)
}
