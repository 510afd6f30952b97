//! Portable binary TT file format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   8 bytes  "TTSENSE1"
//! N       u64
//! modes   N x u64
//! ranks   (N+1) x u64
//! open    u8       trailing-rank-open flag (0 or 1)
//! data    f64 x sum(R_{n-1} * I_n * R_n), cores in order, each row-major
//!         in (rank_left, mode, rank_right)
//! ```
//!
//! Writing then reading reproduces the tensor bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;

use super::TTTensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"TTSENSE1";

/// Sanity cap on total stored elements when reading (guards corrupt headers).
const MAX_FILE_ELEMENTS: u64 = 1 << 32;

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

impl TTTensor {
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for i in self.mode_sizes() {
            w.write_all(&(i as u64).to_le_bytes())?;
        }
        for r in self.ranks() {
            w.write_all(&(r as u64).to_le_bytes())?;
        }
        w.write_all(&[u8::from(self.trailing_rank_open)])?;
        for core in self.cores() {
            // Cores are kept in standard layout, so iteration order is the
            // storage order.
            for v in core.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                magic, MAGIC
            )));
        }
        let n = read_u64(r)? as usize;
        if n == 0 || n > 1 << 20 {
            return Err(Error::Format(format!("implausible mode count {n}")));
        }
        let modes: Vec<u64> = (0..n).map(|_| read_u64(r)).collect::<Result<_>>()?;
        let ranks: Vec<u64> = (0..=n).map(|_| read_u64(r)).collect::<Result<_>>()?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let open = match flag[0] {
            0 => false,
            1 => true,
            other => return Err(Error::Format(format!("bad trailing flag {other}"))),
        };
        let mut total: u64 = 0;
        for k in 0..n {
            let elems = ranks[k]
                .checked_mul(modes[k])
                .and_then(|v| v.checked_mul(ranks[k + 1]))
                .ok_or_else(|| Error::Format("element count overflow".into()))?;
            total = total
                .checked_add(elems)
                .ok_or_else(|| Error::Format("element count overflow".into()))?;
        }
        if total > MAX_FILE_ELEMENTS {
            return Err(Error::Format(format!("file declares {total} elements")));
        }
        let mut cores = Vec::with_capacity(n);
        for k in 0..n {
            let (rl, i, rr) = (ranks[k] as usize, modes[k] as usize, ranks[k + 1] as usize);
            let mut data = vec![0.0f64; rl * i * rr];
            let mut buf = [0u8; 8];
            for v in data.iter_mut() {
                r.read_exact(&mut buf)?;
                *v = f64::from_le_bytes(buf);
            }
            cores.push(
                Array3::from_shape_vec((rl, i, rr), data)
                    .map_err(|e| Error::Format(e.to_string()))?,
            );
        }
        if open {
            TTTensor::new_state(cores)
        } else {
            TTTensor::new(cores)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let tt = Self::read_from(&mut r)?;
        // Trailing garbage means the header lied about sizes.
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(Error::Format("trailing bytes after core data".into()));
        }
        Ok(tt)
    }
}
