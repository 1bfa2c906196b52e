//! Binary tensor records.
//!
//! Checkpoint file layout (all integers and floats little-endian):
//!
//! ```text
//! magic    b"SCNN"
//! version  u32
//! records  until EOF, each:
//!   name_len u32, name (UTF-8), rank u32, extents u64 × rank, data f64 × Π extents
//! ```
//!
//! The record encoding is shared with the dataset file.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::nn::model::Model;
use crate::tensor::Tensor;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SCNN";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn write_tensor(w: &mut impl Write, name: &str, t: &Tensor) -> io::Result<()> {
    write_u32(w, name.len() as u32)?;
    w.write_all(name.as_bytes())?;
    write_u32(w, t.rank() as u32)?;
    for &e in t.shape() {
        write_u64(w, e as u64)?;
    }
    for &v in t.data() {
        write_f64(w, v)?;
    }
    Ok(())
}

/// Reads one record; `Ok(None)` on a clean end of stream.
pub fn read_tensor(r: &mut impl Read) -> Result<Option<(String, Tensor)>> {
    let mut first = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        let n = r.read(&mut first[got..])?;
        if n == 0 {
            if got == 0 {
                return Ok(None);
            }
            return Err(Error::Format("truncated tensor record".into()));
        }
        got += n;
    }
    let name_len = u32::from_le_bytes(first) as usize;
    if name_len > 1 << 16 {
        return Err(Error::Format(format!("tensor name length {name_len} is implausible")));
    }
    let mut name = vec![0u8; name_len];
    r.read_exact(&mut name)?;
    let name = String::from_utf8(name).map_err(|e| Error::Format(e.to_string()))?;
    let rank = read_u32(r)? as usize;
    if rank > 16 {
        return Err(Error::Format(format!("tensor `{name}` has rank {rank}")));
    }
    let shape = (0..rank)
        .map(|_| read_u64(r).map(|v| v as usize))
        .collect::<io::Result<Vec<_>>>()?;
    let n: usize = shape.iter().product();
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        data.push(read_f64(r)?);
    }
    Ok(Some((name, Tensor::new(shape, data)?)))
}

pub fn write_checkpoint(w: &mut impl Write, tensors: &[(String, Tensor)]) -> io::Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    write_u32(w, CHECKPOINT_VERSION)?;
    for (name, t) in tensors {
        write_tensor(w, name, t)?;
    }
    Ok(())
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<Vec<(String, Tensor)>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a checkpoint file (bad magic)".into()));
    }
    let version = read_u32(r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let mut out = Vec::new();
    while let Some(rec) = read_tensor(r)? {
        out.push(rec);
    }
    Ok(out)
}

/// Model state plus any extra named tensors (e.g. scaler statistics).
pub fn save_model(w: &mut impl Write, model: &Model, extra: &[(String, Tensor)]) -> io::Result<()> {
    let mut all = model.state();
    all.extend_from_slice(extra);
    write_checkpoint(w, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn records_roundtrip_bitwise(
            shapes in prop::collection::vec(prop::collection::vec(1usize..4, 1..4), 0..4),
            seed in any::<u64>(),
        ) {
            let mut s = seed;
            let tensors: Vec<(String, Tensor)> = shapes
                .iter()
                .enumerate()
                .map(|(i, sh)| {
                    let t = Tensor::from_fn(sh, |_| {
                        s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                        f64::from_bits(s >> 2)
                    });
                    (format!("t{i}.ä"), t)
                })
                .collect();
            let mut buf = Vec::new();
            write_checkpoint(&mut buf, &tensors).unwrap();
            let back = read_checkpoint(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), tensors.len());
            for ((n1, t1), (n2, t2)) in back.iter().zip(&tensors) {
                prop_assert_eq!(n1, n2);
                prop_assert_eq!(t1.shape(), t2.shape());
                let b1: Vec<u64> = t1.data().iter().map(|v| v.to_bits()).collect();
                let b2: Vec<u64> = t2.data().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(b1, b2);
            }
            let mut again = Vec::new();
            write_checkpoint(&mut again, &back).unwrap();
            prop_assert_eq!(again, buf);
        }
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(read_checkpoint(&mut &b"XXXX\x01\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &[("a".into(), Tensor::vector(vec![1.0, 2.0]))]).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_checkpoint(&mut buf.as_slice()).is_err());
    }
}
