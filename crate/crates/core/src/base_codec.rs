//! Built-in error-bounded compressor: order-1 Lorenzo prediction from
//! reconstructed neighbors, linear-scaling quantization with bin width 2ξ,
//! canonical Huffman over the quantization codes.
//!
//! Payload (little-endian):
//! `[u32 code count][u16 alphabet][u8 lengths][bitstream][u32 literal count][raw literals]`.
//! Symbol 0 escapes to the next raw literal; symbol `zigzag(q) + 1` encodes
//! quantization code `q`.

use crate::error::{Error, Result};
use crate::field::{AnyField, Dtype, Element, ScalarField};
use crate::grid::GridTopology;
use crate::huffman::{self, Cursor};

/// Codes with `|q|` at or above this are stored as raw literals.
pub const ESCAPE_THRESHOLD: i64 = (1 << 15) - 1;

const ESCAPE: u32 = 0;

#[derive(Debug, Clone)]
pub struct BaseOutput<T> {
    pub payload: Vec<u8>,
    /// Exactly what [`decompress_base`] will return for `payload`.
    pub reconstruction: ScalarField<T>,
}

#[inline]
fn zigzag(q: i64) -> u32 {
    ((q << 1) ^ (q >> 63)) as u32
}

#[inline]
fn unzigzag(z: u32) -> i64 {
    (i64::from(z) >> 1) ^ -(i64::from(z) & 1)
}

/// Order-1 Lorenzo prediction from already reconstructed values; neighbors
/// outside the grid contribute 0.
#[inline]
fn predict<T: Element>(topo: &GridTopology, recon: &[T], i: usize) -> f64 {
    let [x, y, z] = topo.coords(i);
    let dims = topo.dims();
    let sx = 1;
    let sy = dims[0];
    let at = |k: usize| recon[k].to_f64();
    if topo.ndims() == 2 {
        let mut p = 0.0;
        if x > 0 {
            p += at(i - sx);
        }
        if y > 0 {
            p += at(i - sy);
        }
        if x > 0 && y > 0 {
            p -= at(i - sx - sy);
        }
        p
    } else {
        let sz = dims[0] * dims[1];
        let (bx, by, bz) = (x > 0, y > 0, z > 0);
        let mut p = 0.0;
        if bx {
            p += at(i - sx);
        }
        if by {
            p += at(i - sy);
        }
        if bz {
            p += at(i - sz);
        }
        if bx && by {
            p -= at(i - sx - sy);
        }
        if bx && bz {
            p -= at(i - sx - sz);
        }
        if by && bz {
            p -= at(i - sy - sz);
        }
        if bx && by && bz {
            p += at(i - sx - sy - sz);
        }
        p
    }
}

#[inline]
fn dequantize<T: Element>(pred: f64, q: i64, xi: f64) -> T {
    T::from_f64(pred + 2.0 * xi * q as f64)
}

fn check_bound(xi: f64) -> Result<()> {
    if xi.is_finite() && xi > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBound(xi))
    }
}

pub fn compress_base<T: Element>(field: &ScalarField<T>, xi: f64) -> Result<BaseOutput<T>> {
    check_bound(xi)?;
    let topo = field.topology();
    let f = field.values();
    if let Some(index) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index,
            value: f[index].to_f64(),
        });
    }
    let n = f.len();
    let mut recon = vec![T::default(); n];
    let mut symbols = Vec::with_capacity(n);
    let mut literals = Vec::new();
    for i in 0..n {
        let pred = predict(topo, &recon, i);
        let fi = f[i].to_f64();
        let q = ((fi - pred) / (2.0 * xi)).round();
        let coded = (q.is_finite() && q.abs() < ESCAPE_THRESHOLD as f64)
            .then(|| {
                let q = q as i64;
                let r: T = dequantize(pred, q, xi);
                // casting to T can push the reconstruction off the bound
                (r.is_finite() && (fi - r.to_f64()).abs() <= xi).then_some((q, r))
            })
            .flatten();
        match coded {
            Some((q, r)) => {
                symbols.push(zigzag(q) + 1);
                recon[i] = r;
            }
            None => {
                symbols.push(ESCAPE);
                f[i].write_le(&mut literals);
                recon[i] = f[i];
            }
        }
    }
    let mut payload = Vec::new();
    huffman::encode_block(&symbols, &mut payload);
    let literal_count = (literals.len() / T::SIZE) as u32;
    payload.extend_from_slice(&literal_count.to_le_bytes());
    payload.extend_from_slice(&literals);
    Ok(BaseOutput {
        payload,
        reconstruction: ScalarField::new(topo.clone(), recon)?,
    })
}

pub fn decompress_base<T: Element>(
    payload: &[u8],
    topo: &GridTopology,
    xi: f64,
) -> Result<ScalarField<T>> {
    check_bound(xi)?;
    if payload.is_empty() {
        return Err(Error::corrupt("empty base payload"));
    }
    let n = topo.vertex_count();
    let mut pos = 0;
    let symbols = huffman::decode_block(payload, &mut pos)?;
    if symbols.len() != n {
        return Err(Error::corrupt(format!(
            "base payload holds {} codes, grid has {n} vertices",
            symbols.len()
        )));
    }
    let mut cur = Cursor {
        bytes: payload,
        pos,
    };
    let literal_count = cur.u32()? as usize;
    let escapes = symbols.iter().filter(|&&s| s == ESCAPE).count();
    if literal_count != escapes {
        return Err(Error::corrupt("literal count does not match escape codes"));
    }
    let literal_bytes = cur.take(
        literal_count
            .checked_mul(T::SIZE)
            .ok_or_else(|| Error::corrupt("literal count overflow"))?,
    )?;
    if cur.remaining() != 0 {
        return Err(Error::corrupt("trailing bytes after base payload"));
    }
    let mut literals = literal_bytes.chunks_exact(T::SIZE).map(T::read_le);
    let mut recon = vec![T::default(); n];
    for i in 0..n {
        recon[i] = match symbols[i] {
            ESCAPE => literals.next().unwrap(),
            s => dequantize(predict(topo, &recon, i), unzigzag(s - 1), xi),
        };
    }
    ScalarField::new(topo.clone(), recon).map_err(|e| match e {
        Error::NonFinite { .. } => Error::corrupt("base payload decodes to non-finite values"),
        e => e,
    })
}

/// Type-erased wrapper around [`compress_base`].
pub fn compress_any(field: &AnyField, xi: f64) -> Result<(Vec<u8>, AnyField)> {
    Ok(match field {
        AnyField::F32(f) => {
            let out = compress_base(f, xi)?;
            (out.payload, out.reconstruction.into())
        }
        AnyField::F64(f) => {
            let out = compress_base(f, xi)?;
            (out.payload, out.reconstruction.into())
        }
    })
}

pub fn decompress_any(
    payload: &[u8],
    topo: &GridTopology,
    dtype: Dtype,
    xi: f64,
) -> Result<AnyField> {
    Ok(match dtype {
        Dtype::F32 => decompress_base::<f32>(payload, topo, xi)?.into(),
        Dtype::F64 => decompress_base::<f64>(payload, topo, xi)?.into(),
    })
}
