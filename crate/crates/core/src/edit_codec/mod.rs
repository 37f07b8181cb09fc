//! Lossless serialization of edit sets and of the combined archive.
//!
//! Edit payload, before the backend stage (little-endian):
//! `count u64 | index-stream-len u64 | index bytes | value bytes`.
//! The index stream holds the first index and then successive differences as
//! LEB128 varints, run-length coded and Huffman coded. Values are the raw
//! edited values in index order. The backend (store or DEFLATE) wraps the
//! whole payload.

mod archive;
pub mod rle;
pub mod varint;

use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

pub use archive::{read_archive, write_archive, Archive, BaseCodecId, ARCHIVE_VERSION, MAGIC};

use crate::edit_engine::{AnyEditSet, EditSet};
use crate::error::{Error, Result};
use crate::field::{Dtype, Element};
use crate::huffman::{self, Cursor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EditCodec {
    Store,
    #[default]
    Deflate,
}

impl EditCodec {
    pub fn id(self) -> u8 {
        match self {
            EditCodec::Store => 0,
            EditCodec::Deflate => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(EditCodec::Store),
            1 => Ok(EditCodec::Deflate),
            other => Err(Error::UnsupportedCodec(other)),
        }
    }

    fn wrap(self, bytes: Vec<u8>) -> Vec<u8> {
        match self {
            EditCodec::Store => bytes,
            EditCodec::Deflate => {
                let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
                enc.write_all(&bytes).expect("in-memory write");
                enc.finish().expect("in-memory write")
            }
        }
    }

    fn unwrap(self, bytes: &[u8]) -> Result<Vec<u8>> {
        match self {
            EditCodec::Store => Ok(bytes.to_vec()),
            EditCodec::Deflate => {
                let mut out = Vec::new();
                DeflateDecoder::new(bytes)
                    .read_to_end(&mut out)
                    .map_err(|e| Error::corrupt(format!("deflate stream: {e}")))?;
                Ok(out)
            }
        }
    }
}

impl std::str::FromStr for EditCodec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "store" | "none" => Ok(EditCodec::Store),
            "deflate" => Ok(EditCodec::Deflate),
            other => Err(format!(
                "unknown edit codec '{other}' (expected store or deflate)"
            )),
        }
    }
}

/// First index as is, then successive differences.
pub fn index_deltas(indices: &[usize]) -> Result<Vec<u64>> {
    let mut prev = None;
    indices
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let d = match prev {
                None => i as u64,
                Some(p) if i > p => (i - p) as u64,
                Some(_) => return Err(Error::UnsortedIndices(pos)),
            };
            prev = Some(i);
            Ok(d)
        })
        .collect()
}

fn encode_index_stream(indices: &[usize]) -> Result<Vec<u8>> {
    if indices.is_empty() {
        return Ok(Vec::new());
    }
    let mut varints = Vec::with_capacity(indices.len());
    for d in index_deltas(indices)? {
        varint::write_u64(d, &mut varints);
    }
    let symbols: Vec<u32> = rle::encode(&varints).into_iter().map(u32::from).collect();
    let mut out = Vec::new();
    huffman::encode_block(&symbols, &mut out);
    Ok(out)
}

fn decode_index_stream(bytes: &[u8], count: usize) -> Result<Vec<usize>> {
    if count == 0 {
        return if bytes.is_empty() {
            Ok(Vec::new())
        } else {
            Err(Error::corrupt("index stream present for an empty edit set"))
        };
    }
    let mut pos = 0;
    let symbols = huffman::decode_block(bytes, &mut pos)?;
    if pos != bytes.len() {
        return Err(Error::corrupt("trailing bytes after index stream"));
    }
    let rle_bytes = symbols
        .into_iter()
        .map(|s| u8::try_from(s).map_err(|_| Error::corrupt("index symbol exceeds a byte")))
        .collect::<Result<Vec<u8>>>()?;
    let varints = rle::decode(&rle_bytes)?;
    let mut indices = Vec::with_capacity(count);
    let mut pos = 0;
    let mut prev: Option<usize> = None;
    while pos < varints.len() {
        let d = varint::read_u64(&varints, &mut pos)?;
        let d = usize::try_from(d).map_err(|_| Error::corrupt("index exceeds address space"))?;
        let i = match prev {
            None => d,
            Some(_) if d == 0 => return Err(Error::corrupt("zero index delta")),
            Some(p) => p
                .checked_add(d)
                .ok_or_else(|| Error::corrupt("index overflows"))?,
        };
        indices.push(i);
        prev = Some(i);
    }
    if indices.len() != count {
        return Err(Error::corrupt(format!(
            "index stream holds {} entries, header says {count}",
            indices.len()
        )));
    }
    Ok(indices)
}

pub fn encode_edits<T: Element>(edits: &EditSet<T>, codec: EditCodec) -> Result<Vec<u8>> {
    let index_bytes = encode_index_stream(edits.indices())?;
    let mut out = Vec::with_capacity(16 + index_bytes.len() + edits.len() * T::SIZE);
    out.extend_from_slice(&(edits.len() as u64).to_le_bytes());
    out.extend_from_slice(&(index_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&index_bytes);
    for &v in edits.values() {
        v.write_le(&mut out);
    }
    Ok(codec.wrap(out))
}

pub fn decode_edits<T: Element>(payload: &[u8], codec: EditCodec) -> Result<EditSet<T>> {
    let raw = codec.unwrap(payload)?;
    let mut cur = Cursor::new(&raw);
    let count = usize::try_from(cur.u64()?).map_err(|_| Error::corrupt("edit count overflow"))?;
    let index_len = cur.len()?;
    let index_bytes = cur.take(index_len)?;
    let value_len = count
        .checked_mul(T::SIZE)
        .filter(|&n| n == cur.remaining())
        .ok_or_else(|| Error::corrupt("value stream length does not match edit count"))?;
    let value_bytes = cur.take(value_len)?;
    let indices = decode_index_stream(index_bytes, count)?;
    let values = value_bytes.chunks_exact(T::SIZE).map(T::read_le).collect();
    EditSet::new(indices, values)
}

pub fn encode_edits_any(edits: &AnyEditSet, codec: EditCodec) -> Result<Vec<u8>> {
    match edits {
        AnyEditSet::F32(e) => encode_edits(e, codec),
        AnyEditSet::F64(e) => encode_edits(e, codec),
    }
}

pub fn decode_edits_any(payload: &[u8], codec: EditCodec, dtype: Dtype) -> Result<AnyEditSet> {
    Ok(match dtype {
        Dtype::F32 => AnyEditSet::F32(decode_edits(payload, codec)?),
        Dtype::F64 => AnyEditSet::F64(decode_edits(payload, codec)?),
    })
}

/// Standalone edit file: `codec u8 | dtype u8 | edit payload`.
pub fn write_edit_file(edits: &AnyEditSet, codec: EditCodec) -> Result<Vec<u8>> {
    let mut out = vec![codec.id(), edits.dtype().tag()];
    out.extend_from_slice(&encode_edits_any(edits, codec)?);
    Ok(out)
}

pub fn read_edit_file(bytes: &[u8]) -> Result<AnyEditSet> {
    let [codec, dtype, payload @ ..] = bytes else {
        return Err(Error::corrupt("edit file too short"));
    };
    let dtype = Dtype::from_tag(*dtype)
        .ok_or_else(|| Error::corrupt(format!("unknown dtype tag {dtype}")))?;
    decode_edits_any(payload, EditCodec::from_id(*codec)?, dtype)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn worked_delta_example() {
        assert_eq!(
            index_deltas(&[1, 35, 36, 421, 422, 423]).unwrap(),
            vec![1, 34, 1, 385, 1, 1]
        );
        assert!(matches!(
            index_deltas(&[3, 3]),
            Err(Error::UnsortedIndices(1))
        ));
    }

    #[test]
    fn empty_set_has_empty_streams() {
        let bytes = encode_edits(&EditSet::<f32>::empty(), EditCodec::Store).unwrap();
        assert_eq!(bytes, [0u8; 16]);
        assert!(decode_edits::<f32>(&bytes, EditCodec::Store)
            .unwrap()
            .is_empty());
        for codec in [EditCodec::Store, EditCodec::Deflate] {
            let b = encode_edits(&EditSet::<f64>::empty(), codec).unwrap();
            assert!(decode_edits::<f64>(&b, codec).unwrap().is_empty());
        }
    }

    #[test]
    fn corrupt_and_unsupported() {
        let e = EditSet::new(vec![1, 35, 36, 421, 422, 423], vec![0.5f32; 6]).unwrap();
        let bytes = encode_edits(&e, EditCodec::Store).unwrap();
        for cut in 0..bytes.len() {
            assert!(
                decode_edits::<f32>(&bytes[..cut], EditCodec::Store).is_err(),
                "cut {cut}"
            );
        }
        // value stream sized for f32, read as f64
        assert!(decode_edits::<f64>(&bytes, EditCodec::Store).is_err());
        assert!(matches!(
            EditCodec::from_id(7),
            Err(Error::UnsupportedCodec(7))
        ));
        let file = write_edit_file(&AnyEditSet::F32(e), EditCodec::Store).unwrap();
        let mut bad = file.clone();
        bad[0] = 9;
        assert!(matches!(
            read_edit_file(&bad),
            Err(Error::UnsupportedCodec(9))
        ));
        assert!(read_edit_file(&file[..1]).is_err());
        assert!(decode_edits::<f32>(b"not deflate", EditCodec::Deflate).is_err());
    }

    #[test]
    fn clustered_indices_beat_naive_layout() {
        let mut indices = Vec::new();
        for patch in 0..40usize {
            let start = patch * 997;
            indices.extend(start..start + 25);
        }
        let values: Vec<f32> = indices.iter().map(|&i| i as f32 * 0.25).collect();
        let e = EditSet::new(indices, values).unwrap();
        let naive = e.len() * (8 + 4);
        for codec in [EditCodec::Store, EditCodec::Deflate] {
            let bytes = encode_edits(&e, codec).unwrap();
            assert!(bytes.len() < naive, "{codec:?}: {} >= {naive}", bytes.len());
            assert_eq!(decode_edits::<f32>(&bytes, codec).unwrap(), e);
        }
    }

    proptest! {
        #[test]
        fn round_trip_bit_exact(
            raw in prop::collection::btree_map(0usize..1_000_000, any::<u64>(), 0..200),
            deflate in any::<bool>(),
        ) {
            let codec = if deflate { EditCodec::Deflate } else { EditCodec::Store };
            let indices: Vec<usize> = raw.keys().copied().collect();
            let values: Vec<f64> = raw.values().map(|&b| f64::from_bits(b)).collect();
            let e = EditSet::new(indices, values).unwrap();
            let back: EditSet<f64> = decode_edits(&encode_edits(&e, codec).unwrap(), codec).unwrap();
            prop_assert_eq!(back.indices(), e.indices());
            let bits = |s: &EditSet<f64>| s.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&e));
        }
    }
}
