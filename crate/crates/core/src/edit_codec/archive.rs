//! Self-describing container:
//! `"MSSZ" | version u8 | dtype u8 | ndims u8 | dims u64 × ndims | ξ f64 |
//! base-codec u8 | base-len u64 | base bytes | edit-codec u8 | edit-len u64 | edit bytes`.

use super::EditCodec;
use crate::error::{Error, Result};
use crate::field::Dtype;
use crate::grid::GridTopology;
use crate::huffman::Cursor;

pub const MAGIC: [u8; 4] = *b"MSSZ";
pub const ARCHIVE_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseCodecId {
    /// Base data compressed elsewhere; the archive carries no base payload.
    External,
    Builtin,
}

impl BaseCodecId {
    pub fn id(self) -> u8 {
        match self {
            BaseCodecId::External => 0,
            BaseCodecId::Builtin => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(BaseCodecId::External),
            1 => Ok(BaseCodecId::Builtin),
            other => Err(Error::UnsupportedCodec(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub dtype: Dtype,
    pub dims: Vec<usize>,
    pub xi: f64,
    pub base_codec: BaseCodecId,
    pub base: Vec<u8>,
    pub edit_codec: EditCodec,
    pub edits: Vec<u8>,
}

impl Archive {
    pub fn topology(&self) -> Result<GridTopology> {
        GridTopology::new(&self.dims)
    }
}

pub fn write_archive(a: &Archive) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + a.base.len() + a.edits.len());
    out.extend_from_slice(&MAGIC);
    out.push(ARCHIVE_VERSION);
    out.push(a.dtype.tag());
    out.push(a.dims.len() as u8);
    for &d in &a.dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.extend_from_slice(&a.xi.to_le_bytes());
    out.push(a.base_codec.id());
    out.extend_from_slice(&(a.base.len() as u64).to_le_bytes());
    out.extend_from_slice(&a.base);
    out.push(a.edit_codec.id());
    out.extend_from_slice(&(a.edits.len() as u64).to_le_bytes());
    out.extend_from_slice(&a.edits);
    out
}

pub fn read_archive(bytes: &[u8]) -> Result<Archive> {
    if bytes.len() < MAGIC.len() || bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut cur = Cursor::new(bytes);
    cur.take(4)?;
    let version = cur.u8()?;
    if version != ARCHIVE_VERSION {
        return Err(Error::VersionMismatch {
            expected: ARCHIVE_VERSION,
            found: version,
        });
    }
    let tag = cur.u8()?;
    let dtype =
        Dtype::from_tag(tag).ok_or_else(|| Error::corrupt(format!("unknown dtype tag {tag}")))?;
    let ndims = cur.u8()? as usize;
    let dims = (0..ndims)
        .map(|_| {
            let d = cur.u64()?;
            usize::try_from(d).map_err(|_| Error::corrupt("dimension exceeds address space"))
        })
        .collect::<Result<Vec<_>>>()?;
    GridTopology::new(&dims).map_err(|_| Error::corrupt(format!("invalid dims {dims:?}")))?;
    let xi = cur.f64()?;
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::corrupt(format!("invalid error bound {xi}")));
    }
    let base_codec = BaseCodecId::from_id(cur.u8()?)?;
    let base_len = cur.len()?;
    let base = cur.take(base_len)?.to_vec();
    let edit_codec = EditCodec::from_id(cur.u8()?)?;
    let edit_len = cur.len()?;
    let edits = cur.take(edit_len)?.to_vec();
    if cur.remaining() != 0 {
        return Err(Error::corrupt("trailing bytes after archive"));
    }
    Ok(Archive {
        dtype,
        dims,
        xi,
        base_codec,
        base,
        edit_codec,
        edits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Archive {
        Archive {
            dtype: Dtype::F32,
            dims: vec![4, 3, 2],
            xi: 0.125,
            base_codec: BaseCodecId::Builtin,
            base: vec![1, 2, 3, 4, 5],
            edit_codec: EditCodec::Deflate,
            edits: vec![9, 8, 7],
        }
    }

    #[test]
    fn round_trip_and_layout() {
        let a = sample();
        let bytes = write_archive(&a);
        assert_eq!(&bytes[..7], b"MSSZ\x01\x00\x03");
        assert_eq!(bytes.len(), 4 + 3 + 24 + 8 + 1 + 8 + 5 + 1 + 8 + 3);
        assert_eq!(read_archive(&bytes).unwrap(), a);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(read_archive(&[]), Err(Error::BadMagic)));
        assert!(matches!(read_archive(b"MSSY\x01"), Err(Error::BadMagic)));
        let mut bytes = write_archive(&sample());
        bytes[4] += 1;
        assert!(matches!(
            read_archive(&bytes),
            Err(Error::VersionMismatch { found: 2, .. })
        ));
        let good = write_archive(&sample());
        for cut in 4..good.len() {
            assert!(
                matches!(read_archive(&good[..cut]), Err(Error::Corrupt(_))),
                "cut {cut}"
            );
        }
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(read_archive(&long), Err(Error::Corrupt(_))));
    }
}
