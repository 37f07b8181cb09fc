use std::fs;
use std::path::Path;

use super::{AnyField, Dtype};
use crate::error::{Error, Result};
use crate::grid::GridTopology;

/// Reads a headerless little-endian array. Dims and dtype travel out of band.
pub fn load_raw(path: impl AsRef<Path>, dims: &[usize], dtype: Dtype) -> Result<AnyField> {
    let topology = GridTopology::new(dims)?;
    let bytes = fs::read(path)?;
    if bytes.len() != topology.vertex_count() * dtype.size() {
        return Err(Error::SizeMismatch {
            expected: topology.vertex_count(),
            actual: bytes.len() / dtype.size(),
        });
    }
    AnyField::from_le_bytes(topology, dtype, &bytes)
}

pub fn store_raw(field: &AnyField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, field.to_le_bytes())?;
    Ok(())
}
