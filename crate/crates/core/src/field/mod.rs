//! Scalar fields on a regular grid, raw I/O and error-bound resolution.

mod element;
mod raw;
pub mod synthetic;

pub use element::{Dtype, Element};
pub use raw::{load_raw, store_raw};
pub use synthetic::{generate_synthetic, SyntheticKind};

use crate::error::{Error, Result};
use crate::grid::GridTopology;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    topology: GridTopology,
    values: Vec<T>,
}

impl<T: Element> ScalarField<T> {
    /// Wraps `values`, rejecting length mismatches and non-finite entries.
    pub fn new(topology: GridTopology, values: Vec<T>) -> Result<Self> {
        if values.len() != topology.vertex_count() {
            return Err(Error::SizeMismatch {
                expected: topology.vertex_count(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: values[index].to_f64(),
            });
        }
        Ok(Self { topology, values })
    }

    pub fn from_fn(topology: GridTopology, f: impl FnMut(usize) -> T) -> Result<Self> {
        let values = (0..topology.vertex_count()).map(f).collect();
        Self::new(topology, values)
    }

    pub fn topology(&self) -> &GridTopology {
        &self.topology
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(min, max)` over all values, widened to f64.
    pub fn value_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let v = v.to_f64();
                (lo.min(v), hi.max(v))
            })
    }

    pub fn cast<U: Element>(&self) -> ScalarField<U> {
        ScalarField {
            topology: self.topology.clone(),
            values: self
                .values
                .iter()
                .map(|v| U::from_f64(v.to_f64()))
                .collect(),
        }
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * T::SIZE);
        for v in &self.values {
            v.write_le(&mut out);
        }
        out
    }

    pub fn from_le_bytes(topology: GridTopology, bytes: &[u8]) -> Result<Self> {
        let expected = topology.vertex_count() * T::SIZE;
        if bytes.len() != expected {
            return Err(Error::SizeMismatch {
                expected: topology.vertex_count(),
                actual: bytes.len() / T::SIZE,
            });
        }
        let values = bytes.chunks_exact(T::SIZE).map(T::read_le).collect();
        Self::new(topology, values)
    }
}

/// A field whose element type is only known at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    F32(ScalarField<f32>),
    F64(ScalarField<f64>),
}

impl AnyField {
    pub fn dtype(&self) -> Dtype {
        match self {
            AnyField::F32(_) => Dtype::F32,
            AnyField::F64(_) => Dtype::F64,
        }
    }

    pub fn topology(&self) -> &GridTopology {
        match self {
            AnyField::F32(f) => f.topology(),
            AnyField::F64(f) => f.topology(),
        }
    }

    pub fn value_range(&self) -> (f64, f64) {
        match self {
            AnyField::F32(f) => f.value_range(),
            AnyField::F64(f) => f.value_range(),
        }
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        match self {
            AnyField::F32(f) => f.to_le_bytes(),
            AnyField::F64(f) => f.to_le_bytes(),
        }
    }

    pub fn from_le_bytes(topology: GridTopology, dtype: Dtype, bytes: &[u8]) -> Result<Self> {
        Ok(match dtype {
            Dtype::F32 => AnyField::F32(ScalarField::from_le_bytes(topology, bytes)?),
            Dtype::F64 => AnyField::F64(ScalarField::from_le_bytes(topology, bytes)?),
        })
    }
}

impl From<ScalarField<f32>> for AnyField {
    fn from(f: ScalarField<f32>) -> Self {
        AnyField::F32(f)
    }
}

impl From<ScalarField<f64>> for AnyField {
    fn from(f: ScalarField<f64>) -> Self {
        AnyField::F64(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Absolute,
    Relative,
}

impl std::str::FromStr for BoundMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "abs" | "absolute" => Ok(BoundMode::Absolute),
            "rel" | "relative" => Ok(BoundMode::Relative),
            other => Err(format!(
                "unknown bound mode '{other}' (expected abs or rel)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    pub mode: BoundMode,
    pub magnitude: f64,
}

impl ErrorBound {
    pub fn absolute(magnitude: f64) -> Self {
        Self {
            mode: BoundMode::Absolute,
            magnitude,
        }
    }

    pub fn relative(magnitude: f64) -> Self {
        Self {
            mode: BoundMode::Relative,
            magnitude,
        }
    }

    /// Absolute bound ξ for `field`; relative bounds scale by the global value range.
    pub fn resolve(&self, value_range: (f64, f64)) -> Result<f64> {
        if !(self.magnitude.is_finite() && self.magnitude > 0.0) {
            return Err(Error::InvalidBound(self.magnitude));
        }
        match self.mode {
            BoundMode::Absolute => Ok(self.magnitude),
            BoundMode::Relative => {
                let range = value_range.1 - value_range.0;
                if range.is_nan() || range <= 0.0 {
                    return Err(Error::ZeroRange);
                }
                Ok(self.magnitude * range)
            }
        }
    }
}

pub fn resolve_bound<T: Element>(eb: ErrorBound, field: &ScalarField<T>) -> Result<f64> {
    eb.resolve(field.value_range())
}

/// Largest `|a_i - b_i|` and the number of vertices exceeding `bound`.
pub fn bound_deviation<T: Element>(a: &[T], b: &[T], bound: f64) -> (f64, usize) {
    a.iter()
        .zip(b)
        .fold((0.0f64, 0usize), |(worst, count), (x, y)| {
            let d = (x.to_f64() - y.to_f64()).abs();
            (worst.max(d), count + usize::from(d > bound))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dims: &[usize]) -> GridTopology {
        GridTopology::new(dims).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        assert!(matches!(
            ScalarField::new(grid(&[2, 2]), vec![0.0f32, 1.0, f32::NAN, 0.0]),
            Err(Error::NonFinite { index: 2, .. })
        ));
        assert!(matches!(
            ScalarField::new(grid(&[2, 2]), vec![0.0f64, f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            ScalarField::new(grid(&[2, 2]), vec![0.0f64; 3]),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn resolve_absolute_and_relative() {
        let f = ScalarField::from_fn(grid(&[11, 2]), |i| (i % 11) as f64).unwrap();
        assert_eq!(resolve_bound(ErrorBound::absolute(1e-3), &f).unwrap(), 1e-3);
        assert!((resolve_bound(ErrorBound::relative(1e-2), &f).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn relative_on_constant_field_fails() {
        let f = ScalarField::new(grid(&[3, 3]), vec![2.0f32; 9]).unwrap();
        assert!(matches!(
            resolve_bound(ErrorBound::relative(1e-2), &f),
            Err(Error::ZeroRange)
        ));
        assert!(matches!(
            resolve_bound(ErrorBound::absolute(0.0), &f),
            Err(Error::InvalidBound(_))
        ));
    }

    #[test]
    fn relative_on_gaussian_mixture() {
        let f: ScalarField<f64> =
            generate_synthetic(SyntheticKind::GaussianMixture, &[32, 32], 3).unwrap();
        let (lo, hi) = f
            .values()
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert_eq!(
            resolve_bound(ErrorBound::relative(1e-3), &f).unwrap(),
            1e-3 * (hi - lo)
        );
    }
}
