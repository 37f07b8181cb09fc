use crate::error::{Error, Result};
use crate::field::{bound_deviation, Element, ScalarField};
use crate::grid::GridTopology;

/// Mutable working copy `g` of the decompressed field, plus everything needed
/// to lower values without leaving `(f - ξ, f̂]`.
#[derive(Debug, Clone)]
pub struct EditState<T> {
    topology: GridTopology,
    original: Vec<T>,
    initial: Vec<T>,
    g: Vec<T>,
    xi: f64,
    halvings: Vec<u32>,
    max_halvings: u32,
}

/// Outcome of one [`EditState::lower_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Lowered,
    AtFloor,
}

/// One halving toward `f - ξ`, clamped to the smallest value above it.
/// `None` when `g` is already at that floor.
#[inline]
pub fn lowered_value<T: Element>(g: T, f: T, xi: f64) -> Option<T> {
    let lo = f.to_f64() - xi;
    let floor = T::floor_above(lo);
    let mut next = T::from_f64((g.to_f64() + lo) * 0.5);
    if next < floor {
        next = floor;
    }
    if next < g {
        Some(next)
    } else if floor < g {
        Some(floor)
    } else {
        None
    }
}

impl<T: Element> EditState<T> {
    /// Starts from `g = f̂`. Fails when `f̂` already violates the bound unless
    /// `force` is set.
    pub fn new(
        original: &ScalarField<T>,
        decompressed: &ScalarField<T>,
        xi: f64,
        force: bool,
    ) -> Result<Self> {
        if original.topology() != decompressed.topology() {
            return Err(Error::TopologyMismatch);
        }
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::InvalidBound(xi));
        }
        let (worst, count) = bound_deviation(original.values(), decompressed.values(), xi);
        if count > 0 {
            if !force {
                return Err(Error::BoundViolation {
                    count,
                    bound: xi,
                    worst,
                });
            }
            log::warn!("decompressed input violates the bound at {count} vertices (worst {worst}); continuing");
        }
        Ok(Self {
            topology: original.topology().clone(),
            original: original.values().to_vec(),
            initial: decompressed.values().to_vec(),
            g: decompressed.values().to_vec(),
            xi,
            halvings: vec![0; original.len()],
            max_halvings: super::DEFAULT_MAX_HALVINGS,
        })
    }

    pub fn with_max_halvings(mut self, max: u32) -> Self {
        self.max_halvings = max;
        self
    }

    pub fn topology(&self) -> &GridTopology {
        &self.topology
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn original(&self) -> &[T] {
        &self.original
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    /// Current edited values.
    pub fn values(&self) -> &[T] {
        &self.g
    }

    pub fn can_lower(&self, t: usize) -> bool {
        lowered_value(self.g[t], self.original[t], self.xi).is_some()
    }

    /// `g_t <- (g_t + f_t - ξ) / 2`, clamped to the float floor.
    pub fn lower_step(&mut self, t: usize) -> Result<Step> {
        if t >= self.g.len() {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.g.len(),
            });
        }
        match lowered_value(self.g[t], self.original[t], self.xi) {
            Some(v) => {
                self.set(t, v)?;
                Ok(Step::Lowered)
            }
            None => Ok(Step::AtFloor),
        }
    }

    /// Writes a value computed by [`lowered_value`] from the current `g_t`.
    pub(crate) fn set(&mut self, t: usize, v: T) -> Result<()> {
        debug_assert!(v < self.g[t]);
        self.halvings[t] += 1;
        if self.halvings[t] > self.max_halvings {
            return Err(Error::NonConvergence(format!(
                "vertex {t} lowered more than {} times (f = {:?}, g = {:?}, ξ = {})",
                self.max_halvings, self.original[t], self.g[t], self.xi
            )));
        }
        self.g[t] = v;
        Ok(())
    }

    /// Vertices whose value differs from the decompressed input.
    pub fn touched(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.g.len()).filter(|&i| self.g[i] != self.initial[i])
    }

    pub fn into_field(self) -> Result<ScalarField<T>> {
        ScalarField::new(self.topology, self.g)
    }
}
