//! Derivation of value-decreasing edits that make a decompressed field's
//! Morse-Smale segmentation identical to the original's.
//!
//! Two inner loops alternate until neither changes anything:
//!
//! * the critical-point loop removes false positive/negative maxima and minima,
//! * the regular-point loop walks each falsely labeled vertex's integral line
//!   in the original field and lowers the first vertex where the edited field
//!   steers elsewhere.
//!
//! Every edit lowers one value halfway toward `f - ξ`, so values only ever
//! decrease and never leave the error bound.

mod c_loop;
mod r_loop;
mod state;

use serde::Serialize;

pub use c_loop::{FalseCriticalReport, FalseKind};
pub use r_loop::LineKind;
pub use state::{lowered_value, EditState, Step};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{AnyField, Dtype, Element, ScalarField};
use crate::mss::{self, DirectionField, SegmentationLabels};

pub const DEFAULT_MAX_OUTER_ITERATIONS: usize = 1000;
/// Ten 64-step halving sequences per vertex.
pub const DEFAULT_MAX_HALVINGS: u32 = 10 * 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub exec: Exec,
    pub max_outer_iterations: usize,
    pub max_halvings_per_vertex: u32,
    /// Accept decompressed input that already violates the bound.
    pub force: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            exec: Exec::Serial,
            max_outer_iterations: DEFAULT_MAX_OUTER_ITERATIONS,
            max_halvings_per_vertex: DEFAULT_MAX_HALVINGS,
            force: false,
        }
    }
}

impl EngineOptions {
    pub fn with_exec(exec: Exec) -> Self {
        Self {
            exec,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EngineStats {
    pub outer_iterations: usize,
    /// Sub-iterations per false type, in order FPmax, FPmin, FNmax, FNmin.
    pub c_sub_iterations: [usize; 4],
    pub r_iterations: usize,
    /// Total number of single-vertex lowering steps applied.
    pub lower_steps: usize,
}

/// The original field's steepest directions and labels, computed once.
#[derive(Debug, Clone)]
pub struct Reference {
    pub dirs: DirectionField,
    pub labels: SegmentationLabels,
}

impl Reference {
    pub fn new<T: Element>(original: &ScalarField<T>, exec: Exec) -> Result<Self> {
        let (dirs, labels) = mss::segment(original, exec)?;
        Ok(Self { dirs, labels })
    }
}

/// Sparse edited values, sorted by vertex index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EditSet<T> {
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Element> EditSet<T> {
    pub fn new(indices: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::corrupt("edit index and value counts differ"));
        }
        if let Some(pos) = indices.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedIndices(pos + 1));
        }
        Ok(Self { indices, values })
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyEditSet {
    F32(EditSet<f32>),
    F64(EditSet<f64>),
}

impl AnyEditSet {
    pub fn dtype(&self) -> Dtype {
        match self {
            AnyEditSet::F32(_) => Dtype::F32,
            AnyEditSet::F64(_) => Dtype::F64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyEditSet::F32(e) => e.len(),
            AnyEditSet::F64(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn empty(dtype: Dtype) -> Self {
        match dtype {
            Dtype::F32 => AnyEditSet::F32(EditSet::empty()),
            Dtype::F64 => AnyEditSet::F64(EditSet::empty()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Derived<T> {
    pub edits: EditSet<T>,
    pub edited: ScalarField<T>,
    pub stats: EngineStats,
}

type Observer<'a, T> = Box<dyn FnMut(&[T]) + 'a>;

/// Drives the critical-point and regular-point loops over one [`EditState`].
pub struct EditEngine<'a, T> {
    state: EditState<T>,
    reference: Reference,
    exec: Exec,
    max_outer_iterations: usize,
    stats: EngineStats,
    observer: Option<Observer<'a, T>>,
    // steepest directions of the current edited values
    dirs: DirectionField,
}

impl<'a, T: Element> EditEngine<'a, T> {
    pub fn new(
        original: &ScalarField<T>,
        decompressed: &ScalarField<T>,
        xi: f64,
        opts: EngineOptions,
    ) -> Result<Self> {
        let state = EditState::new(original, decompressed, xi, opts.force)?
            .with_max_halvings(opts.max_halvings_per_vertex);
        let dirs = mss::directions_of(state.topology(), state.values(), opts.exec);
        Ok(Self {
            dirs,
            state,
            reference: Reference::new(original, opts.exec)?,
            exec: opts.exec,
            max_outer_iterations: opts.max_outer_iterations,
            stats: EngineStats::default(),
            observer: None,
        })
    }

    /// Calls `f` with the edited values after every batch of edits.
    pub fn observe(mut self, f: impl FnMut(&[T]) + 'a) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn state(&self) -> &EditState<T> {
        &self.state
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    pub fn stats(&self) -> &EngineStats {
        &self.stats
    }

    /// Steepest directions of the current edited values.
    pub fn directions(&self) -> &DirectionField {
        &self.dirs
    }

    /// Recomputes directions around vertices whose values changed.
    fn refresh_directions(&mut self, changed: &[usize]) {
        let topo = self.state.topology();
        let mut affected = Vec::with_capacity(changed.len() * 15);
        for &t in changed {
            affected.push(t);
            affected.extend_from_slice(&topo.neighbors(t));
        }
        affected.sort_unstable();
        affected.dedup();
        let values = self.state.values();
        let fresh = self.exec.map(&affected, |i| mss::steepest(topo, values, i));
        for (&i, (hi, lo)) in affected.iter().zip(fresh) {
            self.dirs.asc[i] = hi;
            self.dirs.desc[i] = lo;
        }
    }

    /// Lowers each distinct target once, all computed from the same snapshot.
    /// Returns how many values actually decreased.
    pub(crate) fn apply_targets(&mut self, mut targets: Vec<usize>) -> Result<usize> {
        targets.sort_unstable();
        targets.dedup();
        let (g, f, xi) = (self.state.values(), self.state.original(), self.state.xi());
        let lowered = self.exec.map(&targets, |t| lowered_value(g[t], f[t], xi));
        let mut changed = Vec::with_capacity(targets.len());
        for (&t, v) in targets.iter().zip(lowered) {
            if let Some(v) = v {
                self.state.set(t, v)?;
                changed.push(t);
            }
        }
        self.refresh_directions(&changed);
        let applied = changed.len();
        self.stats.lower_steps += applied;
        if applied > 0 {
            if let Some(obs) = self.observer.as_mut() {
                obs(self.state.values());
            }
        }
        Ok(applied)
    }

    /// Runs both loops to convergence and checks every postcondition.
    pub fn run(mut self) -> Result<Derived<T>> {
        for _ in 0..self.max_outer_iterations {
            self.stats.outer_iterations += 1;
            let c_edits = self.run_c_loop()?;
            let r_edits = self.run_r_loop()?;
            if c_edits + r_edits == 0 {
                return self.finish();
            }
        }
        Err(Error::NonConvergence(format!(
            "outer loop exceeded {} iterations; trace {:?}",
            self.max_outer_iterations, self.stats
        )))
    }

    fn finish(self) -> Result<Derived<T>> {
        // recompute from scratch rather than trusting the incremental cache
        let dirs = mss::directions_of(self.state.topology(), self.state.values(), self.exec);
        if dirs != self.dirs {
            return Err(Error::Internal(
                "cached directions diverged from the edited field".into(),
            ));
        }
        let labels = mss::compute_labels(&dirs, self.exec)?;
        let report = self.detect_with(&dirs);
        let diff = mss::segmentation_equal(&self.reference.labels, &labels)?;
        if !report.is_empty() || diff.mismatches > 0 {
            return Err(Error::Internal(format!(
                "converged with {} false extrema and {} mislabeled vertices",
                report.len(),
                diff.mismatches
            )));
        }
        let (indices, values): (Vec<usize>, Vec<T>) = self
            .state
            .touched()
            .map(|i| (i, self.state.values()[i]))
            .unzip();
        let edits = EditSet::new(indices, values)?;
        Ok(Derived {
            edits,
            edited: self.state.into_field()?,
            stats: self.stats,
        })
    }
}

/// Edits that make `decompressed` segment exactly like `original` within `xi`.
pub fn derive_edits<T: Element>(
    original: &ScalarField<T>,
    decompressed: &ScalarField<T>,
    xi: f64,
    opts: EngineOptions,
) -> Result<Derived<T>> {
    EditEngine::new(original, decompressed, xi, opts)?.run()
}

/// Type-erased [`derive_edits`]; returns the edits, the edited field and stats.
pub fn derive_edits_any(
    original: &AnyField,
    decompressed: &AnyField,
    xi: f64,
    opts: EngineOptions,
) -> Result<(AnyEditSet, AnyField, EngineStats)> {
    match (original, decompressed) {
        (AnyField::F32(f), AnyField::F32(d)) => {
            let out = derive_edits(f, d, xi, opts)?;
            Ok((AnyEditSet::F32(out.edits), out.edited.into(), out.stats))
        }
        (AnyField::F64(f), AnyField::F64(d)) => {
            let out = derive_edits(f, d, xi, opts)?;
            Ok((AnyEditSet::F64(out.edits), out.edited.into(), out.stats))
        }
        _ => Err(Error::DtypeMismatch {
            expected: original.dtype().name(),
            found: decompressed.dtype().name(),
        }),
    }
}

/// Overwrites the listed vertices of `decompressed` with their stored values.
pub fn apply_edits<T: Element>(
    decompressed: &ScalarField<T>,
    edits: &EditSet<T>,
) -> Result<ScalarField<T>> {
    let mut values = decompressed.values().to_vec();
    for (i, v) in edits.iter() {
        let len = values.len();
        *values
            .get_mut(i)
            .ok_or(Error::IndexOutOfRange { index: i, len })? = v;
    }
    ScalarField::new(decompressed.topology().clone(), values)
}

pub fn apply_edits_any(decompressed: &AnyField, edits: &AnyEditSet) -> Result<AnyField> {
    match (decompressed, edits) {
        (AnyField::F32(d), AnyEditSet::F32(e)) => Ok(apply_edits(d, e)?.into()),
        (AnyField::F64(d), AnyEditSet::F64(e)) => Ok(apply_edits(d, e)?.into()),
        _ => Err(Error::DtypeMismatch {
            expected: decompressed.dtype().name(),
            found: edits.dtype().name(),
        }),
    }
}

#[cfg(test)]
mod tests;
