//! Critical-point loop: false positive/negative extrema.

use super::EditEngine;
use crate::error::{Error, Result};
use crate::field::Element;
use crate::grid::sos_greater;
use crate::mss::DirectionField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FalseKind {
    FpMax,
    FpMin,
    FnMax,
    FnMin,
}

impl FalseKind {
    /// Subloop order within one pass.
    pub const ORDER: [FalseKind; 4] = [
        FalseKind::FpMax,
        FalseKind::FpMin,
        FalseKind::FnMax,
        FalseKind::FnMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FalseKind::FpMax => "FPmax",
            FalseKind::FpMin => "FPmin",
            FalseKind::FnMax => "FNmax",
            FalseKind::FnMin => "FNmin",
        }
    }

    /// Whether vertex `i` is of this false type given the original (`f`) and
    /// edited (`g`) directions.
    #[inline]
    fn test(self, f: &DirectionField, g: &DirectionField, i: usize) -> bool {
        match self {
            FalseKind::FpMax => g.is_max(i) && !f.is_max(i),
            FalseKind::FpMin => g.is_min(i) && !f.is_min(i),
            FalseKind::FnMax => f.is_max(i) && !g.is_max(i),
            FalseKind::FnMin => f.is_min(i) && !g.is_min(i),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FalseCriticalReport {
    pub fp_max: Vec<usize>,
    pub fp_min: Vec<usize>,
    pub fn_max: Vec<usize>,
    pub fn_min: Vec<usize>,
}

impl FalseCriticalReport {
    pub fn get(&self, kind: FalseKind) -> &[usize] {
        match kind {
            FalseKind::FpMax => &self.fp_max,
            FalseKind::FpMin => &self.fp_min,
            FalseKind::FnMax => &self.fn_max,
            FalseKind::FnMin => &self.fn_min,
        }
    }

    pub fn len(&self) -> usize {
        self.fp_max.len() + self.fp_min.len() + self.fn_max.len() + self.fn_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T: Element> EditEngine<'_, T> {
    fn false_of(&self, kind: FalseKind, g: &DirectionField) -> Vec<usize> {
        let f = &self.reference.dirs;
        self.exec
            .filter_indices(self.state.values().len(), |i| kind.test(f, g, i))
    }

    pub(crate) fn detect_with(&self, g: &DirectionField) -> FalseCriticalReport {
        FalseCriticalReport {
            fp_max: self.false_of(FalseKind::FpMax, g),
            fp_min: self.false_of(FalseKind::FpMin, g),
            fn_max: self.false_of(FalseKind::FnMax, g),
            fn_min: self.false_of(FalseKind::FnMin, g),
        }
    }

    /// False extrema of the current edited field against the original.
    pub fn detect_false_critical(&self) -> FalseCriticalReport {
        self.detect_with(self.directions())
    }

    /// The SoS-highest neighbor of `i` under `g` that can still be lowered.
    /// That is `g`'s ascending neighbor unless it already sits at its floor.
    fn ascending_target(&self, g: &DirectionField, i: usize) -> Option<usize> {
        let asc = g.asc[i];
        if asc != i && self.state.can_lower(asc) {
            return Some(asc);
        }
        let values = self.state.values();
        self.state
            .topology()
            .neighbors(i)
            .iter()
            .copied()
            .filter(|&j| self.state.can_lower(j))
            .reduce(|best, j| {
                if sos_greater(values, j, best) {
                    j
                } else {
                    best
                }
            })
    }

    fn fix(
        &mut self,
        kind: FalseKind,
        report: &FalseCriticalReport,
        g: &DirectionField,
    ) -> Result<usize> {
        let list = report.get(kind);
        let targets: Vec<usize> = match kind {
            FalseKind::FpMax | FalseKind::FnMin => list.to_vec(),
            FalseKind::FpMin | FalseKind::FnMax => list
                .iter()
                .filter_map(|&i| self.ascending_target(g, i))
                .collect(),
        };
        self.apply_targets(targets)
    }

    /// Lowers every false positive maximum itself.
    pub fn fix_fp_max(
        &mut self,
        report: &FalseCriticalReport,
        g: &DirectionField,
    ) -> Result<usize> {
        self.fix(FalseKind::FpMax, report, g)
    }

    /// Lowers the ascending neighbor of every false positive minimum.
    pub fn fix_fp_min(
        &mut self,
        report: &FalseCriticalReport,
        g: &DirectionField,
    ) -> Result<usize> {
        self.fix(FalseKind::FpMin, report, g)
    }

    /// Lowers the ascending neighbor of every false negative maximum.
    pub fn fix_fn_max(
        &mut self,
        report: &FalseCriticalReport,
        g: &DirectionField,
    ) -> Result<usize> {
        self.fix(FalseKind::FnMax, report, g)
    }

    /// Lowers every false negative minimum itself.
    pub fn fix_fn_min(
        &mut self,
        report: &FalseCriticalReport,
        g: &DirectionField,
    ) -> Result<usize> {
        self.fix(FalseKind::FnMin, report, g)
    }

    /// Runs the FPmax, FPmin, FNmax, FNmin subloops, each until its list is
    /// empty, and repeats the sequence until a full pass changes nothing.
    /// Returns the number of lowering steps applied.
    pub fn run_c_loop(&mut self) -> Result<usize> {
        let mut total = 0;
        loop {
            let mut pass = 0;
            for (k, kind) in FalseKind::ORDER.into_iter().enumerate() {
                loop {
                    let g = self.dirs.clone();
                    let list = self.false_of(kind, &g);
                    if list.is_empty() {
                        break;
                    }
                    let mut report = FalseCriticalReport::default();
                    match kind {
                        FalseKind::FpMax => report.fp_max = list,
                        FalseKind::FpMin => report.fp_min = list,
                        FalseKind::FnMax => report.fn_max = list,
                        FalseKind::FnMin => report.fn_min = list,
                    }
                    let applied = self.fix(kind, &report, &g)?;
                    if applied == 0 {
                        return Err(Error::NonConvergence(format!(
                            "{} subloop stalled with {} vertices left at their floor (e.g. vertex {}); trace {:?}",
                            kind.name(),
                            report.len(),
                            report.get(kind)[0],
                            self.stats
                        )));
                    }
                    self.stats.c_sub_iterations[k] += 1;
                    pass += applied;
                }
            }
            total += pass;
            if pass == 0 {
                return Ok(total);
            }
        }
    }
}
