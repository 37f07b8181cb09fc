//! Regular-point loop: falsely labeled vertices.

use super::EditEngine;
use crate::error::{Error, Result};
use crate::field::Element;
use crate::mss::{self, DirectionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Ascending,
    Descending,
}

impl<T: Element> EditEngine<'_, T> {
    /// Walks the original integral line from `v` and returns `(v_i, v_t)`:
    /// `v_i` is the first vertex whose steepest neighbor under the edited
    /// field differs from the original's, and `v_t` is the vertex to lower
    /// (the edited ascending neighbor, or the original descending neighbor).
    pub fn find_troublemaker(
        &self,
        g: &DirectionField,
        v: usize,
        kind: LineKind,
    ) -> Result<(usize, usize)> {
        let f = &self.reference.dirs;
        let (f_next, g_next) = match kind {
            LineKind::Ascending => (&f.asc, &g.asc),
            LineKind::Descending => (&f.desc, &g.desc),
        };
        let n = f_next.len();
        let mut u = v;
        for _ in 0..n {
            if g_next[u] != f_next[u] {
                let target = match kind {
                    LineKind::Ascending => g.asc[u],
                    LineKind::Descending => f.desc[u],
                };
                return Ok((u, target));
            }
            if f_next[u] == u {
                break;
            }
            u = f_next[u];
        }
        Err(Error::Internal(format!(
            "no divergence on the {kind:?} line from vertex {v}; its label is already correct"
        )))
    }

    /// Repairs falsely labeled vertices until none remain. Returns the number
    /// of lowering steps applied.
    pub fn run_r_loop(&mut self) -> Result<usize> {
        let mut total = 0;
        loop {
            let g = self.dirs.clone();
            let labels = mss::compute_labels(&g, self.exec)?;
            let want = &self.reference.labels;
            let wrong = self.exec.filter_indices(labels.len(), |i| {
                labels.max_label[i] != want.max_label[i] || labels.min_label[i] != want.min_label[i]
            });
            if wrong.is_empty() {
                return Ok(total);
            }
            let mut targets = Vec::new();
            for &v in &wrong {
                if labels.max_label[v] != want.max_label[v] {
                    targets.push(self.find_troublemaker(&g, v, LineKind::Ascending)?.1);
                }
                if labels.min_label[v] != want.min_label[v] {
                    targets.push(self.find_troublemaker(&g, v, LineKind::Descending)?.1);
                }
            }
            let applied = self.apply_targets(targets)?;
            if applied == 0 {
                return Err(Error::NonConvergence(format!(
                    "regular-point loop stalled with {} mislabeled vertices (e.g. vertex {}); trace {:?}",
                    wrong.len(),
                    wrong[0],
                    self.stats
                )));
            }
            self.stats.r_iterations += 1;
            total += applied;
        }
    }
}
