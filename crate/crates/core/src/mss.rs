//! Piecewise-linear extrema, steepest directions and Morse-Smale
//! segmentation labels.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{Element, ScalarField};
use crate::grid::{sos_greater, GridTopology};

/// Steepest ascending/descending neighbor per vertex. A vertex that points
/// at itself is a maximum (`asc`) or minimum (`desc`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionField {
    pub asc: Vec<usize>,
    pub desc: Vec<usize>,
}

impl DirectionField {
    pub fn is_max(&self, i: usize) -> bool {
        self.asc[i] == i
    }

    pub fn is_min(&self, i: usize) -> bool {
        self.desc[i] == i
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CriticalSet {
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
}

/// Per-vertex `(M, m)`: the maximum reached by ascending and the minimum
/// reached by descending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationLabels {
    pub max_label: Vec<usize>,
    pub min_label: Vec<usize>,
}

impl SegmentationLabels {
    pub fn len(&self) -> usize {
        self.max_label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.max_label.is_empty()
    }

    /// Mss-export layout: `M` then `m`, each as little-endian u64.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 * self.len());
        for &v in self.max_label.iter().chain(&self.min_label) {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationDiff {
    pub mask: Vec<bool>,
    pub mismatches: usize,
}

/// Steepest neighbors of every vertex of `values` laid out on `topo`.
pub fn directions_of<T: Element>(topo: &GridTopology, values: &[T], exec: Exec) -> DirectionField {
    let n = topo.vertex_count();
    let mut steep = vec![(0usize, 0usize); n];
    exec.fill(&mut steep, |i| steepest(topo, values, i));
    let (asc, desc) = steep.into_iter().unzip();
    DirectionField { asc, desc }
}

#[inline]
pub(crate) fn steepest<T: Element>(topo: &GridTopology, values: &[T], i: usize) -> (usize, usize) {
    let (mut hi, mut lo) = (i, i);
    for &j in topo.neighbors(i).iter() {
        if sos_greater(values, j, hi) {
            hi = j;
        }
        if sos_greater(values, lo, j) {
            lo = j;
        }
    }
    (hi, lo)
}

pub fn compute_directions<T: Element>(field: &ScalarField<T>, exec: Exec) -> DirectionField {
    directions_of(field.topology(), field.values(), exec)
}

pub fn classify_critical(directions: &DirectionField) -> CriticalSet {
    let n = directions.asc.len();
    CriticalSet {
        maxima: (0..n).filter(|&i| directions.is_max(i)).collect(),
        minima: (0..n).filter(|&i| directions.is_min(i)).collect(),
    }
}

/// Labels by pointer jumping over the direction graph.
pub fn compute_labels(directions: &DirectionField, exec: Exec) -> Result<SegmentationLabels> {
    Ok(SegmentationLabels {
        max_label: pointer_jump(directions.asc.clone(), exec)?,
        min_label: pointer_jump(directions.desc.clone(), exec)?,
    })
}

/// Iterates `p[i] <- p[p[i]]` to the fixpoint, reading the previous round
/// and writing the next, so serial and parallel runs agree exactly.
fn pointer_jump(mut cur: Vec<usize>, exec: Exec) -> Result<Vec<usize>> {
    let n = cur.len();
    let cap = (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize + 2;
    let mut next = vec![0usize; n];
    for _ in 0..cap {
        exec.fill(&mut next, |i| cur[cur[i]]);
        if next == cur {
            return Ok(cur);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Err(Error::Internal(format!(
        "label pointer jumping did not reach a fixpoint within {cap} rounds"
    )))
}

/// Reference labeling: walks every integral line step by step.
pub fn oracle_labels<T: Element>(field: &ScalarField<T>) -> Result<SegmentationLabels> {
    let topo = field.topology();
    let values = field.values();
    let n = topo.vertex_count();
    let walk = |start: usize, ascending: bool| -> Result<usize> {
        let mut v = start;
        for _ in 0..=n {
            let (hi, lo) = steepest(topo, values, v);
            let next = if ascending { hi } else { lo };
            if next == v {
                return Ok(v);
            }
            v = next;
        }
        Err(Error::Internal(format!(
            "integral line from {start} has a cycle"
        )))
    };
    let mut max_label = Vec::with_capacity(n);
    let mut min_label = Vec::with_capacity(n);
    for i in 0..n {
        max_label.push(walk(i, true)?);
        min_label.push(walk(i, false)?);
    }
    Ok(SegmentationLabels {
        max_label,
        min_label,
    })
}

pub fn segmentation_equal(
    a: &SegmentationLabels,
    b: &SegmentationLabels,
) -> Result<SegmentationDiff> {
    if a.len() != b.len() || a.min_label.len() != b.min_label.len() {
        return Err(Error::TopologyMismatch);
    }
    let mask: Vec<bool> = (0..a.len())
        .map(|i| a.max_label[i] == b.max_label[i] && a.min_label[i] == b.min_label[i])
        .collect();
    let mismatches = mask.iter().filter(|ok| !**ok).count();
    Ok(SegmentationDiff { mask, mismatches })
}

/// Directions and labels in one go.
pub fn segment<T: Element>(
    field: &ScalarField<T>,
    exec: Exec,
) -> Result<(DirectionField, SegmentationLabels)> {
    let dirs = compute_directions(field, exec);
    let labels = compute_labels(&dirs, exec)?;
    Ok((dirs, labels))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::field::{generate_synthetic, SyntheticKind};

    fn field<T: Element>(dims: &[usize], values: Vec<T>) -> ScalarField<T> {
        ScalarField::new(GridTopology::new(dims).unwrap(), values).unwrap()
    }

    #[test]
    fn constant_field_uses_index_order() {
        let f = field(&[2, 2], vec![5.0f64; 4]);
        let (dirs, labels) = segment(&f, Exec::Serial).unwrap();
        let crit = classify_critical(&dirs);
        assert_eq!(crit.maxima, vec![3]);
        assert_eq!(crit.minima, vec![0]);
        assert!(labels.max_label.iter().all(|&m| m == 3));
        assert!(labels.min_label.iter().all(|&m| m == 0));
        assert_eq!(oracle_labels(&f).unwrap(), labels);
    }

    #[test]
    fn monotone_ramp() {
        let (nx, ny) = (7, 5);
        let f = field(
            &[nx, ny],
            (0..nx * ny)
                .map(|i| ((i % nx) + 2 * (i / nx) * nx) as f64)
                .collect(),
        );
        let (dirs, labels) = segment(&f, Exec::Serial).unwrap();
        let crit = classify_critical(&dirs);
        assert_eq!(crit.maxima, vec![nx * ny - 1]);
        assert_eq!(crit.minima, vec![0]);
        assert!(labels.max_label.iter().all(|&m| m == nx * ny - 1));
        assert!(labels.min_label.iter().all(|&m| m == 0));
    }

    #[test]
    fn two_row_monotone_chain() {
        // row 1,2,3 above a zero row: ascent climbs diagonally, then right
        let f = field(&[3, 2], vec![0.0f64, 0.0, 0.0, 1.0, 2.0, 3.0]);
        let dirs = compute_directions(&f, Exec::Serial);
        assert_eq!(dirs.asc, vec![4, 5, 5, 4, 5, 5]);
        // ties on the zero row resolve to the lowest index
        assert_eq!(dirs.desc, vec![0, 0, 1, 0, 0, 1]);
        let crit = classify_critical(&dirs);
        assert_eq!(crit.maxima, vec![5]);
        assert_eq!(crit.minima, vec![0]);
    }

    #[test]
    fn ascending_chain_follows_increasing_values() {
        // a path 5 -> 14 -> 15 -> 20 along the diagonal of a 4x4 grid
        let mut v = vec![0.0f64; 16];
        for (k, &val) in [5.0, 14.0, 15.0, 20.0].iter().enumerate() {
            v[k * 5] = val;
        }
        let f = field(&[4, 4], v);
        let dirs = compute_directions(&f, Exec::Serial);
        let mut path = vec![0];
        while !dirs.is_max(*path.last().unwrap()) {
            path.push(dirs.asc[*path.last().unwrap()]);
        }
        assert_eq!(path, vec![0, 5, 10, 15]);
        let labels = compute_labels(&dirs, Exec::Serial).unwrap();
        assert_eq!(labels.max_label[0], 15);
    }

    #[test]
    fn single_bump_has_one_interior_maximum() {
        let n = 16;
        let f = ScalarField::from_fn(GridTopology::new(&[n, n]).unwrap(), |i| {
            let (x, y) = ((i % n) as f64 - 7.3, (i / n) as f64 - 8.1);
            (-(x * x + y * y) / 18.0).exp()
        })
        .unwrap();
        let crit = classify_critical(&compute_directions(&f, Exec::Serial));
        assert_eq!(crit.maxima.len(), 1);
        let c = f.topology().coords(crit.maxima[0]);
        assert!((1..n - 1).contains(&c[0]) && (1..n - 1).contains(&c[1]));
        for &m in &crit.minima {
            let c = f.topology().coords(m);
            assert!(c[0] == 0 || c[1] == 0 || c[0] == n - 1 || c[1] == n - 1);
        }
    }

    #[test]
    fn extrema_are_exactly_self_labeled() {
        let f: ScalarField<f32> =
            generate_synthetic(SyntheticKind::RandomSmooth, &[9, 7, 5], 4).unwrap();
        let (dirs, labels) = segment(&f, Exec::Serial).unwrap();
        for i in 0..f.len() {
            assert_eq!(labels.max_label[i] == i, dirs.is_max(i));
            assert_eq!(labels.min_label[i] == i, dirs.is_min(i));
            if !dirs.is_max(i) {
                assert_eq!(labels.max_label[i], labels.max_label[dirs.asc[i]]);
                assert!(sos_greater(f.values(), dirs.asc[i], i));
            }
            if !dirs.is_min(i) {
                assert_eq!(labels.min_label[i], labels.min_label[dirs.desc[i]]);
                assert!(sos_greater(f.values(), i, dirs.desc[i]));
            }
        }
    }

    #[test]
    fn labels_match_oracle_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for round in 0..200 {
            let dims: &[usize] = if round % 2 == 0 { &[8, 8] } else { &[4, 4, 4] };
            let n: usize = dims.iter().product();
            // few distinct values so SoS tie-breaking is exercised
            let f = field(
                dims,
                (0..n).map(|_| rng.random_range(0..6) as f32).collect(),
            );
            let (_, labels) = segment(&f, Exec::Serial).unwrap();
            assert_eq!(labels, oracle_labels(&f).unwrap());
            let (_, par) = segment(&f, Exec::Parallel).unwrap();
            assert_eq!(labels, par);
        }
    }

    #[test]
    fn segmentation_diff() {
        let f = field(&[3, 3], (0..9).map(|i| i as f64).collect());
        let (_, a) = segment(&f, Exec::Serial).unwrap();
        assert_eq!(segmentation_equal(&a, &a).unwrap().mismatches, 0);
        let mut b = a.clone();
        b.min_label[4] = 1;
        let d = segmentation_equal(&a, &b).unwrap();
        assert_eq!(d.mismatches, 1);
        assert!(!d.mask[4]);
        b.max_label.pop();
        assert!(matches!(
            segmentation_equal(&a, &b),
            Err(Error::TopologyMismatch)
        ));
    }

    #[test]
    fn corrupt_directions_trip_the_round_cap() {
        // a 2-cycle never reaches a fixpoint
        let dirs = DirectionField {
            asc: vec![1, 2, 0, 3],
            desc: vec![0, 1, 2, 3],
        };
        assert!(matches!(
            compute_labels(&dirs, Exec::Serial),
            Err(Error::Internal(_))
        ));
    }
}
