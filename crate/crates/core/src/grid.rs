//! Regular-grid topology with the Freudenthal triangulation.
//!
//! Vertices are addressed by a linear index, row-major with axis 0 fastest.
//! Every cell is split along the main diagonal, so the link of an interior
//! vertex has 6 vertices in 2D and 14 in 3D.

use std::ops::Deref;

use crate::error::{Error, Result};

/// Maximum vertex degree over both dimensionalities.
pub const MAX_DEGREE: usize = 14;

const STENCIL_2D: [[isize; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [1, 1, 0],
    [-1, -1, 0],
];

const STENCIL_3D: [[isize; 3]; 14] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [-1, -1, 0],
    [0, 1, 1],
    [0, -1, -1],
    [1, 0, 1],
    [-1, 0, -1],
    [1, 1, 1],
    [-1, -1, -1],
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridTopology {
    ndims: usize,
    // Unused trailing axes are 1.
    extents: [usize; 3],
    vertex_count: usize,
}

impl GridTopology {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&dims.len()) || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDims(dims.to_vec()));
        }
        let vertex_count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            // keep byte sizes of f64 arrays addressable too
            .filter(|&n| n.checked_mul(8).is_some_and(|b| b <= isize::MAX as usize))
            .ok_or_else(|| Error::InvalidDims(dims.to_vec()))?;
        let mut extents = [1; 3];
        extents[..dims.len()].copy_from_slice(dims);
        Ok(Self {
            ndims: dims.len(),
            extents,
            vertex_count,
        })
    }

    pub fn ndims(&self) -> usize {
        self.ndims
    }

    pub fn dims(&self) -> &[usize] {
        &self.extents[..self.ndims]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.extents;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    pub fn index(&self, coords: [usize; 3]) -> usize {
        let [nx, ny, _] = self.extents;
        coords[0] + nx * (coords[1] + ny * coords[2])
    }

    fn stencil(&self) -> &'static [[isize; 3]] {
        if self.ndims == 2 {
            &STENCIL_2D
        } else {
            &STENCIL_3D
        }
    }

    /// The link vertices `L_i` of vertex `index`, clipped at the boundary.
    pub fn neighbors(&self, index: usize) -> Neighbors {
        let c = self.coords(index);
        let mut out = Neighbors {
            buf: [0; MAX_DEGREE],
            len: 0,
        };
        'offsets: for off in self.stencil() {
            let mut n = [0usize; 3];
            for axis in 0..3 {
                let v = c[axis] as isize + off[axis];
                if v < 0 || v >= self.extents[axis] as isize {
                    continue 'offsets;
                }
                n[axis] = v as usize;
            }
            out.buf[out.len] = self.index(n);
            out.len += 1;
        }
        out
    }

    /// Materializes every vertex's neighbor list.
    pub fn neighbor_list(&self) -> NeighborList {
        let mut offsets = Vec::with_capacity(self.vertex_count + 1);
        let mut indices = Vec::with_capacity(self.vertex_count * self.stencil().len());
        offsets.push(0);
        for i in 0..self.vertex_count {
            indices.extend_from_slice(&self.neighbors(i));
            offsets.push(indices.len());
        }
        NeighborList { offsets, indices }
    }
}

/// Fixed-capacity neighbor set of one vertex.
#[derive(Debug, Clone, Copy)]
pub struct Neighbors {
    buf: [usize; MAX_DEGREE],
    len: usize,
}

impl Deref for Neighbors {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.buf[..self.len]
    }
}

/// Compressed-row neighbor lists for all vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborList {
    offsets: Vec<usize>,
    indices: Vec<usize>,
}

impl NeighborList {
    pub fn of(&self, index: usize) -> &[usize] {
        &self.indices[self.offsets[index]..self.offsets[index + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Simulation-of-simplicity comparison: `values[i] > values[j]`, ties broken
/// by the larger linear index.
#[inline]
pub fn sos_greater<T: PartialOrd>(values: &[T], i: usize, j: usize) -> bool {
    let (a, b) = (&values[i], &values[j]);
    a > b || (a == b && i > j)
}
