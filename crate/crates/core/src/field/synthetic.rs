//! Deterministic synthetic test fields.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Element, ScalarField};
use crate::error::Result;
use crate::grid::GridTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticKind {
    GaussianMixture,
    Trig,
    RandomSmooth,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 3] = [
        SyntheticKind::GaussianMixture,
        SyntheticKind::Trig,
        SyntheticKind::RandomSmooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::GaussianMixture => "gaussian-mixture",
            SyntheticKind::Trig => "trig",
            SyntheticKind::RandomSmooth => "random-smooth",
        }
    }
}

impl std::str::FromStr for SyntheticKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SyntheticKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown synthetic kind '{s}'"))
    }
}

impl std::fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Pure function of `(kind, dims, seed)`.
pub fn generate_synthetic<T: Element>(
    kind: SyntheticKind,
    dims: &[usize],
    seed: u64,
) -> Result<ScalarField<T>> {
    let topo = GridTopology::new(dims)?;
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (kind as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let values = match kind {
        SyntheticKind::GaussianMixture => gaussian_mixture(&topo, seed, &mut rng),
        SyntheticKind::Trig => trig(&topo, &mut rng),
        SyntheticKind::RandomSmooth => random_smooth(&topo, &mut rng),
    };
    ScalarField::new(topo, values.into_iter().map(T::from_f64).collect())
}

fn unit_coords(topo: &GridTopology, i: usize) -> [f64; 3] {
    let c = topo.coords(i);
    let mut out = [0.0; 3];
    for (axis, &n) in topo.dims().iter().enumerate() {
        out[axis] = c[axis] as f64 / (n - 1) as f64;
    }
    out
}

fn gaussian_mixture(topo: &GridTopology, seed: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = 5 + (seed % 6) as usize;
    let nd = topo.ndims();
    let bumps: Vec<([f64; 3], f64, f64)> = (0..k)
        .map(|_| {
            let mut center = [0.0; 3];
            for c in center.iter_mut().take(nd) {
                *c = rng.random_range(0.1..0.9);
            }
            let sigma = rng.random_range(0.06..0.22);
            let amp = rng.random_range(0.3..1.0) * if rng.random_bool(0.7) { 1.0 } else { -1.0 };
            (center, sigma, amp)
        })
        .collect();
    (0..topo.vertex_count())
        .map(|i| {
            let p = unit_coords(topo, i);
            bumps
                .iter()
                .map(|(c, s, a)| {
                    let d2: f64 = (0..nd).map(|ax| (p[ax] - c[ax]).powi(2)).sum();
                    a * (-d2 / (2.0 * s * s)).exp()
                })
                .sum()
        })
        .collect()
}

fn trig(topo: &GridTopology, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let nd = topo.ndims();
    let freq: Vec<f64> = (0..nd).map(|_| rng.random_range(1..=3) as f64).collect();
    let phase: Vec<f64> = (0..nd).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    (0..topo.vertex_count())
        .map(|i| {
            let p = unit_coords(topo, i);
            (0..nd)
                .map(|ax| {
                    let t = 2.0 * PI * freq[ax] * p[ax] + phase[ax];
                    if ax % 2 == 0 {
                        t.sin()
                    } else {
                        t.cos()
                    }
                })
                .product()
        })
        .collect()
}

fn random_smooth(topo: &GridTopology, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut values: Vec<f64> = (0..topo.vertex_count())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut scratch = vec![0.0; values.len()];
    for _ in 0..3 {
        for axis in 0..topo.ndims() {
            box_pass(topo, axis, &values, &mut scratch);
            std::mem::swap(&mut values, &mut scratch);
        }
    }
    values
}

// Width-3 box filter along one axis, window clipped at the boundary.
fn box_pass(topo: &GridTopology, axis: usize, src: &[f64], dst: &mut [f64]) {
    let n = topo.dims()[axis];
    let stride: usize = topo.dims()[..axis].iter().product();
    for (i, out) in dst.iter_mut().enumerate() {
        let c = topo.coords(i)[axis];
        let mut sum = src[i];
        let mut cnt = 1.0;
        if c > 0 {
            sum += src[i - stride];
            cnt += 1.0;
        }
        if c + 1 < n {
            sum += src[i + stride];
            cnt += 1.0;
        }
        *out = sum / cnt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        for kind in SyntheticKind::ALL {
            let a: ScalarField<f32> = generate_synthetic(kind, &[4, 4], 17).unwrap();
            let b: ScalarField<f32> = generate_synthetic(kind, &[4, 4], 17).unwrap();
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn seeds_differ() {
        let a: ScalarField<f64> =
            generate_synthetic(SyntheticKind::RandomSmooth, &[8, 8], 1).unwrap();
        let b: ScalarField<f64> =
            generate_synthetic(SyntheticKind::RandomSmooth, &[8, 8], 2).unwrap();
        assert_ne!(a.values(), b.values());
    }

    #[test]
    fn kind_names_parse() {
        for kind in SyntheticKind::ALL {
            assert_eq!(kind.name().parse::<SyntheticKind>().unwrap(), kind);
        }
    }
}
