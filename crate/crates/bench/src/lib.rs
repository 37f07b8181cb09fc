//! Benchmark-only crate; see `benches/pipeline.rs`.

use mssz_core::base_codec::compress_base;
use mssz_core::field::{generate_synthetic, resolve_bound};
use mssz_core::{ErrorBound, ScalarField, SyntheticKind};

/// An original field and its base-codec reconstruction at relative bound `eb`.
pub fn fixture(
    kind: SyntheticKind,
    dims: &[usize],
    seed: u64,
    eb: f64,
) -> (ScalarField<f32>, ScalarField<f32>, f64) {
    let f: ScalarField<f32> = generate_synthetic(kind, dims, seed).expect("valid dims");
    let xi = resolve_bound(ErrorBound::relative(eb), &f).expect("non-constant field");
    let g = compress_base(&f, xi).expect("finite field").reconstruction;
    (f, g, xi)
}
