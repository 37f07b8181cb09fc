//! Evaluation metrics and the verification report.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{bound_deviation, AnyField, Element, ScalarField};
use crate::mss::{self, classify_critical, SegmentationLabels};

/// Fraction of vertices whose `(m, M)` label pair differs.
pub fn mss_distortion(a: &SegmentationLabels, b: &SegmentationLabels) -> Result<f64> {
    let diff = mss::segmentation_equal(a, b)?;
    Ok(diff.mismatches as f64 / a.len() as f64)
}

/// `20 log10(range(f) / rmse(f, g))`; `+inf` when the fields are identical.
pub fn psnr<T: Element>(f: &[T], g: &[T]) -> f64 {
    let (lo, hi) = f
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.to_f64()), hi.max(v.to_f64()))
        });
    let mse = f
        .iter()
        .zip(g)
        .map(|(a, b)| (a.to_f64() - b.to_f64()).powi(2))
        .sum::<f64>()
        / f.len() as f64;
    if mse == 0.0 {
        return f64::INFINITY;
    }
    20.0 * ((hi - lo) / mse.sqrt()).log10()
}

pub fn edit_ratio(edit_count: usize, vertex_count: usize) -> f64 {
    edit_count as f64 / vertex_count as f64
}

/// Overall compression ratio (original / archive) and overall bits per point.
pub fn ocr_obr(original_bytes: usize, archive_bytes: usize, vertex_count: usize) -> (f64, f64) {
    (
        original_bytes as f64 / archive_bytes as f64,
        8.0 * archive_bytes as f64 / vertex_count as f64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub vertices: usize,
    pub xi: f64,
    pub mss_distortion: f64,
    pub right_labeled_ratio: f64,
    pub psnr: f64,
    pub max_abs_error: f64,
    pub bound_violations: usize,
    pub fp_max: usize,
    pub fp_min: usize,
    pub fn_max: usize,
    pub fn_min: usize,
    pub edit_count: Option<usize>,
    pub edit_ratio: Option<f64>,
    pub ocr: Option<f64>,
    pub obr: Option<f64>,
}

impl VerificationReport {
    /// Segmentation identical and every vertex within the bound.
    pub fn passed(&self) -> bool {
        self.mss_distortion == 0.0 && self.bound_violations == 0
    }

    pub fn false_extrema(&self) -> usize {
        self.fp_max + self.fp_min + self.fn_max + self.fn_min
    }

    pub fn with_edits(mut self, edit_count: usize) -> Self {
        self.edit_count = Some(edit_count);
        self.edit_ratio = Some(edit_ratio(edit_count, self.vertices));
        self
    }

    pub fn with_sizes(mut self, original_bytes: usize, archive_bytes: usize) -> Self {
        let (ocr, obr) = ocr_obr(original_bytes, archive_bytes, self.vertices);
        self.ocr = Some(ocr);
        self.obr = Some(obr);
        self
    }

    /// One `key=value` per line; absent optional metrics are omitted.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("vertices", self.vertices.to_string());
        kv("xi", self.xi.to_string());
        kv("mss_distortion", self.mss_distortion.to_string());
        kv("right_labeled_ratio", self.right_labeled_ratio.to_string());
        kv("psnr", self.psnr.to_string());
        kv("max_abs_error", self.max_abs_error.to_string());
        kv("bound_violations", self.bound_violations.to_string());
        kv("fp_max", self.fp_max.to_string());
        kv("fp_min", self.fp_min.to_string());
        kv("fn_max", self.fn_max.to_string());
        kv("fn_min", self.fn_min.to_string());
        if let Some(v) = self.edit_count {
            kv("edit_count", v.to_string());
        }
        if let Some(v) = self.edit_ratio {
            kv("edit_ratio", v.to_string());
        }
        if let Some(v) = self.ocr {
            kv("ocr", v.to_string());
        }
        if let Some(v) = self.obr {
            kv("obr", v.to_string());
        }
        s
    }

    /// JSON document; an infinite PSNR is written as `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compares a candidate field against the original: segmentation, extrema,
/// bound and PSNR.
pub fn verify<T: Element>(
    original: &ScalarField<T>,
    candidate: &ScalarField<T>,
    xi: f64,
    exec: Exec,
) -> Result<VerificationReport> {
    if original.topology() != candidate.topology() {
        return Err(Error::TopologyMismatch);
    }
    let (fd, fl) = mss::segment(original, exec)?;
    let (gd, gl) = mss::segment(candidate, exec)?;
    let distortion = mss_distortion(&fl, &gl)?;
    let (worst, violations) = bound_deviation(original.values(), candidate.values(), xi);
    let n = original.len();
    let count = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&i| pred(i)).count();
    debug_assert_eq!(
        classify_critical(&fd) == classify_critical(&gd),
        count(&|i| fd.is_max(i) != gd.is_max(i) || fd.is_min(i) != gd.is_min(i)) == 0
    );
    Ok(VerificationReport {
        vertices: n,
        xi,
        mss_distortion: distortion,
        right_labeled_ratio: 1.0 - distortion,
        psnr: psnr(original.values(), candidate.values()),
        max_abs_error: worst,
        bound_violations: violations,
        fp_max: count(&|i| gd.is_max(i) && !fd.is_max(i)),
        fp_min: count(&|i| gd.is_min(i) && !fd.is_min(i)),
        fn_max: count(&|i| fd.is_max(i) && !gd.is_max(i)),
        fn_min: count(&|i| fd.is_min(i) && !gd.is_min(i)),
        edit_count: None,
        edit_ratio: None,
        ocr: None,
        obr: None,
    })
}

pub fn verify_any(
    original: &AnyField,
    candidate: &AnyField,
    xi: f64,
    exec: Exec,
) -> Result<VerificationReport> {
    match (original, candidate) {
        (AnyField::F32(f), AnyField::F32(g)) => verify(f, g, xi, exec),
        (AnyField::F64(f), AnyField::F64(g)) => verify(f, g, xi, exec),
        _ => Err(Error::DtypeMismatch {
            expected: original.dtype().name(),
            found: candidate.dtype().name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::grid::GridTopology;

    #[test]
    fn distortion_counts_pairs() {
        let a = SegmentationLabels {
            max_label: (0..100).collect(),
            min_label: vec![0; 100],
        };
        assert_eq!(mss_distortion(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.max_label[17] = 3;
        assert_eq!(mss_distortion(&a, &b).unwrap(), 0.01);
    }

    #[test]
    fn psnr_closed_forms() {
        let f: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        assert_eq!(psnr(&f, &f), f64::INFINITY);
        let g: Vec<f64> = f.iter().map(|v| v + 0.1).collect();
        assert!((psnr(&f, &g) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn psnr_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f: Vec<f32> = (0..257).map(|_| rng.random_range(-3.0..5.0)).collect();
        let g: Vec<f32> = f
            .iter()
            .map(|v| v + rng.random_range(-0.01..0.01))
            .collect();
        let fd: Vec<f64> = f.iter().map(|&v| v as f64).collect();
        let range = fd.iter().cloned().fold(f64::MIN, f64::max)
            - fd.iter().cloned().fold(f64::MAX, f64::min);
        let mut se = 0.0;
        for i in 0..f.len() {
            se += (f[i] as f64 - g[i] as f64) * (f[i] as f64 - g[i] as f64);
        }
        let expected = 10.0 * (range * range / (se / f.len() as f64)).log10();
        assert!((psnr(&f, &g) - expected).abs() < 1e-9);
    }

    #[test]
    fn ratios() {
        assert_eq!(edit_ratio(0, 100), 0.0);
        assert_eq!(edit_ratio(5, 100), 0.05);
        assert_eq!(ocr_obr(400, 400, 100), (1.0, 32.0));
        assert_eq!(ocr_obr(400, 200, 100).0, 2.0);
        let (ocr, obr) = ocr_obr(4096, 777, 1024);
        assert!((ocr * obr - 8.0 * 4096.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn report_of_identical_fields() {
        let f = ScalarField::from_fn(GridTopology::new(&[6, 5]).unwrap(), |i| {
            (i as f64 * 0.7).sin()
        })
        .unwrap();
        let r = verify(&f, &f, 1e-3, Exec::Serial)
            .unwrap()
            .with_edits(0)
            .with_sizes(240, 120);
        assert!(r.passed());
        assert_eq!(r.right_labeled_ratio, 1.0);
        assert_eq!(r.false_extrema(), 0);
        assert!(r.to_kv().contains("mss_distortion=0\n"));
        assert!(r.to_kv().contains("ocr=2\n"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["bound_violations"], 0);
        assert!(json["psnr"].is_null());
    }

    #[test]
    fn shifted_field_fails_bound() {
        let t = GridTopology::new(&[4, 4]).unwrap();
        let f = ScalarField::from_fn(t.clone(), |i| i as f64).unwrap();
        let g = ScalarField::from_fn(t, |i| i as f64 + 0.2).unwrap();
        let r = verify(&f, &g, 0.1, Exec::Serial).unwrap();
        assert_eq!(r.bound_violations, 16);
        assert_eq!(r.mss_distortion, 0.0);
        assert!(!r.passed());
    }
}
