use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::base_codec::compress_base;
use crate::field::{bound_deviation, generate_synthetic, resolve_bound, ErrorBound, SyntheticKind};
use crate::grid::GridTopology;
use crate::mss::{classify_critical, compute_directions, segment, segmentation_equal};

fn field(dims: &[usize], values: Vec<f64>) -> ScalarField<f64> {
    ScalarField::new(GridTopology::new(dims).unwrap(), values).unwrap()
}

fn assert_postconditions<T: Element>(f: &ScalarField<T>, g: &ScalarField<T>, xi: f64) {
    assert_eq!(bound_deviation(f.values(), g.values(), xi).1, 0);
    let (fd, fl) = segment(f, Exec::Serial).unwrap();
    let (gd, gl) = segment(g, Exec::Serial).unwrap();
    assert_eq!(segmentation_equal(&fl, &gl).unwrap().mismatches, 0);
    assert_eq!(classify_critical(&fd), classify_critical(&gd));
}

#[test]
fn identical_input_needs_no_edits() {
    let f: ScalarField<f32> = generate_synthetic(SyntheticKind::Trig, &[16, 16], 1).unwrap();
    let out = derive_edits(&f, &f, 1e-3, EngineOptions::default()).unwrap();
    assert!(out.edits.is_empty());
    assert_eq!(out.edited, f);
    let engine = EditEngine::new(&f, &f, 1e-3, EngineOptions::default()).unwrap();
    assert!(engine.detect_false_critical().is_empty());
}

#[test]
fn raised_vertex_is_false_positive_maximum() {
    // f: vertex 1 is the peak; g lifts vertex 0 above it
    let f = field(&[2, 2], vec![1.0, 2.0, -5.0, -4.0]);
    let g = field(&[2, 2], vec![1.5, 1.45, -5.0, -4.0]);
    let engine = EditEngine::new(&f, &g, 0.6, EngineOptions::default()).unwrap();
    let report = engine.detect_false_critical();
    assert_eq!(report.fp_max, vec![0]);
    assert_eq!(report.fn_max, vec![1]);
    assert!(report.fp_min.is_empty() && report.fn_min.is_empty());
}

#[test]
fn alternating_lowering_terminates() {
    // f_i = 1, f_j = 2, ξ = 0.6, g_i = 1.5, g_j = 1.45
    let f = field(&[2, 2], vec![1.0, 2.0, -5.0, -4.0]);
    let g = field(&[2, 2], vec![1.5, 1.45, -5.0, -4.0]);
    let mut engine = EditEngine::new(&f, &g, 0.6, EngineOptions::default()).unwrap();
    engine.run_c_loop().unwrap();
    let g = engine.state().values();
    assert!(g[0] < 2.0 - 0.6 && 2.0 - 0.6 < g[1]);
    assert!(engine.detect_false_critical().is_empty());
}

#[test]
fn fp_max_subloop_empties_within_64_iterations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = field(
        &[9, 9],
        (0..81).map(|_| rng.random_range(0.0..1.0)).collect(),
    );
    let dirs = compute_directions(&f, Exec::Serial);
    // lift one regular interior vertex above all of its neighbors
    let xi = 0.6;
    let v = (0..81)
        .find(|&i| {
            let c = f.topology().coords(i);
            (1..8).contains(&c[0])
                && (1..8).contains(&c[1])
                && !dirs.is_max(i)
                && f.topology()
                    .neighbors(i)
                    .iter()
                    .all(|&j| f.values()[j] < f.values()[i] + xi)
        })
        .unwrap();
    let mut gv = f.values().to_vec();
    gv[v] = f.values()[v] + xi;
    let g = field(&[9, 9], gv);
    let mut engine = EditEngine::new(&f, &g, xi, EngineOptions::default()).unwrap();
    assert!(engine.detect_false_critical().fp_max.contains(&v));
    let mut iters = 0;
    loop {
        let gd = engine.directions().clone();
        let report = engine.detect_with(&gd);
        if report.fp_max.is_empty() {
            break;
        }
        engine.fix_fp_max(&report, &gd).unwrap();
        iters += 1;
        assert!(iters <= 64);
    }
}

#[test]
fn fixes_are_no_ops_on_exact_input() {
    let f = field(&[3, 3], (0..9).map(|i| (i * 7 % 9) as f64).collect());
    let mut engine = EditEngine::new(&f, &f, 0.1, EngineOptions::default()).unwrap();
    let gd = engine.directions().clone();
    let report = engine.detect_with(&gd);
    assert_eq!(engine.fix_fp_max(&report, &gd).unwrap(), 0);
    assert_eq!(engine.fix_fp_min(&report, &gd).unwrap(), 0);
    assert_eq!(engine.fix_fn_max(&report, &gd).unwrap(), 0);
    assert_eq!(engine.fix_fn_min(&report, &gd).unwrap(), 0);
    assert_eq!(engine.run_c_loop().unwrap(), 0);
    assert_eq!(engine.run_r_loop().unwrap(), 0);
}

/// 3x3 grid: center vertex 4 (value 5) should ascend to vertex 5 (value 23)
/// but in the edited data vertex 3 rose from 22 to 24.
fn troublemaker_fixture() -> (ScalarField<f64>, ScalarField<f64>) {
    let f = field(&[3, 3], vec![1.0, 2.0, 3.0, 22.0, 5.0, 23.0, 4.0, 0.5, 1.5]);
    let g = field(&[3, 3], vec![1.0, 2.0, 3.0, 24.0, 5.0, 23.0, 4.0, 0.5, 1.5]);
    (f, g)
}

#[test]
fn troublemaker_is_the_wrongly_preferred_neighbor() {
    let (f, g) = troublemaker_fixture();
    let engine = EditEngine::new(&f, &g, 2.5, EngineOptions::default()).unwrap();
    assert!(engine.detect_false_critical().is_empty());
    let gd = engine.directions();
    assert_eq!(
        engine
            .find_troublemaker(gd, 4, LineKind::Ascending)
            .unwrap(),
        (4, 3)
    );
    // vertex 0 flows to vertex 3 in both fields
    assert!(matches!(
        engine.find_troublemaker(gd, 0, LineKind::Descending),
        Err(Error::Internal(_))
    ));
}

#[test]
fn troublemaker_fixture_is_repaired() {
    let (f, g) = troublemaker_fixture();
    let out = derive_edits(&f, &g, 2.5, EngineOptions::default()).unwrap();
    assert_postconditions(&f, &out.edited, 2.5);
    assert_eq!(out.edits.indices(), &[3]);
    assert!(out.edits.values()[0] < 23.0);
}

#[test]
fn pipeline_fields_converge_and_hold_postconditions() {
    for seed in 0..6u64 {
        for (kind, dims) in [
            (SyntheticKind::GaussianMixture, &[40usize, 40][..]),
            (SyntheticKind::RandomSmooth, &[12, 12, 12][..]),
            (SyntheticKind::Trig, &[30, 20][..]),
        ] {
            let f: ScalarField<f32> = generate_synthetic(kind, dims, seed).unwrap();
            let xi = resolve_bound(ErrorBound::relative(1e-2), &f).unwrap();
            let base = compress_base(&f, xi).unwrap();
            let mut prev = base.reconstruction.values().to_vec();
            let mut violations = 0;
            let out = EditEngine::new(&f, &base.reconstruction, xi, EngineOptions::default())
                .unwrap()
                .observe(|g: &[f32]| {
                    violations += g.iter().zip(&prev).filter(|(a, b)| a > b).count();
                    prev.copy_from_slice(g);
                })
                .run()
                .unwrap_or_else(|e| panic!("{kind} {dims:?} seed {seed}: {e}"));
            assert_eq!(violations, 0);
            assert_postconditions(&f, &out.edited, xi);
            assert_eq!(
                apply_edits(&base.reconstruction, &out.edits).unwrap(),
                out.edited
            );
            for (i, v) in out.edits.iter() {
                assert!(v < base.reconstruction.values()[i]);
            }
        }
    }
}

#[test]
fn parallel_mode_reaches_same_postconditions() {
    let f: ScalarField<f64> =
        generate_synthetic(SyntheticKind::GaussianMixture, &[48, 48], 11).unwrap();
    let xi = resolve_bound(ErrorBound::relative(1e-2), &f).unwrap();
    let base = compress_base(&f, xi).unwrap();
    let serial = derive_edits(&f, &base.reconstruction, xi, EngineOptions::default()).unwrap();
    let par = derive_edits(
        &f,
        &base.reconstruction,
        xi,
        EngineOptions::with_exec(Exec::Parallel),
    )
    .unwrap();
    assert_postconditions(&f, &serial.edited, xi);
    assert_postconditions(&f, &par.edited, xi);
}

#[test]
fn random_perturbations_converge() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for round in 0..40 {
        let dims: &[usize] = if round % 2 == 0 {
            &[10, 10]
        } else {
            &[5, 5, 5]
        };
        let n: usize = dims.iter().product();
        let xi = 0.05;
        let f = field(dims, (0..n).map(|_| rng.random_range(0.0..1.0)).collect());
        let g = field(
            dims,
            f.values()
                .iter()
                .map(|v| v + rng.random_range(-xi..xi))
                .collect(),
        );
        let out = derive_edits(&f, &g, xi, EngineOptions::default()).unwrap();
        assert_postconditions(&f, &out.edited, xi);
    }
}

#[test]
fn apply_edits_checks_indices() {
    let f = field(&[2, 2], vec![0.0; 4]);
    assert_eq!(apply_edits(&f, &EditSet::empty()).unwrap(), f);
    let one = EditSet::new(vec![2], vec![-0.5]).unwrap();
    assert_eq!(
        apply_edits(&f, &one).unwrap().values(),
        &[0.0, 0.0, -0.5, 0.0]
    );
    let bad = EditSet::new(vec![4], vec![1.0]).unwrap();
    assert!(matches!(
        apply_edits(&f, &bad),
        Err(Error::IndexOutOfRange { index: 4, .. })
    ));
    assert!(matches!(
        EditSet::new(vec![3, 3], vec![1.0, 1.0]),
        Err(Error::UnsortedIndices(1))
    ));
}

#[test]
fn dtype_mismatch_is_rejected() {
    let f = field(&[2, 2], vec![0.0; 4]);
    let any64 = AnyField::from(f.clone());
    let any32 = AnyField::from(f.cast::<f32>());
    assert!(matches!(
        derive_edits_any(&any64, &any32, 0.1, EngineOptions::default()),
        Err(Error::DtypeMismatch { .. })
    ));
}
