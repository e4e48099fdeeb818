mod common;

use common::random_matrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use twinview_core::data::{standardize, Dataset, MultiviewDataset};
use twinview_core::eval::{accuracy, prepare, PreparedData, ViewSource};
use twinview_core::fixtures::gaussian_blobs;
use twinview_core::kernel::{gram, KernelSpec};
use twinview_core::pca::make_second_view;
use twinview_core::solver::solve_bordered;
use twinview_core::split::rng;
use twinview_core::tmvrkm::{
    assemble_negative_system, assemble_positive_system, conjugate_bound_gap, fit,
    stationarity_check, ClassSplit, TmvrkmParams, Variant,
};
use twinview_core::Vector;

/// Blob rows `0..n` as training data, standardized on themselves, with a
/// PCA second view; rows `n..2n` mapped through the training transforms.
fn blob_views(n: usize, seed: u64) -> (MultiviewDataset, MultiviewDataset) {
    let d = gaussian_blobs(2 * n, seed);
    let (tr, te) = (
        d.select(&(0..n).collect::<Vec<_>>()),
        d.select(&(n..2 * n).collect::<Vec<_>>()),
    );
    let s = standardize(&tr.features, &te.features).unwrap();
    let (tr, te, _) = make_second_view(
        &Dataset {
            features: s.train,
            ..tr
        },
        &Dataset {
            features: s.test,
            ..te
        },
        0.95,
    )
    .unwrap();
    (tr, te)
}

fn random_split(m1: usize, m2: usize, dims: &[usize], seed: u64) -> ClassSplit {
    let pos = dims
        .iter()
        .enumerate()
        .map(|(v, &d)| random_matrix(m1, d, seed * 17 + v as u64))
        .collect();
    let neg = dims
        .iter()
        .enumerate()
        .map(|(v, &d)| random_matrix(m2, d, seed * 17 + 100 + v as u64))
        .collect();
    ClassSplit::new(pos, neg).unwrap()
}

fn blob_params() -> TmvrkmParams {
    TmvrkmParams::tied(1e-3, 1e-2, KernelSpec::rbf(0.5))
}

#[test]
fn blob_fixture_training_accuracy() {
    let (data, _) = blob_views(60, 7);
    let split = ClassSplit::from_dataset(&data).unwrap();
    for variant in [Variant::DerivationConsistent, Variant::AsPublished] {
        let model = fit(&split, &blob_params().with_variant(variant)).unwrap();
        let acc = accuracy(&model.predict(&data.views).unwrap(), &data.labels).unwrap();
        assert!(acc >= 0.95, "{variant:?}: {acc}");
    }
}

/// The 200-sample pipeline fixture with the configuration its default grid
/// search selects.
fn pipeline_fixture() -> (PreparedData, TmvrkmParams) {
    let prep = prepare(
        &gaussian_blobs(200, 7),
        &ViewSource::PcaSecondView { threshold: 0.95 },
        7,
        false,
    )
    .unwrap();
    (
        prep,
        TmvrkmParams::tied(1e-4, 1e5, KernelSpec::rbf(0.03125)),
    )
}

#[test]
fn blob_fixture_test_accuracy() {
    let (prep, p) = pipeline_fixture();
    let model = fit(&ClassSplit::from_dataset(&prep.train).unwrap(), &p).unwrap();
    let acc = accuracy(&model.predict(&prep.test.views).unwrap(), &prep.test.labels).unwrap();
    assert!(acc >= 0.95, "{acc}");
}

#[test]
fn bottom_rows_hold_for_both_variants() {
    for seed in 0..10 {
        let split = random_split(3 + seed as usize, 7, &[2, 3], seed);
        for variant in [Variant::AsPublished, Variant::DerivationConsistent] {
            let p = TmvrkmParams::tied(0.7, 0.3, KernelSpec::rbf(1.1)).with_variant(variant);
            let model = fit(&split, &p).unwrap();
            let (r1, r2) = model.bottom_row_residuals();
            assert!(r1.abs() <= 1e-6 * 7.0);
            assert!(r2.abs() <= 1e-6 * (3 + seed) as f64);
        }
    }
}

#[test]
fn variants_differ_by_twice_the_coupling_term() {
    let split = random_split(4, 3, &[2], 11);
    let p = TmvrkmParams::tied(0.8, 0.5, KernelSpec::rbf(1.0));
    let published =
        assemble_positive_system(&split, &p.with_variant(Variant::AsPublished)).unwrap();
    let derived =
        assemble_positive_system(&split, &p.with_variant(Variant::DerivationConsistent)).unwrap();
    let kab = gram(&split.positive[0], &split.negative[0], &p.kernel).unwrap();
    let coupling: Vector = Vector::from_iterator(4, kab.row_iter().map(|r| r.sum())) / p.eta1;
    let diff = &derived.rhs_top - &published.rhs_top;
    assert!((diff - coupling * 2.0).amax() <= 1e-12);
    assert_eq!(published.core, derived.core);
}

#[test]
fn swapping_classes_maps_positive_core_to_negative_core() {
    let split = random_split(4, 6, &[3, 2], 5);
    let p = TmvrkmParams {
        eta1: 0.5,
        eta2: 2.0,
        lambda1: 0.1,
        lambda2: 3.0,
        kernel: KernelSpec::rbf(0.7),
        variant: Variant::default(),
    };
    let swapped_split = ClassSplit::new(split.negative.clone(), split.positive.clone()).unwrap();
    let swapped = TmvrkmParams {
        eta1: p.eta2,
        eta2: p.eta1,
        lambda1: p.lambda2,
        lambda2: p.lambda1,
        ..p
    };
    let neg = assemble_negative_system(&split, &p).unwrap();
    let pos_swapped = assemble_positive_system(&swapped_split, &swapped).unwrap();
    assert_eq!(neg.core, pos_swapped.core);
}

#[test]
fn negative_core_is_positive_definite_with_small_lambda() {
    let split = random_split(8, 12, &[4], 21);
    let p = TmvrkmParams::tied(1.0, 1e-3, KernelSpec::rbf(0.8));
    let sys = assemble_negative_system(&split, &p).unwrap();
    assert!(sys.core.clone().cholesky().is_some());
    assert!(solve_bordered(&sys).is_ok());
}

#[test]
fn single_view_system_matches_direct_gram() {
    let split = random_split(5, 4, &[3], 8);
    let p = TmvrkmParams::tied(1.7, 0.2, KernelSpec::rbf(1.3));
    let sys = assemble_positive_system(&split, &p).unwrap();
    let mut core = gram(&split.positive[0], &split.positive[0], &p.kernel)
        .unwrap()
        .map(|k| k / p.eta1);
    for i in 0..5 {
        core[(i, i)] += p.lambda1;
    }
    assert_eq!(sys.core, core);
}

/// With `B = -A`, a linear kernel and tied parameters the negative system is
/// solved by `h2 = 1`. The published assembly also gives `h1 = 1`, while the
/// derivation-consistent assembly gives `h1 = (2m / 1ᵀC⁻¹1) C⁻¹1 - 1`.
#[test]
fn mirrored_classes_closed_forms() {
    let a = random_matrix(6, 3, 77);
    let split = ClassSplit::new(vec![a.clone()], vec![-a.clone()]).unwrap();
    let (eta, lambda) = (1.3, 0.4);
    let base = TmvrkmParams::tied(eta, lambda, KernelSpec::linear());

    let published = fit(&split, &base.with_variant(Variant::AsPublished)).unwrap();
    assert!((&published.h1 - &published.h2).amax() <= 1e-6);
    assert!((&published.h1 - Vector::from_element(6, 1.0)).amax() <= 1e-9);

    let derived = fit(&split, &base.with_variant(Variant::DerivationConsistent)).unwrap();
    assert!((&derived.h2 - Vector::from_element(6, 1.0)).amax() <= 1e-9);
    let mut c = &a * a.transpose() / eta;
    for i in 0..6 {
        c[(i, i)] += lambda;
    }
    let c_inv_one = c.cholesky().unwrap().solve(&Vector::from_element(6, 1.0));
    let expected = &c_inv_one * (12.0 / c_inv_one.sum()) - Vector::from_element(6, 1.0);
    assert!((&derived.h1 - expected).amax() <= 1e-9);
}

#[test]
fn f1_matches_explicit_weights_for_linear_kernel() {
    let split = random_split(5, 7, &[3], 13);
    let p = TmvrkmParams::tied(0.9, 0.6, KernelSpec::linear());
    let model = fit(&split, &p).unwrap();
    let (a, b) = (&split.positive[0], &split.negative[0]);
    let w = (a.transpose() * &model.h1 - b.transpose() * Vector::from_element(7, 1.0)) / p.eta1;
    let mut r = rng(99);
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| r.gen_range(-3.0..3.0)).collect();
        let (f1, _) = model.decision_scores(&[&x]).unwrap();
        let xw: f64 = x.iter().zip(w.iter()).map(|(p, q)| p * q).sum();
        assert!((f1 - xw).abs() <= 1e-10);
    }
}

#[test]
fn stationarity_holds_and_detects_perturbation() {
    let split = random_split(6, 9, &[2, 4], 3);
    let p = TmvrkmParams {
        eta1: 0.5,
        eta2: 1.5,
        lambda1: 0.8,
        lambda2: 0.3,
        kernel: KernelSpec::linear(),
        variant: Variant::DerivationConsistent,
    };
    let model = fit(&split, &p).unwrap();
    let r = stationarity_check(&model).unwrap();
    assert!(r.max() <= 1e-6, "{r:?}");

    let mut perturbed = model.clone();
    perturbed.h1[2] += 0.1;
    let r = stationarity_check(&perturbed).unwrap();
    assert!(r.r_h1 >= p.lambda1 * 0.1 - 1e-6);
}

#[test]
fn fits_are_deterministic() {
    let split = random_split(10, 12, &[3, 3], 4);
    let p = TmvrkmParams::tied(0.3, 0.2, KernelSpec::rbf(0.9));
    let a = fit(&split, &p).unwrap();
    let b = fit(&split, &p).unwrap();
    assert_eq!(a.h1.as_slice(), b.h1.as_slice());
    assert_eq!(a.h2.as_slice(), b.h2.as_slice());
    assert_eq!(
        (a.b1.to_bits(), a.b2.to_bits()),
        (b.b1.to_bits(), b.b2.to_bits())
    );
}

#[test]
fn predictions_invariant_to_training_order() {
    let (train, test) = blob_views(60, 7);
    let split = ClassSplit::from_dataset(&train).unwrap();
    let p = blob_params();
    let model = fit(&split, &p).unwrap();

    let mut r = rng(5);
    let mut pos_order: Vec<usize> = (0..split.m1()).collect();
    let mut neg_order: Vec<usize> = (0..split.m2()).collect();
    pos_order.shuffle(&mut r);
    neg_order.shuffle(&mut r);
    let permuted = ClassSplit::new(
        split
            .positive
            .iter()
            .map(|v| v.select_rows(&pos_order))
            .collect(),
        split
            .negative
            .iter()
            .map(|v| v.select_rows(&neg_order))
            .collect(),
    )
    .unwrap();
    let other = fit(&permuted, &p).unwrap();

    let scores = model.decision_scores_batch(&test.views).unwrap();
    assert!(scores.iter().all(|(f1, f2)| (f1 + f2).abs() > 1e-9));
    assert_eq!(
        model.predict(&test.views).unwrap(),
        other.predict(&test.views).unwrap()
    );
}

#[test]
fn conjugate_bound_on_fitted_model() {
    let split = random_split(7, 5, &[3], 31);
    let p = TmvrkmParams::tied(1.0, 0.7, KernelSpec::linear());
    let model = fit(&split, &p).unwrap();
    let mut r = rng(1);
    for _ in 0..100 {
        let xi = Vector::from_fn(7, |_, _| r.gen_range(-5.0..5.0));
        assert!(conjugate_bound_gap(&model.h1, &xi, p.lambda1) >= 0.0);
    }
    assert!(conjugate_bound_gap(&model.h1, &(&model.h1 * p.lambda1), p.lambda1).abs() <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stationarity_on_random_linear_fits(m1 in 1usize..15, m2 in 1usize..15, v in 1usize..4, seed in 0u64..10_000,
                                          eta in 0.1f64..10.0, lambda in 0.05f64..10.0) {
        let dims: Vec<usize> = (0..v).map(|i| 1 + (i + seed as usize) % 4).collect();
        let split = random_split(m1, m2, &dims, seed);
        let p = TmvrkmParams::tied(eta, lambda, KernelSpec::linear());
        let model = fit(&split, &p).unwrap();
        let r = stationarity_check(&model).unwrap();
        prop_assert!(r.max() <= 1e-6, "{:?}", r);
    }
}
