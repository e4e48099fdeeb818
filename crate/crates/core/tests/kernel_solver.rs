mod common;

use common::{gauss_solve, random_matrix, rel_diff};
use proptest::prelude::*;
use rand::Rng;
use twinview_core::kernel::{gram, kernel_eval, multiview_gram, KernelSpec};
use twinview_core::solver::{solve_bordered, BorderedSystem};
use twinview_core::split::rng;
use twinview_core::{Matrix, Vector};

#[test]
fn linear_gram_matches_naive_product() {
    let x = random_matrix(6, 2, 41);
    let g = gram(&x, &x, &KernelSpec::linear()).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let mut s = 0.0;
            for k in 0..2 {
                s += x[(i, k)] * x[(j, k)];
            }
            assert!((g[(i, j)] - s).abs() <= 1e-12);
        }
    }
}

#[test]
fn multiview_gram_is_sum_of_view_grams() {
    let spec = KernelSpec::rbf(0.9);
    let xs = [random_matrix(5, 3, 1), random_matrix(5, 2, 2)];
    let ys = [random_matrix(4, 3, 3), random_matrix(4, 2, 4)];
    let total = multiview_gram(&xs, &ys, &spec).unwrap();
    let g0 = gram(&xs[0], &ys[0], &spec).unwrap();
    let g1 = gram(&xs[1], &ys[1], &spec).unwrap();
    for i in 0..5 {
        for j in 0..4 {
            assert!((total[(i, j)] - (g0[(i, j)] + g1[(i, j)])).abs() <= 1e-12);
        }
    }
}

#[test]
fn rbf_entries_against_scalar_kernel() {
    let spec = KernelSpec::rbf(0.6);
    let x = random_matrix(4, 3, 5);
    let y = random_matrix(3, 3, 6);
    let g = gram(&x, &y, &spec).unwrap();
    for i in 0..4 {
        for j in 0..3 {
            let xi: Vec<f64> = x.row(i).iter().copied().collect();
            let yj: Vec<f64> = y.row(j).iter().copied().collect();
            assert_eq!(g[(i, j)], kernel_eval(&xi, &yj, &spec).unwrap());
            assert!(g[(i, j)] > 0.0 && g[(i, j)] <= 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_symmetry_and_transpose(n in 1usize..12, m in 1usize..9, d in 1usize..5, seed in any::<u64>(), sigma in 0.05f64..5.0) {
        let x = random_matrix(n, d, seed);
        let y = random_matrix(m, d, seed ^ 0xabc);
        for spec in [KernelSpec::rbf(sigma), KernelSpec::linear()] {
            let g = gram(&x, &x, &spec).unwrap();
            prop_assert!((&g - g.transpose()).amax() <= 1e-12);
            let gxy = gram(&x, &y, &spec).unwrap();
            let gyx = gram(&y, &x, &spec).unwrap();
            prop_assert!((gxy - gyx.transpose()).amax() <= 1e-12);
        }
        let g = gram(&x, &x, &KernelSpec::rbf(sigma)).unwrap();
        prop_assert!(g.diagonal().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rbf_self_gram_is_psd(n in 1usize..50, d in 1usize..4, seed in any::<u64>(), sigma in 0.1f64..4.0) {
        let x = random_matrix(n, d, seed);
        let g = gram(&x, &x, &KernelSpec::rbf(sigma)).unwrap();
        let shifted = g + Matrix::identity(n, n) * 1e-8;
        prop_assert!(shifted.cholesky().is_some());
    }
}

#[test]
fn hand_example_agrees_with_elimination_oracle() {
    let sys = BorderedSystem::symmetric(
        Matrix::identity(2, 2) * 2.0,
        Vector::from_element(2, 1.0),
        Vector::zeros(2),
        1.0,
    );
    let (full, rhs) = sys.to_full();
    let oracle = gauss_solve(&full, &rhs);
    assert!(rel_diff(&oracle, &[0.5, 0.5, -1.0]) < 1e-15);
    let s = solve_bordered(&sys).unwrap();
    assert!(rel_diff(&[s.h[0], s.h[1], s.b], &oracle) < 1e-15);
}

/// Random kernel-style bordered system: `G/eta + lambda I` with an RBF Gram.
pub fn random_system(seed: u64) -> BorderedSystem {
    let mut r = rng(seed);
    let n = r.gen_range(1..=30);
    let d = r.gen_range(1..=4);
    let lambda = 10f64.powf(r.gen_range(-3.0..=1.0));
    let eta = 10f64.powf(r.gen_range(-1.0..=1.0));
    let x = random_matrix(n, d, seed.wrapping_mul(31));
    let mut core = gram(&x, &x, &KernelSpec::rbf(r.gen_range(0.3..3.0))).unwrap() / eta;
    for i in 0..n {
        core[(i, i)] += lambda;
    }
    let v = r.gen_range(1..=3) as f64;
    let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    BorderedSystem {
        core,
        border: Vector::from_element(n, sign * v),
        row_border: Vector::from_element(n, 1.0),
        corner: 0.0,
        rhs_top: Vector::from_fn(n, |_, _| r.gen_range(-3.0..3.0)),
        rhs_bottom: r.gen_range(1..20) as f64,
    }
}

#[test]
fn random_systems_match_oracle() {
    for seed in 0..60 {
        let sys = random_system(seed);
        let s = solve_bordered(&sys).unwrap();
        assert!(sys.relative_residual(&s.h, s.b) <= 1e-8, "seed {seed}");
        let (full, rhs) = sys.to_full();
        let oracle = gauss_solve(&full, &rhs);
        let mut mine: Vec<f64> = s.h.iter().copied().collect();
        mine.push(s.b);
        assert!(rel_diff(&mine, &oracle) <= 1e-6, "seed {seed}");
    }
}
