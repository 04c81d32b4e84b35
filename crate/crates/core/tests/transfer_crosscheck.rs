use fareyphase_core::transfer::{
    build_matrix, eigenfunction_eval, fixed_point_residual, iterate_functional, lambda_from_ratio, leading_eigen,
    SpectralResult,
};

fn eigen(beta: f64, dim: usize) -> SpectralResult {
    leading_eigen(&build_matrix(beta, dim).unwrap(), 1e-10, 100_000).unwrap()
}

#[test]
fn near_zero_temperature_limit() {
    assert!((eigen(1e-6, 256).lambda - 2.0).abs() < 1e-3);
}

#[test]
fn matrix_agrees_with_ratio_at_half() {
    let m = eigen(0.5, 256).lambda;
    let r = lambda_from_ratio(0.5, 26).unwrap();
    assert!((m - r).abs() < 1e-5, "{m} vs {r}");
}

#[test]
fn matrix_agrees_with_ratio_at_quarter() {
    let m = eigen(0.25, 256).lambda;
    let r = lambda_from_ratio(0.25, 24).unwrap();
    assert!((m - r).abs() < 1e-5, "{m} vs {r}");
}

#[test]
fn ratio_sequence_is_cauchy() {
    let a = lambda_from_ratio(0.5, 22).unwrap();
    let b = lambda_from_ratio(0.5, 24).unwrap();
    assert!((a - b).abs() < 1e-4);
}

#[test]
fn lambda_decreases_towards_one() {
    let grid = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.95];
    let lambdas: Vec<f64> = grid.iter().map(|b| eigen(*b, 256).lambda).collect();
    assert!(lambdas.windows(2).all(|w| w[1] < w[0]));
    assert!(lambdas.iter().all(|l| *l > 1.0));
}

#[test]
fn eigenvector_is_positive() {
    for beta in [0.1, 0.5, 0.9] {
        assert!(eigen(beta, 512).eigvec.iter().all(|a| *a > 0.0), "beta={beta}");
    }
}

#[test]
fn truncation_converges_near_the_edge() {
    let l256 = eigen(0.99, 256).lambda;
    let l512 = eigen(0.99, 512).lambda;
    assert!((l512 - l256).abs() < l512 - 1.0);
    let steps: Vec<f64> = [64, 128, 256, 512].windows(2).map(|d| (eigen(0.9, d[1]).lambda - eigen(0.9, d[0]).lambda).abs()).collect();
    assert!(steps.windows(2).all(|w| w[1] < w[0]), "{steps:?}");
}

#[test]
fn functional_iteration_reaches_the_eigenvalue() {
    let lambda = eigen(0.5, 256).lambda;
    let mut start = vec![0.0; 256];
    start[0] = 1.0;
    let t = iterate_functional(0.5, 256, 200, &start).unwrap();
    assert!((t.norm_ratios.last().unwrap() - lambda).abs() < 1e-6);

    let other: Vec<f64> = (0..256).map(|m| 1.0 / (1.0 + m as f64).powi(2)).collect();
    let u = iterate_functional(0.5, 256, 200, &other).unwrap();
    let diff = t.vector.iter().zip(&u.vector).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-8);
}

#[test]
fn eigenfunction_solves_the_fixed_point_equation() {
    let r = eigen(0.5, 256);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let worst = grid.iter().map(|x| fixed_point_residual(&r, *x).unwrap()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
    let values: Vec<f64> = grid.iter().map(|x| eigenfunction_eval(&r, *x).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    assert!(values[0].is_finite());
}
