use fareyphase_core::balls::{
    approx_partition, ball_by_composition, ball_exact, ball_index, exact_diameters, symbols_for_ball,
};

#[test]
fn composition_matches_exact_for_every_ball_to_level_fourteen() {
    for k in 2..=14u32 {
        for n in 1..=1u64 << (k - 2) {
            let s = symbols_for_ball(k, n).unwrap();
            assert_eq!(ball_index(&s).unwrap(), (k, n));
            let e = ball_exact(k, n).unwrap();
            let c = ball_by_composition(&s).unwrap();
            assert!((e - c).abs() <= 1e-14 * e, "k={k} n={n}");
        }
    }
}

#[test]
fn diameters_sum_below_one_and_shrink() {
    let mut last_max = f64::INFINITY;
    for k in 2..=20 {
        let d = exact_diameters(k).unwrap();
        let total: f64 = d.iter().sum();
        assert!(total < 1.0 && total > 0.0, "k={k}");
        let max = d.iter().copied().fold(0.0, f64::max);
        assert!(d.iter().all(|x| *x > 0.0 && *x < 1.0));
        assert!(max <= last_max, "k={k}");
        last_max = max;
    }
}

#[test]
fn derivative_sum_error_shrinks() {
    let errs: Vec<f64> = [6, 10, 14].iter().map(|k| approx_partition(*k, 1.0).unwrap().relative_error.abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let per_level: Vec<f64> =
        [6, 10, 14, 18].iter().map(|k| approx_partition(*k, 1.0).unwrap().log_ratio_per_level).collect();
    assert!(per_level.windows(2).all(|w| w[1] < w[0]), "{per_level:?}");
}
