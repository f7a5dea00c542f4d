//! Cross-module flows: parameters feeding the discretization, and the
//! discretized coefficient matrices feeding exposure, bridge and powering.

use approx::assert_relative_eq;
use crosspoly::gluskin::{
    bridge_check, exposed, gen_gluskin, ku_split, powering_check, quantize, random_coefficient_matrix,
    u_norm_threshold,
};
use crosspoly::maurey::{maurey_parameters, maurey_sparsify, random_unit_points, DEFAULT_RETRY_BUDGET};
use crosspoly::params::{check_constraints, derive_params, Constants};
use crosspoly::rng::{derive_seed, stream_rng};

#[test]
fn quantized_split_matrices_pass_bridge_and_powering() {
    let (n, m, rho) = (3usize, 12usize, 2.0);
    let eps = 1.0 / (rho * (n * n) as f64);
    let gamma = gen_gluskin(n, m, 17).unwrap().gamma;
    let mut rng = stream_rng(17, 1);
    for trial in 0..5u64 {
        let a = random_coefficient_matrix(m, n, n, &mut rng).unwrap();
        let q = quantize(&a, eps).unwrap();
        assert_eq!(q.mesh(), Some(eps));
        // quantization only shrinks entries
        for (qc, ac) in q.columns().iter().zip(a.columns()) {
            assert!(qc.l1_norm() <= ac.l1_norm() + 1e-15);
        }
        let split = ku_split(&q, 2).unwrap();
        let sum = split.k_part.to_dense() + split.u_part.to_dense();
        assert_eq!(sum, q.to_dense());
        let ex = exposed(&q, &gamma).unwrap();
        assert_eq!(ex.n_fresh + ex.support.len(), m);
        let bridge = bridge_check(&q, &gamma, rho, 2, 40, derive_seed(5, trial)).unwrap();
        assert_eq!(bridge.violations, 0, "{bridge:?}");
        assert_eq!(bridge.k_histogram.iter().sum::<usize>(), 40);
    }
    let a = quantize(&random_coefficient_matrix(6, 3, 1, &mut rng).unwrap(), eps).unwrap();
    let p = powering_check(&a, 3.0, 10_000, 10_000, 23).unwrap();
    assert!(p.agree, "{p:?}");
}

#[test]
fn derived_parameters_drive_maurey_scale() {
    let p = derive_params(1e6, &Constants::default()).unwrap();
    let report = check_constraints(&p);
    assert!(report.lambda_bounds && report.l_consistent);
    for k in [p.lambda.ceil() as usize, 100, 1000] {
        let (t, r0) = maurey_parameters(k, p.lambda, p.l).unwrap();
        assert!(t as f64 >= k as f64 / p.lambda);
        assert_relative_eq!(r0, p.l / (t as f64).sqrt(), max_relative = 1e-14);
        assert!((k as f64).sqrt() * r0 <= p.l * p.lambda.sqrt() * (1.0 + 1e-12));
    }
    // the U-event threshold at the derived scale
    let l = u_norm_threshold(p.n as usize, p.s as usize, p.rho, p.constants.c0);
    assert!(l.is_finite() && l > 0.0);
}

#[test]
fn maurey_uniform_weights_in_thirty_dimensions() {
    let pts = random_unit_points(30, 100, &mut stream_rng(40, 0));
    let a = vec![0.01; 100];
    for trial in 0..1000u64 {
        let r = maurey_sparsify(&pts, &a, 1.0, 25, 2.0, derive_seed(40, trial), DEFAULT_RETRY_BUDGET).unwrap();
        assert!(r.achieved_distance <= 2.0 / 5.0);
        assert!(r.subset.len() <= 25);
    }
}
