//! Seeded results must not depend on the size of the worker pool.

use crosspoly::gauss_mc::{chi_square_tail_check, gaussian_matrix, mc_measure, thickening_check};
use crosspoly::geometry::CrossPolytope;
use crosspoly::gluskin::{bm_estimate, bridge_check, gen_gluskin, powering_check, random_coefficient_matrix};
use crosspoly::maurey::{random_unit_points, union_inclusion_check};
use crosspoly::rng::{stream_rng, with_workers};
use crosspoly::sparse_l1::HullOracle;
use crosspoly::suppression::{block_tail_experiment, verify_suppression_inequality, BlockTailConfig};
use nalgebra::DMatrix;

fn same<T: serde::Serialize + Send>(f: impl Fn() -> T + Sync) {
    let one = serde_json::to_string(&with_workers(1, &f)).unwrap();
    let four = serde_json::to_string(&with_workers(4, &f)).unwrap();
    let three = serde_json::to_string(&with_workers(3, &f)).unwrap();
    assert_eq!(one, four);
    assert_eq!(one, three);
}

#[test]
fn monte_carlo_measures() {
    let poly = CrossPolytope::new(gaussian_matrix(3, 5, &mut stream_rng(1, 0))).unwrap();
    let oracle = HullOracle::new(&poly).unwrap();
    // sample counts straddle a block boundary
    same(|| mc_measure(|x| oracle.contains_slice(x), 3, 4096 * 3 + 17, 5).unwrap());
    same(|| chi_square_tail_check(7, &[1.0, 2.5], 50_000, 3).unwrap());
    same(|| thickening_check(&poly.select(&[0, 1, 2]).unwrap(), 1.0, 0.2, 20_000, 8).unwrap());
}

#[test]
fn suppression_and_block_tail() {
    let poly = CrossPolytope::new(gaussian_matrix(4, 4, &mut stream_rng(2, 0))).unwrap();
    same(|| verify_suppression_inequality(&poly, 2, 1, 1.0, 30_000, 4).unwrap());
    let cfg = BlockTailConfig::new(6, 6, 2, 1.0);
    same(|| block_tail_experiment(&cfg, &DMatrix::identity(6, 6), &[4, 5], 300, 9).unwrap());
}

#[test]
fn gluskin_pipeline_checks() {
    let a = random_coefficient_matrix(6, 3, 1, &mut stream_rng(3, 0)).unwrap();
    same(|| powering_check(&a, 3.0, 3000, 3000, 11).unwrap());
    let a4 = random_coefficient_matrix(16, 4, 4, &mut stream_rng(4, 0)).unwrap();
    let g = gen_gluskin(4, 16, 4).unwrap().gamma;
    same(|| bridge_check(&a4, &g, 2.0, 2, 60, 12).unwrap());
    let k = gen_gluskin(2, 8, 5).unwrap().polytope();
    same(|| bm_estimate(&k, 4, 13).unwrap());
}

#[test]
fn maurey_union() {
    let pts = random_unit_points(8, 16, &mut stream_rng(6, 0));
    same(|| union_inclusion_check(&pts, 1.0, 6, 3, 50, 2.0, 14).unwrap());
}
