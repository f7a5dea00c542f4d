//! Gaussian Monte Carlo with exact binomial intervals, and closed-form
//! Gaussian-measure bounds for cross-polytopes and their thickenings.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use std::f64::consts::{E, PI};

use crate::combinat::ln_binom;
use crate::error::{Error, Result};
use crate::geometry::{check_orthonormal, CrossPolytope, ThickenedPolytope};
use crate::sparse_l1::HullOracle;
use crate::rng::{stream_rng, BLOCK_SIZE};

/// Two-sided level of every interval reported by the crate.
pub const CONFIDENCE: f64 = 0.99;

/// A Bernoulli frequency with its Clopper–Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub hits: u64,
    pub samples: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MCEstimate {
    pub fn from_counts(hits: u64, samples: u64) -> Self {
        assert!(hits <= samples && samples > 0, "need 0 ≤ hits ≤ samples, samples > 0");
        let (ci_low, ci_high) = clopper_pearson(hits, samples, 1.0 - CONFIDENCE);
        let point = hits as f64 / samples as f64;
        MCEstimate { hits, samples, point, ci_low: ci_low.min(point), ci_high: ci_high.max(point) }
    }

    /// `sqrt(p̂(1−p̂)/n)`.
    pub fn std_error(&self) -> f64 {
        (self.point * (1.0 - self.point) / self.samples as f64).sqrt()
    }

    pub fn upper_3sigma(&self) -> f64 {
        self.point + 3.0 * self.std_error()
    }
}

/// Exact binomial interval at level `1 − alpha`.
pub fn clopper_pearson(hits: u64, samples: u64, alpha: f64) -> (f64, f64) {
    let k = hits as f64;
    let n = samples as f64;
    let lo = if hits == 0 { 0.0 } else { beta_quantile(alpha / 2.0, k, n - k + 1.0) };
    let hi = if hits == samples { 1.0 } else { beta_quantile(1.0 - alpha / 2.0, k + 1.0, n - k) };
    (lo, hi)
}

fn beta_quantile(q: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Runs `samples` steps split into fixed blocks, one ChaCha stream per block.
///
/// Blocks execute in parallel and the per-block accumulators come back in
/// block order, so folding them sequentially is independent of the thread count.
pub fn run_blocks<A, I, F>(samples: u64, seed: u64, init: I, step: F) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &mut ChaCha8Rng, u64) -> Result<()> + Sync,
{
    let blocks = samples.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let mut acc = init();
            let start = b * BLOCK_SIZE;
            let end = (start + BLOCK_SIZE).min(samples);
            for idx in start..end {
                step(&mut acc, &mut rng, idx)?;
            }
            Ok(acc)
        })
        .collect()
}

/// [`run_blocks`] with a fresh standard Gaussian vector in `ℝ^dim` per step.
pub fn gaussian_blocks<A, I, F>(dim: usize, samples: u64, seed: u64, init: I, step: F) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &[f64], u64) -> Result<()> + Sync,
{
    let blocks = run_blocks(
        samples,
        seed,
        || (init(), vec![0.0; dim]),
        |(acc, buf), rng, idx| {
            fill_gaussian(rng, buf);
            step(acc, buf, idx)
        },
    )?;
    Ok(blocks.into_iter().map(|(a, _)| a).collect())
}

pub fn fill_gaussian(rng: &mut impl Rng, buf: &mut [f64]) {
    for v in buf.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Standard Gaussian matrix.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Gaussian measure of the set described by `membership`.
pub fn mc_measure<P>(membership: P, dim: usize, samples: u64, seed: u64) -> Result<MCEstimate>
where
    P: Fn(&[f64]) -> Result<bool> + Sync,
{
    if samples < 100 {
        return Err(Error::precondition(format!("need at least 100 samples, got {samples}")));
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let blocks = gaussian_blocks(
        dim,
        samples,
        seed,
        || 0u64,
        |hits, x, idx| {
            let inside = membership(x).map_err(|e| Error::Predicate { index: idx, source: Box::new(e) })?;
            *hits += inside as u64;
            Ok(())
        },
    )?;
    Ok(MCEstimate::from_counts(blocks.iter().sum(), samples))
}

const DENSITY: f64 = 0.398_942_280_401_432_7; // 1/sqrt(2π)

/// `((2e ρ R)/(√(2π) d))^d`, dominating `γ_d(ρ conv{±y_i})` when `max ‖y_i‖ ≤ R`.
pub fn crosspoly_measure_bound(rho: f64, radius: f64, d: usize) -> f64 {
    let base = 2.0 * E * rho * radius * DENSITY / d as f64;
    base.powi(d as i32)
}

/// `(2e h/(√(2π) d))^d` for a chain with small tail diagonals.
pub fn det_shrink_bound(h: f64, d: usize) -> f64 {
    crosspoly_measure_bound(1.0, h, d)
}

/// `(2π)^{−d/2} · volume`.
pub fn gauss_volume_bound(volume: f64, d: usize) -> f64 {
    volume * DENSITY.powi(d as i32)
}

/// `binom(ℓ+d, d) · (4e ρ (R + η√d)/(√(2π) d))^d`.
pub fn thickening_bound(rho: f64, radius: f64, eta: f64, d: usize, ell: usize) -> f64 {
    let df = d as f64;
    let base = 4.0 * E * rho * (radius + eta * df.sqrt()) * DENSITY / df;
    if base == 0.0 {
        return 0.0;
    }
    (ln_binom((ell + d) as f64, df) + df * base.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailForm {
    /// `P(‖G‖ ≥ √n + t) ≤ exp(−t²/2)`
    NormLipschitz,
    /// `P(‖G‖ ≥ 2√(n+t)) ≤ exp(−t)`
    NormSquareRoot,
    /// `P(X − n ≥ 2√(nt) + 2t) ≤ exp(−t)`
    ChiSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub form: TailForm,
    pub n: usize,
    pub t: f64,
    pub threshold: f64,
    pub estimate: MCEstimate,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub rows: Vec<TailRow>,
    pub passed: bool,
}

fn tail_report(rows: Vec<TailRow>) -> TailReport {
    let passed = rows.iter().all(|r| r.holds);
    TailReport { rows, passed }
}

fn tally<F>(samples: u64, seed: u64, slots: usize, draw: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<u64>) + Sync,
{
    let blocks = run_blocks(
        samples,
        seed,
        || vec![0u64; slots],
        |acc, rng, _| {
            draw(rng, acc);
            Ok(())
        },
    )?;
    let mut total = vec![0u64; slots];
    for b in blocks {
        for (t, v) in total.iter_mut().zip(b) {
            *t += v;
        }
    }
    Ok(total)
}

fn check_grid(t_grid: &[f64], samples: u64) -> Result<()> {
    if samples < 100 {
        return Err(Error::precondition(format!("need at least 100 samples, got {samples}")));
    }
    if t_grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("tail parameters must be finite and nonnegative"));
    }
    Ok(())
}

/// Both Gaussian norm tail forms for `G ~ N(0, I_n)`.
pub fn gaussian_norm_tail_check(n: usize, t_grid: &[f64], samples: u64, seed: u64) -> Result<TailReport> {
    if n == 0 || n > 100 {
        return Err(Error::precondition(format!("norm tail check needs 1 ≤ n ≤ 100, got {n}")));
    }
    check_grid(t_grid, samples)?;
    let nf = n as f64;
    let thresholds: Vec<(TailForm, f64, f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| {
            [
                (TailForm::NormLipschitz, t, nf.sqrt() + t, (-t * t / 2.0).exp()),
                (TailForm::NormSquareRoot, t, 2.0 * (nf + t).sqrt(), (-t).exp()),
            ]
        })
        .collect();
    let counts = tally(samples, seed, thresholds.len(), |rng, acc| {
        let mut s = 0.0;
        for _ in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            s += g * g;
        }
        let norm = s.sqrt();
        for (slot, th) in acc.iter_mut().zip(&thresholds) {
            *slot += (norm >= th.2) as u64;
        }
    })?;
    let rows = thresholds
        .iter()
        .zip(counts)
        .map(|(&(form, t, threshold, bound), hits)| {
            let estimate = MCEstimate::from_counts(hits, samples);
            TailRow { form, n, t, threshold, estimate, bound, holds: estimate.point <= bound + 3.0 * estimate.std_error() }
        })
        .collect();
    Ok(tail_report(rows))
}

/// `P(X − n ≥ 2√(nt) + 2t) ≤ e^{−t}` for `X ~ χ²_n`.
pub fn chi_square_tail_check(n: usize, t_grid: &[f64], samples: u64, seed: u64) -> Result<TailReport> {
    if n == 0 {
        return Err(Error::precondition("chi-square degrees of freedom must be positive"));
    }
    check_grid(t_grid, samples)?;
    let nf = n as f64;
    let chi = ChiSquared::new(nf).map_err(|e| Error::invalid(e.to_string()))?;
    let thresholds: Vec<f64> = t_grid.iter().map(|&t| nf + 2.0 * (nf * t).sqrt() + 2.0 * t).collect();
    let counts = tally(samples, seed, thresholds.len(), |rng, acc| {
        let x: f64 = chi.sample(rng);
        for (slot, th) in acc.iter_mut().zip(&thresholds) {
            *slot += (x >= *th) as u64;
        }
    })?;
    let rows = t_grid
        .iter()
        .zip(thresholds)
        .zip(counts)
        .map(|((&t, threshold), hits)| {
            let estimate = MCEstimate::from_counts(hits, samples);
            let bound = (-t).exp();
            TailRow {
                form: TailForm::ChiSquare,
                n,
                t,
                threshold,
                estimate,
                bound,
                holds: estimate.point <= bound + 3.0 * estimate.std_error(),
            }
        })
        .collect();
    Ok(tail_report(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub full: MCEstimate,
    pub projected: MCEstimate,
    /// Draws inside `S` whose projection fell outside `π_H S`.
    pub pointwise_violations: u64,
    pub holds: bool,
}

/// `γ_n(S) ≤ γ_H(π_H S)` with both sides evaluated on the same draws.
///
/// `in_projection` receives coordinates in the orthonormal basis `h` (columns).
pub fn projection_monotonicity_check<S, Q>(
    in_set: S,
    in_projection: Q,
    h: &DMatrix<f64>,
    samples: u64,
    seed: u64,
) -> Result<ProjectionReport>
where
    S: Fn(&[f64]) -> Result<bool> + Sync,
    Q: Fn(&[f64]) -> Result<bool> + Sync,
{
    check_orthonormal(h)?;
    if samples < 100 {
        return Err(Error::precondition(format!("need at least 100 samples, got {samples}")));
    }
    let dim = h.nrows();
    let blocks = gaussian_blocks(
        dim,
        samples,
        seed,
        || [0u64; 3],
        |acc, x, idx| {
            let wrap = |e| Error::Predicate { index: idx, source: Box::new(e) };
            let g = DVector::from_column_slice(x);
            let coords = h.tr_mul(&g);
            let a = in_set(x).map_err(wrap)?;
            let b = in_projection(coords.as_slice()).map_err(wrap)?;
            acc[0] += a as u64;
            acc[1] += b as u64;
            acc[2] += (a && !b) as u64;
            Ok(())
        },
    )?;
    let mut t = [0u64; 3];
    for b in blocks {
        for i in 0..3 {
            t[i] += b[i];
        }
    }
    let full = MCEstimate::from_counts(t[0], samples);
    let projected = MCEstimate::from_counts(t[1], samples);
    let sigma = (full.std_error().powi(2) + projected.std_error().powi(2)).sqrt();
    let holds = t[2] == 0 && full.point <= projected.point + 3.0 * sigma;
    Ok(ProjectionReport { full, projected, pointwise_violations: t[2], holds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub dim: usize,
    pub generators: usize,
    pub rho: f64,
    pub eta: f64,
    pub radius: f64,
    pub estimate: MCEstimate,
    pub bound: f64,
    /// `bound ≥ p̂ + 3σ`.
    pub holds: bool,
}

/// `γ_d(ρ conv{±y_i})` for `d` generators in `ℝ^d` against [`crosspoly_measure_bound`].
pub fn crosspoly_measure_check(poly: &CrossPolytope, rho: f64, samples: u64, seed: u64) -> Result<BoundCheck> {
    let d = poly.dim();
    if poly.len() != d {
        return Err(Error::precondition(format!("need exactly {d} generators, got {}", poly.len())));
    }
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("ρ must be at least 1, got {rho}")));
    }
    let oracle = HullOracle::new(&poly.clone().with_scale(poly.scale() * rho)?)?;
    let estimate = mc_measure(|g| oracle.contains_slice(g), d, samples, seed)?;
    let radius = poly.radius();
    let bound = crosspoly_measure_bound(rho, radius, d);
    Ok(BoundCheck {
        dim: d,
        generators: d,
        rho,
        eta: 0.0,
        radius,
        holds: bound >= estimate.upper_3sigma(),
        estimate,
        bound,
    })
}

/// `γ_d(ρ(P + ηB_2))` against [`thickening_bound`].
///
/// Membership first tries the base polytope and a support-function cut along
/// `y` before falling back to the hull distance.
pub fn thickening_check(poly: &CrossPolytope, rho: f64, eta: f64, samples: u64, seed: u64) -> Result<BoundCheck> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("ρ must be at least 1, got {rho}")));
    }
    let body = ThickenedPolytope::new(poly.clone(), eta)?;
    let oracle = HullOracle::new(poly)?;
    let d = poly.dim();
    let inside = |g: &[f64]| -> Result<bool> {
        let y = DVector::from_column_slice(g) / rho;
        if oracle.contains(&y)? {
            return Ok(true);
        }
        let norm = y.norm();
        if norm > poly.support(&(&y / norm)) + eta + 1e-12 {
            return Ok(false);
        }
        body.contains(&y)
    };
    let estimate = mc_measure(inside, d, samples, seed)?;
    let radius = poly.radius();
    let bound = thickening_bound(rho, radius, eta, d, poly.len());
    Ok(BoundCheck {
        dim: d,
        generators: poly.len(),
        rho,
        eta,
        radius,
        holds: bound >= estimate.upper_3sigma(),
        estimate,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetShrinkReport {
    pub n: usize,
    pub d: usize,
    pub h: f64,
    /// Gram–Schmidt diagonals of the generators in their given order.
    pub distances: Vec<f64>,
    pub estimate: MCEstimate,
    /// `(2π)^{−d/2} 2^d h^d / d!`, before Stirling.
    pub volume_bound: f64,
    /// `(2e h/(√(2π) d))^d`.
    pub bound: f64,
    pub holds: bool,
}

/// Random basis `x_1..x_n` of `ℝ^n` whose last `d` Gram–Schmidt diagonals lie in
/// `[h/2, h]`, built as `Q R` with `Q` orthogonal and `R` upper triangular.
pub fn small_tail_basis(n: usize, d: usize, h: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let q = gaussian_matrix(n, n, rng).qr().q();
    let mut r = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            r[(i, j)] = rng.sample::<f64, _>(StandardNormal) * 0.5;
        }
        r[(j, j)] = if j + d >= n { h * (0.5 + 0.5 * rng.random::<f64>()) } else { 0.5 + rng.random::<f64>() };
    }
    q * r
}

/// Gaussian measure of `conv{±x_i}` for a [`small_tail_basis`] against the
/// small-diagonal bound. Membership is an LU solve, so `n ≤ 10`.
pub fn det_shrink_check(n: usize, d: usize, h: f64, samples: u64, seed: u64) -> Result<DetShrinkReport> {
    if !(1..=n).contains(&d) || n > 10 {
        return Err(Error::precondition(format!("need 1 ≤ d ≤ n ≤ 10, got n = {n}, d = {d}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("h must be positive, got {h}")));
    }
    let x = small_tail_basis(n, d, h, &mut stream_rng(seed, u64::MAX));
    let order: Vec<usize> = (0..n).collect();
    let chain = crate::geometry::gram_schmidt_chain_ordered(&x, &order, crate::geometry::RankPolicy::default())?;
    if chain.distances[n - d..].iter().any(|&a| a > h * (1.0 + 1e-9)) {
        return Err(Error::Contract("constructed tail diagonals exceed h".into()));
    }
    let lu = x.clone().lu();
    let estimate = mc_measure(
        |g| {
            let c = lu.solve(&DVector::from_column_slice(g)).ok_or_else(|| Error::Numerical("singular basis".into()))?;
            Ok(c.lp_norm(1) <= 1.0)
        },
        n,
        samples,
        seed,
    )?;
    let volume_bound = gaussian_peak_density(d) * (2.0 * h).powi(d as i32) / (1..=d).map(|k| k as f64).product::<f64>();
    let bound = det_shrink_bound(h, d);
    let holds = estimate.point <= volume_bound + 3.0 * estimate.std_error() && volume_bound <= bound * (1.0 + 1e-12);
    Ok(DetShrinkReport { n, d, h, distances: chain.distances, estimate, volume_bound, bound, holds })
}

/// `γ_1([−a, a])`.
pub fn gaussian_interval_measure(a: f64) -> f64 {
    statrs::function::erf::erf(a / std::f64::consts::SQRT_2)
}

/// Standard Gaussian density in `ℝ^d` at the origin, `(2π)^{−d/2}`.
pub fn gaussian_peak_density(d: usize) -> f64 {
    (2.0 * PI).powf(-(d as f64) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cross_polytope_volume, random_subspace};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn measure_bounds_dominate() {
        let mut rng = stream_rng(5, 0);
        for d in 2..=4 {
            let p = CrossPolytope::new(gaussian_matrix(d, d, &mut rng)).unwrap();
            let c = crosspoly_measure_check(&p, 1.0, 20_000, d as u64).unwrap();
            assert!(c.holds, "{c:?}");
        }
        let p = CrossPolytope::new(gaussian_matrix(2, 3, &mut rng)).unwrap();
        for eta in [0.0, 0.1, 0.5] {
            let c = thickening_check(&p, 1.0, eta, 20_000, 9).unwrap();
            assert!(c.holds, "{c:?}");
        }
        // thickening only grows the measure
        let a = thickening_check(&p, 1.0, 0.0, 20_000, 1).unwrap();
        let b = thickening_check(&p, 1.0, 0.3, 20_000, 1).unwrap();
        assert!(a.estimate.hits <= b.estimate.hits);
    }

    #[test]
    fn det_shrink_examples() {
        for (n, d, h) in [(3, 1, 0.2), (4, 2, 0.5), (5, 3, 1.0), (2, 2, 0.3)] {
            let r = det_shrink_check(n, d, h, 20_000, 3).unwrap();
            assert!(r.holds, "{r:?}");
            assert!(r.distances[n - d..].iter().all(|&a| a <= h && a >= h / 2.0 - 1e-12));
        }
        assert!(det_shrink_check(3, 4, 0.1, 1000, 0).is_err());
    }

    #[test]
    fn clopper_pearson_reference_values() {
        // beta quantiles from tests/oracles/gaussian_reference.py
        let (lo, hi) = clopper_pearson(5, 100, 0.01);
        assert_relative_eq!(lo, 0.010_940_333_584_790_029, max_relative = 1e-9);
        assert_relative_eq!(hi, 0.135_144_682_535_623_5, max_relative = 1e-9);
        let (lo, hi) = clopper_pearson(0, 100, 0.01);
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 1.0 - 0.005f64.powf(0.01), max_relative = 1e-9);
    }

    #[test]
    fn estimate_invariants() {
        for (k, n) in [(0, 100), (3, 100), (100, 100), (57, 1000)] {
            let e = MCEstimate::from_counts(k, n);
            assert!(e.ci_low <= e.point && e.point <= e.ci_high);
            assert_eq!(e.point, k as f64 / n as f64);
        }
    }

    #[test]
    fn always_true_and_half_space() {
        let e = mc_measure(|_| Ok(true), 3, 1000, 1).unwrap();
        assert_eq!(e.point, 1.0);
        assert_eq!(e.ci_high, 1.0);
        let e = mc_measure(|x| Ok(x[0] <= 0.0), 3, 100_000, 2).unwrap();
        assert!(e.ci_low <= 0.5 && 0.5 <= e.ci_high);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(matches!(mc_measure(|_| Ok(true), 2, 99, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn predicate_errors_carry_index() {
        let err = mc_measure(|x| if x[0] > 2.5 { Err(Error::invalid("boom")) } else { Ok(true) }, 1, 10_000, 3)
            .unwrap_err();
        assert!(matches!(err, Error::Predicate { .. }));
    }

    #[test]
    fn determinism_across_workers() {
        let f = |x: &[f64]| Ok(x[0] + x[1] <= 0.3);
        let a = crate::rng::with_workers(1, || mc_measure(f, 2, 50_000, 9).unwrap());
        let b = crate::rng::with_workers(4, || mc_measure(f, 2, 50_000, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rotated_square_matches_quadrature() {
        // γ_2({|x|+|y| ≤ 1}) by quadrature, tests/oracles/gaussian_reference.py
        let reference = 0.270_920_122_803_396_4;
        let e = mc_measure(|x| Ok(x[0].abs() + x[1].abs() <= 1.0), 2, 1_000_000, 4).unwrap();
        assert!(e.ci_low <= reference && reference <= e.ci_high, "{e:?}");
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(crosspoly_measure_bound(1.0, 0.0, 3), 0.0);
        assert_relative_eq!(crosspoly_measure_bound(1.0, 1.0, 1), 2.0 * E / (2.0 * PI).sqrt(), epsilon = 1e-15);
        assert!(crosspoly_measure_bound(1.0, 1.0, 1) >= gaussian_interval_measure(1.0));
        assert_relative_eq!(gaussian_interval_measure(1.0), 0.682_689_492_137_085_9, epsilon = 1e-9);
        // no thickening and ℓ = d: binom(2d, d) times the ℓ = d, 2× crosspoly base
        let d = 3;
        let lhs = thickening_bound(1.5, 0.4, 0.0, d, d);
        let rhs = 20.0 * crosspoly_measure_bound(1.5, 0.8, d);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn thickening_bound_is_monotone() {
        let grid = [0.0, 0.1, 0.5, 1.0, 2.0];
        for d in 1..5 {
            for w in grid.windows(2) {
                let (a, b) = (w[0], w[1]);
                assert!(thickening_bound(1.0 + a, 0.3, 0.1, d, 4) <= thickening_bound(1.0 + b, 0.3, 0.1, d, 4));
                assert!(thickening_bound(1.0, a, 0.1, d, 4) <= thickening_bound(1.0, b, 0.1, d, 4));
                assert!(thickening_bound(1.0, 0.3, a, d, 4) <= thickening_bound(1.0, 0.3, b, d, 4));
            }
        }
    }

    #[test]
    fn tails_small_config() {
        let r = gaussian_norm_tail_check(10, &[0.0, 2.0], 200_000, 1).unwrap();
        assert!(r.passed);
        let second_at_zero = r.rows.iter().find(|x| x.form == TailForm::NormSquareRoot && x.t == 0.0).unwrap();
        assert_eq!(second_at_zero.bound, 1.0);
        let r = chi_square_tail_check(10, &[0.0, 1.0], 200_000, 2).unwrap();
        assert!(r.passed);
        assert_eq!(r.rows[0].bound, 1.0);
    }

    #[test]
    fn projection_of_ball_and_cylinder() {
        let h = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = projection_monotonicity_check(
            |x| Ok(x.iter().map(|v| v * v).sum::<f64>() <= 1.0),
            |c| Ok(c[0] * c[0] + c[1] * c[1] <= 1.0),
            &h,
            100_000,
            5,
        )
        .unwrap();
        assert!(r.holds);
        assert!(r.full.point < r.projected.point);
        // cylinder over the disk: identical events
        let r = projection_monotonicity_check(
            |x| Ok(x[0] * x[0] + x[1] * x[1] <= 1.0),
            |c| Ok(c[0] * c[0] + c[1] * c[1] <= 1.0),
            &h,
            100_000,
            6,
        )
        .unwrap();
        assert_eq!(r.full, r.projected);
    }

    #[test]
    fn volume_bound_dominates_polytope_measure() {
        let mut rng = stream_rng(77, 0);
        for d in 2..=4 {
            let y = gaussian_matrix(d, d, &mut rng) * 0.6;
            let p = CrossPolytope::new(y.clone()).unwrap();
            let oracle = HullOracle::new(&p).unwrap();
            let e = mc_measure(|x| oracle.contains_slice(x), d, 100_000, d as u64).unwrap();
            let bound = gauss_volume_bound(cross_polytope_volume(&y).unwrap(), d);
            assert!(e.point <= bound + 3.0 * e.std_error());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn coupled_inclusion_is_exact(seed in 0u64..1000, a in 0.1f64..1.0, b in 0.0f64..1.0) {
            let small = mc_measure(|x| Ok(x[0].abs() + x[1].abs() <= a), 2, 5_000, seed).unwrap();
            let large = mc_measure(|x| Ok(x[0].abs() + x[1].abs() <= a + b), 2, 5_000, seed).unwrap();
            prop_assert!(small.hits <= large.hits);
        }

        #[test]
        fn projections_of_polytopes_are_monotone(seed in 0u64..1000) {
            let mut rng = stream_rng(seed, 3);
            let p = CrossPolytope::new(gaussian_matrix(3, 4, &mut rng)).unwrap();
            let h = random_subspace(3, 2, &mut rng).unwrap();
            let proj = crate::geometry::project_polytope(&p, &h).unwrap();
            let full = HullOracle::new(&p).unwrap();
            let flat = HullOracle::new(&proj).unwrap();
            let r = projection_monotonicity_check(
                |x| full.contains_slice(x),
                |c| flat.contains_slice(c),
                &h,
                2_000,
                seed,
            ).unwrap();
            prop_assert_eq!(r.pointwise_violations, 0);
        }
    }
}
