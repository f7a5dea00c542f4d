//! Random suppression of K-generators, block-tail Gram–Schmidt experiments
//! and the resulting exponential Gaussian-measure bound.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

use crate::combinat::{binom_u128, subsets};
use crate::error::{Error, Result};
use crate::gauss_mc::{gaussian_blocks, gaussian_matrix, mc_measure, MCEstimate};
use crate::geometry::{gram_schmidt_chain_ordered, CrossPolytope, RankPolicy};
use crate::rng::{derive_seed, stream_rng};
use crate::sparse_l1::HullOracle;

/// `log 2 / 8`.
pub const C_DECAY: f64 = std::f64::consts::LN_2 / 8.0;

/// The scale constant that makes the measure lemma hold with the explicit
/// density constant `2e/√(2π)`: `1/(128 · 2e/√(2π))`.
pub fn explicit_c_suppr() -> f64 {
    (2.0 * PI).sqrt() / (256.0 * E)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressedSpec {
    pub p: usize,
    pub q: usize,
    pub j: Vec<usize>,
    pub factor: f64,
}

impl SuppressedSpec {
    pub fn new(p: usize, q: usize, j: &[usize], r: usize) -> Result<Self> {
        if j.len() != r {
            return Err(Error::invalid(format!("|J| = {} but r = {r}", j.len())));
        }
        if r == 0 || r > p {
            return Err(Error::invalid(format!("need 1 ≤ r ≤ p, got r={r}, p={p}")));
        }
        let mut sorted = j.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != r || sorted.last().is_some_and(|&x| x >= p) {
            return Err(Error::invalid("J must be a set of distinct indices below p"));
        }
        Ok(SuppressedSpec { p, q, j: sorted, factor: r as f64 / p as f64 })
    }
}

/// Scales the K-generators `y_i`, `i ∈ J`, by `r/p`.
///
/// The first `p` generators of `poly` are the K-generators, the rest are the U-generators.
pub fn suppress(poly: &CrossPolytope, p: usize, j: &[usize], r: usize) -> Result<CrossPolytope> {
    if p > poly.len() {
        return Err(Error::invalid(format!("p = {p} exceeds the {} generators", poly.len())));
    }
    let spec = SuppressedSpec::new(p, poly.len() - p, j, r)?;
    let mut g = poly.generators().clone();
    for &i in &spec.j {
        let mut col = g.column_mut(i);
        col *= spec.factor;
    }
    CrossPolytope::new(g)?.with_scale(poly.scale())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionReport {
    pub lhs: MCEstimate,
    pub rhs: f64,
    pub subsets: usize,
    /// Standard error of the paired per-sample difference.
    pub sigma: f64,
    /// Samples with `G ∈ tP` but `G ∈ 4tP_J` for fewer than half of the `J`.
    pub pointwise_violations: u64,
    pub degenerate: bool,
    pub holds: bool,
}

/// `γ(tP) ≤ (2/binom(p,r)) Σ_J γ(4tP_J)` on shared Gaussian draws, all `J` enumerated.
pub fn verify_suppression_inequality(
    poly: &CrossPolytope,
    p: usize,
    r: usize,
    t: f64,
    samples: u64,
    seed: u64,
) -> Result<SuppressionReport> {
    let d = poly.dim();
    if d > 10 {
        return Err(Error::precondition(format!("dimension {d} exceeds 10")));
    }
    if poly.len() != d {
        return Err(Error::precondition("the suppression inequality needs exactly dim generators"));
    }
    if r == 0 || r > p || p > d {
        return Err(Error::precondition(format!("need 1 ≤ r ≤ p ≤ dim, got r={r}, p={p}")));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t must be nonnegative"));
    }
    let count = binom_u128(p as u64, r as u64).unwrap_or(u128::MAX);
    if count > 10_000 {
        return Err(Error::precondition(format!("binom(p, r) = {count} exceeds 10⁴")));
    }
    let js = subsets(p, r);
    let x = poly.scaled_generators();
    if RankPolicy::default().rank(&x) < d || t == 0.0 {
        // a flat body has Gaussian measure zero
        let lhs = MCEstimate::from_counts(0, samples.max(1));
        return Ok(SuppressionReport {
            lhs,
            rhs: 0.0,
            subsets: js.len(),
            sigma: 0.0,
            pointwise_violations: 0,
            degenerate: true,
            holds: true,
        });
    }
    let xinv = x
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("generator matrix is singular".into()))?;
    let weight = 2.0 / js.len() as f64;
    let boost = p as f64 / r as f64;
    #[derive(Default)]
    struct Acc {
        lhs: u64,
        rhs_hits: u64,
        diff_sum: f64,
        diff_sq: f64,
        violations: u64,
    }
    let blocks = gaussian_blocks(d, samples, seed, Acc::default, |acc, g, _| {
        let mut abs = [0.0f64; 10];
        for i in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += xinv[(i, k)] * g[k];
            }
            abs[i] = s.abs();
        }
        let total: f64 = abs[..d].iter().sum();
        let inside = total <= t;
        let mut hits = 0u64;
        for j in &js {
            let boosted: f64 = j.iter().map(|&i| abs[i]).sum();
            if total + (boost - 1.0) * boosted <= 4.0 * t {
                hits += 1;
            }
        }
        let diff = inside as u8 as f64 - weight * hits as f64;
        acc.lhs += inside as u64;
        acc.rhs_hits += hits;
        acc.diff_sum += diff;
        acc.diff_sq += diff * diff;
        acc.violations += (diff > 1e-12) as u64;
        Ok(())
    })?;
    let mut tot = Acc::default();
    for b in blocks {
        tot.lhs += b.lhs;
        tot.rhs_hits += b.rhs_hits;
        tot.diff_sum += b.diff_sum;
        tot.diff_sq += b.diff_sq;
        tot.violations += b.violations;
    }
    let n = samples as f64;
    let lhs = MCEstimate::from_counts(tot.lhs, samples);
    let rhs = weight * tot.rhs_hits as f64 / n;
    let mean = tot.diff_sum / n;
    let var = (tot.diff_sq / n - mean * mean).max(0.0);
    let sigma = (var / n).sqrt();
    Ok(SuppressionReport {
        lhs,
        rhs,
        subsets: js.len(),
        sigma,
        pointwise_violations: tot.violations,
        degenerate: false,
        holds: lhs.point <= rhs + 3.0 * sigma,
    })
}

/// Lists `[p] ∖ J` ascending, then `J` ascending.
pub fn block_order(p: usize, j: &[usize]) -> Vec<usize> {
    let mut inj = vec![false; p];
    for &i in j {
        inj[i] = true;
    }
    let mut order: Vec<usize> = (0..p).filter(|&i| !inj[i]).collect();
    let mut tail: Vec<usize> = j.to_vec();
    tail.sort_unstable();
    order.extend(tail);
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTailConfig {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub tau: f64,
    /// Constant `c` in the failure bound `exp(−c τ² N r)`.
    pub c: f64,
}

impl BlockTailConfig {
    pub fn new(n: usize, p: usize, r: usize, tau: f64) -> Self {
        BlockTailConfig { n, p, r, tau, c: 1.0 / 16.0 }
    }

    /// `N = n − p + r`.
    pub fn n_eff(&self) -> usize {
        self.n - self.p + self.r
    }

    pub fn threshold(&self) -> f64 {
        self.tau * (self.n_eff() as f64).sqrt()
    }

    pub fn failure_bound(&self) -> f64 {
        (-self.c * self.tau * self.tau * (self.n_eff() * self.r) as f64).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTailReport {
    pub trial: usize,
    pub n_eff: usize,
    pub tau: f64,
    pub threshold: f64,
    pub good_count: usize,
    /// The last `r` span-distances in block order.
    pub distances: Vec<f64>,
    pub event: bool,
}

fn check_block_tail(cfg: &BlockTailConfig, b: &DMatrix<f64>, j: &[usize]) -> Result<()> {
    let BlockTailConfig { n, p, r, tau, .. } = *cfg;
    if !(2 * p >= n && p <= n) {
        return Err(Error::precondition(format!("need n/2 ≤ p ≤ n, got n={n}, p={p}")));
    }
    if !(r >= 1 && 2 * r <= p) {
        return Err(Error::precondition(format!("need 1 ≤ r ≤ p/2, got r={r}, p={p}")));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    if b.ncols() != p {
        return Err(Error::DimensionMismatch { expected: p, found: b.ncols() });
    }
    for c in 0..p {
        if b.column(c).norm() > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("column {c} of B has norm above 1")));
        }
    }
    if RankPolicy::default().rank(b) < p {
        return Err(Error::invalid("B must have full column rank p"));
    }
    SuppressedSpec::new(p, 0, j, r)?;
    Ok(())
}

/// One report per trial: `Γ` is `n × m` Gaussian, `H = ΓB`, distances in block order.
pub fn block_tail_experiment(
    cfg: &BlockTailConfig,
    b: &DMatrix<f64>,
    j: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<BlockTailReport>> {
    check_block_tail(cfg, b, j)?;
    let order = block_order(cfg.p, j);
    let threshold = cfg.threshold();
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(derive_seed(seed, trial as u64), 0);
            let gamma = gaussian_matrix(cfg.n, b.nrows(), &mut rng);
            let h = &gamma * b;
            let chain = gram_schmidt_chain_ordered(&h, &order, RankPolicy::default())?;
            let distances = chain.distances[cfg.p - cfg.r..].to_vec();
            let good_count = distances.iter().filter(|&&d| d <= threshold).count();
            Ok(BlockTailReport {
                trial,
                n_eff: cfg.n_eff(),
                tau: cfg.tau,
                threshold,
                good_count,
                event: 2 * good_count >= cfg.r,
                distances,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTailSummary {
    pub trials: usize,
    pub frequency: MCEstimate,
    pub failure: MCEstimate,
    pub c: f64,
    pub failure_bound: f64,
    pub bound_holds: bool,
}

pub fn summarize_block_tail(cfg: &BlockTailConfig, reports: &[BlockTailReport]) -> BlockTailSummary {
    let trials = reports.len().max(1) as u64;
    let events = reports.iter().filter(|r| r.event).count() as u64;
    let frequency = MCEstimate::from_counts(events, trials);
    let failure = MCEstimate::from_counts(trials - events, trials);
    let failure_bound = cfg.failure_bound();
    BlockTailSummary {
        trials: reports.len(),
        frequency,
        failure,
        c: cfg.c,
        failure_bound,
        bound_holds: failure.point <= failure_bound + 3.0 * failure.std_error(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `min_τ −ln(upper CI of failure)/(τ² N r)` over grid points with failures.
    pub c_hat: f64,
    pub rows: Vec<(f64, MCEstimate)>,
}

/// Fits the failure constant on a grid of small `τ`, where failures are observable.
pub fn calibrate_block_tail_constant(
    n: usize,
    p: usize,
    r: usize,
    b: &DMatrix<f64>,
    j: &[usize],
    tau_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Calibration> {
    let mut c_hat = f64::INFINITY;
    let mut rows = Vec::new();
    for (k, &tau) in tau_grid.iter().enumerate() {
        let cfg = BlockTailConfig::new(n, p, r, tau);
        let reports = block_tail_experiment(&cfg, b, j, trials, derive_seed(seed, k as u64))?;
        let s = summarize_block_tail(&cfg, &reports);
        if s.failure.hits > 0 && s.failure.ci_high < 1.0 {
            let c = -s.failure.ci_high.ln() / (tau * tau * (cfg.n_eff() * r) as f64);
            c_hat = c_hat.min(c);
        }
        rows.push((tau, s.failure));
    }
    if !c_hat.is_finite() {
        return Err(Error::Numerical("no grid point produced failures; extend the τ grid downward".into()));
    }
    Ok(Calibration { c_hat, rows })
}

/// Proof that every `r`-subset `J` of the K-generators has at least `r/2`
/// of its block-order tail distances below `C⋆√r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedGsHypothesis {
    p: usize,
    r: usize,
    c_star: f64,
    generators: DMatrix<f64>,
    pub worst_good_count: usize,
}

impl VerifiedGsHypothesis {
    pub fn verify(poly: &CrossPolytope, p: usize, r: usize, c_star: f64) -> Result<Self> {
        if r == 0 || r > p || p > poly.len() {
            return Err(Error::precondition(format!("need 1 ≤ r ≤ p ≤ ℓ, got r={r}, p={p}")));
        }
        let count = binom_u128(p as u64, r as u64).unwrap_or(u128::MAX);
        if count > 100_000 {
            return Err(Error::precondition(format!("binom(p, r) = {count} is too many subsets to enumerate")));
        }
        let g = poly.scaled_generators();
        let y = g.columns(0, p).into_owned();
        let bound = c_star * (r as f64).sqrt();
        let mut worst = usize::MAX;
        for j in subsets(p, r) {
            let chain = gram_schmidt_chain_ordered(&y, &block_order(p, &j), RankPolicy::default())?;
            let good = chain.distances[p - r..].iter().filter(|&&d| d <= bound).count();
            worst = worst.min(good);
            if 2 * good < r {
                return Err(Error::Contract(format!(
                    "block-order hypothesis fails for J = {j:?}: {good} of {r} tail distances ≤ {bound}"
                )));
            }
        }
        Ok(VerifiedGsHypothesis { p, r, c_star, generators: g, worst_good_count: worst })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureBoundConfig {
    pub rho: f64,
    pub r: usize,
    pub c_star: f64,
    pub c_suppr: f64,
    pub c_decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureBound {
    pub bound: f64,
    pub applicable: bool,
    /// Monte Carlo estimate of `γ(4ρP)` when requested.
    pub mc: Option<MCEstimate>,
    pub mc_consistent: Option<bool>,
}

/// `γ(4ρP) ≤ 2 exp(−c_decay r)` whenever `4ρC⋆√r ≤ c_suppr n`.
pub fn suppression_measure_bound(
    poly: &CrossPolytope,
    p: usize,
    hypothesis: &VerifiedGsHypothesis,
    cfg: &MeasureBoundConfig,
    mc_samples: Option<u64>,
    seed: u64,
) -> Result<MeasureBound> {
    let n = poly.dim();
    if !(8 <= cfg.r && cfg.r <= p) {
        return Err(Error::precondition(format!("need 8 ≤ r ≤ p, got r={}, p={p}", cfg.r)));
    }
    if 2 * p < n || poly.len() != n {
        return Err(Error::precondition("need p ≥ n/2 and exactly n generators"));
    }
    if hypothesis.p != p
        || hypothesis.r != cfg.r
        || hypothesis.c_star != cfg.c_star
        || hypothesis.generators != poly.scaled_generators()
    {
        return Err(Error::Contract("the verified hypothesis belongs to a different polytope or parameters".into()));
    }
    let applicable = 4.0 * cfg.rho * cfg.c_star * (cfg.r as f64).sqrt() <= cfg.c_suppr * n as f64;
    let bound = 2.0 * (-cfg.c_decay * cfg.r as f64).exp();
    let (mc, mc_consistent) = match mc_samples {
        Some(samples) if n <= 8 => {
            let scaled = poly.clone().with_scale(4.0 * cfg.rho * poly.scale())?;
            let oracle = HullOracle::new(&scaled)?;
            let est = mc_measure(|x| oracle.contains_slice(x), n, samples, seed)?;
            let ok = !applicable || est.point <= bound + 3.0 * est.std_error();
            (Some(est), Some(ok))
        }
        _ => (None, None),
    };
    Ok(MeasureBound { bound, applicable, mc, mc_consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn random_poly(d: usize, seed: u64) -> CrossPolytope {
        let mut rng = stream_rng(seed, 0);
        CrossPolytope::new(gaussian_matrix(d, d, &mut rng)).unwrap()
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(4, 2)[0], vec![0, 1]);
        assert_eq!(subsets(4, 2)[5], vec![2, 3]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(5, 1).len(), 5);
        assert_eq!(subsets(10, 4).len(), 210);
    }

    #[test]
    fn suppress_examples() {
        let p = random_poly(3, 1);
        assert_eq!(suppress(&p, 3, &[0, 1, 2], 3).unwrap(), p);
        let two = CrossPolytope::from_vectors(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = suppress(&two, 2, &[0], 1).unwrap();
        assert_eq!(s.generator(0).as_slice(), &[1.0, 0.0]);
        assert_eq!(s.generator(1).as_slice(), &[0.0, 1.0]);
        assert!(suppress(&two, 2, &[0, 1], 1).is_err());
    }

    #[test]
    fn suppressed_body_is_contained() {
        let p = random_poly(4, 2);
        let s = suppress(&p, 3, &[0, 2], 2).unwrap();
        for j in 0..4 {
            assert!(p.contains(&s.generator(j)).unwrap());
        }
        let a = mc_measure(|x| HullOracle::new(&s)?.contains_slice(x), 4, 20_000, 3).unwrap();
        let b = mc_measure(|x| HullOracle::new(&p)?.contains_slice(x), 4, 20_000, 3).unwrap();
        assert!(a.hits <= b.hits);
    }

    #[test]
    fn inequality_small_configs() {
        let p = random_poly(4, 5);
        let full = verify_suppression_inequality(&p, 2, 2, 1.0, 50_000, 1).unwrap();
        assert!(full.holds && full.pointwise_violations == 0);
        assert!(full.rhs >= full.lhs.point);
        let r = verify_suppression_inequality(&p, 2, 1, 1.0, 50_000, 2).unwrap();
        assert!(r.holds && r.pointwise_violations == 0);
        let tiny = verify_suppression_inequality(&p, 2, 1, 1e-9, 10_000, 2).unwrap();
        assert_eq!(tiny.lhs.hits, 0);
        assert!(tiny.rhs < 1e-3);
    }

    #[test]
    fn inequality_order_invariant() {
        let p = random_poly(4, 6);
        // swap the two U-generators and the two K-generators
        let q = p.select(&[1, 0, 3, 2]).unwrap();
        let a = verify_suppression_inequality(&p, 2, 1, 1.5, 20_000, 9).unwrap();
        let b = verify_suppression_inequality(&q, 2, 1, 1.5, 20_000, 9).unwrap();
        assert_eq!(a.lhs, b.lhs);
        assert_relative_eq!(a.rhs, b.rhs, epsilon = 1e-15);
    }

    #[test]
    fn flat_polytope_short_circuits() {
        let flat = CrossPolytope::from_vectors(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let r = verify_suppression_inequality(&flat, 1, 1, 1.0, 1000, 0).unwrap();
        assert!(r.degenerate && r.holds);
    }

    #[test]
    fn block_order_lists_complement_first() {
        assert_eq!(block_order(5, &[3, 1]), vec![0, 2, 4, 1, 3]);
    }

    #[test]
    fn block_tail_trivial_and_orthonormal() {
        let cfg = BlockTailConfig::new(2, 2, 1, 10.0);
        let reports = block_tail_experiment(&cfg, &DMatrix::identity(2, 2), &[1], 200, 1).unwrap();
        assert!(reports.iter().all(|r| r.event));
        let cfg = BlockTailConfig::new(8, 8, 2, 4.0);
        let reports = block_tail_experiment(&cfg, &DMatrix::identity(8, 8), &[2, 5], 500, 2).unwrap();
        let s = summarize_block_tail(&cfg, &reports);
        assert!(s.frequency.point >= 0.999);
        assert!(s.bound_holds);
    }

    #[test]
    fn block_tail_rejects_bad_inputs() {
        let cfg = BlockTailConfig::new(4, 4, 2, 4.0);
        let mut b = DMatrix::identity(6, 4);
        b[(0, 0)] = 2.0;
        assert!(block_tail_experiment(&cfg, &b, &[0, 1], 1, 0).is_err());
        let mut flat = DMatrix::zeros(6, 4);
        for i in 0..4 {
            flat[(0, i)] = 0.5;
        }
        assert!(block_tail_experiment(&cfg, &flat, &[0, 1], 1, 0).is_err());
        let cfg = BlockTailConfig::new(4, 4, 3, 4.0);
        assert!(block_tail_experiment(&cfg, &DMatrix::identity(4, 4), &[0, 1, 2], 1, 0).is_err());
    }

    #[test]
    fn calibration_exceeds_default_constant() {
        let cal = calibrate_block_tail_constant(8, 8, 2, &DMatrix::identity(8, 8), &[6, 7], &[0.5, 1.0], 2000, 4)
            .unwrap();
        assert!(cal.c_hat >= 1.0 / 16.0, "{cal:?}");
    }

    #[test]
    fn complement_permutation_leaves_tail_unchanged() {
        let mut rng = stream_rng(12, 0);
        let b = crate::maurey::random_unit_points(10, 6, &mut rng);
        let cfg = BlockTailConfig::new(6, 6, 2, 3.0);
        let base = block_tail_experiment(&cfg, &b, &[1, 4], 20, 5).unwrap();
        // swap columns 0 and 5 (both outside J): the tail block sees the same span
        let mut perm = b.clone();
        perm.swap_columns(0, 5);
        let swapped = block_tail_experiment(&cfg, &perm, &[1, 4], 20, 5).unwrap();
        for (x, y) in base.iter().zip(&swapped) {
            for (a, b) in x.distances.iter().zip(&y.distances) {
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn distances_factor_through_whitened_columns() {
        // H = ΓB = (ΓQ)R, so dist(H_i, span) = R_ii · dist(x_i, span) ≤ dist(x_i, span)
        let mut rng = stream_rng(13, 0);
        let b = crate::maurey::random_unit_points(9, 5, &mut rng);
        let gamma = gaussian_matrix(6, 9, &mut rng);
        let qr = b.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        let order: Vec<usize> = (0..5).collect();
        let h = gram_schmidt_chain_ordered(&(&gamma * &b), &order, RankPolicy::default()).unwrap();
        let x = gram_schmidt_chain_ordered(&(&gamma * &q), &order, RankPolicy::default()).unwrap();
        for i in 0..5 {
            assert!(h.distances[i] <= x.distances[i] * (1.0 + 1e-10));
            assert_relative_eq!(h.distances[i], r[(i, i)].abs() * x.distances[i], max_relative = 1e-9);
        }
    }

    #[test]
    fn measure_bound_gates() {
        let poly = CrossPolytope::new(DMatrix::identity(8, 8) * 1e-4).unwrap();
        let hyp = VerifiedGsHypothesis::verify(&poly, 8, 8, 1e-3).unwrap();
        let cfg = MeasureBoundConfig { rho: 1e6, r: 8, c_star: 1e-3, c_suppr: 1.0, c_decay: C_DECAY };
        let b = suppression_measure_bound(&poly, 8, &hyp, &cfg, None, 0).unwrap();
        assert!(!b.applicable);
        assert_relative_eq!(b.bound, 2.0 * (-C_DECAY * 8.0).exp());
        let cfg = MeasureBoundConfig { rho: 1.0, c_suppr: explicit_c_suppr(), ..cfg };
        let b = suppression_measure_bound(&poly, 8, &hyp, &cfg, Some(10_000), 1).unwrap();
        assert!(b.applicable);
        assert_eq!(b.mc_consistent, Some(true));
        let six = CrossPolytope::new(DMatrix::identity(6, 6)).unwrap();
        let hyp6 = VerifiedGsHypothesis::verify(&six, 4, 2, 10.0).unwrap();
        let cfg6 = MeasureBoundConfig { r: 8, ..cfg };
        assert!(matches!(suppression_measure_bound(&six, 4, &hyp6, &cfg6, None, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn measure_bound_rejects_foreign_hypothesis() {
        let a = CrossPolytope::new(DMatrix::identity(8, 8) * 1e-4).unwrap();
        let b = CrossPolytope::new(DMatrix::identity(8, 8) * 2e-4).unwrap();
        let hyp = VerifiedGsHypothesis::verify(&a, 8, 8, 1e-3).unwrap();
        let cfg = MeasureBoundConfig { rho: 1.0, r: 8, c_star: 1e-3, c_suppr: 1.0, c_decay: C_DECAY };
        assert!(matches!(suppression_measure_bound(&b, 8, &hyp, &cfg, None, 0), Err(Error::Contract(_))));
        assert!(matches!(VerifiedGsHypothesis::verify(&b, 8, 8, 1e-5), Err(Error::Contract(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn suppression_keeps_generators_inside(seed in 0u64..10_000) {
            let p = random_poly(4, seed);
            let s = suppress(&p, 3, &[1, 2], 2).unwrap();
            let oracle = HullOracle::new(&p).unwrap();
            for j in 0..4 {
                prop_assert!(oracle.contains(&s.generator(j)).unwrap());
            }
            let zero = DVector::zeros(4);
            prop_assert!(oracle.contains(&zero).unwrap());
        }
    }
}
