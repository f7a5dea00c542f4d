//! Empirical (Maurey) sparsification of points in a convex hull.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_to_hull, CrossPolytope, HullDistanceOptions};
use crate::rng::{derive_seed, stream_rng};
use crate::sparse_l1::random_l1_point;

pub const DEFAULT_RETRY_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaureyResult {
    /// Indices into the point list, ascending.
    pub subset: Vec<usize>,
    /// Coefficients aligned with `subset`; their ℓ1 norm is at most 1.
    pub coefficients: Vec<f64>,
    pub point: Vec<f64>,
    pub achieved_distance: f64,
    pub attempts: usize,
}

/// One empirical average of `t` signed atoms drawn with `P(±x_i) = |a_i|`.
///
/// Returns the averaged point and the signed multiplicity of each index.
pub fn maurey_draw(points: &DMatrix<f64>, a: &[f64], t: usize, rng: &mut impl Rng) -> (DVector<f64>, Vec<(usize, i64)>) {
    let mut cumulative = Vec::with_capacity(a.len());
    let mut acc = 0.0;
    for v in a {
        acc += v.abs();
        cumulative.push(acc);
    }
    let total = acc.max(1.0);
    let mut counts = vec![0i64; a.len()];
    for _ in 0..t {
        let u = rng.random::<f64>() * total;
        let i = cumulative.partition_point(|&c| c <= u);
        if i < a.len() {
            counts[i] += if a[i] >= 0.0 { 1 } else { -1 };
        }
    }
    let mut z = DVector::zeros(points.nrows());
    let mut used = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        if c != 0 {
            z.axpy(c as f64 / t as f64, &points.column(i), 1.0);
            used.push((i, c));
        }
    }
    (z, used)
}

fn validate(points: &DMatrix<f64>, a: &[f64], radius: f64, t: usize) -> Result<()> {
    if points.ncols() != a.len() {
        return Err(Error::DimensionMismatch { expected: points.ncols(), found: a.len() });
    }
    if points.ncols() == 0 {
        return Err(Error::invalid("need at least one point"));
    }
    if t == 0 {
        return Err(Error::precondition("t must be positive"));
    }
    let l1: f64 = a.iter().map(|v| v.abs()).sum();
    if l1 > 1.0 + 1e-12 {
        return Err(Error::precondition(format!("coefficient ℓ1 norm {l1} exceeds 1")));
    }
    for j in 0..points.ncols() {
        let n = points.column(j).norm();
        if n > radius * (1.0 + 1e-12) {
            return Err(Error::precondition(format!("point {j} has norm {n} > L = {radius}")));
        }
    }
    Ok(())
}

/// Las Vegas Maurey: redraw until `‖z − y‖ ≤ slack · L/√t` or the budget runs out.
pub fn maurey_sparsify(
    points: &DMatrix<f64>,
    a: &[f64],
    radius: f64,
    t: usize,
    slack: f64,
    seed: u64,
    retry_budget: usize,
) -> Result<MaureyResult> {
    validate(points, a, radius, t)?;
    let y = points * DVector::from_column_slice(a);
    let threshold = slack * radius / (t as f64).sqrt();
    let nnz: Vec<usize> = (0..a.len()).filter(|&i| a[i] != 0.0).collect();
    if nnz.len() <= t {
        // the representation itself is already t-sparse
        let subset = if nnz.is_empty() { vec![0] } else { nnz };
        let coefficients = subset.iter().map(|&i| a[i]).collect();
        return Ok(MaureyResult {
            subset,
            coefficients,
            point: y.as_slice().to_vec(),
            achieved_distance: 0.0,
            attempts: 0,
        });
    }
    let mut rng: ChaCha8Rng = stream_rng(seed, 0);
    let mut best: Option<f64> = None;
    for attempt in 1..=retry_budget {
        let (z, used) = maurey_draw(points, a, t, &mut rng);
        let d = (&z - &y).norm();
        if d <= threshold {
            let (subset, coefficients) = if used.is_empty() {
                (vec![0], vec![0.0])
            } else {
                used.iter().map(|&(i, c)| (i, c as f64 / t as f64)).unzip()
            };
            return Ok(MaureyResult {
                subset,
                coefficients,
                point: z.as_slice().to_vec(),
                achieved_distance: d,
                attempts: attempt,
            });
        }
        if best.is_none_or(|b| d < b) {
            best = Some(d);
        }
    }
    Err(Error::RetriesExhausted {
        attempts: retry_budget,
        best_distance: best.unwrap_or(f64::INFINITY),
        threshold,
    })
}

/// `t = ⌈k/Λ⌉`, `r₀ = L/√t`.
pub fn maurey_parameters(k: usize, lambda: f64, radius: f64) -> Result<(usize, f64)> {
    if k == 0 {
        return Err(Error::precondition("k must be positive"));
    }
    if !(lambda >= 1.0) {
        return Err(Error::precondition(format!("Λ must be at least 1, got {lambda}")));
    }
    let t = ((k as f64) / lambda).ceil().max(1.0) as usize;
    Ok((t, radius / (t as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionTrial {
    pub index_set: Vec<usize>,
    pub subset: Vec<usize>,
    pub distance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionReport {
    pub trials: usize,
    pub failures: usize,
    pub threshold: f64,
    pub max_distance: f64,
    pub passed: bool,
}

/// For random `I` (`|I| = k`) and `y ∈ Q_I`, finds `S ⊂ I` with `|S| = t` and
/// `dist(y, Q_S) ≤ slack · L/√t`, checked independently by Frank–Wolfe.
pub fn union_inclusion_check(
    points: &DMatrix<f64>,
    radius: f64,
    k: usize,
    t: usize,
    trials: usize,
    slack: f64,
    seed: u64,
) -> Result<UnionReport> {
    let n = points.ncols();
    if !(1 <= t && t <= k && k <= n) {
        return Err(Error::precondition(format!("need 1 ≤ t ≤ k ≤ n, got t={t}, k={k}, n={n}")));
    }
    let threshold = slack * radius / (t as f64).sqrt();
    let results: Vec<Result<UnionTrial>> = (0..trials)
        .into_par_iter()
        .map(|trial| union_trial(points, radius, k, t, slack, derive_seed(seed, trial as u64), threshold))
        .collect();
    let mut failures = 0;
    let mut max_distance = 0.0f64;
    for r in results {
        let r = r?;
        failures += (!r.ok) as usize;
        max_distance = max_distance.max(r.distance);
    }
    Ok(UnionReport { trials, failures, threshold, max_distance, passed: failures == 0 })
}

fn union_trial(
    points: &DMatrix<f64>,
    radius: f64,
    k: usize,
    t: usize,
    slack: f64,
    seed: u64,
    threshold: f64,
) -> Result<UnionTrial> {
    let mut rng = stream_rng(seed, 0);
    let mut index_set = rand::seq::index::sample(&mut rng, points.ncols(), k).into_vec();
    index_set.sort_unstable();
    let a = random_l1_point(k, &mut rng);
    let local = points.select_columns(&index_set);
    let y = &local * &a;
    let local_subset = match maurey_sparsify(&local, a.as_slice(), radius, t, slack, seed, DEFAULT_RETRY_BUDGET) {
        Ok(res) => res.subset,
        Err(Error::RetriesExhausted { best_distance, .. }) => {
            return Ok(UnionTrial { index_set, subset: Vec::new(), distance: best_distance, ok: false });
        }
        Err(e) => return Err(e),
    };
    let mut chosen: Vec<usize> = local_subset.iter().map(|&i| index_set[i]).collect();
    // pad with the lowest unused indices of I
    for &i in &index_set {
        if chosen.len() >= t {
            break;
        }
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    let q = CrossPolytope::new(points.select_columns(&chosen))?;
    let d = distance_to_hull(&q, &y, &HullDistanceOptions::default())?;
    let ok = chosen.len() == t && d.distance <= threshold + 1e-9 * (1.0 + y.norm());
    Ok(UnionTrial { index_set, subset: chosen, distance: d.distance, ok })
}

/// Points on the unit sphere of `ℝ^d`, as columns.
pub fn random_unit_points(d: usize, n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut m = crate::gauss_mc::gaussian_matrix(d, n, rng);
    for mut c in m.column_iter_mut() {
        let norm = c.norm();
        c /= norm;
    }
    m
}
