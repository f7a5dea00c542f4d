//! Cross-polytopes, Gram–Schmidt chains, projections and Euclidean distance to a hull.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Relative threshold used for every rank decision: a direction counts as
/// independent when its residual exceeds `rel_threshold · max column norm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankPolicy {
    pub rel_threshold: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy { rel_threshold: 1e-10 }
    }
}

impl RankPolicy {
    pub fn threshold(&self, columns: &DMatrix<f64>) -> f64 {
        let max_norm = (0..columns.ncols())
            .map(|j| columns.column(j).norm())
            .fold(0.0, f64::max);
        self.rel_threshold * max_norm
    }

    /// Numerical rank of `m` (singular values above the threshold).
    pub fn rank(&self, m: &DMatrix<f64>) -> usize {
        if m.nrows() == 0 || m.ncols() == 0 {
            return 0;
        }
        let thr = self.threshold(m);
        if thr == 0.0 {
            return 0;
        }
        m.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .filter(|&&s| s > thr)
            .count()
    }
}

/// `scale · conv{±g_1, …, ±g_ℓ}` with generators stored as matrix columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossPolytope {
    generators: DMatrix<f64>,
    scale: f64,
}

impl CrossPolytope {
    pub fn new(generators: DMatrix<f64>) -> Result<Self> {
        if generators.nrows() == 0 || generators.ncols() == 0 {
            return Err(Error::invalid("cross-polytope needs dim ≥ 1 and at least one generator"));
        }
        if generators.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("generator entries must be finite"));
        }
        Ok(CrossPolytope { generators, scale: 1.0 })
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
        Self::new(m)
    }

    /// The unit ℓ1 ball `B_1^d`.
    pub fn l1_ball(dim: usize) -> Self {
        CrossPolytope { generators: DMatrix::identity(dim, dim), scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("scale must be finite and nonnegative, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.generators.nrows()
    }

    pub fn len(&self) -> usize {
        self.generators.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.ncols() == 0
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    /// Generators with the scale folded in.
    pub fn scaled_generators(&self) -> DMatrix<f64> {
        &self.generators * self.scale
    }

    pub fn generator(&self, i: usize) -> DVector<f64> {
        self.generators.column(i).into_owned()
    }

    /// Largest Euclidean norm of a scaled generator.
    pub fn radius(&self) -> f64 {
        (0..self.len())
            .map(|j| self.generators.column(j).norm())
            .fold(0.0, f64::max)
            * self.scale
    }

    /// Support function `h_P(u) = scale · max_i |⟨g_i, u⟩|`.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        let dots = self.generators.tr_mul(u);
        self.scale * dots.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Whether the generators span the ambient space.
    pub fn is_full_dimensional(&self, policy: RankPolicy) -> bool {
        policy.rank(&self.generators) == self.dim()
    }

    /// Keeps the listed generators, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("selection must keep at least one generator"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!("generator index {bad} out of range")));
        }
        let m = self.generators.select_columns(indices);
        Ok(CrossPolytope { generators: m, scale: self.scale })
    }

    /// Membership with a relative tolerance on the ℓ1 budget.
    pub fn contains(&self, y: &DVector<f64>) -> Result<bool> {
        crate::sparse_l1::HullOracle::new(self)?.contains(y)
    }
}

/// `base + eta·B_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThickenedPolytope {
    pub base: CrossPolytope,
    pub eta: f64,
}

impl ThickenedPolytope {
    pub fn new(base: CrossPolytope, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("thickening radius must be nonnegative, got {eta}")));
        }
        Ok(ThickenedPolytope { base, eta })
    }

    pub fn contains(&self, y: &DVector<f64>) -> Result<bool> {
        if self.eta == 0.0 {
            return self.base.contains(y);
        }
        within_distance(&self.base, y, self.eta, &HullDistanceOptions::default())
    }
}

/// Span-distances of an ordered family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSchmidtChain {
    pub order: Vec<usize>,
    pub distances: Vec<f64>,
    pub rank: usize,
}

impl GramSchmidtChain {
    pub fn product(&self) -> f64 {
        self.distances.iter().product()
    }
}

/// Chain of the columns of `columns` taken in `order`.
pub fn gram_schmidt_chain_ordered(
    columns: &DMatrix<f64>,
    order: &[usize],
    policy: RankPolicy,
) -> Result<GramSchmidtChain> {
    let mut seen = vec![false; columns.ncols()];
    for &i in order {
        if i >= columns.ncols() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid("order must list distinct column indices"));
        }
    }
    let thr = policy.threshold(columns);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut distances = Vec::with_capacity(order.len());
    for &i in order {
        let mut w = columns.column(i).into_owned();
        for _pass in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let d = w.norm();
        distances.push(d);
        if d > thr && thr > 0.0 {
            basis.push(w / d);
        }
    }
    Ok(GramSchmidtChain { order: order.to_vec(), distances, rank: basis.len() })
}

/// Modified Gram–Schmidt with one re-orthogonalization pass, in the given order.
pub fn gram_schmidt_chain(vectors: &[DVector<f64>]) -> Result<GramSchmidtChain> {
    let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    let order: Vec<usize> = (0..vectors.len()).collect();
    gram_schmidt_chain_ordered(&m, &order, RankPolicy::default())
}

/// `vol_d(B_1^d) = 2^d / d!`.
pub fn l1_ball_volume(d: usize) -> f64 {
    (1..=d).fold(1.0, |acc, i| acc * 2.0 / i as f64)
}

/// `2^d / d!` as a reduced fraction, exact for `d ≤ 33`.
pub fn l1_ball_volume_exact(d: u32) -> Option<(u128, u128)> {
    let mut num: u128 = 1u128.checked_shl(d)?;
    let mut den: u128 = 1;
    for i in 1..=d as u128 {
        den = den.checked_mul(i)?;
    }
    let g = gcd(num, den);
    num /= g;
    den /= g;
    Some((num, den))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Volume of `Y(B_1^d) = |det Y| · 2^d/d!`.
pub fn cross_polytope_volume(y: &DMatrix<f64>) -> Result<f64> {
    if !y.is_square() {
        return Err(Error::DimensionMismatch { expected: y.nrows(), found: y.ncols() });
    }
    let det = y.clone().lu().determinant().abs();
    Ok(det * l1_ball_volume(y.nrows()))
}

/// Checks `BᵀB = I` to within `1e-12` entrywise.
pub fn check_orthonormal(basis: &DMatrix<f64>) -> Result<()> {
    if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
        return Err(Error::invalid("basis must have between 1 and dim columns"));
    }
    let gram = basis.tr_mul(basis);
    let k = basis.ncols();
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            if (gram[(i, j)] - target).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "basis is not orthonormal: Gram entry ({i},{j}) = {}",
                    gram[(i, j)]
                )));
            }
        }
    }
    Ok(())
}

/// Coordinates of `π_H(P)` in the orthonormal basis of `H` (given as columns).
pub fn project_polytope(p: &CrossPolytope, basis: &DMatrix<f64>) -> Result<CrossPolytope> {
    if basis.nrows() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: basis.nrows() });
    }
    check_orthonormal(basis)?;
    let g = basis.tr_mul(p.generators());
    CrossPolytope::new(g)?.with_scale(p.scale())
}

/// Orthonormal basis of a random `k`-dimensional subspace of `ℝ^d`.
pub fn random_subspace(d: usize, k: usize, rng: &mut impl Rng) -> Result<DMatrix<f64>> {
    if k == 0 || k > d {
        return Err(Error::invalid(format!("subspace dimension {k} not in 1..={d}")));
    }
    let g = DMatrix::from_fn(d, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    Ok(q.columns(0, k).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullDistanceOptions {
    /// Absolute tolerance on the distance; `None` means `1e-9 · (1 + ‖y‖)`.
    pub tolerance: Option<f64>,
    pub max_iter: usize,
}

impl Default for HullDistanceOptions {
    fn default() -> Self {
        HullDistanceOptions { tolerance: None, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullDistance {
    /// Distance achieved by `coefficients` (an upper bound on the true distance).
    pub distance: f64,
    /// Certified lower bound from the duality gap.
    pub lower_bound: f64,
    /// ℓ1-bounded coefficients on the scaled generators of the nearest point found.
    pub coefficients: DVector<f64>,
    pub iterations: usize,
}

enum Stop {
    Converged,
    Below,
    Above,
}

struct AwayStepFw<'a> {
    atoms: DMatrix<f64>,
    y: &'a DVector<f64>,
    weights: Vec<f64>,
    x: DVector<f64>,
}

impl<'a> AwayStepFw<'a> {
    // atom j < ℓ is +g_j, atom j ≥ ℓ is -g_{j-ℓ}
    fn new(p: &CrossPolytope, y: &'a DVector<f64>) -> Self {
        let atoms = p.scaled_generators();
        let ell = atoms.ncols();
        let dots = atoms.tr_mul(y);
        let (best, _) = dots
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        let mut weights = vec![0.0; 2 * ell];
        let g = atoms.column(best).into_owned();
        let sign = if dots[best] >= 0.0 { 1.0 } else { -1.0 };
        let atom = &g * sign;
        let x;
        if (y - &atom).norm() < y.norm() {
            weights[if sign > 0.0 { best } else { best + ell }] = 1.0;
            x = atom;
        } else {
            weights[best] = 0.5;
            weights[best + ell] = 0.5;
            x = DVector::zeros(y.len());
        }
        AwayStepFw { atoms, y, weights, x }
    }

    fn atom(&self, j: usize) -> (usize, f64) {
        let ell = self.atoms.ncols();
        if j < ell {
            (j, 1.0)
        } else {
            (j - ell, -1.0)
        }
    }

    fn recompute_x(&mut self) {
        let ell = self.atoms.ncols();
        let coef = DVector::from_fn(ell, |i, _| self.weights[i] - self.weights[i + ell]);
        self.x = &self.atoms * coef;
    }

    fn coefficients(&self) -> DVector<f64> {
        let ell = self.atoms.ncols();
        DVector::from_fn(ell, |i, _| self.weights[i] - self.weights[i + ell])
    }

    fn run(&mut self, tol: f64, radius: Option<f64>, max_iter: usize) -> (Stop, f64, f64, usize) {
        let ell = self.atoms.ncols();
        let mut lower = 0.0f64;
        let mut upper = f64::INFINITY;
        for it in 0..max_iter {
            if it % 256 == 255 {
                self.recompute_x();
            }
            let r = &self.x - self.y;
            let rn = r.norm();
            upper = rn;
            if rn == 0.0 {
                return (Stop::Converged, 0.0, 0.0, it);
            }
            let c = self.atoms.tr_mul(&r);
            let (fw_i, fw_abs) = c
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            let rx = r.dot(&self.x);
            let gap = (rx + fw_abs).max(0.0);
            let lb1 = (rn * rn - 2.0 * gap).max(0.0).sqrt();
            let lb2 = rn - gap / rn;
            lower = lower.max(lb1.max(lb2).max(0.0));
            if let Some(rad) = radius {
                if upper <= rad + tol {
                    return (Stop::Below, lower, upper, it);
                }
                if lower > rad + tol {
                    return (Stop::Above, lower, upper, it);
                }
            }
            if upper - lower <= tol {
                return (Stop::Converged, lower, upper, it);
            }
            let fw_atom = if c[fw_i] > 0.0 { fw_i + ell } else { fw_i };
            // away atom: active atom maximizing <v, r>
            let mut away = usize::MAX;
            let mut away_val = f64::NEG_INFINITY;
            for (j, &w) in self.weights.iter().enumerate() {
                if w > 0.0 {
                    let (i, s) = self.atom(j);
                    let v = s * c[i];
                    if v > away_val {
                        away_val = v;
                        away = j;
                    }
                }
            }
            let fw_gap = gap;
            let away_gap = away_val - rx;
            let (dir, gamma_max, is_fw) = if fw_gap >= away_gap || away == usize::MAX {
                let (i, s) = self.atom(fw_atom);
                let d = self.atoms.column(i) * s - &self.x;
                (d, 1.0, true)
            } else {
                let (i, s) = self.atom(away);
                let wa = self.weights[away];
                let d = &self.x - self.atoms.column(i) * s;
                let gm = if wa >= 1.0 { f64::INFINITY } else { wa / (1.0 - wa) };
                (d, gm, false)
            };
            let dd = dir.norm_squared();
            if dd == 0.0 {
                return (Stop::Converged, lower, upper, it);
            }
            let gamma = (-r.dot(&dir) / dd).clamp(0.0, gamma_max);
            if gamma == 0.0 {
                return (Stop::Converged, lower, upper, it);
            }
            self.x.axpy(gamma, &dir, 1.0);
            if is_fw {
                for w in self.weights.iter_mut() {
                    *w *= 1.0 - gamma;
                }
                self.weights[fw_atom] += gamma;
            } else {
                for w in self.weights.iter_mut() {
                    *w *= 1.0 + gamma;
                }
                self.weights[away] -= gamma;
                if gamma >= gamma_max || self.weights[away] < 1e-15 {
                    self.weights[away] = 0.0;
                }
            }
        }
        (Stop::Converged, lower, upper, max_iter)
    }
}

fn check_dims(p: &CrossPolytope, y: &DVector<f64>) -> Result<()> {
    if p.dim() != y.len() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: y.len() });
    }
    Ok(())
}

/// Euclidean distance from `y` to `P` by away-step Frank–Wolfe.
pub fn distance_to_hull(
    p: &CrossPolytope,
    y: &DVector<f64>,
    opts: &HullDistanceOptions,
) -> Result<HullDistance> {
    check_dims(p, y)?;
    let tol = opts.tolerance.unwrap_or(1e-9 * (1.0 + y.norm()));
    if y.iter().all(|&v| v == 0.0) {
        return Ok(HullDistance {
            distance: 0.0,
            lower_bound: 0.0,
            coefficients: DVector::zeros(p.len()),
            iterations: 0,
        });
    }
    let mut fw = AwayStepFw::new(p, y);
    let (_, lower, upper, it) = fw.run(tol, None, opts.max_iter);
    fw.recompute_x();
    let distance = (&fw.x - y).norm();
    if distance - lower > tol && it >= opts.max_iter {
        return Err(Error::Convergence { iterations: it, lower, upper: distance.min(upper) });
    }
    Ok(HullDistance { distance, lower_bound: lower.min(distance), coefficients: fw.coefficients(), iterations: it })
}

/// Whether `dist(y, P) ≤ radius` (up to the tolerance), stopping as soon as it is decided.
pub fn within_distance(
    p: &CrossPolytope,
    y: &DVector<f64>,
    radius: f64,
    opts: &HullDistanceOptions,
) -> Result<bool> {
    check_dims(p, y)?;
    let tol = opts.tolerance.unwrap_or(1e-9 * (1.0 + y.norm()));
    if y.norm() <= radius + tol {
        return Ok(true);
    }
    let mut fw = AwayStepFw::new(p, y);
    let (stop, lower, upper, it) = fw.run(tol, Some(radius), opts.max_iter);
    match stop {
        Stop::Below => Ok(true),
        Stop::Above => Ok(false),
        Stop::Converged if it < opts.max_iter => Ok(upper <= radius + tol),
        Stop::Converged => Err(Error::Convergence { iterations: it, lower, upper }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbReport {
    pub directions: usize,
    /// Directions where the hypothesis `h_K ≤ h_L + δ h_K` held.
    pub hypothesis_held: usize,
    pub violations: usize,
    pub passed: bool,
}

/// Directionwise check that `h_K ≤ h_L + δ h_K` forces `h_K ≤ h_L/(1−δ)`.
pub fn minkowski_absorb_check(
    k: &CrossPolytope,
    l: &CrossPolytope,
    delta: f64,
    directions: usize,
    seed: u64,
) -> Result<AbsorbReport> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: l.dim() });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!("delta must lie in [0, 1), got {delta}")));
    }
    let policy = RankPolicy::default();
    if !k.is_full_dimensional(policy) || !l.is_full_dimensional(policy) || k.scale() == 0.0 || l.scale() == 0.0 {
        return Err(Error::invalid("absorption check needs full-dimensional bodies"));
    }
    let mut rng = stream_rng(seed, 0);
    let d = k.dim();
    let mut held = 0;
    let mut violations = 0;
    for _ in 0..directions {
        let mut u = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = u.norm();
        u /= n;
        let hk = k.support(&u);
        let hl = l.support(&u);
        let tol = 1e-12 * (1.0 + hk + hl);
        if hk <= hl + delta * hk + tol {
            held += 1;
            if hk > hl / (1.0 - delta) + 2.0 * tol / (1.0 - delta) {
                violations += 1;
            }
        }
    }
    Ok(AbsorbReport { directions, hypothesis_held: held, violations, passed: violations == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn random_matrix(d: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, 0);
        DMatrix::from_fn(d, n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn chain_of_orthonormal_basis() {
        let v: Vec<DVector<f64>> = (0..3).map(|i| DVector::from_fn(3, |j, _| (i == j) as u8 as f64)).collect();
        let c = gram_schmidt_chain(&v).unwrap();
        assert_eq!(c.distances, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn chain_of_sheared_pair() {
        let v = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![1.0, 1.0])];
        let c = gram_schmidt_chain(&v).unwrap();
        assert_relative_eq!(c.distances[0], 1.0);
        assert_relative_eq!(c.distances[1], 1.0);
    }

    #[test]
    fn chain_rejects_ragged_input() {
        let v = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![1.0])];
        assert!(matches!(gram_schmidt_chain(&v), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn chain_product_is_determinant() {
        for seed in 0..20 {
            let m = random_matrix(5, 5, seed);
            let order: Vec<usize> = (0..5).collect();
            let c = gram_schmidt_chain_ordered(&m, &order, RankPolicy::default()).unwrap();
            let det = m.clone().lu().determinant().abs();
            assert_relative_eq!(c.product(), det, max_relative = 1e-9);
        }
    }

    #[test]
    fn dependent_column_has_zero_distance() {
        let mut m = random_matrix(3, 3, 5);
        let c0 = m.column(0).into_owned();
        let c1 = m.column(1).into_owned();
        m.set_column(2, &(c0 * 2.0 - c1));
        let c = gram_schmidt_chain_ordered(&m, &[0, 1, 2], RankPolicy::default()).unwrap();
        assert!(c.distances[2] < 1e-12);
        assert_eq!(c.rank, 2);
    }

    #[test]
    fn volumes() {
        assert_relative_eq!(cross_polytope_volume(&DMatrix::identity(3, 3)).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(cross_polytope_volume(&(DMatrix::identity(2, 2) * 2.0)).unwrap(), 8.0, epsilon = 1e-14);
        assert_eq!(l1_ball_volume_exact(3), Some((4, 3)));
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(cross_polytope_volume(&singular).unwrap(), 0.0);
    }

    #[test]
    fn projection_drops_coordinate() {
        let p = CrossPolytope::from_vectors(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let h = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let q = project_polytope(&p, &h).unwrap();
        assert_eq!(q.generators().as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn projection_rejects_skewed_basis() {
        let p = CrossPolytope::l1_ball(2);
        let h = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(project_polytope(&p, &h).is_err());
    }

    #[test]
    fn projection_full_space_is_identity() {
        let p = CrossPolytope::new(random_matrix(3, 4, 1)).unwrap();
        let q = project_polytope(&p, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn projection_is_idempotent_in_ambient_coordinates() {
        let mut rng = stream_rng(3, 0);
        let p = CrossPolytope::new(random_matrix(5, 6, 2)).unwrap();
        let h = random_subspace(5, 2, &mut rng).unwrap();
        // project onto H, lift back, project again
        let once = project_polytope(&p, &h).unwrap();
        let lifted = CrossPolytope::new(&h * once.generators()).unwrap();
        let twice = project_polytope(&lifted, &h).unwrap();
        assert!((once.generators() - twice.generators()).amax() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let b = CrossPolytope::l1_ball(2);
        let o = HullDistanceOptions::default();
        assert_eq!(distance_to_hull(&b, &DVector::zeros(2), &o).unwrap().distance, 0.0);
        let d = distance_to_hull(&b, &DVector::from_vec(vec![2.0, 0.0]), &o).unwrap();
        assert_relative_eq!(d.distance, 1.0, epsilon = 1e-8);
        // (1,1) projects to (1/2,1/2)
        let d = distance_to_hull(&b, &DVector::from_vec(vec![1.0, 1.0]), &o).unwrap();
        assert_relative_eq!(d.distance, 0.5f64.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn generators_are_at_distance_zero() {
        let p = CrossPolytope::new(random_matrix(4, 7, 9)).unwrap().with_scale(0.7).unwrap();
        for j in 0..p.len() {
            let g = p.generator(j) * 0.7;
            let d = distance_to_hull(&p, &g, &HullDistanceOptions::default()).unwrap();
            assert!(d.distance <= 1e-8, "generator {j}: {}", d.distance);
        }
    }

    #[test]
    fn within_distance_agrees_with_full_solve() {
        let p = CrossPolytope::new(random_matrix(3, 5, 4)).unwrap();
        let mut rng = stream_rng(11, 0);
        for _ in 0..200 {
            let y = DVector::from_fn(3, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
            let d = distance_to_hull(&p, &y, &HullDistanceOptions::default()).unwrap();
            for rad in [0.1, 0.5, 1.0] {
                if (d.distance - rad).abs() > 1e-6 {
                    let w = within_distance(&p, &y, rad, &HullDistanceOptions::default()).unwrap();
                    assert_eq!(w, d.distance <= rad);
                }
            }
        }
    }

    #[test]
    fn thickened_membership() {
        let t = ThickenedPolytope::new(CrossPolytope::l1_ball(2), 0.5).unwrap();
        assert!(t.contains(&DVector::from_vec(vec![1.4, 0.0])).unwrap());
        assert!(!t.contains(&DVector::from_vec(vec![1.6, 0.0])).unwrap());
        let bare = ThickenedPolytope::new(CrossPolytope::l1_ball(2), 0.0).unwrap();
        assert!(bare.contains(&DVector::from_vec(vec![0.5, 0.5])).unwrap());
        assert!(!bare.contains(&DVector::from_vec(vec![0.6, 0.5])).unwrap());
    }

    #[test]
    fn absorb_examples() {
        let b = CrossPolytope::l1_ball(2);
        assert!(minkowski_absorb_check(&b, &b, 0.5, 1000, 1).unwrap().passed);
        let b2 = CrossPolytope::l1_ball(2).with_scale(2.0).unwrap();
        assert!(minkowski_absorb_check(&b2, &b, 0.5, 1000, 1).unwrap().passed);
        let k = CrossPolytope::new(random_matrix(3, 5, 21)).unwrap();
        let l = CrossPolytope::new(random_matrix(3, 4, 22)).unwrap();
        let r = minkowski_absorb_check(&k, &l, 0.3, 10_000, 3).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn absorb_rejects_flat_body() {
        let flat = CrossPolytope::from_vectors(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let b = CrossPolytope::l1_ball(2);
        assert!(minkowski_absorb_check(&flat, &b, 0.1, 10, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn later_position_never_increases_distance(seed in 0u64..10_000, d in 2usize..6) {
            let m = random_matrix(d, d, seed);
            let base: Vec<usize> = (0..d).collect();
            let c = gram_schmidt_chain_ordered(&m, &base, RankPolicy::default()).unwrap();
            for i in 0..d - 1 {
                let mut swapped = base.clone();
                swapped.swap(i, i + 1);
                let s = gram_schmidt_chain_ordered(&m, &swapped, RankPolicy::default()).unwrap();
                // vector base[i] moved from position i to i+1
                prop_assert!(s.distances[i + 1] <= c.distances[i] * (1.0 + 1e-12));
            }
        }

        #[test]
        fn support_function_matches_ray_exit(seed in 0u64..10_000) {
            let mut rng = stream_rng(seed, 1);
            let p = CrossPolytope::new(random_matrix(3, 5, seed)).unwrap().with_scale(1.3).unwrap();
            let u = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
            let h = p.support(&u);
            // the maximizing point lies on the boundary along the normal direction u
            let dots = p.generators().tr_mul(&u);
            let (i, _) = dots.iter().enumerate().fold((0, -1.0), |a, (i, v)| if v.abs() > a.1 { (i, v.abs()) } else { a });
            let vertex = p.generator(i) * (1.3 * dots[i].signum());
            prop_assert!((vertex.dot(&u) - h).abs() <= 1e-12 * (1.0 + h));
            prop_assert!(p.contains(&(&vertex * 0.999)).unwrap());
            prop_assert!(!p.contains(&(&vertex + &u * (1e-3 / u.norm()))).unwrap());
        }

        #[test]
        fn membership_is_order_invariant(seed in 0u64..10_000) {
            let p = CrossPolytope::new(random_matrix(3, 5, seed)).unwrap();
            let q = p.select(&[4, 2, 0, 3, 1]).unwrap();
            let mut rng = stream_rng(seed, 2);
            for _ in 0..10 {
                let y = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
                prop_assert_eq!(p.contains(&y).unwrap(), q.contains(&y).unwrap());
            }
        }
    }
}
