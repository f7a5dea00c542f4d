//! Minimal-ℓ1 representations by a revised simplex on `[M −M] z = y, z ≥ 0`.
//!
//! Optimal basic solutions are extreme points, so the support is independent
//! and no index carries both signs. Ties among optimal vertices are not
//! broken canonically: the first optimal vertex reached is returned.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinat::subsets;
use crate::error::{Error, Result};
use crate::geometry::{CrossPolytope, RankPolicy};
use crate::rng::derive_seed;
use crate::rng::stream_rng;

/// Result of a minimal-ℓ1 solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRep {
    pub coefficients: Vec<f64>,
    pub support: Vec<usize>,
    pub tau: f64,
}

impl SparseRep {
    fn empty(n: usize) -> Self {
        SparseRep { coefficients: vec![0.0; n], support: Vec::new(), tau: 0.0 }
    }
}

const FEAS_TOL: f64 = 1e-8;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_STREAK: usize = 50;
const REFACTOR_EVERY: usize = 64;

/// A constraint matrix prepared for repeated solves.
#[derive(Debug, Clone)]
pub struct L1System {
    m: DMatrix<f64>,
    rank: usize,
    pinv: Option<DMatrix<f64>>,
    policy: RankPolicy,
}

impl L1System {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_policy(m, RankPolicy::default())
    }

    pub fn with_policy(m: DMatrix<f64>, policy: RankPolicy) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::invalid("constraint matrix must be nonempty"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("constraint matrix entries must be finite"));
        }
        let rank = policy.rank(&m);
        // full row rank systems are feasible for every right-hand side
        let pinv = if rank < m.nrows() {
            let thr = policy.threshold(&m);
            let svd = m.clone().svd(true, true);
            Some(svd.pseudo_inverse(thr).map_err(|e| Error::Numerical(e.to_string()))?)
        } else {
            None
        };
        Ok(L1System { m, rank, pinv, policy })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Least-squares residual of `y` against the column space.
    pub fn column_space_residual(&self, y: &DVector<f64>) -> f64 {
        match &self.pinv {
            None => 0.0,
            Some(p) => (&self.m * (p * y) - y).norm(),
        }
    }

    pub fn solve(&self, y: &DVector<f64>) -> Result<SparseRep> {
        let (p, n) = self.m.shape();
        if y.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("right-hand side must be finite"));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Ok(SparseRep::empty(n));
        }
        let ynorm = y.norm();
        let residual = self.column_space_residual(y);
        if residual > FEAS_TOL * (1.0 + ynorm) {
            return Err(Error::Infeasible { residual });
        }
        let rep = Simplex::new(&self.m, y).solve()?;
        let check = (&self.m * DVector::from_column_slice(&rep.coefficients) - y).norm();
        if check > FEAS_TOL * (1.0 + ynorm) {
            return Err(Error::Numerical(format!("solution residual {check:e} exceeds feasibility tolerance")));
        }
        Ok(rep)
    }

    /// `tau ≤ budget + 1e-8`, with the representation as certificate.
    pub fn membership(&self, y: &DVector<f64>, budget: f64) -> Result<(bool, SparseRep)> {
        let rep = self.solve(y)?;
        Ok((rep.tau <= budget + FEAS_TOL, rep))
    }

    pub fn policy(&self) -> RankPolicy {
        self.policy
    }
}

/// Minimal-ℓ1 `x` with `Mx = y`, returned at a vertex.
pub fn min_l1_representation(m: &DMatrix<f64>, y: &DVector<f64>) -> Result<SparseRep> {
    L1System::new(m.clone())?.solve(y)
}

/// Whether `y ∈ budget · M(B_1^N)`, with the minimal representation as certificate.
pub fn membership_l1(m: &DMatrix<f64>, y: &DVector<f64>, budget: f64) -> Result<(bool, SparseRep)> {
    L1System::new(m.clone())?.membership(y, budget)
}

struct Simplex {
    a: DMatrix<f64>,   // p × (2N + p), rows sign-normalized so b ≥ 0
    b: DVector<f64>,
    n_struct: usize,   // 2N
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    xb: DVector<f64>,
    pivots_since_refactor: usize,
    bland: bool,
    degenerate_streak: usize,
}

impl Simplex {
    fn new(m: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let (p, n) = m.shape();
        let mut a = DMatrix::zeros(p, 2 * n + p);
        let mut b = y.clone();
        for i in 0..p {
            let s = if y[i] < 0.0 { -1.0 } else { 1.0 };
            b[i] *= s;
            for j in 0..n {
                a[(i, j)] = s * m[(i, j)];
                a[(i, j + n)] = -s * m[(i, j)];
            }
            a[(i, 2 * n + i)] = 1.0;
        }
        let basis: Vec<usize> = (2 * n..2 * n + p).collect();
        let xb = b.clone();
        Simplex {
            a,
            b,
            n_struct: 2 * n,
            basis,
            binv: DMatrix::identity(p, p),
            xb,
            pivots_since_refactor: 0,
            bland: false,
            degenerate_streak: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct
    }

    fn refactor(&mut self) -> Result<()> {
        let bmat = self.a.select_columns(&self.basis);
        let inv = bmat
            .try_inverse()
            .ok_or_else(|| Error::Numerical("basis matrix became singular".into()))?;
        self.xb = &inv * &self.b;
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -FEAS_TOL {
                *v = 0.0;
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: &DVector<f64>) -> Result<()> {
        let pr = alpha[row];
        let theta = self.xb[row] / pr;
        for i in 0..self.xb.len() {
            if i != row {
                self.xb[i] -= theta * alpha[i];
                if self.xb[i] < 0.0 && self.xb[i] > -FEAS_TOL {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[row] = theta;
        // eta update of the inverse
        let prow = self.binv.row(row).into_owned() / pr;
        for i in 0..self.binv.nrows() {
            if i != row {
                let f = alpha[i];
                if f != 0.0 {
                    for c in 0..prow.len() {
                        self.binv[(i, c)] -= f * prow[c];
                    }
                }
            }
        }
        self.binv.set_row(row, &prow);
        self.basis[row] = entering;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// Runs simplex iterations for costs `c`; artificials never enter.
    fn optimize(&mut self, cost: &[f64], budget: &mut usize) -> Result<()> {
        let ncols = self.a.ncols();
        loop {
            if *budget == 0 {
                return Err(Error::Numerical("simplex iteration cap reached".into()));
            }
            *budget -= 1;
            let cb = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&j| cost[j]));
            let duals = self.binv.tr_mul(&cb);
            let mut in_basis = vec![false; ncols];
            for &j in &self.basis {
                in_basis[j] = true;
            }
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..self.n_struct {
                if in_basis[j] {
                    continue;
                }
                let d = cost[j] - self.a.column(j).dot(&duals);
                if d < best {
                    entering = Some(j);
                    if self.bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Ok(());
            };
            let alpha = &self.binv * self.a.column(q);
            let mut row = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_alpha = 0.0;
            for i in 0..alpha.len() {
                if alpha[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / alpha[i];
                    let better = match row {
                        None => true,
                        Some(r) => {
                            if ratio < best_ratio - 1e-14 {
                                true
                            } else if ratio <= best_ratio + 1e-14 {
                                if self.bland {
                                    self.basis[i] < self.basis[r]
                                } else {
                                    alpha[i] > best_alpha
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        row = Some(i);
                        best_ratio = ratio;
                        best_alpha = alpha[i];
                    }
                }
            }
            let Some(r) = row else {
                return Err(Error::Numerical("unbounded direction in a bounded problem".into()));
            };
            if best_ratio <= 1e-14 {
                self.degenerate_streak += 1;
                if self.degenerate_streak > DEGENERATE_STREAK {
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
            }
            self.pivot(r, q, &alpha)?;
        }
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for row in 0..self.basis.len() {
            if !self.is_artificial(self.basis[row]) {
                continue;
            }
            let brow = self.binv.row(row).into_owned();
            let mut best = None;
            let mut best_val = PIVOT_TOL;
            for j in 0..self.n_struct {
                if self.basis.contains(&j) {
                    continue;
                }
                let v = self.a.column(j).dot(&brow.transpose()).abs();
                if v > best_val {
                    best_val = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                let alpha = &self.binv * self.a.column(j);
                self.pivot(row, j, &alpha)?;
            }
        }
        self.refactor()
    }

    fn solve(mut self) -> Result<SparseRep> {
        let ncols = self.a.ncols();
        let p = self.b.len();
        let n = self.n_struct / 2;
        let mut budget = 50 * ncols + 1000;

        let mut phase1 = vec![0.0; ncols];
        for c in phase1.iter_mut().skip(self.n_struct) {
            *c = 1.0;
        }
        self.optimize(&phase1, &mut budget)?;
        self.refactor()?;
        let infeas: f64 = self
            .basis
            .iter()
            .zip(self.xb.iter())
            .filter(|(&j, _)| j >= self.n_struct)
            .map(|(_, &v)| v.abs())
            .sum();
        let bnorm = self.b.norm();
        if infeas > FEAS_TOL * (1.0 + bnorm) {
            return Err(Error::Infeasible { residual: infeas });
        }
        self.drive_out_artificials()?;

        let mut phase2 = vec![0.0; ncols];
        for c in phase2.iter_mut().take(self.n_struct) {
            *c = 1.0;
        }
        self.bland = false;
        self.degenerate_streak = 0;
        self.optimize(&phase2, &mut budget)?;
        self.refactor()?;

        let mut coefficients = vec![0.0; n];
        let scale = self.xb.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let zero = 1e-13 * (1.0 + scale);
        for (row, &j) in self.basis.iter().enumerate() {
            if j >= self.n_struct {
                continue;
            }
            let v = self.xb[row];
            if v <= zero {
                continue;
            }
            if j < n {
                coefficients[j] += v;
            } else {
                coefficients[j - n] -= v;
            }
        }
        let _ = p;
        let support: Vec<usize> = (0..n).filter(|&i| coefficients[i] != 0.0).collect();
        let tau = coefficients.iter().map(|v| v.abs()).sum();
        Ok(SparseRep { coefficients, support, tau })
    }
}

/// Membership in `scale · conv{±g_i}`: an LU solve for square invertible
/// generator sets, the ℓ1 program otherwise.
#[derive(Debug, Clone)]
pub struct HullOracle {
    scale: f64,
    kind: OracleKind,
}

#[derive(Debug, Clone)]
enum OracleKind {
    Square(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    General(L1System),
    Origin,
}

impl HullOracle {
    pub fn new(p: &CrossPolytope) -> Result<Self> {
        let g = p.generators();
        if p.scale() == 0.0 || g.iter().all(|&v| v == 0.0) {
            return Ok(HullOracle { scale: 0.0, kind: OracleKind::Origin });
        }
        let policy = RankPolicy::default();
        if g.is_square() && policy.rank(g) == g.nrows() {
            return Ok(HullOracle { scale: p.scale(), kind: OracleKind::Square(g.clone().lu()) });
        }
        Ok(HullOracle { scale: p.scale(), kind: OracleKind::General(L1System::new(g.clone())?) })
    }

    /// Minimal ℓ1 budget needed for `y`; infinite outside the span.
    pub fn gauge(&self, y: &DVector<f64>) -> Result<f64> {
        match &self.kind {
            OracleKind::Origin => Ok(if y.iter().all(|&v| v == 0.0) { 0.0 } else { f64::INFINITY }),
            OracleKind::Square(lu) => {
                let x = lu.solve(y).ok_or_else(|| Error::Numerical("LU solve failed".into()))?;
                Ok(x.lp_norm(1) / self.scale)
            }
            OracleKind::General(sys) => match sys.solve(y) {
                Ok(rep) => Ok(rep.tau / self.scale),
                Err(Error::Infeasible { .. }) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            },
        }
    }

    pub fn contains(&self, y: &DVector<f64>) -> Result<bool> {
        Ok(self.gauge(y)? <= 1.0 + FEAS_TOL)
    }

    /// Same as [`HullOracle::contains`] on a raw slice.
    pub fn contains_slice(&self, y: &[f64]) -> Result<bool> {
        self.contains(&DVector::from_column_slice(y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub samples: usize,
    pub max_support: usize,
    pub rank: usize,
    pub violations: usize,
}

/// Samples `y = M a` with `‖a‖₁ ≤ 1` and checks `y ∈ conv{±M e_j : j ∈ J}` on the
/// returned support `J`, with `rank(M_J) = |J|`.
pub fn l1_decomposition_cover_check(m: &DMatrix<f64>, samples: usize, seed: u64) -> Result<CoverReport> {
    let (p, n) = m.shape();
    if n > 24 || p > 12 {
        return Err(Error::precondition(format!("cover check limited to 12×24 systems, got {p}×{n}")));
    }
    let sys = L1System::new(m.clone())?;
    let policy = sys.policy();
    let mut violations = 0;
    let mut max_support = 0;
    for k in 0..samples {
        let mut rng = stream_rng(derive_seed(seed, k as u64), 0);
        let a = random_l1_point(n, &mut rng);
        let y = m * &a;
        let rep = sys.solve(&y)?;
        max_support = max_support.max(rep.support.len());
        if rep.support.is_empty() {
            continue;
        }
        let mj = m.select_columns(&rep.support);
        let independent = policy.rank(&mj) == rep.support.len();
        let inside = HullOracle::new(&CrossPolytope::new(mj)?)?.contains(&y)?;
        if !independent || !inside || rep.support.len() > sys.rank() {
            violations += 1;
        }
    }
    Ok(CoverReport { samples, max_support, rank: sys.rank(), violations })
}

/// Minimal `‖x‖₁` over `Mx = y` by enumerating every independent column set of
/// size `rank(M)` and solving on it exactly. Exponential in the column count.
pub fn brute_force_min_l1(m: &DMatrix<f64>, y: &DVector<f64>) -> Result<f64> {
    let (p, n) = m.shape();
    if y.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: y.len() });
    }
    if n > 20 {
        return Err(Error::precondition(format!("brute force limited to 20 columns, got {n}")));
    }
    let policy = RankPolicy::default();
    let rank = policy.rank(m);
    if rank == 0 {
        return if y.norm() == 0.0 { Ok(0.0) } else { Err(Error::Infeasible { residual: y.norm() }) };
    }
    let tol = FEAS_TOL * (1.0 + y.norm());
    let mut best: Option<f64> = None;
    for cols in subsets(n, rank) {
        let ms = m.select_columns(&cols);
        if policy.rank(&ms) < rank {
            continue;
        }
        let x = ms.clone().svd(true, true).solve(y, 0.0).map_err(|e| Error::Numerical(e.to_string()))?;
        if (&ms * &x - y).norm() > tol {
            continue;
        }
        let l1 = x.lp_norm(1);
        best = Some(best.map_or(l1, |b: f64| b.min(l1)));
    }
    best.ok_or(Error::Infeasible { residual: f64::NAN })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub systems: usize,
    pub rows: usize,
    pub cols: usize,
    pub max_tau_error: f64,
    pub max_support: usize,
    /// Solves whose support exceeds the rank.
    pub oversized: usize,
    /// Solves whose support columns are dependent.
    pub dependent: usize,
    pub passed: bool,
}

pub const ORACLE_TOL: f64 = 1e-7;

/// Compares the simplex solver against [`brute_force_min_l1`] on random Gaussian
/// systems with targets `y = M a`, `a` uniform-ish in `B_1^cols`.
pub fn l1_oracle_check(rows: usize, cols: usize, systems: usize, seed: u64) -> Result<OracleReport> {
    if rows == 0 || cols == 0 || cols > 20 {
        return Err(Error::precondition(format!("oracle check needs 1 ≤ cols ≤ 20, got {rows}×{cols}")));
    }
    let mut report = OracleReport {
        systems,
        rows,
        cols,
        max_tau_error: 0.0,
        max_support: 0,
        oversized: 0,
        dependent: 0,
        passed: true,
    };
    for k in 0..systems {
        let mut rng = stream_rng(derive_seed(seed, k as u64), 0);
        let m = crate::gauss_mc::gaussian_matrix(rows, cols, &mut rng);
        let y = &m * random_l1_point(cols, &mut rng);
        let sys = L1System::new(m.clone())?;
        let rep = sys.solve(&y)?;
        let exact = brute_force_min_l1(&m, &y)?;
        report.max_tau_error = report.max_tau_error.max((rep.tau - exact).abs());
        report.max_support = report.max_support.max(rep.support.len());
        if rep.support.len() > sys.rank() {
            report.oversized += 1;
        }
        if !rep.support.is_empty() && sys.policy().rank(&m.select_columns(&rep.support)) < rep.support.len() {
            report.dependent += 1;
        }
    }
    report.passed = report.max_tau_error <= ORACLE_TOL && report.oversized == 0 && report.dependent == 0;
    Ok(report)
}

/// A random point of `B_1^n` (uniform radius in [0,1], Dirichlet(1) direction, random signs).
pub fn random_l1_point(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = w.iter().sum();
    let radius: f64 = rng.random();
    for v in w.iter_mut() {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        *v = sign * radius * *v / total;
    }
    DVector::from_vec(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand_distr::StandardNormal;

    fn gaussian(p: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, 7);
        DMatrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn brute_force_examples() {
        let m = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_relative_eq!(brute_force_min_l1(&m, &DVector::from_vec(vec![1.0, 1.0])).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(brute_force_min_l1(&m, &DVector::from_vec(vec![1.0, -1.0])).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn oracle_agreement() {
        for (r, c) in [(3, 6), (4, 8), (2, 7)] {
            let rep = l1_oracle_check(r, c, 40, 11).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(rep.max_support <= r);
        }
    }

    #[test]
    fn identity_system() {
        let r = min_l1_representation(&DMatrix::identity(2, 2), &DVector::from_vec(vec![0.3, 0.2])).unwrap();
        assert_relative_eq!(r.coefficients[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(r.coefficients[1], 0.2, epsilon = 1e-15);
        assert_relative_eq!(r.tau, 0.5, epsilon = 1e-15);
        assert_eq!(r.support, vec![0, 1]);
    }

    #[test]
    fn duplicate_columns_collapse() {
        let m = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let r = min_l1_representation(&m, &DVector::from_vec(vec![0.5, 0.0])).unwrap();
        assert_relative_eq!(r.tau, 0.5, epsilon = 1e-12);
        assert_eq!(r.support.len(), 1);
    }

    #[test]
    fn negative_targets() {
        let r = min_l1_representation(&DMatrix::identity(3, 3), &DVector::from_vec(vec![-0.3, 0.0, 0.4])).unwrap();
        assert_eq!(r.coefficients, vec![-0.3, 0.0, 0.4]);
        assert_eq!(r.support, vec![0, 2]);
    }

    #[test]
    fn zero_target_has_empty_support() {
        let (inside, rep) = membership_l1(&gaussian(3, 5, 1), &DVector::zeros(3), 0.0).unwrap();
        assert!(inside);
        assert!(rep.support.is_empty());
        assert_eq!(rep.tau, 0.0);
    }

    #[test]
    fn membership_budget() {
        let (inside, rep) = membership_l1(&DMatrix::identity(2, 2), &DVector::from_vec(vec![1.0, 1.0]), 1.0).unwrap();
        assert!(!inside);
        assert_relative_eq!(rep.tau, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn outside_column_space_is_infeasible() {
        let m = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let err = min_l1_representation(&m, &DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn rank_deficient_supports_bounded_by_rank() {
        // rank-2 matrix in R^3 with 5 columns
        let basis = gaussian(3, 2, 3);
        let mix = gaussian(2, 5, 4);
        let m = &basis * &mix;
        let mut rng = stream_rng(5, 0);
        for _ in 0..100 {
            let a = random_l1_point(5, &mut rng);
            let r = min_l1_representation(&m, &(&m * &a)).unwrap();
            assert!(r.support.len() <= 2);
            assert!(r.tau <= a.lp_norm(1) + 1e-9);
        }
    }

    #[test]
    fn random_points_of_w_are_members() {
        let w = gaussian(4, 8, 8);
        let mut rng = stream_rng(9, 0);
        for _ in 0..100 {
            let a = random_l1_point(8, &mut rng);
            let (inside, _) = membership_l1(&w, &(&w * &a), 1.0).unwrap();
            assert!(inside);
        }
    }

    #[test]
    fn cover_examples() {
        let r = l1_decomposition_cover_check(&DMatrix::identity(3, 3), 100, 1).unwrap();
        assert_eq!(r.violations, 0);
        let r = l1_decomposition_cover_check(&gaussian(4, 8, 2), 500, 2).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_support <= 4);
        assert!(l1_decomposition_cover_check(&gaussian(13, 8, 2), 1, 2).is_err());
    }

    #[test]
    fn hull_oracle_square_and_general_agree() {
        let g = gaussian(3, 3, 12);
        let p = CrossPolytope::new(g.clone()).unwrap();
        let sq = HullOracle::new(&p).unwrap();
        let gen = HullOracle { scale: 1.0, kind: OracleKind::General(L1System::new(g).unwrap()) };
        let mut rng = stream_rng(13, 0);
        for _ in 0..200 {
            let y = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
            let a = sq.gauge(&y).unwrap();
            let b = gen.gauge(&y).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn vertex_and_independence(seed in 0u64..100_000, p in 2usize..5, extra in 1usize..5) {
            let n = p + extra;
            let m = gaussian(p, n, seed);
            let mut rng = stream_rng(seed, 1);
            let a = random_l1_point(n, &mut rng);
            let y = &m * &a;
            let r = min_l1_representation(&m, &y).unwrap();
            prop_assert!(r.support.len() <= p);
            prop_assert!(r.tau <= a.lp_norm(1) + 1e-9);
            prop_assert!(r.tau <= 1.0 + 1e-9);
            let sum: f64 = r.coefficients.iter().map(|v| v.abs()).sum();
            prop_assert!((sum - r.tau).abs() <= 1e-12);
            if !r.support.is_empty() {
                let mj = m.select_columns(&r.support);
                let gram = mj.tr_mul(&mj);
                let min_eig = gram.symmetric_eigenvalues().min();
                prop_assert!(min_eig > RankPolicy::default().threshold(&m));
            }
        }

        #[test]
        fn scale_equivariance(seed in 0u64..100_000, c in -5.0f64..5.0) {
            let m = gaussian(3, 6, seed);
            let mut rng = stream_rng(seed, 2);
            let y = &m * random_l1_point(6, &mut rng);
            let base = min_l1_representation(&m, &y).unwrap().tau;
            let scaled = min_l1_representation(&m, &(&y * c)).unwrap().tau;
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-8 * (1.0 + c.abs() * base));
        }
    }
}
