//! Gluskin polytopes, sparse coefficient matrices and the conditioning
//! experiments built on them.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::ln_binom;
use crate::error::{Error, Result};
use crate::gauss_mc::{fill_gaussian, gaussian_blocks, gaussian_matrix, mc_measure, run_blocks, MCEstimate};
use crate::geometry::{CrossPolytope, RankPolicy};
use crate::optim::nelder_mead;
use crate::rng::{derive_seed, stream_rng};
use crate::sparse_l1::{random_l1_point, HullOracle, L1System};

const L1_TOL: f64 = 1e-12;
const MESH_SNAP: f64 = 1e-12;

/// Constant in the support-count bound `Σ_{r≤n} binom(m, r) ≤ (Cm/n)^n`.
pub const NET_CONSTANT: f64 = 6.0;

/// A Gaussian matrix `Γ ∈ ℝ^{n×m}` and its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gluskin {
    pub gamma: DMatrix<f64>,
    pub seed: u64,
}

impl Gluskin {
    /// `G_m = Γ(B_1^m) = conv{±g_j}`.
    pub fn polytope(&self) -> CrossPolytope {
        CrossPolytope::new(self.gamma.clone()).expect("Gaussian entries are finite")
    }
}

pub fn gen_gluskin(n: usize, m: usize, seed: u64) -> Result<Gluskin> {
    if n == 0 || m < n {
        return Err(Error::invalid(format!("need 1 ≤ n ≤ m, got n={n}, m={m}")));
    }
    let mut rng = stream_rng(seed, 0);
    Ok(Gluskin { gamma: gaussian_matrix(n, m, &mut rng), seed })
}

/// One column of a coefficient matrix, as sorted `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseColumn {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseColumn {
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.retain(|&(_, v)| v != 0.0);
        pairs.sort_by_key(|&(i, _)| i);
        let (indices, values) = pairs.into_iter().unzip();
        SparseColumn { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// `A ∈ ℝ^{m×n}` with columns in the unit ℓ1 ball and supports of size at most `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    m: usize,
    n: usize,
    columns: Vec<SparseColumn>,
    mesh: Option<f64>,
}

impl CoefficientMatrix {
    pub fn new(m: usize, n: usize, columns: Vec<SparseColumn>) -> Result<Self> {
        if columns.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: columns.len() });
        }
        for (c, col) in columns.iter().enumerate() {
            if col.indices.len() != col.values.len() {
                return Err(Error::invalid(format!("column {c}: index and value counts differ")));
            }
            if col.indices.windows(2).any(|w| w[0] >= w[1]) || col.indices.last().is_some_and(|&i| i >= m) {
                return Err(Error::invalid(format!("column {c}: indices must be increasing and below m = {m}")));
            }
            if col.nnz() > n {
                return Err(Error::invalid(format!("column {c}: support {} exceeds n = {n}", col.nnz())));
            }
            if col.l1_norm() > 1.0 + L1_TOL {
                return Err(Error::invalid(format!("column {c}: ℓ1 norm {} exceeds 1", col.l1_norm())));
            }
        }
        Ok(CoefficientMatrix { m, n, columns, mesh: None })
    }

    /// Dense input; zero entries are dropped.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let columns = (0..a.ncols())
            .map(|c| SparseColumn::from_pairs(a.column(c).iter().copied().enumerate().collect()))
            .collect();
        Self::new(a.nrows(), a.ncols(), columns)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[SparseColumn] {
        &self.columns
    }

    pub fn mesh(&self) -> Option<f64> {
        self.mesh
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.m, self.n);
        for (c, col) in self.columns.iter().enumerate() {
            for (i, v) in col.iter() {
                a[(i, c)] = v;
            }
        }
        a
    }

    /// `S(A)`: the union of the column supports, ascending.
    pub fn exposed_set(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.columns.iter().flat_map(|c| c.indices.iter().copied()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Columns with uniformly random supports of size `support` and
/// Gaussian directions normalized to unit ℓ1 norm.
pub fn random_coefficient_matrix(m: usize, n: usize, support: usize, rng: &mut impl Rng) -> Result<CoefficientMatrix> {
    if support == 0 || support > n.min(m) {
        return Err(Error::invalid(format!("support size must lie in 1..={}", n.min(m))));
    }
    let columns = (0..n)
        .map(|_| {
            let idx = sample(rng, m, support).into_vec();
            let vals: Vec<f64> = (0..support).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm: f64 = vals.iter().map(|v| v.abs()).sum();
            SparseColumn::from_pairs(idx.into_iter().zip(vals.into_iter().map(|v| v / norm)).collect())
        })
        .collect();
    CoefficientMatrix::new(m, n, columns)
}

/// `q_ε(t) = ε·sgn(t)·⌊|t|/ε⌋`, with quotients within `1e-12` of an integer snapped to it.
pub fn quantize_value(t: f64, eps: f64) -> f64 {
    let k = (t.abs() / eps + MESH_SNAP).floor();
    t.signum() * k * eps
}

pub fn quantize(a: &CoefficientMatrix, eps: f64) -> Result<CoefficientMatrix> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("ε must lie in (0, 1], got {eps}")));
    }
    let columns = a
        .columns
        .iter()
        .map(|c| SparseColumn::from_pairs(c.iter().map(|(i, v)| (i, quantize_value(v, eps))).collect()))
        .collect();
    let mut out = CoefficientMatrix::new(a.m, a.n, columns)?;
    out.mesh = Some(eps);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KUSplit {
    pub k_part: CoefficientMatrix,
    pub u_part: CoefficientMatrix,
    pub s: usize,
}

impl KUSplit {
    /// `F(A) = [A^(K) A^(U)] ∈ ℝ^{m×2n}`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (k, u) = (self.k_part.to_dense(), self.u_part.to_dense());
        let mut f = DMatrix::zeros(k.nrows(), 2 * k.ncols());
        f.columns_mut(0, k.ncols()).copy_from(&k);
        f.columns_mut(k.ncols(), k.ncols()).copy_from(&u);
        f
    }
}

/// Splits every column at the threshold `1/s`: entries with `|a_j| ≥ 1/s` go to K.
pub fn ku_split(a: &CoefficientMatrix, s: usize) -> Result<KUSplit> {
    if s == 0 || s > a.n {
        return Err(Error::invalid(format!("need 1 ≤ s ≤ n, got s={s}, n={}", a.n)));
    }
    let thr = 1.0 / s as f64;
    let (mut k, mut u) = (Vec::with_capacity(a.n), Vec::with_capacity(a.n));
    for col in &a.columns {
        let (big, small): (Vec<_>, Vec<_>) = col.iter().partition(|&(_, v)| v.abs() >= thr);
        k.push(SparseColumn::from_pairs(big));
        u.push(SparseColumn::from_pairs(small));
    }
    let mut k_part = CoefficientMatrix::new(a.m, a.n, k)?;
    let mut u_part = CoefficientMatrix::new(a.m, a.n, u)?;
    k_part.mesh = a.mesh;
    u_part.mesh = a.mesh;
    Ok(KUSplit { k_part, u_part, s })
}

/// `n²·log(Cm/(nε))`, the log-size of the quantized coefficient net.
pub fn net_log_cardinality(n: usize, m: usize, eps: f64) -> f64 {
    let n = n as f64;
    n * n * (NET_CONSTANT * m as f64 / (n * eps)).ln()
}

/// `n·log(Cm/ε)`, the log-size of the discrete U-coefficient class.
pub fn u_net_log_cardinality(n: usize, m: usize, eps: f64) -> f64 {
    n as f64 * (NET_CONSTANT * m as f64 / eps).ln()
}

/// Column-by-column product summing over rows in increasing order.
fn naive_product(gamma: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(gamma.nrows(), a.ncols(), |i, j| {
        let mut s = 0.0;
        for k in 0..a.nrows() {
            s += gamma[(i, k)] * a[(k, j)];
        }
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposedRealization {
    pub support: Vec<usize>,
    pub gamma_s: DMatrix<f64>,
    pub a_s: DMatrix<f64>,
    /// `N(A) = m − |S|`, the number of fresh columns.
    pub n_fresh: usize,
}

impl ExposedRealization {
    /// `𝒦_A(ρ; ω) = 2ρ Γ_S A_S(B_1^n)`.
    pub fn target(&self, rho: f64) -> Result<CrossPolytope> {
        let g = naive_product(&self.gamma_s, &self.a_s);
        if g.ncols() == 0 {
            return CrossPolytope::new(DMatrix::zeros(self.gamma_s.nrows(), 1))?.with_scale(2.0 * rho);
        }
        CrossPolytope::new(g)?.with_scale(2.0 * rho)
    }
}

/// Restricts `Γ` and `A` to the exposed rows, checking `ΓA = Γ_S A_S` bit for bit.
pub fn exposed(a: &CoefficientMatrix, gamma: &DMatrix<f64>) -> Result<ExposedRealization> {
    if gamma.ncols() != a.m || gamma.nrows() != a.n {
        return Err(Error::invalid(format!(
            "Γ is {}×{} but A needs {}×{}",
            gamma.nrows(),
            gamma.ncols(),
            a.n,
            a.m
        )));
    }
    let support = a.exposed_set();
    if support.len() > a.n * a.n {
        return Err(Error::Contract(format!("|S| = {} exceeds n² = {}", support.len(), a.n * a.n)));
    }
    let dense = a.to_dense();
    let gamma_s = gamma.select_columns(&support);
    let a_s = dense.select_rows(&support);
    let full = naive_product(gamma, &dense);
    let restricted = naive_product(&gamma_s, &a_s);
    if full.iter().zip(restricted.iter()).any(|(x, y)| x.to_bits() != y.to_bits() && x != y) {
        return Err(Error::Contract("ΓA differs from Γ_S A_S".into()));
    }
    Ok(ExposedRealization { n_fresh: a.m - support.len(), support, gamma_s, a_s })
}

/// `1{exposed columns inside} · γ^N`.
pub fn powering_rhs(exposed_inside: bool, gamma: f64, n_fresh: usize) -> f64 {
    if exposed_inside {
        gamma.powi(n_fresh as i32)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoweringReport {
    pub n_fresh: usize,
    pub exposed_inside: bool,
    pub lhs: MCEstimate,
    pub gamma_hat: MCEstimate,
    pub rhs: f64,
    pub rhs_low: f64,
    pub rhs_high: f64,
    pub agree: bool,
}

/// Conditional containment probability of `G_m` in `2ρΓA(B_1^n)` versus the powered measure.
///
/// `Γ_S` is fixed by `seed`. The left side redraws the fresh columns and tests
/// every column of the full matrix against the body built from the full `ΓA`;
/// the right side powers an independent estimate of `γ_n(𝒦_A)`.
pub fn powering_check(
    a: &CoefficientMatrix,
    rho: f64,
    outer_trials: u64,
    inner_samples: u64,
    seed: u64,
) -> Result<PoweringReport> {
    let (n, m) = (a.n, a.m);
    if n > 4 || m > 10 {
        return Err(Error::precondition(format!("powering check needs n ≤ 4 and m ≤ 10, got n={n}, m={m}")));
    }
    if !(rho >= 1.0) {
        return Err(Error::invalid("ρ must be at least 1"));
    }
    let g = gen_gluskin(n, m, seed)?;
    let ex = exposed(a, &g.gamma)?;
    let target = ex.target(rho)?;
    let oracle = HullOracle::new(&target)?;
    let mut exposed_inside = true;
    for k in 0..ex.support.len() {
        exposed_inside &= oracle.contains(&ex.gamma_s.column(k).into_owned())?;
    }
    let fresh: Vec<usize> = (0..m).filter(|j| ex.support.binary_search(j).is_err()).collect();
    let dense = a.to_dense();
    let blocks = gaussian_blocks(n * fresh.len(), outer_trials, derive_seed(seed, 1), || 0u64, |hits, z, _| {
        let mut gamma = g.gamma.clone();
        for (k, &j) in fresh.iter().enumerate() {
            gamma.column_mut(j).copy_from_slice(&z[k * n..(k + 1) * n]);
        }
        let body = CrossPolytope::new(naive_product(&gamma, &dense))?.with_scale(2.0 * rho)?;
        let inside = HullOracle::new(&body)?;
        for j in 0..m {
            if !inside.contains(&gamma.column(j).into_owned())? {
                return Ok(());
            }
        }
        *hits += 1;
        Ok(())
    })?;
    let lhs = MCEstimate::from_counts(blocks.into_iter().sum(), outer_trials);
    let gamma_hat = mc_measure(|x| oracle.contains_slice(x), n, inner_samples, derive_seed(seed, 2))?;
    let rhs = powering_rhs(exposed_inside, gamma_hat.point, ex.n_fresh);
    let rhs_low = powering_rhs(exposed_inside, gamma_hat.ci_low, ex.n_fresh);
    let rhs_high = powering_rhs(exposed_inside, gamma_hat.ci_high, ex.n_fresh);
    Ok(PoweringReport {
        n_fresh: ex.n_fresh,
        exposed_inside,
        lhs,
        gamma_hat,
        rhs,
        rhs_low,
        rhs_high,
        agree: lhs.ci_low <= rhs_high && rhs_low <= lhs.ci_high,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub samples: usize,
    pub violations: usize,
    pub rank: usize,
    pub max_gauge: f64,
    /// Count of certified points by `k = |I ∩ U-indices|`.
    pub k_histogram: Vec<usize>,
}

/// Samples `y = 2ρΓ_S A_S ξ` with `‖ξ‖₁ ≤ 1` and certifies `y ∈ 4ρ 𝒫(A; ω)`.
///
/// The certificate is the minimal-ℓ1 support `J` of `y/(4ρ)` over
/// `W = Γ_S F_S(A)`, extended to an `n`-subset `I`, followed by an independent
/// membership solve in `conv{±w_i : i ∈ I}`.
pub fn bridge_check(
    a: &CoefficientMatrix,
    gamma: &DMatrix<f64>,
    rho: f64,
    s: usize,
    samples: usize,
    seed: u64,
) -> Result<BridgeReport> {
    let n = a.n;
    if n > 6 {
        return Err(Error::precondition(format!("bridge check needs n ≤ 6, got {n}")));
    }
    if !(rho > 0.0) {
        return Err(Error::invalid("ρ must be positive"));
    }
    let ex = exposed(a, gamma)?;
    let split = ku_split(a, s)?;
    let f = split.stacked().select_rows(&ex.support);
    let w = naive_product(&ex.gamma_s, &f);
    let k_body = naive_product(&ex.gamma_s, &ex.a_s);
    let system = L1System::new(w.clone())?;
    let rank = system.rank();
    let policy = RankPolicy::default();
    let results: Vec<Result<(bool, f64, usize)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(derive_seed(seed, i as u64), 0);
            let xi = random_l1_point(n, &mut rng);
            let y = &k_body * xi * (2.0 * rho);
            let target = &y / (4.0 * rho);
            let rep = system.solve(&target)?;
            let mut ok = rep.tau <= 1.0 + 1e-9 && rep.support.len() <= rank;
            if !rep.support.is_empty() {
                ok &= policy.rank(&w.select_columns(&rep.support)) == rep.support.len();
            }
            let mut index = rep.support.clone();
            for j in 0..2 * n {
                if index.len() == n {
                    break;
                }
                if !index.contains(&j) {
                    index.push(j);
                }
            }
            index.sort_unstable();
            let sub = w.select_columns(&index);
            let gauge = if sub.iter().all(|&v| v == 0.0) {
                if target.iter().all(|&v| v == 0.0) { 0.0 } else { f64::INFINITY }
            } else {
                match L1System::new(sub)?.solve(&target) {
                    Ok(r) => r.tau,
                    Err(Error::Infeasible { .. }) => f64::INFINITY,
                    Err(e) => return Err(e),
                }
            };
            ok &= gauge <= 1.0 + 1e-9;
            Ok((ok, gauge, index.iter().filter(|&&j| j >= n).count()))
        })
        .collect();
    let mut report = BridgeReport { samples, violations: 0, rank, max_gauge: 0.0, k_histogram: vec![0; n + 1] };
    for r in results {
        let (ok, gauge, k) = r?;
        report.max_gauge = report.max_gauge.max(gauge);
        if ok {
            report.k_histogram[k] += 1;
        } else {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `L = C₀·√((n/s)·log(nρ))`.
pub fn u_norm_threshold(n: usize, s: usize, rho: f64, c0: f64) -> f64 {
    c0 * ((n as f64 / s as f64) * (n as f64 * rho).ln()).sqrt()
}

/// A random member of the discrete U-class: support uniform among subsets of
/// size at most `n`, values uniform in the ℓ2 ball of radius `1/√s`, then
/// rounded toward zero onto `εℤ`.
pub fn sample_u(n: usize, m: usize, s: usize, eps: f64, rng: &mut impl Rng) -> SparseColumn {
    let logw: Vec<f64> = (0..=n.min(m)).map(|r| ln_binom(m as f64, r as f64)).collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let mut pick = rng.random::<f64>() * w.iter().sum::<f64>();
    let mut r = w.len() - 1;
    for (k, wk) in w.iter().enumerate() {
        if pick < *wk {
            r = k;
            break;
        }
        pick -= wk;
    }
    if r == 0 {
        return SparseColumn::default();
    }
    let idx = sample(rng, m, r).into_vec();
    let mut v = vec![0.0; r];
    fill_gaussian(rng, &mut v);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = rng.random::<f64>().powf(1.0 / r as f64) / (s as f64).sqrt();
    SparseColumn::from_pairs(idx.into_iter().zip(v.into_iter().map(|x| quantize_value(x / norm * radius, eps))).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UNormReport {
    pub threshold: f64,
    pub violations: MCEstimate,
    pub bound: f64,
    pub max_ratio: f64,
    pub holds: bool,
}

/// Fraction of `(Γ, u)` draws with `‖Γu‖₂ > L`, against `exp(−n log(nρ)/4)`.
///
/// Only the columns of `Γ` indexed by `supp(u)` are drawn; the rest never enter `Γu`.
pub fn u_norm_event_check(
    n: usize,
    m: usize,
    s: usize,
    eps: f64,
    rho: f64,
    c0: f64,
    trials: u64,
    seed: u64,
) -> Result<UNormReport> {
    if n == 0 || n > 20 || m < n {
        return Err(Error::precondition(format!("need 1 ≤ n ≤ 20 and m ≥ n, got n={n}, m={m}")));
    }
    if s == 0 || !(eps > 0.0 && eps <= 1.0) || !(rho >= 1.0) {
        return Err(Error::invalid("need s ≥ 1, ε ∈ (0, 1] and ρ ≥ 1"));
    }
    let l = u_norm_threshold(n, s, rho, c0);
    let blocks = run_blocks(trials, seed, || (0u64, 0.0f64, vec![0.0; n]), |(hits, ratio, g), rng, _| {
        let u = sample_u(n, m, s, eps, rng);
        let mut y = vec![0.0; n];
        for (_, v) in u.iter() {
            fill_gaussian(rng, g);
            for (yi, gi) in y.iter_mut().zip(g.iter()) {
                *yi += v * gi;
            }
        }
        let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        *ratio = ratio.max(norm / l);
        *hits += (norm > l) as u64;
        Ok(())
    })?;
    let (hits, max_ratio) = blocks.iter().fold((0, 0.0f64), |(h, r), b| (h + b.0, r.max(b.1)));
    let violations = MCEstimate::from_counts(hits, trials);
    let bound = (-(n as f64) * (n as f64 * rho).ln() / 4.0).exp();
    Ok(UNormReport { threshold: l, violations, bound, max_ratio, holds: violations.point <= bound + 3.0 * violations.std_error() })
}

/// Frequency of `‖Γu‖₂ > l` for one fixed coefficient vector.
pub fn fixed_u_violation_rate(n: usize, u: &SparseColumn, l: f64, trials: u64, seed: u64) -> Result<MCEstimate> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let blocks = run_blocks(trials, seed, || (0u64, vec![0.0; n], vec![0.0; n]), |(hits, y, g), rng, _| {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (_, v) in u.iter() {
            fill_gaussian(rng, g);
            for (yi, gi) in y.iter_mut().zip(g.iter()) {
                *yi += v * gi;
            }
        }
        *hits += (y.iter().map(|x| x * x).sum::<f64>().sqrt() > l) as u64;
        Ok(())
    })?;
    Ok(MCEstimate::from_counts(blocks.iter().map(|b| b.0).sum(), trials))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmEstimate {
    /// Best `ρ(T)` found: an upper bound on the distance to `B_1^n`, with no optimality claim.
    pub rho: f64,
    pub witness: DMatrix<f64>,
    pub restarts: usize,
    pub evaluations: usize,
    pub heuristic: bool,
}

/// `ρ(T) = max_j ‖Tg_j‖₁ · max_i ‖e_i‖_{T(K)}`; infinite for (near-)singular `T`.
pub fn bm_objective(g: &DMatrix<f64>, system: &L1System, t: &DMatrix<f64>) -> Result<f64> {
    let n = t.nrows();
    let Some(tinv) = t.clone().try_inverse() else {
        return Ok(f64::INFINITY);
    };
    let cond = t.norm() * tinv.norm();
    if !cond.is_finite() || cond > 1e12 {
        return Ok(f64::INFINITY);
    }
    let outer = (t * g).column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max);
    let mut inner = 0.0f64;
    for i in 0..n {
        let rhs: DVector<f64> = tinv.column(i).into_owned();
        inner = inner.max(system.solve(&rhs)?.tau);
    }
    Ok(outer * inner)
}

fn independent_subset(g: &DMatrix<f64>, order: &[usize]) -> Option<Vec<usize>> {
    let n = g.nrows();
    let policy = RankPolicy::default();
    let mut picked: Vec<usize> = Vec::with_capacity(n);
    for &j in order {
        let mut trial = picked.clone();
        trial.push(j);
        if policy.rank(&g.select_columns(&trial)) == trial.len() {
            picked = trial;
            if picked.len() == n {
                return Some(picked);
            }
        }
    }
    None
}

/// Local search over `T = (I + E)·T₀` with `T₀ = G_I⁻¹` for an `n`-subset `I` of generators.
///
/// Restart 0 takes the first independent subset in index order; later restarts
/// use random subsets and a random initial `E`.
pub fn bm_estimate(k: &CrossPolytope, restarts: usize, seed: u64) -> Result<BmEstimate> {
    let n = k.dim();
    if n > 4 {
        return Err(Error::precondition(format!("bm_estimate needs dim ≤ 4, got {n}")));
    }
    if restarts == 0 {
        return Err(Error::invalid("need at least one restart"));
    }
    let g = k.scaled_generators();
    if RankPolicy::default().rank(&g) < n {
        return Err(Error::Degenerate("the body is not full-dimensional".into()));
    }
    let system = L1System::new(g.clone())?;
    let runs: Vec<Result<(f64, DMatrix<f64>, usize)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(derive_seed(seed, r as u64), 0);
            let mut order: Vec<usize> = (0..g.ncols()).collect();
            let mut e0 = vec![0.0; n * n];
            if r > 0 {
                order = sample(&mut rng, g.ncols(), g.ncols()).into_vec();
                fill_gaussian(&mut rng, &mut e0);
                e0.iter_mut().for_each(|v| *v *= 0.05);
            }
            let subset = independent_subset(&g, &order).ok_or_else(|| Error::Degenerate("no independent subset".into()))?;
            let t0 = g
                .select_columns(&subset)
                .try_inverse()
                .ok_or_else(|| Error::Degenerate("generator subset is singular".into()))?;
            let build = |e: &[f64]| (DMatrix::identity(n, n) + DMatrix::from_column_slice(n, n, e)) * &t0;
            let mut failure = None;
            let best = nelder_mead(
                |e| match bm_objective(&g, &system, &build(e)) {
                    Ok(v) => v.ln(),
                    Err(err) => {
                        failure.get_or_insert(err);
                        f64::INFINITY
                    }
                },
                &e0,
                0.1,
                150 * n * n,
                1e-10,
            );
            if let Some(err) = failure {
                return Err(err);
            }
            Ok((best.value.exp(), build(&best.x), best.evaluations))
        })
        .collect();
    let mut out: Option<BmEstimate> = None;
    let mut evaluations = 0;
    for run in runs {
        let (rho, t, evals) = run?;
        evaluations += evals;
        if out.as_ref().is_none_or(|b| rho < b.rho) {
            out = Some(BmEstimate { rho, witness: t, restarts, evaluations: 0, heuristic: true });
        }
    }
    let mut best = out.expect("at least one restart");
    best.evaluations = evaluations;
    Ok(best)
}
