//! The parameter system `(ρ, Λ, s̃, r, s, L, ε)`, its constraint checks and
//! the two-regime balance behind the `4/7` exponent.
//!
//! Sizes are carried as `f64`: the constraints only start to hold for `n`
//! far beyond `u64`, and every integer below `2^53` is still exact.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, LN_2};

use crate::combinat::{binom_big, le_exp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Power of `log n` lost in `ρ`.
    #[serde(rename = "C")]
    pub c_log: f64,
    pub c0: f64,
    #[serde(rename = "C0")]
    pub c0_big: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C_star")]
    pub c_star: f64,
    pub c_suppr: f64,
    pub c_decay: f64,
    #[serde(rename = "C_EK")]
    pub c_ek: f64,
    #[serde(rename = "C_U")]
    pub c_u: f64,
}

impl Default for Constants {
    fn default() -> Self {
        let c_decay = LN_2 / 8.0;
        Constants {
            c_log: 2.0,
            c0: 1.0,
            c0_big: 1.0,
            c1: 4.0,
            c2: f64::max(4.0, 16.0 / c_decay),
            c3: 1.0,
            c_star: 1.0,
            c_suppr: 1.0,
            c_decay,
            c_ek: 1.0,
            c_u: 1.0,
        }
    }
}

impl Constants {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("constants: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub n: f64,
    pub m: f64,
    pub rho: f64,
    pub lambda: f64,
    pub s_tilde: f64,
    pub r: f64,
    pub s: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub epsilon: f64,
    pub constants: Constants,
    /// `ρ < 1`: below the regime where `log n ≤ Λ ≤ 2 log n`.
    pub below_regime: bool,
    /// `s = 0` after the floor.
    pub pre_asymptotic: bool,
}

impl ParamSet {
    /// `t = ⌈k/Λ⌉` and `r₀ = L/√t` for the Maurey step at level `k`.
    pub fn maurey_scale(&self, k: f64) -> (f64, f64) {
        let t = (k / self.lambda).ceil().max(1.0);
        (t, self.l / t.sqrt())
    }
}

pub fn derive_params(n: f64, constants: &Constants) -> Result<ParamSet> {
    let k = constants;
    if !(n >= 3.0 && n.is_finite()) {
        return Err(Error::invalid(format!("need n ≥ 3, got {n}")));
    }
    if !(k.c_log >= 2.0) || !(k.c0 > 0.0 && k.c0 <= 1.0) {
        return Err(Error::invalid(format!("need C ≥ 2 and 0 < c0 ≤ 1, got C={}, c0={}", k.c_log, k.c0)));
    }
    let n = n.round();
    let rho = k.c0 * n.powf(4.0 / 7.0) * n.ln().powf(-k.c_log);
    let lambda = (n * rho).ln();
    if !(lambda > 0.0) {
        return Err(Error::precondition(format!("log(nρ) = {lambda} is not positive")));
    }
    let s_tilde = (n.powf(6.0 / 7.0) * lambda.powf(2.0 / 7.0)).ceil();
    let r = (k.c2 * s_tilde * lambda).ceil();
    let s = (s_tilde * s_tilde / (k.c3 * n * lambda)).floor();
    let l = k.c0_big * (n / s * lambda).sqrt();
    Ok(ParamSet {
        n,
        m: n * n * n,
        rho,
        lambda,
        s_tilde,
        r,
        s,
        l,
        epsilon: 1.0 / (rho * n * n),
        constants: *k,
        below_regime: rho < 1.0,
        pre_asymptotic: s == 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs − lhs)/rhs`.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub rows: Vec<ConstraintRow>,
    pub all_hold: bool,
    pub l_direct: f64,
    /// `C₀√(2C₃)·nΛ/s̃`, valid once `s̃²/(C₃nΛ) ≥ 2`.
    pub l_upper: f64,
    pub l_consistent: bool,
    /// `A/2 ≤ s ≤ A` for `A = s̃²/(C₃nΛ)`; absent when `A < 2`.
    pub s_half_bound: Option<bool>,
    pub lambda_bounds: bool,
    pub tilde_s_bounds: bool,
}

impl ConstraintReport {
    pub fn row(&self, name: &str) -> Option<&ConstraintRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Relative slack for `lhs ≤ rhs`. With `C₃ = C_EK` the ratio clause is an
/// identity once the floor defining `s` is exact, and must not flip on the last bit.
const ROUNDING_TOL: f64 = 1e-12;

fn row(name: &str, lhs: f64, rhs: f64) -> ConstraintRow {
    ConstraintRow { name: name.to_string(), lhs, rhs, margin: (rhs - lhs) / rhs, holds: lhs <= rhs * (1.0 + ROUNDING_TOL) }
}

pub const CONSTRAINT_NAMES: [&str; 9] = [
    "ek_lower",
    "ek_upper",
    "ek_log",
    "ek_ratio",
    "s_range",
    "r_beats_comb",
    "scale",
    "rho_large_u",
    "s_ge_lambda",
];

pub fn check_constraints(p: &ParamSet) -> ConstraintReport {
    let k = &p.constants;
    let (n, st, lam) = (p.n, p.s_tilde, p.lambda);
    let mut rows = vec![
        row("ek_lower", 4.0 * st, p.r),
        row("ek_upper", p.r, (n - st) / 2.0),
        row("ek_log", n.ln().powi(2), st),
        if p.s >= 1.0 { row("ek_ratio", k.c_ek * lam, st * st / (n * p.s)) } else { row("ek_ratio", f64::INFINITY, 1.0) },
        row("s_range", p.s.max(1.0), n),
        row("r_beats_comb", 4.0 * st * (E * n / st).ln() + 16f64.ln(), k.c_decay * p.r),
        row("scale", 4.0 * p.rho * k.c_star * p.r.sqrt(), k.c_suppr * n),
        row("rho_large_u", k.c_u * p.rho * p.l * n * lam.sqrt() / (st * st), 1.0 / (4.0 * (2.0 * k.c1 + 1.0).exp())),
        row("s_ge_lambda", lam, st),
    ];
    if p.s < 1.0 {
        rows[4].holds = false;
    }
    let a = st * st / (k.c3 * n * lam);
    let l_upper = k.c0_big * (2.0 * k.c3).sqrt() * n * lam / st;
    let s_half_bound = (a >= 2.0).then(|| a / 2.0 <= p.s && p.s <= a);
    let base = n.powf(6.0 / 7.0) * lam.powf(2.0 / 7.0);
    ConstraintReport {
        all_hold: rows.iter().all(|r| r.holds),
        rows,
        l_direct: p.l,
        l_upper,
        l_consistent: a < 2.0 || p.l <= l_upper * (1.0 + 1e-12),
        s_half_bound,
        lambda_bounds: n.ln() <= lam && lam <= 2.0 * n.ln(),
        tilde_s_bounds: base <= st && st <= 2.0 * base,
    }
}

/// Exponents `(a, b)` of the large-U branch `s̃^a/(n^b Λ^{3/2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeUBranch {
    pub a: f64,
    pub b: f64,
}

impl LargeUBranch {
    pub const CURRENT: LargeUBranch = LargeUBranch { a: 3.0, b: 2.0 };
    /// Balances to the earlier exponent `5/9`, since `1 − (1+b)/(2a+1) = 5/9`.
    pub const LEGACY: LargeUBranch = LargeUBranch { a: 9.0 / 5.0, b: 47.0 / 45.0 };

    /// The `n`-exponent of the balanced `ρ`.
    pub fn exponent(&self) -> f64 {
        1.0 - (1.0 + self.b) / (2.0 * self.a + 1.0)
    }
}

pub fn rho_max_branch(n: f64, s_tilde: f64, lambda: f64, branch: LargeUBranch) -> f64 {
    let small_u = n / (s_tilde * lambda).sqrt();
    let large_u = s_tilde.powf(branch.a) / (n.powf(branch.b) * lambda.powf(1.5));
    small_u.min(large_u)
}

/// `min(n/√(s̃Λ), s̃³/(n²Λ^{3/2}))`.
pub fn rho_max(n: f64, s_tilde: f64, lambda: f64) -> f64 {
    rho_max_branch(n, s_tilde, lambda, LargeUBranch::CURRENT)
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub n: f64,
    pub lambda: f64,
    pub s_tilde: f64,
    pub rho: f64,
    /// `s̃^{a+1/2}/(n^{1+b}Λ)`, equal to one at the exact crossing.
    pub ratio: f64,
}

/// Maximizes the envelope over `s̃ ∈ [1, n²]` by golden section on `log s̃`.
///
/// The bracket reaches past `n` because the legacy branch crosses just above
/// `s̃ = n` at the bottom of the default grid.
pub fn balance(n: f64, lambda: f64, branch: LargeUBranch) -> Balance {
    let (log_st, log_rho) =
        golden_section_max(|x| rho_max_branch(n, x.exp(), lambda, branch).ln(), 0.0, 2.0 * n.ln(), 1e-13);
    let s_tilde = log_st.exp();
    Balance {
        n,
        lambda,
        s_tilde,
        rho: log_rho.exp(),
        ratio: s_tilde.powf(branch.a + 0.5) / (n.powf(1.0 + branch.b) * lambda),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaMode {
    /// `Λ = log(nρ*)` solved as a fixed point.
    SelfConsistent,
    Fixed(f64),
}

pub fn balance_point(n: f64, branch: LargeUBranch, mode: LambdaMode) -> Result<Balance> {
    match mode {
        LambdaMode::Fixed(lambda) => Ok(balance(n, lambda, branch)),
        LambdaMode::SelfConsistent => {
            let mut lambda = n.ln();
            for _ in 0..500 {
                let b = balance(n, lambda, branch);
                let next = (n * b.rho).ln();
                if (next - lambda).abs() <= 1e-14 * lambda {
                    return Ok(balance(n, next, branch));
                }
                lambda = next;
            }
            Err(Error::Convergence { iterations: 500, lower: lambda, upper: lambda })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub points: Vec<Balance>,
    /// OLS slope of `log ρ*` on `log n`.
    pub slope: Option<f64>,
    /// `n`-coefficient of the OLS fit `log ρ* ~ α log n + β log Λ + c`.
    pub exponent: Option<f64>,
    /// `β` of the same fit.
    pub log_exponent: Option<f64>,
}

fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return None;
    }
    svd.solve(y, 0.0).ok()
}

pub fn fit_points(points: &[Balance]) -> ExponentFit {
    let k = points.len();
    let y = DVector::from_iterator(k, points.iter().map(|p| p.rho.ln()));
    let slope = if k >= 2 {
        ols(&DMatrix::from_fn(k, 2, |i, j| if j == 0 { points[i].n.ln() } else { 1.0 }), &y).map(|c| c[0])
    } else {
        None
    };
    let two = if k >= 3 {
        ols(
            &DMatrix::from_fn(k, 3, |i, j| match j {
                0 => points[i].n.ln(),
                1 => points[i].lambda.ln(),
                _ => 1.0,
            }),
            &y,
        )
    } else {
        None
    };
    ExponentFit { points: points.to_vec(), slope, exponent: two.as_ref().map(|c| c[0]), log_exponent: two.map(|c| c[1]) }
}

pub fn exponent_fit(n_grid: &[f64], branch: LargeUBranch, mode: LambdaMode) -> Result<ExponentFit> {
    let points = n_grid.par_iter().map(|&n| balance_point(n, branch, mode)).collect::<Result<Vec<_>>>()?;
    Ok(fit_points(&points))
}

pub const DEFAULT_GRID: [f64; 5] = [1e4, 1e5, 1e6, 1e7, 1e8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub balance: Balance,
    pub constraints: Option<ConstraintReport>,
    pub slope: Option<f64>,
    pub exponent: Option<f64>,
    pub legacy: Option<Balance>,
    pub legacy_exponent: Option<f64>,
}

/// One row per grid point; fits in each row use the points up to that row.
pub fn sweep(n_grid: &[f64], constants: &Constants, legacy: bool) -> Result<Vec<SweepRow>> {
    let current = exponent_fit(n_grid, LargeUBranch::CURRENT, LambdaMode::SelfConsistent)?;
    let old = if legacy { Some(exponent_fit(n_grid, LargeUBranch::LEGACY, LambdaMode::SelfConsistent)?) } else { None };
    let mut rows = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let partial = fit_points(&current.points[..=i]);
        let constraints = derive_params(n, constants).ok().map(|p| check_constraints(&p));
        let (legacy_point, legacy_exponent) = match &old {
            Some(f) => (Some(f.points[i]), fit_points(&f.points[..=i]).exponent),
            None => (None, None),
        };
        rows.push(SweepRow {
            balance: current.points[i],
            constraints,
            slope: partial.slope,
            exponent: partial.exponent,
            legacy: legacy_point,
            legacy_exponent,
        });
    }
    Ok(rows)
}

fn passes(n: f64, constants: &Constants) -> bool {
    derive_params(n, constants).is_ok_and(|p| !p.below_regime && !p.pre_asymptotic && check_constraints(&p).all_hold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub n: f64,
    /// Every later grid point up to the end of the scan passes as well.
    pub stable: bool,
}

/// First `n = 10^{j/per_decade}` at which every constraint holds, refined by
/// bisection against the previous grid point.
pub fn smallest_passing_n(constants: &Constants, max_exp: u32, per_decade: u32) -> Option<ScanResult> {
    let grid: Vec<f64> = (0..=max_exp * per_decade).map(|j| 10f64.powf(j as f64 / per_decade as f64).max(3.0)).collect();
    let first = grid.iter().position(|&n| passes(n, constants))?;
    let stable = grid[first..].iter().all(|&n| passes(n, constants));
    let (mut lo, mut hi) = (if first == 0 { 3.0 } else { grid[first - 1] }, grid[first]);
    if first == 0 {
        return Some(ScanResult { n: hi, stable });
    }
    for _ in 0..200 {
        let mid = (0.5 * (lo + hi)).round();
        if mid <= lo || mid >= hi {
            break;
        }
        if passes(mid, constants) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(ScanResult { n: hi, stable })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub cases: usize,
    /// `(n, Λ, k)` triples with `binom(n, ⌈k/Λ⌉) > e^{4k}`.
    pub failures: Vec<(u64, f64, u64)>,
    pub passed: bool,
}

/// Exact check of `binom(n, ⌈k/Λ⌉) ≤ e^{4k}` for integer `Λ ≤ k ≤ n`.
pub fn entropy_tk_check(n_grid: &[u64], lambda_grid: &[f64]) -> Result<EntropyReport> {
    let mut cases = 0;
    let mut failures = Vec::new();
    let one = BigUint::from(1u32);
    for &n in n_grid {
        if n > 60 {
            return Err(Error::precondition(format!("exact binomials are limited to n ≤ 60, got {n}")));
        }
        for &lambda in lambda_grid {
            if !(lambda >= 1.0) {
                return Err(Error::invalid(format!("Λ must be at least 1, got {lambda}")));
            }
            for k in (lambda.ceil() as u64)..=n {
                let t = (k as f64 / lambda).ceil() as u64;
                let ok = le_exp(&binom_big(n, t), &one, 4 * k)
                    .ok_or_else(|| Error::Numerical(format!("undecided comparison at n={n}, k={k}")))?;
                cases += 1;
                if !ok {
                    failures.push((n, lambda, k));
                }
            }
        }
    }
    Ok(EntropyReport { cases, passed: failures.is_empty(), failures })
}
