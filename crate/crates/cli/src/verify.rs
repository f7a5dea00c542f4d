//! Dispatch from lemma ids to the library checks, with per-lemma defaults.

use clap::{Args, ValueEnum};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use crosspoly::combinat::binom_bound_holds;
use crosspoly::gauss_mc::{
    chi_square_tail_check, crosspoly_measure_check, det_shrink_check, gaussian_matrix, gaussian_norm_tail_check,
    projection_monotonicity_check, thickening_check,
};
use crosspoly::geometry::{l1_ball_volume_exact, minkowski_absorb_check, project_polytope, random_subspace, CrossPolytope};
use crosspoly::gluskin::{bridge_check, gen_gluskin, powering_check, random_coefficient_matrix, u_norm_event_check};
use crosspoly::maurey::{maurey_draw, maurey_sparsify, random_unit_points, union_inclusion_check, DEFAULT_RETRY_BUDGET};
use crosspoly::params::entropy_tk_check;
use crosspoly::rng::{derive_seed, stream_rng};
use crosspoly::sparse_l1::{l1_decomposition_cover_check, l1_oracle_check, random_l1_point, HullOracle};
use crosspoly::suppression::{
    block_tail_experiment, calibrate_block_tail_constant, summarize_block_tail, verify_suppression_inequality,
    BlockTailConfig,
};
use crosspoly::Error;

use crate::{CliError, Global, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    #[value(name = "l1-sparse")]
    L1Sparse,
    #[value(name = "l1-decomp")]
    L1Decomp,
    Maurey,
    MaureyUnion,
    Suppression,
    BlockTail,
    DetShrink,
    CrosspolyMeasure,
    Thickening,
    GaussTail,
    #[value(name = "chi2-tail")]
    Chi2Tail,
    ProjMonotone,
    Absorb,
    Bridge,
    Powering,
    UNorm,
    EntropyTk,
    Binom,
}

impl Lemma {
    pub fn id(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

/// Lemma-specific knobs; unset values fall back to each lemma's defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Knobs {
    /// Number of K-generators (suppression, block-tail).
    #[arg(long)]
    pub p: Option<usize>,
    /// Suppressed block size.
    #[arg(long)]
    pub r: Option<usize>,
    /// Scale or sparsity parameter t.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Multiple of L/√t accepted by Maurey sparsification.
    #[arg(long)]
    pub slack: Option<f64>,
    /// Subset size, tail block size or column support, depending on the lemma.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Gram–Schmidt tail bound h (det-shrink).
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Threshold s of the K/U split.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub c0: Option<f64>,
}

pub fn run(lemma: Lemma, kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    match lemma {
        Lemma::L1Sparse => l1_sparse(g, seed),
        Lemma::L1Decomp => l1_decomp(g, seed),
        Lemma::Maurey => maurey(kn, g, seed),
        Lemma::MaureyUnion => maurey_union(kn, g, seed),
        Lemma::Suppression => suppression(kn, g, seed),
        Lemma::BlockTail => block_tail(kn, g, seed),
        Lemma::DetShrink => det_shrink(kn, g, seed),
        Lemma::CrosspolyMeasure => crosspoly_measure(g, seed),
        Lemma::Thickening => thickening(kn, g, seed),
        Lemma::GaussTail => gauss_tail(kn, g, seed),
        Lemma::Chi2Tail => chi2_tail(kn, g, seed),
        Lemma::ProjMonotone => proj_monotone(kn, g, seed),
        Lemma::Absorb => absorb(kn, g, seed),
        Lemma::Bridge => bridge(kn, g, seed),
        Lemma::Powering => powering(kn, g, seed),
        Lemma::UNorm => u_norm(kn, g, seed),
        Lemma::EntropyTk => entropy_tk(kn, g),
        Lemma::Binom => binom(g),
    }
}

fn outcome(config: Value, passed: bool, result: Value) -> Result<Outcome, CliError> {
    Ok(Outcome { config, passed, result, table: None })
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn integer(v: Option<f64>, default: usize, name: &str) -> Result<usize, CliError> {
    match v {
        None => Ok(default),
        Some(x) if x >= 0.0 && x.fract() == 0.0 => Ok(x as usize),
        Some(x) => Err(CliError::usage(format!("--{name} must be a nonnegative integer, got {x}"))),
    }
}

fn samples(g: &Global, default: u64) -> u64 {
    g.samples.unwrap_or(default)
}

fn trials(g: &Global, default: u64) -> usize {
    g.trials.unwrap_or(default) as usize
}

fn random_poly(d: usize, ell: usize, seed: u64) -> Result<CrossPolytope, CliError> {
    Ok(CrossPolytope::new(gaussian_matrix(d, ell, &mut stream_rng(seed, 1)))?)
}

fn l1_sparse(g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let (rows, cols, systems) = (g.dim(3)?, g.cols(6), trials(g, 200));
    let rep = l1_oracle_check(rows, cols, systems, seed)?;
    outcome(json!({ "rows": rows, "cols": cols, "systems": systems }), rep.passed, to_json(&rep))
}

fn l1_decomp(g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let (rows, cols, n) = (g.dim(4)?, g.cols(8), samples(g, 500) as usize);
    let m = gaussian_matrix(rows, cols, &mut stream_rng(seed, 1));
    let rep = l1_decomposition_cover_check(&m, n, seed)?;
    let passed = rep.violations == 0 && rep.max_support <= rep.rank;
    outcome(json!({ "rows": rows, "cols": cols, "samples": n }), passed, to_json(&rep))
}

/// Seeded trials in `ℝ^d` with `N` unit points and a random `a ∈ B_1^N`. The mean
/// of `‖Z − y‖²` uses the first draw of each trial, before any retry.
fn maurey(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let (d, big_n) = (g.dim(30)?, g.cols(100));
    let t = integer(kn.t, 25, "t")?;
    let slack = kn.slack.unwrap_or(2.0);
    let count = trials(g, 1000);
    if t == 0 || big_n == 0 || d == 0 {
        return Err(CliError::usage("maurey needs positive d, N and t"));
    }
    let runs: Vec<Result<(f64, Result<usize, f64>), Error>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let mut rng = stream_rng(s, 1);
            let points = random_unit_points(d, big_n, &mut rng);
            let a: Vec<f64> = random_l1_point(big_n, &mut rng).iter().copied().collect();
            let y = &points * nalgebra::DVector::from_column_slice(&a);
            let (z, _) = maurey_draw(&points, &a, t, &mut stream_rng(s, 0));
            let first = (z - y).norm_squared();
            match maurey_sparsify(&points, &a, 1.0, t, slack, s, DEFAULT_RETRY_BUDGET) {
                Ok(r) => Ok((first, Ok(r.attempts))),
                Err(Error::RetriesExhausted { best_distance, .. }) => Ok((first, Err(best_distance))),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut first_sum = 0.0;
    let mut attempts = Vec::new();
    let mut best_failed: Vec<f64> = Vec::new();
    for r in runs {
        let (first, res) = r?;
        first_sum += first;
        match res {
            Ok(a) => attempts.push(a),
            Err(b) => best_failed.push(b),
        }
    }
    let mean_sq = first_sum / count.max(1) as f64;
    let mean_bound = 1.05 / t as f64;
    let threshold = slack / (t as f64).sqrt();
    let passed = best_failed.is_empty() && mean_sq <= mean_bound;
    let result = json!({
        "threshold": threshold,
        "successes": attempts.len(),
        "failures": best_failed.len(),
        "max_attempts": attempts.iter().max(),
        "retry_budget": DEFAULT_RETRY_BUDGET,
        "best_failed_distance": best_failed.iter().copied().reduce(f64::min),
        "mean_sq_distance": mean_sq,
        "mean_sq_bound": mean_bound,
    });
    outcome(json!({ "d": d, "points": big_n, "radius": 1.0, "t": t, "slack": slack, "trials": count }), passed, result)
}

fn maurey_union(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let (d, big_n) = (g.dim(10)?, g.cols(20));
    let k = kn.k.unwrap_or(6);
    let t = integer(kn.t, 3, "t")?;
    let slack = kn.slack.unwrap_or(2.0);
    let count = trials(g, 200);
    let points = random_unit_points(d, big_n, &mut stream_rng(seed, 1));
    let rep = union_inclusion_check(&points, 1.0, k, t, count, slack, seed)?;
    let cfg = json!({ "d": d, "points": big_n, "k": k, "t": t, "slack": slack, "trials": count });
    outcome(cfg, rep.passed, to_json(&rep))
}

fn suppression(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let d = g.dim(4)?;
    let (p, r) = (kn.p.unwrap_or(2), kn.r.unwrap_or(1));
    let t = kn.t.unwrap_or(1.0);
    let n = samples(g, 100_000);
    if p > d {
        return Err(CliError::usage(format!("p = {p} exceeds the dimension {d}")));
    }
    let poly = random_poly(d, d, seed)?;
    let rep = verify_suppression_inequality(&poly, p, r, t, n, seed)?;
    let cfg = json!({ "d": d, "p": p, "q": d - p, "r": r, "t": t, "samples": n });
    outcome(cfg, rep.holds, to_json(&rep))
}

/// `B = Id` (n × p) with `J` the last `r` columns. The failure bound is checked at
/// the default `c` and at the constant calibrated on small `τ`.
fn block_tail(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(8)?;
    let p = kn.p.unwrap_or(n);
    let r = kn.r.unwrap_or(2);
    let tau = kn.tau.unwrap_or(4.0);
    let count = trials(g, 1000);
    if p > n || r > p {
        return Err(CliError::usage(format!("need r ≤ p ≤ n, got n = {n}, p = {p}, r = {r}")));
    }
    let b = DMatrix::<f64>::identity(n, p);
    let j: Vec<usize> = (p - r..p).collect();
    let cfg = BlockTailConfig::new(n, p, r, tau);
    let reports = block_tail_experiment(&cfg, &b, &j, count, seed)?;
    let summary = summarize_block_tail(&cfg, &reports);
    let tau_grid = [0.5, 0.75, 1.0];
    let cal = calibrate_block_tail_constant(n, p, r, &b, &j, &tau_grid, count, derive_seed(seed, u64::MAX))?;
    let calibrated_cfg = BlockTailConfig { c: cal.c_hat, ..cfg };
    let calibrated = summarize_block_tail(&calibrated_cfg, &reports);
    let passed = summary.bound_holds && calibrated.bound_holds;
    let result = json!({
        "n_eff": cfg.n_eff(),
        "threshold": cfg.threshold(),
        "default": summary,
        "calibration": cal,
        "calibrated": calibrated,
    });
    let config = json!({ "n": n, "p": p, "r": r, "tau": tau, "trials": count, "b": "identity", "j": j, "tau_grid": tau_grid });
    outcome(config, passed, result)
}

fn det_shrink(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(4)?;
    let d = kn.k.unwrap_or(2);
    let h = kn.h.unwrap_or(0.5);
    let s = samples(g, 100_000);
    let rep = det_shrink_check(n, d, h, s, seed)?;
    outcome(json!({ "n": n, "d": d, "h": h, "samples": s }), rep.holds, to_json(&rep))
}

/// `--trials` random Gaussian generator sets in `ℝ^d`.
fn crosspoly_measure(g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let d = g.dim(3)?;
    let rho = g.rho.unwrap_or(1.0);
    let sets = trials(g, 10);
    let s = samples(g, 100_000);
    let checks = (0..sets)
        .map(|i| {
            let si = derive_seed(seed, i as u64);
            Ok(crosspoly_measure_check(&random_poly(d, d, si)?, rho, s, si)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let passed = checks.iter().all(|c| c.holds);
    outcome(json!({ "d": d, "rho": rho, "sets": sets, "samples": s }), passed, json!({ "checks": checks }))
}

fn thickening(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let d = g.dim(2)?;
    let ell = g.cols(3);
    let eta = kn.eta.unwrap_or(0.1);
    let rho = g.rho.unwrap_or(1.0);
    let s = samples(g, 100_000);
    let rep = thickening_check(&random_poly(d, ell, seed)?, rho, eta, s, seed)?;
    outcome(json!({ "d": d, "generators": ell, "eta": eta, "rho": rho, "samples": s }), rep.holds, to_json(&rep))
}

fn t_grid(kn: &Knobs, default: &[f64]) -> Vec<f64> {
    kn.t.map_or_else(|| default.to_vec(), |t| vec![t])
}

fn gauss_tail(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(10)?;
    let ts = t_grid(kn, &[2.0, 3.0]);
    let s = samples(g, 1_000_000);
    let rep = gaussian_norm_tail_check(n, &ts, s, seed)?;
    outcome(json!({ "n": n, "t": ts, "samples": s }), rep.passed, to_json(&rep))
}

fn chi2_tail(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let ns = match g.n {
        Some(_) => vec![g.dim(0)?],
        None => vec![10, 50],
    };
    let ts = t_grid(kn, &[1.0, 2.0, 3.0]);
    let s = samples(g, 1_000_000);
    let reports = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| chi_square_tail_check(n, &ts, s, derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().all(|r| r.passed);
    let rows: Vec<_> = reports.into_iter().flat_map(|r| r.rows).collect();
    outcome(json!({ "n": ns, "t": ts, "samples": s }), passed, json!({ "rows": rows }))
}

/// Random `P` in `ℝ^n` with `m` generators and a random `k`-dimensional `H`.
fn proj_monotone(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(5)?;
    let ell = g.cols(8);
    let k = kn.k.unwrap_or(2);
    let s = samples(g, 100_000);
    let poly = random_poly(n, ell, seed)?;
    let h = random_subspace(n, k, &mut stream_rng(seed, 2))?;
    let full = HullOracle::new(&poly)?;
    let projected = HullOracle::new(&project_polytope(&poly, &h)?)?;
    let rep = projection_monotonicity_check(|x| full.contains_slice(x), |x| projected.contains_slice(x), &h, s, seed)?;
    outcome(json!({ "n": n, "generators": ell, "k": k, "samples": s }), rep.holds, to_json(&rep))
}

fn absorb(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let d = g.dim(3)?;
    let ell = g.cols(6);
    let delta = kn.delta.unwrap_or(0.3);
    let directions = samples(g, 10_000) as usize;
    let k = random_poly(d, ell, derive_seed(seed, 0))?;
    let l = random_poly(d, ell, derive_seed(seed, 1))?;
    let rep = minkowski_absorb_check(&k, &l, delta, directions, seed)?;
    outcome(json!({ "d": d, "generators": ell, "delta": delta, "directions": directions }), rep.passed, to_json(&rep))
}

/// `--trials` independent `(A, Γ)` pairs with `--samples` points each.
fn bridge(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(4)?;
    let m = g.cols(16);
    let support = kn.k.unwrap_or(n);
    let s = kn.s.unwrap_or(2);
    let rho = g.rho.unwrap_or(2.0);
    let pairs = trials(g, 10);
    let points = samples(g, 50) as usize;
    let reports = (0..pairs)
        .map(|i| {
            let si = derive_seed(seed, i as u64);
            let a = random_coefficient_matrix(m, n, support, &mut stream_rng(si, 1))?;
            let gamma = gen_gluskin(n, m, si)?.gamma;
            bridge_check(&a, &gamma, rho, s, points, si)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let mut hist = vec![0usize; n + 1];
    for r in &reports {
        for (k, c) in r.k_histogram.iter().enumerate() {
            hist[k] += c;
        }
    }
    let result = json!({ "samples": pairs * points, "violations": violations, "k_histogram": hist, "pairs": reports });
    let cfg = json!({ "n": n, "m": m, "support": support, "s": s, "rho": rho, "pairs": pairs, "points_per_pair": points });
    outcome(cfg, violations == 0, result)
}

/// One random `A` per seed; passes when at least 95% of seeds agree.
fn powering(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(3)?;
    let m = g.cols(6);
    let support = kn.k.unwrap_or(1);
    let rho = g.rho.unwrap_or(3.0);
    let seeds = trials(g, 20);
    let s = samples(g, 20_000);
    let reports = (0..seeds)
        .map(|i| {
            let si = derive_seed(seed, i as u64);
            let a = random_coefficient_matrix(m, n, support, &mut stream_rng(si, 0))?;
            powering_check(&a, rho, s, s, si)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let agree = reports.iter().filter(|r| r.agree).count();
    let required = (seeds * 19).div_ceil(20);
    let result = json!({ "agree": agree, "required": required, "seeds": reports });
    let cfg = json!({ "n": n, "m": m, "support": support, "rho": rho, "seeds": seeds, "outer_trials": s, "inner_samples": s });
    outcome(cfg, agree >= required, result)
}

fn u_norm(kn: &Knobs, g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(10)?;
    let m = g.cols(n * n * n);
    let s = kn.s.unwrap_or(2);
    let rho = g.rho.unwrap_or(2.0);
    let c0 = kn.c0.unwrap_or(4.0);
    let eps = 1.0 / (rho * (n * n) as f64);
    let count = samples(g, 20_000);
    let rep = u_norm_event_check(n, m, s, eps, rho, c0, count, seed)?;
    let cfg = json!({ "n": n, "m": m, "s": s, "rho": rho, "c0": c0, "epsilon": eps, "trials": count });
    outcome(cfg, rep.holds, to_json(&rep))
}

fn entropy_tk(kn: &Knobs, g: &Global) -> Result<Outcome, CliError> {
    let ns: Vec<u64> = match g.n {
        Some(_) => vec![g.dim(0)? as u64],
        None => (1..=6).map(|i| 10 * i).collect(),
    };
    let lambdas = kn.t.map_or_else(|| vec![2.0, 3.0, 4.0, 5.5], |t| vec![t]);
    let rep = entropy_tk_check(&ns, &lambdas)?;
    outcome(json!({ "n": ns, "lambda": lambdas }), rep.passed, to_json(&rep))
}

fn binom(g: &Global) -> Result<Outcome, CliError> {
    let n_max = g.dim(60)? as u64;
    let (num, den) = l1_ball_volume_exact(3).expect("small dimension");
    let volume_ok = (num, den) == (4, 3);
    let mut checked = 0u64;
    let mut failures = Vec::new();
    let mut undecided = Vec::new();
    for n in 1..=n_max {
        for r in 1..=n {
            checked += 1;
            match binom_bound_holds(n, r) {
                Some(true) => {}
                Some(false) => failures.push((n, r)),
                None => undecided.push((n, r)),
            }
        }
    }
    let passed = volume_ok && failures.is_empty() && undecided.is_empty();
    let result = json!({
        "l1_ball_volume_3": format!("{num}/{den}"),
        "volume_ok": volume_ok,
        "pairs_checked": checked,
        "failures": failures,
        "undecided": undecided,
    });
    outcome(json!({ "n_max": n_max }), passed, result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_ids() {
        let ids: Vec<String> = Lemma::value_variants().iter().map(|l| l.id()).collect();
        assert_eq!(
            ids,
            [
                "l1-sparse", "l1-decomp", "maurey", "maurey-union", "suppression", "block-tail", "det-shrink",
                "crosspoly-measure", "thickening", "gauss-tail", "chi2-tail", "proj-monotone", "absorb", "bridge",
                "powering", "u-norm", "entropy-tk", "binom",
            ]
        );
    }
}
