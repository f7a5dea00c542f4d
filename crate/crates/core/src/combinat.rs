//! Exact binomials and exact comparisons against powers of e.

use num_bigint::BigUint;

/// Exact `binom(n, k)` as a big integer.
pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Exact `binom(n, k)` when it fits in a `u128`.
pub fn binom_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

/// `ln binom(n, k)` via log-gamma, exact summation for small `k`.
pub fn ln_binom(n: f64, k: f64) -> f64 {
    if k < 0.0 || k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k < 64.0 && k == k.floor() {
        return (0..k as u64)
            .map(|i| ((n - i as f64) / (i as f64 + 1.0)).ln())
            .sum();
    }
    statrs::function::gamma::ln_gamma(n + 1.0)
        - statrs::function::gamma::ln_gamma(k + 1.0)
        - statrs::function::gamma::ln_gamma(n - k + 1.0)
}

/// `binom(n, k)` in floating point.
pub fn binom_f64(n: u64, k: u64) -> f64 {
    match binom_u128(n, k) {
        Some(v) => v as f64,
        None => ln_binom(n as f64, k as f64).exp(),
    }
}

/// Compares the rational `num/den` against `e^x` exactly.
///
/// Uses the Taylor partial sum `Σ_{j≤K} x^j/j!` as a lower bound for `e^x`
/// and the partial sum plus a geometric tail bound as an upper bound, both
/// cleared of denominators by `K!`. Returns `Some(true)` when
/// `num/den ≤ e^x` is certain, `Some(false)` when `num/den > e^x` is certain
/// and `None` when the gap is below the truncation error.
pub fn le_exp(num: &BigUint, den: &BigUint, x: u64) -> Option<bool> {
    let terms = 4 * x + 64;
    // partial = Σ_{j≤K} x^j K!/j!
    let mut partial = BigUint::from(0u32);
    let mut term = BigUint::from(1u32); // x^j K!/j! built from j = K downwards
    let mut k_fact = BigUint::from(1u32);
    for j in 1..=terms {
        k_fact *= j;
    }
    // x^j * K!/j! = x^j * (j+1)(j+2)...K
    let mut tail_prod = BigUint::from(1u32);
    let mut powers: Vec<BigUint> = Vec::with_capacity(terms as usize + 1);
    let mut p = BigUint::from(1u32);
    for _ in 0..=terms {
        powers.push(p.clone());
        p *= x;
    }
    for j in (0..=terms).rev() {
        term.clone_from(&powers[j as usize]);
        term *= &tail_prod;
        partial += &term;
        if j > 0 {
            tail_prod *= j;
        }
    }
    // lower: num/den ≤ partial/K! certifies ≤ e^x
    let lhs = num * &k_fact;
    let rhs_low = den * &partial;
    if lhs <= rhs_low {
        return Some(true);
    }
    // remainder ≤ x^{K+1}/(K+1)! · (K+2)/(K+2-x); scaled by K!(K+1)(K+2-x)
    let k1 = terms + 1;
    let k2 = terms + 2;
    if k2 <= x {
        return None;
    }
    let upper_scaled = &partial * k1 * (k2 - x) + &powers[terms as usize] * x * k2;
    let lhs_up = num * &k_fact * k1 * (k2 - x);
    if lhs_up > den * upper_scaled {
        Some(false)
    } else {
        None
    }
}

/// Exact check of `binom(n, k) ≤ (e n / k)^k`, i.e. `binom · k^k ≤ n^k e^k`.
pub fn binom_bound_holds(n: u64, k: u64) -> Option<bool> {
    if k == 0 || k > n {
        return Some(true);
    }
    let num = binom_big(n, k) * BigUint::from(k).pow(k as u32);
    let den = BigUint::from(n).pow(k as u32);
    le_exp(&num, &den, k)
}

/// All `r`-subsets of `0..p` in lexicographic order.
pub fn subsets(p: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > p {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| cur[i] < p - r + i) else {
            return out;
        };
        cur[i] += 1;
        for k in i + 1..r {
            cur[k] = cur[k - 1] + 1;
        }
    }
}
