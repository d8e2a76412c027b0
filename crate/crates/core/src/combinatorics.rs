//! Distribution of expressed building blocks in ORDER trees.
//!
//! Fix one index (the building block a decision is being made on) and look
//! at the remaining `n_l - 1` leaves of a tree, each drawn uniformly from the
//! `2m` ORDER terminals. The quantity of interest is how many of the other
//! `m - 1` indices occur at least once. Inclusion-exclusion gives
//!
//! ```text
//! N(i) = C(m-1, i) · Σ_j C(i, j) (-1)^j [2(i - j + 1)]^(n_l - 1)
//! ```
//!
//! out of `N_tot = (2m)^(n_l - 1)` sequences. Counts are exact big
//! integers; [`oracle_enumerate`] recomputes them by brute force.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{GpError, Result};

/// Largest sequence count [`oracle_enumerate`] will walk.
pub const ORACLE_GUARD: u64 = 10_000_000;

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for t in 0..k {
        acc = acc * BigUint::from(n - t) / BigUint::from(t + 1);
    }
    acc
}

fn check_sizes(m: usize, n_l: usize) -> Result<()> {
    if m < 1 || n_l < 1 {
        return Err(GpError::Domain(format!(
            "expression counts need m >= 1 and n_l >= 1 (m={m}, n_l={n_l})"
        )));
    }
    Ok(())
}

/// `(2m)^(n_l - 1)`
pub fn n_total(m: usize, n_l: usize) -> Result<BigUint> {
    check_sizes(m, n_l)?;
    Ok(BigUint::from(2 * m as u64).pow(n_l as u32 - 1))
}

/// Number of leaf sequences in which exactly `i` other indices are expressed.
pub fn ways_expressed(i: usize, m: usize, n_l: usize) -> Result<BigUint> {
    check_sizes(m, n_l)?;
    if i > m - 1 {
        return Err(GpError::Domain(format!("i={i} outside 0..={}", m - 1)));
    }
    let exp = n_l as u32 - 1;
    let mut sum = BigInt::zero();
    for j in 0..=i {
        let term = BigInt::from(binomial(i as u64, j as u64))
            * BigInt::from(2 * (i - j + 1) as u64).pow(exp);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let count = BigInt::from(binomial(m as u64 - 1, i as u64)) * sum;
    debug_assert!(!count.is_negative());
    Ok(count
        .to_biguint()
        .expect("inclusion-exclusion count is non-negative"))
}

/// `num / den` as f64 without overflowing on huge operands.
fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(900);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// `p(i)` in the floating form `C(m-1,i) Σ_j C(i,j)(-1)^j ((i-j+1)/m)^(n_l-1)`.
pub fn prob_expressed(i: usize, m: usize, n_l: usize) -> Result<f64> {
    check_sizes(m, n_l)?;
    if i > m - 1 {
        return Err(GpError::Domain(format!("i={i} outside 0..={}", m - 1)));
    }
    let c_mi = big_ratio(&binomial(m as u64 - 1, i as u64), &BigUint::one());
    let mut sum = 0.0;
    for j in 0..=i {
        let c = big_ratio(&binomial(i as u64, j as u64), &BigUint::one());
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * c * ((i - j + 1) as f64 / m as f64).powi(n_l as i32 - 1);
    }
    Ok(c_mi * sum)
}

/// `p(i)` as the exact ratio `N(i) / N_tot`, rounded once.
pub fn prob_expressed_exact(i: usize, m: usize, n_l: usize) -> Result<f64> {
    Ok(big_ratio(&ways_expressed(i, m, n_l)?, &n_total(m, n_l)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionDistribution {
    pub m: usize,
    pub n_l: usize,
    /// `probabilities[i]` for `i = 0..m-1`.
    pub probabilities: Vec<f64>,
    /// Exact counts when available (closed form or enumeration).
    pub counts: Option<Vec<BigUint>>,
    pub mean: f64,
    pub variance: f64,
}

impl ExpressionDistribution {
    fn from_counts(m: usize, n_l: usize, counts: Vec<BigUint>) -> Self {
        let total: BigUint = counts.iter().sum();
        let probabilities: Vec<f64> = counts.iter().map(|c| big_ratio(c, &total)).collect();
        let first: BigUint = counts
            .iter()
            .enumerate()
            .map(|(i, c)| c * BigUint::from(i))
            .sum();
        let second: BigUint = counts
            .iter()
            .enumerate()
            .map(|(i, c)| c * BigUint::from(i * i))
            .sum();
        let mean = big_ratio(&first, &total);
        // Var = (T·S2 - S1²) / T², computed exactly before rounding
        let num = &total * &second - &first * &first;
        let variance = big_ratio(&num, &(&total * &total));
        Self {
            m,
            n_l,
            probabilities,
            counts: Some(counts),
            mean,
            variance,
        }
    }
}

/// Distribution, mean and variance of the number of other expressed
/// building blocks from the inclusion-exclusion counts.
pub fn mean_var_expressed(m: usize, n_l: usize) -> Result<ExpressionDistribution> {
    check_sizes(m, n_l)?;
    let counts = (0..m)
        .map(|i| ways_expressed(i, m, n_l))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpressionDistribution::from_counts(m, n_l, counts))
}

/// Mean and variance straight from the floating sums
/// `Σ_i C(m-1,i) i^r Σ_j ...`; cancels badly for large `m`.
pub fn mean_var_expressed_float(m: usize, n_l: usize) -> Result<(f64, f64)> {
    check_sizes(m, n_l)?;
    let mut mean = 0.0;
    let mut second = 0.0;
    for i in 0..m {
        let p = prob_expressed(i, m, n_l)?;
        mean += i as f64 * p;
        second += (i * i) as f64 * p;
    }
    Ok((mean, second - mean * mean))
}

/// Mean expressed building blocks per tree, `1 + n̄_BB^exp`, for a possibly
/// fractional average leaf count.
///
/// Integral `n_l` uses the exact counts. The inclusion-exclusion mean
/// collapses to `(m-1)(1 - (1 - 1/m)^(n_l-1))` (an identity between finite
/// sums of exponentials in `n_l`), which is also valid between integers and
/// is used for fractional `n_l`.
pub fn q_bar_order(m: usize, n_l: f64) -> Result<f64> {
    if m < 1 || !(n_l >= 1.0) || !n_l.is_finite() {
        return Err(GpError::Domain(format!(
            "q_bar needs m >= 1 and n_l >= 1 (m={m}, n_l={n_l})"
        )));
    }
    if n_l.fract() == 0.0 && n_l <= 4096.0 {
        return Ok(1.0 + mean_var_expressed(m, n_l as usize)?.mean);
    }
    Ok(1.0 + collapsed_mean(m, n_l))
}

fn collapsed_mean(m: usize, n_l: f64) -> f64 {
    let m = m as f64;
    (m - 1.0) * (1.0 - (1.0 - 1.0 / m).powf(n_l - 1.0))
}

/// Brute-force distribution: walk every length-`(n_l - 1)` sequence over the
/// `2m` terminals and count distinct indices other than the first.
pub fn oracle_enumerate(m: usize, n_l: usize) -> Result<ExpressionDistribution> {
    check_sizes(m, n_l)?;
    let symbols = 2 * m;
    let len = n_l - 1;
    let required = (symbols as f64).powi(len as i32);
    if required > ORACLE_GUARD as f64 {
        return Err(GpError::EnumerationTooLarge {
            required,
            guard: ORACLE_GUARD,
        });
    }
    let mut counts = vec![0u64; m];
    let mut digits = vec![0usize; len];
    let mut seen = vec![false; m];
    loop {
        seen.iter_mut().for_each(|s| *s = false);
        // terminal t stands for index t % m; index 0 is the fixed block
        let mut distinct = 0;
        for &d in &digits {
            let idx = d % m;
            if idx != 0 && !seen[idx] {
                seen[idx] = true;
                distinct += 1;
            }
        }
        counts[distinct] += 1;

        let mut pos = 0;
        loop {
            if pos == len {
                let counts = counts.into_iter().map(BigUint::from).collect();
                return Ok(ExpressionDistribution::from_counts(m, n_l, counts));
            }
            digits[pos] += 1;
            if digits[pos] < symbols {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
