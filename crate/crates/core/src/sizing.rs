//! Population-sizing models.
//!
//! All functions return real-valued population sizes; rounding is the
//! caller's business. Symbols follow the decision-making model:
//!
//! | field      | meaning                                                    |
//! |------------|------------------------------------------------------------|
//! | `k`        | defining length of the building block                      |
//! | `kappa`    | competition size                                           |
//! | `sigma2_bb`| fitness variance contributed by one building block         |
//! | `d`        | signal between best and second-best building block         |
//! | `q_bar`    | mean number of expressed building blocks per tree          |
//! | `p_expr`   | probability that a present building block is expressed     |
//! | `phi`      | potential instances of a fragment per tree                 |
//! | `c`        | squared Gaussian ordinate for the error tolerance          |

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::combinatorics::q_bar_order;
use crate::error::{GpError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingInputs {
    pub k: u32,
    pub kappa: f64,
    pub sigma2_bb: f64,
    pub d: f64,
    /// Average tree size λ.
    pub lambda: f64,
    /// Size of the most compact solution λ_k.
    pub lambda_k: f64,
    /// Multiplier applied to `m_k` when `q̄` is approximated as `c_k m_k`.
    pub c_k: f64,
    pub m: f64,
    pub p_expr: f64,
    pub q_bar: f64,
    pub phi: f64,
    pub c: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub chi: f64,
}

impl Default for SizingInputs {
    fn default() -> Self {
        Self {
            k: 1,
            kappa: 2.0,
            sigma2_bb: 0.25,
            d: 1.0,
            lambda: 1.0,
            lambda_k: 1.0,
            c_k: 1.0,
            m: 2.0,
            p_expr: 1.0,
            q_bar: 2.0,
            phi: 1.0,
            c: 1.0,
            alpha: 0.1,
            epsilon: 0.1,
            chi: 2.0,
        }
    }
}

/// How the confidence coefficient `c` is obtained from an error tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CMethod {
    /// `c = z²` with `z` the exact one-sided standard normal ordinate.
    Exact,
    /// Root of `exp(-c/2) / sqrt(2c) = α`.
    SimpleTail,
    /// Root of `exp(-c/2) / sqrt(2πc) = 2α`; reproduces the tabulated
    /// `c` values used with `α = 1/m`.
    TableFit,
}

impl CMethod {
    pub fn label(self) -> &'static str {
        match self {
            CMethod::Exact => "exact",
            CMethod::SimpleTail => "simple_tail",
            CMethod::TableFit => "table_fit",
        }
    }
}

/// Upper tail of the standard normal, `P(Z > z)`.
pub fn normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Root of a function that is decreasing on `[lo, hi]`.
fn decreasing_root(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    what: &'static str,
) -> Result<f64> {
    if !(f(lo) >= 0.0 && f(hi) <= 0.0) {
        return Err(GpError::NoRoot(what));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn c_from_alpha(alpha: f64, method: CMethod) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(GpError::Domain(format!(
            "alpha must lie in (0, 0.5), got {alpha}"
        )));
    }
    match method {
        CMethod::Exact => {
            let z = decreasing_root(|z| normal_tail(z) - alpha, 0.0, 40.0, "normal tail")?;
            Ok(z * z)
        }
        CMethod::SimpleTail => decreasing_root(
            |c| (-c / 2.0).exp() / (2.0 * c).sqrt() - alpha,
            1e-12,
            1e4,
            "exp(-c/2)/sqrt(2c) = alpha",
        ),
        CMethod::TableFit => decreasing_root(
            |c| (-c / 2.0).exp() / (2.0 * std::f64::consts::PI * c).sqrt() - 2.0 * alpha,
            1e-12,
            1e4,
            "exp(-c/2)/sqrt(2 pi c) = 2 alpha",
        ),
    }
}

/// `c` for the usual tolerance `α = 1/m`.
pub fn c_for_m(m: usize, method: CMethod) -> Result<f64> {
    if m < 3 {
        return Err(GpError::Domain(format!(
            "alpha = 1/m needs m >= 3, got {m}"
        )));
    }
    c_from_alpha(1.0 / m as f64, method)
}

/// Probability of deciding correctly between two building blocks whose
/// fitness differs by `d` under the given noise variances.
pub fn decision_probability(d: f64, sigma2_h1: f64, sigma2_h2: f64) -> Result<f64> {
    if sigma2_h1 < 0.0 || sigma2_h2 < 0.0 {
        return Err(GpError::Domain("variances must be non-negative".into()));
    }
    let total = sigma2_h1 + sigma2_h2;
    if total == 0.0 {
        // noiseless limit
        return Ok(if d > 0.0 {
            1.0
        } else if d == 0.0 {
            0.5
        } else {
            0.0
        });
    }
    Ok(normal_cdf(d / total.sqrt()))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(GpError::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(GpError::Domain(format!(
            "{name} must be non-negative, got {v}"
        )));
    }
    Ok(())
}

/// GA baseline: `n = 2 c χ^k (m-1) σ²_bb / d²`.
pub fn ga_popsize(c: f64, chi: f64, k: u32, m: f64, sigma2_bb: f64, d: f64) -> Result<f64> {
    if m < 2.0 {
        return Err(GpError::Domain(format!("GA sizing needs m >= 2, got {m}")));
    }
    if d == 0.0 {
        return Err(GpError::Domain("signal d must be non-zero".into()));
    }
    non_negative("sigma2_bb", sigma2_bb)?;
    Ok(2.0 * c * chi.powi(k as i32) * (m - 1.0) * sigma2_bb / (d * d))
}

/// Supply bound: `n = (1/λ) 2^k κ (ln κ - ln ε)`.
pub fn supply_popsize(lambda: f64, k: u32, kappa: f64, epsilon: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("epsilon", epsilon)?;
    if kappa < 1.0 || epsilon > kappa {
        return Err(GpError::Domain(format!(
            "supply sizing needs kappa >= 1 and epsilon <= kappa (kappa={kappa}, epsilon={epsilon})"
        )));
    }
    Ok(2f64.powi(k as i32) * kappa * (kappa.ln() - epsilon.ln()) / lambda)
}

/// General GP model: `n = 2 c (σ²_bb/d²) κ (q̄ - 1) / (p_expr φ)`.
pub fn gp_popsize_general(inp: &SizingInputs) -> Result<f64> {
    positive("p_expr", inp.p_expr)?;
    positive("phi", inp.phi)?;
    if !(inp.q_bar > 1.0) {
        return Err(GpError::Domain(format!(
            "q_bar must exceed 1 for collateral noise to exist, got {}",
            inp.q_bar
        )));
    }
    if inp.d == 0.0 {
        return Err(GpError::Domain("signal d must be non-zero".into()));
    }
    non_negative("sigma2_bb", inp.sigma2_bb)?;
    Ok(
        2.0 * inp.c * inp.sigma2_bb / (inp.d * inp.d) * inp.kappa * (inp.q_bar - 1.0)
            / (inp.p_expr * inp.phi),
    )
}

/// Model in terms of the most compact solution:
/// `n = c (σ²_bb/d²) κ (c_k m_k - 1) 2^(k+1) / (p_expr λ)`.
pub fn gp_popsize_kolmogorov(inp: &SizingInputs) -> Result<f64> {
    positive("lambda", inp.lambda)?;
    positive("p_expr", inp.p_expr)?;
    if inp.d == 0.0 {
        return Err(GpError::Domain("signal d must be non-zero".into()));
    }
    non_negative("sigma2_bb", inp.sigma2_bb)?;
    let noise = inp.c_k * inp.m - 1.0;
    if noise < 0.0 {
        return Err(GpError::Domain(format!(
            "c_k * m_k must be >= 1, got {}",
            inp.c_k * inp.m
        )));
    }
    Ok(
        inp.c * inp.sigma2_bb / (inp.d * inp.d) * inp.kappa * noise * 2f64.powi(inp.k as i32 + 1)
            / (inp.p_expr * inp.lambda),
    )
}

/// Expected trials of one building block, `τ = (1/κ) p_expr φ n`.
pub fn trials_per_bb(inp: &SizingInputs, n: f64) -> Result<f64> {
    non_negative("n", n)?;
    positive("kappa", inp.kappa)?;
    Ok(inp.p_expr * inp.phi * n / inp.kappa)
}

/// ORDER expression probability `exp(-k e^(-λ/2m))`.
pub fn order_p_expr(k: u32, lambda: f64, m: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    if m < 1.0 {
        return Err(GpError::Domain(format!("m must be >= 1, got {m}")));
    }
    Ok((-(k as f64) * (-lambda / (2.0 * m)).exp()).exp())
}

/// ORDER sizing with `q̄` supplied directly:
/// `n = 2^(k-1) c (σ²_bb/d²) (q̄ - 1) exp(k e^(-λ/2m))`.
pub fn order_popsize_with_qbar(
    k: u32,
    c: f64,
    sigma2_bb: f64,
    d: f64,
    q_bar: f64,
    lambda: f64,
    m: f64,
) -> Result<f64> {
    if d == 0.0 {
        return Err(GpError::Domain("signal d must be non-zero".into()));
    }
    non_negative("sigma2_bb", sigma2_bb)?;
    let p = order_p_expr(k, lambda, m)?;
    Ok(2f64.powi(k as i32 - 1) * c * sigma2_bb / (d * d) * (q_bar - 1.0) / p)
}

/// ORDER sizing with `q̄` derived from the mean leaf count `n_l`.
pub fn order_popsize(
    k: u32,
    c: f64,
    sigma2_bb: f64,
    d: f64,
    m: usize,
    n_l: f64,
    lambda: f64,
) -> Result<f64> {
    let q_bar = q_bar_order(m, n_l)?;
    order_popsize_with_qbar(k, c, sigma2_bb, d, q_bar, lambda, m as f64)
}

/// LOUD sizing: `n = 2·3^k c (σ²_bb/d²) (λ/3 - 1)(2/λ)`.
pub fn loud_popsize(k: u32, c: f64, sigma2_bb: f64, d: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 3.0) {
        return Err(GpError::Domain(format!(
            "LOUD sizing needs lambda > 3 (expressed noise sources), got {lambda}"
        )));
    }
    if d == 0.0 {
        return Err(GpError::Domain("signal d must be non-zero".into()));
    }
    non_negative("sigma2_bb", sigma2_bb)?;
    Ok(2.0 * 3f64.powi(k as i32) * c * sigma2_bb / (d * d) * (lambda / 3.0 - 1.0) * (2.0 / lambda))
}

/// ON-OFF sizing with `p_expr = p_EXP^h`:
/// `n = 2^(k+1) c (σ²_bb/d²) ((λ/2) p_EXP^h - 1)(2 / (λ p_EXP^h))`.
pub fn onoff_popsize(
    k: u32,
    c: f64,
    sigma2_bb: f64,
    d: f64,
    lambda: f64,
    p_exp: f64,
    h: u32,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_exp) {
        return Err(GpError::Domain(format!(
            "p_exp must lie in [0, 1], got {p_exp}"
        )));
    }
    positive("lambda", lambda)?;
    let p = p_exp.powi(h as i32);
    let expressed = lambda / 2.0 * p;
    if !(expressed > 1.0) {
        return Err(GpError::Domain(format!(
            "ON-OFF sizing needs (lambda/2) p_exp^h > 1; got {expressed:.4} \
             (expression too rare for the collateral-noise model)"
        )));
    }
    if d == 0.0 {
        return Err(GpError::Domain("signal d must be non-zero".into()));
    }
    non_negative("sigma2_bb", sigma2_bb)?;
    Ok(
        2f64.powi(k as i32 + 1) * c * sigma2_bb / (d * d)
            * (expressed - 1.0)
            * (2.0 / (lambda * p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn c_methods() {
        let c = c_from_alpha(1.0 / 8.0, CMethod::TableFit).unwrap();
        assert!(close(c, 0.97, 0.01), "{c}");
        let c = c_from_alpha(1.0 / 32.0, CMethod::TableFit).unwrap();
        assert!(close(c, 2.71, 0.01), "{c}");
        let c = c_from_alpha(1.0 / 32.0, CMethod::Exact).unwrap();
        assert!(
            close(c.sqrt(), 1.8627, 1e-4) && close(c, 3.47, 0.005),
            "{c}"
        );
        let c = c_from_alpha(0.01, CMethod::SimpleTail).unwrap();
        assert!(close((-c / 2.0).exp() / (2.0 * c).sqrt(), 0.01, 1e-12));
        assert!(c_from_alpha(0.5, CMethod::Exact).is_err());
        assert!(c_from_alpha(0.0, CMethod::TableFit).is_err());
    }

    #[test]
    fn exact_c_inverts_tail() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let std = Normal::new(0.0, 1.0).unwrap();
        for &a in &[0.3, 0.1, 1.0 / 16.0, 0.01, 1e-4, 1e-7] {
            let z = c_from_alpha(a, CMethod::Exact).unwrap().sqrt();
            assert!((normal_tail(z) - a).abs() < 1e-8 * a.max(1e-3));
            assert!((z - std.inverse_cdf(1.0 - a)).abs() < 1e-6, "alpha {a}");
        }
    }

    #[test]
    fn decision_probabilities() {
        assert_eq!(decision_probability(0.0, 0.3, 0.7).unwrap(), 0.5);
        assert!(close(
            decision_probability(1.0, 0.5, 0.5).unwrap(),
            0.841_344_746,
            1e-9
        ));
        assert!(close(
            decision_probability(1e3, 0.5, 0.5).unwrap(),
            1.0,
            1e-15
        ));
        assert_eq!(decision_probability(2.0, 0.0, 0.0).unwrap(), 1.0);
        assert!(decision_probability(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn ga_examples() {
        assert!(close(
            ga_popsize(1.0, 2.0, 3, 11.0, 1.0, 1.0).unwrap(),
            160.0,
            1e-12
        ));
        assert!(close(
            ga_popsize(1.5, 3.0, 2, 2.0, 0.5, 1.0).unwrap(),
            2.0 * 1.5 * 9.0 * 0.5,
            1e-12
        ));
        assert!(close(
            ga_popsize(0.97, 2.0, 1, 8.0, 0.25, 1.0).unwrap(),
            6.79,
            1e-12
        ));
        assert!(ga_popsize(1.0, 2.0, 1, 1.0, 1.0, 1.0).is_err());
        assert!(ga_popsize(1.0, 2.0, 1, 4.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn supply_examples() {
        let n = supply_popsize(8.0, 3, 8.0, 0.8).unwrap();
        assert!(close(n, 8.0 * 10f64.ln(), 1e-12));
        assert_eq!(supply_popsize(8.0, 3, 8.0, 8.0).unwrap(), 0.0);
        let half = supply_popsize(16.0, 3, 8.0, 0.8).unwrap();
        assert!(close(half * 2.0, n, 1e-12));
        assert!(supply_popsize(8.0, 3, 8.0, 0.0).is_err());
        assert!(supply_popsize(8.0, 3, 8.0, 9.0).is_err());
    }

    #[test]
    fn general_and_kolmogorov_examples() {
        let inp = SizingInputs {
            c: 1.0,
            sigma2_bb: 0.25,
            d: 1.0,
            kappa: 8.0,
            q_bar: 5.0,
            p_expr: 0.5,
            phi: 2.0,
            ..Default::default()
        };
        assert!(close(gp_popsize_general(&inp).unwrap(), 16.0, 1e-12));
        assert!(gp_popsize_general(&SizingInputs { q_bar: 1.0, ..inp }).is_err());

        let inp = SizingInputs {
            c: 1.0,
            sigma2_bb: 0.25,
            d: 1.0,
            kappa: 4.0,
            c_k: 2.0,
            m: 3.0,
            k: 1,
            p_expr: 1.0,
            lambda: 10.0,
            ..Default::default()
        };
        assert!(close(gp_popsize_kolmogorov(&inp).unwrap(), 2.0, 1e-12));
        let boundary = SizingInputs {
            c_k: 1.0,
            m: 1.0,
            ..inp
        };
        assert_eq!(gp_popsize_kolmogorov(&boundary).unwrap(), 0.0);
    }

    #[test]
    fn trials() {
        let inp = SizingInputs {
            kappa: 8.0,
            p_expr: 0.5,
            phi: 2.0,
            ..Default::default()
        };
        assert_eq!(trials_per_bb(&inp, 64.0).unwrap(), 8.0);
        assert_eq!(trials_per_bb(&inp, 0.0).unwrap(), 0.0);
        let ga = SizingInputs {
            kappa: 4.0,
            p_expr: 1.0,
            phi: 1.0,
            ..Default::default()
        };
        assert_eq!(trials_per_bb(&ga, 100.0).unwrap(), 25.0);
    }

    #[test]
    fn order_examples() {
        let e = (-1f64).exp();
        assert!(close(order_p_expr(1, 8.0, 4.0).unwrap(), (-e).exp(), 1e-15));
        assert!(close(order_p_expr(1, 8.0, 4.0).unwrap(), 0.6922, 1e-4));
        assert!(close(order_p_expr(2, 8.0, 4.0).unwrap(), 0.4791, 1e-4));
        assert!(close(order_p_expr(3, 1e6, 4.0).unwrap(), 1.0, 1e-12));

        let n = order_popsize_with_qbar(1, 1.0, 0.25, 1.0, 5.0, 8.0, 4.0).unwrap();
        assert!(close(n, e.exp(), 1e-12) && close(n, 1.4447, 1e-4));

        let n = order_popsize(1, 1.0, 0.25, 1.0, 3, 3.0, 5.0).unwrap();
        let want = 0.25 * (10.0 / 9.0) * (-5.0f64 / 6.0).exp().exp();
        assert!(close(n, want, 1e-12));
    }

    #[test]
    fn loud_examples() {
        assert!(close(
            loud_popsize(1, 1.0, 0.25, 1.0, 6.0).unwrap(),
            0.5,
            1e-12
        ));
        let limit = 2.0 * 3.0 * 0.25 * (2.0 / 3.0);
        let far = loud_popsize(1, 1.0, 0.25, 1.0, 1e9).unwrap();
        assert!(close(far, limit, 1e-8) && far < limit);
        let n = loud_popsize(1, 1.76, 0.25, 1.0, 4.5).unwrap();
        assert!(close(n, 6.0 * 1.76 * 0.25 * 0.5 * (2.0 / 4.5), 1e-12));
        assert!(loud_popsize(1, 1.0, 0.25, 1.0, 3.0).is_err());
    }

    #[test]
    fn onoff_examples() {
        assert!(close(
            onoff_popsize(1, 1.0, 0.25, 1.0, 8.0, 1.0, 3).unwrap(),
            0.75,
            1e-12
        ));
        // p_exp = 1 reproduces the LOUD bracket structure with base-2 constants
        let lam = 20.0;
        let n = onoff_popsize(2, 1.3, 0.25, 1.0, lam, 1.0, 4).unwrap();
        assert!(close(
            n,
            8.0 * 1.3 * 0.25 * (lam / 2.0 - 1.0) * (2.0 / lam),
            1e-12
        ));
        assert!(onoff_popsize(1, 1.0, 0.25, 1.0, 8.0, 0.5, 3).is_err());
    }
}
