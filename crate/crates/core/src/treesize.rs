//! Expected tree sizes for the FULL and GROW generators.
//!
//! FULL has a closed form. GROW is estimated through the height-stratified
//! recipe: probability and mean size of trees below the height cap, mean size
//! of trees at the cap, then the mixture. Two GROW estimators are provided:
//!
//! * [`avg_size_grow_analytic`] evaluates every stratum exactly with a
//!   recursion over child-slot depth, so it accounts for tree-shape
//!   multiplicity and agrees with sampling.
//! * [`avg_size_grow_weighted`] uses the per-size weight `(1-q)^(f_s-1) q^(t_s)`
//!   literally (one shape per size) and estimates the at-cap stratum by
//!   conditional Monte Carlo.

use rand::Rng;

use crate::error::{GpError, Result};
use crate::init::{create_tree_full, create_tree_grow, InitMethod};
use crate::tree::PrimitiveSet;

/// Samples used for conditional Monte Carlo estimates.
pub const CONDITIONAL_SAMPLES: usize = 100_000;

fn shape_only() -> PrimitiveSet {
    PrimitiveSet::new(["f"], ["t"]).expect("static primitive set")
}

fn full_size(h: usize) -> f64 {
    2f64.powi(h as i32 + 1) - 1.0
}

/// Closed-form mean size of FULL trees.
///
/// At `q = 1/2` the expression is 0/0 and the limit `2 h_max + 1` is
/// returned; close to 1/2 the defining sum is used instead of the closed
/// form. `q = 0` puts all mass on height `h_max`.
pub fn avg_size_full_analytic(q: f64, h_max: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) || h_max < 1 {
        return Err(GpError::Domain(format!(
            "FULL size needs q in [0, 1] and h_max >= 1 (q={q}, h_max={h_max})"
        )));
    }
    if q == 0.0 {
        return Ok(full_size(h_max));
    }
    if q == 0.5 {
        return Ok(2.0 * h_max as f64 + 1.0);
    }
    if (2.0 * q - 1.0).abs() < 1e-6 {
        return Ok(avg_size_full_by_sum(q, h_max));
    }
    let num = 2.0 * q - 2.0 * (2.0 * (1.0 - q)).powi(h_max as i32) + 1.0;
    Ok(num / (2.0 * q - 1.0))
}

/// Direct sum over the height distribution of FULL trees.
pub fn avg_size_full_by_sum(q: f64, h_max: usize) -> f64 {
    let below: f64 = (1..h_max)
        .map(|h| full_size(h) * q * (1.0 - q).powi(h as i32 - 1))
        .sum();
    below + full_size(h_max) * (1.0 - q).powi(h_max as i32 - 1)
}

/// Height-stratified GROW size estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowSizeEstimate {
    pub mean: f64,
    /// `p(h < h_max)`
    pub p_below_max: f64,
    /// `s̄(h < h_max)`; zero when the stratum is empty.
    pub mean_below_max: f64,
    /// `ŝ(h = h_max)`
    pub mean_at_max: f64,
    /// Standard error of `mean_at_max` when it was sampled.
    pub at_max_stderr: Option<f64>,
}

impl GrowSizeEstimate {
    fn combine(
        p_below: f64,
        mean_below: f64,
        mean_at_max: f64,
        at_max_stderr: Option<f64>,
    ) -> Self {
        Self {
            mean: (1.0 - p_below) * mean_at_max + p_below * mean_below,
            p_below_max: p_below,
            mean_below_max: mean_below,
            mean_at_max,
            at_max_stderr,
        }
    }
}

/// Per tree height `h` in `1..=h_max`: `(P(H = h), E[size; H = h])`.
fn grow_height_strata(q: f64, h_max: usize) -> Vec<(f64, f64)> {
    // For a child slot at depth d, cdf[j] = P(subtree height <= j) and
    // partial[j] = E[size * 1{height <= j}], j = 0..h_max.
    let width = h_max + 1;
    let mut cdf = vec![1.0; width];
    let mut partial = vec![1.0; width];
    // slots at depth h_max are forced terminals; walk up to depth 1
    for _depth in (1..h_max).rev() {
        let mut next_cdf = vec![0.0; width];
        let mut next_partial = vec![0.0; width];
        next_cdf[0] = q;
        next_partial[0] = q;
        for j in 1..width {
            let a = cdf[j - 1];
            let b = partial[j - 1];
            next_cdf[j] = q + (1.0 - q) * a * a;
            next_partial[j] = q + (1.0 - q) * (a * a + 2.0 * b * a);
        }
        cdf = next_cdf;
        partial = next_partial;
    }
    // root is a function with two depth-1 children
    let root = |j: usize| -> (f64, f64) {
        if j == 0 {
            return (0.0, 0.0);
        }
        let a = cdf[j - 1];
        let b = partial[j - 1];
        (a * a, a * a + 2.0 * b * a)
    };
    (1..=h_max)
        .map(|h| {
            let (c1, p1) = root(h);
            let (c0, p0) = root(h - 1);
            (c1 - c0, p1 - p0)
        })
        .collect()
}

/// Exact GROW mean size via the height-stratified recipe.
pub fn avg_size_grow_analytic(q: f64, h_max: usize) -> Result<GrowSizeEstimate> {
    grow_domain(q, h_max)?;
    let strata = grow_height_strata(q, h_max);
    let (p_at, e_at) = strata[h_max - 1];
    let p_below: f64 = strata[..h_max - 1].iter().map(|s| s.0).sum();
    let e_below: f64 = strata[..h_max - 1].iter().map(|s| s.1).sum();
    let mean_below = if p_below > 0.0 {
        e_below / p_below
    } else {
        0.0
    };
    let mean_at = if p_at > 0.0 {
        e_at / p_at
    } else {
        2.0 * h_max as f64 + 1.0
    };
    Ok(GrowSizeEstimate::combine(
        p_below.min(1.0),
        mean_below,
        mean_at,
        None,
    ))
}

/// GROW estimate with the per-size weight taken as written (no shape
/// multiplicity) and the at-cap stratum sampled by conditional Monte Carlo.
pub fn avg_size_grow_weighted<R: Rng + ?Sized>(
    q: f64,
    h_max: usize,
    samples: usize,
    rng: &mut R,
) -> Result<GrowSizeEstimate> {
    grow_domain(q, h_max)?;
    let mut p_below = 0.0;
    let mut weighted_mean = 0.0;
    for h in 1..h_max {
        let (s_min, s_max) = (2 * h + 1, (1usize << (h + 1)) - 1);
        let mut w_h = 0.0;
        let mut ws_h = 0.0;
        for s in (s_min..=s_max).step_by(2) {
            let t_s = s.div_ceil(2);
            let f_s = (s - 1) / 2;
            let p = (1.0 - q).powi(f_s as i32 - 1) * q.powi(t_s as i32);
            w_h += p;
            ws_h += p * s as f64;
        }
        p_below += w_h;
        weighted_mean += ws_h;
    }
    let mean_below = if p_below > 0.0 {
        weighted_mean / p_below
    } else {
        0.0
    };
    let (mean_at, se) = conditional_size_at_max(q, h_max, samples, rng)?;
    Ok(GrowSizeEstimate::combine(
        p_below.min(1.0),
        mean_below,
        mean_at,
        Some(se),
    ))
}

/// Mean (and standard error) of GROW tree size among trees that reach
/// height `h_max`, by rejection sampling.
pub fn conditional_size_at_max<R: Rng + ?Sized>(
    q: f64,
    h_max: usize,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let prims = shape_only();
    let mut acc = Moments::default();
    let mut attempts = 0usize;
    let budget = samples.saturating_mul(1000).max(1000);
    while acc.n < samples && attempts < budget {
        attempts += 1;
        let t = create_tree_grow(&prims, q, h_max, rng)?;
        if t.height() == h_max {
            acc.push(t.size() as f64);
        }
    }
    if acc.n == 0 {
        return Err(GpError::Domain(format!(
            "no GROW tree reached height {h_max} in {attempts} draws at q={q}"
        )));
    }
    Ok((acc.mean(), acc.stderr()))
}

fn grow_domain(q: f64, h_max: usize) -> Result<()> {
    if !(q > 0.0 && q < 1.0) || h_max < 1 {
        return Err(GpError::Domain(format!(
            "GROW size needs 0 < q < 1 and h_max >= 1 (q={q}, h_max={h_max})"
        )));
    }
    Ok(())
}

/// Mean size of a ramped population in the large-population limit: the
/// per-height generators are mixed with equal weight.
pub fn ramped_mean_size(method: InitMethod, q: f64, lo: usize, hi: usize) -> Result<f64> {
    if lo < 1 || lo > hi {
        return Err(GpError::Config(format!("bad height range [{lo}, {hi}]")));
    }
    let grow = |h: usize| -> Result<f64> {
        if q >= 1.0 {
            Ok(3.0)
        } else if q <= 0.0 {
            Ok(full_size(h))
        } else {
            Ok(avg_size_grow_analytic(q, h)?.mean)
        }
    };
    let mut total = 0.0;
    let mut buckets = 0.0;
    for h in lo..=hi {
        match method {
            InitMethod::Full | InitMethod::RampedFull => {
                total += avg_size_full_analytic(q, h)?;
                buckets += 1.0;
            }
            InitMethod::Grow | InitMethod::RampedGrow => {
                total += grow(h)?;
                buckets += 1.0;
            }
            InitMethod::RampedHalfHalf => {
                total += avg_size_full_analytic(q, h)? + grow(h)?;
                buckets += 2.0;
            }
        }
    }
    Ok(total / buckets)
}

/// Sample mean and standard error of tree size for one generator.
pub fn monte_carlo_mean_size<R: Rng + ?Sized>(
    full: bool,
    q: f64,
    h_max: usize,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let prims = shape_only();
    let mut acc = Moments::default();
    for _ in 0..samples {
        let t = if full {
            create_tree_full(&prims, q, h_max, rng)?
        } else {
            create_tree_grow(&prims, q, h_max, rng)?
        };
        acc.push(t.size() as f64);
    }
    if acc.n == 0 {
        return Err(GpError::Empty("Monte Carlo needs at least one sample"));
    }
    Ok((acc.mean(), acc.stderr()))
}

#[derive(Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}
