//! Tree initialization: FULL and GROW generators and their ramped variants.
//!
//! Heights count edges from the root, so the smallest tree either generator
//! produces is one function with two terminal children (height 1, size 3).
//! Neither generator ever returns a lone terminal.
//!
//! FULL draws a height first: starting at height 1 it stops with
//! probability `q` at each level and is forced to stop at `h_max`. The result
//! is the complete tree of that height, so `P(h) = q(1-q)^(h-1)` for
//! `h < h_max`. GROW draws a function root, then each child slot
//! independently becomes a terminal with probability `q`, except that slots
//! at depth `h_max` are always terminals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GpError, Result};
use crate::tree::{Node, PrimitiveSet, ProgramTree};

/// Supplies symbols for freshly created nodes.
pub trait SymbolSource {
    fn draw_function<R: Rng + ?Sized>(&self, rng: &mut R) -> u8;
    fn draw_terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> u8;
}

impl SymbolSource for PrimitiveSet {
    fn draw_function<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        rng.gen_range(0..self.chi_f()) as u8
    }

    fn draw_terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        rng.gen_range(0..self.chi_t()) as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    Full,
    Grow,
    RampedFull,
    RampedGrow,
    RampedHalfHalf,
}

impl InitMethod {
    pub fn is_ramped(self) -> bool {
        matches!(
            self,
            InitMethod::RampedFull | InitMethod::RampedGrow | InitMethod::RampedHalfHalf
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub method: InitMethod,
    /// Probability of drawing a terminal at an eligible position. `None`
    /// means the terminal frequency of the primitive set.
    #[serde(default)]
    pub q: Option<f64>,
    pub max_height: usize,
    /// Inclusive height range for ramped methods; defaults to `1..=max_height`.
    #[serde(default)]
    pub height_range: Option<(usize, usize)>,
}

impl InitConfig {
    pub fn new(method: InitMethod, q: Option<f64>, max_height: usize) -> Self {
        Self {
            method,
            q,
            max_height,
            height_range: None,
        }
    }

    pub fn ramped(method: InitMethod, q: Option<f64>, lo: usize, hi: usize) -> Self {
        Self {
            method,
            q,
            max_height: hi,
            height_range: Some((lo, hi)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_height < 1 {
            return Err(GpError::Config("max_height must be at least 1".into()));
        }
        if let Some(q) = self.q {
            check_q(q)?;
        }
        if let Some((lo, hi)) = self.height_range {
            if lo < 1 || lo > hi || hi > self.max_height {
                return Err(GpError::Config(format!(
                    "height range [{lo}, {hi}] must satisfy 1 <= lo <= hi <= max_height ({})",
                    self.max_height
                )));
            }
        }
        Ok(())
    }

    pub fn resolve_q(&self, prims: &PrimitiveSet) -> f64 {
        self.q.unwrap_or_else(|| prims.terminal_frequency())
    }

    pub fn heights(&self) -> (usize, usize) {
        if self.method.is_ramped() {
            self.height_range.unwrap_or((1, self.max_height))
        } else {
            (self.max_height, self.max_height)
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(GpError::Config(format!("q must lie in [0, 1], got {q}")));
    }
    Ok(())
}

fn check_args(q: f64, h_max: usize) -> Result<()> {
    check_q(q)?;
    if h_max < 1 {
        return Err(GpError::Config("h_max must be at least 1".into()));
    }
    Ok(())
}

/// Algorithm II: a complete tree whose height is drawn geometrically from
/// `1..=h_max`.
pub fn create_tree_full<S, R>(src: &S, q: f64, h_max: usize, rng: &mut R) -> Result<ProgramTree>
where
    S: SymbolSource,
    R: Rng + ?Sized,
{
    check_args(q, h_max)?;
    let mut height = 1;
    while height < h_max && !rng.gen_bool(q) {
        height += 1;
    }
    let mut nodes = Vec::with_capacity((1 << (height + 1)) - 1);
    fill_full(src, height, &mut nodes, rng);
    Ok(ProgramTree::from_nodes_unchecked(nodes))
}

fn fill_full<S: SymbolSource, R: Rng + ?Sized>(
    src: &S,
    height: usize,
    out: &mut Vec<Node>,
    rng: &mut R,
) {
    if height == 0 {
        out.push(Node::Terminal(src.draw_terminal(rng)));
    } else {
        out.push(Node::Function(src.draw_function(rng)));
        fill_full(src, height - 1, out, rng);
        fill_full(src, height - 1, out, rng);
    }
}

/// Algorithm I: a not-necessarily-full tree of height at most `h_max`.
pub fn create_tree_grow<S, R>(src: &S, q: f64, h_max: usize, rng: &mut R) -> Result<ProgramTree>
where
    S: SymbolSource,
    R: Rng + ?Sized,
{
    check_args(q, h_max)?;
    let mut nodes = Vec::new();
    nodes.push(Node::Function(src.draw_function(rng)));
    grow_child(src, q, 1, h_max, &mut nodes, rng);
    grow_child(src, q, 1, h_max, &mut nodes, rng);
    Ok(ProgramTree::from_nodes_unchecked(nodes))
}

fn grow_child<S: SymbolSource, R: Rng + ?Sized>(
    src: &S,
    q: f64,
    depth: usize,
    h_max: usize,
    out: &mut Vec<Node>,
    rng: &mut R,
) {
    if depth >= h_max || rng.gen_bool(q) {
        out.push(Node::Terminal(src.draw_terminal(rng)));
    } else {
        out.push(Node::Function(src.draw_function(rng)));
        grow_child(src, q, depth + 1, h_max, out, rng);
        grow_child(src, q, depth + 1, h_max, out, rng);
    }
}

/// `n` trees following `cfg`. Ramped methods split the population as evenly
/// as possible over the height range (and over FULL/GROW halves for ramped
/// half-and-half, FULL first); leftover trees go to the smallest heights.
pub fn create_ramped_population<S, R>(
    src: &S,
    q: f64,
    cfg: &InitConfig,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ProgramTree>>
where
    S: SymbolSource,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    check_q(q)?;
    if n < 1 {
        return Err(GpError::Config("population size must be at least 1".into()));
    }
    let (lo, hi) = cfg.heights();
    let mut buckets: Vec<(usize, bool)> = Vec::new();
    for h in lo..=hi {
        match cfg.method {
            InitMethod::Full | InitMethod::RampedFull => buckets.push((h, true)),
            InitMethod::Grow | InitMethod::RampedGrow => buckets.push((h, false)),
            InitMethod::RampedHalfHalf => {
                buckets.push((h, true));
                buckets.push((h, false));
            }
        }
    }
    let base = n / buckets.len();
    let extra = n % buckets.len();
    let mut out = Vec::with_capacity(n);
    for (i, &(h, full)) in buckets.iter().enumerate() {
        let count = base + usize::from(i < extra);
        for _ in 0..count {
            let tree = if full {
                create_tree_full(src, q, h, rng)?
            } else {
                create_tree_grow(src, q, h, rng)?
            };
            out.push(tree);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::tree::tree_statistics;

    fn prims() -> PrimitiveSet {
        PrimitiveSet::new(["F", "G"], ["a", "b", "c"]).unwrap()
    }

    #[test]
    fn full_extremes() {
        let p = prims();
        let mut rng = SeededRng::new(1, 0).generator();
        for _ in 0..50 {
            let t = create_tree_full(&p, 1.0, 5, &mut rng).unwrap();
            assert_eq!((t.size(), t.height()), (3, 1));
            let t = create_tree_full(&p, 0.0, 3, &mut rng).unwrap();
            assert_eq!((t.size(), t.height()), (15, 3));
            assert!(t.is_full());
        }
    }

    #[test]
    fn grow_extremes() {
        let p = prims();
        let mut rng = SeededRng::new(2, 0).generator();
        for _ in 0..50 {
            assert_eq!(create_tree_grow(&p, 1.0, 8, &mut rng).unwrap().size(), 3);
            let t = create_tree_grow(&p, 0.0, 3, &mut rng).unwrap();
            assert_eq!((t.size(), t.height()), (15, 3));
        }
    }

    #[test]
    fn full_mean_size_small_case() {
        // sizes 3 w.p. q and 7 w.p. 1-q: 7 - 4q = 6 at q = 0.25
        let p = prims();
        let mut rng = SeededRng::new(3, 0).generator();
        let trees: Vec<_> = (0..100_000)
            .map(|_| create_tree_full(&p, 0.25, 2, &mut rng).unwrap())
            .collect();
        let mean = tree_statistics(&trees).unwrap().mean_size;
        assert!((mean - 6.0).abs() < 0.1, "mean {mean}");
        assert!(trees.iter().all(|t| t.size() == 3 || t.size() == 7));
    }

    #[test]
    fn grow_size_support_and_mass() {
        // two independent child draws; both terminal with probability q^2
        let p = prims();
        let mut rng = SeededRng::new(4, 0).generator();
        let n = 100_000;
        let mut small = 0;
        for _ in 0..n {
            let s = create_tree_grow(&p, 0.5, 2, &mut rng).unwrap().size();
            assert!(matches!(s, 3 | 5 | 7));
            small += usize::from(s == 3);
        }
        let frac = small as f64 / n as f64;
        assert!((frac - 0.25).abs() < 0.01, "P(size=3) = {frac}");
    }

    #[test]
    fn bad_arguments() {
        let p = prims();
        let mut rng = SeededRng::new(5, 0).generator();
        assert!(create_tree_full(&p, 0.5, 0, &mut rng).is_err());
        assert!(create_tree_grow(&p, 1.5, 3, &mut rng).is_err());
        let bad = InitConfig::ramped(InitMethod::RampedHalfHalf, None, 4, 3);
        assert!(create_ramped_population(&p, 0.5, &bad, 10, &mut rng).is_err());
        let bad = InitConfig::ramped(InitMethod::RampedFull, None, 0, 3);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ramped_half_half_split() {
        let p = prims();
        let mut rng = SeededRng::new(6, 0).generator();
        let cfg = InitConfig::ramped(InitMethod::RampedHalfHalf, Some(0.0), 2, 7);
        let pop = create_ramped_population(&p, 0.0, &cfg, 12, &mut rng).unwrap();
        assert_eq!(pop.len(), 12);
        // with q = 0 both generators hit the cap, so heights reveal the split
        let heights: Vec<usize> = pop.iter().map(|t| t.height()).collect();
        assert_eq!(heights, vec![2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7]);
    }

    #[test]
    fn ramped_remainder_goes_low() {
        let p = prims();
        let mut rng = SeededRng::new(7, 0).generator();
        let cfg = InitConfig::ramped(InitMethod::RampedFull, Some(0.0), 2, 4);
        let pop = create_ramped_population(&p, 0.0, &cfg, 8, &mut rng).unwrap();
        let heights: Vec<usize> = pop.iter().map(|t| t.height()).collect();
        assert_eq!(heights, vec![2, 2, 2, 3, 3, 3, 4, 4]);

        let cfg = InitConfig::ramped(InitMethod::RampedFull, Some(0.3), 3, 3);
        let pop = create_ramped_population(&p, 0.3, &cfg, 5, &mut rng).unwrap();
        assert_eq!(pop.len(), 5);
        assert!(pop.iter().all(|t| t.is_full() && t.height() <= 3));
    }
}
