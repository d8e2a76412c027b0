//! The three model problems and their building-block bookkeeping.
//!
//! * ORDER: a single `JOIN` function over complementary terminal pairs
//!   `X_i` / `~X_i`. Leaves are scanned left to right and the first
//!   occurrence of either polarity fixes the expressed value of index `i`.
//! * LOUD: `add` over the constants 0, 1 and 4. Every 4 and every 1 is
//!   expressed; the target is exactly `m4` fours and `m1` ones.
//! * ON-OFF: functions `EXP` and `~EXP` over `X1`, `X2`. A leaf is expressed
//!   only when every ancestor is `EXP`; the target is `m_x1` / `m_x2`
//!   expressed leaves.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GpError, Result};
use crate::init::SymbolSource;
use crate::tree::{Node, PrimitiveSet, ProgramTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// Fitness of one program under a problem's own convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub direction: Direction,
    /// Building blocks realized correctly, in `0..=m`.
    pub correct_bb_count: usize,
    pub is_optimal: bool,
}

impl Evaluation {
    pub fn better_than(&self, other: &Evaluation) -> bool {
        match self.direction {
            Direction::Maximize => self.fitness > other.fitness,
            Direction::Minimize => self.fitness < other.fitness,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderProblem {
    m: usize,
    prims: PrimitiveSet,
}

impl OrderProblem {
    pub fn new(m: usize) -> Result<Self> {
        if !(1..=128).contains(&m) {
            return Err(GpError::Config(format!(
                "ORDER needs 1 <= m <= 128, got {m}"
            )));
        }
        let terminals = (1..=m)
            .map(|i| format!("X{i}"))
            .chain((1..=m).map(|i| format!("~X{i}")));
        Ok(Self {
            m,
            prims: PrimitiveSet::new(["JOIN"], terminals)?,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn primitives(&self) -> &PrimitiveSet {
        &self.prims
    }

    /// Terminal id of `X_i` (1-based `i`) or its complement.
    pub fn literal(&self, i: usize, positive: bool) -> u8 {
        assert!(i >= 1 && i <= self.m, "ORDER index {i} out of range");
        (if positive { i - 1 } else { self.m + i - 1 }) as u8
    }
}

/// Expressed terminals of an ORDER tree, in order of first occurrence.
pub fn express_order(tree: &ProgramTree, p: &OrderProblem) -> Result<Vec<u8>> {
    let m = p.m;
    let mut seen = vec![false; m];
    let mut out = Vec::new();
    for t in tree.leaves() {
        let t = t as usize;
        if t >= 2 * m {
            return Err(GpError::ForeignSymbol {
                problem: "ORDER",
                symbol: format!("terminal #{t}"),
            });
        }
        let idx = t % m;
        if !seen[idx] {
            seen[idx] = true;
            out.push(t as u8);
        }
    }
    Ok(out)
}

pub fn fitness_order(tree: &ProgramTree, p: &OrderProblem) -> Result<Evaluation> {
    let expressed = express_order(tree, p)?;
    let correct = expressed.iter().filter(|&&t| (t as usize) < p.m).count();
    Ok(Evaluation {
        fitness: correct as f64,
        direction: Direction::Maximize,
        correct_bb_count: correct,
        is_optimal: correct == p.m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoudProblem {
    m4: usize,
    m1: usize,
    prims: PrimitiveSet,
}

impl LoudProblem {
    pub const ZERO: u8 = 0;
    pub const ONE: u8 = 1;
    pub const FOUR: u8 = 2;

    pub fn new(m4: usize, m1: usize) -> Result<Self> {
        if m4 + m1 < 1 {
            return Err(GpError::Config("LOUD needs m4 + m1 >= 1".into()));
        }
        Ok(Self {
            m4,
            m1,
            prims: PrimitiveSet::new(["add"], ["0", "1", "4"])?,
        })
    }

    pub fn m(&self) -> usize {
        self.m4 + self.m1
    }

    pub fn targets(&self) -> (usize, usize) {
        (self.m4, self.m1)
    }

    pub fn primitives(&self) -> &PrimitiveSet {
        &self.prims
    }
}

pub fn fitness_loud(tree: &ProgramTree, p: &LoudProblem) -> Result<Evaluation> {
    let (mut fours, mut ones) = (0usize, 0usize);
    for t in tree.leaves() {
        match t {
            LoudProblem::FOUR => fours += 1,
            LoudProblem::ONE => ones += 1,
            LoudProblem::ZERO => {}
            other => {
                return Err(GpError::ForeignSymbol {
                    problem: "LOUD",
                    symbol: format!("terminal #{other}"),
                })
            }
        }
    }
    Ok(deviation_evaluation(fours, ones, p.m4, p.m1))
}

fn deviation_evaluation(i: usize, j: usize, target_i: usize, target_j: usize) -> Evaluation {
    let f = i.abs_diff(target_i) + j.abs_diff(target_j);
    let m = target_i + target_j;
    Evaluation {
        fitness: f as f64,
        direction: Direction::Minimize,
        correct_bb_count: m - f.min(m),
        is_optimal: f == 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnOffProblem {
    m_x1: usize,
    m_x2: usize,
    p_exp: f64,
    prims: PrimitiveSet,
}

impl OnOffProblem {
    pub const EXP: u8 = 0;
    pub const NOT_EXP: u8 = 1;
    pub const X1: u8 = 0;
    pub const X2: u8 = 1;

    pub fn new(m_x1: usize, m_x2: usize, p_exp: f64) -> Result<Self> {
        if m_x1 + m_x2 < 1 {
            return Err(GpError::Config("ON-OFF needs m_x1 + m_x2 >= 1".into()));
        }
        if !(0.0..=1.0).contains(&p_exp) {
            return Err(GpError::Config(format!(
                "p_exp must lie in [0, 1], got {p_exp}"
            )));
        }
        Ok(Self {
            m_x1,
            m_x2,
            p_exp,
            prims: PrimitiveSet::new(["EXP", "~EXP"], ["X1", "X2"])?,
        })
    }

    pub fn m(&self) -> usize {
        self.m_x1 + self.m_x2
    }

    pub fn targets(&self) -> (usize, usize) {
        (self.m_x1, self.m_x2)
    }

    pub fn p_exp(&self) -> f64 {
        self.p_exp
    }

    pub fn primitives(&self) -> &PrimitiveSet {
        &self.prims
    }
}

/// Expressed terminals of an ON-OFF tree, left to right, repeats included.
pub fn express_onoff(tree: &ProgramTree, _p: &OnOffProblem) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    // each pending child slot carries whether its ancestors are all EXP
    let mut pending = vec![true];
    for n in tree.nodes() {
        let live = pending.pop().expect("valid prefix tree");
        match *n {
            Node::Function(f) => {
                if f > OnOffProblem::NOT_EXP {
                    return Err(GpError::ForeignSymbol {
                        problem: "ON-OFF",
                        symbol: format!("function #{f}"),
                    });
                }
                let child_live = live && f == OnOffProblem::EXP;
                pending.push(child_live);
                pending.push(child_live);
            }
            Node::Terminal(t) => {
                if t > OnOffProblem::X2 {
                    return Err(GpError::ForeignSymbol {
                        problem: "ON-OFF",
                        symbol: format!("terminal #{t}"),
                    });
                }
                if live {
                    out.push(t);
                }
            }
        }
    }
    Ok(out)
}

pub fn fitness_onoff(tree: &ProgramTree, p: &OnOffProblem) -> Result<Evaluation> {
    let expressed = express_onoff(tree, p)?;
    let x1 = expressed.iter().filter(|&&t| t == OnOffProblem::X1).count();
    let x2 = expressed.len() - x1;
    Ok(deviation_evaluation(x1, x2, p.m_x1, p.m_x2))
}

/// One of the three model problems with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Order(OrderProblem),
    Loud(LoudProblem),
    OnOff(OnOffProblem),
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Order(_) => "order",
            ProblemSpec::Loud(_) => "loud",
            ProblemSpec::OnOff(_) => "onoff",
        }
    }

    pub fn m(&self) -> usize {
        match self {
            ProblemSpec::Order(p) => p.m(),
            ProblemSpec::Loud(p) => p.m(),
            ProblemSpec::OnOff(p) => p.m(),
        }
    }

    pub fn primitives(&self) -> &PrimitiveSet {
        match self {
            ProblemSpec::Order(p) => p.primitives(),
            ProblemSpec::Loud(p) => p.primitives(),
            ProblemSpec::OnOff(p) => p.primitives(),
        }
    }

    pub fn evaluate(&self, tree: &ProgramTree) -> Result<Evaluation> {
        match self {
            ProblemSpec::Order(p) => fitness_order(tree, p),
            ProblemSpec::Loud(p) => fitness_loud(tree, p),
            ProblemSpec::OnOff(p) => fitness_onoff(tree, p),
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            ProblemSpec::Order(_) => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    /// Fitness value of a perfect program.
    pub fn optimum(&self) -> f64 {
        match self {
            ProblemSpec::Order(p) => p.m() as f64,
            _ => 0.0,
        }
    }
}

/// Size of the most compact perfect program, `2m - 1`.
pub fn kolmogorov_size(p: &ProblemSpec) -> usize {
    2 * p.m() - 1
}

impl SymbolSource for ProblemSpec {
    fn draw_function<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        match self {
            ProblemSpec::OnOff(p) => {
                if rng.gen_bool(p.p_exp) {
                    OnOffProblem::EXP
                } else {
                    OnOffProblem::NOT_EXP
                }
            }
            _ => self.primitives().draw_function(rng),
        }
    }

    fn draw_terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        self.primitives().draw_terminal(rng)
    }
}

/// Problem family instantiated at a given size `m`, as used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemFamily {
    Order,
    /// `m4 = ceil(m / 2)`, `m1 = m - m4`.
    Loud,
    /// `m_x1 = ceil(m / 2)`, `m_x2 = m - m_x1`.
    Onoff {
        p_exp: f64,
    },
}

impl ProblemFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemFamily::Order => "order",
            ProblemFamily::Loud => "loud",
            ProblemFamily::Onoff { .. } => "onoff",
        }
    }

    pub fn instantiate(&self, m: usize) -> Result<ProblemSpec> {
        let big = m.div_ceil(2);
        Ok(match *self {
            ProblemFamily::Order => ProblemSpec::Order(OrderProblem::new(m)?),
            ProblemFamily::Loud => ProblemSpec::Loud(LoudProblem::new(big, m - big)?),
            ProblemFamily::Onoff { p_exp } => {
                ProblemSpec::OnOff(OnOffProblem::new(big, m - big, p_exp)?)
            }
        })
    }
}
