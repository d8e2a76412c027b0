//! Generational selecto-recombinative GP: tournament selection, subtree
//! crossover, elitism, no mutation.
//!
//! Bookkeeping conventions:
//! * Every generation, elites included, is evaluated in full, so
//!   `n_fe = n * generations`.
//! * `t_c` is the index of the generation in which the best-of-run
//!   individual first appeared (the initial population is generation 0).
//! * Elites stay in the population and compete in tournaments.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GpError, Result};
use crate::init::{create_ramped_population, InitConfig};
use crate::problems::{Evaluation, ProblemSpec};
use crate::rng::SeededRng;
use crate::tree::{Node, ProgramTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpConfig {
    pub population_size: usize,
    #[serde(default = "defaults::tournament_size")]
    pub tournament_size: usize,
    #[serde(default = "defaults::crossover_prob")]
    pub crossover_prob: f64,
    #[serde(default = "defaults::elite_fraction")]
    pub elite_fraction: f64,
    #[serde(default = "defaults::max_nodes")]
    pub max_nodes: usize,
    #[serde(default = "defaults::max_generations")]
    pub max_generations: usize,
    /// Stop after this many generations without improvement of the best.
    #[serde(default)]
    pub stall_generations: Option<usize>,
    /// Probability of placing a crossover point on a function node (Koza's
    /// 90/10 rule uses 0.9). `None` picks points uniformly over all nodes.
    #[serde(default)]
    pub function_point_bias: Option<f64>,
    pub init: InitConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

mod defaults {
    pub fn tournament_size() -> usize {
        4
    }
    pub fn crossover_prob() -> f64 {
        1.0
    }
    pub fn elite_fraction() -> f64 {
        0.05
    }
    pub fn max_nodes() -> usize {
        1024
    }
    pub fn max_generations() -> usize {
        200
    }
}

impl GpConfig {
    pub fn new(population_size: usize, init: InitConfig) -> Self {
        Self {
            population_size,
            tournament_size: defaults::tournament_size(),
            crossover_prob: defaults::crossover_prob(),
            elite_fraction: defaults::elite_fraction(),
            max_nodes: defaults::max_nodes(),
            max_generations: defaults::max_generations(),
            stall_generations: None,
            function_point_bias: None,
            init,
            seed: 0,
            stream: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GpError::Config(msg));
        if self.population_size < 2 {
            return bad(format!(
                "population size must be >= 2, got {}",
                self.population_size
            ));
        }
        if self.tournament_size < 1 {
            return bad("tournament size must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad(format!(
                "crossover probability {} outside [0, 1]",
                self.crossover_prob
            ));
        }
        if !(0.0..1.0).contains(&self.elite_fraction) {
            return bad(format!(
                "elite fraction {} outside [0, 1)",
                self.elite_fraction
            ));
        }
        if self.max_nodes < 3 {
            return bad("max nodes must be >= 3".into());
        }
        if self.max_generations < 1 {
            return bad("max generations must be >= 1".into());
        }
        if let Some(b) = self.function_point_bias {
            if !(0.0..=1.0).contains(&b) {
                return bad(format!("function point bias {b} outside [0, 1]"));
            }
        }
        self.init.validate()
    }

    /// `ceil(elite_fraction * n)`
    pub fn elite_count(&self) -> usize {
        let raw = self.elite_fraction * self.population_size as f64;
        ((raw - 1e-9).ceil().max(0.0) as usize).min(self.population_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    /// Generation index at which the best-of-run first appeared.
    pub t_c: usize,
    /// Populations evaluated, including the initial one.
    pub generations: usize,
    pub n_fe: usize,
    pub best: Evaluation,
    pub best_correct_bb_count: usize,
    pub best_size: usize,
    pub mean_size_per_generation: Vec<f64>,
    pub best_fitness_per_generation: Vec<f64>,
    /// Mean leaf count of the initial population.
    pub initial_mean_leaves: f64,
}

/// Index of the tournament winner among `size` uniform draws with
/// replacement; ties keep the earliest draw.
pub fn tournament_select<R: Rng + ?Sized>(evals: &[Evaluation], size: usize, rng: &mut R) -> usize {
    assert!(!evals.is_empty(), "tournament over an empty population");
    let mut best = rng.gen_range(0..evals.len());
    for _ in 1..size {
        let c = rng.gen_range(0..evals.len());
        if evals[c].better_than(&evals[best]) {
            best = c;
        }
    }
    best
}

/// Swap the subtree rooted at `i` in `a` with the one rooted at `j` in `b`.
/// A child larger than `max_nodes` is replaced by a copy of its parent.
pub fn crossover_at(
    a: &ProgramTree,
    i: usize,
    b: &ProgramTree,
    j: usize,
    max_nodes: usize,
) -> (ProgramTree, ProgramTree) {
    let ie = a.subtree_end(i);
    let je = b.subtree_end(j);
    let (an, bn) = (a.nodes(), b.nodes());
    let splice = |host: &[Node], s: usize, e: usize, donor: &[Node]| -> Vec<Node> {
        let mut v = Vec::with_capacity(host.len() - (e - s) + donor.len());
        v.extend_from_slice(&host[..s]);
        v.extend_from_slice(donor);
        v.extend_from_slice(&host[e..]);
        v
    };
    let size_a = a.size() - (ie - i) + (je - j);
    let size_b = b.size() - (je - j) + (ie - i);
    let child_a = if size_a > max_nodes {
        a.clone()
    } else {
        ProgramTree::from_nodes_unchecked(splice(an, i, ie, &bn[j..je]))
    };
    let child_b = if size_b > max_nodes {
        b.clone()
    } else {
        ProgramTree::from_nodes_unchecked(splice(bn, j, je, &an[i..ie]))
    };
    (child_a, child_b)
}

fn pick_point<R: Rng + ?Sized>(t: &ProgramTree, function_bias: Option<f64>, rng: &mut R) -> usize {
    match function_bias {
        Some(bias) if t.size() > 1 => {
            let want_function = rng.gen_bool(bias);
            let candidates: Vec<usize> = t
                .nodes()
                .iter()
                .enumerate()
                .filter(|(_, n)| n.is_terminal() != want_function)
                .map(|(k, _)| k)
                .collect();
            candidates[rng.gen_range(0..candidates.len())]
        }
        _ => rng.gen_range(0..t.size()),
    }
}

pub fn subtree_crossover<R: Rng + ?Sized>(
    a: &ProgramTree,
    b: &ProgramTree,
    max_nodes: usize,
    rng: &mut R,
) -> (ProgramTree, ProgramTree) {
    subtree_crossover_biased(a, b, max_nodes, None, rng)
}

pub fn subtree_crossover_biased<R: Rng + ?Sized>(
    a: &ProgramTree,
    b: &ProgramTree,
    max_nodes: usize,
    function_bias: Option<f64>,
    rng: &mut R,
) -> (ProgramTree, ProgramTree) {
    let i = pick_point(a, function_bias, rng);
    let j = pick_point(b, function_bias, rng);
    crossover_at(a, i, b, j, max_nodes)
}

fn evaluate_all(problem: &ProblemSpec, pop: &[ProgramTree]) -> Result<Vec<Evaluation>> {
    pop.iter().map(|t| problem.evaluate(t)).collect()
}

/// First index holding the best evaluation.
fn best_index(evals: &[Evaluation]) -> usize {
    let mut best = 0;
    for (k, e) in evals.iter().enumerate().skip(1) {
        if e.better_than(&evals[best]) {
            best = k;
        }
    }
    best
}

/// Run one GP run from the seed and stream in `cfg`.
pub fn evolve(problem: &ProblemSpec, cfg: &GpConfig) -> Result<RunStats> {
    cfg.validate()?;
    let n = cfg.population_size;
    let mut rng = SeededRng::new(cfg.seed, cfg.stream).generator();
    let q = cfg.init.resolve_q(problem.primitives());
    let mut pop = create_ramped_population(problem, q, &cfg.init, n, &mut rng)?;
    let initial_mean_leaves = pop.iter().map(|t| t.leaf_count()).sum::<usize>() as f64 / n as f64;
    let elites = cfg.elite_count();

    let mut generations = 0usize;
    let mut best: Option<(Evaluation, usize)> = None;
    let mut t_c = 0usize;
    let mut mean_sizes = Vec::new();
    let mut best_fitness = Vec::new();

    loop {
        let evals = evaluate_all(problem, &pop)?;
        generations += 1;
        let gen_index = generations - 1;
        let b = best_index(&evals);
        if best.is_none_or(|(e, _)| evals[b].better_than(&e)) {
            best = Some((evals[b], pop[b].size()));
            t_c = gen_index;
        }
        let (best_eval, _) = best.expect("set above");
        mean_sizes.push(pop.iter().map(|t| t.size()).sum::<usize>() as f64 / n as f64);
        best_fitness.push(best_eval.fitness);

        let stalled = cfg.stall_generations.is_some_and(|s| gen_index - t_c >= s);
        if best_eval.is_optimal || generations >= cfg.max_generations || stalled {
            break;
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| {
            if evals[x].better_than(&evals[y]) {
                std::cmp::Ordering::Less
            } else if evals[y].better_than(&evals[x]) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        let mut next: Vec<ProgramTree> = order[..elites].iter().map(|&k| pop[k].clone()).collect();
        while next.len() < n {
            let pa = tournament_select(&evals, cfg.tournament_size, &mut rng);
            let pb = tournament_select(&evals, cfg.tournament_size, &mut rng);
            let (ca, cb) = if rng.gen_bool(cfg.crossover_prob) {
                subtree_crossover_biased(
                    &pop[pa],
                    &pop[pb],
                    cfg.max_nodes,
                    cfg.function_point_bias,
                    &mut rng,
                )
            } else {
                (pop[pa].clone(), pop[pb].clone())
            };
            next.push(ca);
            if next.len() < n {
                next.push(cb);
            }
        }
        pop = next;
    }

    let (best_eval, best_size) = best.expect("at least one generation");
    Ok(RunStats {
        t_c,
        generations,
        n_fe: n * generations,
        best: best_eval,
        best_correct_bb_count: best_eval.correct_bb_count,
        best_size,
        mean_size_per_generation: mean_sizes,
        best_fitness_per_generation: best_fitness,
        initial_mean_leaves,
    })
}

/// `runs` independent runs on streams derived from `base`; results are in
/// run-index order regardless of scheduling.
pub fn run_batch(
    problem: &ProblemSpec,
    cfg: &GpConfig,
    runs: usize,
    base: SeededRng,
) -> Result<Vec<RunStats>> {
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let stream = base.derive(&[r as u64]);
            let mut c = cfg.clone();
            c.seed = stream.seed;
            c.stream = stream.stream;
            evolve(problem, &c)
        })
        .collect()
}

/// Mean best-of-run correct building-block count over `runs` runs.
pub fn success_trial(
    problem: &ProblemSpec,
    cfg: &GpConfig,
    runs: usize,
    base: SeededRng,
) -> Result<f64> {
    if runs < 1 {
        return Err(GpError::Config(
            "success trial needs at least one run".into(),
        ));
    }
    let stats = run_batch(problem, cfg, runs, base)?;
    Ok(stats
        .iter()
        .map(|s| s.best_correct_bb_count as f64)
        .sum::<f64>()
        / runs as f64)
}
