use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gp_sizing::combinatorics::{mean_var_expressed, oracle_enumerate};
use gp_sizing::engine::evolve;
use gp_sizing::error::{GpError, Result};
use gp_sizing::harness::sweep::{model_inputs, SIGMA2_BB, SIGNAL_D};
use gp_sizing::harness::{
    bisect_min_popsize, fit_loglog_slope, predict, sweep, ExperimentConfig, Scale,
};
use gp_sizing::init::{create_ramped_population, InitConfig, InitMethod};
use gp_sizing::problems::ProblemFamily;
use gp_sizing::rng::SeededRng;
use gp_sizing::sizing::{c_for_m, ga_popsize, CMethod};
use gp_sizing::tree::{tree_statistics, PrimitiveSet};
use gp_sizing::treesize::ramped_mean_size;

#[derive(Parser)]
#[command(
    name = "gpsize",
    version,
    about = "Population sizing for tree-based GP"
)]
struct Cli {
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Run counts; overrides the config file when given.
    #[arg(long, global = true, value_enum)]
    scale: Option<Scale>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Order,
    Loud,
    Onoff,
}

#[derive(clap::Args, Clone)]
struct ProblemArgs {
    /// Problem family; ignored when --config is given.
    #[arg(long, value_enum, default_value = "order")]
    problem: Family,
    /// ON-OFF probability of drawing EXP.
    #[arg(long, default_value_t = 1.0)]
    p_exp: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Model-predicted population sizes.
    Size {
        #[command(flatten)]
        p: ProblemArgs,
        #[arg(long)]
        m: usize,
    },
    /// A single GP run.
    Run {
        #[command(flatten)]
        p: ProblemArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Bisection for the minimal population size.
    Bisect {
        #[command(flatten)]
        p: ProblemArgs,
        #[arg(long)]
        m: usize,
    },
    /// Bisection sweep over the configured problem sizes; writes a CSV.
    Sweep {
        #[command(flatten)]
        p: ProblemArgs,
        /// Problem sizes, overriding the configuration.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
    },
    /// Closed-form vs enumerated expression counts.
    Oracle {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        nl: usize,
    },
    /// Sampled vs analytic statistics of an initial population.
    Treestats {
        #[arg(long, value_enum, default_value = "ramped-half-half")]
        method: Method,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        lo: usize,
        #[arg(long, default_value_t = 6)]
        hi: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Full,
    Grow,
    RampedFull,
    RampedGrow,
    RampedHalfHalf,
}

impl From<Method> for InitMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Full => InitMethod::Full,
            Method::Grow => InitMethod::Grow,
            Method::RampedFull => InitMethod::RampedFull,
            Method::RampedGrow => InitMethod::RampedGrow,
            Method::RampedHalfHalf => InitMethod::RampedHalfHalf,
        }
    }
}

fn experiment(cli: &Cli, p: &ProblemArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let fam = match p.problem {
                Family::Order => ProblemFamily::Order,
                Family::Loud => ProblemFamily::Loud,
                Family::Onoff => ProblemFamily::Onoff { p_exp: p.p_exp },
            };
            ExperimentConfig::preset(fam, Scale::Desk)
        }
    };
    if let Some(scale) = cli.scale {
        cfg.apply_scale(scale);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Size { p, m } => {
            let cfg = experiment(cli, p)?;
            let inp = model_inputs(&cfg, *m)?;
            println!(
                "# {} m={} lambda={:.4} n_l={:.4} h={}",
                cfg.problem.name(),
                m,
                inp.lambda,
                inp.n_l,
                inp.h
            );
            println!("model,c_method,c,n");
            for method in [CMethod::Exact, CMethod::SimpleTail, CMethod::TableFit] {
                let c = c_for_m(*m, method)?;
                let n = predict(&cfg, *m, method).map_or("NaN".into(), |n| format!("{n:.4}"));
                println!("{},{},{c:.4},{n}", cfg.problem.name(), method.label());
                let ga = ga_popsize(c, 2.0, 1, *m as f64, SIGMA2_BB, SIGNAL_D)?;
                println!("ga,{},{c:.4},{ga:.4}", method.label());
            }
        }
        Cmd::Run { p, m, n } => {
            let cfg = experiment(cli, p)?;
            let problem = cfg.problem.instantiate(*m)?;
            let mut g = cfg.gp_config(*m, *n);
            g.seed = cli.seed;
            let s = evolve(&problem, &g)?;
            println!("problem={} m={} n={}", problem.name(), m, n);
            println!(
                "best_fitness={} optimal={}",
                s.best.fitness, s.best.is_optimal
            );
            println!(
                "correct_bb={} best_size={}",
                s.best_correct_bb_count, s.best_size
            );
            println!(
                "t_c={} generations={} n_fe={}",
                s.t_c, s.generations, s.n_fe
            );
        }
        Cmd::Bisect { p, m } => {
            let cfg = experiment(cli, p)?;
            let problem = cfg.problem.instantiate(*m)?;
            let template = cfg.gp_config(*m, 2);
            let base = SeededRng::new(cli.seed, 0);
            println!("repetition,n_min,trials");
            for rep in 0..cfg.bisection.repetitions {
                let out = bisect_min_popsize(
                    &problem,
                    &template,
                    &cfg.bisection,
                    base.derive(&[*m as u64, rep as u64]),
                )?;
                println!("{rep},{},{}", out.n, out.trace.len());
            }
        }
        Cmd::Sweep { p, m } => {
            let mut cfg = experiment(cli, p)?;
            if let Some(ms) = m {
                cfg.sweep.m_values = ms.clone();
            }
            fs::create_dir_all(&cli.out)?;
            let path = cli.out.join(format!("sweep_{}.csv", cfg.problem.name()));
            let recs = sweep(&cfg, cli.seed, Some(&path), |m, e| {
                eprintln!("m={m} failed: {e}")
            })?;
            let pts = |f: fn(&gp_sizing::harness::SweepRecord) -> f64| -> Vec<(f64, f64)> {
                recs.iter()
                    .filter(|r| f(r).is_finite())
                    .map(|r| (r.lambda_k as f64, f(r)))
                    .collect()
            };
            for r in &recs {
                println!(
                    "m={} n_min={:.2}±{:.2} t_c={:.2} n_fe={:.1}",
                    r.m, r.n_min_mean, r.n_min_std, r.t_c_mean, r.n_fe_mean
                );
            }
            if let Ok(f) = fit_loglog_slope(&pts(|r| r.n_min_mean)) {
                println!("slope n_min vs lambda_k: {:.3}", f.slope);
            }
            if let Ok(f) = fit_loglog_slope(&pts(|r| r.t_c_mean)) {
                println!("slope t_c vs lambda_k: {:.3}", f.slope);
            }
            println!("wrote {}", path.display());
        }
        Cmd::Oracle { m, nl } => {
            let closed = mean_var_expressed(*m, *nl)?;
            let brute = oracle_enumerate(*m, *nl)?;
            let cc = closed
                .counts
                .as_ref()
                .ok_or(GpError::Empty("closed-form counts"))?;
            let bc = brute
                .counts
                .as_ref()
                .ok_or(GpError::Empty("enumerated counts"))?;
            println!("i,closed_count,enum_count,closed_p,enum_p");
            for i in 0..cc.len() {
                println!(
                    "{i},{},{},{:.12},{:.12}",
                    cc[i], bc[i], closed.probabilities[i], brute.probabilities[i]
                );
            }
        }
        Cmd::Treestats {
            method,
            q,
            lo,
            hi,
            samples,
        } => {
            let method = InitMethod::from(*method);
            let init = if method.is_ramped() {
                InitConfig::ramped(method, Some(*q), *lo, *hi)
            } else {
                InitConfig::new(method, Some(*q), *hi)
            };
            let prims = PrimitiveSet::new(["F"], ["x", "y"])?;
            let mut rng = SeededRng::new(cli.seed, 0).generator();
            let pop = create_ramped_population(&prims, *q, &init, *samples, &mut rng)?;
            let s = tree_statistics(&pop)?;
            let (a, b) = init.heights();
            let analytic = ramped_mean_size(method, *q, a, b)?;
            println!(
                "samples={} mean_size={:.4} analytic_size={:.4}",
                s.count, s.mean_size, analytic
            );
            println!(
                "mean_height={:.4} mean_leaves={:.4}",
                s.mean_height, s.mean_leaves
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
