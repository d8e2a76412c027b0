//! Population-size sweeps over problem size and their CSV persistence.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use super::bisect::bisect_min_popsize;
use super::config::ExperimentConfig;
use crate::engine::{run_batch, RunStats};
use crate::error::{GpError, Result};
use crate::init::InitMethod;
use crate::problems::{ProblemFamily, ProblemSpec};
use crate::rng::SeededRng;
use crate::sizing::{c_for_m, loud_popsize, onoff_popsize, order_popsize, CMethod};
use crate::treesize::ramped_mean_size;

pub const CSV_HEADER: &str = "problem,m,lambda_k,n_min_mean,n_min_std,t_c_mean,n_fe_mean,\
pred_n_exact,pred_n_tablefit,seed,config_hash,timestamp";

/// Per-building-block signal variance and signal used by the model
/// predictions (each BB contributes 0 or 1 to fitness).
pub const SIGMA2_BB: f64 = 0.25;
pub const SIGNAL_D: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub problem: String,
    pub m: usize,
    pub lambda_k: usize,
    pub n_min_mean: f64,
    pub n_min_std: f64,
    pub t_c_mean: f64,
    pub n_fe_mean: f64,
    pub pred_n_exact: f64,
    pub pred_n_tablefit: f64,
    pub seed: u64,
    pub config_hash: String,
    pub timestamp: u64,
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "NaN".into()
    }
}

impl SweepRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.problem,
            self.m,
            self.lambda_k,
            num(self.n_min_mean),
            num(self.n_min_std),
            num(self.t_c_mean),
            num(self.n_fe_mean),
            num(self.pred_n_exact),
            num(self.pred_n_tablefit),
            self.seed,
            self.config_hash,
            self.timestamp
        )
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim_end_matches('\n').split(',').collect();
        if f.len() != 12 {
            return Err(GpError::Config(format!(
                "expected 12 CSV fields, got {}",
                f.len()
            )));
        }
        let bad = |what: &str| GpError::Config(format!("bad {what} in row: {line}"));
        let int = |s: &str, what: &str| s.parse::<u64>().map_err(|_| bad(what));
        let float = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
        Ok(Self {
            problem: f[0].to_string(),
            m: int(f[1], "m")? as usize,
            lambda_k: int(f[2], "lambda_k")? as usize,
            n_min_mean: float(f[3], "n_min_mean")?,
            n_min_std: float(f[4], "n_min_std")?,
            t_c_mean: float(f[5], "t_c_mean")?,
            n_fe_mean: float(f[6], "n_fe_mean")?,
            pred_n_exact: float(f[7], "pred_n_exact")?,
            pred_n_tablefit: float(f[8], "pred_n_tablefit")?,
            seed: int(f[9], "seed")?,
            config_hash: f[10].to_string(),
            timestamp: int(f[11], "timestamp")?,
        })
    }
}

/// Read a sweep CSV, checking the header.
pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines.next().transpose()?;
    if header.as_deref() != Some(CSV_HEADER) {
        return Err(GpError::Config(format!(
            "{} lacks the sweep header",
            path.display()
        )));
    }
    lines.map(|l| SweepRecord::from_csv_row(&l?)).collect()
}

/// Analytic quantities of the initial population feeding the models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelInputs {
    /// Mean tree size.
    pub lambda: f64,
    /// Mean leaf count, `(lambda + 1) / 2`.
    pub n_l: f64,
    /// Nominal tree height of the plan.
    pub h: usize,
}

pub fn model_inputs(cfg: &ExperimentConfig, m: usize) -> Result<ModelInputs> {
    let problem = cfg.problem.instantiate(m)?;
    let init = cfg.init.init_for(m);
    let q = init.resolve_q(problem.primitives());
    let (lo, hi) = init.heights();
    let lambda = match init.method {
        InitMethod::Full | InitMethod::Grow => ramped_mean_size(init.method, q, hi, hi)?,
        method => ramped_mean_size(method, q, lo, hi)?,
    };
    let (h, _, _) = cfg.init.heights_for(m);
    Ok(ModelInputs {
        lambda,
        n_l: (lambda + 1.0) / 2.0,
        h,
    })
}

/// Model-predicted population size for problem size `m` with `α = 1/m`.
pub fn predict(cfg: &ExperimentConfig, m: usize, method: CMethod) -> Result<f64> {
    let c = c_for_m(m, method)?;
    let inp = model_inputs(cfg, m)?;
    match cfg.problem {
        ProblemFamily::Order => order_popsize(1, c, SIGMA2_BB, SIGNAL_D, m, inp.n_l, inp.lambda),
        ProblemFamily::Loud => loud_popsize(1, c, SIGMA2_BB, SIGNAL_D, inp.lambda),
        ProblemFamily::Onoff { p_exp } => {
            onoff_popsize(1, c, SIGMA2_BB, SIGNAL_D, inp.lambda, p_exp, inp.h as u32)
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn mean_of(stats: &[RunStats], f: impl Fn(&RunStats) -> f64) -> f64 {
    stats.iter().map(f).sum::<f64>() / stats.len() as f64
}

/// Measurements for one problem size.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// Minimal population per bisection repetition.
    pub n_min: Vec<usize>,
    /// Mean `t_c` over the runs at each repetition's minimal population.
    pub t_c: Vec<f64>,
    pub n_fe_mean: f64,
}

/// Bisection repetitions for one `m`, then `n_fe_runs` fresh runs at the
/// mean minimal population rounded up to even.
pub fn measure(cfg: &ExperimentConfig, m: usize, seed: u64) -> Result<Measurement> {
    let problem: ProblemSpec = cfg.problem.instantiate(m)?;
    let template = cfg.gp_config(m, 2);
    let base = SeededRng::new(seed, 0);
    let mut n_min = Vec::new();
    let mut t_c = Vec::new();
    for rep in 0..cfg.bisection.repetitions {
        let out = bisect_min_popsize(
            &problem,
            &template,
            &cfg.bisection,
            base.derive(&[m as u64, rep as u64]),
        )?;
        n_min.push(out.n);
        t_c.push(mean_of(&out.at_n, |s| s.t_c as f64));
    }
    let n_fe_mean = if cfg.sweep.n_fe_runs > 0 {
        let mean_n = n_min.iter().sum::<usize>() as f64 / n_min.len() as f64;
        let n = ((mean_n / 2.0).ceil() as usize * 2).max(2);
        let g = cfg.gp_config(m, n);
        let stats = run_batch(
            &problem,
            &g,
            cfg.sweep.n_fe_runs,
            base.derive(&[m as u64, u64::MAX]),
        )?;
        mean_of(&stats, |s| s.n_fe as f64)
    } else {
        f64::NAN
    };
    Ok(Measurement {
        n_min,
        t_c,
        n_fe_mean,
    })
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// One record for `m`. Measurement failures give a row with NaN
/// measurements so the sweep can continue.
pub fn sweep_one(cfg: &ExperimentConfig, m: usize, seed: u64) -> (SweepRecord, Option<GpError>) {
    let pred = |method| predict(cfg, m, method).unwrap_or(f64::NAN);
    let (meas, err) = match measure(cfg, m, seed) {
        Ok(x) => (Some(x), None),
        Err(e) => (None, Some(e)),
    };
    let (n_min_mean, n_min_std, t_c_mean, n_fe_mean) = match &meas {
        Some(x) => {
            let ns: Vec<f64> = x.n_min.iter().map(|&n| n as f64).collect();
            let (mu, sd) = mean_std(&ns);
            (mu, sd, mean_std(&x.t_c).0, x.n_fe_mean)
        }
        None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };
    let rec = SweepRecord {
        problem: cfg.problem.name().to_string(),
        m,
        lambda_k: 2 * m - 1,
        n_min_mean,
        n_min_std,
        t_c_mean,
        n_fe_mean,
        pred_n_exact: pred(CMethod::Exact),
        pred_n_tablefit: pred(CMethod::TableFit),
        seed,
        config_hash: cfg.hash(),
        timestamp: now(),
    };
    (rec, err)
}

/// Run the sweep over `cfg.sweep.m_values`, appending each record to `csv`
/// (created with a header if missing or empty) as soon as it is complete.
/// Failures for individual `m` are reported through `on_error` and recorded
/// as NaN rows.
pub fn sweep(
    cfg: &ExperimentConfig,
    seed: u64,
    csv: Option<&Path>,
    mut on_error: impl FnMut(usize, &GpError),
) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let mut file = match csv {
        Some(path) => {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            if f.metadata()?.len() == 0 {
                writeln!(f, "{CSV_HEADER}")?;
                f.flush()?;
            }
            Some(f)
        }
        None => None,
    };
    let mut out = Vec::new();
    for &m in &cfg.sweep.m_values {
        let (rec, err) = sweep_one(cfg, m, seed);
        if let Some(e) = err {
            on_error(m, &e);
        }
        if let Some(f) = file.as_mut() {
            writeln!(f, "{}", rec.to_csv_row())?;
            f.flush()?;
            f.sync_data()?;
        }
        out.push(rec);
    }
    Ok(out)
}
