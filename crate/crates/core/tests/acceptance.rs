//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::time::Instant;

use num_bigint::BigUint;
use rand::Rng;

use gp_sizing::combinatorics::{binomial, mean_var_expressed, oracle_enumerate};
use gp_sizing::harness::{
    bisect, fit_loglog_slope, read_csv, sweep, ExperimentConfig, Scale, SweepRecord,
};
use gp_sizing::problems::{express_order, fitness_order, OrderProblem, ProblemFamily};
use gp_sizing::rng::SeededRng;
use gp_sizing::sizing::{c_for_m, ga_popsize, gp_popsize_general, CMethod, SizingInputs};
use gp_sizing::tree::ProgramTree;
use gp_sizing::treesize::{avg_size_full_analytic, monte_carlo_mean_size};

type Check = Result<String, String>;

fn oracle_equivalence() -> Check {
    let t = Instant::now();
    for m in 1..=4 {
        for n_l in 1..=6 {
            let closed = mean_var_expressed(m, n_l).map_err(|e| e.to_string())?;
            let brute = oracle_enumerate(m, n_l).map_err(|e| e.to_string())?;
            if closed.counts != brute.counts {
                return Err(format!("counts differ at m={m}, n_l={n_l}"));
            }
            for (a, b) in closed.probabilities.iter().zip(&brute.probabilities) {
                if (a - b).abs() > 1e-9 {
                    return Err(format!("p differs at m={m}, n_l={n_l}: {a} vs {b}"));
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 10.0 {
        return Err(format!("took {secs:.2}s"));
    }
    Ok(format!("24 cases, {secs:.3}s"))
}

fn identities() -> Check {
    let big = |x: u64| BigUint::from(x);
    for n in 0..=20u64 {
        let c = |j: u64| binomial(n, j);
        let two_n = big(2).pow(n as u32);
        let s0: BigUint = (0..=n).map(c).sum();
        let s1: BigUint = (0..=n).map(|j| c(j) * big(j)).sum();
        let s2: BigUint = (0..=n).map(|j| c(j) * big(j * j)).sum();
        if s0 != two_n {
            return Err(format!("sum C(n,j) at n={n}"));
        }
        if &s1 * big(2) != big(n) * &two_n {
            return Err(format!("sum j C(n,j) at n={n}"));
        }
        if &s2 * big(4) != big(n * (n + 1)) * &two_n {
            return Err(format!("sum j^2 C(n,j) at n={n}"));
        }
        for a in 2..=5u64 {
            let pow = |e: u64| big(a).pow(e as u32);
            let ta: BigUint = (0..=n).map(|j| c(j) * pow(n - j)).sum();
            let tj: BigUint = (0..=n).map(|j| c(j) * big(j) * pow(n - j)).sum();
            let a1n = big(a + 1).pow(n as u32);
            if ta != a1n {
                return Err(format!("sum C(n,j) a^(n-j) at n={n}, a={a}"));
            }
            if tj * big(a + 1) != big(n) * a1n {
                return Err(format!("sum j C(n,j) a^(n-j) at n={n}, a={a}"));
            }
        }
    }
    Ok("n <= 20, a in 2..=5".into())
}

fn table_fit() -> Check {
    let want = [(8, 0.97), (16, 1.76), (32, 2.71), (64, 3.77), (128, 4.89)];
    let mut got = Vec::new();
    for (m, c) in want {
        let x = c_for_m(m, CMethod::TableFit).map_err(|e| e.to_string())?;
        if (x - c).abs() > 0.01 {
            return Err(format!("m={m}: {x:.4} vs {c}"));
        }
        got.push(format!("{x:.3}"));
    }
    Ok(got.join(" "))
}

fn order_example_tree() -> Check {
    let p = OrderProblem::new(4).map_err(|e| e.to_string())?;
    let x = |i| p.literal(i, true);
    let nx = |i| p.literal(i, false);
    let mut t = ProgramTree::leaf(x(1));
    for l in [nx(1), nx(1), x(4), x(1), nx(2)] {
        t = ProgramTree::join(0, &t, &ProgramTree::leaf(l));
    }
    let f = fitness_order(&t, &p).map_err(|e| e.to_string())?.fitness;
    let mut e = express_order(&t, &p).map_err(|e| e.to_string())?;
    e.sort_unstable();
    let mut want = vec![x(1), nx(2), x(4)];
    want.sort_unstable();
    if f != 2.0 || e != want {
        return Err(format!("fitness {f}, expressed {e:?}"));
    }
    Ok("fitness 2, expressed {X1, ~X2, X4}".into())
}

fn full_size_estimator() -> Check {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (i, q) in [0.3, 0.5, 0.7].into_iter().enumerate() {
        for h in [2usize, 4, 6] {
            let exact = avg_size_full_analytic(q, h).map_err(|e| e.to_string())?;
            if q == 0.5 && exact != (2 * h + 1) as f64 {
                return Err(format!("q=0.5 limit at h={h}: {exact}"));
            }
            let mut rng = SeededRng::new(11, (i * 10 + h) as u64).generator();
            let (mc, _) = monte_carlo_mean_size(true, q, h, 1_000_000, &mut rng)
                .map_err(|e| e.to_string())?;
            let rel = (exact - mc).abs() / exact;
            worst = worst.max(rel);
            if rel > 0.01 {
                return Err(format!("q={q}, h={h}: {exact} vs {mc}"));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("worst relative error {worst:.2e}, {secs:.1}s"))
}

fn ga_reduction() -> Check {
    let mut rng = SeededRng::new(5, 0).generator();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.gen_range(1..=4u32);
        let chi = rng.gen_range(2..=8) as f64;
        let m = rng.gen_range(2..=200) as f64;
        let c = rng.gen_range(0.1..10.0);
        let s2 = rng.gen_range(0.01..5.0);
        let d = rng.gen_range(0.1..3.0);
        let inp = SizingInputs {
            k,
            kappa: chi.powi(k as i32),
            sigma2_bb: s2,
            d,
            m,
            q_bar: m,
            p_expr: 1.0,
            phi: 1.0,
            c,
            chi,
            ..SizingInputs::default()
        };
        let gp = gp_popsize_general(&inp).map_err(|e| e.to_string())?;
        let ga = ga_popsize(c, chi, k, m, s2, d).map_err(|e| e.to_string())?;
        worst = worst.max((gp - ga).abs() / ga);
    }
    if worst > 1e-12 {
        return Err(format!("worst relative error {worst:.2e}"));
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn run_sweep(cfg: &ExperimentConfig, csv: &Path) -> Result<Vec<SweepRecord>, String> {
    let mut errors = Vec::new();
    let recs = sweep(cfg, 1, Some(csv), |m, e| errors.push(format!("m={m}: {e}")))
        .map_err(|e| e.to_string())?;
    if !errors.is_empty() {
        return Err(errors.join("; "));
    }
    Ok(recs)
}

fn slope(recs: &[SweepRecord], y: fn(&SweepRecord) -> f64) -> Result<f64, String> {
    let pts: Vec<_> = recs.iter().map(|r| (r.lambda_k as f64, y(r))).collect();
    fit_loglog_slope(&pts)
        .map(|f| f.slope)
        .map_err(|e| e.to_string())
}

fn strip_timestamp(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect())
}

fn order_scaling(dir: &Path) -> (Check, Check) {
    let cfg = ExperimentConfig::preset(ProblemFamily::Order, Scale::Desk);
    let first = dir.join("order_a.csv");
    let t = Instant::now();
    let scaling = (|| {
        let recs = run_sweep(&cfg, &first)?;
        let secs = t.elapsed().as_secs_f64();
        let ns: Vec<f64> = recs.iter().map(|r| r.n_min_mean).collect();
        let s_n = slope(&recs, |r| r.n_min_mean)?;
        let s_t = slope(&recs, |r| r.t_c_mean)?;
        let detail = format!(
            "n_min {ns:?}, slope n_min {s_n:.3} (need [1.3, 2.7]), slope t_c {s_t:.3} (need [0.5, 1.5]), {secs:.1}s"
        );
        let ok = ns.windows(2).all(|w| w[1] > w[0])
            && (1.3..=2.7).contains(&s_n)
            && (0.5..=1.5).contains(&s_t)
            && secs <= 1800.0;
        if ok {
            Ok(detail)
        } else {
            Err(detail)
        }
    })();
    let determinism = (|| {
        let second = dir.join("order_b.csv");
        run_sweep(&cfg, &second)?;
        let (a, b) = (strip_timestamp(&first)?, strip_timestamp(&second)?);
        read_csv(&first).map_err(|e| e.to_string())?;
        if a.is_empty() || a != b {
            return Err("CSV files differ outside the timestamp column".into());
        }
        Ok(format!("{} lines identical", a.len()))
    })();
    (scaling, determinism)
}

fn loud_constant_time(dir: &Path) -> Check {
    let cfg = ExperimentConfig::preset(ProblemFamily::Loud, Scale::Desk);
    let t = Instant::now();
    let recs = run_sweep(&cfg, &dir.join("loud.csv"))?;
    let secs = t.elapsed().as_secs_f64();
    let tc: Vec<f64> = recs.iter().map(|r| r.t_c_mean).collect();
    let ratio =
        tc.iter().cloned().fold(f64::MIN, f64::max) / tc.iter().cloned().fold(f64::MAX, f64::min);
    let s_n = slope(&recs, |r| r.n_min_mean)?;
    let detail = format!("t_c {tc:.2?}, max/min {ratio:.3} (need <= 2), slope n_min {s_n:.3} (need <= 1), {secs:.1}s");
    if ratio <= 2.0 && s_n <= 1.0 && secs <= 900.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn onoff_trend(dir: &Path) -> Check {
    let mut by_p = Vec::new();
    for p_exp in [1.0, 0.9] {
        let cfg = ExperimentConfig::preset(ProblemFamily::Onoff { p_exp }, Scale::Desk);
        let recs = run_sweep(&cfg, &dir.join(format!("onoff_{p_exp}.csv")))?;
        by_p.push(recs);
    }
    let mut parts = Vec::new();
    let mut ok = true;
    for (hi, lo) in by_p[0].iter().zip(&by_p[1]) {
        ok &= lo.n_min_mean >= hi.n_min_mean;
        parts.push(format!(
            "m={}: n_min {:.2} (p=1.0) vs {:.2} (p=0.9), t_c {:.1} vs {:.1}",
            hi.m, hi.n_min_mean, lo.n_min_mean, hi.t_c_mean, lo.t_c_mean
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bisection_recovery() -> Check {
    let mut rng = SeededRng::new(3, 0).generator();
    for _ in 0..100 {
        let t: usize = rng.gen_range(1..=10_000);
        let r = bisect(1, 1 << 20, 1.0 / 16.0, 1, |n| Ok((n >= t, ())))
            .map_err(|e| e.to_string())?
            .n;
        if r < t || r > (t as f64 * 17.0 / 16.0).ceil() as usize {
            return Err(format!("threshold {t} gave {r}"));
        }
    }
    Ok("100 thresholds recovered".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(&str, Check)> = vec![
        ("expression-count oracle equivalence", oracle_equivalence()),
        ("binomial identity suite", identities()),
        ("table-fit confidence coefficients", table_fit()),
        ("ORDER example tree", order_example_tree()),
        ("FULL size estimator vs Monte Carlo", full_size_estimator()),
        ("GP model reduces to GA model", ga_reduction()),
    ];
    let (scaling, determinism) = order_scaling(dir.path());
    results.push(("ORDER scaling (desk)", scaling));
    results.push((
        "LOUD near-constant convergence (desk)",
        loud_constant_time(dir.path()),
    ));
    results.push(("ON-OFF p_EXP trend (desk)", onoff_trend(dir.path())));
    results.push(("sweep CSV determinism", determinism));
    results.push(("bisection threshold recovery", bisection_recovery()));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
