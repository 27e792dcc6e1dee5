//! Timing sweeps over instance size and precision.

use std::time::Instant;

use circot_bench::{random_pair, seeded};
use circot_core::{minimize, CostFunction, SolveOptions};

use crate::commands::CliError;
use crate::report::{BenchRow, BenchSummary, Real, RunReport, TrendFit};

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "CIRC_OT_SEED";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Total atom counts `n0 + n1`.
    pub sizes: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub omit_timing: bool,
}

/// The seed from [`SEED_ENV`], or zero.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// Ordinary least squares `y = slope * x + intercept` and its R².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

struct Cell {
    n: usize,
    epsilon: f64,
    mean_ms: f64,
    row: BenchRow,
}

/// Runs every `(n, epsilon)` cell on fresh random instances under `|x - y|`.
/// Only the solve is timed.
pub fn run_bench(config: &BenchConfig) -> Result<RunReport, CliError> {
    if config.repeats == 0 {
        return Err(CliError::Argument("repeats must be positive".into()));
    }
    if let Some(&n) = config.sizes.iter().find(|&&n| n < 2) {
        return Err(CliError::Argument(format!("sizes must be at least 2, got {n}")));
    }
    if let Some(&e) = config.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(CliError::Argument(format!("epsilons must be positive, got {e}")));
    }
    let c = CostFunction::power(1.0).expect("linear cost");
    let mut rng = seeded(config.seed);

    // Warm caches and the allocator before the first timed cell.
    let (w0, w1) = random_pair(&mut seeded(config.seed ^ 0x5eed), 64);
    minimize(&w0, &w1, &c, &SolveOptions::default())?;

    // Each size gets one batch of instances shared by every epsilon, and the
    // epsilons are interleaved per instance so that clock drift hits every
    // cell alike.
    let mut cells = Vec::new();
    for &n in &config.sizes {
        let instances: Vec<_> = (0..config.repeats).map(|_| random_pair(&mut rng, n)).collect();
        let mut totals = vec![[0.0f64; 4]; config.epsilons.len()];
        for (h0, h1) in &instances {
            for (&epsilon, total) in config.epsilons.iter().zip(totals.iter_mut()) {
                let options = SolveOptions {
                    epsilon: Some(epsilon),
                    ..SolveOptions::default()
                };
                let start = Instant::now();
                let r = minimize(h0, h1, &c, &options)?;
                total[0] += start.elapsed().as_secs_f64() * 1e3;
                total[1] += r.iterations as f64;
                total[2] += r.cost_evaluations as f64;
                total[3] += r.cost;
            }
        }
        let k = config.repeats as f64;
        for (&epsilon, total) in config.epsilons.iter().zip(&totals) {
            cells.push(Cell {
                n,
                epsilon,
                mean_ms: total[0] / k,
                row: BenchRow {
                    n,
                    epsilon: Real(epsilon),
                    repeats: config.repeats,
                    mean_time_ms: (!config.omit_timing).then_some(Real(total[0] / k)),
                    mean_iterations: Real(total[1] / k),
                    mean_cost_evaluations: Real(total[2] / k),
                    mean_cost: Real(total[3] / k),
                },
            });
        }
    }

    let mut fits = Vec::new();
    if !config.omit_timing {
        for &epsilon in &config.epsilons {
            let sweep: Vec<&Cell> = cells.iter().filter(|c| c.epsilon == epsilon).collect();
            if sweep.len() >= 3 {
                let xs: Vec<f64> = sweep.iter().map(|c| c.n as f64).collect();
                let ys: Vec<f64> = sweep.iter().map(|c| c.mean_ms).collect();
                fits.push(fit("n", epsilon, &xs, &ys));
            }
        }
        for &n in &config.sizes {
            let sweep: Vec<&Cell> = cells.iter().filter(|c| c.n == n).collect();
            if sweep.len() >= 3 {
                let xs: Vec<f64> = sweep.iter().map(|c| (1.0 / c.epsilon).log10()).collect();
                let ys: Vec<f64> = sweep.iter().map(|c| c.mean_ms).collect();
                fits.push(fit("log10_inv_epsilon", n as f64, &xs, &ys));
            }
        }
    }

    Ok(RunReport {
        bench: Some(BenchSummary {
            seed: config.seed,
            rows: cells.into_iter().map(|c| c.row).collect(),
            fits,
        }),
        ..RunReport::default()
    })
}

fn fit(against: &str, fixed: f64, xs: &[f64], ys: &[f64]) -> TrendFit {
    let (slope, intercept, r2) = linear_fit(xs, ys);
    TrendFit {
        against: against.to_string(),
        fixed: Real(fixed),
        slope: Real(slope),
        intercept: Real(intercept),
        r_squared: Real(r2),
    }
}
