//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use circot_bench::{random_histogram, random_rational_histogram, seeded, BenchRng};
use circot_cli::bench::{run_bench, BenchConfig};
use circot_core::measures::cdf_inverse;
use circot_core::{
    bracket_for, build_profile, candidate_thetas, evaluate_at, extract_plan, minimize, minimize_with_hook,
    mk_distance, oracle_breakpoints, oracle_rotations, BracketOptions, CircularHistogram, CostFunction,
    IterationRecord, SolveOptions,
};
use rand::RngExt;

type Outcome = Result<String, String>;

const LAMBDAS: [f64; 3] = [1.0, 1.5, 2.0];

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The instances of criteria 1 and 7: n0, n1 <= 8 atoms over a common M <= 64.
fn rational_instances(count: usize) -> Vec<(CircularHistogram, CircularHistogram, f64)> {
    let mut rng = seeded(101);
    (0..count)
        .map(|i| {
            let m = rng.random_range(8..=64u64);
            let n0 = rng.random_range(1..=8usize);
            let n1 = rng.random_range(1..=8usize);
            (
                random_rational_histogram(&mut rng, n0, m),
                random_rational_histogram(&mut rng, n1, m),
                LAMBDAS[i % 3],
            )
        })
        .collect()
}

fn float_pair(rng: &mut BenchRng, max_atoms: usize) -> (CircularHistogram, CircularHistogram) {
    let n0 = rng.random_range(1..=max_atoms);
    let n1 = rng.random_range(1..=max_atoms);
    (random_histogram(rng, n0), random_histogram(rng, n1))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let instances = rational_instances(500);
    let mut worst: f64 = 0.0;
    for (k, (h0, h1, l)) in instances.iter().enumerate() {
        let c = CostFunction::power(*l).unwrap();
        let m = h0.denominator().unwrap();
        let r = minimize(h0, h1, &c, &SolveOptions::default()).map_err(|e| format!("instance {k}: {e}"))?;
        check(r.epsilon_used == 1.0 / (2.0 * m as f64), || format!("instance {k}: epsilon {}", r.epsilon_used))?;
        let b = oracle_breakpoints(h0, h1, &c, &r.bracket).map_err(|e| e.to_string())?;
        let o = oracle_rotations(h0, h1, &c).map_err(|e| e.to_string())?;
        for (name, cost) in [("breakpoints", b.cost), ("rotations", o.cost)] {
            let d = (r.cost - cost).abs();
            worst = worst.max(d);
            check(d <= 1e-12, || {
                format!("instance {k} (lambda {l}): solver {} vs {name} {cost}", r.cost)
            })?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("500 instances, max |solver - oracle| = {worst:.1e}, {:.2} s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(202);
    let mut worst_gap = f64::NEG_INFINITY;
    for k in 0..200 {
        let (h0, h1) = float_pair(&mut rng, 50);
        let c = CostFunction::power(LAMBDAS[k % 3]).unwrap();
        // Every minimizer lies in [-1, 1] for these symmetric costs, which
        // keeps the enumeration affordable at n = 50.
        let tight = bracket_for(&c, BracketOptions { tight: true }).unwrap();
        let o = oracle_breakpoints(&h0, &h1, &c, &tight).map_err(|e| e.to_string())?;
        for eps in [1e-4, 1e-8] {
            let opts = SolveOptions {
                epsilon: Some(eps),
                ..SolveOptions::default()
            };
            let r = minimize(&h0, &h1, &c, &opts).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max((r.cost - o.cost) / eps);
            check(r.cost <= o.cost + eps, || {
                format!("instance {k}, eps {eps}: solver {} oracle {}", r.cost, o.cost)
            })?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "200 instances x 2 epsilons, max (solver - oracle)/eps = {worst_gap:.2e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = seeded(303);
    let h = 1e-6;
    let mut worst_fd: f64 = 0.0;
    let mut worst_convex = f64::NEG_INFINITY;
    for k in 0..100 {
        let (h0, h1) = float_pair(&mut rng, 20);
        let c = CostFunction::power(LAMBDAS[k % 3]).unwrap();
        let b = bracket_for(&c, BracketOptions::default()).unwrap();
        let value = |t: f64| evaluate_at(&h0, &h1, &c, t).value;
        for _ in 0..50 {
            let t1 = rng.random_range(b.theta_lo..b.theta_hi);
            let t2 = rng.random_range(b.theta_lo..b.theta_hi);
            let excess = value(0.5 * (t1 + t2)) - 0.5 * (value(t1) + value(t2));
            worst_convex = worst_convex.max(excess);
            check(excess <= 1e-12, || format!("instance {k}: midpoint excess {excess:e} at {t1}, {t2}"))?;
        }
        let mut done = 0;
        while done < 50 {
            let t = rng.random_range(b.theta_lo + h..b.theta_hi - h);
            if !candidate_thetas(&h0, &h1, t - h, t + h).is_empty() {
                continue;
            }
            done += 1;
            let e = evaluate_at(&h0, &h1, &c, t);
            let fwd = (value(t + h) - e.value) / h;
            let bwd = (e.value - value(t - h)) / h;
            let err = (fwd - e.right_derivative).abs().max((bwd - e.left_derivative).abs());
            worst_fd = worst_fd.max(err);
            check(err <= 10.0 * h * b.lipschitz, || {
                format!("instance {k}, theta {t}: derivative error {err:e}")
            })?;
        }
    }
    Ok(format!(
        "max midpoint excess {worst_convex:.1e}, max derivative error {worst_fd:.1e} (bound 10hL)"
    ))
}

fn criterion_4() -> Outcome {
    let h0 = CircularHistogram::dirac(0.5).unwrap();
    let h1 = CircularHistogram::dirac(1.0).unwrap();
    let c = CostFunction::power(2.0).unwrap();
    let closed = |t: f64| if t <= 0.0 { 0.25 } else { 0.25 + 2.0 * t };
    let mut worst: f64 = 0.0;
    for k in 0..=400 {
        let t = -1.0 + k as f64 / 200.0;
        let v = evaluate_at(&h0, &h1, &c, t).value;
        worst = worst.max((v - closed(t)).abs());
    }
    check(worst <= 1e-12, || format!("closed form off by {worst:e}"))?;

    // Midpoint rule on the quantile integral, independent of the merge.
    let (f0, f1) = (h0.cdf(), h1.cdf());
    let n = 1_000_000;
    let mut quad_err: f64 = 0.0;
    for t in [-0.8, -0.3, 0.15, 0.5, 0.9] {
        let sum: f64 = (0..n)
            .map(|i| {
                let v = (i as f64 + 0.5) / n as f64;
                c.eval(cdf_inverse(&f0, v), cdf_inverse(&f1, v + t))
            })
            .sum();
        let err = (sum / n as f64 - closed(t)).abs();
        quad_err = quad_err.max(err);
        check(err <= 1e-5, || format!("quadrature at {t} off by {err:e}"))?;
    }
    let r = minimize(&h0, &h1, &c, &SolveOptions::default()).map_err(|e| e.to_string())?;
    check((r.cost - 0.25).abs() <= 1e-12, || format!("solver cost {}", r.cost))?;
    Ok(format!(
        "closed form within {worst:.1e}, 1e6-point quadrature within {quad_err:.1e}, solver cost {}",
        r.cost
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = seeded(505);
    let eps = Some(1e-13);
    let (mut worst_sym, mut worst_tri, mut worst_id): (f64, f64, f64) = (0.0, f64::NEG_INFINITY, 0.0);
    for k in 0..100 {
        let n = [rng.random_range(1..=20usize), rng.random_range(1..=20), rng.random_range(1..=20)];
        let [a, b, c] = n.map(|n| random_histogram(&mut rng, n));
        let d = |x: &CircularHistogram, y: &CircularHistogram| mk_distance(x, y, 2.0, eps).map_err(|e| e.to_string());
        worst_id = worst_id.max(d(&a, &a)?);
        let (ab, ba, bc, ac) = (d(&a, &b)?, d(&b, &a)?, d(&b, &c)?, d(&a, &c)?);
        worst_sym = worst_sym.max((ab - ba).abs());
        worst_tri = worst_tri.max(ac - ab - bc);
        check(d(&a, &a)? == 0.0, || format!("triple {k}: d(a, a) = {}", d(&a, &a).unwrap()))?;
        check((ab - ba).abs() <= 1e-10, || format!("triple {k}: asymmetry {ab} vs {ba}"))?;
        check(ac <= ab + bc + 1e-10, || format!("triple {k}: {ac} > {ab} + {bc}"))?;
    }
    Ok(format!(
        "100 triples: max d(h,h) = {worst_id}, max asymmetry {worst_sym:.1e}, max triangle excess {worst_tri:.1e}"
    ))
}

fn r_squared(report: &circot_cli::RunReport) -> f64 {
    report.bench.as_ref().unwrap().fits[0].r_squared.0
}

fn criterion_6() -> Outcome {
    let sizes: Vec<usize> = (0..=6).map(|k| 10f64.powf(2.0 + k as f64 / 2.0).round() as usize).collect();
    let by_size = run_bench(&BenchConfig {
        sizes: sizes.clone(),
        epsilons: vec![1e-10],
        repeats: 5,
        seed: 606,
        omit_timing: false,
    })
    .map_err(|e| e.to_string())?;
    let r2_n = r_squared(&by_size);

    let epsilons: Vec<f64> = (2..=12).map(|k| 10f64.powi(-k)).collect();
    let by_eps = run_bench(&BenchConfig {
        sizes: vec![20],
        epsilons,
        repeats: 20_000,
        seed: 607,
        omit_timing: false,
    })
    .map_err(|e| e.to_string())?;
    let r2_eps = r_squared(&by_eps);

    let mut rng = seeded(608);
    let mut profiles = 0;
    for n in [2usize, 3, 10, 57, 1000, 20_000] {
        for _ in 0..20 {
            let n0 = rng.random_range(1..n);
            let (h0, h1) = (random_histogram(&mut rng, n0), random_histogram(&mut rng, n - n0));
            let t = rng.random_range(-6.0..6.0);
            let p = build_profile(&h0.cdf(), &h1.cdf(), t);
            check(p.comparisons == n - 1, || format!("n = {n}: {} comparisons", p.comparisons))?;
            profiles += 1;
        }
    }
    let summary = format!(
        "R^2 vs n over {:?} = {r2_n:.4}; R^2 vs log10(1/eps) at n = 20 = {r2_eps:.4}; {profiles} profiles with n0+n1-1 comparisons",
        (sizes[0], sizes[sizes.len() - 1])
    );
    check(r2_n >= 0.9 && r2_eps >= 0.9, || summary.clone())?;
    Ok(summary)
}

fn criterion_7() -> Outcome {
    let mut max_iter = 0;
    let mut records = 0;
    for (k, (h0, h1, l)) in rational_instances(500).iter().enumerate() {
        let c = CostFunction::power(*l).unwrap();
        let mut trace: Vec<IterationRecord> = Vec::new();
        let r = minimize_with_hook(h0, h1, &c, &SolveOptions::default(), &mut |rec| trace.push(*rec))
            .map_err(|e| e.to_string())?;
        let budget = (r.bracket.width() * r.bracket.lipschitz / r.epsilon_used).log2().ceil() as usize + 1;
        check(r.iterations <= budget, || format!("instance {k}: {} iterations > {budget}", r.iterations))?;
        max_iter = max_iter.max(r.iterations);
        for rec in &trace {
            let lo = evaluate_at(h0, h1, &c, rec.theta_lo).right_derivative;
            let hi = evaluate_at(h0, h1, &c, rec.theta_hi).left_derivative;
            check(lo <= 0.0 && 0.0 <= hi, || {
                format!("instance {k}, iteration {}: C'(lo+) = {lo}, C'(hi-) = {hi}", rec.iteration)
            })?;
            records += 1;
        }
    }
    Ok(format!("500 instances within budget (max {max_iter} iterations), invariant held at {records} iterations"))
}

fn criterion_8() -> Outcome {
    let mut rng = seeded(808);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let m = rng.random_range(20..=200u64);
        let (n0, n1) = (rng.random_range(1..=20usize), rng.random_range(1..=20usize));
        let h0 = random_rational_histogram(&mut rng, n0, m);
        let h1 = random_rational_histogram(&mut rng, n1, m);
        let l = LAMBDAS[k % 3];
        let c = CostFunction::power(l).unwrap();
        let r = minimize(&h0, &h1, &c, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let plan = extract_plan(&h0, &h1, &c, r.theta_star);

        for (got, want) in [(plan.source_marginal(n0), h0.masses()), (plan.target_marginal(n1), h1.masses())] {
            for (g, w) in got.iter().zip(want) {
                worst = worst.max((g - w).abs());
                check((g - w).abs() <= 1e-12, || format!("instance {k}: marginal {g} vs {w}"))?;
            }
        }
        let targets: Vec<f64> = plan.assignments.iter().map(|a| a.target_position_lifted).collect();
        check(targets.windows(2).all(|w| w[0] <= w[1]), || format!("instance {k}: lift not monotone"))?;
        let c_star = evaluate_at(&h0, &h1, &c, r.theta_star).value;
        for v in [plan.total_cost, plan.recomputed_cost(&c)] {
            worst = worst.max((v - c_star).abs());
            check((v - c_star).abs() <= 1e-12, || format!("instance {k}: plan cost {v} vs C = {c_star}"))?;
        }
        if l == 2.0 {
            for a in &plan.assignments {
                let lifted = c.eval(a.source_position, a.target_position_lifted);
                let best = (-2..=2)
                    .map(|s| c.eval(a.source_position, a.target_position_circle + s as f64))
                    .fold(f64::INFINITY, f64::min);
                check(lifted <= best + 1e-12, || {
                    format!("instance {k}: {} -> {} is not a shortest lift", a.source_position, a.target_position_lifted)
                })?;
            }
        }
    }
    Ok(format!("200 plans valid, max deviation {worst:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", criterion_1),
        ("epsilon gap", criterion_2),
        ("convexity and derivatives", criterion_3),
        ("closed-form instance", criterion_4),
        ("MK_2 metric", criterion_5),
        ("complexity trends", criterion_6),
        ("iteration budget", criterion_7),
        ("plan validity", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("criterion {} PASS [{name}] {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                println!("criterion {} FAIL [{name}] {detail} ({secs:.1} s)", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
