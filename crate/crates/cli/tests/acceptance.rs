//! One line per acceptance criterion; exits nonzero if any fails.
//!
//! `cargo test --test acceptance -- 3 7` runs only criteria 3 and 7.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use wca::assign::{alternate, AlternatingConfig};
use wca::coreset::{movement_coreset_certify, opt_lower_bound};
use wca::model::site_distance_sum;
use wca::verify::{
    check_coreset_properties, dissect_line, nested_parabola_diagram, sensitivity_example, Instance,
};
use wca::{
    ab_approximate, build_coreset, cost_matrix, extract_diagram, solve_assignment, variation,
    Compatibility, Coreset, CoresetConfig, MergePlan, MergingFunction, NormFamily, SiteSet,
    SymMatrix, WeightBounds, WeightedDataSet,
};
use wca_cli::{cluster_pipeline, ClusterOptions};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian_mixture(rng: &mut ChaCha8Rng, n: usize, k: usize) -> WeightedDataSet<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let centres: Vec<[f64; 2]> = (0..k)
        .map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
        .collect();
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let c = centres[rng.random_range(0..k)];
            vec![c[0] + normal.sample(rng), c[1] + normal.sample(rng)]
        })
        .collect();
    WeightedDataSet::unweighted(&pts).unwrap()
}

fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SymMatrix<f64> {
    let b: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let g: f64 = (0..d).map(|t| b[r][t] * b[c][t]).sum();
                    g + if r == c { 0.2 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    SymMatrix::from_rows(&rows).unwrap()
}

fn random_sites(rng: &mut ChaCha8Rng, k: usize, d: usize, span: f64) -> SiteSet<f64> {
    let s: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random_range(-span..span)).collect())
        .collect();
    SiteSet::new(&s).unwrap()
}

/// Random windows around a random partition of the total weight.
fn random_bounds(rng: &mut ChaCha8Rng, k: usize, total: f64) -> WeightBounds<f64> {
    let cuts: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let sum: f64 = cuts.iter().sum();
    let target: Vec<f64> = cuts.iter().map(|c| total * c / sum).collect();
    let lo = target
        .iter()
        .map(|t| t * rng.random_range(0.7..1.0))
        .collect();
    let hi = target
        .iter()
        .map(|t| t * rng.random_range(1.0..1.3))
        .collect();
    WeightBounds::new(lo, hi).unwrap()
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

struct SweepRun {
    k: usize,
    eps: f64,
    x: WeightedDataSet<f64>,
    coreset: Coreset<f64>,
    seconds: f64,
}

fn sweep() -> Vec<SweepRun> {
    let mut runs = Vec::new();
    for (ki, &k) in [2usize, 3, 5].iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + ki as u64);
        let x = gaussian_mixture(&mut rng, 2000, k);
        for &eps in &[0.5, 0.25, 0.125] {
            let t = Instant::now();
            let coreset = build_coreset(
                &x,
                k,
                eps,
                &NormFamily::identity(k, 2),
                &CoresetConfig::default(),
            )
            .unwrap();
            runs.push(SweepRun {
                k,
                eps,
                x: x.clone(),
                coreset,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
    }
    runs
}

fn criterion_1(runs: &[SweepRun]) -> Outcome {
    let mut bound_ok = true;
    let mut slowest = 0.0f64;
    let mut sizes = Vec::new();
    for r in runs {
        let log = |key: &str| r.coreset.log_value(key).unwrap();
        let bound = 2.0 * log("alg") / log("v_bar") + r.k as f64 * log("lines");
        let bound = if log("alg") == 0.0 {
            r.k as f64 * log("lines")
        } else {
            bound
        };
        bound_ok &= r.coreset.len() as f64 <= bound;
        slowest = slowest.max(r.seconds);
        sizes.push(format!("k={} ε={}: {}", r.k, r.eps, r.coreset.len()));
    }
    let mut worst_exponent = f64::NEG_INFINITY;
    for k in [2usize, 3, 5] {
        let (xs, ys): (Vec<f64>, Vec<f64>) = runs
            .iter()
            .filter(|r| r.k == k)
            .map(|r| ((1.0 / r.eps).ln(), (r.coreset.len() as f64).ln()))
            .unzip();
        worst_exponent = worst_exponent.max(least_squares_slope(&xs, &ys));
    }
    outcome(
        bound_ok && worst_exponent <= 3.3 && slowest <= 60.0,
        format!(
            "size ≤ 2·ALG/V̄ + k|𝓛| on all runs: {bound_ok}; largest fitted exponent {worst_exponent:.3} (≤ 3.3); slowest run {slowest:.2} s (≤ 60); sizes [{}]",
            sizes.join(", ")
        ),
    )
}

fn criterion_2(runs: &[SweepRun]) -> Outcome {
    let mut violations = 0;
    let mut checks = 0;
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    for (r_idx, r) in runs.iter().enumerate() {
        let total = r.x.total_weight();
        for (b_idx, bounds) in [
            WeightBounds::unconstrained(r.k),
            WeightBounds::balanced(r.k, total, 0.1),
        ]
        .into_iter()
        .enumerate()
        {
            let inst = Instance::new(r.x.clone(), NormFamily::identity(r.k, 2), bounds).unwrap();
            let rep = check_coreset_properties(&inst, &r.coreset, 100, (10 * r_idx + b_idx) as u64)
                .unwrap();
            violations += rep.violations.len();
            worst_a = worst_a.max(rep.worst_ratio_a);
            worst_b = worst_b.max(rep.worst_ratio_b);
            checks += 1;
        }
    }
    outcome(
        violations == 0,
        format!(
            "{checks} harness runs × 100 site trials at K_∞ and ±10% balanced: {violations} violations; worst ratios (a) {worst_a:.6} (b) {worst_b:.6}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (k, eps) = (2usize, 0.2f64);
    let a = NormFamily::identity(k, 2);
    let (mut certified, mut certified_violating, mut refused, mut refused_violating) = (0, 0, 0, 0);
    let mut heuristic = 0;
    for inst_idx in 0..50 {
        let half = rng.random_range(3..=6);
        let mut pts = Vec::new();
        for _ in 0..half {
            let p = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            let jitter = 10f64.powf(-rng.random_range(1.0..5.0));
            pts.push(vec![p[0], p[1]]);
            pts.push(vec![
                p[0] + jitter * rng.random_range(-1.0..1.0),
                p[1] + jitter * rng.random_range(-1.0..1.0),
            ]);
        }
        let n = pts.len();
        let x = WeightedDataSet::unweighted(&pts).unwrap();
        let opt = opt_lower_bound(&x, k, 16.0, &CoresetConfig::default()).unwrap();
        heuristic += opt.heuristic as usize;
        let inst = Instance::unconstrained(x.clone(), k);
        let mut maps: Vec<Vec<usize>> = Vec::new();
        maps.push((0..n).map(|j| j / 2).collect());
        for _ in 0..2 {
            let m = rng.random_range(1..n);
            let mut map: Vec<usize> = (0..n)
                .map(|j| if j < m { j } else { rng.random_range(0..m) })
                .collect();
            for j in (1..n).rev() {
                let i = rng.random_range(0..=j);
                map.swap(i, j);
            }
            maps.push(map);
        }
        for (m_idx, map) in maps.into_iter().enumerate() {
            let target = map.iter().max().unwrap() + 1;
            let p = MergingFunction::new(map.clone(), target).unwrap();
            let mut w = vec![0.0; target];
            let mut c = vec![vec![0.0; 2]; target];
            for (j, &t) in map.iter().enumerate() {
                w[t] += x.weight(j);
                c[t][0] += x.weight(j) * x.point(j)[0];
                c[t][1] += x.weight(j) * x.point(j)[1];
            }
            for t in 0..target {
                c[t][0] /= w[t];
                c[t][1] /= w[t];
            }
            let merged = WeightedDataSet::new(&c, w.clone()).unwrap();
            let plan = MergePlan::from_merging(&p, x.weights(), &w).unwrap();
            let cert = movement_coreset_certify(&x, &merged, &plan, eps, &a, opt).unwrap();
            let coreset = Coreset::new(merged, plan, 0.0, 0.0, eps, 1.0, Vec::new()).unwrap();
            let rep =
                check_coreset_properties(&inst, &coreset, 100, (inst_idx * 10 + m_idx) as u64)
                    .unwrap();
            let violated = !rep.violations.is_empty();
            if cert.holds {
                certified += 1;
                certified_violating += violated as usize;
            } else {
                refused += 1;
                refused_violating += violated as usize;
            }
        }
    }
    outcome(
        heuristic == 0 && certified > 0 && certified_violating == 0 && refused >= 10,
        format!(
            "150 mergers on 50 instances (n ≤ 12, k = 2, exact OPT: {}): certified {certified} with {certified_violating} violating; not certified {refused} (≥ 10) of which {refused_violating} exhibit a violation and {} are inconclusive",
            heuristic == 0,
            refused - refused_violating
        ),
    )
}

/// Minimum over all integral assignments respecting the bounds.
fn enumerate_integral(costs: &[f64], n: usize, k: usize, lo: &[usize], hi: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    loop {
        let mut count = vec![0usize; k];
        for &l in &labels {
            count[l] += 1;
        }
        if (0..k).all(|i| count[i] >= lo[i] && count[i] <= hi[i]) {
            let c: f64 = labels
                .iter()
                .enumerate()
                .map(|(j, &l)| costs[l * n + j])
                .sum();
            best = best.min(c);
        }
        let mut p = 0;
        loop {
            if p == n {
                return best;
            }
            labels[p] += 1;
            if labels[p] < k {
                break;
            }
            labels[p] = 0;
            p += 1;
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_value = 0.0f64;
    let mut worst_gap = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=7);
        let k = rng.random_range(1..=3);
        let d = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let x = WeightedDataSet::unweighted(&pts).unwrap();
        let s = random_sites(&mut rng, k, d, 5.0);
        let a = if rng.random_bool(0.5) {
            NormFamily::identity(k, d)
        } else {
            NormFamily::new((0..k).map(|_| random_spd(&mut rng, d)).collect()).unwrap()
        };
        let (lo, hi) = loop {
            let lo: Vec<usize> = (0..k).map(|_| rng.random_range(0..=n / k)).collect();
            let hi: Vec<usize> = lo.iter().map(|&l| l + rng.random_range(0..=n)).collect();
            if lo.iter().sum::<usize>() <= n && hi.iter().sum::<usize>() >= n {
                break (lo, hi);
            }
        };
        let bounds = WeightBounds::new(
            lo.iter().map(|&v| v as f64).collect(),
            hi.iter().map(|&v| v as f64).collect(),
        )
        .unwrap();
        let r = solve_assignment(&x, &s, &a, &bounds).unwrap();
        let costs = cost_matrix(&x, &s, &a).unwrap();
        let oracle = enumerate_integral(&costs, n, k, &lo, &hi);
        worst_value =
            worst_value.max((r.cost - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE));
        worst_gap = worst_gap.max(r.certificate.relative_gap());
    }
    outcome(
        worst_value <= 1e-9 && worst_gap <= 1e-8,
        format!("200 instances: largest relative deviation from enumeration {worst_value:.3e} (≤ 1e-9); largest relative duality gap {worst_gap:.3e} (≤ 1e-8)"),
    )
}

fn anisotropic_instance(
    rng: &mut ChaCha8Rng,
) -> (
    WeightedDataSet<f64>,
    SiteSet<f64>,
    NormFamily<f64>,
    WeightBounds<f64>,
) {
    let (n, k) = (30, 3);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
        .collect();
    let x = WeightedDataSet::unweighted(&pts).unwrap();
    let s = random_sites(rng, k, 2, 10.0);
    let a = NormFamily::new((0..k).map(|_| random_spd(rng, 2)).collect()).unwrap();
    let bounds = random_bounds(rng, k, x.total_weight());
    (x, s, a, bounds)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut first_try, mut strict) = (0, 0);
    for _ in 0..100 {
        let (x, s, a, bounds) = anisotropic_instance(&mut rng);
        if let Ok(pair) = extract_diagram(&x, &s, &a, &bounds) {
            let class = wca::check_compatibility(&pair.diagram, &pair.clustering, &x);
            if class == Compatibility::Strict {
                strict += 1;
                if pair.certificate.attempts == 1 {
                    first_try += 1;
                }
            }
        }
    }
    outcome(
        first_try >= 95 && strict == 100,
        format!("100 instances: strict without perturbation {first_try} (≥ 95); strict within 5 retries {strict} (= 100)"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let k = 3;
    let (mut pairs, mut worst) = (0, 0);
    while pairs < 200 {
        let (x, s, a, bounds) = anisotropic_instance(&mut rng);
        let Ok(pair) = extract_diagram(&x, &s, &a, &bounds) else {
            continue;
        };
        let p = [rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0)];
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let dis = dissect_line(&pair.diagram, &p, &[phi.cos(), phi.sin()]).unwrap();
        worst = worst.max(dis.interval_count());
        pairs += 1;
    }
    let nested: Vec<(usize, usize)> = (2..=4)
        .map(|k| {
            let d = nested_parabola_diagram(k).unwrap();
            (
                k,
                dissect_line(&d, &[0.0, 0.0], &[1.0, 0.0])
                    .unwrap()
                    .interval_count(),
            )
        })
        .collect();
    let tight = nested.iter().all(|&(k, c)| c == 2 * k - 1);
    outcome(
        worst <= 2 * k - 1 && tight,
        format!(
            "200 lines through strict diagrams (k = 3): most intervals {worst} (≤ 5); nested construction {}",
            nested.iter().map(|(k, c)| format!("k={k}: {c}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let e = sensitivity_example(10, 0.01).unwrap();
    let total: f64 = e.lp_shares.iter().sum();
    let tiny = sensitivity_example(10, 1e-4).unwrap();
    let tiny_total: f64 = tiny.lp_shares.iter().sum();
    let pass = e.matches()
        && e.per_point_bound >= 0.9990
        && total >= 9.99
        && tiny.matches()
        && tiny_total >= 10.0 * (1.0 - 1e-6);
    outcome(
        pass,
        format!(
            "r = 0.01: largest relative LP error {:.2e} (≤ 1e-9), per-point bound {:.6} (≥ 0.9990), T̂ {total:.6} (≥ 9.99); r = 1e-4: largest relative LP error {:.2e}, T̂ {tiny_total:.9} (≥ {:.9})",
            e.max_relative_error,
            e.per_point_bound,
            tiny.max_relative_error,
            10.0 * (1.0 - 1e-6)
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_centre, mut worst_norm) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=12);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let x = WeightedDataSet::new(&pts, w).unwrap();
        let a = random_spd(&mut rng, d);
        let s: Vec<f64> = (0..d).map(|_| rng.random_range(-15.0..15.0)).collect();
        let lhs = site_distance_sum(&x, &s, &a);
        let rhs = variation(&x, &a).unwrap() + x.total_weight() * a.dist2(&x.centroid(), &s);
        worst_centre = worst_centre.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));

        let ev = a.eigenvalues();
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(0.0, f64::max);
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let e2: f64 = v.iter().map(|t| t * t).sum();
        let q = a.quad_form(&v);
        let excess = ((lo * e2 - q) / q).max((q - hi * e2) / q).max(0.0);
        worst_norm = worst_norm.max(excess);
    }
    outcome(
        worst_centre <= 1e-9 && worst_norm <= 1e-9,
        format!("10⁴ cases: centre replacement largest relative error {worst_centre:.3e}; norm equivalence largest relative excess {worst_norm:.3e} (both ≤ 1e-9)"),
    )
}

fn criterion_9() -> Outcome {
    let (k, eps, starts) = (3usize, 0.3f64, 5usize);
    let norms = NormFamily::identity(k, 2);
    let mut worst_ratio = 0.0f64;
    let (mut pipeline_seconds, mut direct_seconds) = (0.0, 0.0);
    let mut sizes = Vec::new();
    for m in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + m);
        let x = gaussian_mixture(&mut rng, 5000, k);
        let cfg = CoresetConfig {
            seed: m,
            ..CoresetConfig::default()
        };
        let baseline = ab_approximate(&x, k, 1, 5, m).unwrap().alg;
        let free = cluster_pipeline(
            &x,
            &ClusterOptions {
                k,
                eps,
                bounds: WeightBounds::unconstrained(k),
                norms: norms.clone(),
                coreset: cfg,
                starts,
                reoptimize: false,
            },
        )
        .unwrap();
        worst_ratio = worst_ratio.max(free.cost() / baseline);

        let balanced = WeightBounds::balanced(k, x.total_weight(), 0.0);
        let t = Instant::now();
        let out = cluster_pipeline(
            &x,
            &ClusterOptions {
                k,
                eps,
                bounds: balanced.clone(),
                norms: norms.clone(),
                coreset: cfg,
                starts,
                reoptimize: false,
            },
        )
        .unwrap();
        pipeline_seconds += t.elapsed().as_secs_f64();
        sizes.push(out.coreset_size);
        let t = Instant::now();
        alternate(
            &x,
            &norms,
            &balanced,
            &[],
            &AlternatingConfig {
                starts,
                seed: m,
                ..AlternatingConfig::default()
            },
        )
        .unwrap();
        direct_seconds += t.elapsed().as_secs_f64();
    }
    let cost_limit = (1.0 + eps) * 1.05;
    let time_ratio = pipeline_seconds / direct_seconds;
    let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
    outcome(
        worst_ratio <= cost_limit && time_ratio <= 0.25,
        format!(
            "20 mixtures (n = 5000, k = 3, ε = 0.3): worst cost / best-of-5 heuristic {worst_ratio:.4} (≤ {cost_limit:.3}); balanced wall clock coreset pipeline {pipeline_seconds:.1} s vs direct {direct_seconds:.1} s, ratio {time_ratio:.3} (≤ 0.25); coreset sizes {lo}..{hi}"
        ),
    )
}

fn main() {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |c: usize| selected.is_empty() || selected.contains(&c);
    let runs = if want(1) || want(2) {
        sweep()
    } else {
        Vec::new()
    };
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "size bound", Box::new(|| criterion_1(&runs))),
        (2, "coreset inequalities", Box::new(|| criterion_2(&runs))),
        (3, "movement coreset certification", Box::new(criterion_3)),
        (4, "LP correctness", Box::new(criterion_4)),
        (5, "strict compatibility", Box::new(criterion_5)),
        (6, "interval structure", Box::new(criterion_6)),
        (7, "sensitivity", Box::new(criterion_7)),
        (8, "identities", Box::new(criterion_8)),
        (9, "end to end", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (id, name, run) in &criteria {
        if !want(*id) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        println!(
            "criterion {id} [{}] {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
