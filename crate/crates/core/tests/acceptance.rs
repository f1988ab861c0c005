//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use quadfeat::bounds::{counts, poly_bound};
use quadfeat::featuremaps::{
    anova_compose, embed_grid_fast, rff, FeatureMap, KernelApprox, Method,
};
use quadfeat::grids::{dense_grid, exactness_residual, sparse_grid, subsample_dense, subsample_grid};
use quadfeat::harness::{
    build_map, error_curve, gaussian_mixture, reports_to_string, rms_error, sample_pairs, speech_like_mixture,
    sweep, BuildParams, Displacements, ErrorReport, SweepConfig,
};
use quadfeat::kernels::{eval_anova, AnovaKernel, GaussianKernel, ShiftInvariantKernel};
use quadfeat::quad1d::{double_factorial, gauss_hermite, normal_moment};
use quadfeat::rng;
use quadfeat::scalar::dot;
use quadfeat::solvers::{bisect_lambda, construct_poly_exact, kkt_violation, nnls, BisectOptions, Matrix, PolyExactOptions};
use rand::Rng;

const N_EVAL: usize = 100_000;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(elapsed: Duration, budget: Duration, detail: String) -> Check {
    ensure(elapsed <= budget, format!("{detail}; {:.2}s of {:.0}s budget", elapsed.as_secs_f64(), budget.as_secs_f64()))
}

fn unit_kernel() -> GaussianKernel<f64> {
    GaussianKernel::unit()
}

fn gauss_hermite_exactness() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for l in 1..=20usize {
        let rule = gauss_hermite::<f64>(l).map_err(|e| e.to_string())?;
        for p in 0..(2 * l) as u32 {
            let got = rule.integrate(|x| x.powi(p as i32));
            let scale = double_factorial(p as i64 - 1).max(1.0);
            let rel = (got - normal_moment(p)).abs() / scale;
            worst = worst.max(rel);
            if rel > 1e-9 {
                return Err(format!("L={l} p={p}: scaled error {rel:.2e}"));
            }
        }
        let p = 2 * l as u32;
        let defect = normal_moment(p) - rule.integrate(|x| x.powi(p as i32));
        // an L-point Gauss rule misses E[ω^2L] by exactly L!
        let l_fact: f64 = (1..=l).map(|k| k as f64).product();
        if (defect - l_fact).abs() > 1e-6 * l_fact {
            return Err(format!("L={l}: degree-{p} defect {defect:.6e}, expected {l_fact:.6e}"));
        }
    }
    within_budget(start.elapsed(), Duration::from_secs(1), format!("worst scaled error {worst:.1e}"))
}

fn sparse_grid_count() -> Check {
    let start = Instant::now();
    let g = sparse_grid::<f64>(2, 25).map_err(|e| e.to_string())?;
    let bound = counts(25, 2, 2, 1).sparse_bound;
    if BigUint::from(g.len()) > bound || g.len() != 1351 {
        return Err(format!("{} points, bound {bound}", g.len()));
    }
    within_budget(start.elapsed(), Duration::from_secs(5), format!("1351 points <= {bound}"))
}

fn sparse_telescoping() -> Check {
    let mut rng = rng::seeded(3);
    let mut worst = 0.0f64;
    for level in 1..=3u32 {
        let sparse = FeatureMap::new(sparse_grid::<f64>(level, 1).unwrap(), Method::Sparse, 0.5).unwrap();
        let gh = gauss_hermite::<f64>(1 << level).unwrap();
        let dense = FeatureMap::new(
            quadfeat::GridQuadrature::new(1, gh.nodes().to_vec(), gh.weights().to_vec(), "gh").unwrap(),
            Method::Dense,
            0.5,
        )
        .unwrap();
        for _ in 0..100 {
            let u = [rng.random_range(-5.0..5.0)];
            worst = worst.max((sparse.approx_diff(&u) - dense.approx_diff(&u)).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:.1e} over A=1..3"))
}

fn poly_exact_vs_rff() -> Check {
    let start = Instant::now();
    let k = unit_kernel();
    let mut wins = 0;
    let mut ratios = Vec::new();
    for seed in 0..5u64 {
        let g = construct_poly_exact::<f64>(25, 2, 1000, seed, PolyExactOptions::default()).map_err(|e| e.to_string())?;
        let res = exactness_residual(&g, 2).map_err(|e| e.to_string())?;
        if res > 1e-8 {
            return Err(format!("seed {seed}: exactness residual {res:.1e}"));
        }
        let pe = FeatureMap::new(g, Method::PolyExact, 0.5).unwrap();
        let r = rff::<f64>(25, 1000, 0.5, seed).unwrap();
        let s = Displacements::sample(25, N_EVAL, seed).unwrap();
        let e_pe = error_curve(&pe, &k, &[0.25], &s).unwrap()[0].max;
        let e_rff = error_curve(&r, &k, &[0.25], &s).unwrap()[0].max;
        ratios.push(e_rff / e_pe);
        if e_rff >= 2.0 * e_pe {
            wins += 1;
        }
    }
    let detail = format!("RFF/poly-exact max-error ratios at M=0.25: {}", fmt_list(&ratios));
    if wins < 4 {
        return Err(format!("{wins}/5 seeds with a 2x margin; {detail}"));
    }
    within_budget(start.elapsed(), Duration::from_secs(120), format!("{wins}/5 seeds; {detail}"))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" ")
}

fn sparse_crossover() -> Check {
    let start = Instant::now();
    let k = unit_kernel();
    let ms = [0.1, 0.2, 0.3, 0.4, 1.6, 2.0];
    let sp = FeatureMap::new(sparse_grid::<f64>(2, 25).unwrap(), Method::Sparse, 0.5).unwrap();
    let r = rff::<f64>(25, 1351, 0.5, 0).unwrap();
    let s = Displacements::sample(25, N_EVAL, 0).unwrap();
    let a = error_curve(&sp, &k, &ms, &s).unwrap();
    let b = error_curve(&r, &k, &ms, &s).unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for ((&m, x), y) in ms.iter().zip(&a).zip(&b) {
        detail.push(format!("M={m}: {:.1e} vs {:.1e}", x.max, y.max));
        ok &= if m <= 0.4 { x.max < y.max } else { x.max > y.max };
    }
    let detail = format!("sparse vs RFF {}", detail.join(", "));
    if !ok {
        return Err(detail);
    }
    within_budget(start.elapsed(), Duration::from_secs(120), detail)
}

fn subsampled_parity() -> Check {
    let start = Instant::now();
    let k = unit_kernel();
    let ms = [0.5, 1.0, 2.0, 3.0];
    let rule = gauss_hermite::<f64>(11).unwrap();
    let mut ratios = Vec::new();
    for (seed, d_count) in [(0u64, 500usize), (1, 1000)] {
        let sub = FeatureMap::new(subsample_dense(&rule, 25, d_count, seed).unwrap(), Method::Subsampled, 0.5).unwrap();
        let r = rff::<f64>(25, d_count, 0.5, seed).unwrap();
        let s = Displacements::sample(25, N_EVAL, seed).unwrap();
        let a = error_curve(&sub, &k, &ms, &s).unwrap();
        let b = error_curve(&r, &k, &ms, &s).unwrap();
        ratios.extend(a.iter().zip(&b).map(|(x, y)| x.max / y.max));
    }
    let detail = format!("subsampled/RFF ratios {}", fmt_list(&ratios));
    if ratios.iter().any(|r| !(0.5..=2.0).contains(r)) {
        return Err(detail);
    }
    within_budget(start.elapsed(), Duration::from_secs(120), detail)
}

fn bound_dominance() -> Check {
    let k = unit_kernel();
    let mut rules: Vec<(String, quadfeat::GridQuadrature<f64>, u32)> = Vec::new();
    for (l, d) in [(2, 1), (3, 1), (4, 1), (5, 1), (2, 2), (3, 2), (4, 2), (5, 2), (6, 2), (8, 2), (2, 3), (3, 3), (4, 3), (5, 3), (3, 4), (2, 5)] {
        // exact to degree 2L-1, so to the even degree 2L-2
        rules.push((format!("dense L={l} d={d}"), dense_grid(l, d).unwrap(), 2 * l as u32 - 2));
    }
    for (d, r, seed) in [(3, 2, 1), (3, 4, 2), (5, 2, 3), (2, 6, 4)] {
        let g = construct_poly_exact::<f64>(d, r, 3000, seed, PolyExactOptions::default()).map_err(|e| e.to_string())?;
        rules.push((format!("poly-exact d={d} R={r}"), g, r));
    }
    let mut tightest = 0.0f64;
    for (i, (name, g, r)) in rules.into_iter().enumerate() {
        if !g.nonnegative() {
            return Err(format!("{name} has negative weights"));
        }
        let res = exactness_residual(&g, r).unwrap();
        if res > 1e-8 {
            return Err(format!("{name}: residual {res:.1e} at R={r}"));
        }
        // diameter at which the bound equals 1/2
        let rf = r as f64;
        let m = (rf / std::f64::consts::E * (1.0f64 / 6.0).powf(2.0 / rf)).sqrt();
        let bound = poly_bound(1.0, m, r).unwrap();
        let fm = FeatureMap::new(g, Method::Dense, 0.5).unwrap();
        let s = Displacements::sample(fm.dim(), N_EVAL, i as u64).unwrap();
        let err = error_curve(&fm, &k, &[m], &s).unwrap()[0].max;
        if err > bound {
            return Err(format!("{name}: error {err:.3e} exceeds bound {bound:.3e} at M={m:.3}"));
        }
        tightest = tightest.max(err / bound);
    }
    ensure(true, format!("20 rules; largest error/bound {tightest:.2e}"))
}

/// Smallest `½‖Ma - b‖²` with `a >= 0` by trying every support.
fn exhaustive_nnls(rows: &[Vec<f64>], b: &[f64]) -> f64 {
    let p = rows[0].len();
    let objective = |a: &[f64]| {
        rows.iter()
            .zip(b)
            .map(|(r, &y)| (dot(r, a) - y).powi(2))
            .sum::<f64>()
            * 0.5
    };
    let mut best = objective(&vec![0.0; p]);
    for mask in 1u32..(1 << p) {
        let cols: Vec<usize> = (0..p).filter(|j| mask >> j & 1 == 1).collect();
        let k = cols.len();
        // normal equations on the support, Gaussian elimination with pivoting
        let mut g = vec![vec![0.0; k + 1]; k];
        for (i, &ci) in cols.iter().enumerate() {
            for (j, &cj) in cols.iter().enumerate() {
                g[i][j] = rows.iter().map(|r| r[ci] * r[cj]).sum();
            }
            g[i][k] = rows.iter().zip(b).map(|(r, &y)| r[ci] * y).sum();
        }
        let mut singular = false;
        for c in 0..k {
            let piv = (c..k).max_by(|&x, &y| g[x][c].abs().total_cmp(&g[y][c].abs())).unwrap();
            if g[piv][c].abs() < 1e-12 {
                singular = true;
                break;
            }
            g.swap(c, piv);
            for r in 0..k {
                if r != c {
                    let f = g[r][c] / g[c][c];
                    let pivot_row = g[c].clone();
                    for (x, y) in g[r][c..=k].iter_mut().zip(&pivot_row[c..=k]) {
                        *x -= f * y;
                    }
                }
            }
        }
        if singular {
            continue;
        }
        let z: Vec<f64> = (0..k).map(|i| g[i][k] / g[i][i]).collect();
        if z.iter().any(|&v| v < 0.0) {
            continue;
        }
        let mut a = vec![0.0; p];
        for (&c, &v) in cols.iter().zip(&z) {
            a[c] = v;
        }
        best = best.min(objective(&a));
    }
    best
}

fn nnls_correctness() -> Check {
    let mut rng = rng::seeded(2024);
    let mut worst_gap = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=8usize);
        let p = rng.random_range(1..=5usize);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let sol = nnls(&m, &b, 1e-12).map_err(|e| e.to_string())?;
        let got = 0.5 * sol.residual_norm * sol.residual_norm;
        let gap = (got - exhaustive_nnls(&rows, &b)).abs();
        worst_gap = worst_gap.max(gap);
        if gap > 1e-9 {
            return Err(format!("n={n} p={p}: objective gap {gap:.2e}"));
        }
    }
    let mut worst_kkt = 0.0f64;
    for (n, p) in [(10, 3), (40, 20), (100, 50), (200, 100), (300, 300), (400, 500)] {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let sol = nnls(&m, &b, 1e-12).map_err(|e| e.to_string())?;
        let kkt = kkt_violation(&m, &b, 0.0, &sol.a);
        worst_kkt = worst_kkt.max(kkt);
        if kkt > 1e-8 {
            return Err(format!("{n}x{p}: KKT residual {kkt:.1e}"));
        }
    }
    ensure(true, format!("200 small instances, max objective gap {worst_gap:.1e}; max KKT residual up to p=500 {worst_kkt:.1e}"))
}

fn reweighted_vs_rff() -> Check {
    let start = Instant::now();
    let data = speech_like_mixture(10_000, 1).unwrap();
    let rule = gauss_hermite::<f64>(11).unwrap();
    let target = 2000;
    let mut wins = 0;
    let mut ratios = Vec::new();
    let mut sizes = Vec::new();
    for seed in 0..10u64 {
        let train = sample_pairs(&data, 500, 1000 + seed).unwrap();
        let test = sample_pairs(&data, 10_000, 2000 + seed).unwrap();
        // bandwidth from the median squared distance of the training pairs
        let mut sq: Vec<f64> = train.iter().map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()).collect();
        sq.sort_by(f64::total_cmp);
        let gamma = 1.0 / sq[sq.len() / 2];
        let k = GaussianKernel::new(gamma).unwrap();
        let candidates = subsample_dense(&rule, 40, 4 * target, seed).unwrap();
        let fitted = bisect_lambda(&candidates, &train, &k, k.frequency_scale(), target, BisectOptions::default())
            .map_err(|e| e.to_string())?
            .rule;
        let rw = FeatureMap::new(fitted.grid, Method::Reweighted, gamma).unwrap();
        let baseline = rff::<f64>(40, rw.len(), gamma, seed).unwrap();
        let ratio = rms_error(&baseline, &k, &test).unwrap() / rms_error(&rw, &k, &test).unwrap();
        ratios.push(ratio);
        sizes.push(rw.len() as f64);
        if ratio >= 1.3 {
            wins += 1;
        }
    }
    let detail = format!(
        "{wins}/10 seeds at >= 1.3x; RFF/reweighted RMS ratios {}; reweighted D between {} and {}",
        fmt_list(&ratios),
        sizes.iter().cloned().fold(f64::INFINITY, f64::min),
        sizes.iter().cloned().fold(0.0, f64::max)
    );
    if wins < 8 {
        return Err(detail);
    }
    within_budget(start.elapsed(), Duration::from_secs(300), detail)
}

fn embedding_identity() -> Check {
    let d = 4;
    let gamma = 0.3;
    let data = gaussian_mixture(2000, d, 2, 2.0, 5).unwrap();
    let mut worst = 0.0f64;
    for method in [Method::Rff, Method::Qmc, Method::Dense, Method::Subsampled, Method::PolyExact, Method::Reweighted] {
        let mut p = BuildParams::new(d, 200, gamma, 11);
        p.l = Some(if method == Method::Dense { 3 } else { 5 });
        p.target = Some(50);
        let fm = build_map(method, &p, Some(&data)).map_err(|e| format!("{method}: {e}"))?;
        let mut rng = rng::seeded(12);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ip = dot(&fm.embed(&x).unwrap(), &fm.embed(&y).unwrap());
            let dev = (ip - fm.approx_kernel(&x, &y).unwrap()).abs();
            worst = worst.max(dev);
            if dev > 1e-10 {
                return Err(format!("{method}: inner product off by {dev:.1e}"));
            }
        }
    }
    let g = subsample_grid(&dense_grid::<f64>(3, 3).unwrap(), 25, 4).unwrap();
    let fm = FeatureMap::new(g, Method::Subsampled, gamma).unwrap();
    let mut rng = rng::seeded(13);
    let rows: Vec<Vec<f64>> = (0..100).map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let fast = embed_grid_fast(&fm, &rows).unwrap();
    let mut fast_dev = 0.0f64;
    for (row, x) in fast.rows.iter().zip(&rows) {
        for (a, b) in row.iter().zip(fm.embed(x).unwrap()) {
            fast_dev = fast_dev.max((a - b).abs());
        }
    }
    ensure(
        fast.used_fast && fast_dev <= 1e-12,
        format!("inner-product deviation {worst:.1e} over 6 methods; fast embed deviation {fast_dev:.1e}"),
    )
}

fn anova_composition() -> Check {
    let base = GaussianKernel::new(0.5).unwrap();
    let k = AnovaKernel::new(4, vec![vec![0, 1], vec![2, 3]], base).unwrap();
    let fm = anova_compose(&k, |dim, _| FeatureMap::new(dense_grid(12, dim)?, Method::Dense, 0.5), 0)
        .map_err(|e| e.to_string())?;
    let mut seed = 0;
    let noisy = anova_compose(
        &k,
        |dim, ds| {
            seed += 1;
            rff(dim, ds, 0.5, seed)
        },
        20,
    )
    .unwrap();
    let mut rng = rng::seeded(14);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = eval_anova(&k, &x, &y).unwrap();
        worst = worst.max((fm.approx_kernel(&x, &y).unwrap() - exact).abs());
        let total = (noisy.approx_kernel(&x, &y).unwrap() - exact).abs();
        let parts: f64 = noisy
            .subsets()
            .iter()
            .zip(noisy.sub_maps())
            .map(|(s, sub)| {
                let us: Vec<f64> = s.iter().map(|&i| x[i] - y[i]).collect();
                let e: f64 = us.iter().map(|&t| base.eval_1d(t)).product();
                (sub.approx_diff(&us) - e).abs()
            })
            .sum();
        if total > parts + 1e-12 {
            return Err(format!("composite error {total:.3e} above sub-error sum {parts:.3e}"));
        }
    }
    ensure(worst <= 1e-8, format!("max deviation from exact ANOVA kernel {worst:.1e}; triangle inequality on 1000 pairs"))
}

fn rff_unbiased() -> Check {
    let u = [0.6, 0.0, 0.8];
    let vals: Vec<f64> = (0..400).map(|s| rff::<f64>(3, 50, 0.5, s).unwrap().approx_diff(&u)).collect();
    let mean = vals.iter().sum::<f64>() / 400.0;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 399.0;
    let se = (var / 400.0).sqrt();
    let exact = unit_kernel().eval_diff(&u);
    let z = (mean - exact) / se;
    ensure(z.abs() <= 3.0, format!("mean {mean:.5} vs e^(-1/2) {exact:.5}, z = {z:.2}"))
}

fn sweep_determinism() -> Check {
    let cfg = SweepConfig::from_json_str(
        r#"{"methods":["rff","qmc","dense","sparse","subsampled","poly-exact","reweighted"],
            "d":3,"D":[40],"L":3,"M":[0.5,1.0,2.0],"seeds":[1,2],"n_eval":2000,"target_D":30}"#,
    )
    .map_err(|e| e.to_string())?;
    let strip = |rows: Vec<ErrorReport>| rows.iter().map(ErrorReport::without_timing).collect::<Vec<_>>();
    let a = reports_to_string(&strip(sweep(&cfg).map_err(|e| e.to_string())?)).unwrap();
    let b = reports_to_string(&strip(sweep(&cfg).map_err(|e| e.to_string())?)).unwrap();
    ensure(a == b, format!("{} rows identical across two runs", a.lines().count() - 1))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let checks: [Criterion; 13] = [
        ("gauss-hermite exactness", gauss_hermite_exactness),
        ("sparse grid count", sparse_grid_count),
        ("1-d sparse telescoping", sparse_telescoping),
        ("poly-exact vs rff", poly_exact_vs_rff),
        ("sparse grid crossover", sparse_crossover),
        ("subsampled grid parity", subsampled_parity),
        ("error bound dominance", bound_dominance),
        ("nnls correctness", nnls_correctness),
        ("reweighted vs rff", reweighted_vs_rff),
        ("embedding identity", embedding_identity),
        ("anova composition", anova_composition),
        ("rff unbiasedness", rff_unbiased),
        ("sweep determinism", sweep_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
