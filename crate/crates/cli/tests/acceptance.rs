//! End-to-end acceptance suite. Prints one `PASS` or `FAIL` line per
//! criterion and exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tpcert_cli::{random_bessel_input, run};
use tpcert_core::bessel::{bessel_i_quadrature, bessel_i_rational, generating_partial_sum, quadrature_nodes_for, tail_bound};
use tpcert_core::heatflow::{bessel_sup_on_grid, index_window, l2_bound, residual_check, richardson_ratio, Offsets};
use tpcert_core::kernels::{build_bessel_matrix, build_karlin_matrix, ArgumentTuple, IndexTuple};
use tpcert_core::positivity::{apply, certainly_non_proportional, check_grassmann_point, check_tp, h_k_map, sign_changes, sign_changes_max};
use tpcert_core::positivity::{GrassmannVerdict, TpVerdict};
use tpcert_core::scalar::{parse_rational, rational_from_i64};
use tpcert_core::{CertifiedReal, PrecisionPolicy};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn cli(args: &[&str]) -> (i32, Value) {
    let out = run(std::iter::once("tpcert").chain(args.iter().copied()));
    let v = serde_json::from_str(&out.stdout).unwrap_or(Value::Null);
    (out.code, v)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn strict_tp_random_bessel() -> Outcome {
    let start = Instant::now();
    let mut total = 0;
    let mut undecided = 0;
    for m in 1..=5usize {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + m as u64);
        let expected: u64 = (1..=m as u64).map(|p| binomial(m as u64, p).pow(2)).sum();
        for _ in 0..50 {
            let (k, x) = random_bessel_input(&mut rng, m, 15, 10);
            let (k, x, order) = (join(&k), join(&x), m.to_string());
            let (code, cert) = cli(&["--precision-cap", "1024", "check-tp", "bessel", "--k", &k, "--x", &x, "--order", &order, "--strict"]);
            total += 1;
            if cert["verdict"] == "Indeterminate" {
                undecided += 1;
            }
            ensure(code == 0 && cert["verdict"] == "StrictlyPositive", || format!("k=({k}) x=({x}): exit {code}, {}", cert["verdict"]))?;
            ensure(cert["minors_checked"] == expected, || format!("k=({k}) x=({x}): {} minors, expected {expected}", cert["minors_checked"]))?;
        }
    }
    let spent = start.elapsed();
    ensure(undecided == 0, || format!("{undecided} undecided"))?;
    ensure(spent < Duration::from_secs(120), || format!("took {spent:.1?}"))?;
    Ok(format!("{total} matrices, 0 undecided, {spent:.1?}"))
}

fn toeplitz_tp() -> Outcome {
    let start = Instant::now();
    let mut minors = 0;
    for x in ["0.5", "1", "2"] {
        let (code, cert) = cli(&["check-tp", "toeplitz", "--x", x, "--rows", "0..5", "--cols", "0..5", "--order", "4", "--strict"]);
        ensure(code == 0 && cert["verdict"] == "StrictlyPositive", || format!("x={x}: {}", cert["verdict"]))?;
        minors += cert["minors_checked"].as_u64().unwrap_or(0);
    }
    let spent = start.elapsed();
    ensure(spent < Duration::from_secs(30), || format!("took {spent:.1?}"))?;
    Ok(format!("{minors} minors positive, {spent:.1?}"))
}

fn heat_equation_residual() -> Outcome {
    let cases: [(usize, &[&str], u32, &str); 3] = [(1, &[], 20, "1"), (2, &["1"], 12, "0.5"), (3, &["1", "2"], 10, "1")];
    let h = q("1e-4");
    let mut parts = Vec::new();
    for (m, w, kmax, x1) in cases {
        let w = Offsets::parse(w).map_err(|e| e.to_string())?;
        let window = index_window(m, kmax).map_err(|e| e.to_string())?;
        let rep = residual_check(&q(x1), &w, &window, &h, 1e-300).map_err(|e| e.to_string())?;
        let ratio = richardson_ratio(&q(x1), &w, &window, &h, 1e-300).map_err(|e| e.to_string())?;
        ensure(rep.max_interior_relative <= 1e-6, || format!("m={m}: residual {:e}", rep.max_interior_relative))?;
        ensure((3.5..=4.5).contains(&ratio), || format!("m={m}: ratio {ratio}"))?;
        parts.push(format!("m={m} {:.1e}/{ratio:.3}", rep.max_interior_relative));
    }
    Ok(parts.join(", "))
}

fn flow_vs_direct() -> Outcome {
    let (code, v) = cli(&["heatflow", "integrate", "--m", "2", "--w", "1", "--kmax", "14", "--X1", "1", "--step", "1e-3"]);
    let err = v["endpoint_vs_direct_max_error"].as_f64().unwrap_or(f64::NAN);
    let cone = v["cone_min"].as_f64().unwrap_or(f64::NAN);
    ensure(code == 0 && err <= 1e-6 && cone >= -1e-10, || format!("exit {code}, error {err:e}, cone min {cone:e}"))?;
    Ok(format!("error {err:.1e}, cone min {cone:.1e}, truncation bound {}", v["truncation_bound"]))
}

fn tail_bounds() -> Outcome {
    let mut parts = Vec::new();
    for (r, j) in [(2i64, 4u64), (3, 9), (4, 16)] {
        let r = rational_from_i64(r);
        let sup = bessel_sup_on_grid(j, &r, 1000).map_err(|e| e.to_string())?;
        let bound = tail_bound(j, &r).map_err(|e| e.to_string())?;
        ensure(sup.upper_rational() < bound, || format!("R={r} j={j}: sup {sup} vs {bound}"))?;
        parts.push(format!("R={r}: {:.4} < {:.4}", sup.upper_f64(), CertifiedReal::from_rational(&bound, 64).mid_f64()));
    }
    Ok(parts.join(", "))
}

fn generating_function() -> Outcome {
    let mut worst = 0.0f64;
    for y in ["0.5", "1", "5"] {
        let s = generating_partial_sum(&q(y), &q("1"), 40, 128).map_err(|e| e.to_string())?;
        let e = CertifiedReal::from_rational(&q(y), 128).exp();
        let gap = (&s - &e).abs().upper_f64();
        ensure(gap <= 1e-12, || format!("y={y}: gap {gap:e}"))?;
        worst = worst.max(gap);
    }
    Ok(format!("max gap {worst:.1e}"))
}

fn l2_window_bound() -> Outcome {
    let window = index_window(2, 14).map_err(|e| e.to_string())?;
    let rep = l2_bound(&q("2"), 2, &window).map_err(|e| e.to_string())?;
    ensure(rep.points == 25, || format!("{} grid points", rep.points))?;
    ensure(rep.partial_sum_max.certainly_lt(&rep.c_r), || format!("{} vs C(R) = {}", rep.partial_sum_max, rep.c_r))?;
    Ok(format!("{:.4} < C(R) = {:.2}", rep.partial_sum_max.mid_f64(), rep.c_r.mid_f64()))
}

fn grid_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<BigRational> {
    let mut v: Vec<i64> = Vec::with_capacity(n);
    while v.len() < n {
        let i = rng.gen_range(0..=50);
        if !v.contains(&i) {
            v.push(i);
        }
    }
    v.sort_unstable();
    v.into_iter().map(|i| rational_from_i64(i) / rational_from_i64(10)).collect()
}

fn karlin_nonnegative() -> Outcome {
    let policy = PrecisionPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut strict, mut weak) = (0, 0);
    for _ in 0..20 {
        let (xs, ys) = (grid_values(&mut rng, 3), grid_values(&mut rng, 3));
        let m = build_karlin_matrix(&q("3"), &q("1"), &xs, &ys, 1e-30, &policy).map_err(|e| e.to_string())?;
        let cert = check_tp(&m, 3, false, &policy).map_err(|e| e.to_string())?;
        match cert.verdict {
            TpVerdict::StrictlyPositive => strict += 1,
            TpVerdict::Nonnegative => weak += 1,
            v => return Err(format!("xs=({}) ys=({}): {v:?}", join(&xs), join(&ys))),
        }
    }
    Ok(format!("{strict} strictly positive, {weak} nonnegative"))
}

fn series_vs_quadrature() -> Outcome {
    let mut pairs = 0;
    for x in ["0.1", "1", "5", "10", "20"] {
        let xq = q(x);
        let xf: f64 = x.parse().unwrap();
        for j in 0..=20u64 {
            let series = bessel_i_rational(&(j as i64).into(), &xq, 192).map_err(|e| e.to_string())?;
            let quad = bessel_i_quadrature(j, &xq, quadrature_nodes_for(j, xf, 1e-30), 192).map_err(|e| e.to_string())?;
            ensure(series.overlaps(&quad), || format!("j={j} x={x}: {series} vs {quad}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} enclosure pairs overlap"))
}

fn variation_diminishing() -> Outcome {
    let policy = PrecisionPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut matrices = Vec::new();
    while matrices.len() < 20 {
        let (k, x) = random_bessel_input(&mut rng, 6, 15, 10);
        let m = build_bessel_matrix(&IndexTuple::new(k).unwrap(), &ArgumentTuple::new(x).unwrap(), 1e-30, &policy).map_err(|e| e.to_string())?;
        let cert = check_tp(&m, 6, true, &policy).map_err(|e| e.to_string())?;
        ensure(cert.verdict == TpVerdict::StrictlyPositive, || format!("sampled matrix not certified: {:?}", cert.verdict))?;
        matrices.push(m);
    }
    let mut trials = 0;
    let mut vectors = 0;
    while vectors < 1000 {
        let v: Vec<i64> = (0..6).map(|_| rng.gen_range(-9..=9)).collect();
        let Ok(before) = sign_changes(&v.iter().map(|&t| t as f64).collect::<Vec<_>>()) else {
            continue;
        };
        vectors += 1;
        let vq: Vec<BigRational> = v.iter().map(|&t| rational_from_i64(t)).collect();
        for m in &matrices {
            let after = sign_changes_max(&apply(m, &vq).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure(after <= before, || format!("v={v:?}: {after} > {before}"))?;
            trials += 1;
        }
    }
    Ok(format!("{trials} trials"))
}

fn grassmannian_points() -> Outcome {
    let policy = PrecisionPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shapes = [(2usize, 4usize), (2, 5), (3, 4), (3, 5)];
    for i in 0..20 {
        let (l, m) = shapes[i % shapes.len()];
        let k = IndexTuple::new(random_bessel_input(&mut rng, m, 15, 10).0).unwrap();
        let x = ArgumentTuple::new(random_bessel_input(&mut rng, l, 15, 10).1).unwrap();
        let h = build_bessel_matrix(&k, &x, 1e-30, &policy).map_err(|e| e.to_string())?;
        let g = check_grassmann_point(&h, &policy).map_err(|e| e.to_string())?;
        ensure(g.verdict == GrassmannVerdict::StrictlyTotallyPositive, || format!("k={k} x={x:?}: {:?}", g.verdict))?;
    }
    for i in 0..20 {
        let (l, m) = shapes[i % shapes.len()];
        let k = IndexTuple::new(random_bessel_input(&mut rng, m, 15, 10).0).unwrap();
        let (x, y) = loop {
            let x = random_bessel_input(&mut rng, l, 15, 10).1;
            let y = random_bessel_input(&mut rng, l, 15, 10).1;
            if x != y {
                break (x, y);
            }
        };
        let px = h_k_map(&k, &ArgumentTuple::new(x.clone()).unwrap(), 1e-30, &policy).map_err(|e| e.to_string())?;
        let py = h_k_map(&k, &ArgumentTuple::new(y.clone()).unwrap(), 1e-30, &policy).map_err(|e| e.to_string())?;
        ensure(certainly_non_proportional(&px, &py), || format!("k={k}: x=({}) and y=({}) not separated", join(&x), join(&y)))?;
    }
    Ok("20 points strictly positive, 20 pairs separated".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("strict total positivity of random Bessel matrices", strict_tp_random_bessel),
        ("Toeplitz Bessel window", toeplitz_tp),
        ("heat equation residual and convergence order", heat_equation_residual),
        ("flow integration against direct determinants", flow_vs_direct),
        ("Bessel tail bound", tail_bounds),
        ("generating function partial sums", generating_function),
        ("window l2 bound", l2_window_bound),
        ("Karlin kernel nonnegativity", karlin_nonnegative),
        ("series and quadrature agreement", series_vs_quadrature),
        ("variation diminishing", variation_diminishing),
        ("Grassmannian points and injectivity", grassmannian_points),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let spent = start.elapsed();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{spent:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{spent:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
