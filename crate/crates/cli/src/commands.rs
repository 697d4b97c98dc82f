use std::fmt::Write as _;

use num_rational::BigRational;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tpcert_core::bessel::{bessel_i_exact, bessel_i_quadrature, quadrature_nodes_for, BesselOrder};
use tpcert_core::heatflow::{self, index_window, Offsets};
use tpcert_core::kernels::{self, ArgumentTuple, IndexTuple, KernelMatrix};
use tpcert_core::positivity::{self, GrassmannCheck, GrassmannVerdict, TPCertificate, TpVerdict};
use tpcert_core::scalar::{escalate, rational_from_i64, CertifiedReal, PrecisionPolicy};

use crate::{
    BesselArgs, CheckTpArgs, Cli, Command, Format, HeatflowCmd, KernelSpec, Method, PointArgs, RunConfig, SampleCmd, EXIT_INDETERMINATE,
    EXIT_NEGATIVE, EXIT_OK,
};

type Outcome = Result<(i32, String), String>;

fn core<T>(r: tpcert_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub(crate) fn execute(cli: &Cli) -> Outcome {
    let cfg = &cli.config;
    let policy = cfg.policy()?;
    match &cli.command {
        Command::Bessel(a) => bessel(cfg, &policy, a),
        Command::CheckTp(a) => check_tp(cfg, &policy, a),
        Command::Matrix { kernel } => matrix(cfg, &policy, kernel),
        Command::Pluecker(a) => point(cfg, &policy, a, false),
        Command::Grassmann(a) => point(cfg, &policy, a, true),
        Command::Sample(s) => sample_cmd(cfg, &policy, s),
        Command::Heatflow(h) => heat(cfg, &policy, h),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn ball(c: &CertifiedReal) -> Value {
    serde_json::to_value(c).expect("balls always serialize")
}

fn parse_order(j: &str) -> Result<BesselOrder, String> {
    match j.trim().parse::<i64>() {
        Ok(n) => Ok(BesselOrder::Integer(n)),
        Err(_) => Ok(BesselOrder::Real(crate::rational(j)?)),
    }
}

fn bessel(cfg: &RunConfig, policy: &PrecisionPolicy, a: &BesselArgs) -> Outcome {
    let order = parse_order(&a.j)?;
    let result = match a.method {
        Method::Series => core(bessel_i_exact(&order, &a.x, cfg.target_rad, policy))?,
        Method::Quadrature => {
            let BesselOrder::Integer(j) = order else {
                return Err("quadrature supports integer orders only".into());
            };
            let xf = CertifiedReal::from_rational(&a.x, 64).mid_f64();
            if xf < 0.0 {
                return Err(format!("x must be non-negative, got {}", a.x));
            }
            let n = quadrature_nodes_for(j.unsigned_abs(), xf, cfg.target_rad);
            core(escalate(policy, cfg.target_rad, |p| bessel_i_quadrature(j.unsigned_abs(), &a.x, n, p)))?
        }
    };
    let code = if result.met { EXIT_OK } else { EXIT_INDETERMINATE };
    let (mid, rad) = result.value.to_decimal_parts();
    let out = match cfg.format {
        Format::Json => pretty(&json!({
            "order": a.j,
            "x": a.x.to_string(),
            "method": format!("{:?}", a.method).to_lowercase(),
            "value": ball(&result.value),
            "precision": result.precision,
            "target_met": result.met,
        })),
        Format::Csv => format!("order,x,mid,rad\n{},{},{mid},{rad}\n", a.j, a.x),
        Format::Human => format!("I_{}({}) = {}\n", a.j, a.x, result.value),
    };
    Ok((code, out))
}

fn build(cfg: &RunConfig, policy: &PrecisionPolicy, spec: &KernelSpec) -> Result<KernelMatrix, String> {
    let t = cfg.target_rad;
    core(match spec {
        KernelSpec::Bessel { k, x } => {
            let k = core(IndexTuple::new(k.clone()))?;
            let x = core(ArgumentTuple::new(x.clone()))?;
            kernels::build_bessel_matrix(&k, &x, t, policy)
        }
        KernelSpec::Toeplitz { x, rows, cols } => kernels::build_toeplitz_bessel(x, rows.0..=rows.1, cols.0..=cols.1, t, policy),
        KernelSpec::Karlin { alpha, lambda, xs, ys } => kernels::build_karlin_matrix(alpha, lambda, xs, ys, t, policy),
        KernelSpec::Vandermonde { xs, ys } => kernels::build_vandermonde(xs, ys, t, policy),
        KernelSpec::Explicit { entries } => kernels::parse_matrix(entries),
    })
}

pub(crate) fn tp_exit(cert: &TPCertificate, strict: bool) -> i32 {
    match cert.verdict {
        _ if cert.passes(strict) => EXIT_OK,
        TpVerdict::Indeterminate => EXIT_INDETERMINATE,
        _ => EXIT_NEGATIVE,
    }
}

fn check_tp(cfg: &RunConfig, policy: &PrecisionPolicy, a: &CheckTpArgs) -> Outcome {
    let m = build(cfg, policy, &a.kernel)?;
    let order = a.order.unwrap_or(m.rows().min(m.cols()));
    let cert = core(positivity::check_tp(&m, order, a.strict, policy))?;
    let out = match cfg.format {
        Format::Json => format!("{}\n", cert.to_json()),
        Format::Csv => {
            let (mm, mr) = cert.min_margin.as_ref().map(|c| c.to_decimal_parts()).unwrap_or_default();
            format!("order,verdict,minors_checked,min_margin_mid,min_margin_rad\n{},{:?},{},{mm},{mr}\n", cert.order_checked, cert.verdict, cert.minors_checked)
        }
        Format::Human => {
            let mut s = format!("verdict: {:?}\norder: {}\nminors checked: {}\n", cert.verdict, cert.order_checked, cert.minors_checked);
            match &cert.min_margin {
                Some(c) => writeln!(s, "min margin: {c}"),
                None => writeln!(s, "min margin: none"),
            }
            .expect("writing to a String cannot fail");
            match &cert.witness {
                Some(w) => writeln!(s, "witness: rows {:?} cols {:?} det {}", w.rows, w.cols, w.det),
                None => writeln!(s, "witness: none"),
            }
            .expect("writing to a String cannot fail");
            s
        }
    };
    Ok((tp_exit(&cert, a.strict), out))
}

fn matrix(cfg: &RunConfig, policy: &PrecisionPolicy, spec: &KernelSpec) -> Outcome {
    let m = build(cfg, policy, spec)?;
    let out = match cfg.format {
        Format::Json => format!("{}\n", m.to_json()),
        Format::Csv => m.to_csv(),
        Format::Human => m.entries().iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\t") + "\n").collect(),
    };
    Ok((EXIT_OK, out))
}

fn grassmann_exit(g: &GrassmannCheck) -> i32 {
    match g.verdict {
        GrassmannVerdict::StrictlyTotallyPositive => EXIT_OK,
        GrassmannVerdict::Not => EXIT_NEGATIVE,
        GrassmannVerdict::Indeterminate => EXIT_INDETERMINATE,
    }
}

fn point(cfg: &RunConfig, policy: &PrecisionPolicy, a: &PointArgs, verdict_only: bool) -> Outcome {
    let m = match (&a.k, &a.x, &a.entries) {
        (Some(k), Some(x), None) => {
            let k = core(IndexTuple::new(k.clone()))?;
            let x = core(ArgumentTuple::new(x.clone()))?;
            if x.len() >= k.len() {
                return Err(format!("H_k needs l < m, got l={} m={}", x.len(), k.len()));
            }
            core(kernels::build_bessel_matrix(&k, &x, cfg.target_rad, policy))?
        }
        (None, None, Some(e)) => core(kernels::parse_matrix(e))?,
        _ => return Err("give either --k with --x, or --entries".into()),
    };
    let g = core(positivity::check_grassmann_point(&m, policy))?;
    let code = grassmann_exit(&g);
    let p = &g.pluecker;
    let out = match cfg.format {
        Format::Json if verdict_only => pretty(&serde_json::to_value(&g).expect("serializable")),
        Format::Json => pretty(&json!({
            "column_sets": p.column_sets,
            "coordinates": p.coordinates.iter().map(ball).collect::<Vec<_>>(),
            "verdict": g.verdict,
        })),
        Format::Csv => {
            let mut s = String::from("columns,mid,rad\n");
            for (cols, c) in p.column_sets.iter().zip(&p.coordinates) {
                let (mid, rad) = c.to_decimal_parts();
                let names: Vec<String> = cols.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "\"{}\",{mid},{rad}", names.join(","));
            }
            s
        }
        Format::Human => {
            let mut s = format!("verdict: {:?}\n", g.verdict);
            if let Some(n) = g.normalization {
                let _ = writeln!(s, "normalization: {n:+}");
            }
            for (cols, c) in p.column_sets.iter().zip(&p.coordinates) {
                let _ = writeln!(s, "{cols:?}: {c}");
            }
            s
        }
    };
    Ok((code, out))
}

/// Random strictly increasing `k` in `0..=kmax` and `x` on the grid
/// `{i / 20 : 1 <= i <= 20 xmax}`.
pub fn random_bessel_input(rng: &mut ChaCha8Rng, m: usize, kmax: u32, xmax: u32) -> (Vec<u32>, Vec<BigRational>) {
    let mut k: Vec<u32> = sample(rng, kmax as usize + 1, m).into_iter().map(|v| v as u32).collect();
    k.sort_unstable();
    let mut xi: Vec<usize> = sample(rng, 20 * xmax as usize, m).into_iter().map(|v| v + 1).collect();
    xi.sort_unstable();
    let x = xi.into_iter().map(|i| rational_from_i64(i as i64) / rational_from_i64(20)).collect();
    (k, x)
}

fn sample_cmd(cfg: &RunConfig, policy: &PrecisionPolicy, s: &SampleCmd) -> Outcome {
    let SampleCmd::BesselTp { m, count, kmax, xmax } = s;
    let (m, count, kmax, xmax) = (*m, *count, *kmax, *xmax);
    if m == 0 || m as u32 > kmax + 1 || (m as u32) > 20 * xmax {
        return Err(format!("cannot draw {m} distinct indices and arguments"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut results = Vec::with_capacity(count);
    let mut tally = [0usize; 4];
    for _ in 0..count {
        let (k, x) = random_bessel_input(&mut rng, m, kmax, xmax);
        let mat = core(kernels::build_bessel_matrix(
            &core(IndexTuple::new(k.clone()))?,
            &core(ArgumentTuple::new(x.clone()))?,
            cfg.target_rad,
            policy,
        ))?;
        let cert = core(positivity::check_tp(&mat, m, true, policy))?;
        tally[cert.verdict as usize] += 1;
        results.push((k, x, cert));
    }
    let worst = if tally[TpVerdict::Violated as usize] > 0 || tally[TpVerdict::Nonnegative as usize] > 0 {
        EXIT_NEGATIVE
    } else if tally[TpVerdict::Indeterminate as usize] > 0 {
        EXIT_INDETERMINATE
    } else {
        EXIT_OK
    };
    let out = match cfg.format {
        Format::Json => pretty(&json!({
            "seed": cfg.seed,
            "m": m,
            "count": count,
            "strictly_positive": tally[TpVerdict::StrictlyPositive as usize],
            "indeterminate": tally[TpVerdict::Indeterminate as usize],
            "violated": tally[TpVerdict::Violated as usize] + tally[TpVerdict::Nonnegative as usize],
            "samples": results.iter().map(|(k, x, c)| json!({
                "k": k,
                "x": x.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "verdict": c.verdict,
                "minors_checked": c.minors_checked,
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("k,x,verdict,minors_checked\n");
            for (k, x, c) in &results {
                let ks: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                let xs: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "\"{}\",\"{}\",{:?},{}", ks.join(","), xs.join(","), c.verdict, c.minors_checked);
            }
            s
        }
        Format::Human => format!(
            "seed {}: {} of {} strictly positive, {} indeterminate\n",
            cfg.seed,
            tally[TpVerdict::StrictlyPositive as usize],
            count,
            tally[TpVerdict::Indeterminate as usize]
        ),
    };
    Ok((worst, out))
}

fn offsets(m: usize, w: &[BigRational]) -> Result<Offsets, String> {
    if w.len() + 1 != m {
        return Err(format!("--w needs m - 1 = {} offsets, got {}", m.saturating_sub(1), w.len()));
    }
    core(Offsets::new(w.to_vec()))
}

fn heat(cfg: &RunConfig, policy: &PrecisionPolicy, cmd: &HeatflowCmd) -> Outcome {
    match cmd {
        HeatflowCmd::Residual { m, w, kmax, x1, h, floor, tol, components } => {
            let w = offsets(*m, w)?;
            let window = core(index_window(*m, *kmax))?;
            let report = core(heatflow::residual_check(x1, &w, &window, h, *floor))?;
            let ratio = core(heatflow::richardson_ratio(x1, &w, &window, h, *floor))?;
            let pass = report.max_interior_relative <= *tol;
            let code = if pass { EXIT_OK } else { EXIT_NEGATIVE };
            let out = match cfg.format {
                Format::Json => {
                    let mut v = serde_json::to_value(&report).expect("serializable");
                    if !components {
                        v.as_object_mut().expect("report is an object").remove("components");
                    }
                    v["richardson_ratio"] = json!(ratio);
                    v["tol"] = json!(tol);
                    v["pass"] = json!(pass);
                    pretty(&v)
                }
                Format::Csv => {
                    let mut s = String::from("k,interior,finite_difference,rhs,relative\n");
                    for c in &report.components {
                        let _ = writeln!(s, "\"{}\",{},{:e},{:e},{:e}", c.k, c.interior, c.finite_difference, c.rhs, c.relative);
                    }
                    s
                }
                Format::Human => format!(
                    "max interior relative residual: {:e}\nmax boundary relative residual: {:e}\nrichardson ratio: {ratio:.4}\n",
                    report.max_interior_relative, report.max_boundary_relative
                ),
            };
            Ok((code, out))
        }
        HeatflowCmd::Integrate { m, w, kmax, x1_end, step, samples, tol, cone_tol } => {
            let w = offsets(*m, w)?;
            let window = core(index_window(*m, *kmax))?;
            let traj = core(heatflow::flow_integrate(&w, &window, *x1_end, *step, samples))?;
            let end = core(tpcert_core::scalar::rational_from_f64(*x1_end))?;
            let direct = core(heatflow::f_direct(&end, &w, &window, 1e-20, policy))?;
            let mut err_interior = 0.0f64;
            let mut err_all = 0.0f64;
            for (i, d) in direct.iter().enumerate() {
                let e = (traj.last().f[i] - d.mid_f64()).abs();
                err_all = err_all.max(e);
                if window.is_interior(i) {
                    err_interior = err_interior.max(e);
                }
            }
            let pass = err_interior <= *tol && traj.min_component >= -cone_tol;
            let code = if pass { EXIT_OK } else { EXIT_NEGATIVE };
            let out = match cfg.format {
                Format::Json => pretty(&json!({
                    "m": m,
                    "k_max": kmax,
                    "X1": x1_end,
                    "step": step,
                    "steps": traj.steps,
                    "endpoint_vs_direct_max_error": err_interior,
                    "endpoint_vs_direct_max_error_all": err_all,
                    "cone_min": traj.min_component,
                    "cone_min_interior": traj.min_interior,
                    "truncation_bound": traj.truncation_bound,
                    "tol": tol,
                    "pass": pass,
                })),
                Format::Csv => traj.to_csv(),
                Format::Human => format!(
                    "endpoint vs direct (interior): {err_interior:e}\ncone min: {:e}\ntruncation bound: {}\n",
                    traj.min_component,
                    traj.truncation_bound.map_or("n/a".to_string(), |b| format!("{b:e}"))
                ),
            };
            Ok((code, out))
        }
        HeatflowCmd::Bound { m, r, kmax } => {
            let window = core(index_window(*m, *kmax))?;
            let rep = core(heatflow::l2_bound(r, *m, &window))?;
            let code = if rep.holds { EXIT_OK } else { EXIT_NEGATIVE };
            let out = match cfg.format {
                Format::Json => pretty(&serde_json::to_value(&rep).expect("serializable")),
                Format::Csv => {
                    let (pm, _) = rep.partial_sum_max.to_decimal_parts();
                    let (c, _) = rep.c_r.to_decimal_parts();
                    let (cr, _) = rep.c_r_rigorous.to_decimal_parts();
                    format!("m,R,k_max,partial_sum_max,c_r,c_r_rigorous,holds\n{m},{r},{kmax},{pm},{c},{cr},{}\n", rep.holds)
                }
                Format::Human => format!(
                    "partial sum max: {}\nC(R): {}\nC(R), rigorous variant: {}\nholds: {}\n",
                    rep.partial_sum_max, rep.c_r, rep.c_r_rigorous, rep.holds
                ),
            };
            Ok((code, out))
        }
    }
}
