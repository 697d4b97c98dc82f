use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::l2::m_bound;
use super::{f_direct_at, IndexWindow, Offsets};
use crate::bessel::tail_bound;
use crate::error::{Error, Result};
use crate::scalar::{rational_from_f64, CertifiedReal};

const M_GRID: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub x1: f64,
    /// Components aligned with the window members.
    pub f: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub window: IndexWindow,
    pub w: Offsets,
    pub step: f64,
    pub steps: usize,
    /// Recorded states, starting at `x_1 = 0` and ending at `X_1`.
    pub states: Vec<FlowState>,
    /// Smallest component seen at any step.
    pub min_component: f64,
    /// Smallest interior component seen at any step.
    pub min_interior: f64,
    /// Bound on the sup-norm error caused by cutting the lattice, when
    /// `k_max + 1 >= R^2`.
    pub truncation_bound: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// Columns `x1`, then one per index tuple named `k=(a,b,...)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1");
        for k in self.window.members() {
            let _ = write!(out, ",\"k={k}\"");
        }
        out.push('\n');
        for s in &self.states {
            let _ = write!(out, "{:e}", s.x1);
            for v in &s.f {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Fourth-order Runge-Kutta integration of `f' = Δf + m f` on the window,
/// from `f_direct(0, w)` to `x_1 = X_1`, recording the state at each sample
/// point in `(0, X_1)` and at `X_1`.
pub fn flow_integrate(w: &Offsets, window: &IndexWindow, x1_end: f64, step: f64, samples: &[f64]) -> Result<Trajectory> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    if !(x1_end > 0.0) || !x1_end.is_finite() {
        return Err(Error::InvalidInput(format!("X1 must be positive, got {x1_end}")));
    }
    let initial: Vec<f64> = f_direct_at(&BigRational::from_integer(0.into()), w, window, 128)?.iter().map(CertifiedReal::mid_f64).collect();
    let stencils: Vec<Vec<(usize, f64)>> =
        (0..window.len()).map(|i| window.stencil(i).into_iter().map(|(t, h)| (t, 0.5 * h as f64)).collect()).collect();
    let apply = |f: &[f64]| -> Vec<f64> { stencils.iter().map(|st| st.iter().map(|&(t, c)| c * f[t]).sum()).collect() };
    let interior: Vec<bool> = (0..window.len()).map(|i| window.is_interior(i)).collect();

    let mut stops: Vec<f64> = samples.iter().copied().filter(|&s| s > 0.0 && s < x1_end).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(x1_end);

    let mut f = initial;
    let mut x = 0.0;
    let mut steps = 0;
    let mut min_component = f.iter().copied().fold(f64::INFINITY, f64::min);
    let mut min_interior = f.iter().zip(&interior).filter(|(_, &i)| i).map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
    let mut states = vec![FlowState { x1: 0.0, f: f.clone() }];
    for &stop in &stops {
        let n = ((stop - x) / step).ceil().max(1.0) as usize;
        let h = (stop - x) / n as f64;
        for _ in 0..n {
            let k1 = apply(&f);
            let k2 = apply(&axpy(&f, 0.5 * h, &k1));
            let k3 = apply(&axpy(&f, 0.5 * h, &k2));
            let k4 = apply(&axpy(&f, h, &k3));
            for i in 0..f.len() {
                f[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                min_component = min_component.min(f[i]);
                if interior[i] {
                    min_interior = min_interior.min(f[i]);
                }
            }
            steps += 1;
        }
        x = stop;
        states.push(FlowState { x1: stop, f: f.clone() });
    }
    let truncation_bound = truncation_bound(window, &rational_from_f64(x1_end)?, w)?.map(|b| b.upper_f64());
    Ok(Trajectory { window: window.clone(), w: w.clone(), step, steps, states, min_component, min_interior, truncation_bound })
}

fn axpy(f: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    f.iter().zip(k).map(|(x, y)| x + a * y).collect()
}

/// Sup-norm bound at `X_1` on the difference between the exact solution
/// restricted to the window and the solution of the cut system:
/// `½ X_1 e^{m X_1} m! R^{k_max+1} / (k_max+1)! M^{m-1}` with
/// `R = max(X_1 + |w|, 17/16)`. `None` when `k_max + 1 < R^2`.
pub fn truncation_bound(window: &IndexWindow, x1_end: &BigRational, w: &Offsets) -> Result<Option<CertifiedReal>> {
    let floor = BigRational::new(17.into(), 16.into());
    let r = (x1_end + w.l1()).max(floor);
    let j = window.k_max() as u64 + 1;
    if BigRational::from_integer(j.into()) < &r * &r {
        return Ok(None);
    }
    let prec = 64;
    let m = window.m();
    let tail = CertifiedReal::from_rational(&tail_bound(j, &r)?, prec);
    let mb = m_bound(&r, M_GRID)?;
    let growth = CertifiedReal::from_rational(&(x1_end * BigRational::from_integer((m as i64).into())), prec).exp();
    let fact = CertifiedReal::from_i64((1..=m as i64).product());
    let x = CertifiedReal::from_rational(x1_end, prec);
    let bound = (&(&(&x * &growth) * &fact) * &(&tail * &mb.powi(m as u64 - 1))).mul_pow2(-1);
    Ok(Some(bound.upper_bound()))
}
