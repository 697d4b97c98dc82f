use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{IndexWindow, Offsets};
use crate::bessel::{bessel_i_rational, BesselOrder};
use crate::error::{Error, Result};
use crate::kernels::IndexTuple;
use crate::positivity::det_enclosure;
use crate::scalar::{CertifiedReal, PrecisionPolicy};

const RESIDUAL_PRECISION: u32 = 192;

/// `f_k(x_1, w)` for every `k` in the window, at working precision `prec`,
/// aligned with `window.members()`.
pub fn f_direct_at(x1: &BigRational, w: &Offsets, window: &IndexWindow, prec: u32) -> Result<Vec<CertifiedReal>> {
    if x1.is_negative() {
        return Err(Error::Domain(format!("x1 must be non-negative, got {x1}")));
    }
    if w.dimension() != window.m() {
        return Err(Error::InvalidInput(format!("{} offsets do not fit window dimension {}", w.dimension() - 1, window.m())));
    }
    let xs = w.arguments(x1);
    let table = xs
        .par_iter()
        .map(|x| {
            (0..=window.k_max() as i64)
                .map(|j| {
                    if x.is_zero() {
                        Ok(CertifiedReal::from_i64((j == 0) as i64).with_precision(prec))
                    } else {
                        bessel_i_rational(&BesselOrder::Integer(j), x, prec)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(window
        .members()
        .par_iter()
        .map(|k| {
            let a: Vec<Vec<CertifiedReal>> = table.iter().map(|row| k.as_slice().iter().map(|&j| row[j as usize].clone()).collect()).collect();
            det_enclosure(&a)
        })
        .collect())
}

/// `f_k(x_1, w)` over the window with every radius at most `target_rad`.
pub fn f_direct(
    x1: &BigRational,
    w: &Offsets,
    window: &IndexWindow,
    target_rad: f64,
    policy: &PrecisionPolicy,
) -> Result<Vec<CertifiedReal>> {
    let mut last = None;
    for prec in policy.schedule() {
        let v = f_direct_at(x1, w, window, prec)?;
        if v.iter().all(|c| c.rad_le(target_rad)) {
            return Ok(v);
        }
        last = Some(v);
    }
    Ok(last.expect("precision schedule is never empty"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentResidual {
    pub k: IndexTuple,
    pub interior: bool,
    /// Central difference `(f(x_1 + h) - f(x_1 - h)) / 2h`.
    pub finite_difference: f64,
    /// `(Δf + m f)(x_1)`.
    pub rhs: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub m: usize,
    pub k_max: u32,
    pub x1: f64,
    pub h: f64,
    pub components: Vec<ComponentResidual>,
    /// Largest relative residual over interior components above the floor.
    pub max_interior_relative: f64,
    /// Same over the boundary band `k_m >= k_max - 1`.
    pub max_boundary_relative: f64,
}

/// Compares a central difference of `f_direct` in `x_1` against the flow
/// right-hand side evaluated on `f_direct(x_1)`.
pub fn residual_check(x1: &BigRational, w: &Offsets, window: &IndexWindow, h: &BigRational, floor: f64) -> Result<ResidualReport> {
    if !h.is_positive() || h >= x1 {
        return Err(Error::InvalidInput("need 0 < h < x1".into()));
    }
    let prec = RESIDUAL_PRECISION;
    let plus = f_direct_at(&(x1 + h), w, window, prec)?;
    let minus = f_direct_at(&(x1 - h), w, window, prec)?;
    let here = f_direct_at(x1, w, window, prec)?;
    let two_h = CertifiedReal::from_rational(&(h * BigRational::from_integer(2.into())), prec);
    let components: Vec<ComponentResidual> = (0..window.len())
        .into_par_iter()
        .map(|i| {
            let fd = (&plus[i] - &minus[i]).div(&two_h).expect("h > 0");
            let rhs: CertifiedReal = window.stencil(i).iter().map(|&(t, wt)| here[t].mul_i64(wt as i64)).sum::<CertifiedReal>().mul_pow2(-1);
            let (fd, rhs) = (fd.mid_f64(), rhs.mid_f64());
            let relative = if rhs.abs() > floor { (fd - rhs).abs() / rhs.abs() } else { 0.0 };
            ComponentResidual { k: window.members()[i].clone(), interior: window.is_interior(i), finite_difference: fd, rhs, relative }
        })
        .collect();
    let max_of = |interior: bool| components.iter().filter(|c| c.interior == interior).map(|c| c.relative).fold(0.0, f64::max);
    Ok(ResidualReport {
        m: window.m(),
        k_max: window.k_max(),
        x1: crate::scalar::CertifiedReal::from_rational(x1, 64).mid_f64(),
        h: CertifiedReal::from_rational(h, 64).mid_f64(),
        max_interior_relative: max_of(true),
        max_boundary_relative: max_of(false),
        components,
    })
}

/// Ratio of the interior residual at `h` to the one at `h / 2`; about 4 for
/// a second-order difference.
pub fn richardson_ratio(x1: &BigRational, w: &Offsets, window: &IndexWindow, h: &BigRational, floor: f64) -> Result<f64> {
    let coarse = residual_check(x1, w, window, h, floor)?;
    let fine = residual_check(x1, w, window, &(h / BigRational::from_integer(2.into())), floor)?;
    Ok(coarse.max_interior_relative / fine.max_interior_relative)
}
