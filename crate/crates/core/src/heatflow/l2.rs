use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial, f_direct_at, IndexWindow, Offsets};
use crate::bessel::{bessel_i_rational, tail_bound, BesselOrder};
use crate::error::{Error, Result};
use crate::scalar::CertifiedReal;

const PREC: u32 = 128;
const Z_GRID: usize = 1000;

/// Largest certified upper endpoint of `I_j(z)` over `z = R i / (points - 1)`.
pub fn bessel_sup_on_grid(j: u64, r: &BigRational, points: usize) -> Result<CertifiedReal> {
    if points < 2 {
        return Err(Error::InvalidInput("grid needs at least two points".into()));
    }
    let denom = BigRational::from_integer(BigInt::from(points - 1));
    (0..points)
        .into_par_iter()
        .map(|i| {
            let z = r * BigRational::from_integer(BigInt::from(i)) / &denom;
            let v = if z.is_zero() {
                CertifiedReal::from_i64((j == 0) as i64)
            } else {
                bessel_i_rational(&BesselOrder::Integer(j as i64), &z, 64)?
            };
            Ok(v.upper_bound())
        })
        .collect::<Result<Vec<_>>>()
        .map(max_point)
}

fn max_point(v: Vec<CertifiedReal>) -> CertifiedReal {
    v.into_iter().reduce(|a, b| if a.certainly_lt(&b) { b } else { a }).expect("non-empty")
}

/// Smallest `j` with `j >= R^2`.
fn tail_start(r: &BigRational) -> u64 {
    let r2 = r * r;
    let c = r2.ceil().to_integer();
    u64::try_from(c).expect("R^2 fits in u64")
}

/// Upper bound on `M = max_{j, 0 <= z <= R} |I_j(z)|`: grid maxima for
/// `j < R^2` and `R^{j_0} / j_0!` beyond.
pub(crate) fn m_bound(r: &BigRational, points: usize) -> Result<CertifiedReal> {
    let j0 = tail_start(r);
    let mut best = CertifiedReal::from_rational(&tail_bound(j0, r)?, 64).upper_bound();
    for j in 0..j0 {
        let s = bessel_sup_on_grid(j, r, points)?;
        if best.certainly_lt(&s) {
            best = s;
        }
    }
    Ok(best)
}

/// `C(R) = (m! M^{m-1})² Σ_{k ∈ K_m} R^{2 k_m} / (k_m!)²`, and the variant
/// that bounds the last column by `M` when `k_m < R²` and by
/// `min(M, R^{k_m}/k_m!)` otherwise.
///
/// Returned as upper endpoints `(c_r, c_r_rigorous)`.
pub fn l2_c_r(r: &BigRational, m: usize) -> Result<(CertifiedReal, CertifiedReal)> {
    check_r(r)?;
    let mb = m_bound(r, Z_GRID)?;
    let prefactor = prefactor(m, &mb);
    let j0 = tail_start(r);
    let mm = mb.square();
    let (series, rigorous) = series_sums(r, m, 0, |n, t| if n < j0 || mm.certainly_lt(&t) { mm.clone() } else { t })?;
    Ok(((&prefactor * &series).upper_bound(), (&prefactor * &rigorous).upper_bound()))
}

/// Bound on `Σ_{k ∈ K_m, k_m > k_max} |f_k(x_1, w)|²` for `|x_1| + |w| <= R`,
/// valid when `k_max + 1 >= R²`.
pub fn l2_tail(r: &BigRational, m: usize, k_max: u32) -> Result<CertifiedReal> {
    check_r(r)?;
    if (k_max as u64 + 1) < tail_start(r) {
        return Err(Error::Domain(format!("tail bound needs k_max + 1 >= R^2 (k_max = {k_max}, R = {r})")));
    }
    let mb = m_bound(r, Z_GRID)?;
    let (series, _) = series_sums(r, m, k_max as u64 + 1, |_, t| t)?;
    Ok((&prefactor(m, &mb) * &series).upper_bound())
}

fn check_r(r: &BigRational) -> Result<()> {
    if r <= &BigRational::one() {
        return Err(Error::Domain(format!("l2 bound needs R > 1, got {r}")));
    }
    Ok(())
}

fn prefactor(m: usize, mb: &CertifiedReal) -> CertifiedReal {
    let fact = CertifiedReal::from_i64((1..=m as i64).product());
    (&fact * &mb.powi(m as u64 - 1)).square()
}

/// `Σ_{n >= start} C(n, m-1) t_n` with `t_n = R^{2n}/(n!)²`, alongside the
/// same sum with `t_n` passed through `adjust`. The geometric tail starts
/// once the term ratio `R²/((n+1)(n+2-m))` is at most ½ and is added to both.
fn series_sums<F>(r: &BigRational, m: usize, start: u64, adjust: F) -> Result<(CertifiedReal, CertifiedReal)>
where
    F: Fn(u64, CertifiedReal) -> CertifiedReal,
{
    let r2 = r * r;
    let j0 = tail_start(r);
    let mut plain = BigRational::zero();
    let mut adjusted = CertifiedReal::zero().with_precision(PREC);
    let lo = start.max(m as u64 - 1);
    let mut t = num_traits::pow(r2.clone(), lo as usize) / BigRational::from_integer(factorial(lo).pow(2));
    let mut n = lo;
    loop {
        let weight = BigRational::from_integer(BigInt::from(binomial(n, m as u64 - 1)));
        let term = &weight * &t;
        plain += &term;
        adjusted = &adjusted + &adjust(n, CertifiedReal::from_rational(&t, PREC)).mul_i64(binomial(n, m as u64 - 1) as i64);
        // ratio of consecutive weighted terms; decreasing in n
        let ratio = &r2 / BigRational::from_integer(BigInt::from((n + 1) * (n + 2 - m as u64)));
        let half = BigRational::new(1.into(), 2.into());
        if ratio <= half && n + 1 >= j0 && term < BigRational::new(1.into(), BigInt::one() << 200) {
            let tail = &term * &ratio / (BigRational::one() - &ratio);
            plain += &tail;
            let tail_ball = CertifiedReal::from_rational(&tail, PREC).upper_bound();
            adjusted = &adjusted + &tail_ball;
            return Ok((CertifiedReal::from_rational(&plain, PREC), adjusted));
        }
        t = &t * &r2 / BigRational::from_integer(BigInt::from((n + 1) * (n + 1)));
        n += 1;
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, b| a * b)
}

/// A sample point `(x_1, w)` with `|x_1| + |w| <= R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(with = "crate::kernels::rational_one")]
    pub x1: BigRational,
    pub w: Offsets,
}

impl GridPoint {
    /// Points with totals `t = R i / 5` (`i = 1..=5`) and `x_1 = t j / 5`
    /// (`j = 0..5`); the remainder `t - x_1` is spread over `w` in
    /// proportions `1 : 2 : ... : m-1`.
    pub fn default_grid(r: &BigRational, m: usize) -> Result<Vec<GridPoint>> {
        let five = BigRational::from_integer(5.into());
        let weights: i64 = (1..m as i64).sum();
        let mut out = Vec::with_capacity(25);
        for i in 1..=5 {
            let t = r * BigRational::from_integer(i.into()) / &five;
            for j in 0..5 {
                let x1 = &t * BigRational::from_integer(j.into()) / &five;
                let rest = &t - &x1;
                let w = (1..m as i64).map(|s| &rest * BigRational::new(s.into(), weights.into())).collect();
                out.push(GridPoint { x1, w: Offsets::new(w)? });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2Report {
    #[serde(with = "crate::kernels::rational_one")]
    pub r: BigRational,
    pub m: usize,
    pub k_max: u32,
    /// Upper bound on `max |I_j(z)|` over `j` and `0 <= z <= R`.
    pub m_bound: CertifiedReal,
    pub c_r: CertifiedReal,
    pub c_r_rigorous: CertifiedReal,
    /// Largest certified upper bound of `Σ_{k ∈ window} |f_k|²` over the grid.
    pub partial_sum_max: CertifiedReal,
    pub argmax: GridPoint,
    pub points: usize,
    /// Bound on the part of the sum beyond the window, when available.
    pub tail: Option<CertifiedReal>,
    /// `partial_sum_max < C(R)`, certified.
    pub holds: bool,
    pub holds_rigorous: bool,
}

/// Checks `Σ_k |f_k(x_1, w)|² < C(R)` on the default 25-point grid.
pub fn l2_bound(r: &BigRational, m: usize, window: &IndexWindow) -> Result<L2Report> {
    check_r(r)?;
    l2_bound_on(r, m, window, &GridPoint::default_grid(r, m)?)
}

/// Same as [`l2_bound`] on a caller-supplied grid.
pub fn l2_bound_on(r: &BigRational, m: usize, window: &IndexWindow, grid: &[GridPoint]) -> Result<L2Report> {
    check_r(r)?;
    if window.m() != m {
        return Err(Error::InvalidInput(format!("window dimension {} differs from m = {m}", window.m())));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid must be non-empty".into()));
    }
    let (c_r, c_r_rigorous) = l2_c_r(r, m)?;
    let m_bound = m_bound(r, Z_GRID)?;
    let sums = grid
        .iter()
        .map(|g| {
            if &g.x1 + g.w.l1() > *r {
                return Err(Error::InvalidInput("grid point outside |x1| + |w| <= R".into()));
            }
            let f = f_direct_at(&g.x1, &g.w, window, PREC)?;
            Ok(f.iter().map(CertifiedReal::square).sum::<CertifiedReal>().upper_bound())
        })
        .collect::<Result<Vec<_>>>()?;
    let (best, partial_sum_max) = sums
        .into_iter()
        .enumerate()
        .reduce(|a, b| if a.1.certainly_lt(&b.1) { b } else { a })
        .expect("non-empty grid");
    let tail = if (window.k_max() as u64 + 1) >= tail_start(r) { Some(l2_tail(r, m, window.k_max())?) } else { None };
    Ok(L2Report {
        r: r.clone(),
        m,
        k_max: window.k_max(),
        m_bound,
        holds: partial_sum_max.certainly_lt(&c_r),
        holds_rigorous: partial_sum_max.certainly_lt(&c_r_rigorous),
        c_r,
        c_r_rigorous,
        argmax: grid[best].clone(),
        points: grid.len(),
        partial_sum_max,
        tail,
    })
}
