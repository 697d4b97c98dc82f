//! Modified Bessel functions of the first kind.
//!
//! The primary route sums the power series
//! `I_nu(x) = sum_k (x/2)^(nu+2k) / (k! Gamma(nu+k+1))` with a geometric
//! majorant for the remainder. An independent route evaluates the integral
//! `(1/pi) int_0^pi e^(x cos phi) cos(j phi) dphi` by the trapezoidal rule,
//! whose error for this periodic entire integrand is bounded through a strip
//! majorant of the integrand.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, escalate, CertifiedReal, Dyadic, Escalated, Mag, PrecisionPolicy};

const GUARD: u32 = 16;

/// Order of `I_nu`: an integer, or (experimentally) a non-negative rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BesselOrder {
    Integer(i64),
    Real(BigRational),
}

enum Reduced {
    Int(u64),
    Frac(BigRational),
}

impl BesselOrder {
    fn reduce(&self) -> Result<Reduced> {
        match self {
            BesselOrder::Integer(j) => Ok(Reduced::Int(j.unsigned_abs())),
            BesselOrder::Real(nu) => {
                if nu.is_negative() {
                    return Err(Error::Domain("real Bessel order must be non-negative".into()));
                }
                if nu.is_integer() {
                    let j = nu.to_integer().to_u64().ok_or_else(|| Error::InvalidInput("order too large".into()))?;
                    Ok(Reduced::Int(j))
                } else {
                    Ok(Reduced::Frac(nu.clone()))
                }
            }
        }
    }
}

impl From<i64> for BesselOrder {
    fn from(j: i64) -> Self {
        BesselOrder::Integer(j)
    }
}

fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Enclosure of `I_nu(x)` at the working precision of `x`.
///
/// Negative integer orders are reduced with `I_{-j} = I_j`, so both signs
/// produce identical balls.
pub fn bessel_i_ball(order: &BesselOrder, x: &CertifiedReal) -> Result<CertifiedReal> {
    if x.mid().is_negative() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    let prec = x.precision();
    let reduced = order.reduce()?;
    if x.mid().is_zero() && x.is_exact() {
        let at_zero = match reduced {
            Reduced::Int(0) => CertifiedReal::one(),
            _ => CertifiedReal::zero(),
        };
        return Ok(at_zero.with_precision(prec));
    }
    let wp = prec + GUARD;
    let x = x.with_precision(wp);
    let half = x.mul_pow2(-1);
    let q = half.square();
    let (first, nu_ball) = match &reduced {
        Reduced::Int(n) => {
            let fact = CertifiedReal::from_rational(&BigRational::from_integer(factorial(*n)), wp);
            (half.powi(*n).div(&fact)?, CertifiedReal::from_i64(*n as i64).with_precision(wp))
        }
        Reduced::Frac(nu) => {
            if x.lower().signum() <= 0 {
                return Err(Error::Domain("real-order series needs a strictly positive argument".into()));
            }
            let nu_ball = CertifiedReal::from_rational(nu, wp);
            let g = scalar::gamma(&(&nu_ball + &CertifiedReal::one()).with_precision(wp))?;
            (half.pow_rational(nu)?.div(&g)?, nu_ball)
        }
    };
    Ok(sum_series(first, &q, &nu_ball, wp).with_precision(prec))
}

/// `sum_k t_k` with `t_{k+1} = t_k q / ((k+1)(k+1+nu))`, all terms of one sign
/// for `x >= 0`.
fn sum_series(first: CertifiedReal, q: &CertifiedReal, nu: &CertifiedReal, wp: u32) -> CertifiedReal {
    let q_up = q.abs_upper();
    let nu_floor = nu.mid_f64().max(0.0).floor() as i64;
    let eps_exp = -(wp as i64) - 2;
    let mut term = first.clone();
    let mut sum = first;
    let mut k: i64 = 0;
    loop {
        let k1 = CertifiedReal::from_i64(k + 1).with_precision(wp);
        let denom = &k1 * &(&k1 + nu);
        term = (&term * q).div(&denom).expect("positive denominator");
        sum = &sum + &term;
        k += 1;
        // t_{i+1}/t_i <= q / ((k+1)(k+1+floor(nu))) for every i >= k
        let next_den = Dyadic::from_i64((k + 1) * (k + 1 + nu_floor));
        let ratio = q_up.div_lower(&next_den);
        let small_ratio = ratio.le(&Dyadic::pow2(-1));
        let tiny_term = term.abs_upper().le(&sum.abs_upper().as_dyadic().mul_pow2(eps_exp));
        if small_ratio && tiny_term {
            // tail <= term * r / (1 - r) <= 2 r term
            let tail = term.abs_upper().mul(&ratio).mul_pow2(1);
            return sum.add_error(&tail);
        }
    }
}

/// Enclosure of `I_nu(x)` for an exact rational argument at `prec` bits.
pub fn bessel_i_rational(order: &BesselOrder, x: &BigRational, prec: u32) -> Result<CertifiedReal> {
    if x.is_negative() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    bessel_i_ball(order, &CertifiedReal::from_rational(x, prec))
}

/// `I_nu(x)` to absolute radius `target_rad`, escalating the working
/// precision of `x` (whose own radius is kept).
pub fn bessel_i(order: &BesselOrder, x: &CertifiedReal, target_rad: f64, policy: &PrecisionPolicy) -> Result<Escalated> {
    if x.mid().is_negative() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    escalate(policy, target_rad, |p| bessel_i_ball(order, &x.with_precision(p.max(x.precision()))))
}

/// `I_nu(x)` for exact rational `x` to absolute radius `target_rad`.
pub fn bessel_i_exact(order: &BesselOrder, x: &BigRational, target_rad: f64, policy: &PrecisionPolicy) -> Result<Escalated> {
    if x.is_negative() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    escalate(policy, target_rad, |p| bessel_i_rational(order, x, p))
}

/// `I_j'(x) = (I_{j-1}(x) + I_{j+1}(x)) / 2`; for `j = 0` this is `I_1(x)`.
pub fn bessel_derivative(j: i64, x: &CertifiedReal) -> Result<CertifiedReal> {
    let below = bessel_i_ball(&BesselOrder::Integer(j - 1), x)?;
    let above = bessel_i_ball(&BesselOrder::Integer(j + 1), x)?;
    Ok((&below + &above).mul_pow2(-1))
}

/// The bound `R^j / j!` on `|I_j(z)|` for `0 <= z <= R`, valid when `R > 1`
/// and `j >= R^2`.
pub fn tail_bound(j: u64, r: &BigRational) -> Result<BigRational> {
    if r <= &BigRational::one() {
        return Err(Error::Domain(format!("tail bound needs R > 1, got {r}")));
    }
    if BigRational::from_integer(BigInt::from(j)) < r * r {
        return Err(Error::Domain(format!("tail bound needs j >= R^2 (j = {j}, R = {r})")));
    }
    let pow = num_traits::pow(r.clone(), j as usize);
    Ok(pow / BigRational::from_integer(factorial(j)))
}

/// `sum_{j=-J}^{J} I_j(y) z^j`, which tends to `exp(y (z + 1/z) / 2)`.
pub fn generating_partial_sum(y: &BigRational, z: &BigRational, terms: u32, prec: u32) -> Result<CertifiedReal> {
    if z.is_zero() {
        return Err(Error::Domain("generating function parameter z must be non-zero".into()));
    }
    if y.is_negative() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    let wp = prec + GUARD;
    let yb = CertifiedReal::from_rational(y, wp);
    let zb = CertifiedReal::from_rational(z, wp);
    let zinv = CertifiedReal::from_rational(&z.recip(), wp);
    let mut sum = bessel_i_ball(&BesselOrder::Integer(0), &yb)?;
    let mut zp = CertifiedReal::one().with_precision(wp);
    let mut zn = zp.clone();
    for j in 1..=terms as i64 {
        zp = &zp * &zb;
        zn = &zn * &zinv;
        let ij = bessel_i_ball(&BesselOrder::Integer(j), &yb)?;
        sum = &sum + &(&ij * &(&zp + &zn));
    }
    Ok(sum.with_precision(prec))
}

/// Rigorous bound on the trapezoidal error for `I_j(x)` with `n` panels on
/// `[0, pi]`, in `f64` (used to choose `n`).
fn trapezoid_error_estimate(j: u64, x: f64, n: usize) -> (f64, f64) {
    let mut best = (f64::INFINITY, 1.0);
    for step in 1..=64 {
        let a = step as f64 / 8.0;
        let log_m = x * a.cosh() + (j as f64) * a + std::f64::consts::LN_2;
        let log_err = log_m - 2.0 * a * n as f64;
        if log_err < best.0 {
            best = (log_err, a);
        }
    }
    (best.0.exp(), best.1)
}

/// Number of trapezoid panels needed for a quadrature error below `target`.
pub fn quadrature_nodes_for(j: u64, x: f64, target: f64) -> usize {
    let mut n = 16;
    while trapezoid_error_estimate(j, x, n).0 > target && n < 1 << 20 {
        n += n / 2;
    }
    n
}

/// Enclosure of `(1/pi) int_0^pi e^(x cos phi) cos(j phi) dphi` by the
/// trapezoidal rule with `n_nodes` panels.
///
/// The integrand is even and `2 pi`-periodic, so the rule equals the
/// `2 n`-point periodic rule; for an integrand bounded by `M` on the strip
/// `|Im phi| <= a` the error is at most `2 M / (e^(2 a n) - 1)` with
/// `M = e^(x cosh a) cosh(j a)`.
pub fn bessel_i_quadrature(j: u64, x: &BigRational, n_nodes: usize, prec: u32) -> Result<CertifiedReal> {
    if x.is_negative() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    if n_nodes < 16 {
        return Err(Error::InvalidInput(format!("quadrature needs at least 16 nodes, got {n_nodes}")));
    }
    let wp = prec + GUARD + 8;
    let xb = CertifiedReal::from_rational(x, wp);
    let n = n_nodes as i64;
    let pi = scalar::pi(wp);
    let node_angle = |r: i64| pi.mul_i64(r).div_i64(n).expect("n > 0");
    let integrand = |i: i64| -> CertifiedReal {
        let e = (&xb * &node_angle(i).cos()).exp();
        let r = (j as i64 % (2 * n)) * i % (2 * n);
        &e * &node_angle(r).cos()
    };
    let mut sum = (&integrand(0) + &integrand(n)).mul_pow2(-1);
    for i in 1..n {
        sum = &sum + &integrand(i);
    }
    let value = sum.div_i64(n)?;

    let (_, a) = trapezoid_error_estimate(j, x.to_f64().unwrap_or(f64::INFINITY), n_nodes);
    let a_d = Dyadic::from_f64(a).ok_or(Error::NonFinite)?;
    let a_b = CertifiedReal::point(a_d, wp);
    let cosh = |t: &CertifiedReal| (&t.exp() + &(-t).exp()).mul_pow2(-1);
    let bound_m = &(&xb * &cosh(&a_b)).exp() * &cosh(&a_b.mul_i64(j as i64));
    let denom = &a_b.mul_i64(2 * n).exp() - &CertifiedReal::one();
    let err = bound_m.mul_pow2(1).div(&denom)?;
    Ok(value.add_error(&Mag::from_dyadic(&err.upper())).with_precision(prec))
}
