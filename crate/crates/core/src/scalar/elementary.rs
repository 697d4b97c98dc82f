//! Certified elementary functions: `exp`, `ln`, `sqrt`, `cos`, the constants
//! pi and ln 2, and the gamma function for positive reals.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::dyadic::{Dyadic, Mag};
use super::CertifiedReal;
use crate::error::Error;

const GUARD: u32 = 24;

fn cached(table: &'static OnceLock<Mutex<HashMap<u32, CertifiedReal>>>, prec: u32, f: fn(u32) -> CertifiedReal) -> CertifiedReal {
    // round up to a multiple of 64 bits so neighbouring precisions share an entry
    let key = prec.div_ceil(64) * 64;
    let map = table.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().expect("constant cache poisoned").get(&key) {
        return v.with_precision(prec);
    }
    let v = f(key);
    map.lock().expect("constant cache poisoned").insert(key, v.clone());
    v.with_precision(prec)
}

/// `sum_{k>=0} (+-1)^k z^(2k+1)/(2k+1)` for `|z| <= 1/2`, i.e. atanh or atan.
fn odd_series(z: &CertifiedReal, alternating: bool, wp: u32) -> CertifiedReal {
    let z = z.with_precision(wp);
    let z2 = z.square();
    let mut power = z.clone();
    let mut sum = z.clone();
    let eps = Dyadic::pow2(-(wp as i64) - 4);
    let mut k: i64 = 0;
    loop {
        k += 1;
        power = &power * &z2;
        let term = power.div_i64(2 * k + 1).expect("odd denominators are non-zero");
        sum = if alternating && k % 2 == 1 { &sum - &term } else { &sum + &term };
        if power.abs_upper().le(&eps) {
            break;
        }
    }
    // tail <= |power| z2 / (1 - z2) <= 2 |power| z2 for z2 <= 1/2
    let tail = power.abs_upper().mul(&z2.abs_upper()).mul_pow2(1);
    sum.add_error(&tail)
}

fn compute_pi(prec: u32) -> CertifiedReal {
    let wp = prec + GUARD;
    let fifth = CertifiedReal::one().with_precision(wp).div_i64(5).expect("non-zero");
    let inv239 = CertifiedReal::one().with_precision(wp).div_i64(239).expect("non-zero");
    let a = odd_series(&fifth, true, wp).mul_i64(16);
    let b = odd_series(&inv239, true, wp).mul_i64(4);
    (a - b).with_precision(prec)
}

fn compute_ln2(prec: u32) -> CertifiedReal {
    let wp = prec + GUARD;
    let third = CertifiedReal::one().with_precision(wp).div_i64(3).expect("non-zero");
    odd_series(&third, false, wp).mul_pow2(1).with_precision(prec)
}

/// Enclosure of pi at `prec` bits.
pub fn pi(prec: u32) -> CertifiedReal {
    static TABLE: OnceLock<Mutex<HashMap<u32, CertifiedReal>>> = OnceLock::new();
    cached(&TABLE, prec, compute_pi)
}

/// Enclosure of ln 2 at `prec` bits.
pub fn ln2(prec: u32) -> CertifiedReal {
    static TABLE: OnceLock<Mutex<HashMap<u32, CertifiedReal>>> = OnceLock::new();
    cached(&TABLE, prec, compute_ln2)
}

/// `exp` at an exact dyadic point.
fn exp_point(x: &Dyadic, prec: u32) -> CertifiedReal {
    if x.is_zero() {
        return CertifiedReal::point(Dyadic::one(), prec);
    }
    // |t| < 2^-12 after scaling by 2^-s
    let s = (x.magnitude_exp() + 12).max(0) as u32;
    let wp = prec + s + GUARD;
    let t = CertifiedReal::point(x.mul_pow2(-(s as i64)), wp);
    let mut sum = CertifiedReal::point(Dyadic::one(), wp);
    let mut term = sum.clone();
    let eps = Dyadic::pow2(-(wp as i64) - 4);
    let mut n: i64 = 0;
    loop {
        n += 1;
        term = (&term * &t).div_i64(n).expect("non-zero");
        sum = &sum + &term;
        if term.abs_upper().le(&eps) {
            break;
        }
    }
    // remaining terms shrink by at least 2^-12 each
    let tail = term.abs_upper().mul_pow2(-11);
    let mut result = sum.add_error(&tail);
    for _ in 0..s {
        result = result.square();
    }
    result.with_precision(prec)
}

/// Upper bound of `e^r - 1` for `r >= 0`.
fn expm1_upper(r: &Mag) -> Mag {
    if r.le(&Dyadic::one()) {
        // e^r - 1 <= r + r^2 on [0, 1]
        r.add(&r.mul(r))
    } else {
        let e = exp_point(r.as_dyadic(), 64);
        Mag::from_dyadic(&e.upper())
    }
}

/// `ln` at an exact positive dyadic point.
fn ln_point(x: &Dyadic, prec: u32) -> CertifiedReal {
    let mut e = x.magnitude_exp() - 1;
    let mut y = x.mul_pow2(-e);
    if y.cmp_value(&Dyadic::new(BigInt::from(3), -1)) != std::cmp::Ordering::Less {
        y = y.mul_pow2(-1);
        e += 1;
    }
    let ebits = e.unsigned_abs().max(1).ilog2() + 1;
    let wp = prec + GUARD + ebits;
    let y = CertifiedReal::point(y, wp);
    let one = CertifiedReal::point(Dyadic::one(), wp);
    let z = (&y - &one).div(&(&y + &one)).expect("y + 1 > 0");
    let mut result = odd_series(&z, false, wp).mul_pow2(1);
    if e != 0 {
        result = &result + &ln2(wp).mul_i64(e);
    }
    result.with_precision(prec)
}

/// `cos` at an exact dyadic point.
fn cos_point(x: &Dyadic, prec: u32) -> CertifiedReal {
    if x.is_zero() {
        return CertifiedReal::point(Dyadic::one(), prec);
    }
    let approx = x.to_f64();
    let turns = (approx / std::f64::consts::TAU).round();
    let extra = if turns == 0.0 { 0 } else { (turns.abs().log2().ceil() as u32) + 4 };
    let wp = prec + GUARD + extra;
    let reduced = if turns == 0.0 {
        CertifiedReal::point(x.clone(), wp)
    } else {
        let n = turns as i64;
        &CertifiedReal::point(x.clone(), wp) - &pi(wp).mul_i64(2 * n)
    };
    // evaluate at the reduced midpoint and absorb the reduction radius (cos is 1-Lipschitz)
    let t = CertifiedReal::point(reduced.mid().clone(), wp);
    let t2 = t.square();
    let eps = Dyadic::pow2(-(wp as i64) - 4);
    let mut sum = CertifiedReal::point(Dyadic::one(), wp);
    let mut term = sum.clone();
    let t2_up = t2.abs_upper();
    let mut k: i64 = 0;
    loop {
        k += 1;
        term = -(&term * &t2).div_i64((2 * k - 1) * (2 * k)).expect("non-zero");
        sum = &sum + &term;
        let next_ratio_small = t2_up.le(&Dyadic::from_i64((2 * k + 1) * (2 * k + 2)));
        if next_ratio_small && term.abs_upper().le(&eps) {
            break;
        }
    }
    // alternating with decreasing magnitudes from here: tail <= |term|
    sum.add_error(&term.abs_upper()).add_error(reduced.rad()).with_precision(prec)
}

impl CertifiedReal {
    pub fn exp(&self) -> CertifiedReal {
        let e = exp_point(&self.mid, self.prec);
        if self.rad.is_zero() {
            return e;
        }
        // exp(m + t) = exp(m) exp(t), |exp(t) - 1| <= expm1(r)
        let err = Mag::from_dyadic(&e.upper()).mul(&expm1_upper(&self.rad));
        e.add_error(&err)
    }

    /// Natural logarithm; requires a ball of positive reals.
    pub fn ln(&self) -> Result<CertifiedReal, Error> {
        let lo = self.lower();
        if lo.signum() <= 0 {
            return Err(Error::Domain("logarithm of a ball that is not strictly positive".into()));
        }
        let l = ln_point(&self.mid, self.prec);
        if self.rad.is_zero() {
            return Ok(l);
        }
        // |ln a - ln m| <= r / (m - r)
        Ok(l.add_error(&self.rad.div_lower(&lo)))
    }

    /// Square root of a ball whose lower endpoint is not below zero.
    pub fn sqrt(&self) -> Result<CertifiedReal, Error> {
        let lo = self.lower();
        if lo.signum() < 0 {
            return Err(Error::Domain("square root of a ball reaching below zero".into()));
        }
        if self.mid.is_zero() {
            return Ok(self.clone());
        }
        let (root, ulp, exact) = self.mid.sqrt(self.prec);
        let mut rad = if exact { Mag::zero() } else { Mag::pow2(ulp) };
        if !self.rad.is_zero() {
            // |sqrt(a) - sqrt(m)| <= r / sqrt(m)
            if root.is_zero() {
                return Err(Error::Domain("square root midpoint underflow".into()));
            }
            rad = rad.add(&self.rad.div_lower(&root));
        }
        Ok(CertifiedReal::from_parts(root, rad, self.prec))
    }

    pub fn cos(&self) -> CertifiedReal {
        cos_point(&self.mid, self.prec).add_error(&self.rad)
    }

    /// `self^e` for a rational exponent. Integer exponents use repeated
    /// multiplication (negative ones a final division); half-integers a
    /// square root; the rest `exp(e ln self)`.
    pub fn pow_rational(&self, e: &BigRational) -> Result<CertifiedReal, Error> {
        if e.is_integer() {
            let n = e.to_integer();
            let mag = n.abs().to_u64().ok_or_else(|| Error::InvalidInput("exponent too large".into()))?;
            let p = self.powi(mag);
            return if n.is_negative() { CertifiedReal::point(Dyadic::one(), self.prec).div(&p) } else { Ok(p) };
        }
        let twice = e * BigRational::from_integer(BigInt::from(2));
        if twice.is_integer() && !twice.is_negative() {
            let n = twice.to_integer().to_u64().ok_or_else(|| Error::InvalidInput("exponent too large".into()))?;
            return Ok(self.sqrt()?.powi(n));
        }
        let ln = self.ln()?;
        let scaled = &ln * &CertifiedReal::from_rational(e, self.prec + GUARD);
        Ok(scaled.exp())
    }
}

fn bernoulli_table() -> &'static Mutex<Vec<BigRational>> {
    static TABLE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![BigRational::one()]))
}

/// Bernoulli number `B_n` (with `B_1 = -1/2`).
fn bernoulli(n: usize) -> BigRational {
    let mut table = bernoulli_table().lock().expect("bernoulli cache poisoned");
    while table.len() <= n {
        let m = table.len();
        // B_m = -1/(m+1) sum_{k<m} C(m+1, k) B_k
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (k, b) in table.iter().enumerate() {
            if !b.is_zero() {
                acc += BigRational::from_integer(binom.clone()) * b;
            }
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        let b = -acc / BigRational::from_integer(BigInt::from(m + 1));
        table.push(b);
    }
    table[n].clone()
}

/// Gamma function for a ball of positive reals, via the Stirling series
/// with a shifted argument and the rigorous remainder bound for real
/// arguments (the remainder is smaller than the first omitted term).
pub fn gamma(z: &CertifiedReal) -> Result<CertifiedReal, Error> {
    if z.lower().signum() <= 0 {
        return Err(Error::Domain("gamma is only provided for positive arguments".into()));
    }
    let prec = z.precision();
    // exact factorial for integer points
    if z.is_exact() {
        let q = z.mid_rational();
        if q.is_integer() {
            if let Some(n) = q.to_integer().to_u64() {
                if n <= 4096 {
                    let mut f = BigInt::one();
                    for i in 2..n {
                        f *= BigInt::from(i);
                    }
                    return Ok(CertifiedReal::from_rational(&BigRational::from_integer(f), prec.max(64)));
                }
            }
        }
    }
    let wp = prec + GUARD + 16;
    let z = z.with_precision(wp);
    let zmin = wp as f64;
    let shift = (zmin - z.mid_f64()).ceil().max(0.0) as i64;
    let big = &z + &CertifiedReal::from_i64(shift).with_precision(wp);
    let ln_big = big.ln()?;
    let half = CertifiedReal::point(Dyadic::pow2(-1), wp);
    let ln_2pi = pi(wp).mul_pow2(1).ln()?;
    let mut lg = &(&(&big - &half) * &ln_big) - &big;
    lg = &lg + &ln_2pi.mul_pow2(-1);
    let inv = CertifiedReal::point(Dyadic::one(), wp).div(&big)?;
    let inv2 = inv.square();
    let mut power = inv.clone();
    let eps = Dyadic::pow2(-(wp as i64) - 4);
    let mut n = 1usize;
    loop {
        let b = CertifiedReal::from_rational(&bernoulli(2 * n), wp);
        let denom = (2 * n * (2 * n - 1)) as i64;
        let term = (&b * &power).div_i64(denom)?;
        lg = &lg + &term;
        power = &power * &inv2;
        let next_b = CertifiedReal::from_rational(&bernoulli(2 * n + 2), wp);
        let next = (&next_b * &power).div_i64(((2 * n + 2) * (2 * n + 1)) as i64)?;
        if next.abs_upper().le(&eps) {
            lg = lg.add_error(&next.abs_upper());
            break;
        }
        n += 1;
        if n > 4 * wp as usize {
            return Err(Error::Domain("Stirling series failed to converge".into()));
        }
    }
    let mut g = lg.exp();
    if shift > 0 {
        let mut prod = z.clone();
        for i in 1..shift {
            prod = &prod * &(&z + &CertifiedReal::from_i64(i).with_precision(wp));
        }
        g = g.div(&prod)?;
    }
    Ok(g.with_precision(prec))
}
