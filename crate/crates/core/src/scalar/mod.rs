//! Certified real arithmetic.
//!
//! A [`CertifiedReal`] is a ball `mid ± rad`: an arbitrary-precision dyadic
//! midpoint together with an upward-rounded radius. Every operation returns a
//! ball that contains the exact result of the same operation applied to any
//! reals inside the operand balls, so a sign read off a ball is a proof.

mod decimal;
mod dyadic;
mod elementary;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use decimal::parse_rational;
pub(crate) use dyadic::{Dyadic, Mag, Round};
pub use elementary::{gamma, ln2, pi};

use crate::error::Error;

/// Default working precision in mantissa bits.
pub const DEFAULT_PRECISION: u32 = 64;
/// Default precision cap for escalation.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Certified sign of a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    /// Exactly zero (midpoint and radius both zero).
    Zero,
    /// The ball straddles or touches zero.
    Indeterminate,
}

/// A real number known to lie in `[mid - rad, mid + rad]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CertifiedReal {
    mid: Dyadic,
    rad: Mag,
    prec: u32,
}

impl CertifiedReal {
    pub(crate) fn from_parts(mid: Dyadic, rad: Mag, prec: u32) -> Self {
        let (m, exact) = mid.round(prec, Round::Trunc);
        let rad = if exact { rad } else { rad.add(&Mag::pow2(mid.magnitude_exp() - prec as i64)) };
        CertifiedReal { mid: m, rad, prec }
    }

    pub(crate) fn point(mid: Dyadic, prec: u32) -> Self {
        Self::from_parts(mid, Mag::zero(), prec)
    }

    pub fn zero() -> Self {
        CertifiedReal { mid: Dyadic::zero(), rad: Mag::zero(), prec: DEFAULT_PRECISION }
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::point(Dyadic::from_i64(v), DEFAULT_PRECISION.max(64))
    }

    /// Exact enclosure of a machine real. Fails on NaN and infinities.
    pub fn from_f64(v: f64) -> Result<Self, Error> {
        let d = Dyadic::from_f64(v).ok_or(Error::NonFinite)?;
        Ok(Self::point(d, DEFAULT_PRECISION))
    }

    /// Enclosure of a rational with radius at most one ulp at `prec` bits
    /// (zero when the rational is dyadic and fits).
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let n = Dyadic::new(q.numer().clone(), 0);
        if q.denom() == &BigInt::from(1) {
            return Self::point(n, prec);
        }
        let d = Dyadic::new(q.denom().clone(), 0);
        let (quot, _, exact) = n.div(&d, prec);
        // truncating twice is truncating once: the error stays below one ulp
        let (rounded, exact_round) = quot.round(prec, Round::Trunc);
        let rad = if exact && exact_round { Mag::zero() } else { Mag::pow2(quot.magnitude_exp() - prec as i64) };
        CertifiedReal { mid: rounded, rad, prec }
    }

    /// Parses a decimal (or `p/q`) string exactly and encloses it.
    pub fn from_decimal(s: &str, prec: u32) -> Result<Self, Error> {
        Ok(Self::from_rational(&parse_rational(s)?, prec))
    }

    /// Working precision in bits.
    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Re-rounds the midpoint to `prec` bits; later operations run at that
    /// precision.
    pub fn with_precision(&self, prec: u32) -> Self {
        Self::from_parts(self.mid.clone(), self.rad.clone(), prec)
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// An `f64` not smaller than the radius.
    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64_up()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn mid_rational(&self) -> BigRational {
        self.mid.to_rational()
    }

    pub fn lower_rational(&self) -> BigRational {
        self.lower().to_rational()
    }

    pub fn upper_rational(&self) -> BigRational {
        self.upper().to_rational()
    }

    pub(crate) fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub(crate) fn rad(&self) -> &Mag {
        &self.rad
    }

    pub(crate) fn lower(&self) -> Dyadic {
        self.mid.sub(self.rad.as_dyadic())
    }

    pub(crate) fn upper(&self) -> Dyadic {
        self.mid.add(self.rad.as_dyadic())
    }

    /// Upper bound of `|x|` over the ball.
    pub(crate) fn abs_upper(&self) -> Mag {
        Mag::from_dyadic(&self.mid).add(&self.rad)
    }

    /// Lower bound of `|x|` over the ball (zero if the ball contains zero).
    pub(crate) fn mignitude(&self) -> Dyadic {
        let m = self.mid.abs().sub(self.rad.as_dyadic());
        if m.signum() > 0 {
            m
        } else {
            Dyadic::zero()
        }
    }

    /// Approximate `f64` of the lower endpoint.
    pub fn lower_f64(&self) -> f64 {
        self.lower().to_f64()
    }

    /// Approximate `f64` of the upper endpoint.
    pub fn upper_f64(&self) -> f64 {
        self.upper().to_f64()
    }

    pub fn sign(&self) -> Sign {
        if self.mid.is_zero() && self.rad.is_zero() {
            return Sign::Zero;
        }
        let lo = self.lower();
        if lo.signum() > 0 {
            return Sign::Positive;
        }
        if self.upper().signum() < 0 {
            return Sign::Negative;
        }
        Sign::Indeterminate
    }

    pub fn contains_zero(&self) -> bool {
        self.mignitude().is_zero()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        (q - self.mid.to_rational()).abs() <= self.rad.as_dyadic().to_rational()
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains(&self, other: &CertifiedReal) -> bool {
        self.lower().cmp_value(&other.lower()) != Ordering::Greater
            && self.upper().cmp_value(&other.upper()) != Ordering::Less
    }

    pub fn overlaps(&self, other: &CertifiedReal) -> bool {
        self.lower().cmp_value(&other.upper()) != Ordering::Greater
            && other.lower().cmp_value(&self.upper()) != Ordering::Greater
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &CertifiedReal) -> bool {
        self.upper().cmp_value(&other.lower()) == Ordering::Less
    }

    /// The radius is at most `bound`.
    pub fn rad_le(&self, bound: f64) -> bool {
        match Dyadic::from_f64(bound) {
            Some(b) => self.rad.le(&b),
            None => bound == f64::INFINITY,
        }
    }

    /// Widens the ball by `err`.
    pub(crate) fn add_error(&self, err: &Mag) -> Self {
        CertifiedReal { mid: self.mid.clone(), rad: self.rad.add(err), prec: self.prec }
    }

    /// Widens the ball by a non-negative `f64` error bound.
    pub fn widen(&self, err: f64) -> Result<Self, Error> {
        let m = Mag::from_f64(err).ok_or(Error::NonFinite)?;
        Ok(self.add_error(&m))
    }

    /// Ball hull of `self` and `other`.
    pub fn union(&self, other: &CertifiedReal) -> Self {
        let lo = if self.lower().cmp_value(&other.lower()) == Ordering::Less { self.lower() } else { other.lower() };
        let hi = if self.upper().cmp_value(&other.upper()) == Ordering::Greater { self.upper() } else { other.upper() };
        Self::from_endpoints(&lo, &hi, self.prec.max(other.prec))
    }

    /// Intersection of two enclosures, `None` when they are disjoint.
    pub fn intersect(&self, other: &CertifiedReal) -> Option<Self> {
        if !self.overlaps(other) {
            return None;
        }
        if self.contains(other) {
            return Some(other.clone());
        }
        if other.contains(self) {
            return Some(self.clone());
        }
        let lo = if self.lower().cmp_value(&other.lower()) == Ordering::Greater { self.lower() } else { other.lower() };
        let hi = if self.upper().cmp_value(&other.upper()) == Ordering::Less { self.upper() } else { other.upper() };
        Some(Self::from_endpoints(&lo, &hi, self.prec.max(other.prec)))
    }

    /// The lower endpoint as an exact point.
    pub fn lower_bound(&self) -> Self {
        Self::point(self.lower(), self.prec)
    }

    /// The upper endpoint as an exact point.
    pub fn upper_bound(&self) -> Self {
        Self::point(self.upper(), self.prec)
    }

    pub(crate) fn from_endpoints(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        let mid = lo.add(hi).mul_pow2(-1);
        let rad = Mag::from_dyadic(&hi.sub(lo).mul_pow2(-1));
        Self::from_parts(mid, rad, prec)
    }

    pub fn abs(&self) -> Self {
        match self.sign() {
            Sign::Negative => -self,
            Sign::Indeterminate => {
                let hi = self.abs_upper();
                Self::from_endpoints(&Dyadic::zero(), hi.as_dyadic(), self.prec)
            }
            _ => self.clone(),
        }
    }

    /// Division; fails when the divisor ball contains zero.
    pub fn div(&self, other: &CertifiedReal) -> Result<Self, Error> {
        let prec = self.prec.max(other.prec);
        let bm = other.mid.abs();
        let denom_low = bm.sub(other.rad.as_dyadic());
        if denom_low.signum() <= 0 {
            return Err(Error::DivisionByZero);
        }
        let (q, ulp, exact) = self.mid.div(&other.mid, prec);
        let mut rad = if exact { Mag::zero() } else { Mag::pow2(ulp) };
        if !self.rad.is_zero() || !other.rad.is_zero() {
            let num = Mag::from_dyadic(&self.mid)
                .mul(&other.rad)
                .add(&Mag::from_dyadic(&other.mid).mul(&self.rad));
            rad = rad.add(&num.div_lower(&bm.mul(&denom_low)));
        }
        Ok(Self::from_parts(q, rad, prec))
    }

    pub fn div_i64(&self, n: i64) -> Result<Self, Error> {
        self.div(&CertifiedReal::point(Dyadic::from_i64(n), self.prec))
    }

    pub fn mul_i64(&self, n: i64) -> Self {
        self * &CertifiedReal::point(Dyadic::from_i64(n), self.prec)
    }

    /// Multiplication by `2^e`, exact.
    pub fn mul_pow2(&self, e: i64) -> Self {
        CertifiedReal { mid: self.mid.mul_pow2(e), rad: self.rad.mul_pow2(e), prec: self.prec }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: u64) -> Self {
        let mut result = CertifiedReal::point(Dyadic::one(), self.prec);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        result
    }

    /// Decimal midpoint and radius strings such that the printed ball
    /// contains this ball.
    pub fn to_decimal_parts(&self) -> (String, String) {
        let digits = self.decimal_digits();
        let (mid_s, mid_v) = decimal::format_dyadic(&self.mid, digits, Round::Trunc);
        let shift = decimal::mag_from_rational(&(mid_v - self.mid.to_rational()));
        let total = self.rad.add(&shift);
        let (rad_s, _) = decimal::format_dyadic(total.as_dyadic(), 6, Round::Up);
        (mid_s, rad_s)
    }

    /// Inverse of [`CertifiedReal::to_decimal_parts`]; the result contains the
    /// ball the strings describe.
    pub fn from_decimal_parts(mid: &str, rad: &str) -> Result<Self, Error> {
        let mid_q = parse_rational(mid)?;
        let rad_q = parse_rational(rad)?;
        if rad_q.is_negative() {
            return Err(Error::Parse(format!("negative radius {rad:?}")));
        }
        let digits = mid.chars().filter(|c| c.is_ascii_digit()).count() as u32;
        let prec = (digits * 34 / 10 + 8).max(DEFAULT_PRECISION);
        let ball = Self::from_rational(&mid_q, prec);
        Ok(ball.add_error(&decimal::mag_from_rational(&rad_q)))
    }

    fn decimal_digits(&self) -> usize {
        let max_digits = (self.prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        if self.rad.is_zero() || self.mid.is_zero() {
            return max_digits;
        }
        let rad_exp = self.rad.as_dyadic().magnitude_exp() - 1;
        let span = (self.mid.magnitude_exp() - rad_exp).max(0) as f64;
        let needed = (span * std::f64::consts::LOG10_2).ceil() as usize + 3;
        needed.clamp(17, max_digits.max(17))
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, r) = self.to_decimal_parts();
        write!(f, "{m} ± {r}")
    }
}

#[derive(Serialize, Deserialize)]
struct BallRepr {
    mid: String,
    rad: String,
}

impl Serialize for CertifiedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (mid, rad) = self.to_decimal_parts();
        BallRepr { mid, rad }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CertifiedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = BallRepr::deserialize(deserializer)?;
        CertifiedReal::from_decimal_parts(&repr.mid, &repr.rad).map_err(serde::de::Error::custom)
    }
}

impl Neg for &CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        CertifiedReal { mid: self.mid.neg(), rad: self.rad.clone(), prec: self.prec }
    }
}

impl Neg for CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        -&self
    }
}

impl Add for &CertifiedReal {
    type Output = CertifiedReal;
    fn add(self, o: &CertifiedReal) -> CertifiedReal {
        CertifiedReal::from_parts(self.mid.add(&o.mid), self.rad.add(&o.rad), self.prec.max(o.prec))
    }
}

impl Sub for &CertifiedReal {
    type Output = CertifiedReal;
    fn sub(self, o: &CertifiedReal) -> CertifiedReal {
        CertifiedReal::from_parts(self.mid.sub(&o.mid), self.rad.add(&o.rad), self.prec.max(o.prec))
    }
}

impl Mul for &CertifiedReal {
    type Output = CertifiedReal;
    fn mul(self, o: &CertifiedReal) -> CertifiedReal {
        let mid = self.mid.mul(&o.mid);
        let rad = if self.rad.is_zero() && o.rad.is_zero() {
            Mag::zero()
        } else {
            Mag::from_dyadic(&self.mid)
                .mul(&o.rad)
                .add(&Mag::from_dyadic(&o.mid).mul(&self.rad))
                .add(&self.rad.mul(&o.rad))
        };
        CertifiedReal::from_parts(mid, rad, self.prec.max(o.prec))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, o: CertifiedReal) -> CertifiedReal {
                (&self).$m(&o)
            }
        }
        impl $tr<&CertifiedReal> for CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, o: &CertifiedReal) -> CertifiedReal {
                (&self).$m(o)
            }
        }
        impl $tr<CertifiedReal> for &CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, o: CertifiedReal) -> CertifiedReal {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for CertifiedReal {
    fn sum<I: Iterator<Item = CertifiedReal>>(iter: I) -> Self {
        iter.fold(CertifiedReal::zero(), |a, b| a + b)
    }
}

/// Precision schedule for escalation: start, doubling, up to the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub cap: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start: DEFAULT_PRECISION, cap: DEFAULT_PRECISION_CAP }
    }
}

impl PrecisionPolicy {
    pub fn new(start: u32, cap: u32) -> Result<Self, Error> {
        if start == 0 || start > cap {
            return Err(Error::InvalidInput(format!("precision start {start} must be in 1..={cap}")));
        }
        Ok(PrecisionPolicy { start, cap })
    }

    /// The precisions tried, in order.
    pub fn schedule(&self) -> impl Iterator<Item = u32> {
        let cap = self.cap;
        std::iter::successors(Some(self.start), move |&p| {
            if p >= cap {
                None
            } else {
                Some(p.saturating_mul(2).min(cap))
            }
        })
    }

    /// Next precision after `p`, if below the cap.
    pub fn next(&self, p: u32) -> Option<u32> {
        if p >= self.cap {
            None
        } else {
            Some(p.saturating_mul(2).min(self.cap))
        }
    }
}

/// Result of running a recipe under escalating precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Escalated {
    pub value: CertifiedReal,
    /// Working precision of the returned value.
    pub precision: u32,
    /// Whether the acceptance condition was met before the cap.
    pub met: bool,
}

/// Re-runs `recipe` at doubling precision until `accept` holds or the cap is
/// hit. Returns the tightest enclosure obtained.
pub fn escalate_until<F, A>(policy: &PrecisionPolicy, mut recipe: F, accept: A) -> Result<Escalated, Error>
where
    F: FnMut(u32) -> Result<CertifiedReal, Error>,
    A: Fn(&CertifiedReal) -> bool,
{
    let mut best: Option<(CertifiedReal, u32)> = None;
    for prec in policy.schedule() {
        let v = recipe(prec)?;
        if accept(&v) {
            return Ok(Escalated { value: v, precision: prec, met: true });
        }
        let tighter = match &best {
            Some((b, _)) => v.rad.as_dyadic().cmp_value(b.rad.as_dyadic()) == Ordering::Less,
            None => true,
        };
        if tighter {
            best = Some((v, prec));
        }
    }
    let (value, precision) = best.expect("precision schedule is never empty");
    Ok(Escalated { value, precision, met: false })
}

/// Re-runs `recipe` at doubling precision until the radius is at most
/// `target_rad`.
pub fn escalate<F>(policy: &PrecisionPolicy, target_rad: f64, recipe: F) -> Result<Escalated, Error>
where
    F: FnMut(u32) -> Result<CertifiedReal, Error>,
{
    if !(target_rad > 0.0) || !target_rad.is_finite() {
        return Err(Error::InvalidInput(format!("target radius must be positive, got {target_rad}")));
    }
    escalate_until(policy, recipe, |v| v.rad_le(target_rad))
}

/// Converts an exact `f64` to a rational.
pub fn rational_from_f64(v: f64) -> Result<BigRational, Error> {
    Ok(Dyadic::from_f64(v).ok_or(Error::NonFinite)?.to_rational())
}

pub fn rational_from_i64(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}
