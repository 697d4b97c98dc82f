//! Arbitrary-precision dyadic numbers `man * 2^exp` and upward-rounded
//! magnitudes used as ball radii.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for [`Dyadic::round`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Round {
    /// Toward zero.
    Trunc,
    /// Toward +infinity.
    Up,
    /// Toward -infinity.
    #[allow(dead_code)]
    Down,
}

/// Exact value `man * 2^exp`. The mantissa is kept odd (or zero) so that
/// structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    pub(crate) fn zero() -> Self {
        Dyadic { man: BigInt::zero(), exp: 0 }
    }

    pub(crate) fn one() -> Self {
        Dyadic { man: BigInt::one(), exp: 0 }
    }

    pub(crate) fn new(man: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { man, exp };
        d.normalize();
        d
    }

    pub(crate) fn from_i64(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub(crate) fn pow2(e: i64) -> Self {
        Dyadic { man: BigInt::one(), exp: e }
    }

    /// Exact conversion; `None` for non-finite input.
    pub(crate) fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let negative = bits >> 63 == 1;
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let mut man = BigInt::from(m);
        if negative {
            man = -man;
        }
        Some(Dyadic::new(man, e))
    }

    fn normalize(&mut self) {
        if self.man.is_zero() {
            self.exp = 0;
            return;
        }
        if let Some(tz) = self.man.trailing_zeros() {
            if tz > 0 {
                self.man >>= tz as usize;
                self.exp += tz as i64;
            }
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub(crate) fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub(crate) fn signum(&self) -> i32 {
        match self.man.sign() {
            BigSign::Minus => -1,
            BigSign::NoSign => 0,
            BigSign::Plus => 1,
        }
    }

    pub(crate) fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub(crate) fn exponent(&self) -> i64 {
        self.exp
    }

    /// Number of significant bits of the mantissa.
    pub(crate) fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// An exponent `e` such that `|self| < 2^e` (for non-zero values).
    pub(crate) fn magnitude_exp(&self) -> i64 {
        self.exp + self.man.bits() as i64
    }

    pub(crate) fn abs(&self) -> Self {
        Dyadic { man: self.man.abs(), exp: self.exp }
    }

    pub(crate) fn neg(&self) -> Self {
        Dyadic { man: -&self.man, exp: self.exp }
    }

    pub(crate) fn mul_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { man: self.man.clone(), exp: self.exp + e }
    }

    pub(crate) fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.man << (self.exp - e) as usize;
        let b = &other.man << (other.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub(crate) fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub(crate) fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.man * &other.man, self.exp + other.exp)
    }

    /// Rounds to at most `prec` significant bits. Returns the rounded value
    /// and whether the rounding was exact. The rounding error is always
    /// strictly below one unit in the last place of the result.
    pub(crate) fn round(&self, prec: u32, mode: Round) -> (Dyadic, bool) {
        let bits = self.bits();
        if bits <= prec as u64 {
            return (self.clone(), true);
        }
        let shift = bits - prec as u64;
        let negative = self.man.is_negative();
        let mag = self.man.magnitude();
        let mut q: BigUint = mag >> shift as usize;
        let exact = mag.trailing_zeros().is_some_and(|tz| tz >= shift);
        let away = match mode {
            Round::Trunc => false,
            Round::Up => !negative && !exact,
            Round::Down => negative && !exact,
        };
        if away {
            q += 1u32;
        }
        let man = BigInt::from_biguint(if negative { BigSign::Minus } else { BigSign::Plus }, q);
        (Dyadic::new(man, self.exp + shift as i64), exact)
    }

    /// Quotient rounded toward zero with at least `prec` significant bits.
    /// Returns `(quotient, exact)`. Error is below `2^(quotient exponent)`,
    /// reported through [`Dyadic::ulp_exp`] of the unnormalized quotient.
    pub(crate) fn div(&self, other: &Dyadic, prec: u32) -> (Dyadic, i64, bool) {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return (Dyadic::zero(), i64::MIN, true);
        }
        let shift = (prec as i64 + other.bits() as i64 - self.bits() as i64 + 1).max(0);
        let num = &self.man << shift as usize;
        let (q, r) = num.div_rem(&other.man);
        let ulp_exp = self.exp - other.exp - shift;
        (Dyadic::new(q, ulp_exp), ulp_exp, r.is_zero())
    }

    /// Floor of the square root with at least `prec` bits. Returns
    /// `(root, ulp exponent, exact)`.
    pub(crate) fn sqrt(&self, prec: u32) -> (Dyadic, i64, bool) {
        assert!(!self.is_negative(), "square root of a negative dyadic");
        if self.is_zero() {
            return (Dyadic::zero(), i64::MIN, true);
        }
        let mut shift = (2 * prec as i64 + 2 - self.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let n = &self.man << shift as usize;
        let root = n.sqrt();
        let exact = &root * &root == n;
        let ulp_exp = (self.exp - shift) / 2;
        (Dyadic::new(root, ulp_exp), ulp_exp, exact)
    }

    pub(crate) fn cmp_value(&self, other: &Dyadic) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }

    pub(crate) fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as usize)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Nearest `f64` (approximately; used for display and heuristics only).
    pub(crate) fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.bits() as i64;
        let (top, e) = if bits > 62 {
            ((&self.man >> (bits - 62) as usize), self.exp + bits - 62)
        } else {
            (self.man.clone(), self.exp)
        };
        ldexp(top.to_f64().unwrap_or(0.0), e)
    }
}

pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// Bits kept in radius mantissas.
const MAG_BITS: u32 = 30;

/// A non-negative upper bound, stored with a short mantissa and always
/// rounded upward.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Mag(Dyadic);

impl Mag {
    pub(crate) fn zero() -> Self {
        Mag(Dyadic::zero())
    }

    /// Upper bound of `|d|`.
    pub(crate) fn from_dyadic(d: &Dyadic) -> Self {
        Mag(d.abs().round(MAG_BITS, Round::Up).0)
    }

    pub(crate) fn pow2(e: i64) -> Self {
        Mag(Dyadic::pow2(e))
    }

    /// Upper bound for a non-negative finite `f64`.
    pub(crate) fn from_f64(v: f64) -> Option<Self> {
        if v < 0.0 {
            return None;
        }
        Dyadic::from_f64(v).map(|d| Mag::from_dyadic(&d))
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub(crate) fn as_dyadic(&self) -> &Dyadic {
        &self.0
    }

    pub(crate) fn add(&self, o: &Mag) -> Mag {
        Mag::from_dyadic(&self.0.add(&o.0))
    }

    pub(crate) fn mul(&self, o: &Mag) -> Mag {
        Mag::from_dyadic(&self.0.mul(&o.0))
    }

    /// Upper bound of `self / lower`, where `lower > 0` bounds the true
    /// divisor from below.
    pub(crate) fn div_lower(&self, lower: &Dyadic) -> Mag {
        assert!(lower.signum() > 0, "radius division by a non-positive bound");
        if self.is_zero() {
            return Mag::zero();
        }
        let (q, ulp, exact) = self.0.div(lower, MAG_BITS + 2);
        let q = if exact { q } else { q.add(&Dyadic::pow2(ulp)) };
        Mag::from_dyadic(&q)
    }

    pub(crate) fn mul_pow2(&self, e: i64) -> Mag {
        Mag(self.0.mul_pow2(e))
    }

    pub(crate) fn le(&self, d: &Dyadic) -> bool {
        self.0.cmp_value(d) != Ordering::Greater
    }

    /// `f64` that is at least the stored bound.
    pub(crate) fn to_f64_up(&self) -> f64 {
        let v = self.0.to_f64();
        if v == 0.0 && !self.0.is_zero() {
            return f64::MIN_POSITIVE;
        }
        // `to_f64` truncates at most a few ulps below the value.
        v * (1.0 + 4.0 * f64::EPSILON)
    }
}
