//! Exact decimal parsing and directed decimal formatting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, Signed, Zero};

use super::dyadic::{Dyadic, Mag, Round};
use crate::error::Error;

/// Parses `[-+]digits[.digits][(e|E)[-+]digits]` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::Parse(format!("not a decimal number: {s:?}"));
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (body, exp10) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (negative, body) = match body.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, body.strip_prefix('+').unwrap_or(body)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    if negative {
        n = -n;
    }
    let scale = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * Pow::pow(&ten, scale as u64))
    } else {
        BigRational::new(n, Pow::pow(&ten, (-scale) as u64))
    })
}

/// Upper bound of `|q|` as a radius.
pub(crate) fn mag_from_rational(q: &BigRational) -> Mag {
    let q = q.abs();
    if q.is_zero() {
        return Mag::zero();
    }
    let n = Dyadic::new(q.numer().clone(), 0);
    let d = Dyadic::new(q.denom().clone(), 0);
    Mag::from_dyadic(&n).mul(&Mag::pow2(0).div_lower(&d))
}

/// Formats `d` with at most `digits` significant decimal digits, rounding
/// the magnitude to nearest (`Round::Trunc`) or away from zero
/// (`Round::Up`). Returns the string and the exact decimal value printed.
pub(crate) fn format_dyadic(d: &Dyadic, digits: usize, mode: Round) -> (String, BigRational) {
    if d.is_zero() {
        return ("0".to_string(), BigRational::zero());
    }
    let digits = digits.max(1);
    let negative = d.is_negative();
    let (n, mut scale) = if d.exponent() >= 0 {
        (d.mantissa().abs() << d.exponent() as usize, 0i64)
    } else {
        let five = BigInt::from(5);
        (d.mantissa().abs() * Pow::pow(&five, (-d.exponent()) as u64), d.exponent())
    };
    let len = n.to_string().len();
    let mut q = n.clone();
    if len > digits {
        let drop = (len - digits) as u64;
        let div = Pow::pow(&BigInt::from(10), drop);
        let (quot, rem) = n.div_rem(&div);
        q = quot;
        let bump = match mode {
            Round::Up => !rem.is_zero(),
            _ => &rem * 2 >= div,
        };
        if bump {
            q += 1;
        }
        scale += drop as i64;
    }
    let mut value = if scale >= 0 {
        BigRational::from_integer(&q * Pow::pow(&BigInt::from(10), scale as u64))
    } else {
        BigRational::new(q.clone(), Pow::pow(&BigInt::from(10), (-scale) as u64))
    };
    if negative {
        value = -value;
    }
    let s = q.to_string();
    let exp10 = scale + s.len() as i64 - 1;
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(head);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    if exp10 != 0 {
        out.push_str(&format!("e{exp10}"));
    }
    (out, value)
}
