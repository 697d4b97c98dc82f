use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::scalar::{CertifiedReal, Dyadic, Mag, PrecisionPolicy, Sign};

const LAPLACE_MAX: usize = 7;

/// A certified determinant together with the precision that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Determinant {
    pub value: CertifiedReal,
    pub precision: u32,
    /// The sign stayed undecided up to the precision cap.
    pub exhausted: bool,
}

impl Determinant {
    pub fn sign(&self) -> Sign {
        self.value.sign()
    }
}

/// Determinant of a square matrix, refining entries through provenance
/// until the sign is decided or the cap is reached.
pub fn det_certified(m: &KernelMatrix, policy: &PrecisionPolicy) -> Result<Determinant> {
    if m.rows() != m.cols() {
        return Err(Error::InvalidInput(format!("determinant needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let mut value = det_enclosure(m.entries());
    let mut precision = m.precision();
    while value.sign() == Sign::Indeterminate && !all_exact(m.entries()) {
        match policy.next(precision) {
            Some(p) => {
                let refined = m.refined(p)?;
                value = det_enclosure(refined.entries());
                precision = p;
            }
            None => return Ok(Determinant { value, precision, exhausted: true }),
        }
    }
    Ok(Determinant { value, precision, exhausted: false })
}

/// Enclosure of the determinant of a square ball matrix.
///
/// Exact entries give an exact (rational) determinant. Otherwise ball
/// Gaussian elimination with full pivoting, cross-checked by cofactor
/// expansion when the sign stays open.
pub fn det_enclosure(a: &[Vec<CertifiedReal>]) -> CertifiedReal {
    let n = a.len();
    let prec = a.iter().flatten().map(CertifiedReal::precision).max().unwrap_or(crate::scalar::DEFAULT_PRECISION);
    if n == 0 {
        return CertifiedReal::one().with_precision(prec);
    }
    if all_exact(a) {
        let q: Vec<Vec<BigRational>> = a.iter().map(|r| r.iter().map(CertifiedReal::mid_rational).collect()).collect();
        return CertifiedReal::from_rational(&det_rational(q), prec);
    }
    let g = det_gauss(a, prec);
    if g.sign() != Sign::Indeterminate || n > LAPLACE_MAX {
        return g;
    }
    let l = det_laplace(a, prec);
    if l.sign() == Sign::Zero {
        return l;
    }
    g.intersect(&l).unwrap_or(g)
}

fn all_exact(a: &[Vec<CertifiedReal>]) -> bool {
    a.iter().flatten().all(CertifiedReal::is_exact)
}

fn is_exact_zero(x: &CertifiedReal) -> bool {
    x.sign() == Sign::Zero
}

/// Exact determinant by fraction-based elimination.
pub fn det_rational(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k + 1..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
    }
    det
}

fn det_gauss(a: &[Vec<CertifiedReal>], prec: u32) -> CertifiedReal {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = CertifiedReal::one().with_precision(prec);
    let mut negate = false;
    for k in 0..n {
        let mut best: Option<(usize, usize, Dyadic)> = None;
        for i in k..n {
            for j in k..n {
                let mig = m[i][j].mignitude();
                if mig.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, _, b)| mig.cmp_value(b).is_gt()) {
                    best = Some((i, j, mig));
                }
            }
        }
        let Some((pi, pj, _)) = best else {
            if m[k..].iter().all(|r| r[k..].iter().all(is_exact_zero)) {
                return CertifiedReal::zero().with_precision(prec);
            }
            let rest: Vec<Vec<CertifiedReal>> = m[k..].iter().map(|r| r[k..].to_vec()).collect();
            let tail = det_laplace(&rest, prec);
            let v = &det * &tail;
            return if negate { -v } else { v };
        };
        if pi != k {
            m.swap(pi, k);
            negate = !negate;
        }
        if pj != k {
            for row in m.iter_mut() {
                row.swap(pj, k);
            }
            negate = !negate;
        }
        let pivot = m[k][k].clone();
        det = &det * &pivot;
        for i in k + 1..n {
            if is_exact_zero(&m[i][k]) {
                continue;
            }
            let f = m[i][k].div(&pivot).expect("pivot excludes zero");
            for j in k + 1..n {
                let t = &f * &m[k][j];
                m[i][j] = &m[i][j] - &t;
            }
        }
    }
    if negate {
        -det
    } else {
        det
    }
}

/// Cofactor expansion along the row with the most exact zeros; exact zero
/// terms are skipped, so structurally singular matrices give an exact zero.
fn det_laplace(a: &[Vec<CertifiedReal>], prec: u32) -> CertifiedReal {
    let n = a.len();
    if n == 0 {
        return CertifiedReal::one().with_precision(prec);
    }
    if n == 1 {
        return a[0][0].clone();
    }
    if n > LAPLACE_MAX {
        return hadamard_ball(a, prec);
    }
    let row = (0..n).max_by_key(|&i| (a[i].iter().filter(|x| is_exact_zero(x)).count(), std::cmp::Reverse(i))).unwrap();
    let mut acc: Option<CertifiedReal> = None;
    for j in 0..n {
        if is_exact_zero(&a[row][j]) {
            continue;
        }
        let minor: Vec<Vec<CertifiedReal>> = (0..n)
            .filter(|&i| i != row)
            .map(|i| (0..n).filter(|&c| c != j).map(|c| a[i][c].clone()).collect())
            .collect();
        let sub = det_laplace(&minor, prec);
        if is_exact_zero(&sub) {
            continue;
        }
        let term = &a[row][j] * &sub;
        let term = if (row + j) % 2 == 1 { -term } else { term };
        acc = Some(match acc {
            Some(s) => &s + &term,
            None => term,
        });
    }
    acc.unwrap_or_else(|| CertifiedReal::zero().with_precision(prec))
}

/// `[-H, H]` with `H` the product of row 1-norms.
fn hadamard_ball(a: &[Vec<CertifiedReal>], prec: u32) -> CertifiedReal {
    let mut h = Mag::from_dyadic(&Dyadic::one());
    for row in a {
        let norm = row.iter().fold(Mag::zero(), |s, x| s.add(&x.abs_upper()));
        h = h.mul(&norm);
    }
    CertifiedReal::from_parts(Dyadic::zero(), h, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_bessel_matrix, parse_matrix, ArgumentTuple, IndexTuple};

    #[test]
    fn one_by_one_and_exact() {
        let m = parse_matrix("0.75").unwrap();
        assert_eq!(det_certified(&m, &PrecisionPolicy::default()).unwrap().value.mid_f64(), 0.75);
        let m = parse_matrix("1,2;2,1").unwrap();
        let d = det_certified(&m, &PrecisionPolicy::default()).unwrap();
        assert!(d.value.is_exact() && d.value.mid_f64() == -3.0);
        let m = parse_matrix("1,2,3;4,5,6;1,2,3").unwrap();
        assert_eq!(det_certified(&m, &PrecisionPolicy::default()).unwrap().sign(), Sign::Zero);
    }

    #[test]
    fn bessel_two_by_two() {
        let k = IndexTuple::new(vec![0, 1]).unwrap();
        let x = ArgumentTuple::parse(&["1", "2"]).unwrap();
        let m = build_bessel_matrix(&k, &x, 1e-20, &PrecisionPolicy::default()).unwrap();
        let d = det_certified(&m, &PrecisionPolicy::default()).unwrap();
        assert_eq!(d.sign(), Sign::Positive);
        let expect = CertifiedReal::from_decimal("0.725522658608413848941940074094834582481", 200).unwrap().widen(1e-38).unwrap();
        assert!(d.value.overlaps(&expect), "{}", d.value);
    }

    #[test]
    fn duplicate_rows_contain_zero() {
        let k = IndexTuple::new(vec![0, 1, 2]).unwrap();
        let x = ArgumentTuple::parse(&["0.5", "1.5", "3"]).unwrap();
        let m = build_bessel_matrix(&k, &x, 1e-20, &PrecisionPolicy::default()).unwrap();
        let rows = vec![m.entries()[0].clone(), m.entries()[1].clone(), m.entries()[0].clone()];
        let d = det_enclosure(&rows);
        assert!(d.contains_zero());
        assert!(d.rad_f64() < 1e-15);
    }

    #[test]
    fn structural_zero_is_exact() {
        let x = CertifiedReal::from_decimal("0.1", 64).unwrap();
        let z = CertifiedReal::zero();
        let a = vec![vec![z.clone(), x.clone()], vec![z.clone(), x.clone()]];
        assert_eq!(det_enclosure(&a).sign(), Sign::Zero);
        let a = vec![vec![x.clone(), z.clone(), z.clone()], vec![x.clone(), z.clone(), x.clone()], vec![x.clone(), z.clone(), x.clone()]];
        assert_eq!(det_enclosure(&a).sign(), Sign::Zero);
    }
}
