use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::scalar::{CertifiedReal, Sign};

/// Number of sign alternations after deleting zeros.
pub fn sign_changes(v: &[f64]) -> Result<usize> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite);
    }
    let nonzero: Vec<bool> = v.iter().filter(|&&x| x != 0.0).map(|&x| x > 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::InvalidInput("sign changes of the zero vector are undefined".into()));
    }
    Ok(nonzero.windows(2).filter(|w| w[0] != w[1]).count())
}

/// Largest number of sign alternations compatible with the enclosures:
/// undecided entries may take either sign or vanish.
pub fn sign_changes_max(v: &[CertifiedReal]) -> Result<usize> {
    if v.iter().all(|x| x.sign() == Sign::Zero) {
        return Err(Error::InvalidInput("sign changes of the zero vector are undefined".into()));
    }
    // best[s]: most changes so far with last nonzero sign s (0 = +, 1 = -)
    let mut best: [Option<usize>; 2] = [None, None];
    for x in v {
        let allowed: &[usize] = match x.sign() {
            Sign::Zero => continue,
            Sign::Positive => &[0],
            Sign::Negative => &[1],
            Sign::Indeterminate => &[0, 1],
        };
        let prev = best;
        for &s in allowed {
            let extend = prev[1 - s].map(|c| c + 1).unwrap_or(0).max(prev[s].unwrap_or(0));
            best[s] = Some(best[s].map_or(extend, |b| b.max(extend)));
        }
    }
    Ok(best.iter().flatten().copied().max().unwrap_or(0))
}

/// `M v` for a rational vector `v`.
pub fn apply(m: &KernelMatrix, v: &[BigRational]) -> Result<Vec<CertifiedReal>> {
    if v.len() != m.cols() {
        return Err(Error::InvalidInput(format!("vector length {} does not match {} columns", v.len(), m.cols())));
    }
    let balls: Vec<CertifiedReal> = v.iter().map(|q| CertifiedReal::from_rational(q, m.precision())).collect();
    Ok(m.entries().iter().map(|row| row.iter().zip(&balls).map(|(a, b)| a * b).sum()).collect())
}
