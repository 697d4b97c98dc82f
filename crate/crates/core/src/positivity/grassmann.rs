use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::det::det_certified;
use crate::error::{Error, Result};
use crate::kernels::{build_bessel_matrix, ArgumentTuple, IndexTuple, KernelMatrix};
use crate::scalar::{CertifiedReal, PrecisionPolicy, Sign};

/// Maximal minors of an `l x m` matrix, in lexicographic column-set order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlueckerVector {
    pub column_sets: Vec<Vec<usize>>,
    pub coordinates: Vec<CertifiedReal>,
    /// Some coordinate stayed undecided at the precision cap.
    pub exhausted: bool,
}

impl PlueckerVector {
    pub fn len(&self) -> usize {
        self.coordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    pub fn signs(&self) -> Vec<Sign> {
        self.coordinates.iter().map(CertifiedReal::sign).collect()
    }
}

pub fn pluecker(m: &KernelMatrix, policy: &PrecisionPolicy) -> Result<PlueckerVector> {
    let (l, n) = (m.rows(), m.cols());
    if l >= n {
        return Err(Error::InvalidInput(format!("Pluecker coordinates need l < m, got {l}x{n}")));
    }
    let column_sets: Vec<Vec<usize>> = (0..n).combinations(l).collect();
    let rows: Vec<usize> = (0..l).collect();
    let dets = column_sets
        .par_iter()
        .map(|cols| det_certified(&m.submatrix(&rows, cols), policy))
        .collect::<Result<Vec<_>>>()?;
    let exhausted = dets.iter().any(|d| d.exhausted);
    Ok(PlueckerVector { column_sets, coordinates: dets.into_iter().map(|d| d.value).collect(), exhausted })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrassmannVerdict {
    /// All coordinates share one certified sign.
    StrictlyTotallyPositive,
    /// Two coordinates have opposite signs, or one is exactly zero.
    Not,
    /// Some coordinate stayed undecided at the precision cap.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrassmannCheck {
    pub verdict: GrassmannVerdict,
    /// `+1` or `-1`: the factor making every coordinate positive.
    pub normalization: Option<i8>,
    /// Column set of the offending or undecided coordinate.
    pub witness: Option<Vec<usize>>,
    pub pluecker: PlueckerVector,
}

/// Whether the row space of `m` is a strictly totally positive point of the
/// Grassmannian.
pub fn check_grassmann_point(m: &KernelMatrix, policy: &PrecisionPolicy) -> Result<GrassmannCheck> {
    let p = pluecker(m, policy)?;
    let signs = p.signs();
    let witness = |i: usize| Some(p.column_sets[i].clone());
    let reference = signs.iter().copied().find(|s| matches!(s, Sign::Positive | Sign::Negative));
    let clash = signs.iter().position(|&s| s == Sign::Zero || (matches!(s, Sign::Positive | Sign::Negative) && Some(s) != reference));
    let (verdict, normalization, witness) = if let Some(i) = clash {
        (GrassmannVerdict::Not, None, witness(i))
    } else if let Some(i) = signs.iter().position(|&s| s == Sign::Indeterminate) {
        (GrassmannVerdict::Indeterminate, None, witness(i))
    } else {
        let n = if reference == Some(Sign::Negative) { -1 } else { 1 };
        (GrassmannVerdict::StrictlyTotallyPositive, Some(n), None)
    };
    Ok(GrassmannCheck { verdict, normalization, witness, pluecker: p })
}

/// Pluecker vector of the row space of the Bessel matrix `A_{k,x}`.
pub fn h_k_map(k: &IndexTuple, x: &ArgumentTuple, target_rad: f64, policy: &PrecisionPolicy) -> Result<PlueckerVector> {
    if x.len() >= k.len() {
        return Err(Error::InvalidInput(format!("H_k needs l < m, got l={} m={}", x.len(), k.len())));
    }
    pluecker(&build_bessel_matrix(k, x, target_rad, policy)?, policy)
}

/// Certifies that two Pluecker vectors span different lines: some
/// `a_S b_T - a_T b_S` is certified nonzero.
pub fn certainly_non_proportional(a: &PlueckerVector, b: &PlueckerVector) -> bool {
    if a.column_sets != b.column_sets {
        return true;
    }
    let n = a.len();
    (0..n).any(|s| {
        (s + 1..n).any(|t| {
            let cross = &(&a.coordinates[s] * &b.coordinates[t]) - &(&a.coordinates[t] * &b.coordinates[s]);
            matches!(cross.sign(), Sign::Positive | Sign::Negative)
        })
    })
}
