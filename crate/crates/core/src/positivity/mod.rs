//! Determinants, minors and total-positivity certificates.
//!
//! Row and column indices are 0-based throughout.

mod det;
mod grassmann;
mod variation;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::scalar::{CertifiedReal, PrecisionPolicy, Sign};

pub use det::{det_certified, det_enclosure, det_rational, Determinant};
pub use grassmann::{
    certainly_non_proportional, check_grassmann_point, h_k_map, pluecker, GrassmannCheck, GrassmannVerdict, PlueckerVector,
};
pub use variation::{apply, sign_changes, sign_changes_max};

/// A `p x p` minor: increasing row and column index sets of equal size.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MinorSelector {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl MinorSelector {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        let increasing = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if rows.is_empty() || rows.len() != cols.len() || !increasing(&rows) || !increasing(&cols) {
            return Err(Error::InvalidInput("minor needs increasing row and column sets of equal size".into()));
        }
        Ok(MinorSelector { rows, cols })
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn of(&self, m: &KernelMatrix) -> KernelMatrix {
        m.submatrix(&self.rows, &self.cols)
    }
}

/// All `p x p` selectors of an `l x m` matrix, lexicographic in (rows, cols).
pub fn minor_selectors(l: usize, m: usize, p: usize) -> impl Iterator<Item = MinorSelector> {
    let col_sets: Vec<Vec<usize>> = (0..m).combinations(p).collect();
    (0..l).combinations(p).flat_map(move |rows| {
        col_sets.clone().into_iter().map(move |cols| MinorSelector { rows: rows.clone(), cols })
    })
}

/// Every `p x p` minor with its certified determinant, in lexicographic order.
pub fn enumerate_minors(m: &KernelMatrix, p: usize, policy: &PrecisionPolicy) -> Result<Vec<(MinorSelector, Determinant)>> {
    if p == 0 || p > m.rows().min(m.cols()) {
        return Err(Error::InvalidInput(format!("minor order {p} out of range 1..={}", m.rows().min(m.cols()))));
    }
    let selectors: Vec<MinorSelector> = minor_selectors(m.rows(), m.cols(), p).collect();
    selectors
        .into_par_iter()
        .map(|s| det_certified(&s.of(m), policy).map(|d| (s, d)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TpVerdict {
    /// Every minor is certified positive.
    StrictlyPositive,
    /// Every minor is certified positive or exactly zero, and some is zero.
    Nonnegative,
    /// Some minor stayed undecided at the precision cap.
    Indeterminate,
    /// Some minor is certified negative.
    Violated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: CertifiedReal,
}

/// Outcome of checking all minors up to some order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TPCertificate {
    #[serde(rename = "order")]
    pub order_checked: usize,
    pub verdict: TpVerdict,
    pub minors_checked: u64,
    /// Smallest lower bound among the certified-positive minors.
    pub min_margin: Option<CertifiedReal>,
    /// The first negative minor, else the first undecided one, else (strict
    /// mode) the first exactly-zero one.
    pub witness: Option<Witness>,
}

impl TPCertificate {
    /// Whether the certificate meets the requested notion of positivity.
    pub fn passes(&self, strict: bool) -> bool {
        match self.verdict {
            TpVerdict::StrictlyPositive => true,
            TpVerdict::Nonnegative => !strict,
            _ => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization cannot fail")
    }
}

/// Checks every minor of orders `1..=max_order`.
pub fn check_tp(m: &KernelMatrix, max_order: usize, strict: bool, policy: &PrecisionPolicy) -> Result<TPCertificate> {
    let limit = m.rows().min(m.cols());
    if max_order == 0 || max_order > limit {
        return Err(Error::InvalidInput(format!("max_order {max_order} out of range 1..={limit}")));
    }
    let mut minors = Vec::new();
    for p in 1..=max_order {
        minors.extend(enumerate_minors(m, p, policy)?);
    }
    Ok(certify(max_order, strict, &minors))
}

fn certify(order: usize, strict: bool, minors: &[(MinorSelector, Determinant)]) -> TPCertificate {
    let first = |want: Sign| minors.iter().find(|(_, d)| d.sign() == want);
    let min_margin = minors
        .iter()
        .filter(|(_, d)| d.sign() == Sign::Positive)
        .map(|(_, d)| d.value.lower_bound())
        .reduce(|a, b| if b.certainly_lt(&a) { b } else { a });
    let (verdict, witness) = if let Some(w) = first(Sign::Negative) {
        (TpVerdict::Violated, Some(w))
    } else if let Some(w) = first(Sign::Indeterminate) {
        (TpVerdict::Indeterminate, Some(w))
    } else if let Some(w) = first(Sign::Zero) {
        (TpVerdict::Nonnegative, strict.then_some(w))
    } else {
        (TpVerdict::StrictlyPositive, None)
    };
    TPCertificate {
        order_checked: order,
        verdict,
        minors_checked: minors.len() as u64,
        min_margin,
        witness: witness.map(|(s, d)| Witness { rows: s.rows.clone(), cols: s.cols.clone(), det: d.value.clone() }),
    }
}
