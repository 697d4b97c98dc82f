//! Kernel matrices over certified reals.
//!
//! Every matrix remembers how it was built ([`Provenance`]), so any entry can
//! be recomputed at a higher working precision when a minor cannot be
//! decided, and any submatrix keeps that ability.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_i_rational, BesselOrder};
use crate::error::{Error, Result};
use crate::scalar::{escalate, parse_rational, CertifiedReal, Escalated, PrecisionPolicy};

/// Strictly increasing non-negative column indices `k_1 < ... < k_m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct IndexTuple(Vec<u32>);

impl IndexTuple {
    pub fn new(k: Vec<u32>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::InvalidInput("index tuple must be non-empty".into()));
        }
        if k.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!("{k:?} is not in K_m: indices must be strictly increasing")));
        }
        Ok(IndexTuple(k))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest index `k_m`.
    pub fn last(&self) -> u32 {
        *self.0.last().expect("non-empty by construction")
    }

    pub(crate) fn select(&self, idx: &[usize]) -> IndexTuple {
        IndexTuple(idx.iter().map(|&i| self.0[i]).collect())
    }
}

impl TryFrom<Vec<u32>> for IndexTuple {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        IndexTuple::new(v)
    }
}

impl From<IndexTuple> for Vec<u32> {
    fn from(k: IndexTuple) -> Self {
        k.0
    }
}

impl std::fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Strictly increasing positive arguments `0 < x_1 < ... < x_l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentTuple(#[serde(with = "rational_vec")] Vec<BigRational>);

impl ArgumentTuple {
    pub fn new(x: Vec<BigRational>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("argument tuple must be non-empty".into()));
        }
        if !x[0].is_positive() {
            return Err(Error::InvalidInput("arguments must be positive (not in X_l)".into()));
        }
        check_increasing(&x, "arguments")?;
        Ok(ArgumentTuple(x))
    }

    /// Like [`ArgumentTuple::new`] but also admits `x_1 = 0`.
    pub fn new_nonnegative(x: Vec<BigRational>) -> Result<Self> {
        if x.is_empty() || x[0].is_negative() {
            return Err(Error::InvalidInput("arguments must be non-negative".into()));
        }
        check_increasing(&x, "arguments")?;
        Ok(ArgumentTuple(x))
    }

    pub fn from_f64s(x: &[f64]) -> Result<Self> {
        Self::new(x.iter().map(|&v| crate::scalar::rational_from_f64(v)).collect::<Result<_>>()?)
    }

    pub fn parse(x: &[&str]) -> Result<Self> {
        Self::new(x.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?)
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_increasing(v: &[BigRational], what: &str) -> Result<()> {
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// How a matrix was built; enough to recompute any entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum Provenance {
    /// `a_ij = I_{k_j}(x_i)`.
    Bessel {
        k: IndexTuple,
        #[serde(with = "rational_vec")]
        x: Vec<BigRational>,
    },
    /// `A_{ms} = I_{s-m}(x)` for the listed row and column labels.
    Toeplitz {
        #[serde(with = "rational_one")]
        x: BigRational,
        rows: Vec<i64>,
        cols: Vec<i64>,
    },
    /// `K(x_i, y_j) = kappa_alpha(x_i - y_j; lambda)`.
    Karlin {
        #[serde(with = "rational_one")]
        alpha: BigRational,
        #[serde(with = "rational_one")]
        lambda: BigRational,
        #[serde(with = "rational_vec")]
        xs: Vec<BigRational>,
        #[serde(with = "rational_vec")]
        ys: Vec<BigRational>,
    },
    /// `x_i^{y_j}`.
    Vandermonde {
        #[serde(with = "rational_vec")]
        xs: Vec<BigRational>,
        #[serde(with = "rational_vec")]
        ys: Vec<BigRational>,
    },
    /// Explicit rational entries.
    Explicit {
        #[serde(with = "rational_grid")]
        entries: Vec<Vec<BigRational>>,
    },
}

impl Provenance {
    fn shape(&self) -> (usize, usize) {
        match self {
            Provenance::Bessel { k, x } => (x.len(), k.len()),
            Provenance::Toeplitz { rows, cols, .. } => (rows.len(), cols.len()),
            Provenance::Karlin { xs, ys, .. } | Provenance::Vandermonde { xs, ys } => (xs.len(), ys.len()),
            Provenance::Explicit { entries } => (entries.len(), entries.first().map_or(0, Vec::len)),
        }
    }

    /// Enclosure of entry `(i, j)` at working precision `prec`.
    pub fn entry(&self, i: usize, j: usize, prec: u32) -> Result<CertifiedReal> {
        match self {
            Provenance::Bessel { k, x } => bessel_i_rational(&BesselOrder::Integer(k.0[j] as i64), &x[i], prec),
            Provenance::Toeplitz { x, rows, cols } => bessel_i_rational(&BesselOrder::Integer(cols[j] - rows[i]), x, prec),
            Provenance::Karlin { alpha, lambda, xs, ys } => karlin_kappa_at(alpha, lambda, &(&xs[i] - &ys[j]), prec),
            Provenance::Vandermonde { xs, ys } => {
                CertifiedReal::from_rational(&xs[i], prec + 8).pow_rational(&ys[j]).map(|v| v.with_precision(prec))
            }
            Provenance::Explicit { entries } => Ok(CertifiedReal::from_rational(&entries[i][j], prec)),
        }
    }

    /// Provenance of the submatrix on the given (increasing) rows and columns.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Provenance {
        let pick = |v: &[BigRational], idx: &[usize]| idx.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        match self {
            Provenance::Bessel { k, x } => Provenance::Bessel { k: k.select(cols), x: pick(x, rows) },
            Provenance::Toeplitz { x, rows: r, cols: c } => Provenance::Toeplitz {
                x: x.clone(),
                rows: rows.iter().map(|&i| r[i]).collect(),
                cols: cols.iter().map(|&j| c[j]).collect(),
            },
            Provenance::Karlin { alpha, lambda, xs, ys } => Provenance::Karlin {
                alpha: alpha.clone(),
                lambda: lambda.clone(),
                xs: pick(xs, rows),
                ys: pick(ys, cols),
            },
            Provenance::Vandermonde { xs, ys } => Provenance::Vandermonde { xs: pick(xs, rows), ys: pick(ys, cols) },
            Provenance::Explicit { entries } => Provenance::Explicit {
                entries: rows.iter().map(|&i| pick(&entries[i], cols)).collect(),
            },
        }
    }
}

/// An `l x m` matrix of certified entries with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelMatrix {
    rows: usize,
    cols: usize,
    precision: u32,
    provenance: Provenance,
    entries: Vec<Vec<CertifiedReal>>,
}

impl KernelMatrix {
    /// Computes every entry at exactly `prec` bits.
    pub fn at_precision(provenance: Provenance, prec: u32) -> Result<Self> {
        let (rows, cols) = provenance.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix must have at least one row and column".into()));
        }
        let entries = (0..rows)
            .map(|i| (0..cols).map(|j| provenance.entry(i, j, prec)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelMatrix { rows, cols, precision: prec, provenance, entries })
    }

    /// Computes every entry to radius at most `target_rad`, escalating each
    /// entry independently.
    pub fn with_target(provenance: Provenance, target_rad: f64, policy: &PrecisionPolicy) -> Result<Self> {
        let (rows, cols) = provenance.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix must have at least one row and column".into()));
        }
        let mut precision = policy.start;
        let mut entries = Vec::with_capacity(rows);
        for i in 0..rows {
            let mut row = Vec::with_capacity(cols);
            for j in 0..cols {
                let e = escalate(policy, target_rad, |p| provenance.entry(i, j, p))?;
                precision = precision.max(e.precision);
                row.push(e.value);
            }
            entries.push(row);
        }
        Ok(KernelMatrix { rows, cols, precision, provenance, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn get(&self, i: usize, j: usize) -> &CertifiedReal {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<CertifiedReal>] {
        &self.entries
    }

    /// Recomputes all entries at `prec` bits.
    pub fn refined(&self, prec: u32) -> Result<Self> {
        Self::at_precision(self.provenance.clone(), prec)
    }

    /// The submatrix on the given rows and columns (indices in range),
    /// keeping provenance.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> KernelMatrix {
        let entries = rows.iter().map(|&i| cols.iter().map(|&j| self.entries[i][j].clone()).collect()).collect();
        KernelMatrix {
            rows: rows.len(),
            cols: cols.len(),
            precision: self.precision,
            provenance: self.provenance.restrict(rows, cols),
            entries,
        }
    }

    /// Midpoints as CSV. Lossy: radii are dropped.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# lossy: midpoints only\n");
        for row in &self.entries {
            let line: Vec<String> = row.iter().map(|e| format!("{:e}", e.mid_f64())).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serialization cannot fail")
    }
}

/// `kappa_alpha(x; lambda) = e^{-(x+lambda)} (x/lambda)^{alpha/2} I_alpha(2 sqrt(x lambda))`
/// for `x >= 0`, and `0` for `x < 0`, at working precision `prec`.
///
/// At `x = 0` the series limit is used: `e^{-lambda}` for `alpha = 0`, else `0`.
pub fn karlin_kappa_at(alpha: &BigRational, lambda: &BigRational, x: &BigRational, prec: u32) -> Result<CertifiedReal> {
    if !lambda.is_positive() {
        return Err(Error::Domain(format!("Karlin kernel needs lambda > 0, got {lambda}")));
    }
    if alpha.is_negative() {
        return Err(Error::Domain(format!("Karlin kernel needs alpha >= 0, got {alpha}")));
    }
    if x.is_negative() {
        return Ok(CertifiedReal::zero().with_precision(prec));
    }
    let wp = prec + 16;
    let lam = CertifiedReal::from_rational(lambda, wp);
    if x.is_zero() {
        return Ok(if alpha.is_zero() { (-lam).exp().with_precision(prec) } else { CertifiedReal::zero().with_precision(prec) });
    }
    let xb = CertifiedReal::from_rational(x, wp);
    let damp = (-(&xb + &lam)).exp();
    let ratio = CertifiedReal::from_rational(&(x / lambda), wp);
    let power = ratio.pow_rational(&(alpha / BigRational::from_integer(2.into())))?;
    let arg = CertifiedReal::from_rational(&(x * lambda), wp).sqrt()?.mul_pow2(1);
    let order = BesselOrder::Real(alpha.clone());
    let bessel = crate::bessel::bessel_i_ball(&order, &arg)?;
    Ok((&(&damp * &power) * &bessel).with_precision(prec))
}

/// `kappa_alpha(x; lambda)` to absolute radius `target_rad`.
pub fn karlin_kappa(
    alpha: &BigRational,
    lambda: &BigRational,
    x: &BigRational,
    target_rad: f64,
    policy: &PrecisionPolicy,
) -> Result<Escalated> {
    escalate(policy, target_rad, |p| karlin_kappa_at(alpha, lambda, x, p))
}

/// The Bessel matrix `A_{k,x}` with `a_ij = I_{k_j}(x_i)`.
pub fn build_bessel_matrix(k: &IndexTuple, x: &ArgumentTuple, target_rad: f64, policy: &PrecisionPolicy) -> Result<KernelMatrix> {
    KernelMatrix::with_target(Provenance::Bessel { k: k.clone(), x: x.0.clone() }, target_rad, policy)
}

/// Window of the Toeplitz matrix `A_{ms} = I_{s-m}(x)`; ranges are inclusive.
pub fn build_toeplitz_bessel(
    x: &BigRational,
    rows: std::ops::RangeInclusive<i64>,
    cols: std::ops::RangeInclusive<i64>,
    target_rad: f64,
    policy: &PrecisionPolicy,
) -> Result<KernelMatrix> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("Toeplitz Bessel matrix needs x > 0, got {x}")));
    }
    let rows: Vec<i64> = rows.collect();
    let cols: Vec<i64> = cols.collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::InvalidInput("Toeplitz window ranges must be non-empty".into()));
    }
    KernelMatrix::with_target(Provenance::Toeplitz { x: x.clone(), rows, cols }, target_rad, policy)
}

/// The Karlin matrix `kappa_alpha(x_i - y_j; lambda)` for `alpha > 1`.
pub fn build_karlin_matrix(
    alpha: &BigRational,
    lambda: &BigRational,
    xs: &[BigRational],
    ys: &[BigRational],
    target_rad: f64,
    policy: &PrecisionPolicy,
) -> Result<KernelMatrix> {
    if alpha <= &BigRational::one() {
        return Err(Error::Domain(format!("Karlin matrix needs alpha > 1, got {alpha}")));
    }
    if !lambda.is_positive() {
        return Err(Error::Domain(format!("Karlin kernel needs lambda > 0, got {lambda}")));
    }
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidInput("Karlin matrix needs non-empty xs and ys".into()));
    }
    check_increasing(xs, "xs")?;
    check_increasing(ys, "ys")?;
    let prov = Provenance::Karlin { alpha: alpha.clone(), lambda: lambda.clone(), xs: xs.to_vec(), ys: ys.to_vec() };
    KernelMatrix::with_target(prov, target_rad, policy)
}

/// The generalized Vandermonde matrix `x_i^{y_j}`.
pub fn build_vandermonde(xs: &[BigRational], ys: &[BigRational], target_rad: f64, policy: &PrecisionPolicy) -> Result<KernelMatrix> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidInput("Vandermonde matrix needs non-empty xs and ys".into()));
    }
    if !xs[0].is_positive() {
        return Err(Error::Domain("Vandermonde bases must be positive".into()));
    }
    if ys[0].is_negative() {
        return Err(Error::Domain("Vandermonde exponents must be non-negative".into()));
    }
    check_increasing(xs, "xs")?;
    check_increasing(ys, "ys")?;
    KernelMatrix::with_target(Provenance::Vandermonde { xs: xs.to_vec(), ys: ys.to_vec() }, target_rad, policy)
}

/// A matrix with exact rational entries.
pub fn explicit_matrix(entries: Vec<Vec<BigRational>>) -> Result<KernelMatrix> {
    let cols = entries.first().map_or(0, Vec::len);
    if entries.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("explicit matrix rows must have equal length".into()));
    }
    KernelMatrix::at_precision(Provenance::Explicit { entries }, crate::scalar::DEFAULT_PRECISION)
}

/// Parses `"a,b;c,d"` (rows separated by `;`) into an explicit matrix.
pub fn parse_matrix(s: &str) -> Result<KernelMatrix> {
    let rows = s
        .split(';')
        .map(|r| r.split(',').map(parse_rational).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    explicit_matrix(rows)
}

pub(crate) mod rational_one {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::scalar::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod rational_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|q| q.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| crate::scalar::parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

pub(crate) mod rational_grid {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<BigRational>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|row| row.iter().map(|q| q.to_string()).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigRational>>, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter()
            .map(|row| row.iter().map(|s| crate::scalar::parse_rational(s).map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}
