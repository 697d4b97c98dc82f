//! The lattice heat flow behind strict total positivity of Bessel matrices.
//!
//! For fixed offsets `w` the determinants `f_k(x_1, w) = det A_{k,x}` with
//! `x = (x_1, x_1 + w_2, ..., x_1 + w_m)` solve `f' = Δf + m f` on the
//! lattice of increasing index tuples. Here the lattice is cut to a finite
//! [`IndexWindow`]; neighbours outside it read as zero.

mod direct;
mod flow;
mod l2;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::IndexTuple;

pub use direct::{f_direct, f_direct_at, residual_check, richardson_ratio, ComponentResidual, ResidualReport};
pub use flow::{flow_integrate, truncation_bound, FlowState, Trajectory};
pub use l2::{bessel_sup_on_grid, l2_bound, l2_c_r, l2_tail, GridPoint, L2Report};

/// All `k` with `0 <= k_1 < ... < k_m <= k_max`, in colexicographic order.
///
/// Position in the window equals the colex rank `sum_i C(k_i, i+1)`, so a
/// window is a prefix of every larger one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWindow {
    m: usize,
    k_max: u32,
    members: Vec<IndexTuple>,
}

pub fn index_window(m: usize, k_max: u32) -> Result<IndexWindow> {
    if m == 0 {
        return Err(Error::InvalidInput("window dimension m must be at least 1".into()));
    }
    if (k_max as usize) + 1 < m {
        return Err(Error::InvalidInput(format!("k_max = {k_max} < m - 1 gives an empty window")));
    }
    let mut members = Vec::with_capacity(binomial(k_max as u64 + 1, m as u64) as usize);
    let mut k: Vec<u32> = (0..m as u32).collect();
    loop {
        members.push(IndexTuple::new(k.clone())?);
        // colex successor: bump the first entry that can move up
        let Some(i) = (0..m).find(|&i| k[i] + 1 < if i + 1 < m { k[i + 1] } else { k_max + 1 }) else {
            break;
        };
        k[i] += 1;
        for (t, v) in k.iter_mut().enumerate().take(i) {
            *v = t as u32;
        }
    }
    Ok(IndexWindow { m, k_max, members })
}

impl IndexWindow {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn members(&self) -> &[IndexTuple] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Position of an increasing tuple, `None` if it lies outside the window.
    pub fn position(&self, k: &[u32]) -> Option<usize> {
        if k.len() != self.m || k.windows(2).any(|w| w[0] >= w[1]) || *k.last()? > self.k_max {
            return None;
        }
        Some(k.iter().enumerate().map(|(i, &v)| binomial(v as u64, i as u64 + 1) as usize).sum())
    }

    /// `k_m < k_max - 1`: every neighbour, and every neighbour's neighbour,
    /// lies inside the window.
    pub fn is_interior(&self, idx: usize) -> bool {
        self.members[idx].last() + 1 < self.k_max
    }

    /// Neighbour weights of component `idx` in `½ Σ (T_j + T_j^{-1})`, in
    /// units of ½, merged per target and sorted by position.
    ///
    /// Collisions and out-of-window neighbours drop out; the reflection
    /// `f(-1, ...) = f(1, ...)` doubles the weight of `(1, p_2, ...)`.
    pub fn stencil(&self, idx: usize) -> Vec<(usize, u32)> {
        let p = self.members[idx].as_slice();
        let mut out: Vec<(usize, u32)> = Vec::with_capacity(2 * self.m);
        let mut push = |q: &[u32]| {
            if let Some(pos) = self.position(q) {
                match out.iter_mut().find(|(t, _)| *t == pos) {
                    Some((_, w)) => *w += 1,
                    None => out.push((pos, 1)),
                }
            }
        };
        for s in 0..self.m {
            let mut q = p.to_vec();
            q[s] = p[s] + 1;
            push(&q);
            // p_s - 1 is -1 only for s = 0, reflected to 1
            q[s] = if p[s] == 0 { 1 } else { p[s] - 1 };
            push(&q);
        }
        out.sort_unstable();
        out
    }
}

/// Strictly increasing positive offsets `w_2 < ... < w_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offsets(#[serde(with = "crate::kernels::rational_vec")] Vec<BigRational>);

impl Offsets {
    pub fn new(w: Vec<BigRational>) -> Result<Self> {
        if w.first().is_some_and(|v| !v.is_positive()) || w.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidInput("offsets must be positive and strictly increasing".into()));
        }
        Ok(Offsets(w))
    }

    pub fn parse(w: &[&str]) -> Result<Self> {
        Self::new(w.iter().map(|s| crate::scalar::parse_rational(s)).collect::<Result<_>>()?)
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }

    /// Dimension `m = len + 1`.
    pub fn dimension(&self) -> usize {
        self.0.len() + 1
    }

    /// `|w| = w_2 + ... + w_m`.
    pub fn l1(&self) -> BigRational {
        self.0.iter().cloned().sum()
    }

    /// The arguments `(x_1, x_1 + w_2, ..., x_1 + w_m)`.
    pub fn arguments(&self, x1: &BigRational) -> Vec<BigRational> {
        std::iter::once(x1.clone()).chain(self.0.iter().map(|w| x1 + w)).collect()
    }
}

/// `(Δf)(p) = ½ Σ_s [f(.., p_s - 1, ..) + f(.., p_s + 1, ..)] - m f(p)` on
/// the window.
pub fn discrete_laplacian(window: &IndexWindow, f: &[f64], p: &IndexTuple) -> Result<f64> {
    let idx = window
        .position(p.as_slice())
        .ok_or_else(|| Error::InvalidInput(format!("{p} is not in the window")))?;
    check_len(window, f)?;
    Ok(shift_sum(window, f, idx) - window.m as f64 * f[idx])
}

/// `Δf + m f`, the right-hand side of the flow.
pub fn flow_rhs(window: &IndexWindow, f: &[f64]) -> Result<Vec<f64>> {
    check_len(window, f)?;
    let m = window.m as f64;
    let rhs: Vec<f64> = (0..window.len()).map(|i| (shift_sum(window, f, i) - m * f[i]) + m * f[i]).collect();
    debug_assert!(rhs.iter().zip(flow_rhs_shifts(window, f)?).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs())));
    Ok(rhs)
}

/// `½ Σ_j (T_j + T_j^{-1}) f`, evaluated through the extension of `f` to
/// all of `Z^m` (even in each component, antisymmetric under swaps).
pub fn flow_rhs_shifts(window: &IndexWindow, f: &[f64]) -> Result<Vec<f64>> {
    check_len(window, f)?;
    Ok(window
        .members
        .iter()
        .map(|k| {
            let p: Vec<i64> = k.as_slice().iter().map(|&v| v as i64).collect();
            let mut acc = 0.0;
            for s in 0..window.m {
                for d in [-1i64, 1] {
                    let mut q = p.clone();
                    q[s] += d;
                    acc += extended(window, f, &q);
                }
            }
            0.5 * acc
        })
        .collect())
}

fn extended(window: &IndexWindow, f: &[f64], q: &[i64]) -> f64 {
    let mut v: Vec<u32> = q.iter().map(|x| x.unsigned_abs() as u32).collect();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    window.position(&v).map_or(0.0, |i| sign * f[i])
}

fn shift_sum(window: &IndexWindow, f: &[f64], idx: usize) -> f64 {
    0.5 * window.stencil(idx).iter().map(|&(t, w)| w as f64 * f[t]).sum::<f64>()
}

fn check_len(window: &IndexWindow, f: &[f64]) -> Result<()> {
    if f.len() != window.len() {
        return Err(Error::InvalidInput(format!("expected {} window components, got {}", window.len(), f.len())));
    }
    Ok(())
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tuples(w: &IndexWindow) -> Vec<Vec<u32>> {
        w.members().iter().map(|k| k.as_slice().to_vec()).collect()
    }

    fn indicator(w: &IndexWindow, k: &[u32]) -> Vec<f64> {
        let mut f = vec![0.0; w.len()];
        f[w.position(k).unwrap()] = 1.0;
        f
    }

    #[test]
    fn windows() {
        assert_eq!(tuples(&index_window(1, 2).unwrap()), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(tuples(&index_window(2, 2).unwrap()), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let w = index_window(3, 4).unwrap();
        assert_eq!(w.len(), 10);
        for (i, k) in w.members().iter().enumerate() {
            assert_eq!(w.position(k.as_slice()), Some(i));
        }
        assert!(index_window(3, 1).is_err());
        let small = index_window(2, 5).unwrap();
        let big = index_window(2, 7).unwrap();
        assert_eq!(small.members(), &big.members()[..small.len()]);
    }

    #[test]
    fn laplacian_examples() {
        let w = index_window(1, 3).unwrap();
        let p0 = IndexTuple::new(vec![0]).unwrap();
        assert_eq!(discrete_laplacian(&w, &indicator(&w, &[1]), &p0).unwrap(), 1.0);
        assert_eq!(discrete_laplacian(&w, &indicator(&w, &[0]), &p0).unwrap(), -1.0);
        let w2 = index_window(2, 4).unwrap();
        let p = IndexTuple::new(vec![0, 1]).unwrap();
        assert_eq!(discrete_laplacian(&w2, &indicator(&w2, &[0, 1]), &p).unwrap(), -2.0);
        assert!(discrete_laplacian(&w2, &indicator(&w2, &[0, 1]), &IndexTuple::new(vec![0, 9]).unwrap()).is_err());
    }

    #[test]
    fn rhs_examples() {
        let w = index_window(1, 3).unwrap();
        assert_eq!(flow_rhs(&w, &indicator(&w, &[0])).unwrap()[0], 0.0);
        assert_eq!(flow_rhs(&w, &indicator(&w, &[1])).unwrap()[0], 1.0);
    }

    #[test]
    fn both_rhs_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=3 {
            let w = index_window(m, 6).unwrap();
            let f: Vec<f64> = (0..w.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = flow_rhs(&w, &f).unwrap();
            let b = flow_rhs_shifts(&w, &f).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-15, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn stencil_has_half_weights() {
        let w = index_window(3, 8).unwrap();
        for i in 0..w.len() {
            let p = w.members()[i].as_slice();
            let st = w.stencil(i);
            assert!(st.iter().all(|&(t, _)| t != i));
            for &(t, weight) in &st {
                let q = w.members()[t].as_slice();
                let reflected = p[0] == 0 && q[0] == 1 && p[1..] == q[1..];
                assert_eq!(weight, if reflected { 2 } else { 1 });
                let diff: u32 = p.iter().zip(q).map(|(a, b)| a.abs_diff(*b)).sum();
                assert_eq!(diff, 1);
            }
        }
    }

    #[test]
    fn offsets_validate() {
        assert!(Offsets::parse(&["1", "2"]).is_ok());
        assert!(Offsets::parse(&["0"]).is_err());
        assert!(Offsets::parse(&["2", "1"]).is_err());
        assert_eq!(Offsets::parse(&["1", "2"]).unwrap().dimension(), 3);
    }
}
