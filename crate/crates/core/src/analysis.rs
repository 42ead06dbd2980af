//! Closed-form achievable and cut-set sum DoF, their gap, optimality and the
//! ultimate-capacity quantities, all over effective layer sizes.
//!
//! Every hop `k` between layers `k` and `k+1` is a single-hop X network with
//! `S_k` transmitters and `S_{k+1}` receivers. Hops combine like capacitors
//! in series: the network value is the harmonic combination of hop values.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NetworkTopology;
use crate::num::{Ext, ExtCount, Scalar};

/// Sum DoF of an `m x n` single-antenna X network, `mn / (m + n - 1)`.
///
/// With one side infinite this is the limit as that side grows, i.e. the
/// finite side.
pub fn hop_achievable_dof<T: Scalar>(m: ExtCount, n: ExtCount) -> Ext<T> {
    match (m, n) {
        (ExtCount::Finite(m), ExtCount::Finite(n)) => {
            let (m, n) = (T::from_count(m), T::from_count(n));
            Ext::Finite(m.clone() * n.clone() / (m + n - T::one()))
        }
        (ExtCount::Finite(x), ExtCount::Infinite) | (ExtCount::Infinite, ExtCount::Finite(x)) => {
            Ext::Finite(T::from_count(x))
        }
        (ExtCount::Infinite, ExtCount::Infinite) => Ext::Infinite,
    }
}

/// Cut-set DoF of one hop after merging each relay layer into a super-node.
pub fn hop_cutset_dof<T: Scalar>(m: ExtCount, n: ExtCount) -> Ext<T> {
    m.min(n).to_ext()
}

fn hops(sizes: &[ExtCount]) -> impl Iterator<Item = (ExtCount, ExtCount)> + '_ {
    assert!(sizes.len() >= 2, "a topology has at least two layers");
    sizes.windows(2).map(|w| (w[0], w[1]))
}

pub fn hop_achievable_dofs<T: Scalar>(sizes: &[ExtCount]) -> Vec<Ext<T>> {
    hops(sizes).map(|(m, n)| hop_achievable_dof(m, n)).collect()
}

pub fn hop_cutset_dofs<T: Scalar>(sizes: &[ExtCount]) -> Vec<Ext<T>> {
    hops(sizes).map(|(m, n)| hop_cutset_dof(m, n)).collect()
}

/// `alpha` with `1/alpha = sum_k 1/alpha_k`.
pub fn achievable_sum_dof<T: Scalar>(sizes: &[ExtCount]) -> Ext<T> {
    Ext::series(&hop_achievable_dofs::<T>(sizes))
}

/// `beta` with `1/beta = sum_k 1/beta_k`.
pub fn cutset_sum_dof<T: Scalar>(sizes: &[ExtCount]) -> Ext<T> {
    Ext::series(&hop_cutset_dofs::<T>(sizes))
}

/// Hops whose smaller endpoint exceeds one.
pub fn bounding_set(sizes: &[ExtCount]) -> BTreeSet<usize> {
    hops(sizes)
        .enumerate()
        .filter(|(_, (m, n))| m.min(n) > &ExtCount::Finite(1))
        .map(|(k, _)| k)
        .collect()
}

/// Exact inverse gap `1/alpha - 1/beta` and its two successive upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = "T: Scalar"))]
pub struct InverseGap<T: Scalar> {
    pub exact: Ext<T>,
    /// `sum_{k in L} 1 / max(S_k, S_{k+1})`
    pub bound1: Ext<T>,
    /// `|L| / min_{k in L} S_k`
    pub bound2: Ext<T>,
}

pub fn inverse_gap<T: Scalar>(sizes: &[ExtCount]) -> InverseGap<T> {
    let exact = hops(sizes).fold(Ext::zero(), |acc: Ext<T>, (m, n)| match (m, n) {
        (ExtCount::Finite(a), ExtCount::Finite(b)) => {
            let term = T::from_count(a.min(b) - 1) / T::from_count(a * b);
            acc.add(&Ext::Finite(term))
        }
        _ => acc,
    });
    let set = bounding_set(sizes);
    let bound1 = set.iter().fold(Ext::zero(), |acc: Ext<T>, &k| {
        acc.add(&sizes[k].max(sizes[k + 1]).to_ext::<T>().recip())
    });
    let bound2 = match set.iter().map(|&k| sizes[k]).min() {
        None => Ext::zero(),
        Some(smallest) => {
            Ext::Finite(T::from_count(set.len() as u64)).mul(&smallest.to_ext::<T>().recip())
        }
    };
    InverseGap { exact, bound1, bound2 }
}

/// Absolute gap `beta - alpha` and the fractional-gap bound `beta (1/alpha - 1/beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = "T: Scalar"))]
pub struct AbsoluteGap<T: Scalar> {
    #[serde(with = "crate::num::as_text")]
    pub beta_minus_alpha: T,
    #[serde(with = "crate::num::as_text")]
    pub fractional_bound: T,
}

pub fn absolute_and_fractional_gap<T: Scalar>(sizes: &[ExtCount]) -> Result<AbsoluteGap<T>> {
    let alpha = achievable_sum_dof::<T>(sizes).into_finite().ok_or(Error::UnboundedGap)?;
    let beta = cutset_sum_dof::<T>(sizes).into_finite().ok_or(Error::UnboundedGap)?;
    let inverse = T::one() / alpha.clone() - T::one() / beta.clone();
    Ok(AbsoluteGap {
        beta_minus_alpha: beta.clone() - alpha,
        fractional_bound: beta * inverse,
    })
}

/// True iff every adjacent pair of layers contains a size-1 or infinite layer.
pub fn is_optimal(sizes: &[ExtCount]) -> bool {
    hops(sizes).all(|(m, n)| [m, n].iter().any(|s| s.is_one() || !s.is_finite()))
}

fn finite_endpoints(s0: ExtCount, sk1: ExtCount) -> Result<(u64, u64)> {
    match (s0.as_finite(), sk1.as_finite()) {
        (Some(a), Some(b)) => Ok((a, b)),
        (None, _) => Err(Error::InfiniteEndpoint(0)),
        (_, None) => Err(Error::InfiniteEndpoint(1)),
    }
}

/// Sum DoF reached when every relay layer is infinite: `(1/S_0 + 1/S_{K+1})^-1`.
pub fn ultimate_capacity<T: Scalar>(s0: ExtCount, sk1: ExtCount) -> Result<T> {
    let (a, b) = finite_endpoints(s0, sk1)?;
    let (a, b) = (T::from_count(a), T::from_count(b));
    Ok(a.clone() * b.clone() / (a + b))
}

/// Fraction of the single-hop X-network DoF that survives relaying:
/// `1 - 1/(S_0 + S_{K+1})`.
pub fn relay_loss_factor<T: Scalar>(s0: ExtCount, sk1: ExtCount) -> Result<T> {
    let (a, b) = finite_endpoints(s0, sk1)?;
    Ok(T::one() - T::one() / T::from_count(a + b))
}

/// All bounds and derived quantities for one topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = "T: Scalar"))]
pub struct AnalysisReport<T: Scalar> {
    pub sizes: Vec<ExtCount>,
    pub alpha: Ext<T>,
    pub alpha_k: Vec<Ext<T>>,
    pub beta: Ext<T>,
    pub beta_k: Vec<Ext<T>>,
    pub inverse_gap: InverseGap<T>,
    /// `beta - alpha`; absent when both are infinite.
    pub absolute_gap: Option<Ext<T>>,
    pub fractional_gap_bound: Option<Ext<T>>,
    pub bounding_set: BTreeSet<usize>,
    pub optimal: bool,
    /// Present when both endpoint layers are finite.
    pub ultimate_capacity: Option<Ext<T>>,
    pub gamma: Option<Ext<T>>,
}

/// Full report, computed on the antenna-split effective sizes.
pub fn analyze<T: Scalar>(t: &NetworkTopology) -> AnalysisReport<T> {
    analyze_sizes(&t.effective_sizes())
}

pub fn analyze_sizes<T: Scalar>(sizes: &[ExtCount]) -> AnalysisReport<T> {
    let gap = absolute_and_fractional_gap::<T>(sizes).ok();
    let s0 = sizes[0];
    let sk1 = sizes[sizes.len() - 1];
    AnalysisReport {
        sizes: sizes.to_vec(),
        alpha: achievable_sum_dof(sizes),
        alpha_k: hop_achievable_dofs(sizes),
        beta: cutset_sum_dof(sizes),
        beta_k: hop_cutset_dofs(sizes),
        inverse_gap: inverse_gap(sizes),
        absolute_gap: gap.as_ref().map(|g| Ext::Finite(g.beta_minus_alpha.clone())),
        fractional_gap_bound: gap.map(|g| Ext::Finite(g.fractional_bound)),
        bounding_set: bounding_set(sizes),
        optimal: is_optimal(sizes),
        ultimate_capacity: ultimate_capacity(s0, sk1).ok().map(Ext::Finite),
        gamma: relay_loss_factor(s0, sk1).ok().map(Ext::Finite),
    }
}
