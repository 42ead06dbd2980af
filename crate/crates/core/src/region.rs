//! Membership of demand matrices in the achievable DoF region.
//!
//! The region is the closed polytope
//!
//! ```text
//! sum_{j,i} d_ji <= alpha
//! sum_j d_ji     <= alpha * A_0^i / S_0         for every source i
//! sum_i d_ji     <= alpha * A_{K+1}^j / S_{K+1} for every destination j
//! ```
//!
//! where `A` are per-node antenna counts and `S` the antenna sums. For
//! single-antenna endpoints the shares reduce to `1/|V_0|` and `1/|V_{K+1}|`.

use serde::{Deserialize, Serialize};

use crate::analysis::achievable_sum_dof;
use crate::error::{Error, Result};
use crate::model::{validate_demand, DemandMatrix, LayerSpec, NetworkTopology};
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = "T: Scalar"))]
pub struct ConstraintValue<T: Scalar> {
    /// `total`, `src:<i>` or `dst:<j>`, 1-based.
    pub constraint: String,
    #[serde(with = "crate::num::as_text")]
    pub lhs: T,
    #[serde(with = "crate::num::as_text")]
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = "T: Scalar"))]
pub struct RegionVerdict<T: Scalar> {
    pub feasible: bool,
    pub violations: Vec<ConstraintValue<T>>,
    pub binding: Vec<String>,
}

impl<T: Scalar> RegionVerdict<T> {
    fn from_constraints(constraints: Vec<ConstraintValue<T>>) -> Self {
        let binding = constraints
            .iter()
            .filter(|c| c.lhs == c.rhs)
            .map(|c| c.constraint.clone())
            .collect();
        let violations: Vec<_> = constraints.into_iter().filter(|c| c.lhs > c.rhs).collect();
        RegionVerdict { feasible: violations.is_empty(), violations, binding }
    }
}

/// How an endpoint node's share of `alpha` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharePath {
    /// `1 / |V|` per node; only valid for single-antenna layers.
    Uniform,
    /// `A^m / sum A` per node.
    AntennaWeighted,
}

fn endpoint_share<T: Scalar>(layer: &LayerSpec, m: usize, path: SharePath) -> T {
    let count = layer.node_count().as_finite().expect("endpoint checked finite");
    match path {
        SharePath::Uniform => T::one() / T::from_count(count),
        SharePath::AntennaWeighted => {
            let total = layer.effective_size().as_finite().expect("finite layer");
            T::from_count(layer.antennas_of(m)) / T::from_count(total)
        }
    }
}

fn preferred_path(t: &NetworkTopology) -> SharePath {
    let plain = |l: &LayerSpec| matches!(l, LayerSpec::Nodes(_));
    if plain(t.sources()) && plain(t.destinations()) {
        SharePath::Uniform
    } else {
        SharePath::AntennaWeighted
    }
}

/// Left- and right-hand sides of every region constraint for `d`.
pub fn region_constraints<T: Scalar>(
    t: &NetworkTopology,
    d: &DemandMatrix<T>,
    path: SharePath,
) -> Result<Vec<ConstraintValue<T>>> {
    let last = t.layers().len() - 1;
    let srcs = t.sources().node_count().as_finite().ok_or(Error::InfiniteEndpoint(0))?;
    let dsts = t.destinations().node_count().as_finite().ok_or(Error::InfiniteEndpoint(last))?;
    if path == SharePath::Uniform && preferred_path(t) != SharePath::Uniform {
        return Err(Error::InvalidDemand(
            "uniform shares need single-antenna endpoint layers".into(),
        ));
    }
    if let Err(issues) = validate_demand(t, d) {
        let text: Vec<String> = issues.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidDemand(text.join("; ")));
    }
    let alpha = achievable_sum_dof::<T>(&t.effective_sizes())
        .into_finite()
        .expect("finite endpoints bound alpha");

    let mut out = Vec::with_capacity(1 + (srcs + dsts) as usize);
    out.push(ConstraintValue { constraint: "total".into(), lhs: d.total(), rhs: alpha.clone() });
    for i in 0..srcs as usize {
        out.push(ConstraintValue {
            constraint: format!("src:{}", i + 1),
            lhs: d.source_total(i),
            rhs: alpha.clone() * endpoint_share(t.sources(), i, path),
        });
    }
    for j in 0..dsts as usize {
        out.push(ConstraintValue {
            constraint: format!("dst:{}", j + 1),
            lhs: d.destination_total(j),
            rhs: alpha.clone() * endpoint_share(t.destinations(), j, path),
        });
    }
    Ok(out)
}

/// Checks every constraint exactly; the boundary counts as feasible.
pub fn check_demand<T: Scalar>(t: &NetworkTopology, d: &DemandMatrix<T>) -> Result<RegionVerdict<T>> {
    check_demand_with(t, d, preferred_path(t))
}

pub fn check_demand_with<T: Scalar>(
    t: &NetworkTopology,
    d: &DemandMatrix<T>,
    path: SharePath,
) -> Result<RegionVerdict<T>> {
    region_constraints(t, d, path).map(RegionVerdict::from_constraints)
}

/// A demand pattern scaled onto the region boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDemand<T: Scalar> {
    pub scale: T,
    pub demand: DemandMatrix<T>,
    pub verdict: RegionVerdict<T>,
}

/// Largest `t*` with `t* * pattern` inside the region.
pub fn max_uniform_scale<T: Scalar>(
    t: &NetworkTopology,
    pattern: &DemandMatrix<T>,
) -> Result<ScaledDemand<T>> {
    if pattern.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let constraints = region_constraints(t, pattern, preferred_path(t))?;
    let scale = constraints
        .iter()
        .filter(|c| c.lhs > T::zero())
        .map(|c| c.rhs.clone() / c.lhs.clone())
        .reduce(|a, b| if b < a { b } else { a })
        .expect("a nonzero pattern loads the total constraint");
    let demand = pattern.scaled(&scale);
    let verdict = check_demand(t, &demand)?;
    Ok(ScaledDemand { scale, demand, verdict })
}
