//! Topology families parameterized by `n` and their sum-DoF scaling law.
//!
//! A family is sampled at `n = 16, 32, ..., 4096`; the slope of `ln alpha`
//! against `ln n` is matched to linear (1), constant (0) or inverse (-1).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Deserialize;

use crate::analysis::achievable_sum_dof;
use crate::error::{Error, Result};
use crate::model::NetworkTopology;
use crate::num::{ExtCount, NumberOrString, Scalar};
use crate::Rational;

/// Sample grid for [`classify`].
pub const SAMPLE_GRID: [u64; 9] = [16, 32, 64, 128, 256, 512, 1024, 2048, 4096];

/// Maximum distance between the fitted slope and a class target.
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct PinnedLayer {
    pub layer: usize,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// Fixed depth; every layer is a fixed fraction `b_k / sum b` of `n` nodes.
    ProportionalFixedK { base: Vec<Rational> },
    /// Fixed depth; pinned layers keep a constant size and the remaining
    /// `n - pinned` nodes are shared proportionally among the others.
    PinnedLayerFixedK { base: Vec<Rational>, pinned: Vec<PinnedLayer> },
    /// `n` layers of `size` nodes each (`K = n - 2` relay layers).
    FixedSizesGrowingK { size: u64 },
    /// A fixed node layout whose antenna counts are all multiplied by `n`.
    AntennaScaled { topology: NetworkTopology },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawFamily {
    Proportional { base: Vec<NumberOrString> },
    Pinned { base: Vec<Option<NumberOrString>>, pinned: Vec<RawPinned> },
    GrowingDepth { size: u64 },
    AntennaScaled { topology: serde_json::Value },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPinned {
    layer: usize,
    nodes: u64,
}

fn parse_weight(raw: &NumberOrString) -> Result<Rational> {
    let text = raw.as_text();
    let v = Rational::parse_scalar(&text).map_err(|_| Error::Syntax(format!("invalid family weight {text:?}")))?;
    if !v.is_positive() {
        return Err(Error::Syntax(format!("family weight {text:?} must be positive")));
    }
    Ok(v)
}

impl FamilySpec {
    /// Parses a family document, e.g. `{"kind":"proportional","base":[1,1,1]}`,
    /// `{"kind":"pinned","base":[1,null,1],"pinned":[{"layer":1,"nodes":2}]}`,
    /// `{"kind":"growing_depth","size":2}` or
    /// `{"kind":"antenna_scaled","topology":{"layers":[...]}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawFamily = serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
        let spec = match raw {
            RawFamily::Proportional { base } => FamilySpec::ProportionalFixedK {
                base: base.iter().map(parse_weight).collect::<Result<_>>()?,
            },
            RawFamily::Pinned { base, pinned } => {
                let pinned: Vec<PinnedLayer> =
                    pinned.into_iter().map(|p| PinnedLayer { layer: p.layer, nodes: p.nodes }).collect();
                let base = base
                    .iter()
                    .enumerate()
                    .map(|(k, w)| match w {
                        Some(w) => parse_weight(w),
                        None if pinned.iter().any(|p| p.layer == k) => Ok(Rational::zero()),
                        None => Err(Error::Syntax(format!("layer {k} needs a weight"))),
                    })
                    .collect::<Result<_>>()?;
                FamilySpec::PinnedLayerFixedK { base, pinned }
            }
            RawFamily::GrowingDepth { size } => FamilySpec::FixedSizesGrowingK { size },
            RawFamily::AntennaScaled { topology } => FamilySpec::AntennaScaled {
                topology: NetworkTopology::from_json(&topology.to_string())?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Syntax(msg.to_string()));
        match self {
            FamilySpec::ProportionalFixedK { base } if base.len() < 2 => bad("base needs at least two layers"),
            FamilySpec::PinnedLayerFixedK { base, pinned } => {
                if base.len() < 2 {
                    return bad("base needs at least two layers");
                }
                if pinned.is_empty() {
                    return bad("pinned family needs a pinned layer");
                }
                if pinned.iter().any(|p| p.layer >= base.len() || p.nodes == 0) {
                    return bad("pinned layer out of range or empty");
                }
                if pinned.len() >= base.len() {
                    return bad("pinned family needs at least one free layer");
                }
                Ok(())
            }
            FamilySpec::FixedSizesGrowingK { size: 0 } => bad("layer size must be positive"),
            FamilySpec::AntennaScaled { topology } if !topology.is_finite() => {
                bad("antenna-scaled family needs a finite topology")
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::ProportionalFixedK { .. } => "proportional",
            FamilySpec::PinnedLayerFixedK { .. } => "pinned",
            FamilySpec::FixedSizesGrowingK { .. } => "growing_depth",
            FamilySpec::AntennaScaled { .. } => "antenna_scaled",
        }
    }
}

/// Nearest integer, at least one.
fn round_size(x: &Rational) -> u64 {
    x.round().to_integer().to_u64().unwrap_or(u64::MAX).max(1)
}

fn proportional_sizes(total: u64, weights: &[&Rational]) -> Vec<u64> {
    let sum = weights.iter().fold(Rational::zero(), |acc, w| acc + *w);
    let n = Rational::from_integer(BigInt::from(total));
    weights.iter().map(|w| round_size(&(n.clone() * *w / sum.clone()))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInstance {
    pub n: u64,
    pub topology: NetworkTopology,
    pub alpha: Rational,
}

pub fn evaluate_family(f: &FamilySpec, n: u64) -> Result<FamilyInstance> {
    let degenerate = |reason: &str| Error::DegenerateFamily { n, reason: reason.into() };
    let topology = match f {
        FamilySpec::ProportionalFixedK { base } => {
            let weights: Vec<&Rational> = base.iter().collect();
            NetworkTopology::from_sizes(&proportional_sizes(n, &weights))?
        }
        FamilySpec::PinnedLayerFixedK { base, pinned } => {
            let fixed: u64 = pinned.iter().map(|p| p.nodes).sum();
            if n <= fixed {
                return Err(degenerate("pinned layers use up all nodes"));
            }
            let free: Vec<usize> =
                (0..base.len()).filter(|k| !pinned.iter().any(|p| p.layer == *k)).collect();
            let weights: Vec<&Rational> = free.iter().map(|&k| &base[k]).collect();
            let shares = proportional_sizes(n - fixed, &weights);
            let mut sizes = vec![0; base.len()];
            for (k, s) in free.iter().zip(shares) {
                sizes[*k] = s;
            }
            for p in pinned {
                sizes[p.layer] = p.nodes;
            }
            NetworkTopology::from_sizes(&sizes)?
        }
        FamilySpec::FixedSizesGrowingK { size } => {
            if n < 2 {
                return Err(degenerate("needs at least two layers"));
            }
            NetworkTopology::from_sizes(&vec![*size; n as usize])?
        }
        FamilySpec::AntennaScaled { topology } => topology.scale_antennas(n),
    };
    let alpha = achievable_sum_dof::<Rational>(&topology.effective_sizes())
        .into_finite()
        .ok_or_else(|| degenerate("unbounded sum DoF"))?;
    Ok(FamilyInstance { n, topology, alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingClass {
    Linear,
    Constant,
    Inverse,
}

impl ScalingClass {
    pub const ALL: [ScalingClass; 3] = [ScalingClass::Linear, ScalingClass::Constant, ScalingClass::Inverse];

    pub fn target_slope(self) -> f64 {
        match self {
            ScalingClass::Linear => 1.0,
            ScalingClass::Constant => 0.0,
            ScalingClass::Inverse => -1.0,
        }
    }

    pub fn order(self) -> &'static str {
        match self {
            ScalingClass::Linear => "O(n)",
            ScalingClass::Constant => "O(1)",
            ScalingClass::Inverse => "O(1/n)",
        }
    }
}

impl fmt::Display for ScalingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVerdict {
    /// `None` when the slope is outside every tolerance window.
    pub class: Option<ScalingClass>,
    pub slope_estimate: f64,
    pub samples: Vec<(u64, Rational)>,
}

impl ScalingVerdict {
    /// `n,alpha_num,alpha_den,log_n,log_alpha` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,alpha_num,alpha_den,log_n,log_alpha\n");
        for (n, a) in &self.samples {
            out.push_str(&format!(
                "{n},{},{},{:.6},{:.6}\n",
                a.numer(),
                a.denom(),
                (*n as f64).ln(),
                ln_rational(a)
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        match self.class {
            Some(c) => format!("{c} (slope≈{:.2})", self.slope_estimate),
            None => format!("Unclassified (slope≈{:.2})", self.slope_estimate),
        }
    }
}

fn ln_rational(x: &Rational) -> f64 {
    // ln(p/q) without overflowing f64 on huge numerators or denominators.
    let bits = |v: &BigInt| v.bits() as i64;
    let shift = bits(x.numer()) - bits(x.denom());
    let scaled = x / pow2(shift);
    scaled.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

fn pow2(e: i64) -> Rational {
    let p = Rational::from_integer(BigInt::from(1) << e.unsigned_abs());
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Ordinary least-squares slope of `ys` on `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn classify_slope(slope: f64) -> Option<ScalingClass> {
    let hits: Vec<ScalingClass> = ScalingClass::ALL
        .into_iter()
        .filter(|c| (slope - c.target_slope()).abs() <= SLOPE_TOLERANCE)
        .collect();
    match hits[..] {
        [c] => Some(c),
        _ => None,
    }
}

/// Samples the family on [`SAMPLE_GRID`] and fits the log-log slope.
pub fn classify(f: &FamilySpec) -> Result<ScalingVerdict> {
    classify_on(f, &SAMPLE_GRID)
}

pub fn classify_on(f: &FamilySpec, grid: &[u64]) -> Result<ScalingVerdict> {
    let samples = grid
        .par_iter()
        .map(|&n| evaluate_family(f, n).map(|inst| (n, inst.alpha)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = samples.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, a)| ln_rational(a)).collect();
    let slope_estimate = least_squares_slope(&xs, &ys);
    Ok(ScalingVerdict { class: classify_slope(slope_estimate), slope_estimate, samples })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaScaleCheck {
    pub alpha_1: Rational,
    pub alpha_s: Rational,
    pub ratio: Rational,
}

/// Sum DoF before and after multiplying every antenna count by `s`.
pub fn antenna_scale_check(t: &NetworkTopology, s: u64) -> Result<AntennaScaleCheck> {
    if let Some(k) = t.effective_sizes().iter().position(|x| !x.is_finite()) {
        return Err(Error::InfiniteLayer(k));
    }
    let alpha = |t: &NetworkTopology| {
        achievable_sum_dof::<Rational>(&t.effective_sizes()).into_finite().expect("finite network")
    };
    let alpha_1 = alpha(t);
    let alpha_s = alpha(&t.scale_antennas(s));
    let ratio = alpha_s.clone() / alpha_1.clone();
    Ok(AntennaScaleCheck { alpha_1, alpha_s, ratio })
}

/// Effective sizes of an instance, for reporting.
pub fn instance_sizes(inst: &FamilyInstance) -> Vec<ExtCount> {
    inst.topology.effective_sizes()
}
