//! Layered topologies, demand matrices and their JSON documents.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{is_infinity_token, ExtCount, NumberOrString, Scalar};

/// One layer of the network: a node count (single-antenna nodes, possibly
/// infinite) or an explicit per-node antenna list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LayerSpec {
    Nodes(ExtCount),
    Antennas(Vec<u64>),
}

impl LayerSpec {
    pub fn nodes(n: u64) -> Self {
        LayerSpec::Nodes(ExtCount::Finite(n))
    }

    pub fn infinite() -> Self {
        LayerSpec::Nodes(ExtCount::Infinite)
    }

    /// Number of physical nodes.
    pub fn node_count(&self) -> ExtCount {
        match self {
            LayerSpec::Nodes(n) => *n,
            LayerSpec::Antennas(a) => ExtCount::Finite(a.len() as u64),
        }
    }

    /// Number of virtual single-antenna nodes after antenna splitting.
    pub fn effective_size(&self) -> ExtCount {
        match self {
            LayerSpec::Nodes(n) => *n,
            LayerSpec::Antennas(a) => ExtCount::Finite(a.iter().sum()),
        }
    }

    /// Antenna count of node `m` (0-based); 1 for single-antenna layers.
    pub fn antennas_of(&self, m: usize) -> u64 {
        match self {
            LayerSpec::Nodes(_) => 1,
            LayerSpec::Antennas(a) => a[m],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.node_count().is_finite()
    }

    fn validate(&self, layer: usize) -> Result<()> {
        let invalid = |reason: String| Error::InvalidLayer { layer, reason };
        match self {
            LayerSpec::Nodes(ExtCount::Finite(0)) => Err(invalid("zero nodes".into())),
            LayerSpec::Nodes(_) => Ok(()),
            LayerSpec::Antennas(a) if a.is_empty() => Err(invalid("empty antenna list".into())),
            LayerSpec::Antennas(a) => match a.iter().position(|&x| x == 0) {
                Some(m) => Err(invalid(format!("node {} has zero antennas", m + 1))),
                None => Ok(()),
            },
        }
    }
}

/// Layers `0..=K+1`: sources, `K` relay layers, destinations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkTopology {
    layers: Vec<LayerSpec>,
}

impl NetworkTopology {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::TooFewLayers { min: 2, got: layers.len() });
        }
        for (k, layer) in layers.iter().enumerate() {
            layer.validate(k)?;
        }
        Ok(Self { layers })
    }

    /// Single-antenna topology from node counts.
    pub fn from_counts(counts: &[ExtCount]) -> Result<Self> {
        Self::new(counts.iter().map(|&c| LayerSpec::Nodes(c)).collect())
    }

    /// Single-antenna topology from finite node counts.
    pub fn from_sizes(sizes: &[u64]) -> Result<Self> {
        Self::new(sizes.iter().map(|&n| LayerSpec::nodes(n)).collect())
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Number of relay layers.
    pub fn relay_layers(&self) -> usize {
        self.layers.len() - 2
    }

    pub fn sources(&self) -> &LayerSpec {
        &self.layers[0]
    }

    pub fn destinations(&self) -> &LayerSpec {
        &self.layers[self.layers.len() - 1]
    }

    pub fn has_antennas(&self) -> bool {
        self.layers.iter().any(|l| matches!(l, LayerSpec::Antennas(_)))
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(LayerSpec::is_finite)
    }

    /// Per-layer effective sizes `S_k` (antenna sums, or node counts).
    pub fn effective_sizes(&self) -> Vec<ExtCount> {
        self.layers.iter().map(LayerSpec::effective_size).collect()
    }

    /// The equivalent single-antenna network where every antenna is a node.
    pub fn antenna_split(&self) -> NetworkTopology {
        NetworkTopology {
            layers: self.effective_sizes().into_iter().map(LayerSpec::Nodes).collect(),
        }
    }

    /// Every antenna count multiplied by `s`; single-antenna nodes get `s`.
    pub fn scale_antennas(&self, s: u64) -> NetworkTopology {
        let layers = self
            .layers
            .iter()
            .map(|layer| match layer {
                LayerSpec::Antennas(a) => LayerSpec::Antennas(a.iter().map(|x| x * s).collect()),
                LayerSpec::Nodes(ExtCount::Finite(n)) if s != 1 => {
                    LayerSpec::Antennas(vec![s; *n as usize])
                }
                other => other.clone(),
            })
            .collect();
        NetworkTopology { layers }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTopology =
            serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
        let layers = raw
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, l)| l.into_spec(k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawTopology::from(self)).expect("topology serializes")
    }
}

impl fmt::Display for NetworkTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, layer) in self.layers.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            match layer {
                LayerSpec::Nodes(n) => write!(f, "{n}")?,
                LayerSpec::Antennas(a) => write!(f, "{a:?}")?,
            }
        }
        f.write_str("]")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    layers: Vec<RawLayer>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<NumberOrString>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    antennas: Option<Vec<u64>>,
}

impl RawLayer {
    fn into_spec(self, layer: usize) -> Result<LayerSpec> {
        let invalid = |reason: String| Error::InvalidLayer { layer, reason };
        let nodes = match self.nodes {
            None => None,
            Some(raw) => {
                let text = raw.as_text();
                if is_infinity_token(&text) {
                    Some(ExtCount::Infinite)
                } else {
                    let n: u64 = text
                        .trim()
                        .parse()
                        .map_err(|_| invalid(format!("invalid node count {text:?}")))?;
                    if n == 0 {
                        return Err(invalid("zero nodes".into()));
                    }
                    Some(ExtCount::Finite(n))
                }
            }
        };
        match (nodes, self.antennas) {
            (None, None) => Err(invalid("needs \"nodes\" or \"antennas\"".into())),
            (Some(n), None) => Ok(LayerSpec::Nodes(n)),
            (Some(ExtCount::Infinite), Some(_)) => {
                Err(invalid("infinite layer cannot carry an antenna list".into()))
            }
            (Some(ExtCount::Finite(n)), Some(a)) if n as usize != a.len() => Err(invalid(
                format!("node count {n} does not match {} antenna entries", a.len()),
            )),
            (_, Some(a)) => Ok(LayerSpec::Antennas(a)),
        }
    }
}

impl From<&NetworkTopology> for RawTopology {
    fn from(t: &NetworkTopology) -> Self {
        let layers = t
            .layers
            .iter()
            .map(|l| match l {
                LayerSpec::Nodes(ExtCount::Finite(n)) => RawLayer {
                    nodes: Some(NumberOrString::Number((*n).into())),
                    antennas: None,
                },
                LayerSpec::Nodes(ExtCount::Infinite) => RawLayer {
                    nodes: Some(NumberOrString::Text("inf".into())),
                    antennas: None,
                },
                LayerSpec::Antennas(a) => RawLayer { nodes: None, antennas: Some(a.clone()) },
            })
            .collect();
        RawTopology { layers }
    }
}

/// Per-message DoF values `d[dst][src]`, 0-based internally; absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix<T> {
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> Default for DemandMatrix<T> {
    fn default() -> Self {
        Self { entries: BTreeMap::new() }
    }
}

impl<T: Scalar> DemandMatrix<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(dst, src, dof)` triples with 0-based indices.
    pub fn from_entries<I: IntoIterator<Item = (usize, usize, T)>>(entries: I) -> Self {
        let mut d = Self::new();
        for (dst, src, v) in entries {
            d.set(dst, src, v);
        }
        d
    }

    /// Every (dst, src) pair of a `dsts x srcs` network set to `value`.
    pub fn full(dsts: usize, srcs: usize, value: T) -> Self {
        Self::from_entries(
            (0..dsts).flat_map(|j| (0..srcs).map(move |i| (j, i))).map(|(j, i)| (j, i, value.clone())),
        )
    }

    pub fn set(&mut self, dst: usize, src: usize, value: T) {
        self.entries.insert((dst, src), value);
    }

    pub fn get(&self, dst: usize, src: usize) -> T {
        self.entries.get(&(dst, src)).cloned().unwrap_or_else(T::zero)
    }

    /// Stored entries in (dst, src) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.entries.iter().map(|(&(j, i), v)| (j, i, v))
    }

    /// Stored entries with a nonzero value.
    pub fn active(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.entries().filter(|(_, _, v)| !v.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    /// Outgoing sum of source `src`: `sum_j d[j][src]`.
    pub fn source_total(&self, src: usize) -> T {
        self.entries().filter(|e| e.1 == src).fold(T::zero(), |acc, e| acc + e.2.clone())
    }

    /// Incoming sum of destination `dst`: `sum_i d[dst][i]`.
    pub fn destination_total(&self, dst: usize) -> T {
        self.entries().filter(|e| e.0 == dst).fold(T::zero(), |acc, e| acc + e.2.clone())
    }

    pub fn total(&self) -> T {
        self.entries.values().fold(T::zero(), |acc, v| acc + v.clone())
    }

    pub fn scaled(&self, factor: &T) -> Self {
        Self {
            entries: self.entries.iter().map(|(k, v)| (*k, v.clone() * factor.clone())).collect(),
        }
    }

    /// Maps a demand on physical nodes to the antenna-split network: each
    /// message spreads evenly over all (rx antenna, tx antenna) pairs.
    pub fn antenna_split(&self, t: &NetworkTopology) -> Self {
        let src_layer = t.sources();
        let dst_layer = t.destinations();
        let offsets = |layer: &LayerSpec, len: usize| -> Vec<u64> {
            let mut acc = 0;
            (0..len)
                .map(|m| {
                    let start = acc;
                    acc += layer.antennas_of(m);
                    start
                })
                .collect()
        };
        let max_src = self.entries.keys().map(|k| k.1 + 1).max().unwrap_or(0);
        let max_dst = self.entries.keys().map(|k| k.0 + 1).max().unwrap_or(0);
        let src_off = offsets(src_layer, max_src);
        let dst_off = offsets(dst_layer, max_dst);
        let mut out = Self::new();
        for (j, i, v) in self.entries() {
            let a_src = src_layer.antennas_of(i);
            let a_dst = dst_layer.antennas_of(j);
            let share = v.clone() / T::from_count(a_src * a_dst);
            for vj in 0..a_dst {
                for vi in 0..a_src {
                    out.set((dst_off[j] + vj) as usize, (src_off[i] + vi) as usize, share.clone());
                }
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDemandDoc {
    demands: Vec<RawDemand>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDemand {
    dst: usize,
    src: usize,
    dof: NumberOrString,
}

impl<T: Scalar> DemandMatrix<T>
where
    T::Err: fmt::Display,
{
    /// Parses `{"demands":[{"dst":j,"src":i,"dof":"p/q"},...]}` with 1-based indices.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDemandDoc =
            serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
        let mut d = Self::new();
        for (n, e) in raw.demands.into_iter().enumerate() {
            if e.dst == 0 || e.src == 0 {
                return Err(Error::InvalidDemand(format!(
                    "entry {}: indices are 1-based",
                    n + 1
                )));
            }
            let text = match e.dof {
                NumberOrString::Number(x) => x.to_string(),
                NumberOrString::Text(s) => s,
            };
            let v = T::parse_scalar(&text)
                .map_err(|err| Error::InvalidDemand(format!("entry {}: dof {err}", n + 1)))?;
            let key = (e.dst - 1, e.src - 1);
            if d.entries.insert(key, v).is_some() {
                return Err(Error::InvalidDemand(format!(
                    "duplicate entry dst={} src={}",
                    e.dst, e.src
                )));
            }
        }
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        let demands = self
            .entries()
            .map(|(j, i, v)| RawDemand { dst: j + 1, src: i + 1, dof: NumberOrString::Text(v.to_string()) })
            .collect();
        serde_json::to_string(&RawDemandDoc { demands }).expect("demand serializes")
    }
}

/// A single problem found by [`validate_demand`]; indices print 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DemandIssue {
    OutOfRange { dst: usize, src: usize, dsts: u64, srcs: u64 },
    Negative { dst: usize, src: usize },
    InfiniteEndpoint { layer: usize },
}

impl fmt::Display for DemandIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemandIssue::OutOfRange { dst, src, dsts, srcs } => write!(
                f,
                "entry dst={} src={} is outside the {dsts}x{srcs} destination x source range",
                dst + 1,
                src + 1
            ),
            DemandIssue::Negative { dst, src } => {
                write!(f, "entry dst={} src={} is negative", dst + 1, src + 1)
            }
            DemandIssue::InfiniteEndpoint { layer } => {
                write!(f, "layer {layer} is infinite; demands need finite endpoints")
            }
        }
    }
}

/// Index-bound and sign checks. Region membership is checked separately.
pub fn validate_demand<T: Scalar>(
    t: &NetworkTopology,
    d: &DemandMatrix<T>,
) -> std::result::Result<(), Vec<DemandIssue>> {
    let mut issues = Vec::new();
    let last = t.layers().len() - 1;
    let srcs = t.sources().node_count().as_finite();
    let dsts = t.destinations().node_count().as_finite();
    if srcs.is_none() {
        issues.push(DemandIssue::InfiniteEndpoint { layer: 0 });
    }
    if dsts.is_none() {
        issues.push(DemandIssue::InfiniteEndpoint { layer: last });
    }
    for (j, i, v) in d.entries() {
        if let (Some(ns), Some(nd)) = (srcs, dsts) {
            if j as u64 >= nd || i as u64 >= ns {
                issues.push(DemandIssue::OutOfRange { dst: j, src: i, dsts: nd, srcs: ns });
            }
        }
        if *v < T::zero() {
            issues.push(DemandIssue::Negative { dst: j, src: i });
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}
