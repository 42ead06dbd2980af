//! Decode-and-forward phase schedule and message split/merge plan.
//!
//! Phase `k` runs the `S_k x S_{k+1}` X network between layers `k` and
//! `k+1` for `T_k` symbols, carrying `T_k / (S_k + S_{k+1} - 1)` bits per
//! transmitter/receiver pair. Relays forward exactly what they decode, so the
//! bits a layer receives in phase `k-1` equal the bits it sends in phase `k`:
//!
//! ```text
//! T_{k-1} S_{k-1} / (S_{k-1} + S_k - 1) = T_k S_{k+1} / (S_k + S_{k+1} - 1)
//! ```
//!
//! Block lengths are the smallest integers satisfying this recurrence with
//! integral per-pair bit counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::analysis::achievable_sum_dof;
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, NetworkTopology};
use crate::num::{ExtCount, Scalar};
use crate::region::{check_demand, max_uniform_scale};
use crate::Rational;

fn finite_sizes(sizes: &[ExtCount]) -> Result<Vec<u64>> {
    if sizes.len() < 3 {
        return Err(Error::NoRelay);
    }
    sizes
        .iter()
        .enumerate()
        .map(|(k, s)| s.as_finite().ok_or(Error::InfiniteLayer(k)))
        .collect()
}

/// `T_k / T_0` for every phase, obtained by chaining the per-hop recurrence.
pub fn phase_ratios<T: Scalar>(sizes: &[ExtCount]) -> Result<Vec<T>> {
    let s: Vec<T> = finite_sizes(sizes)?.into_iter().map(T::from_count).collect();
    let mut ratios = vec![T::one()];
    for k in 1..s.len() - 1 {
        let prev = ratios[k - 1].clone();
        let next = prev * s[k - 1].clone() / s[k + 1].clone()
            * (s[k].clone() + s[k + 1].clone() - T::one())
            / (s[k - 1].clone() + s[k].clone() - T::one());
        ratios.push(next);
    }
    Ok(ratios)
}

/// Sum DoF of the schedule: bits of phase 0 over the total block length,
/// evaluated through [`phase_ratios`] rather than the harmonic closed form.
pub fn recurrence_sum_dof<T: Scalar>(sizes: &[ExtCount]) -> Result<T> {
    let ratios = phase_ratios::<T>(sizes)?;
    let (s0, s1) = (sizes[0].to_ext::<T>(), sizes[1].to_ext::<T>());
    let (s0, s1) = (s0.into_finite().unwrap(), s1.into_finite().unwrap());
    let first_hop = s0.clone() * s1.clone() / (s0 + s1 - T::one());
    let total = ratios.into_iter().fold(T::zero(), |acc, r| acc + r);
    Ok(first_hop / total)
}

/// One transmission phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan {
    pub hop: usize,
    pub tx_count: u64,
    pub rx_count: u64,
    pub block_length: u64,
    /// DoF of each of the `tx_count * rx_count` messages.
    pub per_pair_dof: Rational,
    pub per_pair_bits: Rational,
}

impl PhasePlan {
    pub fn messages(&self) -> u64 {
        self.tx_count * self.rx_count
    }

    pub fn total_bits(&self) -> Rational {
        self.per_pair_bits.clone() * int(self.messages())
    }
}

/// What a share of bits belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Content {
    /// Payload of the original message from `src` to `dst`.
    Message { dst: usize, src: usize },
    /// Filler that keeps `src`'s allocation uniform when its demand is below
    /// its share.
    Padding { src: usize },
}

/// Node of the split/merge DAG; all indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitNodeKind {
    SourceMessage { dst: usize, src: usize },
    SourcePadding { src: usize },
    /// Part of a source message headed to first-layer relay `relay`.
    Submessage { dst: usize, src: usize, relay: usize },
    PaddingPart { src: usize, relay: usize },
    /// The message `tx -> rx` transmitted in `phase`.
    Merged { phase: usize, tx: usize, rx: usize },
    /// Everything relay `node` of `layer` decoded, before re-splitting.
    RelayBuffer { layer: usize, node: usize },
    Destination { dst: usize },
}

impl SplitNodeKind {
    pub fn label(&self) -> String {
        match *self {
            SplitNodeKind::SourceMessage { dst, src } => format!("W[{},{}]", dst + 1, src + 1),
            SplitNodeKind::SourcePadding { src } => format!("pad[{}]", src + 1),
            SplitNodeKind::Submessage { dst, src, relay } => {
                format!("W[{},{}]_{}", dst + 1, src + 1, relay + 1)
            }
            SplitNodeKind::PaddingPart { src, relay } => format!("pad[{}]_{}", src + 1, relay + 1),
            SplitNodeKind::Merged { phase, tx, rx } => {
                format!("W[{},{}]@{}", rx + 1, tx + 1, phase)
            }
            SplitNodeKind::RelayBuffer { layer, node } => format!("R{}.{}", layer, node + 1),
            SplitNodeKind::Destination { dst } => format!("D{}", dst + 1),
        }
    }

    fn to_json(self) -> Value {
        match self {
            SplitNodeKind::SourceMessage { dst, src } => {
                json!({"kind": "source_message", "dst": dst + 1, "src": src + 1})
            }
            SplitNodeKind::SourcePadding { src } => json!({"kind": "source_padding", "src": src + 1}),
            SplitNodeKind::Submessage { dst, src, relay } => {
                json!({"kind": "submessage", "dst": dst + 1, "src": src + 1, "relay": relay + 1})
            }
            SplitNodeKind::PaddingPart { src, relay } => {
                json!({"kind": "padding_part", "src": src + 1, "relay": relay + 1})
            }
            SplitNodeKind::Merged { phase, tx, rx } => {
                json!({"kind": "merged", "phase": phase, "tx": tx + 1, "rx": rx + 1})
            }
            SplitNodeKind::RelayBuffer { layer, node } => {
                json!({"kind": "relay_buffer", "layer": layer, "node": node + 1})
            }
            SplitNodeKind::Destination { dst } => json!({"kind": "destination", "dst": dst + 1}),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitNode {
    pub kind: SplitNodeKind,
    pub bits: Rational,
    pub contents: BTreeMap<Content, Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitEdge {
    pub from: usize,
    pub to: usize,
    pub bits: Rational,
}

/// Layered DAG from source messages through every relay layer to the
/// destinations, with exact bit shares on every node and edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    /// Demand carried by the plan, on the antenna-split network.
    pub demand: DemandMatrix<Rational>,
    /// Largest factor the demand could be scaled by and stay feasible.
    pub boundary_scale: Rational,
    /// Bits of message `(j, i)` are `d_ji * bits_per_dof`.
    pub bits_per_dof: Rational,
    pub nodes: Vec<SplitNode>,
    pub edges: Vec<SplitEdge>,
}

impl SplitPlan {
    pub fn padded(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n.kind, SplitNodeKind::SourcePadding { .. }))
    }

    pub fn find(&self, kind: SplitNodeKind) -> Option<usize> {
        self.nodes.iter().position(|n| n.kind == kind)
    }

    pub fn inbound(&self, id: usize) -> impl Iterator<Item = &SplitEdge> {
        self.edges.iter().filter(move |e| e.to == id)
    }

    pub fn outbound(&self, id: usize) -> impl Iterator<Item = &SplitEdge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let mut v = n.kind.to_json();
                v["id"] = json!(id);
                v["bits"] = json!(n.bits.to_string());
                v["contents"] = n
                    .contents
                    .iter()
                    .map(|(c, b)| match c {
                        Content::Message { dst, src } => {
                            json!({"dst": dst + 1, "src": src + 1, "bits": b.to_string()})
                        }
                        Content::Padding { src } => {
                            json!({"padding_src": src + 1, "bits": b.to_string()})
                        }
                    })
                    .collect();
                v
            })
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| json!({"from": e.from, "to": e.to, "bits": e.bits.to_string()}))
            .collect();
        let demand: Value = serde_json::from_str(&self.demand.to_json()).expect("valid json");
        json!({
            "demand": demand["demands"],
            "boundary_scale": self.boundary_scale.to_string(),
            "padded": self.padded(),
            "bits_per_dof": self.bits_per_dof.to_string(),
            "nodes": nodes,
            "edges": edges,
        })
    }

    /// Graphviz rendering of the DAG.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph split_plan {\n  rankdir=LR;\n");
        for (id, n) in self.nodes.iter().enumerate() {
            let shape = match n.kind {
                SplitNodeKind::RelayBuffer { .. } => "box",
                SplitNodeKind::Destination { .. } => "doublecircle",
                SplitNodeKind::SourcePadding { .. } | SplitNodeKind::PaddingPart { .. } => "note",
                _ => "ellipse",
            };
            let _ = writeln!(
                out,
                "  n{id} [label=\"{}\\n{} bits\", shape={shape}];",
                n.kind.label(),
                n.bits
            );
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.bits);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Effective (antenna-split) layer sizes.
    pub sizes: Vec<u64>,
    pub phases: Vec<PhasePlan>,
    pub total_delay: u64,
    pub total_bits: Rational,
    pub sum_dof: Rational,
    pub split_plan: SplitPlan,
}

impl Schedule {
    pub fn to_json(&self) -> Value {
        let phases: Vec<Value> = self
            .phases
            .iter()
            .map(|p| {
                json!({
                    "hop": p.hop,
                    "tx_count": p.tx_count,
                    "rx_count": p.rx_count,
                    "block_length": p.block_length,
                    "messages": p.messages(),
                    "per_pair_dof": p.per_pair_dof.to_string(),
                    "per_pair_bits": p.per_pair_bits.to_string(),
                })
            })
            .collect();
        json!({
            "sizes": self.sizes,
            "phases": phases,
            "total_delay": self.total_delay,
            "total_bits": self.total_bits.to_string(),
            "sum_dof": self.sum_dof.to_string(),
            "split_plan": self.split_plan.to_json(),
        })
    }
}

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn to_u64(x: &Rational) -> Result<u64> {
    x.to_integer().to_u64().ok_or(Error::ScheduleTooLarge)
}

/// Minimal integer block lengths, with per-phase parameters.
pub fn phase_plans(sizes: &[ExtCount]) -> Result<Vec<PhasePlan>> {
    let s = finite_sizes(sizes)?;
    let ratios = phase_ratios::<Rational>(sizes)?;
    let pair_dof: Vec<Rational> = s
        .windows(2)
        .map(|w| Rational::new(BigInt::one(), BigInt::from(w[0] + w[1] - 1)))
        .collect();
    // T_0 must clear the denominator of every T_k/T_0 / (S_k + S_{k+1} - 1).
    let t0 = ratios
        .iter()
        .zip(&pair_dof)
        .map(|(r, p)| (r * p).denom().clone())
        .fold(BigInt::one(), |acc, d| acc.lcm(&d));
    let t0 = Rational::from_integer(t0);
    ratios
        .iter()
        .zip(pair_dof)
        .enumerate()
        .map(|(k, (r, per_pair_dof))| {
            let block = t0.clone() * r;
            debug_assert!(block.is_integer());
            Ok(PhasePlan {
                hop: k,
                tx_count: s[k],
                rx_count: s[k + 1],
                block_length: to_u64(&block)?,
                per_pair_bits: block * per_pair_dof.clone(),
                per_pair_dof,
            })
        })
        .collect()
}

/// Schedule for the full X-network demand: every source/destination pair
/// gets an equal share, scaled onto the region boundary.
pub fn integer_schedule(t: &NetworkTopology) -> Result<Schedule> {
    let split = t.antenna_split();
    let sizes = finite_sizes(&split.effective_sizes())?;
    let (srcs, dsts) = (sizes[0] as usize, sizes[sizes.len() - 1] as usize);
    let pattern = DemandMatrix::full(dsts, srcs, Rational::one());
    let boundary = max_uniform_scale(&split, &pattern)?;
    build_schedule(&split, boundary.demand)
}

/// Schedule carrying `demand` (indexed by physical nodes of `t`).
pub fn integer_schedule_for(t: &NetworkTopology, demand: &DemandMatrix<Rational>) -> Result<Schedule> {
    let split = t.antenna_split();
    finite_sizes(&split.effective_sizes())?;
    let demand = if t.has_antennas() { demand.antenna_split(t) } else { demand.clone() };
    build_schedule(&split, demand)
}

fn build_schedule(t: &NetworkTopology, demand: DemandMatrix<Rational>) -> Result<Schedule> {
    let sizes = finite_sizes(&t.effective_sizes())?;
    let phases = phase_plans(&t.effective_sizes())?;
    let total_delay = phases.iter().map(|p| p.block_length).sum::<u64>();
    let total_bits = phases[0].total_bits();
    let sum_dof = total_bits.clone() / int(total_delay);
    let split_plan = splitting_plan_with(t, &demand, &phases, int(total_delay))?;
    Ok(Schedule { sizes, phases, total_delay, total_bits, sum_dof, split_plan })
}

/// Split/merge plan for `d` over the minimal integer schedule of `t`.
pub fn splitting_plan(t: &NetworkTopology, d: &DemandMatrix<Rational>) -> Result<SplitPlan> {
    integer_schedule_for(t, d).map(|s| s.split_plan)
}

fn add_contents(into: &mut BTreeMap<Content, Rational>, from: &BTreeMap<Content, Rational>) {
    for (c, b) in from {
        *into.entry(*c).or_insert_with(Rational::zero) += b;
    }
}

fn divide_contents(c: &BTreeMap<Content, Rational>, parts: u64) -> BTreeMap<Content, Rational> {
    c.iter().map(|(k, v)| (*k, v / int(parts))).collect()
}

struct PlanBuilder {
    nodes: Vec<SplitNode>,
    edges: Vec<SplitEdge>,
}

impl PlanBuilder {
    fn node(&mut self, kind: SplitNodeKind, contents: BTreeMap<Content, Rational>) -> usize {
        let bits = contents.values().fold(Rational::zero(), |acc, b| acc + b);
        self.nodes.push(SplitNode { kind, bits, contents });
        self.nodes.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize) {
        let bits = self.nodes[from].bits.clone();
        self.edges.push(SplitEdge { from, to, bits });
    }

    /// Splits `from` into `parts` equal children, created by `kind(n)`.
    fn split(&mut self, from: usize, parts: u64, kind: impl Fn(usize) -> SplitNodeKind) -> Vec<usize> {
        let share = divide_contents(&self.nodes[from].contents, parts);
        (0..parts as usize)
            .map(|n| {
                let child = self.node(kind(n), share.clone());
                self.edges.push(SplitEdge { from, to: child, bits: self.nodes[child].bits.clone() });
                child
            })
            .collect()
    }

    /// Creates a node holding the union of `parents`.
    fn merge(&mut self, kind: SplitNodeKind, parents: &[usize]) -> usize {
        let mut contents = BTreeMap::new();
        for &p in parents {
            add_contents(&mut contents, &self.nodes[p].contents);
        }
        let id = self.node(kind, contents);
        for &p in parents {
            self.edge(p, id);
        }
        id
    }
}

fn splitting_plan_with(
    t: &NetworkTopology,
    d: &DemandMatrix<Rational>,
    phases: &[PhasePlan],
    bits_per_dof: Rational,
) -> Result<SplitPlan> {
    let s = finite_sizes(&t.effective_sizes())?;
    let relays = s.len() - 2;
    if d.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let verdict = check_demand(t, d)?;
    if !verdict.feasible {
        let names: Vec<_> = verdict.violations.iter().map(|v| v.constraint.clone()).collect();
        return Err(Error::Infeasible(names.join(", ")));
    }
    let boundary_scale = max_uniform_scale(t, d)?.scale;

    let mut b = PlanBuilder { nodes: Vec::new(), edges: Vec::new() };
    let source_budget = phases[0].per_pair_bits.clone() * int(s[1]);

    // merged[tx][rx]: the message sent in the current phase.
    let mut merged: Vec<Vec<usize>> = Vec::new();
    for src in 0..s[0] as usize {
        let mut parts: Vec<Vec<usize>> = Vec::new();
        let mut used = Rational::zero();
        for (dst, _, v) in d.active().filter(|e| e.1 == src) {
            let bits = v * &bits_per_dof;
            used += &bits;
            let msg = b.node(
                SplitNodeKind::SourceMessage { dst, src },
                BTreeMap::from([(Content::Message { dst, src }, bits)]),
            );
            parts.push(b.split(msg, s[1], |relay| SplitNodeKind::Submessage { dst, src, relay }));
        }
        let padding = source_budget.clone() - used;
        if padding.is_positive() {
            let pad = b.node(
                SplitNodeKind::SourcePadding { src },
                BTreeMap::from([(Content::Padding { src }, padding)]),
            );
            parts.push(b.split(pad, s[1], |relay| SplitNodeKind::PaddingPart { src, relay }));
        }
        let row = (0..s[1] as usize)
            .map(|rx| {
                let inputs: Vec<usize> = parts.iter().map(|p| p[rx]).collect();
                b.merge(SplitNodeKind::Merged { phase: 0, tx: src, rx }, &inputs)
            })
            .collect();
        merged.push(row);
    }

    for layer in 1..=relays {
        let mut next = Vec::with_capacity(s[layer] as usize);
        for node in 0..s[layer] as usize {
            let inputs: Vec<usize> = merged.iter().map(|row| row[node]).collect();
            let buffer = b.merge(SplitNodeKind::RelayBuffer { layer, node }, &inputs);
            if layer < relays {
                next.push(b.split(buffer, s[layer + 1], |rx| SplitNodeKind::Merged {
                    phase: layer,
                    tx: node,
                    rx,
                }));
            } else {
                next.push(reorganize(&mut b, buffer, layer, node, s[layer + 1], &phases[layer]));
            }
        }
        merged = next;
    }

    for dst in 0..s[relays + 1] as usize {
        let inputs: Vec<usize> = merged.iter().map(|row| row[dst]).collect();
        b.merge(SplitNodeKind::Destination { dst }, &inputs);
    }

    Ok(SplitPlan {
        demand: d.clone(),
        boundary_scale,
        bits_per_dof,
        nodes: b.nodes,
        edges: b.edges,
    })
}

/// Last relay layer: no further split, each destination gets exactly the
/// payload addressed to it, topped up with padding in source order.
fn reorganize(
    b: &mut PlanBuilder,
    buffer: usize,
    layer: usize,
    node: usize,
    dsts: u64,
    phase: &PhasePlan,
) -> Vec<usize> {
    let contents = b.nodes[buffer].contents.clone();
    let mut padding: Vec<(Content, Rational)> = contents
        .iter()
        .filter(|(c, _)| matches!(c, Content::Padding { .. }))
        .map(|(c, v)| (*c, v.clone()))
        .collect();
    let mut out = Vec::with_capacity(dsts as usize);
    for dst in 0..dsts as usize {
        let mut share: BTreeMap<Content, Rational> = contents
            .iter()
            .filter(|(c, _)| matches!(c, Content::Message { dst: j, .. } if *j == dst))
            .map(|(c, v)| (*c, v.clone()))
            .collect();
        let mut deficit =
            phase.per_pair_bits.clone() - share.values().fold(Rational::zero(), |acc, v| acc + v);
        for (c, available) in padding.iter_mut() {
            if !deficit.is_positive() {
                break;
            }
            let take = if *available < deficit { available.clone() } else { deficit.clone() };
            if take.is_positive() {
                *available -= &take;
                deficit -= &take;
                *share.entry(*c).or_insert_with(Rational::zero) += take;
            }
        }
        let id = b.node(SplitNodeKind::Merged { phase: layer, tx: node, rx: dst }, share);
        let bits = b.nodes[id].bits.clone();
        b.edges.push(SplitEdge { from: buffer, to: id, bits });
        out.push(id);
    }
    out
}

/// One checked identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn record(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Re-derives every schedule identity; failures are reported, never raised.
pub fn verify_schedule(s: &Schedule) -> VerificationReport {
    let mut r = VerificationReport::default();
    let phases = &s.phases;
    let plan = &s.split_plan;
    let width = |k: usize| int(s.sizes[k] + s.sizes[k + 1] - 1);

    let ordered = phases.len() + 1 == s.sizes.len()
        && phases.iter().enumerate().all(|(k, p)| {
            p.hop == k && p.tx_count == s.sizes[k] && p.rx_count == s.sizes[k + 1]
        });
    r.record("phases sequential", ordered, format!("{} phases", phases.len()));
    if !ordered {
        return r;
    }

    for (k, p) in phases.iter().enumerate() {
        let expect = int(p.block_length) / width(k);
        r.record(
            format!("phase {k} per-pair bits"),
            p.block_length > 0 && p.per_pair_bits == expect && p.per_pair_dof == Rational::one() / width(k),
            format!("{} = T_{k}/{}", p.per_pair_bits, width(k)),
        );
    }
    for k in 1..phases.len() {
        let received = int(phases[k - 1].block_length) * int(s.sizes[k - 1]) / width(k - 1);
        let sent = int(phases[k].block_length) * int(s.sizes[k + 1]) / width(k);
        r.record(
            format!("recurrence hop {k}"),
            received == sent,
            format!("received {received} vs forwarded {sent} bits per relay"),
        );
    }

    let delay: u64 = phases.iter().map(|p| p.block_length).sum();
    r.record("total delay", delay == s.total_delay, format!("{delay} vs {}", s.total_delay));
    let first = phases[0].total_bits();
    r.record(
        "sum dof",
        first == s.total_bits && s.sum_dof == s.total_bits.clone() / int(s.total_delay),
        format!("{} bits over {} symbols", s.total_bits, s.total_delay),
    );
    let sizes: Vec<ExtCount> = s.sizes.iter().map(|&n| ExtCount::Finite(n)).collect();
    let alpha = achievable_sum_dof::<Rational>(&sizes);
    r.record(
        "sum dof equals alpha",
        alpha.finite() == Some(&s.sum_dof),
        format!("{} vs {alpha}", s.sum_dof),
    );

    for (id, n) in plan.nodes.iter().enumerate() {
        let held = n.contents.values().fold(Rational::zero(), |acc, v| acc + v);
        let inbound: Vec<&SplitEdge> = plan.inbound(id).collect();
        let outbound: Vec<&SplitEdge> = plan.outbound(id).collect();
        let sum = |edges: &[&SplitEdge]| edges.iter().fold(Rational::zero(), |acc, e| acc + &e.bits);
        let ok = held == n.bits
            && (inbound.is_empty() || sum(&inbound) == n.bits)
            && (outbound.is_empty() || sum(&outbound) == n.bits)
            && !n.bits.is_negative();
        let phase_ok = match n.kind {
            SplitNodeKind::Merged { phase, .. } => n.bits == phases[phase].per_pair_bits,
            _ => true,
        };
        r.record(
            format!("conservation node {id} {}", n.kind.label()),
            ok && phase_ok,
            format!(
                "in {} / held {} / out {}",
                sum(&inbound),
                n.bits,
                sum(&outbound)
            ),
        );
    }

    for (dst, src, v) in plan.demand.active() {
        let want = v * &plan.bits_per_dof;
        let got = plan
            .find(SplitNodeKind::SourceMessage { dst, src })
            .map(|id| plan.nodes[id].bits.clone());
        r.record(
            format!("source share W[{},{}]", dst + 1, src + 1),
            got.as_ref() == Some(&want),
            format!("{want} bits expected"),
        );
    }
    for dst in 0..s.sizes[s.sizes.len() - 1] as usize {
        let Some(id) = plan.find(SplitNodeKind::Destination { dst }) else {
            r.record(format!("destination share D{}", dst + 1), false, "missing destination");
            continue;
        };
        let node = &plan.nodes[id];
        let mut ok = true;
        for (c, v) in &node.contents {
            if let Content::Message { dst: j, src } = c {
                ok &= *j == dst && *v == plan.demand.get(dst, *src) * &plan.bits_per_dof;
            }
        }
        for (j, src, v) in plan.demand.active() {
            if j == dst {
                ok &= node.contents.get(&Content::Message { dst, src }) == Some(&(v * &plan.bits_per_dof));
            }
        }
        r.record(
            format!("destination share D{}", dst + 1),
            ok,
            format!("payload {}", plan.demand.destination_total(dst) * &plan.bits_per_dof),
        );
    }
    r
}
