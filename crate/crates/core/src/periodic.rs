//! Periodic evolving graphs, temporal paths and flows, and the reduction to
//! a static emulated graph.
//!
//! Time is counted in whole timeslots. A temporal path starting in slot
//! `t1 < period` stands for its whole periodic family; flows are assigned to
//! those foundation paths only.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::demand::DemandMatrix;
use crate::error::{Error, Result};
use crate::topology::{bfs, Digraph, Edge, Matching};

/// Absolute slack, after normalising the largest capacity to 1, used by
/// every capacity comparison.
pub const CAPACITY_TOL: f64 = 1e-9;

/// One circuit held for a timeslot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub edge: Edge,
    pub switch: usize,
    /// bits per second
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGraph {
    nt: usize,
    nu: usize,
    delta: f64,
    delta_r: f64,
    slots: Vec<Vec<Circuit>>,
}

/// Builds the evolving graph whose slot `t` is the union over switches of
/// each switch's `t`-th matching.
pub fn build_periodic_graph(
    nt: usize,
    nu: usize,
    delta: f64,
    delta_r: f64,
    schedules: &[Vec<Matching>],
    capacity: f64,
) -> Result<PeriodicGraph> {
    if schedules.is_empty() {
        return Err(Error::InvalidParameter("at least one switch is required".into()));
    }
    if schedules.len() > nu {
        return Err(Error::InvalidParameter(format!(
            "{} switches but only {nu} uplinks per ToR",
            schedules.len()
        )));
    }
    let lens: Vec<usize> = schedules.iter().map(Vec::len).collect();
    if lens.iter().any(|&l| l != lens[0]) || lens[0] == 0 {
        return Err(Error::ScheduleMismatch(lens));
    }
    for m in schedules.iter().flatten() {
        if m.len() != nt {
            return Err(Error::InvalidMatching(format!(
                "matching has {} ports, expected {nt}",
                m.len()
            )));
        }
    }
    let period = lens[0];
    let slots = (0..period)
        .map(|t| {
            schedules
                .iter()
                .enumerate()
                .flat_map(|(switch, sched)| {
                    sched[t].edges().map(move |edge| Circuit {
                        edge,
                        switch,
                        capacity,
                    })
                })
                .collect()
        })
        .collect();
    PeriodicGraph::from_slots(nt, nu, delta, delta_r, slots)
}

impl PeriodicGraph {
    /// General constructor allowing heterogeneous capacities.
    pub fn from_slots(
        nt: usize,
        nu: usize,
        delta: f64,
        delta_r: f64,
        slots: Vec<Vec<Circuit>>,
    ) -> Result<Self> {
        if nt == 0 || nu == 0 {
            return Err(Error::InvalidParameter("nt and nu must be positive".into()));
        }
        if slots.is_empty() {
            return Err(Error::ScheduleMismatch(Vec::new()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("timeslot {delta} must be positive")));
        }
        if !(0.0..delta).contains(&delta_r) {
            return Err(Error::InvalidParameter(format!(
                "reconfiguration time {delta_r} must lie in [0, {delta})"
            )));
        }
        for (t, slot) in slots.iter().enumerate() {
            let mut out = vec![0usize; nt];
            let mut inc = vec![0usize; nt];
            for c in slot {
                if c.edge.src >= nt || c.edge.dst >= nt {
                    return Err(Error::InvalidParameter(format!("edge {} outside [0, {nt})", c.edge)));
                }
                if !(c.capacity >= 0.0 && c.capacity.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "capacity {} on {} is not a nonnegative number",
                        c.capacity, c.edge
                    )));
                }
                if c.capacity > 0.0 {
                    out[c.edge.src] += 1;
                    inc[c.edge.dst] += 1;
                }
            }
            if let Some(u) = (0..nt).find(|&u| out[u] > nu || inc[u] > nu) {
                return Err(Error::InvalidParameter(format!(
                    "ToR {u} has more than {nu} circuits in slot {t}"
                )));
            }
        }
        Ok(PeriodicGraph {
            nt,
            nu,
            delta,
            delta_r,
            slots,
        })
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn period(&self) -> usize {
        self.slots.len()
    }

    /// seconds
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// seconds
    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    pub fn delta_u(&self) -> f64 {
        self.delta_r / self.delta
    }

    /// Fraction of the raw capacity each labelled emulated edge keeps.
    pub fn gain(&self) -> f64 {
        (1.0 - self.delta_u()) / self.period() as f64
    }

    pub fn slot(&self, t: u64) -> &[Circuit] {
        &self.slots[(t % self.period() as u64) as usize]
    }

    /// Summed capacity of `e` at time `t`; parallel circuits add up.
    pub fn capacity(&self, e: Edge, t: u64) -> f64 {
        self.slot(t).iter().filter(|c| c.edge == e).map(|c| c.capacity).sum()
    }

    pub fn contains(&self, e: Edge, t: u64) -> bool {
        self.capacity(e, t) > 0.0
    }

    pub fn max_capacity(&self) -> f64 {
        self.slots.iter().flatten().map(|c| c.capacity).fold(0.0, f64::max)
    }

    /// Sum of raw capacities over one period.
    pub fn raw_capacity(&self) -> f64 {
        self.slots.iter().flatten().map(|c| c.capacity).sum()
    }

    /// Distinct, non-loop successors of every vertex in every slot.
    fn slot_adjacency(&self) -> Vec<Vec<Vec<usize>>> {
        self.slots
            .iter()
            .map(|slot| {
                let mut adj = vec![Vec::new(); self.nt];
                for c in slot.iter().filter(|c| c.capacity > 0.0 && !c.edge.is_self_loop()) {
                    adj[c.edge.src].push(c.edge.dst);
                }
                for row in &mut adj {
                    row.sort_unstable();
                    row.dedup();
                }
                adj
            })
            .collect()
    }
}

/// An emulated-graph edge: the circuit `edge` active in slot `label`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledEdge {
    pub edge: Edge,
    pub label: usize,
    /// bits per second, already scaled by `(1 - delta_u) / period`
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulatedGraph {
    nt: usize,
    period: usize,
    delta_u: f64,
    /// One entry per circuit.
    edges: Vec<LabeledEdge>,
}

pub fn emulated_graph(g: &PeriodicGraph) -> EmulatedGraph {
    let gain = g.gain();
    let edges = g
        .slots
        .iter()
        .enumerate()
        .flat_map(|(label, slot)| {
            slot.iter().map(move |c| LabeledEdge {
                edge: c.edge,
                label,
                capacity: gain * c.capacity,
            })
        })
        .collect();
    EmulatedGraph {
        nt: g.nt,
        period: g.period(),
        delta_u: g.delta_u(),
        edges,
    }
}

impl EmulatedGraph {
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn delta_u(&self) -> f64 {
        self.delta_u
    }

    pub fn edges(&self) -> &[LabeledEdge] {
        &self.edges
    }

    pub fn capacity(&self, e: Edge, label: usize) -> f64 {
        self.edges
            .iter()
            .filter(|l| l.edge == e && l.label == label)
            .map(|l| l.capacity)
            .sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.edges.iter().map(|l| l.capacity).sum()
    }

    /// Capacity per distinct `(edge, label)`, zero-capacity entries dropped.
    pub fn labeled_capacities(&self) -> BTreeMap<(Edge, usize), f64> {
        let mut caps = BTreeMap::new();
        for l in self.edges.iter().filter(|l| l.capacity > 0.0) {
            *caps.entry((l.edge, l.label)).or_insert(0.0) += l.capacity;
        }
        caps
    }

    /// The unlabelled edge multiset.
    pub fn to_digraph(&self) -> Digraph {
        Digraph::new(self.nt, self.edges.iter().map(|l| l.edge).collect())
            .expect("emulated edges stay inside the vertex set")
    }
}

/// Weighted simple digraph: one capacity per ordered pair. Self-loops are
/// stored but never used for routing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleGraph {
    n: usize,
    caps: BTreeMap<Edge, f64>,
}

impl SimpleGraph {
    /// Parallel entries are summed; zero-capacity entries are dropped.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Edge, f64)>) -> Result<Self> {
        let mut caps = BTreeMap::new();
        for (e, c) in edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::InvalidParameter(format!("edge {e} outside [0, {n})")));
            }
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("capacity {c} on {e} is invalid")));
            }
            if c > 0.0 {
                *caps.entry(e).or_insert(0.0) += c;
            }
        }
        Ok(SimpleGraph { n, caps })
    }

    /// `K_n` with capacity `cap` per ordered pair.
    pub fn complete(n: usize, cap: f64, self_loops: bool) -> Self {
        let caps = (0..n)
            .flat_map(|u| (0..n).map(move |v| Edge::new(u, v)))
            .filter(|e| self_loops || !e.is_self_loop())
            .map(|e| (e, cap))
            .collect();
        SimpleGraph { n, caps }
    }

    pub fn from_digraph(g: &Digraph, cap: f64) -> Self {
        SimpleGraph::new(g.num_vertices(), g.edges().iter().map(|&e| (e, cap)))
            .expect("digraph edges are in range")
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn capacity(&self, e: Edge) -> f64 {
        self.caps.get(&e).copied().unwrap_or(0.0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.caps.iter().map(|(&e, &c)| (e, c))
    }

    pub fn self_loops(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.edges().filter(|(e, _)| e.is_self_loop())
    }

    /// Sum over all edges, self-loops included.
    pub fn total_capacity(&self) -> f64 {
        self.caps.values().sum()
    }

    /// Sum of out-edge capacities of `u`, self-loop included.
    pub fn node_capacity(&self, u: usize) -> f64 {
        self.caps.range(Edge::new(u, 0)..=Edge::new(u, usize::MAX)).map(|(_, c)| c).sum()
    }

    pub fn max_capacity(&self) -> f64 {
        self.caps.values().copied().fold(0.0, f64::max)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in self.caps.keys().filter(|e| !e.is_self_loop()) {
            adj[e.src].push(e.dst);
        }
        adj
    }

    /// Hop distances between all pairs; `None` when unreachable.
    pub fn hop_distances(&self) -> Vec<Vec<Option<usize>>> {
        let adj = self.adjacency();
        (0..self.n).map(|s| bfs(&adj, s)).collect()
    }

    pub fn diameter(&self) -> Option<usize> {
        let mut diam = 0;
        for row in self.hop_distances() {
            for d in row {
                diam = diam.max(d?);
            }
        }
        Some(diam)
    }
}

/// Corollary-style collapse: one edge per pair carrying
/// `(1 - delta_u) / period * sum_t c_t(e)`.
pub fn simple_emulated_graph(g: &PeriodicGraph) -> SimpleGraph {
    let e = emulated_graph(g);
    SimpleGraph::new(g.nt, e.edges.iter().map(|l| (l.edge, l.capacity)))
        .expect("emulated edges stay inside the vertex set")
}

/// A time-respecting walk given as `(edge, slot)` hops.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TemporalPath {
    hops: Vec<(Edge, u64)>,
}

impl TemporalPath {
    pub fn new(hops: Vec<(Edge, u64)>) -> Self {
        TemporalPath { hops }
    }

    pub fn hops(&self) -> &[(Edge, u64)] {
        &self.hops
    }

    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn src(&self) -> Option<usize> {
        self.hops.first().map(|h| h.0.src)
    }

    pub fn dst(&self) -> Option<usize> {
        self.hops.last().map(|h| h.0.dst)
    }

    pub fn start(&self) -> Option<u64> {
        self.hops.first().map(|h| h.1)
    }

    /// Same path `k` periods later.
    pub fn shifted(&self, k: u64, period: usize) -> Self {
        let off = k * period as u64;
        TemporalPath::new(self.hops.iter().map(|&(e, t)| (e, t + off)).collect())
    }

    /// Checks contiguity, `t_i < t_{i+1} <= t_i + period` and simplicity.
    pub fn check_shape(&self, period: usize) -> Result<()> {
        if self.hops.is_empty() {
            return Err(Error::InvalidPath("temporal path has no hops".into()));
        }
        let mut seen = vec![self.hops[0].0.src];
        for (i, &(e, t)) in self.hops.iter().enumerate() {
            if i > 0 {
                let (prev, pt) = self.hops[i - 1];
                if prev.dst != e.src {
                    return Err(Error::IllegalPath {
                        hop: i,
                        reason: format!("{e} does not continue from {prev}"),
                    });
                }
                if t <= pt {
                    return Err(Error::IllegalPath {
                        hop: i,
                        reason: format!("time {t} does not follow {pt}"),
                    });
                }
                if t - pt > period as u64 {
                    return Err(Error::IllegalPath {
                        hop: i,
                        reason: format!("gap {} exceeds the period {period}", t - pt),
                    });
                }
            }
            if seen.contains(&e.dst) {
                return Err(Error::IllegalPath {
                    hop: i,
                    reason: format!("vertex {} repeats", e.dst),
                });
            }
            seen.push(e.dst);
        }
        Ok(())
    }

    /// Shape checks plus membership of every hop in its slot.
    pub fn validate(&self, g: &PeriodicGraph) -> Result<()> {
        self.check_shape(g.period())?;
        for (i, &(e, t)) in self.hops.iter().enumerate() {
            if !g.contains(e, t) {
                return Err(Error::IllegalPath {
                    hop: i,
                    reason: format!("{e} is not active in slot {}", t % g.period() as u64),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for TemporalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (e, t)) in self.hops.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}@{t}")?;
        }
        Ok(())
    }
}

/// `(edge, label)` hops plus the temporal path they came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExtendedPath {
    hops: Vec<(Edge, usize)>,
    id: TemporalPath,
}

impl ExtendedPath {
    /// Rebuilds the identifier from labels alone. Consecutive labels fix the
    /// gap: `(l' - l) mod period`, or a full period when they are equal.
    pub fn from_labels(hops: Vec<(Edge, usize)>, start: u64, period: usize) -> Result<Self> {
        let Some(&(_, l0)) = hops.first() else {
            return Err(Error::InvalidPath("extended path has no hops".into()));
        };
        if l0 >= period || hops.iter().any(|&(_, l)| l >= period) {
            return Err(Error::InvalidPath(format!("label outside [0, {period})")));
        }
        if start % period as u64 != l0 as u64 {
            return Err(Error::InvalidPath(format!(
                "start {start} does not carry label {l0}"
            )));
        }
        let mut t = start;
        let mut timed = Vec::with_capacity(hops.len());
        for (i, &(e, l)) in hops.iter().enumerate() {
            if i > 0 {
                let prev = hops[i - 1].1;
                let gap = (l + period - prev) % period;
                t += if gap == 0 { period } else { gap } as u64;
            }
            timed.push((e, t));
        }
        let id = TemporalPath::new(timed);
        id.check_shape(period)?;
        Ok(ExtendedPath { hops, id })
    }

    pub fn hops(&self) -> &[(Edge, usize)] {
        &self.hops
    }

    pub fn id(&self) -> &TemporalPath {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn src(&self) -> Option<usize> {
        self.hops.first().map(|h| h.0.src)
    }

    pub fn dst(&self) -> Option<usize> {
        self.hops.last().map(|h| h.0.dst)
    }
}

pub fn static_of(delta: &TemporalPath, period: usize) -> Result<ExtendedPath> {
    delta.check_shape(period)?;
    let hops = delta
        .hops
        .iter()
        .map(|&(e, t)| (e, (t % period as u64) as usize))
        .collect();
    Ok(ExtendedPath {
        hops,
        id: delta.clone(),
    })
}

pub fn temporal_of(p: &ExtendedPath) -> TemporalPath {
    p.id.clone()
}

/// Rates on foundation temporal paths, bits per second.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemporalFlow {
    pub rates: BTreeMap<TemporalPath, f64>,
}

/// Rates on extended paths of the emulated graph, bits per second.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticFlow {
    pub rates: BTreeMap<ExtendedPath, f64>,
}

impl TemporalFlow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: TemporalPath, rate: f64) {
        *self.rates.entry(path).or_insert(0.0) += rate;
    }
}

impl StaticFlow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: ExtendedPath, rate: f64) {
        *self.rates.entry(path).or_insert(0.0) += rate;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Capacity {
        edge: Edge,
        slot: usize,
        load: f64,
        capacity: f64,
    },
    Path {
        path: usize,
        hop: usize,
        reason: String,
    },
    NotFoundation {
        path: usize,
        start: u64,
    },
    NegativeRate {
        path: usize,
        rate: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Capacity {
                edge,
                slot,
                load,
                capacity,
            } => write!(f, "{edge} in slot {slot} carries {load} > {capacity}"),
            Violation::Path { path, hop, reason } => write!(f, "path {path}, hop {hop}: {reason}"),
            Violation::NotFoundation { path, start } => {
                write!(f, "path {path} starts at {start}, outside the first period")
            }
            Violation::NegativeRate { path, rate } => write!(f, "path {path} has rate {rate}"),
        }
    }
}

/// Steady-state legality: with every foundation path repeated each period,
/// the load on `(e, t)` is the sum over hops whose time is `t` mod period.
pub fn validate_temporal_flow(flow: &TemporalFlow, g: &PeriodicGraph) -> Vec<Violation> {
    let period = g.period();
    let mut out = Vec::new();
    let mut load: BTreeMap<(Edge, usize), f64> = BTreeMap::new();
    for (i, (path, &rate)) in flow.rates.iter().enumerate() {
        if rate < 0.0 || !rate.is_finite() {
            out.push(Violation::NegativeRate { path: i, rate });
        }
        match path.validate(g) {
            Err(Error::IllegalPath { hop, reason }) => {
                out.push(Violation::Path { path: i, hop, reason });
                continue;
            }
            Err(e) => {
                out.push(Violation::Path {
                    path: i,
                    hop: 0,
                    reason: e.to_string(),
                });
                continue;
            }
            Ok(()) => {}
        }
        let start = path.start().unwrap_or(0);
        if start >= period as u64 {
            out.push(Violation::NotFoundation { path: i, start });
        }
        for &(e, t) in path.hops() {
            *load.entry((e, (t % period as u64) as usize)).or_insert(0.0) += rate;
        }
    }
    let tol = CAPACITY_TOL * g.max_capacity().max(f64::MIN_POSITIVE);
    for ((edge, slot), l) in load {
        let capacity = g.capacity(edge, slot as u64);
        if l > capacity + tol {
            out.push(Violation::Capacity {
                edge,
                slot,
                load: l,
                capacity,
            });
        }
    }
    out
}

/// Legality of a static flow on the labelled multigraph.
pub fn validate_static_flow(flow: &StaticFlow, e: &EmulatedGraph) -> Result<()> {
    let caps = e.labeled_capacities();
    let cmax = caps.values().copied().fold(0.0, f64::max);
    let mut load: BTreeMap<(Edge, usize), f64> = BTreeMap::new();
    for (p, &rate) in &flow.rates {
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::IllegalFlow(format!("path {} has rate {rate}", p.id)));
        }
        let relabeled = static_of(&p.id, e.period)?;
        if relabeled.hops != p.hops {
            return Err(Error::IllegalFlow(format!(
                "labels of path {} disagree with its identifier",
                p.id
            )));
        }
        for &(edge, label) in &p.hops {
            if !caps.contains_key(&(edge, label)) {
                return Err(Error::IllegalFlow(format!(
                    "{edge} with label {label} is not in the emulated graph"
                )));
            }
            *load.entry((edge, label)).or_insert(0.0) += rate;
        }
    }
    let tol = CAPACITY_TOL * cmax.max(f64::MIN_POSITIVE);
    for ((edge, label), l) in load {
        let c = caps[&(edge, label)];
        if l > c + tol {
            return Err(Error::IllegalFlow(format!(
                "{edge} with label {label} carries {l} > {c}"
            )));
        }
    }
    Ok(())
}

pub fn flow_static_to_temporal(flow: &StaticFlow, g: &PeriodicGraph) -> Result<TemporalFlow> {
    validate_static_flow(flow, &emulated_graph(g))?;
    let scale = 1.0 / g.gain();
    let mut out = TemporalFlow::new();
    for (p, &rate) in &flow.rates {
        if p.id.start().unwrap_or(0) >= g.period() as u64 {
            return Err(Error::IllegalFlow(format!(
                "identifier {} starts outside the first period",
                p.id
            )));
        }
        out.add(temporal_of(p), rate * scale);
    }
    Ok(out)
}

pub fn flow_temporal_to_static(flow: &TemporalFlow, g: &PeriodicGraph) -> Result<StaticFlow> {
    let violations = validate_temporal_flow(flow, g);
    if let Some(first) = violations.first() {
        return Err(Error::IllegalFlow(format!(
            "{first} ({} violation(s) in total)",
            violations.len()
        )));
    }
    let gain = g.gain();
    let mut out = StaticFlow::new();
    for (d, &rate) in &flow.rates {
        out.add(static_of(d, g.period())?, rate * gain);
    }
    Ok(out)
}

/// `(t_n - t_1 + 1) * delta + (period - 1) * delta`, in seconds.
pub fn temporal_path_delay(path: &TemporalPath, delta: f64, period: usize) -> Result<f64> {
    let (Some(&(_, t1)), Some(&(_, tn))) = (path.hops.first(), path.hops.last()) else {
        return Err(Error::InvalidPath("temporal path has no hops".into()));
    };
    Ok(((tn - t1 + 1) as f64 + (period as f64 - 1.0)) * delta)
}

fn min_ratio(delivered: &BTreeMap<(usize, usize), f64>, demand: &DemandMatrix) -> Result<f64> {
    let mut theta = f64::INFINITY;
    for (s, d, m) in demand.pairs() {
        theta = theta.min(delivered.get(&(s, d)).copied().unwrap_or(0.0) / m);
    }
    if theta.is_infinite() {
        return Err(Error::UndefinedThroughput);
    }
    Ok(theta)
}

/// Smallest ratio of delivered to demanded rate over pairs with demand.
/// Temporal rates are scaled by `(1 - delta_u) / period` first.
pub fn throughput_of_temporal_flow(
    flow: &TemporalFlow,
    g: &PeriodicGraph,
    demand: &DemandMatrix,
) -> Result<f64> {
    let gain = g.gain();
    let mut delivered = BTreeMap::new();
    for (p, &rate) in &flow.rates {
        if let (Some(s), Some(d)) = (p.src(), p.dst()) {
            *delivered.entry((s, d)).or_insert(0.0) += gain * rate;
        }
    }
    min_ratio(&delivered, demand)
}

pub fn throughput_of_static_flow(flow: &StaticFlow, demand: &DemandMatrix) -> Result<f64> {
    let mut delivered = BTreeMap::new();
    for (p, &rate) in &flow.rates {
        if let (Some(s), Some(d)) = (p.src(), p.dst()) {
            *delivered.entry((s, d)).or_insert(0.0) += rate;
        }
    }
    min_ratio(&delivered, demand)
}

/// Every legal foundation path with at most `hop_cap` hops (default: the
/// emulated diameter plus two). Fails once more than `budget` paths exist.
pub fn enumerate_foundation_paths(
    g: &PeriodicGraph,
    hop_cap: Option<usize>,
    budget: usize,
) -> Result<Vec<TemporalPath>> {
    let cap = match hop_cap {
        Some(h) => h,
        None => simple_emulated_graph(g)
            .diameter()
            .map_or(g.nt.saturating_sub(1), |d| d + 2),
    }
    .min(g.nt.saturating_sub(1));
    let adj = g.slot_adjacency();
    let period = g.period() as u64;
    let mut out = Vec::new();
    let mut hops: Vec<(Edge, u64)> = Vec::new();
    let mut on_path = vec![false; g.nt];

    struct Walk<'a> {
        adj: &'a [Vec<Vec<usize>>],
        period: u64,
        cap: usize,
        budget: usize,
    }

    fn extend(
        w: &Walk<'_>,
        u: usize,
        t: u64,
        hops: &mut Vec<(Edge, u64)>,
        on_path: &mut [bool],
        out: &mut Vec<TemporalPath>,
    ) -> Result<()> {
        if hops.len() >= w.cap {
            return Ok(());
        }
        for next in t + 1..=t + w.period {
            for &v in &w.adj[(next % w.period) as usize][u] {
                if on_path[v] {
                    continue;
                }
                hops.push((Edge::new(u, v), next));
                push_path(w, hops, out)?;
                on_path[v] = true;
                extend(w, v, next, hops, on_path, out)?;
                on_path[v] = false;
                hops.pop();
            }
        }
        Ok(())
    }

    fn push_path(w: &Walk<'_>, hops: &[(Edge, u64)], out: &mut Vec<TemporalPath>) -> Result<()> {
        if out.len() >= w.budget {
            return Err(Error::OracleTooLarge(format!(
                "more than {} foundation paths",
                w.budget
            )));
        }
        out.push(TemporalPath::new(hops.to_vec()));
        Ok(())
    }

    let walk = Walk {
        adj: &adj,
        period,
        cap,
        budget,
    };
    if cap == 0 {
        return Ok(out);
    }
    for s in 0..g.nt {
        on_path[s] = true;
        for t1 in 0..period {
            for &v in &adj[t1 as usize][s] {
                hops.push((Edge::new(s, v), t1));
                push_path(&walk, &hops, &mut out)?;
                on_path[v] = true;
                extend(&walk, v, t1, &mut hops, &mut on_path, &mut out)?;
                on_path[v] = false;
                hops.pop();
            }
        }
        on_path[s] = false;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifts4() -> PeriodicGraph {
        let sched = vec![vec![Matching::shift(4, 1), Matching::shift(4, 2)]];
        build_periodic_graph(4, 1, 1e-4, 0.0, &sched, 1.0).unwrap()
    }

    fn p(hops: &[(usize, usize, u64)]) -> TemporalPath {
        TemporalPath::new(hops.iter().map(|&(u, v, t)| (Edge::new(u, v), t)).collect())
    }

    #[test]
    fn identity_schedule_is_self_loops() {
        let g = build_periodic_graph(4, 1, 1e-4, 0.0, &[vec![Matching::identity(4)]], 1.0).unwrap();
        assert_eq!(g.period(), 1);
        assert!(g.slot(0).iter().all(|c| c.edge.is_self_loop()));
    }

    #[test]
    fn shifts_and_periodicity() {
        let g = shifts4();
        for i in 0..4 {
            assert!(g.contains(Edge::new(i, (i + 1) % 4), 0));
            assert!(g.contains(Edge::new(i, (i + 2) % 4), 1));
            assert!(g.contains(Edge::new(i, (i + 2) % 4), 7));
            assert!(!g.contains(Edge::new(i, (i + 2) % 4), 6));
        }
    }

    #[test]
    fn unequal_schedules_rejected() {
        let sched = vec![vec![Matching::identity(4)], vec![Matching::identity(4); 2]];
        assert!(matches!(
            build_periodic_graph(4, 2, 1e-4, 0.0, &sched, 1.0),
            Err(Error::ScheduleMismatch(_))
        ));
    }

    #[test]
    fn reconfiguration_must_fit_in_slot() {
        let sched = vec![vec![Matching::identity(4)]];
        assert!(build_periodic_graph(4, 1, 1e-4, 1e-4, &sched, 1.0).is_err());
    }

    #[test]
    fn too_many_switches_rejected() {
        let sched = vec![vec![Matching::identity(3)]; 3];
        assert!(build_periodic_graph(3, 2, 1.0, 0.0, &sched, 1.0).is_err());
    }

    #[test]
    fn emulated_capacity_scaling() {
        let ms: Vec<Matching> = (0..8).map(|k| Matching::shift(8, k)).collect();
        let g = build_periodic_graph(8, 1, 1e-4, 1e-5, &[ms], 400e9).unwrap();
        let e = emulated_graph(&g);
        assert!(e.edges().iter().all(|l| (l.capacity - 45e9).abs() < 1e-3));
        assert_eq!(e.edges().len(), 64);
    }

    #[test]
    fn pair_in_both_slots_collapses() {
        let sched = vec![vec![Matching::shift(3, 1), Matching::shift(3, 1)]];
        let g = build_periodic_graph(3, 1, 1.0, 0.25, &sched, 8.0).unwrap();
        let s = simple_emulated_graph(&g);
        assert!((s.capacity(Edge::new(0, 1)) - 6.0).abs() < 1e-12);
        assert_eq!(s.capacity(Edge::new(0, 2)), 0.0);
    }

    #[test]
    fn static_of_mods_labels() {
        let d = p(&[(0, 1, 2), (1, 3, 3)]);
        let g = shifts4();
        d.validate(&g).unwrap();
        let x = static_of(&d, 2).unwrap();
        assert_eq!(x.hops(), &[(Edge::new(0, 1), 0), (Edge::new(1, 3), 1)]);
        assert_eq!(temporal_of(&x), d);
        assert_eq!(ExtendedPath::from_labels(x.hops().to_vec(), 2, 2).unwrap(), x);
        // a gap of three slots is longer than the period
        assert!(static_of(&p(&[(0, 1, 0), (1, 3, 3)]), 2).is_err());
    }

    #[test]
    fn shape_errors_name_the_hop() {
        match p(&[(0, 1, 0), (1, 2, 3)]).check_shape(2) {
            Err(Error::IllegalPath { hop: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match p(&[(0, 1, 0), (1, 0, 1)]).check_shape(2) {
            Err(Error::IllegalPath { hop: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match p(&[(0, 1, 1), (1, 2, 1)]).check_shape(2) {
            Err(Error::IllegalPath { hop: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(p(&[]).check_shape(2), Err(Error::InvalidPath(_))));
    }

    #[test]
    fn delay_substitution() {
        let d = p(&[(0, 1, 0), (1, 2, 1), (2, 3, 2)]);
        assert!((temporal_path_delay(&d, 100e-6, 2).unwrap() - 400e-6).abs() < 1e-15);
        let one = p(&[(0, 1, 0)]);
        assert!((temporal_path_delay(&one, 100e-6, 1).unwrap() - 100e-6).abs() < 1e-15);
    }

    #[test]
    fn exact_capacity_is_legal_and_excess_is_not() {
        let g = shifts4();
        let mut f = TemporalFlow::new();
        f.add(p(&[(0, 1, 0)]), 1.0);
        assert!(validate_temporal_flow(&f, &g).is_empty());

        let mut f = TemporalFlow::new();
        f.add(p(&[(0, 1, 0)]), 0.75);
        f.add(p(&[(0, 1, 0), (1, 3, 1)]), 0.75);
        let v = validate_temporal_flow(&f, &g);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Capacity { slot: 0, .. }));

        let mut f = TemporalFlow::new();
        f.add(p(&[(0, 1, 0), (1, 3, 3)]), 0.1);
        assert!(matches!(validate_temporal_flow(&f, &g)[0], Violation::Path { hop: 1, .. }));
    }

    #[test]
    fn conversion_scale_factor() {
        let g = shifts4();
        let x = static_of(&p(&[(0, 1, 0)]), 2).unwrap();
        let mut f = StaticFlow::new();
        f.add(x.clone(), 0.25);
        let t = flow_static_to_temporal(&f, &g).unwrap();
        assert_eq!(t.rates[x.id()], 0.5);
        assert_eq!(flow_temporal_to_static(&t, &g).unwrap(), f);
        assert!(flow_static_to_temporal(&StaticFlow::new(), &g).unwrap().rates.is_empty());
    }

    #[test]
    fn static_flow_over_capacity_rejected() {
        let g = shifts4();
        let mut f = StaticFlow::new();
        f.add(static_of(&p(&[(0, 1, 0)]), 2).unwrap(), 0.6);
        assert!(matches!(flow_static_to_temporal(&f, &g), Err(Error::IllegalFlow(_))));
    }

    #[test]
    fn throughput_half_rate() {
        let g = shifts4();
        let demand = DemandMatrix::permutation(&[1, 2, 3, 0], 0.5);
        let mut f = TemporalFlow::new();
        for i in 0..4 {
            f.add(p(&[(i, (i + 1) % 4, 0)]), 1.0);
        }
        assert!((throughput_of_temporal_flow(&f, &g, &demand).unwrap() - 1.0).abs() < 1e-12);
        assert!((throughput_of_temporal_flow(&f, &g, &demand.scaled(2.0)).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            throughput_of_temporal_flow(&f, &g, &DemandMatrix::zeros(4)),
            Err(Error::UndefinedThroughput)
        ));
    }

    #[test]
    fn foundation_paths_are_legal_and_bijective() {
        let g = shifts4();
        let paths = enumerate_foundation_paths(&g, Some(3), 10_000).unwrap();
        let mut statics = std::collections::BTreeSet::new();
        for d in &paths {
            d.validate(&g).unwrap();
            assert!(d.start().unwrap() < 2);
            let x = static_of(d, 2).unwrap();
            let back = ExtendedPath::from_labels(x.hops().to_vec(), d.start().unwrap(), 2).unwrap();
            assert_eq!(back.id(), d);
            assert!(statics.insert(x.hops().to_vec()));
        }
        assert!(enumerate_foundation_paths(&g, Some(3), 3).is_err());
    }

    #[test]
    fn node_capacity_counts_self_loop() {
        let k = SimpleGraph::complete(4, 1.0, true);
        assert_eq!(k.node_capacity(2), 4.0);
        assert_eq!(k.self_loops().count(), 4);
        assert_eq!(SimpleGraph::complete(4, 1.0, false).node_capacity(3), 3.0);
    }
}
