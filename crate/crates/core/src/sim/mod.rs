//! Slotted fluid simulator: finite shared buffers per ToR, per-next-hop
//! FIFO queues, periodic circuits.

pub mod routing;
pub mod workload;

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{arl, throughput_upper_bound, RouteEnsemble};
use crate::demand::DemandMatrix;
use crate::error::{Error, Result};
use crate::io::{ScheduleFile, FORMAT_VERSION};
use crate::periodic::{simple_emulated_graph, PeriodicGraph};
use crate::topology::{EmulatedGraphSpec, GraphKind};

pub use routing::{realize, remove_cycles, valiant_route, RouteTable, Routing};
pub use workload::{generate_workload, pair_weights, parse_flow_trace, random_derangement, DemandKind, Flow, FlowSizes, SizeCdf};

/// Bytes per packet when a buffer is given in packets.
pub const PACKET_BYTES: f64 = 1500.0;
/// Warm-up length in periods.
pub const WARMUP_PERIODS: u64 = 5;
/// Minimum run length in periods.
pub const MIN_PERIODS: u64 = 10;

const FLOOR_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BufferSize {
    Bits(f64),
    Packets(f64),
    Megabytes(f64),
    Unbounded,
}

impl BufferSize {
    pub fn bits(&self) -> u64 {
        let b = match *self {
            BufferSize::Bits(b) => b,
            BufferSize::Packets(p) => p * PACKET_BYTES * 8.0,
            BufferSize::Megabytes(mb) => mb * 8e6,
            BufferSize::Unbounded => return u64::MAX,
        };
        (b + FLOOR_EPS).floor() as u64
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BufferSize::Bits(v) | BufferSize::Packets(v) | BufferSize::Megabytes(v) if !(v >= 0.0 && v.is_finite()) => {
                Err(Error::InvalidParameter(format!("buffer {v} must be nonnegative")))
            }
            _ => Ok(()),
        }
    }
}

/// What happens to host traffic that meets a full ToR buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Admission {
    /// Hosts send at line rate and the ToR drops what does not fit.
    #[default]
    Drop,
    /// Hosts hold data back until the ToR has room.
    Backpressure,
}

impl std::str::FromStr for Admission {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backpressure" => Ok(Admission::Backpressure),
            "drop" => Ok(Admission::Drop),
            other => Err(Error::InvalidParameter(format!("unknown admission policy '{other}'"))),
        }
    }
}

fn default_chunk_bytes() -> f64 {
    1e5
}

fn default_short_flow_bytes() -> f64 {
    1e5
}

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "format_version")]
    pub format: u32,
    pub schedule: ScheduleFile,
    /// Per-ToR shared buffer.
    pub buffer: BufferSize,
    #[serde(default)]
    pub routing: Routing,
    #[serde(default)]
    pub admission: Admission,
    pub demand: DemandKind,
    /// Fraction of each ToR's server capacity `nu * c`.
    pub load: f64,
    pub sizes: FlowSizes,
    /// slots
    pub duration: u64,
    pub seed: u64,
    /// Injected data is cut into pieces of at most this size; each piece is
    /// routed on its own.
    #[serde(default = "default_chunk_bytes")]
    pub chunk_bytes: f64,
    /// Flows up to this size count as short for completion-time stats.
    #[serde(default = "default_short_flow_bytes")]
    pub short_flow_bytes: f64,
    /// Record per-slot occupancy of every node.
    #[serde(default)]
    pub trace: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<PeriodicGraph> {
        if self.format != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported config format {}", self.format)));
        }
        let g = self.schedule.to_graph()?;
        self.buffer.validate()?;
        if !(0.0..=1.0).contains(&self.load) {
            return Err(Error::InvalidParameter(format!("load {} outside [0, 1]", self.load)));
        }
        let min = MIN_PERIODS * g.period() as u64;
        if self.duration < min {
            return Err(Error::InvalidParameter(format!(
                "duration {} slots is below {MIN_PERIODS} periods ({min} slots)",
                self.duration
            )));
        }
        if !(self.chunk_bytes >= 1.0 && self.chunk_bytes.is_finite()) {
            return Err(Error::InvalidParameter(format!("chunk size {} bytes", self.chunk_bytes)));
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Percentiles {
    pub p50: f64,
    pub p99: f64,
    pub max: f64,
}

impl Percentiles {
    /// Nearest-rank percentiles; `None` for an empty sample.
    pub fn of(samples: &mut [f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        samples.sort_by(f64::total_cmp);
        let rank = |q: f64| samples[((q * samples.len() as f64).ceil() as usize).clamp(1, samples.len()) - 1];
        Some(Percentiles {
            p50: rank(0.5),
            p99: rank(0.99),
            max: samples[samples.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Delivered bits per second after warm-up over the total server
    /// capacity `nt * nu * c`.
    pub throughput: f64,
    /// Delivered over offered bits for the whole run.
    pub delivered_ratio: f64,
    pub offered_bits: u64,
    pub delivered_bits: u64,
    pub dropped_bits: u64,
    /// Arrivals that lost at least some bits.
    pub drop_events: u64,
    /// Still inside ToR buffers at the end.
    pub queued_bits: u64,
    /// Still at the hosts at the end.
    pub in_flight_bits: u64,
    /// Per-node occupancy after each post-warm-up slot, bits.
    pub occupancy: Percentiles,
    pub flows: usize,
    pub completed_flows: usize,
    /// seconds
    pub fct_short: Option<Percentiles>,
    /// seconds
    pub fct_long: Option<Percentiles>,
    pub warmup_slots: u64,
    /// `trace[slot][node]`, bits.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone)]
struct Chunk {
    flow: u32,
    route: Box<[u32]>,
    /// Index in `route` of the node holding the chunk.
    at: u8,
    bits: u64,
}

struct FlowState {
    dst: usize,
    arrival: f64,
    bits: u64,
    delivered: u64,
}

struct Engine<'a> {
    g: &'a PeriodicGraph,
    nt: usize,
    buffer: u64,
    /// `queues[u * nt + v]`: waiting at `u` for the circuit to `v`.
    queues: Vec<VecDeque<Chunk>>,
    occ: Vec<u64>,
    backlog: Vec<VecDeque<(u32, u64)>>,
    flows: Vec<FlowState>,
    offered: u64,
    delivered: u64,
    dropped: u64,
    drop_events: u64,
    pending: u64,
}

impl Engine<'_> {
    fn queued(&self) -> u64 {
        self.occ.iter().sum()
    }

    fn enqueue(&mut self, node: usize, chunk: Chunk) {
        let next = chunk.route[chunk.at as usize + 1] as usize;
        self.occ[node] += chunk.bits;
        self.queues[node * self.nt + next].push_back(chunk);
    }

    /// Drop-newest: whatever does not fit is lost.
    fn admit(&mut self, node: usize, ch: Chunk) {
        let room = self.buffer.saturating_sub(self.occ[node]);
        if ch.bits <= room {
            self.enqueue(node, ch);
        } else {
            self.dropped += ch.bits - room;
            self.drop_events += 1;
            if room > 0 {
                self.enqueue(node, Chunk { bits: room, ..ch });
            }
        }
    }

    fn check(&self, slot: u64) -> Result<()> {
        let mut per_node = vec![0u64; self.nt];
        for (i, q) in self.queues.iter().enumerate() {
            per_node[i / self.nt] += q.iter().map(|c| c.bits).sum::<u64>();
        }
        if per_node != self.occ {
            return Err(Error::InvariantViolated {
                slot,
                detail: "occupancy counters disagree with queue contents".into(),
            });
        }
        if let Some((u, &o)) = self.occ.iter().enumerate().find(|(_, &o)| o > self.buffer) {
            return Err(Error::InvariantViolated {
                slot,
                detail: format!("node {u} holds {o} bits, buffer is {}", self.buffer),
            });
        }
        let rhs = self.delivered + self.queued() + self.pending + self.dropped;
        if rhs != self.offered {
            return Err(Error::InvariantViolated {
                slot,
                detail: format!(
                    "offered {} != delivered {} + queued {} + in-flight {} + dropped {}",
                    self.offered,
                    self.delivered,
                    self.queued(),
                    self.pending,
                    self.dropped
                ),
            });
        }
        if self.delivered > self.offered {
            return Err(Error::InvariantViolated {
                slot,
                detail: "delivered exceeds offered".into(),
            });
        }
        Ok(())
    }
}

fn floor_bits(x: f64) -> u64 {
    (x + FLOOR_EPS).floor().max(0.0) as u64
}

/// Runs one simulation. Conservation and the buffer ceiling are checked
/// after every slot; a breach aborts with [`Error::InvariantViolated`].
pub fn run_sim(cfg: &SimConfig) -> Result<SimResult> {
    let g = cfg.validate()?;
    let nt = g.nt();
    let period = g.period() as u64;
    let delta = g.delta();
    let cap = cfg.schedule.capacity();
    let server_cap = g.nu() as f64 * cap;
    let horizon = cfg.duration as f64 * delta;

    let arrivals = generate_workload(&cfg.demand, cfg.load, cfg.seed, nt, server_cap, &cfg.sizes, horizon)?;
    let table = RouteTable::new(&g);
    let mut route_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    route_rng.set_stream(1);

    let inject_cap = floor_bits(server_cap * delta);
    let chunk_bits = floor_bits(cfg.chunk_bytes * 8.0).max(1);
    let warmup = WARMUP_PERIODS * period;

    let mut e = Engine {
        g: &g,
        nt,
        buffer: cfg.buffer.bits(),
        queues: (0..nt * nt).map(|_| VecDeque::new()).collect(),
        occ: vec![0; nt],
        backlog: (0..nt).map(|_| VecDeque::new()).collect(),
        flows: Vec::with_capacity(arrivals.len()),
        offered: 0,
        delivered: 0,
        dropped: 0,
        drop_events: 0,
        pending: 0,
    };
    let mut next_arrival = 0;
    let mut delivered_window = 0u64;
    let mut occupancy = Vec::new();
    let mut fct_short = Vec::new();
    let mut fct_long = Vec::new();
    let mut trace = cfg.trace.then(Vec::new);
    let short_bits = cfg.short_flow_bytes * 8.0;

    for t in 0..cfg.duration {
        let slot_end = (t + 1) as f64 * delta;

        // new flows
        while next_arrival < arrivals.len() && arrivals[next_arrival].arrival < slot_end {
            let f = &arrivals[next_arrival];
            let id = e.flows.len() as u32;
            e.flows.push(FlowState {
                dst: f.dst,
                arrival: f.arrival,
                bits: f.bits,
                delivered: 0,
            });
            e.backlog[f.src].push_back((id, f.bits));
            e.offered += f.bits;
            e.pending += f.bits;
            next_arrival += 1;
        }

        // host injection, limited by the server links and free buffer
        for s in 0..nt {
            let mut budget = match cfg.admission {
                Admission::Backpressure => inject_cap.min(e.buffer.saturating_sub(e.occ[s])),
                Admission::Drop => inject_cap,
            };
            while budget > 0 {
                let Some(front) = e.backlog[s].front_mut() else { break };
                let take = front.1.min(budget);
                let id = front.0;
                front.1 -= take;
                if front.1 == 0 {
                    e.backlog[s].pop_front();
                }
                budget -= take;
                e.pending -= take;
                let dst = e.flows[id as usize].dst;
                let mut left = take;
                while left > 0 {
                    let bits = left.min(chunk_bits);
                    left -= bits;
                    let route = table.route(cfg.routing, s, dst, &mut route_rng)?;
                    let route: Box<[u32]> = route.into_iter().map(|v| v as u32).collect();
                    e.admit(s, Chunk { flow: id, route, at: 0, bits });
                }
            }
        }

        // departures
        let mut moving: Vec<Chunk> = Vec::new();
        for c in e.g.slot(t) {
            let (u, v) = (c.edge.src, c.edge.dst);
            let mut budget = floor_bits(c.capacity * (delta - g.delta_r()));
            let q = &mut e.queues[u * nt + v];
            while budget > 0 {
                let Some(front) = q.front_mut() else { break };
                if front.bits <= budget {
                    budget -= front.bits;
                    e.occ[u] -= front.bits;
                    let mut ch = q.pop_front().expect("front exists");
                    ch.at += 1;
                    moving.push(ch);
                } else {
                    front.bits -= budget;
                    e.occ[u] -= budget;
                    let mut ch = front.clone();
                    ch.bits = budget;
                    ch.at += 1;
                    moving.push(ch);
                    budget = 0;
                }
            }
        }

        // arrivals at the far end of each circuit
        for ch in moving {
            let node = ch.route[ch.at as usize] as usize;
            if ch.at as usize + 1 == ch.route.len() {
                e.delivered += ch.bits;
                if t >= warmup {
                    delivered_window += ch.bits;
                }
                let f = &mut e.flows[ch.flow as usize];
                f.delivered += ch.bits;
                if f.delivered == f.bits && f.arrival >= warmup as f64 * delta {
                    let fct = slot_end - f.arrival;
                    if f.bits as f64 <= short_bits {
                        fct_short.push(fct);
                    } else {
                        fct_long.push(fct);
                    }
                }
                continue;
            }
            e.admit(node, ch);
        }

        e.check(t)?;
        if t >= warmup {
            occupancy.extend(e.occ.iter().map(|&o| o as f64));
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(e.occ.clone());
        }
    }

    let window = (cfg.duration - warmup) as f64 * delta;
    let throughput = if window > 0.0 && server_cap > 0.0 {
        delivered_window as f64 / (nt as f64 * server_cap * window)
    } else {
        0.0
    };
    let completed = e.flows.iter().filter(|f| f.delivered == f.bits).count();
    Ok(SimResult {
        throughput,
        delivered_ratio: if e.offered > 0 { e.delivered as f64 / e.offered as f64 } else { 0.0 },
        offered_bits: e.offered,
        delivered_bits: e.delivered,
        dropped_bits: e.dropped,
        drop_events: e.drop_events,
        queued_bits: e.queued(),
        in_flight_bits: e.pending,
        occupancy: Percentiles::of(&mut occupancy).unwrap_or_default(),
        flows: e.flows.len(),
        completed_flows: completed,
        fct_short: Percentiles::of(&mut fct_short),
        fct_long: Percentiles::of(&mut fct_long),
        warmup_slots: warmup,
        trace,
    })
}

/// Capacity bound on the measured throughput for the demand pattern, using
/// shortest-path route lengths on the emulated graph.
pub fn throughput_bound(cfg: &SimConfig) -> Result<f64> {
    let g = cfg.validate()?;
    let nt = g.nt();
    let sg = simple_emulated_graph(&g);
    let table = RouteTable::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let server = g.nu() as f64 * cfg.schedule.capacity();
    let weights = pair_weights(&cfg.demand, nt)?;
    if weights.is_empty() {
        return Ok(0.0);
    }
    let mut m = DemandMatrix::zeros(nt);
    let mut routes = RouteEnsemble::new();
    for &(s, d, w) in &weights {
        m.set(s, d, w * nt as f64 * server);
        routes.insert(s, d, table.shortest(s, d, &mut rng)?, 1.0);
    }
    throughput_upper_bound(sg.total_capacity(), m.total(), arl(&m, &routes)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// values in bits
    Buffer,
    Load,
    Degree,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "buffer" => Ok(SweepAxis::Buffer),
            "load" => Ok(SweepAxis::Load),
            "degree" => Ok(SweepAxis::Degree),
            other => Err(Error::InvalidParameter(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub result: SimResult,
}

/// Schedule for a degree-`d` emulated graph: deBruijn below `nt`, the
/// round-robin complete schedule at `nt`.
pub fn degree_schedule(base: &ScheduleFile, d: usize, seed: u64) -> Result<ScheduleFile> {
    let kind = if d == base.nt { GraphKind::Complete } else { GraphKind::Debruijn };
    let spec = EmulatedGraphSpec {
        kind,
        nt: base.nt,
        degree: d,
        seed,
    };
    let switches = spec.schedules(base.nu)?;
    Ok(ScheduleFile::new(base.nt, base.nu, base.delta(), base.delta_r(), base.capacity(), switches))
}

fn with_value(base: &SimConfig, axis: SweepAxis, v: f64) -> Result<SimConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::Buffer => cfg.buffer = BufferSize::Bits(v),
        SweepAxis::Load => cfg.load = v,
        SweepAxis::Degree => {
            if !(v >= 1.0 && v.fract() == 0.0) {
                return Err(Error::InvalidParameter(format!("degree {v} is not a positive integer")));
            }
            cfg.schedule = degree_schedule(&base.schedule, v as usize, base.seed)?;
        }
    }
    Ok(cfg)
}

/// One run per value, returned in input order.
pub fn sweep(base: &SimConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    let one = |&v: &f64| -> Result<SweepRow> {
        let result = run_sim(&with_value(base, axis, v)?)?;
        Ok(SweepRow { value: v, result })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        values.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        values.iter().map(one).collect()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

pub const SWEEP_CSV_HEADER: &str =
    "value,throughput,delivered_ratio,occupancy_p50_bits,occupancy_p99_bits,fct_p99_short_s,fct_p99_long_s,dropped_bits,drop_events";

pub fn result_csv_row(value: f64, r: &SimResult) -> String {
    format!(
        "{value},{},{},{},{},{},{},{},{}",
        r.throughput,
        r.delivered_ratio,
        r.occupancy.p50,
        r.occupancy.p99,
        opt(r.fct_short.map(|p| p.p99)),
        opt(r.fct_long.map(|p| p.p99)),
        r.dropped_bits,
        r.drop_events
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{}", result_csv_row(r.value, &r.result));
    }
    out
}

/// `slot,node_0,...` rows.
pub fn trace_csv(trace: &[Vec<u64>]) -> String {
    let n = trace.first().map_or(0, Vec::len);
    let mut out = String::from("slot");
    for i in 0..n {
        let _ = write!(out, ",node_{i}");
    }
    out.push('\n');
    for (t, row) in trace.iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::complete_graph_schedule;

    fn complete_cfg(nt: usize, nu: usize, load: f64, buffer: BufferSize) -> SimConfig {
        let sw = complete_graph_schedule(nt, nu).unwrap();
        SimConfig {
            format: FORMAT_VERSION,
            schedule: ScheduleFile::new(nt, nu, 1e-4, 0.0, 400e9, sw),
            buffer,
            routing: Routing::Valiant,
            admission: Admission::Backpressure,
            demand: DemandKind::AllToAll,
            load,
            sizes: FlowSizes::Exponential { mean_bytes: 1e6 },
            duration: 400,
            seed: 1,
            chunk_bytes: 1e5,
            short_flow_bytes: 1e5,
            trace: false,
        }
    }

    #[test]
    fn zero_load_does_nothing() {
        let r = run_sim(&complete_cfg(8, 2, 0.0, BufferSize::Megabytes(10.0))).unwrap();
        assert_eq!(r.throughput, 0.0);
        assert_eq!(r.offered_bits, 0);
        assert_eq!(r.occupancy.max, 0.0);
    }

    #[test]
    fn light_load_is_carried() {
        let r = run_sim(&complete_cfg(8, 2, 0.1, BufferSize::Unbounded)).unwrap();
        assert_eq!(r.dropped_bits, 0);
        assert!((r.throughput - 0.1).abs() < 0.02, "{}", r.throughput);
    }

    #[test]
    fn deterministic() {
        let cfg = complete_cfg(8, 2, 0.3, BufferSize::Megabytes(4.0));
        assert_eq!(run_sim(&cfg).unwrap(), run_sim(&cfg).unwrap());
    }

    #[test]
    fn zero_buffer_drops_nothing_and_carries_nothing() {
        let r = run_sim(&complete_cfg(8, 2, 0.3, BufferSize::Bits(0.0))).unwrap();
        assert_eq!(r.delivered_bits, 0);
        assert_eq!(r.in_flight_bits, r.offered_bits);
    }

    #[test]
    fn validation() {
        let mut c = complete_cfg(8, 2, 0.3, BufferSize::Unbounded);
        c.duration = 39;
        assert!(run_sim(&c).is_err());
        c.duration = 40;
        c.load = 1.2;
        assert!(run_sim(&c).is_err());
    }

    #[test]
    fn packets_unit() {
        assert_eq!(BufferSize::Packets(2.0).bits(), 24_000);
        assert_eq!(BufferSize::Megabytes(20.0).bits(), 160_000_000);
    }

    #[test]
    fn percentiles_nearest_rank() {
        let mut v: Vec<f64> = (1..=100).map(f64::from).collect();
        let p = Percentiles::of(&mut v).unwrap();
        assert_eq!((p.p50, p.p99, p.max), (50.0, 99.0, 100.0));
        assert!(Percentiles::of(&mut []).is_none());
    }

    #[test]
    fn empty_sweep() {
        let c = complete_cfg(8, 2, 0.1, BufferSize::Unbounded);
        assert!(sweep(&c, SweepAxis::Load, &[]).unwrap().is_empty());
        assert_eq!(sweep_csv(&[]).lines().count(), 1);
    }
}
