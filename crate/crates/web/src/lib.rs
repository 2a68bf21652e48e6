//! Browser bindings. Every entry point takes plain numbers and returns JSON
//! text; errors come back as `{"error": ..., "message": ...}`.

use rdcn::analytics::{self, DesignParams};
use rdcn::io::{bits_to_mb, gbps_to_bps, mb_to_bits, s_to_us, us_to_s, ScheduleFile};
use rdcn::sim::{degree_schedule, run_sim, Admission, BufferSize, DemandKind, FlowSizes, Routing, SimConfig};
use rdcn::{Error, ErrorKind};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Simulations longer than this are refused so the page stays responsive.
pub const MAX_SLOTS: u64 = 4000;

fn to_json<T: Serialize>(r: Result<T, Error>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("serializable"),
        Err(e) => {
            let kind = match e.kind() {
                ErrorKind::Validation => "validation",
                ErrorKind::Infeasible => "infeasible",
                ErrorKind::Budget => "budget",
            };
            serde_json::json!({ "error": kind, "message": e.to_string() }).to_string()
        }
    }
}

#[derive(Serialize)]
struct DesignOut {
    degree: usize,
    period: usize,
    theta: f64,
    max_delay_us: f64,
    per_node_buffer_mb: f64,
    switches: Vec<Vec<Vec<usize>>>,
}

/// Degree allowed by the budgets. A non-positive budget means "no limit".
#[wasm_bindgen]
pub fn design(nt: usize, nu: usize, delta_us: f64, cap_gbps: f64, buffer_mb: f64, latency_us: f64) -> String {
    let p = DesignParams {
        nt,
        nu,
        delta: us_to_s(delta_us),
        delta_r: 0.0,
        capacity: gbps_to_bps(cap_gbps),
        buffer: (buffer_mb > 0.0).then(|| mb_to_bits(buffer_mb)),
        latency: (latency_us > 0.0).then(|| us_to_s(latency_us)),
        seed: 0,
    };
    to_json(analytics::design(&p).map(|d| DesignOut {
        degree: d.report.degree,
        period: d.report.period,
        theta: d.report.theta,
        max_delay_us: s_to_us(d.report.max_delay),
        per_node_buffer_mb: bits_to_mb(d.report.per_node_buffer),
        switches: d
            .schedules
            .iter()
            .map(|s| s.iter().map(|m| m.as_slice().to_vec()).collect())
            .collect(),
    }))
}

#[derive(Serialize)]
struct TradeoffOut {
    degree: usize,
    theta: f64,
    delay_us: f64,
    buffer_mb: f64,
}

/// Throughput, delay and buffer for every schedulable degree.
#[wasm_bindgen]
pub fn tradeoff(nt: usize, nu: usize, delta_us: f64, cap_gbps: f64, buffer_mb: f64) -> String {
    let buffer = (buffer_mb > 0.0).then(|| mb_to_bits(buffer_mb));
    to_json(analytics::tradeoff(nt, nu, gbps_to_bps(cap_gbps), us_to_s(delta_us), buffer).map(|rows| {
        rows.into_iter()
            .map(|r| TradeoffOut {
                degree: r.degree,
                theta: r.theta,
                delay_us: s_to_us(r.delay),
                buffer_mb: bits_to_mb(r.buffer),
            })
            .collect::<Vec<_>>()
    }))
}

#[derive(Serialize)]
struct SimOut {
    throughput: f64,
    delivered_ratio: f64,
    occupancy_p99_mb: f64,
    dropped_mb: f64,
}

/// One run under saturated permutation traffic with websearch flow sizes.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    nt: usize,
    nu: usize,
    degree: usize,
    delta_us: f64,
    cap_gbps: f64,
    buffer_mb: f64,
    load: f64,
    slots: u64,
    seed: u64,
) -> String {
    let run = || -> Result<SimOut, Error> {
        if slots > MAX_SLOTS {
            return Err(Error::InvalidParameter(format!("at most {MAX_SLOTS} slots in the browser")));
        }
        let base = ScheduleFile::new(nt, nu, us_to_s(delta_us), 0.0, gbps_to_bps(cap_gbps), vec![]);
        let cfg = SimConfig {
            format: 1,
            schedule: degree_schedule(&base, degree, seed)?,
            buffer: BufferSize::Megabytes(buffer_mb),
            routing: Routing::Valiant,
            admission: Admission::Drop,
            demand: DemandKind::Permutation { seed },
            load,
            sizes: FlowSizes::Websearch,
            duration: slots,
            seed,
            chunk_bytes: 1e5,
            short_flow_bytes: 1e5,
            trace: false,
        };
        let r = run_sim(&cfg)?;
        Ok(SimOut {
            throughput: r.throughput,
            delivered_ratio: r.delivered_ratio,
            occupancy_p99_mb: bits_to_mb(r.occupancy.p99),
            dropped_mb: bits_to_mb(r.dropped_bits as f64),
        })
    };
    to_json(run())
}
