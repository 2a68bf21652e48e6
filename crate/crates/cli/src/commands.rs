use std::fmt::Write as _;
use std::io::Read as _;
use std::path::Path;

use rdcn::analytics::{design, table2, throughput_upper_bound, DesignParams, DesignReport};
use rdcn::io::{
    bits_to_mb, bps_to_gbps, emulated_graph_csv, gbps_to_bps, mb_to_bits, parse_demand_csv, parse_edge_csv,
    s_to_us, simple_graph_from_rows, us_to_s, ScheduleFile, FORMAT_VERSION,
};
use rdcn::oracle::{
    max_concurrent_flow, max_concurrent_flow_emulated, permutation_demand, temporal_max_flow, worst_case_permutation,
    Diagnostics, OracleOptions, OracleResult, WitnessPath,
};
use rdcn::periodic::{emulated_graph, simple_emulated_graph, SimpleGraph};
use rdcn::sim::{result_csv_row, run_sim, sweep, trace_csv, BufferSize, SimConfig, SweepAxis, SWEEP_CSV_HEADER};
use rdcn::topology::{EmulatedGraphSpec, GraphKind};
use rdcn::{DemandMatrix, Error, Result};
use serde::Serialize;

use crate::{io_err, Command, Fabric, SimArgs};

pub fn run(cmd: Command) -> Result<String> {
    match cmd {
        Command::Design {
            fabric,
            buffer_mb,
            latency_us,
            seed,
            out,
        } => cmd_design(fabric, buffer_mb, latency_us, seed, out.as_deref()),
        Command::GenSchedule {
            fabric,
            kind,
            degree,
            seed,
            out,
            edges_csv,
        } => cmd_gen_schedule(fabric, &kind, degree, seed, out.as_deref(), edges_csv.as_deref()),
        Command::Analyze { schedule, demand } => cmd_analyze(&schedule, demand.as_deref()),
        Command::Oracle {
            graph,
            schedule,
            complete,
            demand,
            perm,
            worst_case,
            temporal,
            hop_cap,
        } => {
            let topo = match (graph, schedule, complete) {
                (Some(p), _, _) => Topology::Edges(p),
                (_, Some(p), _) => Topology::Schedule(p),
                (_, _, Some(n)) => Topology::Complete(n),
                _ => return Err(Error::InvalidParameter("supply --graph, --schedule or --complete".into())),
            };
            let dm = match (demand, perm, worst_case) {
                (Some(p), _, _) => DemandSource::File(p),
                (_, Some(p), _) => DemandSource::Perm(p),
                (_, _, true) => DemandSource::WorstCase,
                _ => return Err(Error::InvalidParameter("supply --demand, --perm or --worst-case".into())),
            };
            cmd_oracle(topo, dm, temporal, hop_cap)
        }
        Command::Simulate { sim, json, trace_csv } => cmd_simulate(&sim, json, trace_csv.as_deref()),
        Command::Sweep { sim, axis, values } => cmd_sweep(&sim, &axis, &values),
        Command::Table2 { fabric, small_buffer_mb } => cmd_table2(fabric, small_buffer_mb),
    }
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn check_fabric(f: &Fabric) -> Result<()> {
    for (name, v) in [("delta-us", f.delta_us), ("cap-gbps", f.cap_gbps)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("--{name} must be positive (got {v})")));
        }
    }
    if !(f.delta_r_us >= 0.0 && f.delta_r_us < f.delta_us) {
        return Err(Error::InvalidParameter(format!(
            "--delta-r-us must lie in [0, {}) (got {})",
            f.delta_us, f.delta_r_us
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportOut {
    format: u32,
    degree: usize,
    period: usize,
    theta: f64,
    arl: f64,
    ard_us: f64,
    max_delay_us: f64,
    per_node_buffer_mb: f64,
    total_buffer_mb: f64,
}

impl From<&DesignReport> for ReportOut {
    fn from(r: &DesignReport) -> Self {
        ReportOut {
            format: FORMAT_VERSION,
            degree: r.degree,
            period: r.period,
            theta: r.theta,
            arl: r.arl,
            ard_us: s_to_us(r.ard),
            max_delay_us: s_to_us(r.max_delay),
            per_node_buffer_mb: bits_to_mb(r.per_node_buffer),
            total_buffer_mb: bits_to_mb(r.total_buffer),
        }
    }
}

fn cmd_design(
    f: Fabric,
    buffer_mb: Option<f64>,
    latency_us: Option<f64>,
    seed: u64,
    out: Option<&Path>,
) -> Result<String> {
    check_fabric(&f)?;
    let p = DesignParams {
        nt: f.nt,
        nu: f.nu,
        delta: us_to_s(f.delta_us),
        delta_r: us_to_s(f.delta_r_us),
        capacity: gbps_to_bps(f.cap_gbps),
        buffer: buffer_mb.map(mb_to_bits),
        latency: latency_us.map(us_to_s),
        seed,
    };
    let d = design(&p)?;
    let report = pretty(&ReportOut::from(&d.report));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let sched = ScheduleFile::new(p.nt, p.nu, p.delta, p.delta_r, p.capacity, d.schedules);
        write_text(&dir.join("schedule.json"), &(sched.to_json() + "\n"))?;
        write_text(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}

fn cmd_gen_schedule(
    f: Fabric,
    kind: &str,
    degree: Option<usize>,
    seed: u64,
    out: Option<&Path>,
    edges_csv: Option<&Path>,
) -> Result<String> {
    check_fabric(&f)?;
    let kind: GraphKind = kind.parse()?;
    let degree = degree.unwrap_or(match kind {
        GraphKind::Complete => f.nt,
        _ => f.nu,
    });
    let spec = EmulatedGraphSpec {
        kind,
        nt: f.nt,
        degree,
        seed,
    };
    let switches = spec.schedules(f.nu)?;
    let sched = ScheduleFile::new(
        f.nt,
        f.nu,
        us_to_s(f.delta_us),
        us_to_s(f.delta_r_us),
        gbps_to_bps(f.cap_gbps),
        switches,
    );
    let json = sched.to_json() + "\n";
    if let Some(p) = edges_csv {
        write_text(p, &emulated_graph_csv(&emulated_graph(&sched.to_graph()?)))?;
    }
    match out {
        Some(p) => {
            write_text(p, &json)?;
            Ok(String::new())
        }
        None => Ok(json),
    }
}

#[derive(Serialize)]
struct AnalysisOut {
    format: u32,
    nt: usize,
    nu: usize,
    period: usize,
    delta_us: f64,
    delta_r_us: f64,
    capacity_gbps: f64,
    /// Out-degree of the emulated graph when it is regular.
    degree: Option<usize>,
    diameter: Option<usize>,
    theta: Option<f64>,
    max_delay_us: Option<f64>,
    per_node_buffer_mb: Option<f64>,
    emulated_capacity_gbps: f64,
    /// Demand-weighted shortest-path length.
    arl_shortest: Option<f64>,
    /// Capacity over demand times shortest-path route length.
    throughput_bound: Option<f64>,
}

/// Demand-weighted shortest hop count; `None` if a demanded pair is cut off.
fn shortest_arl(g: &SimpleGraph, m: &DemandMatrix) -> Option<f64> {
    let dist = g.hop_distances();
    let total = m.total();
    if total <= 0.0 {
        return None;
    }
    let mut acc = 0.0;
    for (s, d, r) in m.pairs() {
        acc += r * dist[s][d]? as f64;
    }
    Some(acc / total)
}

fn cmd_analyze(schedule: &Path, demand: Option<&Path>) -> Result<String> {
    let sched = ScheduleFile::from_json(&read_text(schedule)?)?;
    let g = sched.to_graph()?;
    let e = emulated_graph(&g);
    let digraph = e.to_digraph();
    let out_deg = digraph.out_degrees();
    let degree = out_deg.first().copied().filter(|&d| digraph.check_regular(d).is_ok());
    let report = degree.and_then(|d| DesignReport::for_degree(d, sched.nt, sched.nu, sched.capacity(), sched.delta()).ok());
    let sg = simple_emulated_graph(&g);
    let m = match demand {
        Some(p) => parse_demand_csv(&read_text(p)?, sched.nt)?,
        None => DemandMatrix::all_to_all(sched.nt, sched.nu as f64 * sched.capacity()),
    };
    let arl = shortest_arl(&sg, &m);
    let bound = arl.and_then(|a| throughput_upper_bound(sg.total_capacity(), m.total(), a).ok());
    Ok(pretty(&AnalysisOut {
        format: FORMAT_VERSION,
        nt: sched.nt,
        nu: sched.nu,
        period: g.period(),
        delta_us: sched.delta_us,
        delta_r_us: sched.delta_r_us,
        capacity_gbps: sched.capacity_gbps,
        degree,
        diameter: sg.diameter(),
        theta: report.as_ref().map(|r| r.theta),
        max_delay_us: report.as_ref().map(|r| s_to_us(r.max_delay)),
        per_node_buffer_mb: report.as_ref().map(|r| bits_to_mb(r.per_node_buffer)),
        emulated_capacity_gbps: bps_to_gbps(e.total_capacity()),
        arl_shortest: arl,
        throughput_bound: bound,
    }))
}

enum Topology {
    Edges(std::path::PathBuf),
    Schedule(std::path::PathBuf),
    Complete(usize),
}

enum DemandSource {
    File(std::path::PathBuf),
    Perm(Vec<usize>),
    WorstCase,
}

#[derive(Serialize)]
struct OracleOut {
    format: u32,
    theta: f64,
    arl: f64,
    /// Usable capacity over demand times the witness route length.
    capacity_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive: Option<bool>,
    witness: Vec<WitnessPath>,
    diagnostics: Diagnostics,
}

fn check_perm(p: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &v in p {
        if v >= n || seen[v] {
            return Err(Error::InvalidParameter(format!("--perm is not a permutation of 0..{n}")));
        }
        seen[v] = true;
    }
    if p.len() != n {
        return Err(Error::InvalidParameter(format!("--perm has {} entries, expected {n}", p.len())));
    }
    Ok(())
}

fn cmd_oracle(topo: Topology, dm: DemandSource, temporal: bool, hop_cap: Option<usize>) -> Result<String> {
    let opts = OracleOptions {
        hop_cap,
        ..OracleOptions::default()
    };
    let sched = match &topo {
        Topology::Schedule(p) => Some(ScheduleFile::from_json(&read_text(p)?)?),
        _ => None,
    };
    let graph = sched.as_ref().map(ScheduleFile::to_graph).transpose()?;
    let simple = match &topo {
        Topology::Edges(p) => simple_graph_from_rows(&parse_edge_csv(&read_text(p)?)?)?,
        Topology::Schedule(_) => simple_emulated_graph(graph.as_ref().expect("schedule parsed")),
        Topology::Complete(n) => {
            if *n < 2 {
                return Err(Error::InvalidParameter("--complete needs at least 2 vertices".into()));
            }
            SimpleGraph::complete(*n, 1.0, false)
        }
    };
    let n = simple.num_vertices();
    let mut permutation = None;
    let mut exhaustive = None;
    let demand = match dm {
        DemandSource::File(p) => parse_demand_csv(&read_text(&p)?, n)?,
        DemandSource::Perm(p) => {
            check_perm(&p, n)?;
            permutation_demand(&simple, &p)
        }
        DemandSource::WorstCase => {
            if temporal {
                return Err(Error::InvalidParameter("--worst-case searches the emulated graph only".into()));
            }
            let w = worst_case_permutation(&simple, &opts)?;
            exhaustive = Some(w.exhaustive);
            let m = permutation_demand(&simple, &w.permutation);
            permutation = Some(w.permutation);
            m
        }
    };
    let r: OracleResult = match (&graph, temporal) {
        (Some(g), true) => temporal_max_flow(g, &demand, &opts)?,
        (Some(g), false) => max_concurrent_flow_emulated(&emulated_graph(g), &demand, &opts)?,
        (None, _) => max_concurrent_flow(&simple, &demand, &opts)?,
    };
    let usable: f64 = simple.edges().filter(|(e, _)| !e.is_self_loop()).map(|(_, c)| c).sum();
    let capacity_bound = (r.theta > 0.0).then(|| usable / (demand.total() * r.arl));
    Ok(pretty(&OracleOut {
        format: FORMAT_VERSION,
        theta: r.theta,
        arl: r.arl,
        capacity_bound,
        permutation,
        exhaustive,
        witness: r.witness,
        diagnostics: r.diagnostics,
    }))
}

fn load_config(a: &SimArgs) -> Result<SimConfig> {
    let mut v: serde_json::Value =
        serde_json::from_str(&read_text(&a.config)?).map_err(|e| Error::Format(e.to_string()))?;
    if let Some(p) = &a.schedule {
        let s = ScheduleFile::from_json(&read_text(p)?)?;
        v["schedule"] = serde_json::to_value(s).expect("schedule serialises");
    }
    let mut cfg: SimConfig = serde_json::from_value(v).map_err(|e| Error::Format(e.to_string()))?;
    if let Some(l) = a.load {
        cfg.load = l;
    }
    if let Some(b) = a.buffer_mb {
        cfg.buffer = BufferSize::Megabytes(b);
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(d) = a.duration {
        cfg.duration = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(a: &SimArgs, json: bool, trace: Option<&Path>) -> Result<String> {
    let mut cfg = load_config(a)?;
    cfg.trace = trace.is_some();
    let mut r = run_sim(&cfg)?;
    if let (Some(p), Some(t)) = (trace, r.trace.take()) {
        write_text(p, &trace_csv(&t))?;
    }
    if json {
        return Ok(pretty(&r));
    }
    Ok(format!("{SWEEP_CSV_HEADER}\n{}\n", result_csv_row(cfg.load, &r)))
}

fn cmd_sweep(a: &SimArgs, axis: &str, values: &[f64]) -> Result<String> {
    let cfg = load_config(a)?;
    let axis: SweepAxis = axis.parse()?;
    let core: Vec<f64> = match axis {
        SweepAxis::Buffer => values.iter().map(|&mb| mb_to_bits(mb)).collect(),
        _ => values.to_vec(),
    };
    let rows = sweep(&cfg, axis, &core)?;
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for (v, row) in values.iter().zip(&rows) {
        let _ = writeln!(out, "{}", result_csv_row(*v, &row.result));
    }
    Ok(out)
}

fn cmd_table2(f: Fabric, small_buffer_mb: f64) -> Result<String> {
    check_fabric(&f)?;
    let rows = table2(
        f.nt,
        f.nu,
        gbps_to_bps(f.cap_gbps),
        us_to_s(f.delta_us),
        mb_to_bits(small_buffer_mb),
    )?;
    let mut out = String::from("name,degree,theta,delay_us,buffer_mb\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.name,
            r.degree,
            r.theta,
            s_to_us(r.delay),
            bits_to_mb(r.buffer)
        );
    }
    Ok(out)
}
