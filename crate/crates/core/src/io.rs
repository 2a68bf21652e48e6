//! File formats. Files use microseconds, Gbps and megabytes; everything
//! inside the crate is seconds, bits per second and bits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::demand::DemandMatrix;
use crate::error::{Error, Result};
use crate::periodic::{build_periodic_graph, EmulatedGraph, PeriodicGraph, SimpleGraph};
use crate::topology::{Edge, SwitchSchedules};

pub const FORMAT_VERSION: u32 = 1;

pub fn us_to_s(us: f64) -> f64 {
    us / 1e6
}

/// Rounded to a femtosecond so that values typed in microseconds survive
/// the round trip.
pub fn s_to_us(s: f64) -> f64 {
    (s * 1e15).round() / 1e9
}

pub fn gbps_to_bps(g: f64) -> f64 {
    g * 1e9
}

pub fn bps_to_gbps(b: f64) -> f64 {
    (b * 1e3).round() / 1e12
}

/// Megabytes (10^6 bytes) to bits.
pub fn mb_to_bits(mb: f64) -> f64 {
    mb * 8e6
}

pub fn bits_to_mb(bits: f64) -> f64 {
    bits / 8e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub format: u32,
    pub nt: usize,
    pub nu: usize,
    pub delta_us: f64,
    pub delta_r_us: f64,
    pub capacity_gbps: f64,
    pub switches: SwitchSchedules,
}

impl ScheduleFile {
    /// From core units.
    pub fn new(nt: usize, nu: usize, delta: f64, delta_r: f64, capacity: f64, switches: SwitchSchedules) -> Self {
        ScheduleFile {
            format: FORMAT_VERSION,
            nt,
            nu,
            delta_us: s_to_us(delta),
            delta_r_us: s_to_us(delta_r),
            capacity_gbps: bps_to_gbps(capacity),
            switches,
        }
    }

    pub fn delta(&self) -> f64 {
        us_to_s(self.delta_us)
    }

    pub fn delta_r(&self) -> f64 {
        us_to_s(self.delta_r_us)
    }

    pub fn capacity(&self) -> f64 {
        gbps_to_bps(self.capacity_gbps)
    }

    pub fn period(&self) -> usize {
        self.switches.first().map_or(0, Vec::len)
    }

    pub fn to_graph(&self) -> Result<PeriodicGraph> {
        if self.format != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported schedule format {}", self.format)));
        }
        build_periodic_graph(self.nt, self.nu, self.delta(), self.delta_r(), &self.switches, self.capacity())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: ScheduleFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        s.to_graph()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialises")
    }
}

/// `src,dst,label,capacity_bps`, one row per circuit.
pub fn emulated_graph_csv(e: &EmulatedGraph) -> String {
    let mut out = String::from("src,dst,label,capacity_bps\n");
    for l in e.edges() {
        let _ = writeln!(out, "{},{},{},{}", l.edge.src, l.edge.dst, l.label, l.capacity);
    }
    out
}

/// One parsed edge-list row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRow {
    pub edge: Edge,
    pub label: Option<usize>,
    /// bits per second
    pub capacity: f64,
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {what} '{}'", raw.trim()),
    })
}

/// Reads `src,dst,capacity_bps` or `src,dst,label,capacity_bps`. A header
/// line is skipped if present; blank lines and `#` comments are ignored.
pub fn parse_edge_csv(text: &str) -> Result<Vec<EdgeRow>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') || (rows.is_empty() && l.starts_with("src")) {
            continue;
        }
        let fields: Vec<&str> = l.split(',').collect();
        let (label, cap) = match fields.len() {
            3 => (None, fields[2]),
            4 => (Some(parse_field(Some(fields[2]), line, "label")?), fields[3]),
            n => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 or 4 fields, found {n}"),
                })
            }
        };
        rows.push(EdgeRow {
            edge: Edge::new(
                parse_field(Some(fields[0]), line, "src")?,
                parse_field(Some(fields[1]), line, "dst")?,
            ),
            label,
            capacity: parse_field(Some(cap), line, "capacity")?,
        });
    }
    Ok(rows)
}

/// Collapses edge rows into a simple graph on `max index + 1` vertices.
pub fn simple_graph_from_rows(rows: &[EdgeRow]) -> Result<SimpleGraph> {
    let n = rows.iter().map(|r| r.edge.src.max(r.edge.dst) + 1).max().unwrap_or(0);
    SimpleGraph::new(n, rows.iter().map(|r| (r.edge, r.capacity)))
}

/// Reads `src,dst,rate_gbps` rows into an `n x n` demand matrix.
pub fn parse_demand_csv(text: &str, n: usize) -> Result<DemandMatrix> {
    let mut m = DemandMatrix::zeros(n);
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') || (!seen_data && l.starts_with("src")) {
            continue;
        }
        seen_data = true;
        let mut f = l.split(',');
        let s: usize = parse_field(f.next(), line, "src")?;
        let d: usize = parse_field(f.next(), line, "dst")?;
        let r: f64 = parse_field(f.next(), line, "rate")?;
        if s >= n || d >= n {
            return Err(Error::Parse {
                line,
                message: format!("pair ({s}, {d}) outside [0, {n})"),
            });
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("rate {r} must be nonnegative"),
            });
        }
        m.set(s, d, m.get(s, d) + gbps_to_bps(r));
    }
    Ok(m)
}
