//! Closed-form throughput, delay and buffer figures, and the degree solvers.
//!
//! Units: seconds, bits and bits per second throughout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::demand::DemandMatrix;
use crate::error::{Error, Result};
use crate::lambert::{lambert_w, Branch, BRANCH_POINT};
use crate::periodic::{temporal_path_delay, ExtendedPath, TemporalPath};
use crate::topology::{assign_to_switches, debruijn_digraph, decompose_matchings, SwitchSchedules};

/// Absorbs float error when flooring ratios that are integral in exact arithmetic.
const FLOOR_EPS: f64 = 1e-9;

/// Anything with a hop count.
pub trait RouteLength {
    fn hops(&self) -> usize;
}

impl RouteLength for TemporalPath {
    fn hops(&self) -> usize {
        self.len()
    }
}

impl RouteLength for ExtendedPath {
    fn hops(&self) -> usize {
        self.len()
    }
}

/// A vertex sequence `s, ..., d`.
impl RouteLength for Vec<usize> {
    fn hops(&self) -> usize {
        self.len().saturating_sub(1)
    }
}

/// Per-pair routes with the fraction of the pair's demand each carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteEnsemble<R> {
    pub routes: BTreeMap<(usize, usize), Vec<(R, f64)>>,
}

impl<R> Default for RouteEnsemble<R> {
    fn default() -> Self {
        RouteEnsemble {
            routes: BTreeMap::new(),
        }
    }
}

impl<R> RouteEnsemble<R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, src: usize, dst: usize, route: R, fraction: f64) {
        self.routes.entry((src, dst)).or_default().push((route, fraction));
    }

    /// Every pair with demand has routes whose fractions lie in `[0, 1]`
    /// and sum to one.
    pub fn check_covers(&self, demand: &DemandMatrix) -> Result<()> {
        for (src, dst, _) in demand.pairs() {
            let Some(rs) = self.routes.get(&(src, dst)).filter(|rs| !rs.is_empty()) else {
                return Err(Error::Coverage { src, dst });
            };
            let sum: f64 = rs.iter().map(|(_, r)| r).sum();
            let bad = rs.iter().any(|(_, r)| !(0.0..=1.0 + 1e-12).contains(r));
            if bad || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::RouteFractions { src, dst, sum });
            }
        }
        Ok(())
    }
}

fn weighted_mean<R>(
    demand: &DemandMatrix,
    routes: &RouteEnsemble<R>,
    value: impl Fn(&R) -> Result<f64>,
) -> Result<f64> {
    routes.check_covers(demand)?;
    let total = demand.total();
    if total <= 0.0 {
        return Err(Error::UndefinedThroughput);
    }
    let mut acc = 0.0;
    for (s, d, m) in demand.pairs() {
        for (route, r) in &routes.routes[&(s, d)] {
            acc += m / total * r * value(route)?;
        }
    }
    Ok(acc)
}

/// Demand- and fraction-weighted mean hop count.
pub fn arl<R: RouteLength>(demand: &DemandMatrix, routes: &RouteEnsemble<R>) -> Result<f64> {
    weighted_mean(demand, routes, |r| Ok(r.hops() as f64))
}

/// Demand- and fraction-weighted mean temporal path delay, seconds.
pub fn ard(
    demand: &DemandMatrix,
    routes: &RouteEnsemble<TemporalPath>,
    delta: f64,
    period: usize,
) -> Result<f64> {
    weighted_mean(demand, routes, |p| temporal_path_delay(p, delta, period))
}

/// `capacity / (demand * arl)`.
pub fn throughput_upper_bound(capacity: f64, demand_total: f64, arl: f64) -> Result<f64> {
    if !(demand_total > 0.0) {
        return Err(Error::UndefinedThroughput);
    }
    if !(arl >= 1.0) {
        return Err(Error::InvalidParameter(format!("average route length {arl} is below one hop")));
    }
    Ok(capacity / (demand_total * arl))
}

/// `log_d(nt)` in real arithmetic.
pub fn log_base(d: usize, nt: usize) -> f64 {
    (nt as f64).ln() / (d as f64).ln()
}

fn check_degree(d: usize, nt: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::DegenerateDegree(d));
    }
    if d > nt {
        return Err(Error::InvalidParameter(format!("degree {d} exceeds {nt} ToRs")));
    }
    Ok(())
}

/// `1 / (2 log_d nt)`.
pub fn unconstrained_theta(d: usize, nt: usize) -> Result<f64> {
    check_degree(d, nt)?;
    Ok(1.0 / (2.0 * log_base(d, nt)))
}

/// `2 log_d(nt) * d * delta / nu`; zero when the period `d / nu` is one.
pub fn delay_estimate(d: usize, nt: usize, nu: usize, delta: f64) -> f64 {
    if d <= nu || d < 2 {
        return 0.0;
    }
    2.0 * log_base(d, nt) * d as f64 * delta / nu as f64
}

/// `d * c * delta` bits.
pub fn per_node_buffer(d: usize, capacity: f64, delta: f64) -> f64 {
    d as f64 * capacity * delta
}

/// Lower bound on total network buffer, `theta * M * ARD` bits.
pub fn buffer_requirement(theta: f64, demand_total: f64, ard: f64) -> f64 {
    theta * demand_total * ard
}

/// Throughput when each node holds only `buffer` bits: scales down
/// linearly once the buffer falls short of `d * c * delta`.
pub fn buffer_limited_theta(d: usize, nt: usize, buffer: f64, capacity: f64, delta: f64) -> Result<f64> {
    let theta = unconstrained_theta(d, nt)?;
    let need = per_node_buffer(d, capacity, delta);
    Ok(if need <= 0.0 { theta } else { theta * (buffer / need).min(1.0) })
}

fn round_to_uplinks(d: usize, nu: usize) -> usize {
    (d / nu) * nu
}

/// Largest schedulable degree whose delay estimate stays within `latency`.
///
/// The feasible degrees form the interval between `exp(-W0(k))` and
/// `exp(-W-1(k))` with `k = -2 ln(nt) delta / (nu latency)`.
pub fn optimal_degree_delay(nt: usize, nu: usize, delta: f64, latency: f64) -> Result<usize> {
    if nt < 2 || nu == 0 {
        return Err(Error::InvalidParameter(format!("need nt >= 2 and nu >= 1 (nt={nt}, nu={nu})")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("timeslot {delta} must be positive")));
    }
    if !(latency >= delta) {
        return Err(Error::InfeasibleDelay(format!(
            "latency {latency} s is shorter than one timeslot ({delta} s)"
        )));
    }
    let k = -2.0 * (nt as f64).ln() * delta / (nu as f64 * latency);
    if k < BRANCH_POINT {
        let min = 2.0 * (nt as f64).ln() * std::f64::consts::E * delta / nu as f64;
        return Err(Error::InfeasibleDelay(format!(
            "latency {latency} s is below the minimum {min} s of any degree"
        )));
    }
    let lo = (-lambert_w(Branch::Principal, k)?).exp();
    let hi = (-lambert_w(Branch::MinusOne, k)?).exp();
    let top = ((hi + FLOOR_EPS).floor() as usize).min(nt);
    let d = round_to_uplinks(top, nu);
    if d < 2 || (d as f64) < lo - FLOOR_EPS {
        return Err(Error::InfeasibleDelay(format!(
            "no multiple of {nu} uplinks lies in the feasible degree range [{lo:.4}, {hi:.4}]"
        )));
    }
    Ok(d)
}

/// `floor(buffer / (c delta))`, clamped to `[2, nt]` and rounded down to a
/// multiple of `nu`.
pub fn optimal_degree_buffer(buffer: f64, capacity: f64, delta: f64, nt: usize, nu: usize) -> Result<usize> {
    let slot_bits = capacity * delta;
    if !(slot_bits > 0.0) {
        return Err(Error::InvalidParameter("capacity and timeslot must be positive".into()));
    }
    if !(buffer >= slot_bits) {
        return Err(Error::InfeasibleBuffer(format!(
            "buffer {buffer} bits holds less than one timeslot ({slot_bits} bits)"
        )));
    }
    if nu == 0 || nt < 2 {
        return Err(Error::InvalidParameter(format!("need nt >= 2 and nu >= 1 (nt={nt}, nu={nu})")));
    }
    let raw = (buffer / slot_bits + FLOOR_EPS).floor().min(nt as f64) as usize;
    let d = round_to_uplinks(raw.max(2), nu);
    if d < 2 {
        return Err(Error::InfeasibleBuffer(format!(
            "no degree that is a multiple of {nu} fits in {buffer} bits"
        )));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub nt: usize,
    pub nu: usize,
    /// seconds
    pub delta: f64,
    /// seconds
    pub delta_r: f64,
    /// bits per second per link
    pub capacity: f64,
    /// bits per node
    pub buffer: Option<f64>,
    /// seconds
    pub latency: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub degree: usize,
    pub period: usize,
    pub theta: f64,
    /// hops
    pub arl: f64,
    /// seconds
    pub ard: f64,
    /// seconds
    pub max_delay: f64,
    /// bits
    pub per_node_buffer: f64,
    /// bits
    pub total_buffer: f64,
}

impl DesignReport {
    /// Figures for a `d`-regular emulation under Valiant routing. A period
    /// of one is treated as a static network: no delay, no buffer.
    pub fn for_degree(d: usize, nt: usize, nu: usize, capacity: f64, delta: f64) -> Result<Self> {
        let theta = unconstrained_theta(d, nt)?;
        if nu == 0 || d % nu != 0 {
            let below = round_to_uplinks(d, nu.max(1));
            return Err(Error::Divisibility {
                degree: d,
                nu,
                below,
                above: below + nu.max(1),
            });
        }
        let period = d / nu;
        let arl = 2.0 * log_base(d, nt);
        let (ard, max_delay, node_buf) = if period == 1 {
            (0.0, 0.0, 0.0)
        } else {
            (
                arl * period as f64 * delta,
                delay_estimate(d, nt, nu, delta),
                per_node_buffer(d, capacity, delta),
            )
        };
        let demand_total = (nt * nu) as f64 * capacity;
        Ok(DesignReport {
            degree: d,
            period,
            theta,
            arl,
            ard,
            max_delay,
            per_node_buffer: node_buf,
            total_buffer: buffer_requirement(theta, demand_total, ard),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub report: DesignReport,
    pub schedules: SwitchSchedules,
}

/// Picks the degree allowed by every supplied constraint and emits the
/// matching deBruijn schedule.
pub fn design(p: &DesignParams) -> Result<Design> {
    if p.buffer.is_none() && p.latency.is_none() {
        return Err(Error::InvalidParameter("supply a buffer or a latency constraint".into()));
    }
    if !(0.0..p.delta).contains(&p.delta_r) {
        return Err(Error::InvalidParameter(format!(
            "reconfiguration time {} must lie in [0, {})",
            p.delta_r, p.delta
        )));
    }
    let mut d = p.nt;
    if let Some(l) = p.latency {
        d = d.min(optimal_degree_delay(p.nt, p.nu, p.delta, l)?);
    }
    if let Some(b) = p.buffer {
        d = d.min(optimal_degree_buffer(b, p.capacity, p.delta, p.nt, p.nu)?);
    }
    let report = DesignReport::for_degree(d, p.nt, p.nu, p.capacity, p.delta)?;
    let matchings = decompose_matchings(&debruijn_digraph(p.nt, d)?)?;
    let schedules = assign_to_switches(&matchings, p.nu, p.seed)?;
    Ok(Design { report, schedules })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub degree: usize,
    pub theta: f64,
    /// seconds
    pub delay: f64,
    /// bits per node
    pub buffer: f64,
}

/// One row per schedulable degree `nu, 2nu, ..., <= nt` (at least 2).
/// With `buffer` set, `theta` is the buffer-limited value.
pub fn tradeoff(nt: usize, nu: usize, capacity: f64, delta: f64, buffer: Option<f64>) -> Result<Vec<TradeoffRow>> {
    if nu == 0 {
        return Err(Error::InvalidParameter("nu must be positive".into()));
    }
    (nu..=nt)
        .step_by(nu)
        .filter(|&d| d >= 2)
        .map(|d| {
            let r = DesignReport::for_degree(d, nt, nu, capacity, delta)?;
            let theta = match buffer {
                Some(b) if r.per_node_buffer > 0.0 => r.theta * (b / r.per_node_buffer).min(1.0),
                _ => r.theta,
            };
            Ok(TradeoffRow {
                degree: d,
                theta,
                delay: r.max_delay,
                buffer: r.per_node_buffer,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub name: String,
    pub degree: usize,
    pub theta: f64,
    /// seconds
    pub delay: f64,
    /// bits per node
    pub buffer: f64,
}

/// The four reference designs: static (`d = nu`), complete (`d = nt`),
/// complete squeezed into `small_buffer`, and the degree chosen for that
/// buffer.
pub fn table2(nt: usize, nu: usize, capacity: f64, delta: f64, small_buffer: f64) -> Result<Vec<Table2Row>> {
    let row = |name: &str, d: usize, buffer: Option<f64>| -> Result<Table2Row> {
        let r = DesignReport::for_degree(d, nt, nu, capacity, delta)?;
        let (theta, buf) = match buffer {
            Some(b) => (buffer_limited_theta(d, nt, b, capacity, delta)?, b.min(r.per_node_buffer)),
            None => (r.theta, r.per_node_buffer),
        };
        Ok(Table2Row {
            name: name.to_string(),
            degree: d,
            theta,
            delay: r.max_delay,
            buffer: buf,
        })
    };
    let mars = optimal_degree_buffer(small_buffer, capacity, delta, nt, nu)?;
    Ok(vec![
        row("static", nu.max(2), None)?,
        row("complete", nt, None)?,
        row("complete-limited", nt, Some(small_buffer))?,
        row("mars", mars, None)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    const US: f64 = 1e-6;
    const MB: f64 = 8e6;
    const C: f64 = 400e9;

    #[test]
    fn theta_star_values() {
        assert_eq!(unconstrained_theta(16, 16).unwrap(), 0.5);
        assert_eq!(unconstrained_theta(4, 16).unwrap(), 0.25);
        assert_eq!(unconstrained_theta(2, 16).unwrap(), 0.125);
        assert!(matches!(unconstrained_theta(1, 16), Err(Error::DegenerateDegree(1))));
    }

    #[test]
    fn delay_values() {
        assert!((delay_estimate(16, 16, 2, 100.0 * US) - 1600.0 * US).abs() < 1e-12);
        assert!((delay_estimate(4, 16, 2, 100.0 * US) - 800.0 * US).abs() < 1e-12);
        assert_eq!(delay_estimate(2, 16, 2, 100.0 * US), 0.0);
    }

    #[test]
    fn buffer_values() {
        assert_eq!(per_node_buffer(16, C, 100.0 * US) / MB, 80.0);
        assert_eq!(per_node_buffer(4, C, 100.0 * US) / MB, 20.0);
        assert_eq!(per_node_buffer(2, C, 100.0 * US) / MB, 10.0);
    }

    #[test]
    fn delay_solver() {
        assert_eq!(optimal_degree_delay(16, 2, 100.0 * US, 850.0 * US).unwrap(), 4);
        assert_eq!(optimal_degree_delay(16, 2, 100.0 * US, 1600.0 * US).unwrap(), 16);
        assert_eq!(optimal_degree_delay(16, 2, 100.0 * US, 1.0).unwrap(), 16);
        assert!(matches!(
            optimal_degree_delay(16, 2, 100.0 * US, 1.0 * US),
            Err(Error::InfeasibleDelay(_))
        ));
        assert!(matches!(
            optimal_degree_delay(16, 2, 100.0 * US, 700.0 * US),
            Err(Error::InfeasibleDelay(_))
        ));
    }

    #[test]
    fn buffer_solver() {
        assert_eq!(optimal_degree_buffer(20.0 * MB, C, 100.0 * US, 16, 2).unwrap(), 4);
        assert_eq!(optimal_degree_buffer(80.0 * MB, C, 100.0 * US, 16, 2).unwrap(), 16);
        assert_eq!(optimal_degree_buffer(10.0 * MB, C, 100.0 * US, 16, 2).unwrap(), 2);
        assert_eq!(optimal_degree_buffer(1e3 * MB, C, 100.0 * US, 16, 2).unwrap(), 16);
        assert_eq!(optimal_degree_buffer(30.0 * MB, C, 100.0 * US, 16, 2).unwrap(), 6);
        assert!(matches!(
            optimal_degree_buffer(1.0 * MB, C, 100.0 * US, 16, 2),
            Err(Error::InfeasibleBuffer(_))
        ));
    }

    #[test]
    fn design_mars_row() {
        let p = DesignParams {
            nt: 16,
            nu: 2,
            delta: 100.0 * US,
            delta_r: 10.0 * US,
            capacity: C,
            buffer: Some(20.0 * MB),
            latency: Some(850.0 * US),
            seed: 0,
        };
        let d = design(&p).unwrap();
        assert_eq!(d.report.degree, 4);
        assert_eq!(d.report.period, 2);
        assert_eq!(d.report.theta, 0.25);
        assert_eq!(d.report.per_node_buffer / MB, 20.0);
        assert!((d.report.max_delay - 800.0 * US).abs() < 1e-12);
        assert!((d.report.total_buffer - 16.0 * 20.0 * MB).abs() < 1.0);
        assert_eq!(d.schedules.len(), 2);

        let only_b = design(&DesignParams { latency: None, buffer: Some(80.0 * MB), ..p }).unwrap();
        assert_eq!((only_b.report.degree, only_b.report.period), (16, 8));
        assert!(design(&DesignParams { latency: None, buffer: None, ..p }).is_err());
    }

    #[test]
    fn table2_rows() {
        let rows = table2(16, 2, C, 100.0 * US, 20.0 * MB).unwrap();
        let t: Vec<(usize, f64, f64, f64)> = rows
            .iter()
            .map(|r| (r.degree, r.theta, (r.delay / US * 1e6).round() / 1e6, r.buffer / MB))
            .collect();
        assert_eq!(
            t,
            vec![
                (2, 0.125, 0.0, 0.0),
                (16, 0.5, 1600.0, 80.0),
                (16, 0.125, 1600.0, 20.0),
                (4, 0.25, 800.0, 20.0)
            ]
        );
    }

    #[test]
    fn arl_of_four_cycle() {
        let demand = DemandMatrix::all_to_all(4, 3.0);
        let mut routes = RouteEnsemble::new();
        for s in 0..4 {
            for k in 1..4 {
                let path: Vec<usize> = (0..=k).map(|i| (s + i) % 4).collect();
                routes.insert(s, (s + k) % 4, path, 1.0);
            }
        }
        assert!((arl(&demand, &routes).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn arl_coverage_and_fractions() {
        let demand = DemandMatrix::permutation(&[1, 0], 1.0);
        let mut routes: RouteEnsemble<Vec<usize>> = RouteEnsemble::new();
        routes.insert(0, 1, vec![0, 1], 1.0);
        assert!(matches!(arl(&demand, &routes), Err(Error::Coverage { src: 1, dst: 0 })));
        routes.insert(1, 0, vec![1, 0], 0.5);
        assert!(matches!(arl(&demand, &routes), Err(Error::RouteFractions { .. })));
    }

    #[test]
    fn bound_arithmetic() {
        assert_eq!(throughput_upper_bound(10.0, 10.0, 2.0).unwrap(), 0.5);
        assert!(throughput_upper_bound(10.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn limited_theta() {
        assert_eq!(buffer_limited_theta(16, 16, 20.0 * MB, C, 100.0 * US).unwrap(), 0.125);
        assert_eq!(buffer_limited_theta(4, 16, 20.0 * MB, C, 100.0 * US).unwrap(), 0.25);
    }
}
