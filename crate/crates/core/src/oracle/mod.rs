//! Exact max-concurrent-flow at desk scale.
//!
//! The path formulation
//!
//! ```text
//! max theta
//!   theta * m_k - gain * sum_{p in k} x_p <= 0     for every commodity k
//!   sum_{p through a} x_p                  <= c_a  for every arc a
//! ```
//!
//! is solved by column generation. Static instances price columns with a
//! hop-capped Bellman-Ford on the arc duals; temporal instances price from
//! the enumerated foundation paths.

pub mod simplex;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::demand::DemandMatrix;
use crate::error::{Error, Result};
use crate::periodic::{
    enumerate_foundation_paths, EmulatedGraph, ExtendedPath, PeriodicGraph, SimpleGraph, StaticFlow,
    TemporalFlow, TemporalPath,
};
use crate::topology::Edge;
use simplex::{Lp, Status};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Largest static instance accepted.
    pub node_limit: usize,
    /// Largest temporal instance accepted.
    pub temporal_node_limit: usize,
    pub temporal_period_limit: usize,
    /// Longest path considered; `None` means unbounded for static instances
    /// and diameter plus two for temporal ones.
    pub hop_cap: Option<usize>,
    /// Upper bound on enumerated foundation paths.
    pub path_budget: usize,
    pub max_pivots: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            node_limit: 16,
            temporal_node_limit: 6,
            temporal_period_limit: 3,
            hop_cap: None,
            path_budget: 500_000,
            max_pivots: 2_000_000,
        }
    }
}

/// One witness path: the vertex sequence, hop times or labels when the
/// path is temporal or extended, and its rate in bits per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPath {
    pub vertices: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
    pub rate: f64,
}

impl WitnessPath {
    pub fn hops(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub columns: usize,
    pub pivots: usize,
    pub rounds: usize,
    pub rows: usize,
    pub enumerated_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub theta: f64,
    /// Demand-weighted mean hop count of the witness; zero when theta is.
    pub arl: f64,
    pub witness: Vec<WitnessPath>,
    pub diagnostics: Diagnostics,
}

impl OracleResult {
    fn zero(rows: usize) -> Self {
        OracleResult {
            theta: 0.0,
            arl: 0.0,
            witness: Vec::new(),
            diagnostics: Diagnostics {
                rows,
                ..Diagnostics::default()
            },
        }
    }

    /// Rebuilds the witness as a flow on foundation temporal paths.
    pub fn temporal_flow(&self) -> Option<TemporalFlow> {
        let mut f = TemporalFlow::new();
        for w in &self.witness {
            let times = w.times.as_ref()?;
            f.add(path_from(&w.vertices, times), w.rate);
        }
        Some(f)
    }

    /// Rebuilds a labelled witness as a flow on extended paths.
    pub fn static_flow(&self, period: usize) -> Option<Result<StaticFlow>> {
        let mut f = StaticFlow::new();
        for w in &self.witness {
            let labels = w.labels.as_ref()?;
            let hops = w
                .vertices
                .windows(2)
                .zip(labels)
                .map(|(uv, &l)| (Edge::new(uv[0], uv[1]), l))
                .collect();
            match ExtendedPath::from_labels(hops, labels[0] as u64, period) {
                Ok(p) => f.add(p, w.rate),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(f))
    }
}

fn path_from(vertices: &[usize], times: &[u64]) -> TemporalPath {
    TemporalPath::new(
        vertices
            .windows(2)
            .zip(times)
            .map(|(uv, &t)| (Edge::new(uv[0], uv[1]), t))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    src: usize,
    dst: usize,
    cap: f64,
}

#[derive(Debug, Clone, Copy)]
struct Commodity {
    src: usize,
    dst: usize,
    demand: f64,
}

/// A column: commodity index and the arcs it uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Column {
    commodity: usize,
    arcs: Vec<usize>,
}

trait Pricer {
    /// Cheapest column per commodity under arc weights; `None` if no path.
    fn cheapest(&mut self, weights: &[f64], commodity: usize) -> Option<(Vec<usize>, f64)>;
}

struct Solution {
    theta: f64,
    flows: Vec<(Column, f64)>,
    diagnostics: Diagnostics,
}

/// Normalised column generation. Capacities and demands should be O(1).
fn column_generation(
    arcs: &[Arc],
    commodities: &[Commodity],
    gain: f64,
    pricer: &mut dyn Pricer,
    max_pivots: usize,
) -> Result<Solution> {
    let k = commodities.len();
    let rows = k + arcs.len();
    let mut b = vec![0.0; k];
    b.extend(arcs.iter().map(|a| a.cap));
    let mut lp = Lp::new(b);

    let theta_entries: Vec<(usize, f64)> = commodities.iter().enumerate().map(|(i, c)| (i, c.demand)).collect();
    lp.add_column(1.0, &theta_entries);

    let mut columns: Vec<Column> = Vec::new();
    let mut seen: HashSet<Column> = HashSet::new();
    let add = |lp: &mut Lp, columns: &mut Vec<Column>, col: Column| {
        let mut entries = vec![(col.commodity, -gain)];
        entries.extend(col.arcs.iter().map(|&a| (k + a, 1.0)));
        lp.add_column(0.0, &entries);
        columns.push(col);
    };

    // Seed with hop-shortest paths; an unroutable commodity pins theta at 0.
    let unit = vec![1.0; arcs.len()];
    for i in 0..k {
        match pricer.cheapest(&unit, i) {
            Some((path, _)) => {
                let col = Column { commodity: i, arcs: path };
                seen.insert(col.clone());
                add(&mut lp, &mut columns, col);
            }
            None => {
                return Ok(Solution {
                    theta: 0.0,
                    flows: Vec::new(),
                    diagnostics: Diagnostics {
                        rows,
                        ..Diagnostics::default()
                    },
                })
            }
        }
    }

    let mut rounds = 0;
    loop {
        rounds += 1;
        match lp.solve(max_pivots.saturating_sub(lp.pivots())) {
            Status::Optimal => {}
            Status::Unbounded => {
                return Err(Error::IllegalFlow("flow LP reported unbounded".into()));
            }
            Status::IterationLimit => {
                return Err(Error::OracleTooLarge(format!("no optimum within {max_pivots} pivots")));
            }
        }
        let duals = lp.duals().to_vec();
        let weights: Vec<f64> = duals[k..].iter().map(|z| z.max(0.0)).collect();
        let mut added = 0;
        for i in 0..k {
            let target = gain * duals[i];
            if target <= 1e-12 {
                continue;
            }
            if let Some((path, cost)) = pricer.cheapest(&weights, i) {
                if cost < target - 1e-10 * target.max(1.0) {
                    let col = Column { commodity: i, arcs: path };
                    if seen.insert(col.clone()) {
                        add(&mut lp, &mut columns, col);
                        added += 1;
                    }
                }
            }
        }
        if added == 0 {
            break;
        }
    }

    let values: Vec<f64> = (0..columns.len()).map(|j| lp.value(j + 1)).collect();
    let mut delivered = vec![0.0; k];
    for (col, &x) in columns.iter().zip(&values) {
        delivered[col.commodity] += gain * x;
    }
    let theta = commodities
        .iter()
        .zip(&delivered)
        .map(|(c, d)| d / c.demand)
        .fold(f64::INFINITY, f64::min);

    // Trim every commodity to exactly theta * m_k.
    let flows = columns
        .into_iter()
        .zip(values)
        .filter(|(_, x)| *x > 0.0)
        .map(|(col, x)| {
            let d = delivered[col.commodity];
            let scale = if d > 0.0 { theta * commodities[col.commodity].demand / d } else { 0.0 };
            (col, x * scale)
        })
        .filter(|(_, x)| *x > 0.0)
        .collect();

    Ok(Solution {
        theta,
        flows,
        diagnostics: Diagnostics {
            columns: seen.len(),
            pivots: lp.pivots(),
            rounds,
            rows,
            enumerated_paths: 0,
        },
    })
}

/// Hop-capped Bellman-Ford over arbitrary (possibly parallel) arcs.
struct ShortestPaths<'a> {
    n: usize,
    arcs: &'a [Arc],
    commodities: &'a [Commodity],
    cap: usize,
}

impl Pricer for ShortestPaths<'_> {
    fn cheapest(&mut self, weights: &[f64], commodity: usize) -> Option<(Vec<usize>, f64)> {
        let Commodity { src, dst, .. } = self.commodities[commodity];
        let n = self.n;
        let mut dist = vec![f64::INFINITY; n];
        dist[src] = 0.0;
        // pred[h][v]: arc used to reach v in exactly layer h
        let mut layers: Vec<Vec<Option<usize>>> = Vec::with_capacity(self.cap);
        let mut best: Option<(f64, usize)> = None;
        for h in 0..self.cap {
            let mut next = dist.clone();
            let mut pred = vec![None; n];
            for (ai, a) in self.arcs.iter().enumerate() {
                if a.src == a.dst || dist[a.src].is_infinite() {
                    continue;
                }
                let cand = dist[a.src] + weights[ai];
                if cand < next[a.dst] - 1e-15 {
                    next[a.dst] = cand;
                    pred[a.dst] = Some(ai);
                }
            }
            layers.push(pred);
            dist = next;
            if dist[dst].is_finite() && best.is_none_or(|(c, _)| dist[dst] < c - 1e-15) {
                best = Some((dist[dst], h));
            }
        }
        let (_, layer) = best?;
        // Walk predecessors back through the layers. A vertex whose distance
        // did not improve in layer h keeps its predecessor from an earlier one.
        let mut walk = Vec::new();
        let mut v = dst;
        let mut h = layer as isize;
        while v != src {
            while h >= 0 && layers[h as usize][v].is_none() {
                h -= 1;
            }
            if h < 0 {
                return None;
            }
            let ai = layers[h as usize][v].expect("checked above");
            walk.push(ai);
            v = self.arcs[ai].src;
            h -= 1;
        }
        walk.reverse();
        let path = remove_cycles(&walk, self.arcs, src);
        let cost = path.iter().map(|&a| weights[a]).sum();
        Some((path, cost))
    }
}

/// Drops closed sub-walks so every vertex appears once.
fn remove_cycles(walk: &[usize], arcs: &[Arc], src: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut verts = vec![src];
    for &a in walk {
        let v = arcs[a].dst;
        if let Some(pos) = verts.iter().position(|&u| u == v) {
            verts.truncate(pos + 1);
            out.truncate(pos);
        } else {
            verts.push(v);
            out.push(a);
        }
    }
    out
}

/// Prices by scanning a fixed pool of columns per commodity.
struct Pool {
    by_commodity: Vec<Vec<Vec<usize>>>,
}

impl Pricer for Pool {
    fn cheapest(&mut self, weights: &[f64], commodity: usize) -> Option<(Vec<usize>, f64)> {
        self.by_commodity[commodity]
            .iter()
            .map(|p| (p, p.iter().map(|&a| weights[a]).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.len().cmp(&b.0.len())))
            .map(|(p, c)| (p.clone(), c))
    }
}

fn commodities_of(demand: &DemandMatrix, mmax: f64) -> Vec<Commodity> {
    demand
        .pairs()
        .map(|(src, dst, m)| Commodity {
            src,
            dst,
            demand: m / mmax,
        })
        .collect()
}

fn witness_arl(flows: &[WitnessPath], gain: f64, theta: f64, demand_total: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    flows.iter().map(|w| gain * w.rate * w.hops() as f64).sum::<f64>() / (theta * demand_total)
}

fn check_demand(demand: &DemandMatrix, n: usize) -> Result<f64> {
    if demand.size() != n {
        return Err(Error::InvalidParameter(format!(
            "demand matrix is {}x{} but the graph has {n} vertices",
            demand.size(),
            demand.size()
        )));
    }
    let mmax = demand.max_entry();
    if mmax <= 0.0 {
        return Err(Error::UndefinedThroughput);
    }
    Ok(mmax)
}

fn static_solve(
    n: usize,
    arcs_raw: Vec<(Edge, Option<usize>, f64)>,
    demand: &DemandMatrix,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    if n > opts.node_limit {
        return Err(Error::OracleTooLarge(format!(
            "{n} vertices exceed the oracle limit of {}",
            opts.node_limit
        )));
    }
    let mmax = check_demand(demand, n)?;
    let cmax = arcs_raw.iter().map(|a| a.2).fold(0.0, f64::max);
    let commodities = commodities_of(demand, mmax);
    if cmax <= 0.0 {
        return Ok(OracleResult::zero(commodities.len()));
    }
    let usable: Vec<&(Edge, Option<usize>, f64)> =
        arcs_raw.iter().filter(|a| a.2 > 0.0 && !a.0.is_self_loop()).collect();
    let arcs: Vec<Arc> = usable
        .iter()
        .map(|a| Arc {
            src: a.0.src,
            dst: a.0.dst,
            cap: a.2 / cmax,
        })
        .collect();
    let cap = opts.hop_cap.unwrap_or(n.saturating_sub(1)).min(n.saturating_sub(1)).max(1);
    let mut pricer = ShortestPaths {
        n,
        arcs: &arcs,
        commodities: &commodities,
        cap,
    };
    let sol = column_generation(&arcs, &commodities, 1.0, &mut pricer, opts.max_pivots)?;
    let theta = sol.theta * cmax / mmax;
    let witness: Vec<WitnessPath> = sol
        .flows
        .iter()
        .map(|(col, x)| {
            let mut vertices = vec![commodities[col.commodity].src];
            vertices.extend(col.arcs.iter().map(|&a| arcs[a].dst));
            let labels = usable[col.arcs[0]].1.map(|_| col.arcs.iter().map(|&a| usable[a].1.unwrap_or(0)).collect());
            WitnessPath {
                vertices,
                times: None,
                labels,
                rate: x * cmax,
            }
        })
        .collect();
    Ok(OracleResult {
        theta,
        arl: witness_arl(&witness, 1.0, theta, demand.total()),
        witness,
        diagnostics: sol.diagnostics,
    })
}

/// Exact throughput of `demand` on a weighted simple digraph.
pub fn max_concurrent_flow(g: &SimpleGraph, demand: &DemandMatrix, opts: &OracleOptions) -> Result<OracleResult> {
    let arcs = g.edges().map(|(e, c)| (e, None, c)).collect();
    static_solve(g.num_vertices(), arcs, demand, opts)
}

/// Same, on the labelled multigraph; the witness carries labels and
/// converts to extended paths.
pub fn max_concurrent_flow_emulated(
    e: &EmulatedGraph,
    demand: &DemandMatrix,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    let arcs = e
        .labeled_capacities()
        .into_iter()
        .map(|((edge, label), c)| (edge, Some(label), c))
        .collect();
    static_solve(e.nt(), arcs, demand, opts)
}

/// Exact throughput over the foundation paths of a small evolving graph.
pub fn temporal_max_flow(g: &PeriodicGraph, demand: &DemandMatrix, opts: &OracleOptions) -> Result<OracleResult> {
    if g.nt() > opts.temporal_node_limit || g.period() > opts.temporal_period_limit {
        return Err(Error::OracleTooLarge(format!(
            "temporal oracle handles nt <= {} and period <= {} (got {} and {})",
            opts.temporal_node_limit,
            opts.temporal_period_limit,
            g.nt(),
            g.period()
        )));
    }
    let mmax = check_demand(demand, g.nt())?;
    let commodities = commodities_of(demand, mmax);
    let cmax = g.max_capacity();
    if cmax <= 0.0 {
        return Ok(OracleResult::zero(commodities.len()));
    }
    let paths = enumerate_foundation_paths(g, opts.hop_cap, opts.path_budget)?;

    let mut resource: BTreeMap<(Edge, usize), usize> = BTreeMap::new();
    let mut arcs = Vec::new();
    let index: BTreeMap<(usize, usize), usize> =
        commodities.iter().enumerate().map(|(i, c)| ((c.src, c.dst), i)).collect();
    let mut by_commodity = vec![Vec::new(); commodities.len()];
    let mut originals: BTreeMap<(usize, Vec<usize>), TemporalPath> = BTreeMap::new();
    for p in &paths {
        let (Some(s), Some(d)) = (p.src(), p.dst()) else { continue };
        let Some(&k) = index.get(&(s, d)) else { continue };
        let ids: Vec<usize> = p
            .hops()
            .iter()
            .map(|&(e, t)| {
                let slot = (t % g.period() as u64) as usize;
                *resource.entry((e, slot)).or_insert_with(|| {
                    arcs.push(Arc {
                        src: e.src,
                        dst: e.dst,
                        cap: g.capacity(e, slot as u64) / cmax,
                    });
                    arcs.len() - 1
                })
            })
            .collect();
        originals.insert((k, ids.clone()), p.clone());
        by_commodity[k].push(ids);
    }
    if by_commodity.iter().any(Vec::is_empty) {
        let mut r = OracleResult::zero(commodities.len() + arcs.len());
        r.diagnostics.enumerated_paths = paths.len();
        return Ok(r);
    }

    let gain = g.gain();
    let mut pricer = Pool { by_commodity };
    let sol = column_generation(&arcs, &commodities, gain, &mut pricer, opts.max_pivots)?;
    let theta = sol.theta * cmax / mmax;
    let witness: Vec<WitnessPath> = sol
        .flows
        .iter()
        .map(|(col, x)| {
            let p = &originals[&(col.commodity, col.arcs.clone())];
            let mut vertices = vec![p.src().unwrap_or(0)];
            vertices.extend(p.hops().iter().map(|h| h.0.dst));
            WitnessPath {
                vertices,
                times: Some(p.hops().iter().map(|h| h.1).collect()),
                labels: None,
                rate: x * cmax,
            }
        })
        .collect();
    let mut diagnostics = sol.diagnostics;
    diagnostics.enumerated_paths = paths.len();
    Ok(OracleResult {
        theta,
        arl: witness_arl(&witness, gain, theta, demand.total()),
        witness,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub permutation: Vec<usize>,
    pub theta: f64,
    /// `false` when the permutation came from the distance heuristic.
    pub exhaustive: bool,
    pub evaluated: usize,
}

/// Largest instance searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Saturated permutation demand for `perm`: each source sends its node
/// capacity (the smaller of the two endpoint capacities).
pub fn permutation_demand(g: &SimpleGraph, perm: &[usize]) -> DemandMatrix {
    let mut m = DemandMatrix::zeros(g.num_vertices());
    for (s, &d) in perm.iter().enumerate() {
        if s != d {
            m.set(s, d, g.node_capacity(s).min(g.node_capacity(d)));
        }
    }
    m
}

/// The fixed-point-free permutation with the lowest throughput. Exhaustive
/// up to [`EXHAUSTIVE_LIMIT`] vertices; beyond that a maximum-weight
/// assignment on hop distance is used.
pub fn worst_case_permutation(g: &SimpleGraph, opts: &OracleOptions) -> Result<WorstCase> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    if n <= EXHAUSTIVE_LIMIT {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut evaluated = 0;
        let mut perm: Vec<usize> = Vec::with_capacity(n);
        let mut used = vec![false; n];
        let mut err = None;
        derangements(n, &mut perm, &mut used, &mut |p| {
            if err.is_some() {
                return;
            }
            match max_concurrent_flow(g, &permutation_demand(g, p), opts) {
                Ok(r) => {
                    evaluated += 1;
                    if best.as_ref().is_none_or(|(t, _)| r.theta < t - 1e-12) {
                        best = Some((r.theta, p.to_vec()));
                    }
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let (theta, permutation) = best.expect("n >= 2 has a derangement");
        return Ok(WorstCase {
            permutation,
            theta,
            exhaustive: true,
            evaluated,
        });
    }
    let dist = g.hop_distances();
    let far = (n + 1) as f64;
    let weight: Vec<Vec<f64>> = (0..n)
        .map(|s| (0..n).map(|d| if s == d { f64::NEG_INFINITY } else { dist[s][d].map_or(far, |h| h as f64) }).collect())
        .collect();
    let permutation = max_weight_assignment(&weight);
    let theta = max_concurrent_flow(g, &permutation_demand(g, &permutation), opts)?.theta;
    Ok(WorstCase {
        permutation,
        theta,
        exhaustive: false,
        evaluated: 1,
    })
}

fn derangements(n: usize, perm: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
    let i = perm.len();
    if i == n {
        visit(perm);
        return;
    }
    for v in 0..n {
        if v != i && !used[v] {
            used[v] = true;
            perm.push(v);
            derangements(n, perm, used, visit);
            perm.pop();
            used[v] = false;
        }
    }
}

/// Hungarian algorithm on `-weight`; `-inf` entries are forbidden.
fn max_weight_assignment(weight: &[Vec<f64>]) -> Vec<usize> {
    let n = weight.len();
    let big = 1e9;
    let cost = |i: usize, j: usize| {
        let w = weight[i][j];
        if w.is_finite() { -w } else { big }
    };
    // 1-indexed potentials, classic formulation
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::{build_periodic_graph, emulated_graph, simple_emulated_graph, validate_temporal_flow};
    use crate::topology::Matching;

    fn cycle(n: usize) -> SimpleGraph {
        SimpleGraph::new(n, (0..n).map(|u| (Edge::new(u, (u + 1) % n), 1.0))).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = SimpleGraph::new(2, [(Edge::new(0, 1), 3.0)]).unwrap();
        let mut m = DemandMatrix::zeros(2);
        m.set(0, 1, 3.0);
        let r = max_concurrent_flow(&g, &m, &OracleOptions::default()).unwrap();
        assert!((r.theta - 1.0).abs() < 1e-12);
        assert_eq!(r.arl, 1.0);
    }

    #[test]
    fn cycle_shift_two() {
        let r = max_concurrent_flow(&cycle(4), &DemandMatrix::permutation(&[2, 3, 0, 1], 1.0), &OracleOptions::default())
            .unwrap();
        assert!((r.theta - 0.5).abs() < 1e-12);
        assert!((r.arl - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_worst_case() {
        let w = worst_case_permutation(&cycle(4), &OracleOptions::default()).unwrap();
        assert_eq!(w.permutation, vec![3, 0, 1, 2]);
        assert!((w.theta - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(w.evaluated, 9);
    }

    #[test]
    fn two_vertices_worst_case() {
        let g = SimpleGraph::new(2, [(Edge::new(0, 1), 1.0), (Edge::new(1, 0), 1.0)]).unwrap();
        let w = worst_case_permutation(&g, &OracleOptions::default()).unwrap();
        assert_eq!(w.permutation, vec![1, 0]);
        assert!((w.theta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_lp_optimum() {
        // direct edge plus an even two-hop split: n / (2n - 2)
        for n in 4..=6 {
            let g = SimpleGraph::complete(n, 1.0, false);
            let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            let r = max_concurrent_flow(&g, &permutation_demand(&g, &perm), &OracleOptions::default()).unwrap();
            let expect = n as f64 / (2.0 * n as f64 - 2.0);
            assert!((r.theta - expect).abs() < 1e-9, "n={n}: {}", r.theta);
        }
    }

    #[test]
    fn unreachable_pair_gives_zero() {
        let g = SimpleGraph::new(3, [(Edge::new(0, 1), 1.0)]).unwrap();
        let mut m = DemandMatrix::zeros(3);
        m.set(0, 2, 1.0);
        assert_eq!(max_concurrent_flow(&g, &m, &OracleOptions::default()).unwrap().theta, 0.0);
    }

    #[test]
    fn size_limit() {
        let g = SimpleGraph::complete(17, 1.0, false);
        let m = DemandMatrix::all_to_all(17, 1.0);
        assert!(matches!(max_concurrent_flow(&g, &m, &OracleOptions::default()), Err(Error::OracleTooLarge(_))));
    }

    #[test]
    fn temporal_matches_emulated_on_shifts() {
        let sched = vec![vec![Matching::shift(4, 1), Matching::shift(4, 2)]];
        let g = build_periodic_graph(4, 1, 1e-4, 0.0, &sched, 1.0).unwrap();
        let m = DemandMatrix::permutation(&[3, 0, 1, 2], 1.0);
        let opts = OracleOptions::default();
        let t = temporal_max_flow(&g, &m, &opts).unwrap();
        let s = max_concurrent_flow(&simple_emulated_graph(&g), &m, &opts).unwrap();
        assert!((t.theta - s.theta).abs() < 1e-9, "{} vs {}", t.theta, s.theta);
        let flow = t.temporal_flow().unwrap();
        assert!(validate_temporal_flow(&flow, &g).is_empty());
        let th = crate::periodic::throughput_of_temporal_flow(&flow, &g, &m).unwrap();
        assert!((th - t.theta).abs() < 1e-9);
        let e = max_concurrent_flow_emulated(&emulated_graph(&g), &m, &opts).unwrap();
        assert!((e.theta - s.theta).abs() < 1e-9);
        assert!(e.static_flow(2).unwrap().is_ok());
    }

    #[test]
    fn temporal_period_one_scales_by_duty_cycle() {
        let g = build_periodic_graph(3, 1, 1.0, 0.25, &[vec![Matching::shift(3, 1)]], 1.0).unwrap();
        let m = DemandMatrix::permutation(&[1, 2, 0], 1.0);
        let t = temporal_max_flow(&g, &m, &OracleOptions::default()).unwrap();
        assert!((t.theta - 0.75).abs() < 1e-12);
    }

    #[test]
    fn temporal_zero_capacity() {
        let g = build_periodic_graph(3, 1, 1.0, 0.0, &[vec![Matching::shift(3, 1)]], 0.0).unwrap();
        let m = DemandMatrix::permutation(&[1, 2, 0], 1.0);
        assert_eq!(temporal_max_flow(&g, &m, &OracleOptions::default()).unwrap().theta, 0.0);
    }

    #[test]
    fn hungarian_picks_longest() {
        let c = cycle(5);
        let dist = c.hop_distances();
        let w: Vec<Vec<f64>> = (0..5)
            .map(|s| (0..5).map(|d| if s == d { f64::NEG_INFINITY } else { dist[s][d].unwrap() as f64 }).collect())
            .collect();
        assert_eq!(max_weight_assignment(&w), vec![4, 0, 1, 2, 3]);
    }
}
