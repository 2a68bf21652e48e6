//! Shortest-path and Valiant routes over the emulated graph, and their
//! realization on the circuit schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::{simple_emulated_graph, PeriodicGraph, TemporalPath};
use crate::topology::Edge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Routing {
    #[default]
    Valiant,
    ShortestStatic,
}

impl std::str::FromStr for Routing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "valiant" => Ok(Routing::Valiant),
            "shortest-static" => Ok(Routing::ShortestStatic),
            other => Err(Error::InvalidParameter(format!("unknown routing '{other}'"))),
        }
    }
}

/// Hop distances on the emulated graph plus its loop-free adjacency.
#[derive(Debug, Clone)]
pub struct RouteTable {
    adj: Vec<Vec<usize>>,
    /// `dist[u][v]`
    dist: Vec<Vec<Option<usize>>>,
    /// Number of distinct shortest paths, `paths[u][v]`.
    paths: Vec<Vec<f64>>,
}

impl RouteTable {
    pub fn new(g: &PeriodicGraph) -> Self {
        let sg = simple_emulated_graph(g);
        let adj = sg.adjacency();
        let dist = sg.hop_distances();
        let n = adj.len();
        let mut paths = vec![vec![0.0; n]; n];
        for dst in 0..n {
            let mut order: Vec<usize> = (0..n).filter(|&u| dist[u][dst].is_some()).collect();
            order.sort_by_key(|&u| dist[u][dst]);
            for u in order {
                paths[u][dst] = if u == dst {
                    1.0
                } else {
                    let left = dist[u][dst].expect("reachable");
                    adj[u].iter().filter(|&&v| dist[v][dst] == Some(left - 1)).map(|&v| paths[v][dst]).sum()
                };
            }
        }
        RouteTable { adj, dist, paths }
    }

    pub fn nt(&self) -> usize {
        self.adj.len()
    }

    pub fn distance(&self, src: usize, dst: usize) -> Option<usize> {
        self.dist[src][dst]
    }

    /// A shortest path drawn uniformly from all shortest paths.
    pub fn shortest<R: Rng + ?Sized>(&self, src: usize, dst: usize, rng: &mut R) -> Result<Vec<usize>> {
        let mut left = self.dist[src][dst].ok_or(Error::Unreachable { src, dst })?;
        let mut path = vec![src];
        let mut cur = src;
        while left > 0 {
            let mut pick = rng.random::<f64>() * self.paths[cur][dst];
            let mut next = None;
            for &n in &self.adj[cur] {
                if self.dist[n][dst] == Some(left - 1) {
                    next = Some(n);
                    pick -= self.paths[n][dst];
                    if pick < 0.0 {
                        break;
                    }
                }
            }
            cur = next.expect("a shortest path continues");
            path.push(cur);
            left -= 1;
        }
        Ok(path)
    }

    /// Two shortest-path stages through a uniformly random ToR. When the
    /// pick is an endpoint the route is a single shortest path. Repeated
    /// vertices are cut out so the result is simple.
    pub fn valiant<R: Rng + ?Sized>(&self, src: usize, dst: usize, rng: &mut R) -> Result<Vec<usize>> {
        let w = rng.random_range(0..self.nt());
        if w == src || w == dst {
            return self.shortest(src, dst, rng);
        }
        let mut route = self.shortest(src, w, rng)?;
        route.extend(self.shortest(w, dst, rng)?.into_iter().skip(1));
        Ok(remove_cycles(route))
    }

    pub fn route<R: Rng + ?Sized>(&self, kind: Routing, src: usize, dst: usize, rng: &mut R) -> Result<Vec<usize>> {
        match kind {
            Routing::Valiant => self.valiant(src, dst, rng),
            Routing::ShortestStatic => self.shortest(src, dst, rng),
        }
    }
}

/// Drops the loop between two visits of the same vertex.
pub fn remove_cycles(route: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(route.len());
    for v in route {
        if let Some(i) = out.iter().position(|&u| u == v) {
            out.truncate(i);
        }
        out.push(v);
    }
    out
}

/// Places each hop of `route` on the earliest slot at which its circuit is
/// up: the first hop may use slot `now`, later hops strictly later slots.
pub fn realize(route: &[usize], now: u64, g: &PeriodicGraph) -> Result<TemporalPath> {
    let period = g.period() as u64;
    let mut hops = Vec::with_capacity(route.len().saturating_sub(1));
    let mut t = now;
    for (i, w) in route.windows(2).enumerate() {
        let e = Edge::new(w[0], w[1]);
        let start = if i == 0 { now } else { t + 1 };
        t = (start..start + period).find(|&s| g.contains(e, s)).ok_or(Error::Unreachable {
            src: e.src,
            dst: e.dst,
        })?;
        hops.push((e, t));
    }
    Ok(TemporalPath::new(hops))
}

/// Valiant route from `src` to `dst` starting at slot `now`.
pub fn valiant_route<R: Rng + ?Sized>(
    src: usize,
    dst: usize,
    now: u64,
    g: &PeriodicGraph,
    rng: &mut R,
) -> Result<TemporalPath> {
    if src == dst {
        return Err(Error::InvalidParameter(format!("route from {src} to itself")));
    }
    let table = RouteTable::new(g);
    if src >= table.nt() || dst >= table.nt() {
        return Err(Error::InvalidParameter(format!("pair ({src}, {dst}) outside the ToR set")));
    }
    realize(&table.valiant(src, dst, rng)?, now, g)
}
