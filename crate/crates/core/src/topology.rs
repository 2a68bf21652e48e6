//! Emulated-graph generators and their decomposition into circuit-switch
//! schedules.
//!
//! A schedule is a list of matchings per circuit switch. Every switch cycles
//! through its own list, so with `nu` switches holding `d / nu` matchings
//! each, the evolving graph has period `d / nu` and its union over one period
//! is the `d`-regular digraph the matchings were cut from.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed ToR-to-ToR edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
}

impl Edge {
    pub fn new(src: usize, dst: usize) -> Self {
        Edge { src, dst }
    }

    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.src, self.dst)
    }
}

/// One configuration of a circuit switch: input port `i` is connected to
/// output port `perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Matching(Vec<usize>);

impl Matching {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidMatching("empty permutation".into()));
        }
        let mut seen = vec![false; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n {
                return Err(Error::InvalidMatching(format!(
                    "port {i} maps to {p}, outside [0, {n})"
                )));
            }
            if seen[p] {
                return Err(Error::InvalidMatching(format!(
                    "output port {p} is used twice"
                )));
            }
            seen[p] = true;
        }
        Ok(Matching(perm))
    }

    pub fn identity(n: usize) -> Self {
        Matching((0..n).collect())
    }

    /// The cyclic shift `i -> i + k (mod n)`.
    pub fn shift(n: usize, k: usize) -> Self {
        Matching((0..n).map(|i| (i + k) % n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn target(&self, port: usize) -> usize {
        self.0[port]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.iter().enumerate().map(|(u, &v)| Edge::new(u, v))
    }
}

impl TryFrom<Vec<usize>> for Matching {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Matching::new(v)
    }
}

impl From<Matching> for Vec<usize> {
    fn from(m: Matching) -> Self {
        m.0
    }
}

/// Per-switch ordered matching lists.
pub type SwitchSchedules = Vec<Vec<Matching>>;

/// A directed multigraph on `0..n`. Self-loops and parallel edges are kept;
/// the edge list is stored sorted so equality is multiset equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Digraph {
    pub fn new(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        if let Some(e) = edges.iter().find(|e| e.src >= n || e.dst >= n) {
            return Err(Error::InvalidParameter(format!(
                "edge {e} has an endpoint outside [0, {n})"
            )));
        }
        edges.sort_unstable();
        Ok(Digraph { n, edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.src] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.dst] += 1;
        }
        deg
    }

    /// Checks that every vertex has in- and out-degree `d`.
    pub fn check_regular(&self, d: usize) -> Result<()> {
        for (label, deg) in [("out", self.out_degrees()), ("in", self.in_degrees())] {
            if let Some((v, &k)) = deg.iter().enumerate().find(|(_, &k)| k != d) {
                return Err(Error::NotRegular {
                    expected: d,
                    detail: format!("vertex {v} has {label}-degree {k}"),
                });
            }
        }
        Ok(())
    }

    /// Distinct successors of every vertex, self-loops excluded.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            if !e.is_self_loop() && adj[e.src].last() != Some(&e.dst) {
                adj[e.src].push(e.dst);
            }
        }
        adj
    }

    pub fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        bfs(&self.adjacency(), src)
    }

    /// Largest finite BFS distance; `None` when some pair is unreachable.
    pub fn diameter(&self) -> Option<usize> {
        let adj = self.adjacency();
        let mut diam = 0;
        for s in 0..self.n {
            for d in bfs(&adj, s) {
                diam = diam.max(d?);
            }
        }
        Some(diam)
    }
}

pub(crate) fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// The generalized deBruijn digraph: `u -> u*d + a (mod nt)` for
/// `a in 0..d`. Every vertex has in- and out-degree exactly `d`; coinciding
/// targets are kept as parallel edges.
pub fn debruijn_digraph(nt: usize, d: usize) -> Result<Digraph> {
    if d < 2 {
        return Err(Error::DegenerateDegree(d));
    }
    if d > nt {
        return Err(Error::InvalidParameter(format!(
            "degree {d} exceeds the number of ToRs {nt}"
        )));
    }
    let edges = (0..nt)
        .flat_map(|u| (0..d).map(move |a| Edge::new(u, (u * d + a) % nt)))
        .collect();
    Digraph::new(nt, edges)
}

/// `K_nt` with one self-loop per vertex, i.e. an `nt`-regular digraph.
pub fn complete_digraph(nt: usize) -> Digraph {
    let edges = (0..nt)
        .flat_map(|u| (0..nt).map(move |v| Edge::new(u, v)))
        .collect();
    Digraph { n: nt, edges }
}

/// Splits a `d`-regular digraph into `d` perfect matchings by repeatedly
/// extracting a perfect matching of the bipartite double cover.
pub fn decompose_matchings(g: &Digraph) -> Result<Vec<Matching>> {
    let n = g.num_vertices();
    let d = g.out_degrees().first().copied().unwrap_or(0);
    g.check_regular(d)?;

    // Multiplicity of each (u, v); the double cover is regular so Hall's
    // condition holds after every removal.
    let mut mult: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for e in g.edges() {
        match mult[e.src].last_mut() {
            Some((v, k)) if *v == e.dst => *k += 1,
            _ => mult[e.src].push((e.dst, 1)),
        }
    }

    let mut matchings = Vec::with_capacity(d);
    for _ in 0..d {
        let owner = perfect_matching(&mult, n).ok_or_else(|| Error::NotRegular {
            expected: d,
            detail: "bipartite double cover has no perfect matching".into(),
        })?;
        let mut perm = vec![0; n];
        for (v, u) in owner.iter().enumerate() {
            let u = u.expect("perfect matching covers every vertex");
            perm[u] = v;
        }
        for (u, &v) in perm.iter().enumerate() {
            let slot = mult[u]
                .iter_mut()
                .find(|(w, _)| *w == v)
                .expect("matched edge exists");
            slot.1 -= 1;
        }
        for row in &mut mult {
            row.retain(|&(_, k)| k > 0);
        }
        matchings.push(Matching(perm));
    }
    Ok(matchings)
}

/// Kuhn's augmenting-path search. Returns, for every right vertex, its
/// matched left vertex.
fn perfect_matching(mult: &[Vec<(usize, usize)>], n: usize) -> Option<Vec<Option<usize>>> {
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut matched_left = vec![false; n];

    // Greedy warm start.
    for (u, row) in mult.iter().enumerate() {
        if let Some(&(v, _)) = row.iter().find(|(v, _)| owner[*v].is_none()) {
            owner[v] = Some(u);
            matched_left[u] = true;
        }
    }

    let mut visited = vec![0usize; n];
    let mut stamp = 0;
    for u in 0..n {
        if matched_left[u] {
            continue;
        }
        stamp += 1;
        if !augment(u, mult, &mut owner, &mut visited, stamp) {
            return None;
        }
    }
    Some(owner)
}

fn augment(
    root: usize,
    mult: &[Vec<(usize, usize)>],
    owner: &mut [Option<usize>],
    visited: &mut [usize],
    stamp: usize,
) -> bool {
    // Iterative DFS over alternating paths.
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    let mut via: Vec<usize> = Vec::new();
    while let Some(&mut (u, ref mut idx)) = stack.last_mut() {
        if *idx >= mult[u].len() {
            stack.pop();
            via.pop();
            continue;
        }
        let v = mult[u][*idx].0;
        *idx += 1;
        if visited[v] == stamp {
            continue;
        }
        visited[v] = stamp;
        via.push(v);
        match owner[v] {
            None => {
                // Flip the path: stack[i].0 takes via[i].
                for (i, &(left, _)) in stack.iter().enumerate() {
                    owner[via[i]] = Some(left);
                }
                return true;
            }
            Some(next) => stack.push((next, 0)),
        }
    }
    false
}

fn nearest_multiples(d: usize, nu: usize) -> (usize, usize) {
    let below = (d / nu) * nu;
    (below, below + nu)
}

/// Shuffles the matchings with `seed` and deals `d / nu` consecutive ones
/// to each of the `nu` switches.
pub fn assign_to_switches(matchings: &[Matching], nu: usize, seed: u64) -> Result<SwitchSchedules> {
    let d = matchings.len();
    if nu == 0 || d == 0 || d % nu != 0 {
        let (below, above) = nearest_multiples(d, nu.max(1));
        return Err(Error::Divisibility {
            degree: d,
            nu,
            below,
            above,
        });
    }
    let mut shuffled = matchings.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let period = d / nu;
    Ok(shuffled.chunks(period).map(<[Matching]>::to_vec).collect())
}

/// The `nt` cyclic shifts dealt round-robin over `nu` switches; switch `j`
/// cycles through shifts `j, j + nu, j + 2nu, ...`.
pub fn complete_graph_schedule(nt: usize, nu: usize) -> Result<SwitchSchedules> {
    if nu == 0 || nt % nu != 0 {
        let (below, above) = nearest_multiples(nt, nu.max(1));
        return Err(Error::Divisibility {
            degree: nt,
            nu,
            below,
            above,
        });
    }
    Ok((0..nu)
        .map(|j| (j..nt).step_by(nu).map(|k| Matching::shift(nt, k)).collect())
        .collect())
}

#[derive(Debug, Clone)]
pub struct Expander {
    /// Symmetric digraph: each undirected edge appears in both directions.
    pub graph: Digraph,
    /// Largest non-trivial adjacency eigenvalue magnitude.
    pub lambda: f64,
    pub attempts: usize,
}

pub const EXPANDER_RETRY_BUDGET: usize = 500;

/// Random `d`-regular simple undirected graph (pairing model with rejection),
/// regenerated until it passes the Ramanujan test `lambda <= 2 sqrt(d - 1)`.
pub fn random_regular_expander(nt: usize, d: usize, seed: u64) -> Result<Expander> {
    if d < 3 {
        return Err(Error::DegenerateDegree(d));
    }
    if d >= nt || (nt * d) % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "no simple {d}-regular graph on {nt} vertices"
        )));
    }
    let threshold = 2.0 * ((d - 1) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for attempt in 1..=EXPANDER_RETRY_BUDGET {
        let Some(graph) = random_pairing(nt, d, &mut rng) else {
            continue;
        };
        let lambda = second_eigenvalue(&graph);
        best = best.min(lambda);
        if lambda <= threshold {
            return Ok(Expander {
                graph,
                lambda,
                attempts: attempt,
            });
        }
    }
    Err(Error::SpectralFailure {
        attempts: EXPANDER_RETRY_BUDGET,
        best_lambda: best,
        threshold,
    })
}

fn random_pairing(nt: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Digraph> {
    const PAIRING_TRIES: usize = 1000;
    let mut points: Vec<usize> = (0..nt).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'outer: for _ in 0..PAIRING_TRIES {
        points.shuffle(rng);
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        let mut edges = Vec::with_capacity(points.len());
        for pair in points.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'outer;
            }
            edges.push(Edge::new(a, b));
            edges.push(Edge::new(b, a));
        }
        return Digraph::new(nt, edges).ok();
    }
    None
}

/// `max(|lambda_2|, |lambda_n|)` of the undirected adjacency matrix of a
/// regular graph, by power iteration on `A^2` restricted to the complement
/// of the all-ones vector.
pub fn second_eigenvalue(g: &Digraph) -> f64 {
    let n = g.num_vertices();
    if n < 2 {
        return 0.0;
    }
    // Undirected adjacency: a directed edge u->v contributes A[u][v] and A[v][u]
    // unless the reverse edge is also present (symmetric input).
    let mut und: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sym = std::collections::BTreeMap::new();
    for e in g.edges() {
        *sym.entry((e.src.min(e.dst), e.src.max(e.dst))).or_insert(0usize) += 1;
    }
    for (&(a, b), &k) in &sym {
        // a symmetric pair contributes one undirected edge per two arcs
        let copies = if a == b { k } else { k.div_ceil(2) };
        for _ in 0..copies {
            und[a].push(b);
            if a != b {
                und[b].push(a);
            }
        }
    }
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (u, row) in und.iter().enumerate() {
            for &v in row {
                y[u] += x[v];
            }
        }
        y
    };
    let deflate = |x: &mut [f64]| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
    };
    let normalize = |x: &mut [f64]| -> f64 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
        }
        norm
    };

    // Deterministic, generic starting vector.
    let mut x: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5).collect();
    deflate(&mut x);
    if normalize(&mut x) == 0.0 {
        return 0.0;
    }
    let mut estimate = 0.0;
    for _ in 0..20_000 {
        let mut y = apply(&apply(&x));
        deflate(&mut y);
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        if normalize(&mut y) == 0.0 {
            return 0.0;
        }
        x = y;
        if (rq - estimate).abs() <= 1e-15 * rq.abs().max(1.0) {
            estimate = rq;
            break;
        }
        estimate = rq;
    }
    estimate.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Debruijn,
    Complete,
    Static,
    RandomRegular,
}

impl std::str::FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "debruijn" => Ok(GraphKind::Debruijn),
            "complete" => Ok(GraphKind::Complete),
            "static" => Ok(GraphKind::Static),
            "random-regular" => Ok(GraphKind::RandomRegular),
            other => Err(Error::InvalidParameter(format!("unknown graph kind '{other}'"))),
        }
    }
}

/// What to emulate. `Static` is a deBruijn digraph whose degree equals the
/// number of uplinks, so the schedule has period one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmulatedGraphSpec {
    pub kind: GraphKind,
    pub nt: usize,
    pub degree: usize,
    pub seed: u64,
}

impl EmulatedGraphSpec {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 || self.degree > self.nt {
            return Err(Error::InvalidParameter(format!(
                "degree {} outside [1, {}]",
                self.degree, self.nt
            )));
        }
        if self.kind == GraphKind::RandomRegular && self.degree >= self.nt {
            return Err(Error::InvalidParameter(
                "random-regular degree must be below the number of ToRs".into(),
            ));
        }
        if self.kind == GraphKind::Complete && self.degree != self.nt {
            return Err(Error::InvalidParameter(format!(
                "complete graph on {} ToRs has degree {}",
                self.nt, self.nt
            )));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Digraph> {
        self.validate()?;
        match self.kind {
            GraphKind::Debruijn | GraphKind::Static => debruijn_digraph(self.nt, self.degree),
            GraphKind::Complete => Ok(complete_digraph(self.nt)),
            GraphKind::RandomRegular => {
                random_regular_expander(self.nt, self.degree, self.seed).map(|e| e.graph)
            }
        }
    }

    /// Generates the graph and turns it into per-switch schedules.
    pub fn schedules(&self, nu: usize) -> Result<SwitchSchedules> {
        if self.kind == GraphKind::Static && self.degree != nu {
            return Err(Error::InvalidParameter(format!(
                "a static schedule needs degree == uplinks ({} != {nu})",
                self.degree
            )));
        }
        if self.kind == GraphKind::Complete {
            self.validate()?;
            return complete_graph_schedule(self.nt, nu);
        }
        let g = self.generate()?;
        let matchings = decompose_matchings(&g)?;
        assign_to_switches(&matchings, nu, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn union(schedules: &SwitchSchedules, n: usize) -> Digraph {
        let edges = schedules.iter().flatten().flat_map(|m| m.edges()).collect();
        Digraph::new(n, edges).unwrap()
    }

    #[test]
    fn matching_rejects_non_bijection() {
        assert!(Matching::new(vec![0, 0, 1]).is_err());
        assert!(Matching::new(vec![0, 3, 1]).is_err());
        assert!(Matching::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn debruijn_successors() {
        let g = debruijn_digraph(16, 4).unwrap();
        let succ = |u: usize| -> Vec<usize> {
            g.edges().iter().filter(|e| e.src == u).map(|e| e.dst).collect()
        };
        assert_eq!(succ(1), vec![4, 5, 6, 7]);
        assert_eq!(succ(0), vec![0, 1, 2, 3]);
        assert_eq!(g.diameter(), Some(2));
        g.check_regular(4).unwrap();
    }

    #[test]
    fn debruijn_rejects_degree_one() {
        assert!(matches!(debruijn_digraph(8, 1), Err(Error::DegenerateDegree(1))));
    }

    #[test]
    fn debruijn_power_diameters() {
        for (nt, d, diam) in [(16, 2, 4), (64, 4, 3), (64, 8, 2), (27, 3, 3), (16, 16, 1)] {
            assert_eq!(debruijn_digraph(nt, d).unwrap().diameter(), Some(diam), "nt={nt} d={d}");
        }
    }

    #[test]
    fn debruijn_non_power_is_regular_and_close_to_log() {
        for (nt, d) in [(12, 3), (20, 4), (10, 2), (15, 4)] {
            let g = debruijn_digraph(nt, d).unwrap();
            g.check_regular(d).unwrap();
            let lower = (nt as f64).ln() / (d as f64).ln();
            let diam = g.diameter().unwrap();
            assert!(diam as f64 <= lower.ceil() + 1.0, "nt={nt} d={d} diam={diam}");
        }
    }

    #[test]
    fn cycle_decomposes_into_its_shift() {
        let g = Digraph::new(5, (0..5).map(|u| Edge::new(u, (u + 1) % 5)).collect()).unwrap();
        assert_eq!(decompose_matchings(&g).unwrap(), vec![Matching::shift(5, 1)]);
    }

    #[test]
    fn decomposition_rejects_irregular() {
        let g = Digraph::new(3, vec![Edge::new(0, 1), Edge::new(0, 2), Edge::new(1, 0)]).unwrap();
        assert!(matches!(decompose_matchings(&g), Err(Error::NotRegular { .. })));
    }

    #[test]
    fn decomposition_covers_multigraph() {
        // parallel edges and self-loops
        for (nt, d) in [(16, 4), (12, 3), (10, 4), (7, 7), (9, 2)] {
            let g = debruijn_digraph(nt, d).unwrap();
            let ms = decompose_matchings(&g).unwrap();
            assert_eq!(ms.len(), d);
            let edges = ms.iter().flat_map(|m| m.edges()).collect();
            assert_eq!(Digraph::new(nt, edges).unwrap(), g);
        }
    }

    #[test]
    fn complete_schedule_shapes() {
        let s = complete_graph_schedule(16, 2).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|sw| sw.len() == 8));
        assert_eq!(union(&s, 16), complete_digraph(16));

        let s = complete_graph_schedule(4, 4).unwrap();
        assert!(s.iter().all(|sw| sw.len() == 1));
        let s = complete_graph_schedule(4, 1).unwrap();
        assert_eq!(s[0], (0..4).map(|k| Matching::shift(4, k)).collect::<Vec<_>>());
        assert!(matches!(
            complete_graph_schedule(16, 3),
            Err(Error::Divisibility { below: 15, above: 18, .. })
        ));
    }

    #[test]
    fn assignment_periods_and_divisibility() {
        for (d, nu, period) in [(4, 2, 2), (16, 2, 8), (2, 2, 1)] {
            let ms = decompose_matchings(&debruijn_digraph(16, d).unwrap()).unwrap();
            let s = assign_to_switches(&ms, nu, 7).unwrap();
            assert_eq!(s.len(), nu);
            assert!(s.iter().all(|sw| sw.len() == period));
            let mut flat: Vec<_> = s.concat().into_iter().map(Vec::from).collect();
            let mut orig: Vec<_> = ms.into_iter().map(Vec::from).collect();
            flat.sort();
            orig.sort();
            assert_eq!(flat, orig);
        }
        let ms = decompose_matchings(&debruijn_digraph(16, 3).unwrap()).unwrap();
        match assign_to_switches(&ms, 2, 0) {
            Err(Error::Divisibility { below, above, .. }) => assert_eq!((below, above), (2, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seeded_assignment_is_deterministic() {
        let ms = decompose_matchings(&debruijn_digraph(16, 8).unwrap()).unwrap();
        assert_eq!(assign_to_switches(&ms, 2, 42).unwrap(), assign_to_switches(&ms, 2, 42).unwrap());
    }

    #[test]
    fn expander_passes_ramanujan_and_is_deterministic() {
        let a = random_regular_expander(64, 4, 11).unwrap();
        let b = random_regular_expander(64, 4, 11).unwrap();
        assert_eq!(a.graph, b.graph);
        assert!((a.lambda - b.lambda).abs() <= 1e-9);
        assert!(a.lambda <= 2.0 * 3f64.sqrt());
        a.graph.check_regular(4).unwrap();
        assert!(a.graph.edges().iter().all(|e| !e.is_self_loop()));
    }

    #[test]
    fn second_eigenvalue_matches_dense_solver() {
        let ex = random_regular_expander(32, 4, 3).unwrap();
        let n = 32;
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        for e in ex.graph.edges() {
            a[(e.src, e.dst)] = 1.0;
        }
        let eig = nalgebra::SymmetricEigen::new(a);
        let mut mags: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        mags.sort_by(|x, y| y.partial_cmp(x).unwrap());
        // drop the trivial eigenvalue d, then take the largest magnitude
        let rest = mags[1..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!((rest - ex.lambda).abs() < 1e-6, "dense {rest} power {}", ex.lambda);
    }

    #[test]
    fn complete_graph_second_eigenvalue() {
        // K_n without loops: eigenvalues n-1 and -1
        let n = 6;
        let edges = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| Edge::new(u, v)))
            .collect();
        let g = Digraph::new(n, edges).unwrap();
        assert!((second_eigenvalue(&g) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spec_schedules_emulate_their_graph() {
        let spec = EmulatedGraphSpec { kind: GraphKind::Debruijn, nt: 16, degree: 4, seed: 1 };
        let s = spec.schedules(2).unwrap();
        assert_eq!(union(&s, 16), spec.generate().unwrap());
        let st = EmulatedGraphSpec { kind: GraphKind::Static, nt: 16, degree: 2, seed: 1 };
        assert_eq!(st.schedules(2).unwrap()[0].len(), 1);
        assert!(EmulatedGraphSpec { degree: 4, ..st }.schedules(2).is_err());
    }
}
