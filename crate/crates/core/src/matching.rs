//! Decoding graphs and exact minimum-weight perfect matching.
//!
//! Defect-to-defect and defect-to-boundary distances come from Dijkstra
//! (all pairs precomputed once for a static graph, or per shot when erasure
//! heralds change the weights). Defects are split into independent clusters
//! and each cluster is matched exactly with the blossom algorithm.

mod blossom;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

pub use blossom::max_weight_matching;

use crate::error::{Error, Result};
use crate::sampler::merge_probability;

/// Fixed-point scale of edge weights.
pub const WEIGHT_SCALE: f64 = 1000.0;
/// Distance between disconnected nodes.
pub const INFINITE: u64 = u64::MAX / 4;
/// Largest defect count accepted by [`DecodingGraph::brute_force_match`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// `ln((1 - p) / p)` in fixed point; zero for `p >= 1/2`.
pub fn probability_weight(p: f64) -> u64 {
    if p >= 0.5 {
        0
    } else {
        ((1.0 - p) / p).ln().mul_add(WEIGHT_SCALE, 0.5).floor() as u64
    }
}

/// An error mechanism offered to a graph; detectors are global ids.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphMechanism {
    pub detectors: Vec<u32>,
    pub observables: u64,
    pub probability: f64,
    pub herald: Option<u32>,
    pub id: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Local node ids; the second is the boundary node for boundary edges.
    pub nodes: (u32, u32),
    /// Merged probability of the Pauli mechanisms on this edge.
    pub probability: f64,
    /// `INFINITE` for edges that exist only through erasures.
    pub weight: u64,
    pub observables: u64,
    /// Most likely Pauli mechanism.
    pub mechanism: Option<u32>,
    /// Erasure mechanisms: `(herald, mechanism, observables)`.
    pub erasures: Vec<(u32, u32, u64)>,
}

/// Per-shot edge weights, mechanisms and observables.
#[derive(Clone, Debug)]
pub struct EdgeState {
    pub weight: Vec<u64>,
    pub mechanism: Vec<Option<u32>>,
    pub observables: Vec<u64>,
}

#[derive(Clone, Debug)]
struct AllPairs {
    stride: usize,
    dist: Vec<u64>,
    pred: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct DecodingGraph {
    /// Local node id to global detector id.
    pub detectors: Vec<u32>,
    local: HashMap<u32, u32>,
    pub edges: Vec<Edge>,
    edge_index: HashMap<(u32, u32), usize>,
    /// Mechanisms touching three or more nodes; kept out of the graph.
    pub hyperedges: Vec<u32>,
    adjacency: Vec<Vec<(u32, u32)>>,
    by_herald: HashMap<u32, Vec<u32>>,
    base: EdgeState,
    all_pairs: Option<AllPairs>,
}

/// A minimum-weight perfect matching and its correction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchResult {
    /// Matched global detector ids; `None` is the boundary.
    pub pairs: Vec<(u32, Option<u32>)>,
    pub weight: u64,
    /// Edge ids of the correction paths, one entry per traversal.
    pub edges: Vec<u32>,
    /// Active mechanism of each entry of `edges`.
    pub mechanisms: Vec<Option<u32>>,
    /// Range of `edges` forming the path of each pair.
    pub paths: Vec<std::ops::Range<usize>>,
    pub observables: u64,
}

impl DecodingGraph {
    /// Builds the graph on `detectors` from `mechanisms`. Detectors outside
    /// the graph are ignored; mechanisms with no detector in it are dropped.
    pub fn new(detectors: Vec<u32>, mechanisms: impl IntoIterator<Item = GraphMechanism>) -> DecodingGraph {
        let local: HashMap<u32, u32> = detectors.iter().enumerate().map(|(i, &d)| (d, i as u32)).collect();
        let boundary = detectors.len() as u32;
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_index: HashMap<(u32, u32), usize> = HashMap::new();
        let mut hyperedges = Vec::new();
        let mut rep_probability: Vec<f64> = Vec::new();
        for m in mechanisms {
            let mut nodes: Vec<u32> = m.detectors.iter().filter_map(|d| local.get(d).copied()).collect();
            nodes.sort_unstable();
            let key = match nodes.as_slice() {
                [] => continue,
                [a] => (*a, boundary),
                [a, b] => (*a, *b),
                _ => {
                    hyperedges.push(m.id);
                    continue;
                }
            };
            let e = *edge_index.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    nodes: key,
                    probability: 0.0,
                    weight: INFINITE,
                    observables: 0,
                    mechanism: None,
                    erasures: Vec::new(),
                });
                rep_probability.push(0.0);
                edges.len() - 1
            });
            let edge = &mut edges[e];
            match m.herald {
                Some(h) => edge.erasures.push((h, m.id, m.observables)),
                None => {
                    edge.probability = merge_probability(edge.probability, m.probability);
                    if edge.mechanism.is_none() || m.probability > rep_probability[e] {
                        rep_probability[e] = m.probability;
                        edge.mechanism = Some(m.id);
                        edge.observables = m.observables;
                    }
                }
            }
        }
        let mut adjacency = vec![Vec::new(); detectors.len()];
        let mut by_herald: HashMap<u32, Vec<u32>> = HashMap::new();
        for (i, e) in edges.iter_mut().enumerate() {
            if e.mechanism.is_some() && e.probability > 0.0 {
                e.weight = probability_weight(e.probability);
            }
            adjacency[e.nodes.0 as usize].push((e.nodes.1, i as u32));
            if e.nodes.1 != boundary {
                adjacency[e.nodes.1 as usize].push((e.nodes.0, i as u32));
            }
            for &(h, _, _) in &e.erasures {
                by_herald.entry(h).or_default().push(i as u32);
            }
        }
        let base = EdgeState {
            weight: edges.iter().map(|e| e.weight).collect(),
            mechanism: edges.iter().map(|e| e.mechanism).collect(),
            observables: edges.iter().map(|e| e.observables).collect(),
        };
        DecodingGraph { detectors, local, edges, edge_index, hyperedges, adjacency, by_herald, base, all_pairs: None }
    }

    pub fn num_nodes(&self) -> usize {
        self.detectors.len()
    }

    pub fn boundary(&self) -> u32 {
        self.detectors.len() as u32
    }

    pub fn local(&self, detector: u32) -> Option<u32> {
        self.local.get(&detector).copied()
    }

    /// The edge flipping exactly `detectors` (global ids) within this graph.
    pub fn edge_between(&self, detectors: &[u32]) -> Option<usize> {
        let mut nodes: Vec<u32> = detectors.iter().filter_map(|&d| self.local(d)).collect();
        nodes.sort_unstable();
        let key = match nodes.as_slice() {
            [a] => (*a, self.boundary()),
            [a, b] => (*a, *b),
            _ => return None,
        };
        self.edge_index.get(&key).copied()
    }

    pub fn contains(&self, detector: u32) -> bool {
        self.local.contains_key(&detector)
    }

    /// The edge state of a shot: every edge carrying a heralded erasure gets
    /// weight zero and takes the erasure's observables. `None` when no
    /// herald touches this graph.
    pub fn reweight_for_erasures(&self, heralds: &[u32]) -> Option<EdgeState> {
        let mut state: Option<EdgeState> = None;
        for h in heralds {
            let Some(list) = self.by_herald.get(h) else { continue };
            let s = state.get_or_insert_with(|| self.base.clone());
            for &e in list {
                let e = e as usize;
                let &(_, mech, obs) = self.edges[e].erasures.iter().find(|x| x.0 == *h).expect("herald on edge");
                s.weight[e] = 0;
                s.mechanism[e] = Some(mech);
                s.observables[e] = obs;
            }
        }
        state
    }

    pub fn base_state(&self) -> &EdgeState {
        &self.base
    }

    /// Precomputes all distances under the base weights.
    pub fn precompute(&mut self) {
        let n = self.num_nodes();
        let stride = n + 1;
        let rows: Vec<(Vec<u64>, Vec<u32>)> = (0..n as u32).map(|s| self.dijkstra(&self.base, s, None)).collect();
        let mut dist = Vec::with_capacity(n * stride);
        let mut pred = Vec::with_capacity(n * stride);
        for (d, p) in rows {
            dist.extend(d);
            pred.extend(p);
        }
        self.all_pairs = Some(AllPairs { stride, dist, pred });
    }

    /// Single-source shortest paths; the boundary is never expanded. With
    /// `targets`, stops once all of them are settled.
    fn dijkstra(&self, state: &EdgeState, source: u32, targets: Option<&[u32]>) -> (Vec<u64>, Vec<u32>) {
        let n = self.num_nodes();
        let boundary = n as u32;
        let mut dist = vec![INFINITE; n + 1];
        let mut pred = vec![u32::MAX; n + 1];
        let mut done = vec![false; n + 1];
        let mut remaining = targets.map(|t| t.len());
        let mut is_target = vec![false; n + 1];
        if let Some(t) = targets {
            for &x in t {
                is_target[x as usize] = true;
            }
        }
        dist[source as usize] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u as usize] {
                continue;
            }
            done[u as usize] = true;
            if is_target[u as usize] {
                if let Some(r) = remaining.as_mut() {
                    *r -= 1;
                    if *r == 0 {
                        break;
                    }
                }
            }
            if u == boundary {
                continue;
            }
            for &(v, e) in &self.adjacency[u as usize] {
                let w = state.weight[e as usize];
                if w >= INFINITE {
                    continue;
                }
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    pred[v as usize] = e;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        (dist, pred)
    }

    fn other_end(&self, e: u32, v: u32) -> u32 {
        let (a, b) = self.edges[e as usize].nodes;
        if a == v {
            b
        } else {
            a
        }
    }

    /// Exact minimum-weight perfect matching of `defects` (global ids),
    /// with edges reweighted by the active `heralds`.
    pub fn mwpm(&self, defects: &[u32], heralds: &[u32]) -> Result<MatchResult> {
        let mut nodes: Vec<u32> = defects.iter().filter_map(|&d| self.local(d)).collect();
        nodes.sort_unstable();
        if nodes.is_empty() {
            return Ok(MatchResult::default());
        }
        let shot_state = self.reweight_for_erasures(heralds);
        let state = shot_state.as_ref().unwrap_or(&self.base);
        let dm = self.distances(state, &nodes, shot_state.is_some());
        let k = nodes.len();
        let boundary = |i: usize| dm.dist(i, self.boundary());

        // clusters of defects worth pairing directly
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..k {
            for j in i + 1..k {
                let direct = dm.dist(i, nodes[j]);
                if direct < INFINITE && direct < boundary(i).saturating_add(boundary(j)) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut cluster_of: HashMap<usize, usize> = HashMap::new();
        for i in 0..k {
            let r = find(&mut parent, i);
            let c = *cluster_of.entry(r).or_insert_with(|| {
                clusters.push(Vec::new());
                clusters.len() - 1
            });
            clusters[c].push(i);
        }

        let mut result = MatchResult::default();
        for cluster in clusters {
            let mut pairs: Vec<(usize, Option<usize>)> = Vec::new();
            match cluster.as_slice() {
                [a] => pairs.push((*a, None)),
                [a, b] => pairs.push((*a, Some(*b))),
                _ => pairs = self.match_cluster(&cluster, &nodes, &dm)?,
            }
            for (a, b) in pairs {
                match b {
                    Some(b) => {
                        let direct = dm.dist(a, nodes[b]);
                        let via = boundary(a).saturating_add(boundary(b));
                        if direct <= via {
                            self.add_pair(&mut result, &dm, state, &nodes, a, Some(b))?;
                        } else {
                            self.add_pair(&mut result, &dm, state, &nodes, a, None)?;
                            self.add_pair(&mut result, &dm, state, &nodes, b, None)?;
                        }
                    }
                    None => self.add_pair(&mut result, &dm, state, &nodes, a, None)?,
                }
            }
        }
        Ok(result)
    }

    fn add_pair(
        &self,
        out: &mut MatchResult,
        dm: &DistanceMatrix,
        state: &EdgeState,
        nodes: &[u32],
        a: usize,
        b: Option<usize>,
    ) -> Result<()> {
        let target = b.map(|b| nodes[b]).unwrap_or(self.boundary());
        let d = dm.dist(a, target);
        if d >= INFINITE {
            return Err(Error::UnmatchableDefect(self.detectors[nodes[a] as usize] as usize));
        }
        out.weight += d;
        out.pairs.push((self.detectors[nodes[a] as usize], b.map(|b| self.detectors[nodes[b] as usize])));
        let start = out.edges.len();
        let mut v = target;
        while v != nodes[a] {
            let e = dm.pred(a, v);
            out.edges.push(e);
            out.mechanisms.push(state.mechanism[e as usize]);
            out.observables ^= state.observables[e as usize];
            v = self.other_end(e, v);
        }
        out.paths.push(start..out.edges.len());
        Ok(())
    }

    /// Min-cost perfect matching of one cluster with the blossom algorithm;
    /// an odd cluster gets one extra boundary vertex.
    fn match_cluster(&self, cluster: &[usize], nodes: &[u32], dm: &DistanceMatrix) -> Result<Vec<(usize, Option<usize>)>> {
        let k = cluster.len();
        let b = self.boundary();
        let mut costs: Vec<(usize, usize, u64)> = Vec::new();
        for x in 0..k {
            for y in x + 1..k {
                let (i, j) = (cluster[x], cluster[y]);
                let c = dm.dist(i, nodes[j]).min(dm.dist(i, b).saturating_add(dm.dist(j, b)));
                if c < INFINITE {
                    costs.push((x, y, c));
                }
            }
            if k % 2 == 1 {
                let c = dm.dist(cluster[x], b);
                if c < INFINITE {
                    costs.push((x, k, c));
                }
            }
        }
        let nv = k + k % 2;
        let top = costs.iter().map(|c| c.2).max().unwrap_or(0) as i64 + 1;
        let edges: Vec<(usize, usize, i64)> = costs.iter().map(|&(x, y, c)| (x, y, top - c as i64)).collect();
        let mate = max_weight_matching(nv, &edges, true);
        let mut out = Vec::new();
        for x in 0..k {
            match mate[x] {
                Some(y) if y == k => out.push((cluster[x], None)),
                Some(y) if y > x => out.push((cluster[x], Some(cluster[y]))),
                Some(_) => {}
                None => return Err(Error::UnmatchableDefect(self.detectors[nodes[cluster[x]] as usize] as usize)),
            }
        }
        Ok(out)
    }

    fn distances(&self, state: &EdgeState, nodes: &[u32], reweighted: bool) -> DistanceMatrix<'_> {
        match (&self.all_pairs, reweighted) {
            (Some(ap), false) => DistanceMatrix::Shared { ap, nodes: nodes.to_vec() },
            _ => {
                let mut targets = nodes.to_vec();
                targets.push(self.boundary());
                let rows = nodes.iter().map(|&s| self.dijkstra(state, s, Some(&targets))).collect();
                DistanceMatrix::Local { rows }
            }
        }
    }

    /// Exhaustive minimum over all pairings, from Floyd-Warshall distances.
    /// Returns only the pairs, weight and predicted observables.
    pub fn brute_force_match(&self, defects: &[u32], heralds: &[u32]) -> Result<MatchResult> {
        let mut nodes: Vec<u32> = defects.iter().filter_map(|&d| self.local(d)).collect();
        nodes.sort_unstable();
        if nodes.len() > BRUTE_FORCE_LIMIT {
            return Err(Error::TooManyDefects(nodes.len(), BRUTE_FORCE_LIMIT));
        }
        let shot_state = self.reweight_for_erasures(heralds);
        let state = shot_state.as_ref().unwrap_or(&self.base);
        let n = self.num_nodes() + 1;
        let b = n - 1;
        let mut dist = vec![INFINITE; n * n];
        let mut obs = vec![0u64; n * n];
        for i in 0..n {
            dist[i * n + i] = 0;
        }
        for (e, edge) in self.edges.iter().enumerate() {
            let w = state.weight[e];
            let (x, y) = (edge.nodes.0 as usize, edge.nodes.1 as usize);
            for (s, t) in [(x, y), (y, x)] {
                if w < dist[s * n + t] {
                    dist[s * n + t] = w;
                    obs[s * n + t] = state.observables[e];
                }
            }
        }
        // paths may end at the boundary but never pass through it
        for m in 0..b {
            for i in 0..n {
                let dim = dist[i * n + m];
                if dim >= INFINITE {
                    continue;
                }
                for j in 0..n {
                    let nd = dim + dist[m * n + j];
                    if nd < dist[i * n + j] {
                        dist[i * n + j] = nd;
                        obs[i * n + j] = obs[i * n + m] ^ obs[m * n + j];
                    }
                }
            }
        }
        let k = nodes.len();
        let full = (1usize << k) - 1;
        let mut memo: Vec<Option<(u64, u64, Vec<(usize, Option<usize>)>)>> = vec![None; 1 << k];
        fn solve(
            mask: usize,
            full: usize,
            nodes: &[u32],
            b: usize,
            n: usize,
            dist: &[u64],
            obs: &[u64],
            memo: &mut Vec<Option<(u64, u64, Vec<(usize, Option<usize>)>)>>,
        ) -> (u64, u64, Vec<(usize, Option<usize>)>) {
            if mask == full {
                return (0, 0, Vec::new());
            }
            if let Some(r) = &memo[mask] {
                return r.clone();
            }
            let i = (!mask).trailing_zeros() as usize;
            let ni = nodes[i] as usize;
            let mut best: (u64, u64, Vec<(usize, Option<usize>)>) = (INFINITE, 0, Vec::new());
            let (w, o, mut p) = solve(mask | 1 << i, full, nodes, b, n, dist, obs, memo);
            let db = dist[ni * n + b];
            if db < INFINITE && w < INFINITE && db + w < best.0 {
                p.insert(0, (i, None));
                best = (db + w, o ^ obs[ni * n + b], p);
            }
            for j in i + 1..nodes.len() {
                if mask >> j & 1 == 1 {
                    continue;
                }
                let nj = nodes[j] as usize;
                let dij = dist[ni * n + nj];
                if dij >= INFINITE {
                    continue;
                }
                let (w, o, mut p) = solve(mask | 1 << i | 1 << j, full, nodes, b, n, dist, obs, memo);
                if w < INFINITE && dij + w < best.0 {
                    p.insert(0, (i, Some(j)));
                    best = (dij + w, o ^ obs[ni * n + nj], p);
                }
            }
            memo[mask] = Some(best.clone());
            best
        }
        let (weight, observables, pairs) = solve(0, full, &nodes, b, n, &dist, &obs, &mut memo);
        if weight >= INFINITE {
            return Err(Error::UnmatchableDefect(self.detectors[nodes[0] as usize] as usize));
        }
        let pairs = pairs
            .into_iter()
            .map(|(i, j)| (self.detectors[nodes[i] as usize], j.map(|j| self.detectors[nodes[j] as usize])))
            .collect();
        Ok(MatchResult { pairs, weight, observables, ..MatchResult::default() })
    }

    /// Global detector ids flipped by a set of edges (each entry toggles).
    pub fn edge_signature(&self, edges: &[u32]) -> Vec<u32> {
        let mut flips: HashMap<u32, bool> = HashMap::new();
        for &e in edges {
            let (a, b) = self.edges[e as usize].nodes;
            for v in [a, b] {
                if v != self.boundary() {
                    let f = flips.entry(v).or_insert(false);
                    *f = !*f;
                }
            }
        }
        let mut out: Vec<u32> = flips.into_iter().filter(|x| x.1).map(|(v, _)| self.detectors[v as usize]).collect();
        out.sort_unstable();
        out
    }
}

enum DistanceMatrix<'a> {
    Shared { ap: &'a AllPairs, nodes: Vec<u32> },
    Local { rows: Vec<(Vec<u64>, Vec<u32>)> },
}

impl DistanceMatrix<'_> {
    /// Distance from the `i`-th defect to local node `v`.
    fn dist(&self, i: usize, v: u32) -> u64 {
        match self {
            DistanceMatrix::Shared { ap, nodes } => ap.dist[nodes[i] as usize * ap.stride + v as usize],
            DistanceMatrix::Local { rows } => rows[i].0[v as usize],
        }
    }

    fn pred(&self, i: usize, v: u32) -> u32 {
        match self {
            DistanceMatrix::Shared { ap, nodes } => ap.pred[nodes[i] as usize * ap.stride + v as usize],
            DistanceMatrix::Local { rows } => rows[i].1[v as usize],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mech(dets: &[u32], obs: u64, p: f64, id: u32) -> GraphMechanism {
        GraphMechanism { detectors: dets.to_vec(), observables: obs, probability: p, herald: None, id }
    }

    /// Repetition-code chain 0 - 1 - ... - (n-1) with boundaries at both ends.
    fn chain(n: u32, p: f64) -> DecodingGraph {
        let mut ms = vec![mech(&[0], 1, p, 0), mech(&[n - 1], 0, p, 1)];
        for i in 0..n - 1 {
            ms.push(mech(&[i, i + 1], 0, p, i + 2));
        }
        DecodingGraph::new((0..n).collect(), ms)
    }

    #[test]
    fn weights() {
        assert_eq!(probability_weight(0.5), 0);
        assert_eq!(probability_weight(0.6), 0);
        assert_eq!(probability_weight(0.1), (9f64.ln() * WEIGHT_SCALE).round() as u64);
    }

    #[test]
    fn empty_and_adjacent() {
        let mut g = chain(6, 0.01);
        g.precompute();
        assert_eq!(g.mwpm(&[], &[]).unwrap(), MatchResult::default());
        let m = g.mwpm(&[2, 3], &[]).unwrap();
        assert_eq!(m.pairs, vec![(2, Some(3))]);
        assert_eq!(m.edges.len(), 1);
        let m = g.mwpm(&[0], &[]).unwrap();
        assert_eq!(m.pairs, vec![(0, None)]);
        assert_eq!(m.observables, 1);
    }

    #[test]
    fn erasure_reweighting() {
        let mut ms = vec![mech(&[0], 1, 0.01, 0), mech(&[3], 0, 0.01, 1)];
        for i in 0..3 {
            ms.push(mech(&[i, i + 1], 0, 0.01, i + 2));
        }
        ms.push(GraphMechanism { detectors: vec![1, 2], observables: 0, probability: 0.5, herald: Some(7), id: 9 });
        ms.push(GraphMechanism { detectors: vec![0, 3], observables: 0, probability: 0.5, herald: Some(8), id: 10 });
        let g = DecodingGraph::new(vec![0, 1, 2, 3], ms);
        assert!(g.reweight_for_erasures(&[]).is_none());
        let s = g.reweight_for_erasures(&[7]).unwrap();
        assert_eq!(s.weight.iter().filter(|&&w| w == 0).count(), 1);
        // an erasure-only edge is unusable until heralded
        assert_eq!(g.mwpm(&[0, 3], &[]).unwrap().edges.len(), 2);
        let m = g.mwpm(&[0, 3], &[8]).unwrap();
        assert_eq!(m.weight, 0);
        assert_eq!(m.mechanisms, vec![Some(10)]);
        let all = g.reweight_for_erasures(&[7, 8]).unwrap();
        assert!(all.weight[g.edges.iter().position(|e| e.nodes == (0, 3)).unwrap()] == 0);
    }

    #[test]
    fn brute_force_limits() {
        let g = chain(20, 0.01);
        assert!(matches!(g.brute_force_match(&(0..13).collect::<Vec<_>>(), &[]), Err(Error::TooManyDefects(13, 12))));
        let two = g.brute_force_match(&[4, 10], &[]).unwrap();
        let direct = 6 * probability_weight(0.01);
        let via = (5 + 10) * probability_weight(0.01);
        assert_eq!(two.weight, direct.min(via));
        assert_eq!(g.brute_force_match(&[], &[]).unwrap().weight, 0);
    }

    #[test]
    fn disconnected_defect_is_an_error() {
        let g = DecodingGraph::new(vec![0, 1, 2], vec![mech(&[0, 1], 0, 0.1, 0)]);
        assert_eq!(g.mwpm(&[2], &[]), Err(Error::UnmatchableDefect(2)));
    }
}
