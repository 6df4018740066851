//! Frame selection by shortest paths through per-segment transition graphs.
//!
//! Each segment becomes a DAG over its frames with edges `i → j` for
//! `i < j ≤ i + τ_max`, plus a virtual source feeding the first `τ_b` frames
//! and a virtual sink fed by the last `τ_b`. Edge weights combine the
//! transition cost terms and grow with the number of whole speed-up steps the
//! jump spans.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::motion::{CostModel, CostTerms};
use crate::segment::Segment;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lambdas {
    pub instability: f64,
    pub velocity: f64,
    pub appearance: f64,
    pub semantic: f64,
}

impl Default for Lambdas {
    fn default() -> Self {
        Lambdas {
            instability: 1.0,
            velocity: 1.0,
            appearance: 1.0,
            semantic: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    pub tau_max: usize,
    pub tau_b: usize,
    pub lambdas: Lambdas,
    pub epsilon: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            tau_max: 100,
            tau_b: 10,
            lambdas: Lambdas::default(),
            epsilon: 1.0,
        }
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<()> {
        let l = &self.lambdas;
        if self.tau_max == 0 || self.tau_b == 0 {
            return Err(Error::InvalidConfig("tau_max and tau_b must be at least 1"));
        }
        if [l.instability, l.velocity, l.appearance, l.semantic]
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidConfig("lambdas must be finite and non-negative"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Supplies the `(I, V, A)` terms of a transition inside a segment played at
/// `speedup`.
pub trait CostProvider {
    fn terms(&self, i: usize, j: usize, speedup: u32) -> CostTerms;
}

impl CostProvider for CostModel {
    fn terms(&self, i: usize, j: usize, speedup: u32) -> CostTerms {
        CostModel::terms(self, i, j, speedup)
    }
}

/// Adapts a closure into a [`CostProvider`].
pub struct FnCosts<F>(pub F);

impl<F: Fn(usize, usize, u32) -> CostTerms> CostProvider for FnCosts<F> {
    fn terms(&self, i: usize, j: usize, speedup: u32) -> CostTerms {
        (self.0)(i, j, speedup)
    }
}

/// `S_{i,j} = 1 / (S_i + S_j + ε)`.
pub fn semantic_cost(s_i: f64, s_j: f64, epsilon: f64) -> f64 {
    1.0 / (s_i + s_j + epsilon)
}

/// `(λ_I·I + λ_V·V + λ_A·A + λ_S·S) · ⌈(j − i) / F⌉`.
pub fn edge_weight(i: usize, j: usize, terms: &CostTerms, semantic: f64, lambdas: &Lambdas, speedup: u32) -> f64 {
    debug_assert!(i < j && speedup >= 1);
    let steps = (j - i).div_ceil(speedup as usize) as f64;
    (lambdas.instability * terms.instability
        + lambdas.velocity * terms.velocity
        + lambdas.appearance * terms.appearance
        + lambdas.semantic * semantic)
        * steps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Transition DAG for one segment. Node 0 is the source, nodes `1..=n` are
/// the segment's frames in order and node `n + 1` is the sink.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    pub first_frame: usize,
    pub n_frames: usize,
    pub speedup: u32,
    edges: Vec<Edge>,
}

impl TransitionGraph {
    pub const SOURCE: usize = 0;

    /// Builds a graph from explicit edges, sorted by `(from, to)`.
    pub fn from_edges(first_frame: usize, n_frames: usize, speedup: u32, mut edges: Vec<Edge>) -> Self {
        edges.sort_by(|a, b| a.from.cmp(&b.from).then(a.to.cmp(&b.to)));
        TransitionGraph {
            first_frame,
            n_frames,
            speedup,
            edges,
        }
    }

    pub fn sink(&self) -> usize {
        self.n_frames + 1
    }

    pub fn node_count(&self) -> usize {
        self.n_frames + 2
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Original frame index of a node, `None` for source and sink.
    pub fn frame_of(&self, node: usize) -> Option<usize> {
        (1..=self.n_frames)
            .contains(&node)
            .then(|| self.first_frame + node - 1)
    }

    pub fn node_of(&self, frame: usize) -> usize {
        frame - self.first_frame + 1
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        let start = self.edges.partition_point(|e| e.from < from);
        self.edges[start..]
            .iter()
            .take_while(|e| e.from == from)
            .find(|e| e.to == to)
            .map(|e| e.weight)
    }

    /// Total weight accumulated from the source along `path`.
    pub fn path_weight(&self, path: &[usize]) -> Option<f64> {
        path.windows(2)
            .try_fold(0.0, |acc, w| self.weight(w[0], w[1]).map(|x| acc + x))
    }
}

pub fn build_segment_graph(
    segment: &Segment,
    scores: &[f64],
    costs: &dyn CostProvider,
    cfg: &GraphConfig,
) -> Result<TransitionGraph> {
    cfg.validate()?;
    if segment.end >= scores.len() || segment.start > segment.end {
        return Err(Error::InvalidConfig("segment outside the score profile"));
    }
    if segment.speedup == 0 {
        return Err(Error::InvalidConfig("segment speed-up must be at least 1"));
    }
    let n = segment.len();
    let mut edges = Vec::new();
    for k in 1..=n.min(cfg.tau_b) {
        edges.push(Edge {
            from: TransitionGraph::SOURCE,
            to: k,
            weight: 0.0,
        });
    }
    for a in 0..n {
        let i = segment.start + a;
        for b in a + 1..=(a + cfg.tau_max).min(n - 1) {
            let j = segment.start + b;
            let terms = costs.terms(i, j, segment.speedup);
            let s = semantic_cost(scores[i], scores[j], cfg.epsilon);
            let weight = edge_weight(i, j, &terms, s, &cfg.lambdas, segment.speedup);
            if !(weight >= 0.0) || !weight.is_finite() {
                return Err(Error::InvalidConfig("cost terms produced a negative or non-finite weight"));
            }
            edges.push(Edge {
                from: a + 1,
                to: b + 1,
                weight,
            });
        }
    }
    for k in n.saturating_sub(cfg.tau_b)..n {
        edges.push(Edge {
            from: k + 1,
            to: n + 1,
            weight: 0.0,
        });
    }
    Ok(TransitionGraph::from_edges(segment.start, n, segment.speedup, edges))
}

fn path_to(pred: &[usize], mut v: usize) -> Vec<usize> {
    let mut p = vec![v];
    while v != TransitionGraph::SOURCE {
        v = pred[v];
        p.push(v);
    }
    p.reverse();
    p
}

/// Minimum-weight source→sink path.
///
/// Ties are broken by fewer hops, then by the lexicographically smallest node
/// sequence.
pub fn bellman_ford(graph: &TransitionGraph) -> Result<Vec<usize>> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut pred = vec![usize::MAX; n];
    dist[TransitionGraph::SOURCE] = 0.0;
    hops[TransitionGraph::SOURCE] = 0;

    for _ in 1..n {
        let mut changed = false;
        for e in graph.edges() {
            if dist[e.from].is_infinite() {
                continue;
            }
            let nd = dist[e.from] + e.weight;
            let nh = hops[e.from] + 1;
            let better = match nd.partial_cmp(&dist[e.to]) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => match nh.cmp(&hops[e.to]) {
                    Ordering::Less => true,
                    Ordering::Equal => pred[e.to] != e.from && path_to(&pred, e.from) < path_to(&pred, pred[e.to]),
                    Ordering::Greater => false,
                },
                _ => false,
            };
            if better {
                dist[e.to] = nd;
                hops[e.to] = nh;
                pred[e.to] = e.from;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if dist[graph.sink()].is_infinite() {
        return Err(Error::Unreachable);
    }
    Ok(path_to(&pred, graph.sink()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Dijkstra's algorithm; valid because every weight is non-negative.
/// Returns the sink distance and one optimal path (no tie-break guarantee).
pub fn dijkstra(graph: &TransitionGraph) -> Result<(f64, Vec<usize>)> {
    let n = graph.node_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in graph.edges() {
        adj[e.from].push((e.to, e.weight));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[TransitionGraph::SOURCE] = 0.0;
    heap.push(Reverse((Key(0.0), TransitionGraph::SOURCE)));
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(Reverse((Key(nd), v)));
            }
        }
    }
    let sink = graph.sink();
    if dist[sink].is_infinite() {
        return Err(Error::Unreachable);
    }
    Ok((dist[sink], path_to(&pred, sink)))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingResult {
    /// Selected original frame indices, strictly increasing.
    pub selected: Vec<usize>,
    pub per_segment: Vec<Vec<usize>>,
    pub achieved_speedup: f64,
}

/// Solves every segment graph and concatenates the paths in timeline order.
pub fn sample_video(
    segments: &[Segment],
    scores: &[f64],
    costs: &dyn CostProvider,
    cfg: &GraphConfig,
) -> Result<SamplingResult> {
    let per_segment = segments
        .iter()
        .map(|seg| {
            let g = build_segment_graph(seg, scores, costs, cfg)?;
            Ok(segment_frames(&g, &bellman_ford(&g)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(segments, per_segment))
}

/// Frames on a node path, without the virtual source and sink.
pub fn segment_frames(graph: &TransitionGraph, path: &[usize]) -> Vec<usize> {
    path.iter().filter_map(|&v| graph.frame_of(v)).collect()
}

pub fn assemble(segments: &[Segment], per_segment: Vec<Vec<usize>>) -> SamplingResult {
    let selected: Vec<usize> = per_segment.iter().flatten().copied().collect();
    let n_in: usize = segments.iter().map(|s| s.len()).sum();
    let achieved_speedup = if selected.is_empty() {
        0.0
    } else {
        n_in as f64 / selected.len() as f64
    };
    SamplingResult {
        selected,
        per_segment,
        achieved_speedup,
    }
}

/// Realized speed-up of one segment: frames in over frames kept.
pub fn segment_speedup(segment: &Segment, kept: &[usize]) -> f64 {
    segment.len() as f64 / kept.len().max(1) as f64
}
