//! Finite metric networks.
//!
//! A [`Network`] is a finite node set with symmetric neighborhoods and positive
//! edge lengths. Node identifiers are dense indices `0..N`. The neighborhood of
//! a node is stored without the node itself; self-membership is implicit.
//!
//! Networks built from coordinates carry an ambient [`Norm`] and use it for edge
//! lengths, so an edge length always equals the ambient distance of its
//! endpoints. Networks built from an explicit weighted adjacency have no ambient
//! metric.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;

/// A point of the ambient plane.
pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("a network needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node {node} is out of range for a network of {len} nodes")]
    NodeOutOfRange { node: NodeId, len: usize },
    #[error("node {0} lists itself as a neighbor")]
    SelfLoop(NodeId),
    #[error("node {node} lists neighbor {neighbor} more than once")]
    DuplicateNeighbor { node: NodeId, neighbor: NodeId },
    #[error("node {0} has an empty neighborhood")]
    EmptyNeighborhood(NodeId),
    #[error("adjacency is not symmetric: {from} -> {to} has no matching reverse edge")]
    AsymmetricAdjacency { from: NodeId, to: NodeId },
    #[error("edge {from} -> {to} has invalid length {length}")]
    NonpositiveEdge { from: NodeId, to: NodeId, length: f64 },
    #[error("network is disconnected: node {unreachable} cannot be reached from node 0")]
    DisconnectedGraph { unreachable: NodeId },
    #[error("expected {expected} coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },
    #[error("network has no coordinates")]
    NoCoordinates,
    #[error("target set is empty")]
    EmptyTargetSet,
    #[error("set is empty")]
    EmptySet,
}

/// Norms on the plane, used both for neighborhood balls and for edge lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Euclid,
    Sup,
    One,
}

impl Norm {
    pub fn length(self, dx: f64, dy: f64) -> f64 {
        match self {
            Norm::Euclid => dx.hypot(dy),
            Norm::Sup => dx.abs().max(dy.abs()),
            Norm::One => dx.abs() + dy.abs(),
        }
    }

    pub fn dist(self, a: Point, b: Point) -> f64 {
        self.length(a[0] - b[0], a[1] - b[1])
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::Euclid => "euclid",
            Norm::Sup => "sup",
            Norm::One => "one",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclid" | "2" => Ok(Norm::Euclid),
            "sup" | "inf" => Ok(Norm::Sup),
            "one" | "1" => Ok(Norm::One),
            other => Err(format!("unknown norm `{other}` (expected euclid, sup or one)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: NodeId,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Network {
    adjacency: Vec<Vec<Edge>>,
    coords: Option<Vec<Point>>,
    metric: Option<Norm>,
}

impl Network {
    /// Builds a network from per-node weighted neighbor lists.
    ///
    /// Every edge must be listed in both directions with the same length.
    pub fn from_adjacency(lists: Vec<Vec<(NodeId, f64)>>) -> Result<Self, NetworkError> {
        let adjacency = lists
            .into_iter()
            .map(|l| l.into_iter().map(|(to, length)| Edge { to, length }).collect())
            .collect();
        Self::validated(adjacency, None, None)
    }

    /// Builds a network from an undirected edge list.
    pub fn from_edges(
        len: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Self, NetworkError> {
        let mut lists = vec![Vec::new(); len];
        for (a, b, w) in edges {
            if a >= len || b >= len {
                return Err(NetworkError::NodeOutOfRange { node: a.max(b), len });
            }
            lists[a].push((b, w));
            lists[b].push((a, w));
        }
        Self::from_adjacency(lists)
    }

    /// Builds a network on points, with neighbor lists given explicitly and edge
    /// lengths measured in `metric`.
    pub fn with_coords(
        coords: Vec<Point>,
        metric: Norm,
        neighbors: Vec<Vec<NodeId>>,
    ) -> Result<Self, NetworkError> {
        if neighbors.len() != coords.len() {
            return Err(NetworkError::CoordinateCount { expected: neighbors.len(), got: coords.len() });
        }
        let len = coords.len();
        let mut adjacency = Vec::with_capacity(len);
        for (x, list) in neighbors.into_iter().enumerate() {
            let mut edges = Vec::with_capacity(list.len());
            for y in list {
                if y >= len {
                    return Err(NetworkError::NodeOutOfRange { node: y, len });
                }
                edges.push(Edge { to: y, length: metric.dist(coords[x], coords[y]) });
            }
            adjacency.push(edges);
        }
        Self::validated(adjacency, Some(coords), Some(metric))
    }

    /// Builds a network on points where `y` is a neighbor of `x` iff
    /// `rule(x, y)` holds. The rule must be symmetric.
    pub fn from_points(
        coords: Vec<Point>,
        metric: Norm,
        rule: impl Fn(NodeId, NodeId) -> bool,
    ) -> Result<Self, NetworkError> {
        let len = coords.len();
        let neighbors = (0..len)
            .map(|x| (0..len).filter(|&y| y != x && rule(x, y)).collect())
            .collect();
        Self::with_coords(coords, metric, neighbors)
    }

    /// Attaches positions to a network whose edge lengths were given explicitly.
    /// The network gets no ambient metric; positions are metadata only.
    pub fn attach_coords(mut self, coords: Vec<Point>) -> Result<Self, NetworkError> {
        if coords.len() != self.len() {
            return Err(NetworkError::CoordinateCount { expected: self.len(), got: coords.len() });
        }
        self.coords = Some(coords);
        self.metric = None;
        Ok(self)
    }

    /// The subnetwork on `nodes` with the edges between them. Node `i` of the
    /// result is `nodes[i]`; positions and metric carry over.
    pub fn induced(&self, nodes: &[NodeId]) -> Result<Network, NetworkError> {
        let mut local = vec![usize::MAX; self.len()];
        for (i, &x) in nodes.iter().enumerate() {
            if x >= self.len() {
                return Err(NetworkError::NodeOutOfRange { node: x, len: self.len() });
            }
            if local[x] != usize::MAX {
                return Err(NetworkError::DuplicateNeighbor { node: x, neighbor: x });
            }
            local[x] = i;
        }
        let adjacency = nodes
            .iter()
            .map(|&x| {
                self.adjacency[x]
                    .iter()
                    .filter(|e| local[e.to] != usize::MAX)
                    .map(|e| Edge { to: local[e.to], length: e.length })
                    .collect()
            })
            .collect();
        let coords = self.coords.as_ref().map(|c| nodes.iter().map(|&x| c[x]).collect());
        Network::validated(adjacency, coords, self.metric)
    }

    fn validated(
        mut adjacency: Vec<Vec<Edge>>,
        coords: Option<Vec<Point>>,
        metric: Option<Norm>,
    ) -> Result<Self, NetworkError> {
        let len = adjacency.len();
        if len < 2 {
            return Err(NetworkError::TooFewNodes(len));
        }
        for (x, edges) in adjacency.iter_mut().enumerate() {
            if edges.is_empty() {
                return Err(NetworkError::EmptyNeighborhood(x));
            }
            edges.sort_by_key(|e| e.to);
            for (i, e) in edges.iter().enumerate() {
                if e.to >= len {
                    return Err(NetworkError::NodeOutOfRange { node: e.to, len });
                }
                if e.to == x {
                    return Err(NetworkError::SelfLoop(x));
                }
                if i > 0 && edges[i - 1].to == e.to {
                    return Err(NetworkError::DuplicateNeighbor { node: x, neighbor: e.to });
                }
                if !(e.length > 0.0 && e.length.is_finite()) {
                    return Err(NetworkError::NonpositiveEdge { from: x, to: e.to, length: e.length });
                }
            }
        }
        for (x, edges) in adjacency.iter().enumerate() {
            for e in edges {
                let back = &adjacency[e.to];
                match back.binary_search_by_key(&x, |b| b.to) {
                    Ok(i) if back[i].length == e.length => {}
                    _ => return Err(NetworkError::AsymmetricAdjacency { from: x, to: e.to }),
                }
            }
        }
        let net = Network { adjacency, coords, metric };
        if let Some(unreachable) = net.first_unreachable() {
            return Err(NetworkError::DisconnectedGraph { unreachable });
        }
        Ok(net)
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for e in &self.adjacency[x] {
                if !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// The punctured neighborhood of `x`, sorted by neighbor id.
    pub fn neighbors(&self, x: NodeId) -> &[Edge] {
        &self.adjacency[x]
    }

    pub fn are_neighbors(&self, x: NodeId, y: NodeId) -> bool {
        self.adjacency[x].binary_search_by_key(&y, |e| e.to).is_ok()
    }

    pub fn edge_length(&self, x: NodeId, y: NodeId) -> Option<f64> {
        let edges = &self.adjacency[x];
        edges.binary_search_by_key(&y, |e| e.to).ok().map(|i| edges[i].length)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }

    pub fn point(&self, x: NodeId) -> Option<Point> {
        self.coords.as_ref().map(|c| c[x])
    }

    /// The norm used for edge lengths, when the network was built from points.
    pub fn metric(&self) -> Option<Norm> {
        self.metric
    }

    /// Ambient distance between two nodes, when coordinates are present.
    pub fn ambient_distance(&self, x: NodeId, y: NodeId) -> Option<f64> {
        match (&self.coords, self.metric) {
            (Some(c), Some(m)) => Some(m.dist(c[x], c[y])),
            _ => None,
        }
    }

    pub fn max_edge_length(&self) -> f64 {
        self.adjacency
            .iter()
            .flatten()
            .map(|e| e.length)
            .fold(0.0, f64::max)
    }

    /// Node closest to `p` in the ambient metric; ties go to the lower id.
    pub fn nearest_node(&self, p: Point) -> Result<NodeId, NetworkError> {
        let coords = self.coords.as_ref().ok_or(NetworkError::NoCoordinates)?;
        let metric = self.metric.unwrap_or(Norm::Euclid);
        let mut best = (0, f64::INFINITY);
        for (x, &c) in coords.iter().enumerate() {
            let d = metric.dist(c, p);
            if d < best.1 {
                best = (x, d);
            }
        }
        Ok(best.0)
    }

    /// Multi-source shortest paths: `dist(x) = min_s (offset_s + d_g(s, x))`.
    pub fn shortest_paths(&self, sources: &[(NodeId, f64)]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.len()];
        let mut heap = BinaryHeap::new();
        for &(s, offset) in sources {
            if offset < dist[s] {
                dist[s] = offset;
                heap.push(Queued { dist: offset, node: s });
            }
        }
        while let Some(Queued { dist: d, node: x }) = heap.pop() {
            if d > dist[x] {
                continue;
            }
            for e in &self.adjacency[x] {
                let nd = d + e.length;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    heap.push(Queued { dist: nd, node: e.to });
                }
            }
        }
        dist
    }

    /// Geodesic distances from a single node.
    pub fn geodesic_from(&self, source: NodeId) -> Vec<f64> {
        self.shortest_paths(&[(source, 0.0)])
    }

    /// Geodesic distance from every node to `set`.
    pub fn geodesic_to_set(&self, set: &[NodeId]) -> Vec<f64> {
        let sources: Vec<_> = set.iter().map(|&s| (s, 0.0)).collect();
        self.shortest_paths(&sources)
    }
}

#[derive(Debug, Clone, Copy)]
struct Queued {
    dist: f64,
    node: NodeId,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Reversed so that `BinaryHeap` pops the smallest distance first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Dense all-pairs distances of a network.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    len: usize,
    geodesic: Vec<f64>,
    ambient: Option<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn geodesic(&self, x: NodeId, y: NodeId) -> f64 {
        self.geodesic[x * self.len + y]
    }

    pub fn geodesic_row(&self, x: NodeId) -> &[f64] {
        &self.geodesic[x * self.len..(x + 1) * self.len]
    }

    pub fn ambient(&self, x: NodeId, y: NodeId) -> Option<f64> {
        self.ambient.as_ref().map(|a| a[x * self.len + y])
    }

    pub fn has_ambient(&self) -> bool {
        self.ambient.is_some()
    }

    /// Largest geodesic distance.
    pub fn diameter(&self) -> f64 {
        self.geodesic.iter().copied().fold(0.0, f64::max)
    }

    /// `sup |d_g - d|` over node pairs, when the ambient metric is present.
    pub fn geodesic_excess(&self) -> Option<f64> {
        let amb = self.ambient.as_ref()?;
        Some(
            self.geodesic
                .iter()
                .zip(amb)
                .map(|(g, a)| (g - a).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// All-pairs geodesic distances, one shortest-path run per source node.
///
/// Sources are processed in parallel; each row is computed independently so the
/// result does not depend on the number of worker threads.
pub fn geodesic_matrix(net: &Network) -> DistanceMatrix {
    let len = net.len();
    let rows: Vec<Vec<f64>> = (0..len).into_par_iter().map(|s| net.geodesic_from(s)).collect();
    let geodesic = rows.into_iter().flatten().collect();
    let ambient = net.metric().and(net.coords()).map(|_| {
        let mut a = Vec::with_capacity(len * len);
        for x in 0..len {
            for y in 0..len {
                a.push(net.ambient_distance(x, y).unwrap());
            }
        }
        a
    });
    DistanceMatrix { len, geodesic, ambient }
}

/// Which metric the descent property is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P4Metric {
    Ambient,
    Geodesic,
}

/// Outcome of a descent-property check. `witness` is a node with no strictly
/// closer neighbor, when one exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct P4Report {
    pub holds: bool,
    pub witness: Option<NodeId>,
}

/// Checks that every node at positive distance from `target` has a neighbor
/// strictly closer to it.
pub fn validate_p4(
    net: &Network,
    target: &[NodeId],
    metric: P4Metric,
) -> Result<P4Report, NetworkError> {
    match metric {
        P4Metric::Geodesic => {
            if target.is_empty() {
                return Err(NetworkError::EmptyTargetSet);
            }
            check_target(net, target)?;
            Ok(descent_report(net, &net.geodesic_to_set(target)))
        }
        P4Metric::Ambient => {
            if net.metric().and(net.coords()).is_none() {
                return Err(NetworkError::NoCoordinates);
            }
            validate_p4_by(net, target, |x, y| net.ambient_distance(x, y).unwrap())
        }
    }
}

/// Descent check with an arbitrary point-to-point metric on the nodes.
pub fn validate_p4_by(
    net: &Network,
    target: &[NodeId],
    dist: impl Fn(NodeId, NodeId) -> f64,
) -> Result<P4Report, NetworkError> {
    if target.is_empty() {
        return Err(NetworkError::EmptyTargetSet);
    }
    check_target(net, target)?;
    let to_set: Vec<f64> = (0..net.len())
        .map(|x| target.iter().map(|&t| dist(x, t)).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(descent_report(net, &to_set))
}

fn check_target(net: &Network, target: &[NodeId]) -> Result<(), NetworkError> {
    match target.iter().find(|&&t| t >= net.len()) {
        Some(&t) => Err(NetworkError::NodeOutOfRange { node: t, len: net.len() }),
        None => Ok(()),
    }
}

fn descent_report(net: &Network, to_set: &[f64]) -> P4Report {
    let witness = (0..net.len()).find(|&x| {
        to_set[x] > 0.0 && !net.neighbors(x).iter().any(|e| to_set[e.to] < to_set[x])
    });
    P4Report { holds: witness.is_none(), witness }
}

/// Hausdorff distance between two node sets under `dist`.
pub fn hausdorff_distance(
    a: &[NodeId],
    b: &[NodeId],
    dist: impl Fn(NodeId, NodeId) -> f64,
) -> Result<f64, NetworkError> {
    if a.is_empty() || b.is_empty() {
        return Err(NetworkError::EmptySet);
    }
    let directed = |from: &[NodeId], to: &[NodeId]| {
        from.iter()
            .map(|&x| to.iter().map(|&y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_path() -> Network {
        Network::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn induced_subnetwork() {
        let net = Network::from_edges(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 5.0)]).unwrap();
        let sub = net.induced(&[2, 1, 0]).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.edge_length(0, 1), Some(2.0));
        assert_eq!(sub.edge_length(1, 2), Some(1.0));
        assert_eq!(sub.edge_length(0, 2), None);
        assert!(matches!(net.induced(&[0, 2]), Err(NetworkError::EmptyNeighborhood(0))));
    }

    #[test]
    fn minimal_two_node_network() {
        let net = Network::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(net.neighbors(0), &[Edge { to: 1, length: 1.0 }]);
        assert_eq!(net.neighbors(1), &[Edge { to: 0, length: 1.0 }]);
    }

    #[test]
    fn path_middle_node_sees_both_ends() {
        let net = unit_path();
        let ids: Vec<_> = net.neighbors(1).iter().map(|e| e.to).collect();
        assert_eq!(ids, vec![0, 2]);
    }

    #[test]
    fn rejects_disconnected_pairs() {
        let err = Network::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap_err();
        assert!(matches!(err, NetworkError::DisconnectedGraph { .. }));
    }

    #[test]
    fn rejects_bad_adjacency() {
        let asym = Network::from_adjacency(vec![vec![(1, 1.0)], vec![(0, 2.0)]]).unwrap_err();
        assert_eq!(asym, NetworkError::AsymmetricAdjacency { from: 0, to: 1 });
        let missing = Network::from_adjacency(vec![vec![(1, 1.0)], vec![]]).unwrap_err();
        assert_eq!(missing, NetworkError::EmptyNeighborhood(1));
        let one_way =
            Network::from_adjacency(vec![vec![(1, 1.0), (2, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)]]);
        assert!(matches!(one_way, Err(NetworkError::AsymmetricAdjacency { .. })));
        let zero = Network::from_edges(2, [(0, 1, 0.0)]).unwrap_err();
        assert!(matches!(zero, NetworkError::NonpositiveEdge { .. }));
        let nan = Network::from_edges(2, [(0, 1, f64::NAN)]).unwrap_err();
        assert!(matches!(nan, NetworkError::NonpositiveEdge { .. }));
        assert_eq!(Network::from_adjacency(vec![vec![]]).unwrap_err(), NetworkError::TooFewNodes(1));
        let selfloop = Network::from_adjacency(vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0)]]);
        assert_eq!(selfloop.unwrap_err(), NetworkError::SelfLoop(0));
    }

    #[test]
    fn asymmetric_point_rule_is_rejected() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let err = Network::from_points(coords, Norm::Euclid, |x, y| x.abs_diff(y) == 1 || (x == 0 && y == 2))
            .unwrap_err();
        assert!(matches!(err, NetworkError::AsymmetricAdjacency { .. }));
    }

    #[test]
    fn path_geodesics() {
        let dm = geodesic_matrix(&unit_path());
        assert_eq!(dm.geodesic(0, 2), 2.0);
        assert_eq!(dm.geodesic(2, 0), 2.0);
        assert!(!dm.has_ambient());
    }

    #[test]
    fn triangle_long_edge_is_bypassed() {
        // Chains between 0 and 2: direct (3) or through 1 (1 + 1).
        let net = Network::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]).unwrap();
        let brute = [3.0_f64, 1.0 + 1.0].into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(geodesic_matrix(&net).geodesic(0, 2), brute);
    }

    #[test]
    fn multi_source_offsets() {
        let net = unit_path();
        let d = net.shortest_paths(&[(0, 0.0), (2, 5.0)]);
        assert_eq!(d, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn p4_on_path() {
        let net = unit_path();
        let r = validate_p4(&net, &[0], P4Metric::Geodesic).unwrap();
        assert!(r.holds);
        assert_eq!(validate_p4(&net, &[], P4Metric::Geodesic).unwrap_err(), NetworkError::EmptyTargetSet);
    }

    #[test]
    fn p4_fails_for_leaf_behind_far_hub() {
        // Target t=0 at the origin, leaf 1 at (1,0) attached only to hub 2 at (3,0),
        // hub also attached to 3 at (0,3) and to the target.
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [0.0, 3.0]];
        let edges = [(0usize, 2usize), (1, 2), (2, 3), (0, 3)];
        let net = Network::from_points(coords, Norm::Euclid, |x, y| {
            edges.iter().any(|&(a, b)| (a, b) == (x, y) || (b, a) == (x, y))
        })
        .unwrap();
        // Enumerate by hand: d(1,{0}) = 1 and its only neighbor is at distance 3.
        let r = validate_p4(&net, &[0], P4Metric::Ambient).unwrap();
        assert_eq!(r, P4Report { holds: false, witness: Some(1) });
        // Geodesically the leaf always descends along its shortest path.
        assert!(validate_p4(&net, &[0], P4Metric::Geodesic).unwrap().holds);
    }

    #[test]
    fn hausdorff_examples() {
        let dm = geodesic_matrix(&unit_path());
        let d = |x, y| dm.geodesic(x, y);
        assert_eq!(hausdorff_distance(&[0, 2], &[0, 2], d).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&[0], &[1], d).unwrap(), 1.0);
        // sup_{a in A} d(a,B) = 0, sup_{b in B} d(b,A) = d(2,0) = 2.
        assert_eq!(hausdorff_distance(&[0], &[0, 2], d).unwrap(), 2.0);
        assert_eq!(hausdorff_distance(&[], &[0], d).unwrap_err(), NetworkError::EmptySet);
    }

    #[test]
    fn nearest_node_requires_coords() {
        assert_eq!(unit_path().nearest_node([0.0, 0.0]).unwrap_err(), NetworkError::NoCoordinates);
    }

    proptest::proptest! {
        #[test]
        #[allow(clippy::needless_range_loop)]
        fn dijkstra_matches_floyd_warshall(
            len in 2usize..12,
            extra in proptest::collection::vec((0usize..12, 0usize..12, 0.1f64..5.0), 0..30),
            chain in proptest::collection::vec(0.1f64..5.0, 11),
        ) {
            // A path keeps the network connected; extra edges add shortcuts.
            let mut w = vec![vec![f64::INFINITY; len]; len];
            for i in 0..len - 1 {
                w[i][i + 1] = chain[i];
                w[i + 1][i] = chain[i];
            }
            for &(a, b, l) in &extra {
                let (a, b) = (a % len, b % len);
                if a != b && w[a][b].is_infinite() {
                    w[a][b] = l;
                    w[b][a] = l;
                }
            }
            let edges: Vec<_> = (0..len)
                .flat_map(|a| (a + 1..len).map(move |b| (a, b)))
                .filter(|&(a, b)| w[a][b].is_finite())
                .map(|(a, b)| (a, b, w[a][b]))
                .collect();
            let net = Network::from_edges(len, edges).unwrap();
            let mut fw = w.clone();
            for (i, row) in fw.iter_mut().enumerate() {
                row[i] = 0.0;
            }
            for m in 0..len {
                for i in 0..len {
                    for j in 0..len {
                        fw[i][j] = fw[i][j].min(fw[i][m] + fw[m][j]);
                    }
                }
            }
            let dm = geodesic_matrix(&net);
            for i in 0..len {
                for j in 0..len {
                    proptest::prop_assert!((dm.geodesic(i, j) - fw[i][j]).abs() <= 1e-12 * fw[i][j].max(1.0));
                }
            }
        }
    }
}
