//! Lattice networks on squares and on the square with a rectangular slot
//! removed, with the mesh-quality quantities used to compare a network's
//! geodesic metric against the continuum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{validate_p4, NetworkError, Network, NodeId, Norm, P4Metric, Point};
use crate::solver::ScalarField;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("descent property fails at node {0}")]
    DescentFails(NodeId),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Lattice points on the boundary of the square.
    #[default]
    Thin,
    /// Lattice points at lattice distance less than `k` from the boundary
    /// (sup distance), so the frame has `k` rows of nodes on each side.
    Thick,
}

fn default_zoom() -> f64 {
    1.0
}

/// The `(n+1)²` lattice `shift + zoom·(i/n, j/n)`. `V(x)` is the closed
/// `norm`-ball of radius `k` lattice steps; edge lengths use `edge_metric`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub k: usize,
    #[serde(default = "default_sup")]
    pub norm: Norm,
    #[serde(default = "default_euclid")]
    pub edge_metric: Norm,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default = "default_zoom")]
    pub zoom: f64,
    #[serde(default)]
    pub shift: [f64; 2],
}

fn default_sup() -> Norm {
    Norm::Sup
}

fn default_euclid() -> Norm {
    Norm::Euclid
}

impl GridSpec {
    /// Unit square, sup-norm balls, Euclidean edges, thin boundary.
    pub fn new(n: usize, k: usize) -> Self {
        GridSpec {
            n,
            k,
            norm: Norm::Sup,
            edge_metric: Norm::Euclid,
            boundary: Boundary::Thin,
            zoom: 1.0,
            shift: [0.0, 0.0],
        }
    }

    pub fn norms(self, norm: Norm, edge_metric: Norm) -> Self {
        GridSpec { norm, edge_metric, ..self }
    }

    pub fn thick(self) -> Self {
        GridSpec { boundary: Boundary::Thick, ..self }
    }

    /// Maps the unit square onto `shift + zoom·[0,1]²`.
    pub fn placed(self, zoom: f64, shift: [f64; 2]) -> Self {
        GridSpec { zoom, shift, ..self }
    }

    pub fn h(&self) -> f64 {
        self.zoom / self.n as f64
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.n < 2 {
            return Err(GridError::InvalidSpec(format!("n must be at least 2, got {}", self.n)));
        }
        if self.k == 0 || self.k > self.n {
            return Err(GridError::InvalidSpec(format!("k must lie in 1..={}, got {}", self.n, self.k)));
        }
        if !(self.zoom > 0.0 && self.zoom.is_finite()) || !self.shift.iter().all(|s| s.is_finite()) {
            return Err(GridError::InvalidSpec("zoom must be positive and shift finite".into()));
        }
        Ok(())
    }

    /// Lattice offsets `(di, dj) ≠ 0` in the closed ball of radius `k`.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let k = self.k as isize;
        let mut out = Vec::new();
        for dj in -k..=k {
            for di in -k..=k {
                let inside = match self.norm {
                    Norm::Sup => true,
                    Norm::One => di.abs() + dj.abs() <= k,
                    Norm::Euclid => di * di + dj * dj <= k * k,
                };
                if inside && (di, dj) != (0, 0) {
                    out.push((di, dj));
                }
            }
        }
        out
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let n = self.n;
        match self.boundary {
            Boundary::Thin => i == 0 || j == 0 || i == n || j == n,
            Boundary::Thick => {
                let k = self.k;
                i < k || j < k || i + k > n || j + k > n
            }
        }
    }
}

/// A built lattice network with its Dirichlet set.
#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: GridSpec,
    pub network: Network,
    /// Ascending node ids.
    pub dirichlet: Vec<NodeId>,
}

impl Grid {
    pub fn node(&self, i: usize, j: usize) -> NodeId {
        j * (self.spec.n + 1) + i
    }

    pub fn lattice(&self, x: NodeId) -> (usize, usize) {
        (x % (self.spec.n + 1), x / (self.spec.n + 1))
    }

    pub fn point(&self, x: NodeId) -> Point {
        self.network.point(x).expect("grids carry coordinates")
    }

    /// The continuum square the lattice covers, with the edge metric.
    pub fn domain(&self) -> Square {
        let s = &self.spec;
        Square { lo: s.shift, side: s.zoom, metric: s.edge_metric }
    }

    pub fn mesh_quality(&self) -> MeshQuality {
        mesh_quality(&self.network, &self.dirichlet, &self.domain(), self.spec.h() / 10.0)
            .expect("grids carry coordinates")
    }
}

fn lattice_coordinate(spec: &GridSpec, i: usize) -> f64 {
    spec.zoom * (i as f64 / spec.n as f64)
}

pub fn build_grid(spec: GridSpec) -> Result<Grid, GridError> {
    spec.validate()?;
    let n = spec.n;
    let side = n + 1;
    let offsets = spec.offsets();
    let mut coords = Vec::with_capacity(side * side);
    let mut neighbors = Vec::with_capacity(side * side);
    for j in 0..=n {
        for i in 0..=n {
            coords.push([
                spec.shift[0] + lattice_coordinate(&spec, i),
                spec.shift[1] + lattice_coordinate(&spec, j),
            ]);
            let list: Vec<NodeId> = offsets
                .iter()
                .filter_map(|&(di, dj)| {
                    let a = i.checked_add_signed(di).filter(|&a| a <= n)?;
                    let b = j.checked_add_signed(dj).filter(|&b| b <= n)?;
                    Some(b * side + a)
                })
                .collect();
            neighbors.push(list);
        }
    }
    let network = Network::with_coords(coords, spec.edge_metric, neighbors)?;
    let dirichlet: Vec<NodeId> = (0..side * side)
        .filter(|&x| spec.is_boundary(x % side, x / side))
        .collect();
    if let Some(w) = validate_p4(&network, &dirichlet, P4Metric::Ambient)?.witness {
        return Err(GridError::DescentFails(w));
    }
    Ok(Grid { spec, network, dirichlet })
}

/// A continuum domain with its intrinsic metric, sampled for mesh quality.
pub trait AmbientDomain: Sync {
    fn distance(&self, p: Point, q: Point) -> f64;
    /// Points of the domain on a lattice of the given step.
    fn probes(&self, step: f64) -> Vec<Point>;
    /// Points of the continuum Dirichlet set at the given spacing.
    fn boundary_probes(&self, step: f64) -> Vec<Point>;
}

/// The square `lo + [0, side]²` with a norm metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub lo: Point,
    pub side: f64,
    pub metric: Norm,
}

fn steps(len: f64, step: f64) -> usize {
    ((len / step).round() as usize).max(1)
}

fn rect_probes(lo: Point, hi: Point, step: f64) -> Vec<Point> {
    let (mx, my) = (steps(hi[0] - lo[0], step), steps(hi[1] - lo[1], step));
    let mut out = Vec::with_capacity((mx + 1) * (my + 1));
    for j in 0..=my {
        for i in 0..=mx {
            out.push([
                lo[0] + (hi[0] - lo[0]) * i as f64 / mx as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / my as f64,
            ]);
        }
    }
    out
}

fn rect_outline(lo: Point, hi: Point, step: f64) -> Vec<Point> {
    rect_probes(lo, hi, step)
        .into_iter()
        .filter(|p| p[0] == lo[0] || p[0] == hi[0] || p[1] == lo[1] || p[1] == hi[1])
        .collect()
}

impl AmbientDomain for Square {
    fn distance(&self, p: Point, q: Point) -> f64 {
        self.metric.dist(p, q)
    }

    fn probes(&self, step: f64) -> Vec<Point> {
        rect_probes(self.lo, [self.lo[0] + self.side, self.lo[1] + self.side], step)
    }

    fn boundary_probes(&self, step: f64) -> Vec<Point> {
        rect_outline(self.lo, [self.lo[0] + self.side, self.lo[1] + self.side], step)
    }
}

/// The open rectangle `]1/4−ε, 3/4+ε[ × ]1/2−ε, 1/2+ε[` removed from the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub lo: Point,
    pub hi: Point,
}

impl Slot {
    pub fn new(eps: f64) -> Self {
        Slot { lo: [0.25 - eps, 0.5 - eps], hi: [0.75 + eps, 0.5 + eps] }
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..2).all(|a| self.lo[a] < p[a] && p[a] < self.hi[a])
    }

    /// Whether the open segment `]p, q[` misses the open rectangle.
    pub fn visible(&self, p: Point, q: Point) -> bool {
        let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
        for a in 0..2 {
            let d = q[a] - p[a];
            if d == 0.0 {
                if !(self.lo[a] < p[a] && p[a] < self.hi[a]) {
                    return true;
                }
            } else {
                let (ta, tb) = ((self.lo[a] - p[a]) / d, (self.hi[a] - p[a]) / d);
                t0 = t0.max(ta.min(tb));
                t1 = t1.min(ta.max(tb));
            }
        }
        t0 >= t1
    }

    pub fn corners(&self) -> [Point; 4] {
        [self.lo, [self.hi[0], self.lo[1]], self.hi, [self.lo[0], self.hi[1]]]
    }

    /// Length of the shortest path from `p` to `q` avoiding the open rectangle.
    /// Such a path bends only at rectangle corners.
    pub fn geodesic(&self, p: Point, q: Point) -> f64 {
        if self.visible(p, q) {
            return Norm::Euclid.dist(p, q);
        }
        let c = self.corners();
        // Nodes: 0..4 corners, 4 = q. Dijkstra from p over at most six points.
        let pts = [c[0], c[1], c[2], c[3], q];
        let mut dist: [f64; 5] = std::array::from_fn(|i| {
            if self.visible(p, pts[i]) { Norm::Euclid.dist(p, pts[i]) } else { f64::INFINITY }
        });
        let mut done = [false; 5];
        for _ in 0..5 {
            let Some(u) = (0..5).filter(|&i| !done[i]).min_by(|&a, &b| dist[a].total_cmp(&dist[b])) else {
                break;
            };
            done[u] = true;
            for v in 0..5 {
                if !done[v] && self.visible(pts[u], pts[v]) {
                    dist[v] = dist[v].min(dist[u] + Norm::Euclid.dist(pts[u], pts[v]));
                }
            }
        }
        dist[4]
    }
}

/// The slotted unit square with its intrinsic (shortest-path) metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlottedSquare {
    pub slot: Slot,
    /// Whether the slot outline belongs to the continuum Dirichlet set.
    pub inner_boundary: bool,
}

impl AmbientDomain for SlottedSquare {
    fn distance(&self, p: Point, q: Point) -> f64 {
        self.slot.geodesic(p, q)
    }

    fn probes(&self, step: f64) -> Vec<Point> {
        rect_probes([0.0, 0.0], [1.0, 1.0], step)
            .into_iter()
            .filter(|&p| !self.slot.contains(p))
            .collect()
    }

    fn boundary_probes(&self, step: f64) -> Vec<Point> {
        let mut out = rect_outline([0.0, 0.0], [1.0, 1.0], step);
        if self.inner_boundary {
            out.extend(rect_outline(self.slot.lo, self.slot.hi, step));
        }
        out
    }
}

/// Lattice network on the slotted square.
#[derive(Debug, Clone)]
pub struct SlotDomain {
    pub n: usize,
    pub k: usize,
    pub slot: Slot,
    pub network: Network,
    /// Lattice index `(i, j)` of each node.
    pub lattice: Vec<(usize, usize)>,
    /// Nodes on the boundary of the unit square.
    pub outer: Vec<NodeId>,
    /// Nodes within sup distance `1/n` of the closed slot rectangle.
    pub inner: Vec<NodeId>,
}

impl SlotDomain {
    pub fn node_at(&self, i: usize, j: usize) -> Option<NodeId> {
        self.lattice.binary_search_by_key(&(j, i), |&(a, b)| (b, a)).ok()
    }

    pub fn mirror(&self, x: NodeId) -> NodeId {
        let (i, j) = self.lattice[x];
        self.node_at(self.n - i, j).expect("the slot is mirror symmetric")
    }

    pub fn geometry(&self, inner_boundary: bool) -> SlottedSquare {
        SlottedSquare { slot: self.slot, inner_boundary }
    }
}

/// Lattice `(i/n, j/n)` outside the open slot; `y ∈ V(x)` iff
/// `‖x−y‖₂ ≤ k/n` and the open segment between them misses the slot.
pub fn build_slot_domain(n: usize, k: usize, eps: f64) -> Result<SlotDomain, GridError> {
    if n < 2 || k == 0 || k > n {
        return Err(GridError::InvalidSpec(format!("need n ≥ 2 and 1 ≤ k ≤ n, got n={n}, k={k}")));
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(GridError::InvalidSpec(format!("eps must lie in (0, 1/4), got {eps}")));
    }
    let slot = Slot::new(eps);
    let at = |i: usize| i as f64 / n as f64;
    let lattice: Vec<(usize, usize)> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| (i, j)))
        .filter(|&(i, j)| !slot.contains([at(i), at(j)]))
        .collect();
    let index = |i: usize, j: usize| lattice.binary_search_by_key(&(j, i), |&(a, b)| (b, a)).ok();
    let coords: Vec<Point> = lattice.iter().map(|&(i, j)| [at(i), at(j)]).collect();
    let r = k as isize;
    let neighbors: Vec<Vec<NodeId>> = lattice
        .iter()
        .map(|&(i, j)| {
            let p = [at(i), at(j)];
            let mut list = Vec::new();
            for dj in -r..=r {
                for di in -r..=r {
                    if (di, dj) == (0, 0) || di * di + dj * dj > r * r {
                        continue;
                    }
                    let (Some(a), Some(b)) = (i.checked_add_signed(di), j.checked_add_signed(dj)) else {
                        continue;
                    };
                    if a > n || b > n {
                        continue;
                    }
                    if let Some(y) = index(a, b) {
                        if slot.visible(p, [at(a), at(b)]) {
                            list.push(y);
                        }
                    }
                }
            }
            list
        })
        .collect();
    let network = Network::with_coords(coords, Norm::Euclid, neighbors)?;
    let outer = (0..lattice.len())
        .filter(|&x| {
            let (i, j) = lattice[x];
            i == 0 || j == 0 || i == n || j == n
        })
        .collect();
    let h = 1.0 / n as f64;
    let inner = (0..lattice.len())
        .filter(|&x| {
            let p = network.point(x).unwrap();
            let gap = (0..2)
                .map(|a| (slot.lo[a] - p[a]).max(p[a] - slot.hi[a]).max(0.0))
                .fold(0.0, f64::max);
            gap <= h * (1.0 + 1e-9)
        })
        .collect();
    Ok(SlotDomain { n, k, slot, network, lattice, outer, inner })
}

/// Geodesic distances from the node nearest to `apex`.
pub fn geodesic_cone(net: &Network, apex: Point) -> Result<ScalarField, NetworkError> {
    let a = net.nearest_node(apex)?;
    Ok(ScalarField::new(net.geodesic_from(a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    /// Fineness: the larger of the covering radius of the nodes and the
    /// Hausdorff distance between Dirichlet nodes and the continuum boundary.
    pub r_n: f64,
    /// Longest edge.
    pub rho_n: f64,
    /// `max |d_g(x,y) − d(x,y)|` over node pairs.
    pub dg_minus_d: f64,
}

fn nearest(points: &[Point], p: Point, dist: impl Fn(Point, Point) -> f64) -> f64 {
    points.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min)
}

/// Mesh quality against a continuum domain probed at spacing `probe_step`.
pub fn mesh_quality(
    net: &Network,
    dirichlet: &[NodeId],
    domain: &dyn AmbientDomain,
    probe_step: f64,
) -> Result<MeshQuality, NetworkError> {
    let coords = net.coords().ok_or(NetworkError::NoCoordinates)?;
    let dist = |p: Point, q: Point| domain.distance(p, q);

    let cover = domain
        .probes(probe_step)
        .par_iter()
        .map(|&p| nearest(coords, p, dist))
        .reduce(|| 0.0, f64::max);
    let s_nodes: Vec<Point> = dirichlet.iter().map(|&s| coords[s]).collect();
    let s_probes = domain.boundary_probes(probe_step);
    let to_nodes = s_probes.par_iter().map(|&p| nearest(&s_nodes, p, dist)).reduce(|| 0.0, f64::max);
    let to_probes = s_nodes.par_iter().map(|&p| nearest(&s_probes, p, dist)).reduce(|| 0.0, f64::max);

    let rho_n = net.max_edge_length();
    let dg_minus_d = (0..net.len())
        .into_par_iter()
        .map(|x| {
            net.geodesic_from(x)
                .iter()
                .enumerate()
                .map(|(y, g)| (g - dist(coords[x], coords[y])).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(MeshQuality { r_n: cover.max(to_nodes).max(to_probes), rho_n, dg_minus_d })
}
