//! The minimax scheme for discrete infinity-harmonic extensions.
//!
//! Given a network, a Dirichlet set `S` and data `f` on `S`, the solver looks
//! for the unique field `u` with `u = f` on `S` and `u(x) = μ(u; x)` elsewhere,
//! where `μ(u; x)` is the inf-sup over pairs of neighbors `z, q` of the
//! distance-weighted mean
//!
//! ```text
//! M(u; z, q)(x) = (d(x,z) u(q) + d(x,q) u(z)) / (d(x,z) + d(x,q)).
//! ```
//!
//! Iteration starts from the McShane extension `U₀(x) = min_s f(s) + ω(d_g(x,s))`
//! and applies Gauss–Seidel sweeps in ascending node order. Starting from `U₀`
//! the sweeps decrease pointwise; starting from the lower extension
//! `L₀(x) = max_s f(s) − ω(d_g(x,s))` they increase. Both converge to the same
//! limit, so running the two together gives a certified bracket on the solution.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modulus::{concave_modulus, lipschitz_constant, ModulusError, ModulusFn};
use crate::network::{validate_p4, NetworkError, Network, NodeId, P4Metric, Point};

/// Per-node slack allowed before a decreasing sweep is reported non-monotone.
pub const MONOTONE_SLACK: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("Dirichlet set is empty")]
    EmptyDirichletSet,
    #[error("node {0} appears twice in the Dirichlet set")]
    DuplicateDirichlet(NodeId),
    #[error("boundary value at node {0} is not finite")]
    NonFiniteBoundary(NodeId),
    #[error("descent property fails at node {0} for this Dirichlet set")]
    DescentFails(NodeId),
    #[error("modulus does not dominate the data at nodes {0} and {1}")]
    ModulusTooSmall(NodeId, NodeId),
    #[error("field has {got} values, network has {expected} nodes")]
    FieldLength { expected: usize, got: usize },
    #[error("neighbor value at node {0} is undefined")]
    UndefinedNeighborValue(NodeId),
    #[error("node {0} is a Dirichlet node")]
    NotInterior(NodeId),
    #[error("field differs from the boundary data at node {0}")]
    BoundaryMismatch(NodeId),
    #[error("sweep order must enumerate every interior node exactly once")]
    OrderMismatch,
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence after {} sweeps (residual {:e})", .0.report.iterations, .0.report.final_residual)]
    MaxSweepsExceeded(Box<Unconverged>),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

/// Best iterate of a solve that ran out of sweeps.
#[derive(Debug)]
pub struct Unconverged {
    pub field: ScalarField,
    pub report: SolveReport,
}

/// One value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField(values)
    }

    pub fn constant(len: usize, value: f64) -> Self {
        ScalarField(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `max_x |self(x) - other(x)|`.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max_x (self(x) - other(x))`.
    pub fn max_excess(&self, other: &ScalarField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl std::ops::Index<NodeId> for ScalarField {
    type Output = f64;

    fn index(&self, x: NodeId) -> &f64 {
        &self.0[x]
    }
}

/// How the modulus of the boundary data is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulusChoice {
    /// Linear modulus `κ(f)·t`.
    Lipschitz,
    /// Least concave modulus `ω(f)`.
    Concave,
    /// A caller-supplied modulus; it must dominate the data.
    Given(ModulusFn),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    /// Defaults to `200·N` when absent.
    pub max_sweeps: Option<usize>,
    /// Also iterate from the upper and lower McShane extensions, which enclose
    /// the solution, and stop only once the iterate is within `tol` of both.
    pub certify: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-9, max_sweeps: None, certify: true }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    /// Whether every sweep was pointwise nonincreasing (up to [`MONOTONE_SLACK`]).
    pub monotone: bool,
    /// Certified bound on `max |u − K(f)|`, when certification was on.
    pub bracket_gap: Option<f64>,
    pub converged: bool,
    pub wall_time: f64,
}

/// Dirichlet problem on a network. Neighborhoods are copied into a compact
/// layout for the sweeps.
#[derive(Debug, Clone)]
pub struct DirichletProblem<'a> {
    net: &'a Network,
    dirichlet: Vec<NodeId>,
    data: Vec<f64>,
    is_dirichlet: Vec<bool>,
    interior: Vec<NodeId>,
    modulus: ModulusFn,
    metric: P4Metric,
    offsets: Vec<usize>,
    nbr: Vec<NodeId>,
    nbr_len: Vec<f64>,
}

impl<'a> DirichletProblem<'a> {
    /// Builds a problem measuring the data in the ambient metric when the
    /// network has one, and geodesically otherwise.
    pub fn new(
        net: &'a Network,
        boundary: Vec<(NodeId, f64)>,
        modulus: ModulusChoice,
    ) -> Result<Self, SolveError> {
        let metric = if net.metric().is_some() && net.coords().is_some() {
            P4Metric::Ambient
        } else {
            P4Metric::Geodesic
        };
        Self::with_metric(net, boundary, modulus, metric)
    }

    pub fn with_metric(
        net: &'a Network,
        mut boundary: Vec<(NodeId, f64)>,
        modulus: ModulusChoice,
        metric: P4Metric,
    ) -> Result<Self, SolveError> {
        if boundary.is_empty() {
            return Err(SolveError::EmptyDirichletSet);
        }
        boundary.sort_by_key(|b| b.0);
        let len = net.len();
        let mut is_dirichlet = vec![false; len];
        for &(s, v) in &boundary {
            if s >= len {
                return Err(NetworkError::NodeOutOfRange { node: s, len }.into());
            }
            if is_dirichlet[s] {
                return Err(SolveError::DuplicateDirichlet(s));
            }
            if !v.is_finite() {
                return Err(SolveError::NonFiniteBoundary(s));
            }
            is_dirichlet[s] = true;
        }
        let (dirichlet, data): (Vec<_>, Vec<_>) = boundary.into_iter().unzip();

        let p4 = validate_p4(net, &dirichlet, metric)?;
        if let Some(w) = p4.witness {
            return Err(SolveError::DescentFails(w));
        }

        let pair_dist = |i: usize, j: usize| -> f64 {
            match metric {
                P4Metric::Ambient => net.ambient_distance(dirichlet[i], dirichlet[j]).unwrap(),
                P4Metric::Geodesic => f64::NAN,
            }
        };
        let geodesic_rows = match metric {
            P4Metric::Geodesic => Some(dirichlet.iter().map(|&s| net.geodesic_from(s)).collect::<Vec<_>>()),
            P4Metric::Ambient => None,
        };
        let dist = |i: usize, j: usize| match &geodesic_rows {
            Some(rows) => rows[i][dirichlet[j]],
            None => pair_dist(i, j),
        };
        let modulus = match modulus {
            ModulusChoice::Lipschitz if data.len() == 1 => ModulusFn::linear(0.0),
            ModulusChoice::Concave if data.len() == 1 => ModulusFn::linear(0.0),
            ModulusChoice::Lipschitz => ModulusFn::linear(lipschitz_constant(&data, dist)?),
            ModulusChoice::Concave => concave_modulus(&data, dist)?,
            ModulusChoice::Given(w) => {
                for i in 0..data.len() {
                    for j in i + 1..data.len() {
                        let gap = (data[i] - data[j]).abs();
                        if gap > w.at(dist(i, j)) * (1.0 + 1e-12) + 1e-300 {
                            return Err(SolveError::ModulusTooSmall(dirichlet[i], dirichlet[j]));
                        }
                    }
                }
                w
            }
        };

        let interior = (0..len).filter(|&x| !is_dirichlet[x]).collect();
        let mut offsets = Vec::with_capacity(len + 1);
        let mut nbr = Vec::with_capacity(2 * net.edge_count());
        let mut nbr_len = Vec::with_capacity(2 * net.edge_count());
        offsets.push(0);
        for x in 0..len {
            for e in net.neighbors(x) {
                nbr.push(e.to);
                nbr_len.push(e.length);
            }
            offsets.push(nbr.len());
        }
        Ok(DirichletProblem {
            net,
            dirichlet,
            data,
            is_dirichlet,
            interior,
            modulus,
            metric,
            offsets,
            nbr,
            nbr_len,
        })
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    /// Dirichlet nodes in ascending order.
    pub fn dirichlet(&self) -> &[NodeId] {
        &self.dirichlet
    }

    /// Boundary data, aligned with [`Self::dirichlet`].
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn boundary(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.dirichlet.iter().copied().zip(self.data.iter().copied())
    }

    pub fn is_dirichlet(&self, x: NodeId) -> bool {
        self.is_dirichlet[x]
    }

    /// Non-Dirichlet nodes in ascending order; the default sweep order.
    pub fn interior(&self) -> &[NodeId] {
        &self.interior
    }

    pub fn modulus(&self) -> &ModulusFn {
        &self.modulus
    }

    pub fn metric(&self) -> P4Metric {
        self.metric
    }

    pub fn data_min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn data_max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copies `f` onto the Dirichlet nodes of `u`.
    pub fn impose_boundary(&self, u: &mut ScalarField) {
        for (s, v) in self.boundary() {
            u.0[s] = v;
        }
    }

    fn check_len(&self, u: &ScalarField) -> Result<(), SolveError> {
        if u.len() != self.net.len() {
            return Err(SolveError::FieldLength { expected: self.net.len(), got: u.len() });
        }
        Ok(())
    }

    fn check_boundary(&self, u: &ScalarField) -> Result<(), SolveError> {
        self.check_len(u)?;
        match self.boundary().find(|&(s, v)| u[s] != v) {
            Some((s, _)) => Err(SolveError::BoundaryMismatch(s)),
            None => Ok(()),
        }
    }

    #[inline]
    fn local_minimax(&self, u: &[f64], x: NodeId, scratch: &mut Vec<(f64, f64)>) -> f64 {
        let r = self.offsets[x]..self.offsets[x + 1];
        scratch.clear();
        scratch.extend(self.nbr[r.clone()].iter().zip(&self.nbr_len[r]).map(|(&z, &d)| (u[z], d)));
        inf_sup_sorted(scratch)
    }

    /// One in-place Gauss–Seidel sweep over `order`. Returns the largest
    /// absolute change and the largest increase.
    fn sweep_in_place(&self, u: &mut [f64], order: &[NodeId]) -> (f64, f64) {
        let mut scratch = Vec::new();
        let mut change = 0.0_f64;
        let mut rise = f64::NEG_INFINITY;
        for &x in order {
            let v = self.local_minimax(u, x, &mut scratch);
            let d = v - u[x];
            change = change.max(d.abs());
            rise = rise.max(d);
            u[x] = v;
        }
        (change, rise)
    }
}

/// `inf_z sup_q M(u; z, q)` over `(u, d)` pairs, skipping pairs that cannot
/// change the result. Uses `M(z, q) ≤ max(u(z), u(q))` and `M(z, z) = u(z)`.
fn inf_sup_sorted(vals: &mut [(f64, f64)]) -> f64 {
    vals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for &(uz, dz) in vals.iter() {
        if uz >= best {
            break;
        }
        let mut sup = f64::NEG_INFINITY;
        for &(uq, dq) in vals.iter().rev() {
            if uq <= sup && uz <= sup {
                break;
            }
            let m = (dz * uq + dq * uz) / (dz + dq);
            if m > sup {
                sup = m;
                if sup >= best {
                    break;
                }
            }
        }
        if sup < best {
            best = sup;
        }
    }
    best
}

/// `inf_z sup_q M(u; z, q)` by pair enumeration.
fn inf_sup(u: &[f64], nbr: &[NodeId], len: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for (&z, &dz) in nbr.iter().zip(len) {
        let uz = u[z];
        let mut sup = f64::NEG_INFINITY;
        for (&q, &dq) in nbr.iter().zip(len) {
            let m = (dz * u[q] + dq * uz) / (dz + dq);
            if m > sup {
                sup = m;
                if sup >= best {
                    break;
                }
            }
        }
        if sup < best {
            best = sup;
        }
    }
    best
}

/// `sup_z inf_q M(u; z, q)`; equal to [`inf_sup`].
fn sup_inf(u: &[f64], nbr: &[NodeId], len: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (&z, &dz) in nbr.iter().zip(len) {
        let uz = u[z];
        let mut inf = f64::INFINITY;
        for (&q, &dq) in nbr.iter().zip(len) {
            let m = (dz * u[q] + dq * uz) / (dz + dq);
            if m < inf {
                inf = m;
                if inf <= best {
                    break;
                }
            }
        }
        if inf > best {
            best = inf;
        }
    }
    best
}

fn neighbor_values<'u>(net: &Network, u: &'u [f64], x: NodeId) -> Result<&'u [f64], SolveError> {
    if x >= net.len() {
        return Err(NetworkError::NodeOutOfRange { node: x, len: net.len() }.into());
    }
    if u.len() != net.len() {
        return Err(SolveError::FieldLength { expected: net.len(), got: u.len() });
    }
    match net.neighbors(x).iter().find(|e| !u[e.to].is_finite()) {
        Some(e) => Err(SolveError::UndefinedNeighborValue(e.to)),
        None => Ok(u),
    }
}

fn split_neighbors(net: &Network, x: NodeId) -> (Vec<NodeId>, Vec<f64>) {
    net.neighbors(x).iter().map(|e| (e.to, e.length)).unzip()
}

/// The minimax update `μ(u; x)`, as evaluated by the sweeps.
pub fn mu(net: &Network, u: &[f64], x: NodeId) -> Result<f64, SolveError> {
    let u = neighbor_values(net, u, x)?;
    let mut vals: Vec<(f64, f64)> = net.neighbors(x).iter().map(|e| (u[e.to], e.length)).collect();
    Ok(inf_sup_sorted(&mut vals))
}

/// `μ(u; x)` by exhaustive inf-sup enumeration.
pub fn mu_inf_sup(net: &Network, u: &[f64], x: NodeId) -> Result<f64, SolveError> {
    let u = neighbor_values(net, u, x)?;
    let (nbr, len) = split_neighbors(net, x);
    Ok(inf_sup(u, &nbr, &len))
}

/// `μ(u; x)` computed in sup-inf order.
pub fn mu_sup_inf(net: &Network, u: &[f64], x: NodeId) -> Result<f64, SolveError> {
    let u = neighbor_values(net, u, x)?;
    let (nbr, len) = split_neighbors(net, x);
    Ok(sup_inf(u, &nbr, &len))
}

/// The local Lipschitz quotient `J(c) = max_z |u(z) - c| / d(x, z)`;
/// `μ(u; x)` minimizes it.
pub fn oberman_residual(net: &Network, u: &[f64], x: NodeId, candidate: f64) -> Result<f64, SolveError> {
    let u = neighbor_values(net, u, x)?;
    Ok(net
        .neighbors(x)
        .iter()
        .map(|e| (u[e.to] - candidate).abs() / e.length)
        .fold(0.0, f64::max))
}

/// The McShane extension `U₀(x) = min_s (f(s) + ω(d_g(x, s)))`.
pub fn mcshane_init(problem: &DirichletProblem) -> ScalarField {
    ScalarField(mcshane(problem, 1.0))
}

/// The lower McShane extension `L₀(x) = max_s (f(s) − ω(d_g(x, s)))`. Sweeps
/// from `L₀` increase towards the same limit as sweeps from `U₀`.
pub fn mcshane_lower(problem: &DirichletProblem) -> ScalarField {
    ScalarField(mcshane(problem, -1.0).into_iter().map(|v| -v).collect())
}

/// `min_s (sign·f(s) + ω(d_g(x, s)))`, equal to `sign·f` on `S`.
fn mcshane(problem: &DirichletProblem, sign: f64) -> Vec<f64> {
    let net = problem.net;
    let mut u = match problem.modulus.as_linear() {
        Some(kappa) if kappa > 0.0 => {
            // A shortest-path problem with source offsets sign·f(s)/κ.
            let sources: Vec<_> = problem.boundary().map(|(s, v)| (s, sign * v / kappa)).collect();
            net.shortest_paths(&sources).into_iter().map(|d| kappa * d).collect()
        }
        Some(_) => {
            let m = problem.data.iter().map(|v| sign * v).fold(f64::INFINITY, f64::min);
            vec![m; net.len()]
        }
        None => mcshane_by_rows(problem, sign),
    };
    for (s, v) in problem.boundary() {
        u[s] = sign * v;
    }
    u
}

/// `min_s (sign·f(s) + ω(d_g(x, s)))` evaluated directly from one geodesic
/// row per Dirichlet node.
pub fn mcshane_by_rows(problem: &DirichletProblem, sign: f64) -> Vec<f64> {
    let mut u = vec![f64::INFINITY; problem.net.len()];
    for (s, v) in problem.boundary() {
        let row = problem.net.geodesic_from(s);
        for (ux, d) in u.iter_mut().zip(row) {
            *ux = ux.min(sign * v + problem.modulus.at(d));
        }
    }
    u
}

/// Applies one Gauss–Seidel sweep in the given order. Returns the largest
/// absolute change.
pub fn sweep(problem: &DirichletProblem, u: &mut ScalarField, order: &[NodeId]) -> Result<f64, SolveError> {
    problem.check_len(u)?;
    if order.len() != problem.interior.len() {
        return Err(SolveError::OrderMismatch);
    }
    let mut seen = vec![false; problem.net.len()];
    for &x in order {
        if x >= seen.len() || problem.is_dirichlet[x] || seen[x] {
            return Err(SolveError::OrderMismatch);
        }
        seen[x] = true;
    }
    Ok(problem.sweep_in_place(&mut u.0, order).0)
}

/// `max_{x ∉ S} |u(x) - μ(u; x)|`.
pub fn residual(problem: &DirichletProblem, u: &ScalarField) -> Result<f64, SolveError> {
    problem.check_boundary(u)?;
    Ok(residual_unchecked(problem, &u.0))
}

fn residual_unchecked(problem: &DirichletProblem, u: &[f64]) -> f64 {
    let mut scratch = Vec::new();
    problem
        .interior
        .iter()
        .map(|&x| (u[x] - problem.local_minimax(u, x, &mut scratch)).abs())
        .fold(0.0, f64::max)
}

/// Solves from `U₀`.
pub fn solve(problem: &DirichletProblem, opts: &SolveOptions) -> Result<(ScalarField, SolveReport), SolveError> {
    run(problem, mcshane_init(problem), true, opts)
}

/// Solves from an arbitrary start; its values on `S` are replaced by `f`.
pub fn solve_from(
    problem: &DirichletProblem,
    start: ScalarField,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport), SolveError> {
    problem.check_len(&start)?;
    if let Some(x) = start.0.iter().position(|v| !v.is_finite()) {
        return Err(SolveError::UndefinedNeighborValue(x));
    }
    let mut start = start;
    problem.impose_boundary(&mut start);
    run(problem, start, false, opts)
}

/// `max_x max(u − lower, upper − u)`, which bounds `|u − K(f)|` whenever
/// `lower ≤ K(f) ≤ upper`.
fn bracket_bound(u: &ScalarField, upper: &ScalarField, lower: &ScalarField) -> f64 {
    u.max_excess(lower).max(upper.max_excess(u)).max(0.0)
}

/// Iterates from `u`. With certification, sweeps from `U₀` (unless `u` is
/// `U₀` itself) and from `L₀` run alongside and enclose the solution.
fn run(
    problem: &DirichletProblem,
    mut u: ScalarField,
    from_upper: bool,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport), SolveError> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(SolveError::InvalidTolerance(opts.tol));
    }
    let clock = Instant::now();
    let max_sweeps = opts.max_sweeps.unwrap_or(200 * problem.net.len());
    let order = &problem.interior;

    let mut upper = (opts.certify && !from_upper).then(|| mcshane_init(problem));
    let mut lower = opts.certify.then(|| mcshane_lower(problem));
    let bound = |u: &ScalarField, upper: &Option<ScalarField>, lower: &Option<ScalarField>| {
        lower.as_ref().map(|lo| bracket_bound(u, upper.as_ref().unwrap_or(u), lo))
    };

    let mut monotone = true;
    let mut iterations = 0;
    let mut final_residual = f64::INFINITY;
    let mut gap = bound(&u, &upper, &lower);
    if order.is_empty() {
        final_residual = 0.0;
    }
    while final_residual > opts.tol && iterations < max_sweeps {
        iterations += 1;
        let (change, rise) = problem.sweep_in_place(&mut u.0, order);
        monotone &= rise <= MONOTONE_SLACK;
        if let Some(hi) = upper.as_mut() {
            problem.sweep_in_place(&mut hi.0, order);
        }
        if let Some(lo) = lower.as_mut() {
            problem.sweep_in_place(&mut lo.0, order);
        }
        gap = bound(&u, &upper, &lower);
        if change <= opts.tol && gap.is_none_or(|g| g <= opts.tol) {
            final_residual = residual_unchecked(problem, &u.0);
        }
    }
    if final_residual.is_infinite() {
        final_residual = residual_unchecked(problem, &u.0);
    }
    let report = SolveReport {
        iterations,
        final_residual,
        monotone,
        bracket_gap: gap,
        converged: final_residual <= opts.tol && gap.is_none_or(|g| g <= opts.tol),
        wall_time: clock.elapsed().as_secs_f64(),
    };
    if !report.converged {
        return Err(SolveError::MaxSweepsExceeded(Box::new(Unconverged { field: u, report })));
    }
    Ok((u, report))
}

/// The McShane lift of a network solution to an ambient point:
/// `W(p) = min_s (K(s) + ω(d(s, p)))`, with `d` the network's ambient metric.
pub fn extend_to_point(problem: &DirichletProblem, solution: &ScalarField, p: Point) -> Result<f64, SolveError> {
    let net = problem.net;
    let (coords, metric) = match (net.coords(), net.metric()) {
        (Some(c), Some(m)) => (c, m),
        _ => return Err(NetworkError::NoCoordinates.into()),
    };
    extend_with(problem, solution, |s| metric.dist(coords[s], p))
}

/// The lift with a caller-supplied distance from each node to the target point.
pub fn extend_with(
    problem: &DirichletProblem,
    solution: &ScalarField,
    dist_to_point: impl Fn(NodeId) -> f64,
) -> Result<f64, SolveError> {
    problem.check_len(solution)?;
    Ok((0..problem.net.len())
        .map(|s| solution[s] + problem.modulus.at(dist_to_point(s)))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Norm;

    fn star(dists: &[f64]) -> Network {
        let edges: Vec<_> = dists.iter().enumerate().map(|(i, &d)| (0, i + 1, d)).collect();
        Network::from_edges(dists.len() + 1, edges).unwrap()
    }

    fn unit_path() -> Network {
        Network::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn mu_symmetric_midpoint() {
        let net = star(&[1.0, 1.0]);
        assert_eq!(mu(&net, &[9.0, 0.0, 2.0], 0).unwrap(), 1.0);
    }

    #[test]
    fn mu_of_constant() {
        let net = star(&[0.3, 1.0, 2.5]);
        assert_eq!(mu(&net, &[1.0, 4.0, 4.0, 4.0], 0).unwrap(), 4.0);
    }

    #[test]
    fn mu_unequal_distances() {
        // Ordered pairs (z,q): M(z,z)=0, M(z,q)=(1*3+2*0)/3=1, M(q,z)=1, M(q,q)=3.
        // inf over z of sup over q: min(max(0,1), max(1,3)) = 1.
        let net = star(&[1.0, 2.0]);
        let u = [0.0, 0.0, 3.0];
        let enumerated = f64::min(f64::max(0.0, 1.0), f64::max(1.0, 3.0));
        assert_eq!(mu(&net, &u, 0).unwrap(), enumerated);
        assert_eq!(mu_sup_inf(&net, &u, 0).unwrap(), enumerated);
    }

    #[test]
    fn mu_single_neighbor() {
        let net = Network::from_edges(2, [(0, 1, 0.7)]).unwrap();
        assert_eq!(mu(&net, &[0.0, -3.5], 0).unwrap(), -3.5);
    }

    #[test]
    fn mu_rejects_undefined_values() {
        let net = star(&[1.0, 1.0]);
        assert!(matches!(mu(&net, &[0.0, f64::NAN, 1.0], 0), Err(SolveError::UndefinedNeighborValue(1))));
        assert!(matches!(mu(&net, &[0.0, 1.0], 0), Err(SolveError::FieldLength { .. })));
    }

    #[test]
    fn oberman_quotient_examples() {
        let net = star(&[1.0, 1.0]);
        let u = [0.0, 0.0, 2.0];
        assert_eq!(oberman_residual(&net, &u, 0, 1.0).unwrap(), 1.0);
        assert_eq!(oberman_residual(&net, &u, 0, 0.0).unwrap(), 2.0);
        let flat = [0.0, 5.0, 5.0];
        assert_eq!(oberman_residual(&net, &flat, 0, 5.0).unwrap(), 0.0);
        // Balanced slopes: (3-1)/2 = (1-0)/1.
        let net = star(&[1.0, 2.0]);
        assert_eq!(oberman_residual(&net, &[0.0, 0.0, 3.0], 0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn mcshane_cone_and_constant() {
        let net = Network::from_edges(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0)]).unwrap();
        let p = DirichletProblem::new(&net, vec![(0, 0.0)], ModulusChoice::Given(ModulusFn::linear(1.0))).unwrap();
        assert_eq!(mcshane_init(&p).values(), &[0.0, 1.0, 1.5, 3.5]);
        let p = DirichletProblem::new(&net, vec![(0, 2.0), (3, 2.0)], ModulusChoice::Lipschitz).unwrap();
        assert_eq!(mcshane_init(&p).values(), &[2.0; 4]);
    }

    #[test]
    fn mcshane_on_path() {
        let net = unit_path();
        let p = DirichletProblem::new(&net, vec![(0, 0.0), (2, 2.0)], ModulusChoice::Lipschitz).unwrap();
        assert_eq!(p.modulus().as_linear(), Some(1.0));
        // min(0 + 1, 2 + 1)
        assert_eq!(mcshane_init(&p)[1], 1.0);
    }

    #[test]
    fn path_solution_is_linear_interpolation() {
        let net = unit_path();
        let p = DirichletProblem::new(&net, vec![(0, 0.0), (2, 2.0)], ModulusChoice::Lipschitz).unwrap();
        let mut u = mcshane_init(&p);
        assert_eq!(residual(&p, &u).unwrap(), 0.0);
        let change = sweep(&p, &mut u, &[1]).unwrap();
        assert_eq!((change, u[1]), (0.0, 1.0));
        let (k, report) = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(k.values(), &[0.0, 1.0, 2.0]);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.final_residual, 0.0);
        assert!(report.monotone && report.converged);
    }

    #[test]
    fn constant_data_solves_in_one_sweep() {
        let net = Network::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.5)]).unwrap();
        let p = DirichletProblem::new(&net, vec![(0, 7.0)], ModulusChoice::Lipschitz).unwrap();
        let (k, report) = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(k.values(), &[7.0; 4]);
        assert_eq!(report.iterations, 1);
    }

    fn saddle_problem(net: &Network) -> DirichletProblem<'_> {
        let boundary = (0..net.len())
            .filter(|&i| {
                let [x, y] = net.point(i).unwrap();
                x == 0.0 || y == 0.0 || x == 4.0 || y == 4.0
            })
            .map(|i| {
                let [x, y] = net.point(i).unwrap();
                (i, x * x - y + 0.3 * (x * y).sin())
            })
            .collect();
        DirichletProblem::new(net, boundary, ModulusChoice::Lipschitz).unwrap()
    }

    fn lattice5() -> Network {
        let coords: Vec<Point> = (0..25).map(|i| [(i % 5) as f64, (i / 5) as f64]).collect();
        Network::from_points(coords.clone(), Norm::Euclid, |a, b| Norm::Sup.dist(coords[a], coords[b]) <= 1.0)
            .unwrap()
    }

    #[test]
    fn shortest_path_and_row_extensions_agree() {
        let net = lattice5();
        let p = saddle_problem(&net);
        let upper = mcshane_init(&p);
        let lower = mcshane_lower(&p);
        let rows_up = mcshane_by_rows(&p, 1.0);
        let rows_lo = mcshane_by_rows(&p, -1.0);
        for x in p.interior() {
            assert!((upper[*x] - rows_up[*x]).abs() < 1e-12);
            assert!((lower[*x] + rows_lo[*x]).abs() < 1e-12);
            assert!(lower[*x] <= upper[*x]);
        }
    }

    #[test]
    fn sweeps_from_lower_extension_increase() {
        let net = lattice5();
        let p = saddle_problem(&net);
        let mut u = mcshane_lower(&p);
        let (k, _) = solve(&p, &SolveOptions::default()).unwrap();
        for _ in 0..50 {
            let before = u.clone();
            sweep(&p, &mut u, p.interior()).unwrap();
            assert!(u.values().iter().zip(before.values()).all(|(a, b)| *a >= b - MONOTONE_SLACK));
            assert!(u.values().iter().zip(k.values()).all(|(a, b)| *a <= b + 1e-9));
        }
    }

    #[test]
    fn sweep_order_is_validated() {
        let net = unit_path();
        let p = DirichletProblem::new(&net, vec![(0, 0.0), (2, 2.0)], ModulusChoice::Lipschitz).unwrap();
        let mut u = mcshane_init(&p);
        assert!(matches!(sweep(&p, &mut u, &[]), Err(SolveError::OrderMismatch)));
        assert!(matches!(sweep(&p, &mut u, &[0]), Err(SolveError::OrderMismatch)));
    }

    #[test]
    fn residual_requires_boundary_data() {
        let net = unit_path();
        let p = DirichletProblem::new(&net, vec![(0, 0.0), (2, 2.0)], ModulusChoice::Lipschitz).unwrap();
        let u = ScalarField::new(vec![0.0, 1.0, 3.0]);
        assert!(matches!(residual(&p, &u), Err(SolveError::BoundaryMismatch(2))));
    }

    #[test]
    fn residual_on_three_by_three_grid() {
        // Corners 0 (bottom) and 1 (top), 8-neighbor unit-spaced 3x3 grid.
        let coords: Vec<Point> = (0..9).map(|i| [(i % 3) as f64, (i / 3) as f64]).collect();
        let net = Network::from_points(coords.clone(), Norm::Euclid, |a, b| {
            Norm::Sup.dist(coords[a], coords[b]) <= 1.0
        })
        .unwrap();
        let boundary: Vec<_> = (0..9).filter(|&i| i != 4).map(|i| (i, if i >= 6 { 1.0 } else { 0.0 })).collect();
        let p = DirichletProblem::new(&net, boundary, ModulusChoice::Lipschitz).unwrap();
        let u0 = mcshane_init(&p);
        // Oracle: U₀(centre) = min over boundary of f(s) + κ d_g = 0 + 1·1, and μ at the
        // centre pairs the bottom row (0) against the top row (1) at equal distances.
        let kappa = p.modulus().as_linear().unwrap();
        assert_eq!(kappa, 1.0);
        assert_eq!(u0[4], 1.0);
        let mut pairs = Vec::new();
        for e in net.neighbors(4) {
            let mut sup = f64::NEG_INFINITY;
            for q in net.neighbors(4) {
                sup = sup.max((e.length * u0[q.to] + q.length * u0[e.to]) / (e.length + q.length));
            }
            pairs.push(sup);
        }
        let oracle_mu = pairs.into_iter().fold(f64::INFINITY, f64::min);
        assert!((residual(&p, &u0).unwrap() - (1.0 - oracle_mu).abs()).abs() < 1e-15);
        assert!(residual(&p, &u0).unwrap() > 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let net = unit_path();
        assert!(matches!(DirichletProblem::new(&net, vec![], ModulusChoice::Lipschitz), Err(SolveError::EmptyDirichletSet)));
        assert!(matches!(
            DirichletProblem::new(&net, vec![(0, 0.0), (0, 1.0)], ModulusChoice::Lipschitz),
            Err(SolveError::DuplicateDirichlet(0))
        ));
        assert!(matches!(
            DirichletProblem::new(&net, vec![(0, 0.0), (2, 5.0)], ModulusChoice::Given(ModulusFn::linear(1.0))),
            Err(SolveError::ModulusTooSmall(0, 2))
        ));
        let p = DirichletProblem::new(&net, vec![(0, 0.0)], ModulusChoice::Lipschitz).unwrap();
        let opts = SolveOptions { tol: 0.0, ..Default::default() };
        assert!(matches!(solve(&p, &opts), Err(SolveError::InvalidTolerance(_))));
    }

    #[test]
    fn max_sweeps_returns_best_iterate() {
        let coords: Vec<Point> = (0..25).map(|i| [(i % 5) as f64, (i / 5) as f64]).collect();
        let net = Network::from_points(coords.clone(), Norm::Euclid, |a, b| {
            Norm::Sup.dist(coords[a], coords[b]) <= 1.0
        })
        .unwrap();
        let boundary: Vec<_> = (0..25)
            .filter(|&i| i % 5 == 0 || i % 5 == 4 || !(5..20).contains(&i))
            .map(|i| (i, coords[i][0] * coords[i][0] - coords[i][1]))
            .collect();
        let p = DirichletProblem::new(&net, boundary, ModulusChoice::Lipschitz).unwrap();
        let opts = SolveOptions { tol: 1e-14, max_sweeps: Some(1), certify: true };
        match solve(&p, &opts) {
            Err(SolveError::MaxSweepsExceeded(u)) => {
                assert_eq!(u.report.iterations, 1);
                assert!(!u.report.converged);
                assert_eq!(u.field.len(), 25);
            }
            other => panic!("expected MaxSweepsExceeded, got {other:?}"),
        }
    }

    #[test]
    fn lift_at_edge_midpoint() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let net = Network::from_points(coords, Norm::Euclid, |a, b| a.abs_diff(b) == 1).unwrap();
        let p = DirichletProblem::new(&net, vec![(0, 0.0), (2, 2.0)], ModulusChoice::Lipschitz).unwrap();
        let (k, _) = solve(&p, &SolveOptions::default()).unwrap();
        // Nodes give 0 + 0.5, 1 + 0.5, 2 + 1.5.
        assert_eq!(extend_to_point(&p, &k, [0.5, 0.0]).unwrap(), 0.5);
        assert_eq!(extend_to_point(&p, &k, [1.0, 0.0]).unwrap(), 1.0);
        let bare = unit_path();
        let p = DirichletProblem::new(&bare, vec![(0, 0.0)], ModulusChoice::Lipschitz).unwrap();
        let k = ScalarField::constant(3, 0.0);
        assert!(matches!(extend_to_point(&p, &k, [0.0, 0.0]), Err(SolveError::Network(NetworkError::NoCoordinates))));
    }

    #[test]
    fn concave_mode_matches_direct_rows() {
        let net = Network::from_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 4, 3.5)]).unwrap();
        let p = DirichletProblem::new(&net, vec![(0, 0.0), (2, 1.0), (4, 1.2)], ModulusChoice::Concave).unwrap();
        assert!(p.modulus().as_linear().is_none());
        let u0 = mcshane_init(&p);
        assert_eq!(u0[0], 0.0);
        assert_eq!(u0[2], 1.0);
        assert_eq!(u0[4], 1.2);
        let (k, report) = solve(&p, &SolveOptions::default()).unwrap();
        assert!(report.monotone);
        assert!(residual(&p, &k).unwrap() <= 1e-9);
    }

    fn random_network(pts: Vec<(f64, f64)>, radius: f64) -> Option<Network> {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        Network::from_points(pts.clone(), Norm::Euclid, |a, b| Norm::Euclid.dist(pts[a], pts[b]) <= radius).ok()
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn minimax_orders_agree(
            nbrs in proptest::collection::vec((-5.0f64..5.0, 0.01f64..3.0), 1..25),
        ) {
            let edges: Vec<_> = nbrs.iter().enumerate().map(|(i, &(_, d))| (0, i + 1, d)).collect();
            let net = Network::from_edges(nbrs.len() + 1, edges).unwrap();
            let u: Vec<f64> = std::iter::once(0.0).chain(nbrs.iter().map(|p| p.0)).collect();
            let a = mu(&net, &u, 0).unwrap();
            let b = mu_inf_sup(&net, &u, 0).unwrap();
            let c = mu_sup_inf(&net, &u, 0).unwrap();
            proptest::prop_assert!((a - b).abs() <= 1e-12 * 5.0 && (a - c).abs() <= 1e-12 * 5.0);
            let j = oberman_residual(&net, &u, 0, a).unwrap();
            for eps in [1e-6, 1e-3] {
                proptest::prop_assert!(j <= oberman_residual(&net, &u, 0, a + eps).unwrap() * (1.0 + 1e-12));
                proptest::prop_assert!(j <= oberman_residual(&net, &u, 0, a - eps).unwrap() * (1.0 + 1e-12));
            }
        }

        #[test]
        fn iterates_are_enclosed_and_decreasing(
            pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 6..20),
            radius in 0.35f64..0.8,
            data in proptest::collection::vec(-1.0f64..1.0, 6),
            size in 1usize..6,
        ) {
            let Some(net) = random_network(pts, radius) else { return Ok(()) };
            let s: Vec<NodeId> = (0..size.min(net.len() - 1)).collect();
            if !validate_p4(&net, &s, P4Metric::Ambient).unwrap().holds {
                return Ok(());
            }
            let p = DirichletProblem::new(&net, s.iter().map(|&x| (x, data[x])).collect(), ModulusChoice::Concave).unwrap();
            let (lo, hi) = (p.data_min(), p.data_max());
            let mut u = mcshane_init(&p);
            let dm = crate::network::geodesic_matrix(&net);
            for x in 0..net.len() {
                proptest::prop_assert!(u[x] >= lo - 1e-12 && u[x] <= hi + 1e-12);
                for y in 0..net.len() {
                    proptest::prop_assert!((u[x] - u[y]).abs() <= p.modulus().at(dm.geodesic(x, y)) + 1e-12);
                }
            }
            for &(x, v) in &p.boundary().collect::<Vec<_>>() {
                proptest::prop_assert_eq!(u[x], v);
            }
            for _ in 0..20 {
                let before = u.clone();
                sweep(&p, &mut u, p.interior()).unwrap();
                for x in 0..net.len() {
                    proptest::prop_assert!(u[x] <= before[x] + MONOTONE_SLACK);
                    proptest::prop_assert!(u[x] >= lo - 1e-12 && u[x] <= hi + 1e-12);
                }
            }
            let (k, report) = solve(&p, &SolveOptions::default()).unwrap();
            proptest::prop_assert!(report.monotone && report.converged);
            proptest::prop_assert!(residual(&p, &k).unwrap() <= 1e-9);
        }
    }
}
