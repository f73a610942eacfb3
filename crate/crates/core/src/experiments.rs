//! Error tables against known solutions, the slotted-square experiments, and a
//! finite-difference consistency check of the midrange operator.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{build_grid, build_slot_domain, geodesic_cone, GridError, GridSpec};
use crate::network::{NetworkError, NodeId, Norm, P4Metric, Point};
use crate::solver::{solve, DirichletProblem, ModulusChoice, ScalarField, SolveError, SolveOptions, SolveReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("exact solution is not finite at node {node} ({x}, {y})")]
    NonfiniteExact { node: NodeId, x: f64, y: f64 },
    #[error("gradient vanishes at ({0}, {1})")]
    ZeroGradient(f64, f64),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Polar angle in `[0, 2π)`, with the origin assigned `π/2`.
fn theta(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        return FRAC_PI_2;
    }
    let t = y.atan2(x);
    if t < 0.0 { t + 2.0 * PI } else { t }
}

/// Known solutions used as Dirichlet data and as reference fields.
#[derive(Clone)]
pub enum ExactSolution {
    /// `r`
    ConeR,
    /// `θ`
    AngleTheta,
    /// `r^{1/2} e^{θ/2}`
    SpiralR12,
    /// `x^{4/3} − y^{4/3}` with odd powers.
    AronssonX43,
    /// `x² − y²`, exact for the sup norm.
    SupnormX2Y2,
    /// `|x| − |y|`, exact for the 1-norm.
    OnenormAbsXY,
    Custom(String, Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl ExactSolution {
    pub const CATALOG: [ExactSolution; 6] = [
        ExactSolution::ConeR,
        ExactSolution::AngleTheta,
        ExactSolution::SpiralR12,
        ExactSolution::AronssonX43,
        ExactSolution::SupnormX2Y2,
        ExactSolution::OnenormAbsXY,
    ];

    pub fn custom(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ExactSolution::Custom(name.into(), Arc::new(f))
    }

    pub fn id(&self) -> &str {
        match self {
            ExactSolution::ConeR => "cone_r",
            ExactSolution::AngleTheta => "angle_theta",
            ExactSolution::SpiralR12 => "spiral_r12",
            ExactSolution::AronssonX43 => "aronsson_x43",
            ExactSolution::SupnormX2Y2 => "supnorm_x2y2",
            ExactSolution::OnenormAbsXY => "onenorm_absxy",
            ExactSolution::Custom(name, _) => name,
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let [x, y] = p;
        match self {
            ExactSolution::ConeR => x.hypot(y),
            ExactSolution::AngleTheta => theta(x, y),
            ExactSolution::SpiralR12 => x.hypot(y).sqrt() * (theta(x, y) / 2.0).exp(),
            ExactSolution::AronssonX43 => x.signum() * x.abs().powf(4.0 / 3.0) - y.signum() * y.abs().powf(4.0 / 3.0),
            ExactSolution::SupnormX2Y2 => x * x - y * y,
            ExactSolution::OnenormAbsXY => x.abs() - y.abs(),
            ExactSolution::Custom(_, f) => f(x, y),
        }
    }

    /// The metric in which this function is a solution, when it matters.
    pub fn required_norm(&self) -> Option<Norm> {
        match self {
            ExactSolution::SupnormX2Y2 => Some(Norm::Sup),
            ExactSolution::OnenormAbsXY => Some(Norm::One),
            ExactSolution::Custom(..) => None,
            _ => Some(Norm::Euclid),
        }
    }
}

impl FromStr for ExactSolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ExactSolution::CATALOG
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| format!("unknown function `{s}`"))
    }
}

/// Solves on the grid with `f = u|S` and returns `max_x |K(f)(x) − u(x)|`.
pub fn run_cell(exact: &ExactSolution, spec: GridSpec, opts: &SolveOptions) -> Result<f64, ExperimentError> {
    let grid = build_grid(spec)?;
    let reference: Vec<f64> = (0..grid.network.len()).map(|x| exact.eval(grid.point(x))).collect();
    if let Some(node) = reference.iter().position(|v| !v.is_finite()) {
        let [x, y] = grid.point(node);
        return Err(ExperimentError::NonfiniteExact { node, x, y });
    }
    let boundary = grid.dirichlet.iter().map(|&s| (s, reference[s])).collect();
    let problem = DirichletProblem::new(&grid.network, boundary, ModulusChoice::Lipschitz)?;
    let (field, _) = solve(&problem, opts)?;
    Ok(field
        .values()
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Label, function and grid-per-`n` of one table row.
type TableRow = (String, ExactSolution, Box<dyn Fn(usize) -> GridSpec + Send + Sync>);

/// The reproduced tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    /// `r` on the unit square.
    T71,
    /// `θ` on `[−1/2, 1/2] × [0, 1]`.
    T72,
    /// `r^{1/2} e^{θ/2}` on `[−1/2, 1/2] × [0, 1]`.
    T73,
    /// `r` with a frame of thickness `k` as Dirichlet set.
    T74,
    /// `x² − y²` (sup norm) and `|x| − |y|` (1-norm) on `[−1, 1]²`, `k = 1`.
    T75,
}

impl FromStr for TableId {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, ExperimentError> {
        match s {
            "7.1" => Ok(TableId::T71),
            "7.2" => Ok(TableId::T72),
            "7.3" => Ok(TableId::T73),
            "7.4" => Ok(TableId::T74),
            "7.5" => Ok(TableId::T75),
            _ => Err(ExperimentError::UnknownTable(s.to_string())),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableId::T71 => "7.1",
            TableId::T72 => "7.2",
            TableId::T73 => "7.3",
            TableId::T74 => "7.4",
            TableId::T75 => "7.5",
        })
    }
}

impl TableId {
    pub fn default_k(self) -> Vec<usize> {
        match self {
            TableId::T71 | TableId::T72 => vec![1, 2, 3, 4],
            TableId::T73 => vec![1, 2, 3],
            TableId::T74 => vec![2, 3, 4, 5],
            TableId::T75 => vec![1],
        }
    }

    pub fn default_n(self) -> Vec<usize> {
        vec![8, 16, 32, 64]
    }

    /// Row label, function and grid for one row of the table.
    fn rows(self, k_list: &[usize]) -> Vec<TableRow> {
        let by_k = |exact: ExactSolution, make: fn(usize, usize) -> GridSpec| {
            k_list
                .iter()
                .map(|&k| {
                    let f: Box<dyn Fn(usize) -> GridSpec + Send + Sync> = Box::new(move |n| make(n, k));
                    (format!("k={k}"), exact.clone(), f)
                })
                .collect::<Vec<_>>()
        };
        let polar = |n, k| GridSpec::new(n, k).placed(1.0, [-0.5, 0.0]);
        match self {
            TableId::T71 => by_k(ExactSolution::ConeR, GridSpec::new),
            TableId::T72 => by_k(ExactSolution::AngleTheta, polar),
            TableId::T73 => by_k(ExactSolution::SpiralR12, polar),
            TableId::T74 => by_k(ExactSolution::ConeR, |n, k| GridSpec::new(n, k).thick()),
            TableId::T75 => vec![
                (
                    "e1".into(),
                    ExactSolution::SupnormX2Y2,
                    Box::new(|n| GridSpec::new(n, 1).norms(Norm::Sup, Norm::Sup).placed(2.0, [-1.0, -1.0])),
                ),
                (
                    "e2".into(),
                    ExactSolution::OnenormAbsXY,
                    Box::new(|n| GridSpec::new(n, 1).norms(Norm::One, Norm::One).placed(2.0, [-1.0, -1.0])),
                ),
            ],
        }
    }
}

/// Sup-node errors, one row per `k` (or per function for the last table) and
/// one column per `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub table: TableId,
    pub rows: Vec<String>,
    pub functions: Vec<String>,
    pub n: Vec<usize>,
    pub cells: Vec<Vec<f64>>,
    pub specs: Vec<Vec<GridSpec>>,
    pub tol: f64,
}

impl ErrorTable {
    pub fn cell(&self, row: &str, n: usize) -> Option<f64> {
        let r = self.rows.iter().position(|l| l == row)?;
        let c = self.n.iter().position(|&m| m == n)?;
        Some(self.cells[r][c])
    }

    /// Header `row,<n>...` then one line per row, in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for n in &self.n {
            write!(out, ",{n}").unwrap();
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(label);
            for v in row {
                write!(out, ",{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_table(
    table: TableId,
    n_list: &[usize],
    k_list: &[usize],
    opts: &SolveOptions,
) -> Result<ErrorTable, ExperimentError> {
    if n_list.is_empty() || k_list.is_empty() {
        return Err(ExperimentError::Invalid("n and k lists must be nonempty".into()));
    }
    let rows = table.rows(k_list);
    let jobs: Vec<(usize, usize)> = (0..rows.len()).flat_map(|r| (0..n_list.len()).map(move |c| (r, c))).collect();
    let results: Vec<f64> = jobs
        .par_iter()
        .map(|&(r, c)| run_cell(&rows[r].1, (rows[r].2)(n_list[c]), opts))
        .collect::<Result<_, _>>()?;
    Ok(ErrorTable {
        table,
        rows: rows.iter().map(|r| r.0.clone()).collect(),
        functions: rows.iter().map(|r| r.1.id().to_string()).collect(),
        n: n_list.to_vec(),
        cells: results.chunks(n_list.len()).map(<[f64]>::to_vec).collect(),
        specs: rows.iter().map(|r| n_list.iter().map(|&n| (r.2)(n)).collect()).collect(),
        tol: opts.tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotVariant {
    /// Data on both the outer square and the slot outline.
    BothBoundaries,
    /// Data on the outer square only.
    OuterOnly,
}

impl FromStr for SlotVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "both_boundaries" => Ok(SlotVariant::BothBoundaries),
            "outer_only" => Ok(SlotVariant::OuterOnly),
            _ => Err(format!("unknown slot variant `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub variant: SlotVariant,
    pub coords: Vec<Point>,
    /// Geodesic distance from `(1/2, 0)`.
    pub cone: ScalarField,
    pub solution: ScalarField,
    /// `max |solution − cone|`.
    pub gap: f64,
    /// `max |solution(x, y) − solution(1 − x, y)|`.
    pub mirror_defect: f64,
    pub report: SolveReport,
}

/// Solves on the slotted square with the geodesic cone from `(1/2, 0)` as data.
pub fn slot_experiment(
    n: usize,
    k: usize,
    eps: f64,
    variant: SlotVariant,
    opts: &SolveOptions,
) -> Result<SlotOutcome, ExperimentError> {
    let domain = build_slot_domain(n, k, eps)?;
    let cone = geodesic_cone(&domain.network, [0.5, 0.0])?;
    let mut gamma = domain.outer.clone();
    if variant == SlotVariant::BothBoundaries {
        gamma.extend(&domain.inner);
    }
    let boundary = gamma.iter().map(|&s| (s, cone[s])).collect();
    let problem = DirichletProblem::with_metric(&domain.network, boundary, ModulusChoice::Lipschitz, P4Metric::Geodesic)?;
    let (solution, report) = solve(&problem, opts)?;
    let gap = solution.sup_distance(&cone);
    let mirror_defect = (0..domain.network.len())
        .map(|x| (solution[x] - solution[domain.mirror(x)]).abs())
        .fold(0.0, f64::max);
    Ok(SlotOutcome {
        variant,
        coords: domain.network.coords().unwrap().to_vec(),
        cone,
        solution,
        gap,
        mirror_defect,
        report,
    })
}

/// Smooth functions with closed-form first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothFn {
    /// `3x − y`
    Linear,
    /// `x² + 2y`
    X2Plus2y,
    /// `x² − y²`
    X2MinusY2,
    /// `r`
    ConeR,
    /// `x³ + xy`
    Cubic,
}

impl FromStr for SmoothFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(SmoothFn::Linear),
            "x2_plus_2y" => Ok(SmoothFn::X2Plus2y),
            "x2_minus_y2" => Ok(SmoothFn::X2MinusY2),
            "cone_r" => Ok(SmoothFn::ConeR),
            "cubic" => Ok(SmoothFn::Cubic),
            _ => Err(format!("unknown function `{s}`")),
        }
    }
}

impl SmoothFn {
    pub fn eval(self, [x, y]: Point) -> f64 {
        match self {
            SmoothFn::Linear => 3.0 * x - y,
            SmoothFn::X2Plus2y => x * x + 2.0 * y,
            SmoothFn::X2MinusY2 => x * x - y * y,
            SmoothFn::ConeR => x.hypot(y),
            SmoothFn::Cubic => x * x * x + x * y,
        }
    }

    pub fn gradient(self, [x, y]: Point) -> [f64; 2] {
        match self {
            SmoothFn::Linear => [3.0, -1.0],
            SmoothFn::X2Plus2y => [2.0 * x, 2.0],
            SmoothFn::X2MinusY2 => [2.0 * x, -2.0 * y],
            SmoothFn::ConeR => {
                let r = x.hypot(y);
                [x / r, y / r]
            }
            SmoothFn::Cubic => [3.0 * x * x + y, x],
        }
    }

    /// `[u_xx, u_xy, u_yy]`
    pub fn hessian(self, [x, y]: Point) -> [f64; 3] {
        match self {
            SmoothFn::Linear => [0.0; 3],
            SmoothFn::X2Plus2y => [2.0, 0.0, 0.0],
            SmoothFn::X2MinusY2 => [2.0, 0.0, -2.0],
            SmoothFn::ConeR => {
                let r3 = x.hypot(y).powi(3);
                [y * y / r3, -x * y / r3, x * x / r3]
            }
            SmoothFn::Cubic => [6.0 * x, 1.0, 0.0],
        }
    }

    /// `D²u(ν, ν)` with `ν = Du / |Du|`.
    pub fn infinity_laplacian(self, p: Point) -> Result<f64, ExperimentError> {
        let [gx, gy] = self.gradient(p);
        let g2 = gx * gx + gy * gy;
        if g2 == 0.0 || !g2.is_finite() {
            return Err(ExperimentError::ZeroGradient(p[0], p[1]));
        }
        let [a, b, c] = self.hessian(p);
        Ok((a * gx * gx + 2.0 * b * gx * gy + c * gy * gy) / g2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub function: SmoothFn,
    pub point: Point,
    pub h: Vec<f64>,
    /// `(½ max + ½ min − u(x)) / h²` over the circle of radius `h`.
    pub ratios: Vec<f64>,
    pub infinity_laplacian: f64,
    /// Observed convergence order from the last three ratios.
    pub order: f64,
    /// Extrapolated limit of the ratios.
    pub limit: f64,
    /// `limit / Δ∞u(x)`.
    pub constant: f64,
}

const ANGULAR_SAMPLES: usize = 4096;

/// Golden-section search for a maximum of `g` on `[a, b]`.
fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}

/// Max and min of `u` on the circle of radius `h` around `p`.
fn circle_extrema(u: SmoothFn, p: Point, h: f64) -> (f64, f64) {
    let at = |t: f64| u.eval([p[0] + h * t.cos(), p[1] + h * t.sin()]);
    let dt = 2.0 * PI / ANGULAR_SAMPLES as f64;
    let (mut imax, mut imin) = (0, 0);
    let (mut vmax, mut vmin) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..ANGULAR_SAMPLES {
        let v = at(i as f64 * dt);
        if v > vmax {
            (vmax, imax) = (v, i);
        }
        if v < vmin {
            (vmin, imin) = (v, i);
        }
    }
    let tmax = imax as f64 * dt;
    let tmin = imin as f64 * dt;
    let hi = golden_max(at, tmax - dt, tmax + dt).max(vmax);
    let lo = -golden_max(|t| -at(t), tmin - dt, tmin + dt);
    (hi, lo.min(vmin))
}

/// Midrange ratios on shrinking circles and their extrapolated limit.
pub fn consistency_check(u: SmoothFn, p: Point, h_list: &[f64]) -> Result<ConsistencyReport, ExperimentError> {
    let lap = u.infinity_laplacian(p)?;
    if h_list.len() < 3 || h_list.windows(2).any(|w| (w[1] - w[0] / 2.0).abs() > 1e-12 * w[0]) {
        return Err(ExperimentError::Invalid("need at least three radii, each half the previous".into()));
    }
    let center = u.eval(p);
    let ratios: Vec<f64> = h_list
        .iter()
        .map(|&h| {
            let (hi, lo) = circle_extrema(u, p, h);
            (0.5 * hi + 0.5 * lo - center) / (h * h)
        })
        .collect();
    let m = ratios.len();
    let (r0, r1, r2) = (ratios[m - 3], ratios[m - 2], ratios[m - 1]);
    let (d1, d2) = (r1 - r0, r2 - r1);
    // Ratios within rounding of each other: already converged.
    let flat = d2.abs() <= 1e-9 * r2.abs().max(1e-300) || d1.abs() <= d2.abs();
    let (order, limit) = if flat {
        (f64::INFINITY, r2)
    } else {
        let order = (d1 / d2).abs().log2();
        let scale = 2f64.powf(order);
        (order, r2 + d2 / (scale - 1.0))
    };
    Ok(ConsistencyReport {
        function: u,
        point: p,
        h: h_list.to_vec(),
        ratios,
        infinity_laplacian: lap,
        order,
        limit,
        constant: limit / lap,
    })
}

/// Radii `h0, h0/2, ...` of the given length.
pub fn halving(h0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| h0 / 2f64.powi(i as i32)).collect()
}
