//! Lipschitz constants and concave moduli of continuity of sampled data.
//!
//! A [`ModulusFn`] is a piecewise-linear, nondecreasing, concave function with
//! `ω(0) = 0`. The Lipschitz case is the linear modulus `t ↦ κ·t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModulusError {
    #[error("samples {0} and {1} are at zero distance with different values")]
    DuplicatePoints(usize, usize),
    #[error("at least two samples are needed")]
    SingleSample,
    #[error("modulus evaluated at negative argument {0}")]
    NegativeArgument(f64),
    #[error("invalid modulus: {0}")]
    Invalid(String),
}

/// Piecewise-linear concave modulus of continuity.
///
/// Serialized as `{"breakpoints": [[t, w], ...], "tail_slope": s}` with the
/// first breakpoint at `[0, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModulus", into = "RawModulus")]
pub struct ModulusFn {
    breakpoints: Vec<[f64; 2]>,
    tail_slope: f64,
}

#[derive(Serialize, Deserialize)]
struct RawModulus {
    breakpoints: Vec<[f64; 2]>,
    tail_slope: f64,
}

impl TryFrom<RawModulus> for ModulusFn {
    type Error = ModulusError;

    fn try_from(raw: RawModulus) -> Result<Self, Self::Error> {
        ModulusFn::new(raw.breakpoints, raw.tail_slope)
    }
}

impl From<ModulusFn> for RawModulus {
    fn from(m: ModulusFn) -> Self {
        RawModulus { breakpoints: m.breakpoints, tail_slope: m.tail_slope }
    }
}

impl ModulusFn {
    pub fn new(breakpoints: Vec<[f64; 2]>, tail_slope: f64) -> Result<Self, ModulusError> {
        let invalid = |m: &str| Err(ModulusError::Invalid(m.to_string()));
        match breakpoints.first() {
            Some(&[t, w]) if t == 0.0 && w == 0.0 => {}
            _ => return invalid("first breakpoint must be (0, 0)"),
        }
        if !(tail_slope >= 0.0 && tail_slope.is_finite()) {
            return invalid("tail slope must be finite and nonnegative");
        }
        let mut prev_slope = f64::INFINITY;
        for pair in breakpoints.windows(2) {
            let ([t0, w0], [t1, w1]) = (pair[0], pair[1]);
            if !(t1 > t0 && t1.is_finite() && w1.is_finite()) {
                return invalid("breakpoints must be finite and strictly increasing in t");
            }
            if w1 < w0 {
                return invalid("modulus must be nondecreasing");
            }
            let slope = (w1 - w0) / (t1 - t0);
            if slope > prev_slope * (1.0 + 1e-12) {
                return invalid("chord slopes must be nonincreasing");
            }
            prev_slope = slope;
        }
        if tail_slope > prev_slope * (1.0 + 1e-12) {
            return invalid("tail slope exceeds the last chord slope");
        }
        Ok(ModulusFn { breakpoints, tail_slope })
    }

    /// The Lipschitz modulus `t ↦ kappa·t`.
    pub fn linear(kappa: f64) -> Self {
        assert!(kappa >= 0.0 && kappa.is_finite(), "Lipschitz constant must be finite and >= 0");
        ModulusFn { breakpoints: vec![[0.0, 0.0]], tail_slope: kappa }
    }

    pub fn breakpoints(&self) -> &[[f64; 2]] {
        &self.breakpoints
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    /// `Some(κ)` when this is the linear modulus `κ·t`.
    pub fn as_linear(&self) -> Option<f64> {
        (self.breakpoints.len() == 1).then_some(self.tail_slope)
    }

    pub fn eval(&self, t: f64) -> Result<f64, ModulusError> {
        if t < 0.0 || t.is_nan() {
            return Err(ModulusError::NegativeArgument(t));
        }
        Ok(self.at(t))
    }

    /// Evaluation for arguments known to be nonnegative.
    pub fn at(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "negative modulus argument {t}");
        let bp = &self.breakpoints;
        let i = bp.partition_point(|p| p[0] <= t);
        if i == bp.len() {
            let [tl, wl] = bp[bp.len() - 1];
            return wl + self.tail_slope * (t - tl);
        }
        let ([t0, w0], [t1, w1]) = (bp[i - 1], bp[i]);
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// `sup |f(x) - f(y)| / d(x, y)` over distinct samples.
///
/// Pairs at zero distance with equal values are skipped; with different values
/// the constant is infinite and reported as an error.
pub fn lipschitz_constant(
    values: &[f64],
    dist: impl Fn(usize, usize) -> f64,
) -> Result<f64, ModulusError> {
    if values.len() < 2 {
        return Err(ModulusError::SingleSample);
    }
    let mut kappa = 0.0_f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let gap = (values[i] - values[j]).abs();
            let d = dist(i, j);
            if d <= 0.0 {
                if gap > 0.0 {
                    return Err(ModulusError::DuplicatePoints(i, j));
                }
                continue;
            }
            kappa = kappa.max(gap / d);
        }
    }
    Ok(kappa)
}

/// The least nondecreasing concave modulus dominating every sampled pair
/// `(d(x, y), |f(x) - f(y)|)`.
///
/// This is the upper concave hull of the pair cloud and the origin, cut at its
/// highest vertex and continued flat.
pub fn concave_modulus(
    values: &[f64],
    dist: impl Fn(usize, usize) -> f64,
) -> Result<ModulusFn, ModulusError> {
    if values.len() < 2 {
        return Err(ModulusError::SingleSample);
    }
    let mut pts = vec![[0.0, 0.0]];
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let gap = (values[i] - values[j]).abs();
            let d = dist(i, j);
            if d <= 0.0 {
                if gap > 0.0 {
                    return Err(ModulusError::DuplicatePoints(i, j));
                }
                continue;
            }
            pts.push([d, gap]);
        }
    }
    Ok(upper_hull_modulus(pts))
}

fn upper_hull_modulus(mut pts: Vec<[f64; 2]>) -> ModulusFn {
    // Sort by t, highest value first among equal t, so only the top point of
    // each abscissa can survive.
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(b[1].total_cmp(&a[1])));
    pts.dedup_by(|b, a| a[0] == b[0]);

    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let [o, a] = [hull[hull.len() - 2], hull[hull.len() - 1]];
            let cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let top = hull
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p[1] > hull[best][1] { i } else { best });
    hull.truncate(top + 1);
    ModulusFn { breakpoints: hull, tail_slope: 0.0 }
}

/// `sup_{0 <= t <= horizon} |ω1(t) - ω2(t)|`.
///
/// Both moduli are piecewise linear, so the supremum is attained at a
/// breakpoint of either one or at the horizon.
pub fn modulus_sup_distance(w1: &ModulusFn, w2: &ModulusFn, horizon: f64) -> f64 {
    w1.breakpoints
        .iter()
        .chain(&w2.breakpoints)
        .map(|p| p[0])
        .filter(|&t| t <= horizon)
        .chain(std::iter::once(horizon.max(0.0)))
        .map(|t| (w1.at(t) - w2.at(t)).abs())
        .fold(0.0, f64::max)
}
