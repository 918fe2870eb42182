//! Phase-space point sets, sector counting functions and angular densities.
//!
//! Points `(xi, eta)` are identified with `xi + i*eta`. All counting uses the
//! strict modulus inequality `|lambda| < r` and half-open angular sectors
//! `theta < arg(lambda) <= vartheta` with `arg` taken in `(0, 2*pi]`, so the
//! positive real axis sits at angle `2*pi`.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::CompensatedComplexSum;

/// Relative width of the guard band around `|lambda| = r`: points this close
/// to the circle are treated as lying on it, hence outside.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// Upper bound on the number of points a single generator call may produce.
pub const MAX_GENERATED_POINTS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// time coordinate
    pub xi: f64,
    /// frequency coordinate
    pub eta: f64,
}

impl PhasePoint {
    pub const fn new(xi: f64, eta: f64) -> Self {
        PhasePoint { xi, eta }
    }

    pub fn modulus(&self) -> f64 {
        self.xi.hypot(self.eta)
    }

    /// Argument in `(0, 2*pi]`.
    pub fn angle(&self) -> f64 {
        let a = self.eta.atan2(self.xi);
        if a <= 0.0 {
            a + TAU
        } else {
            a
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.xi, self.eta)
    }

    pub fn from_complex(z: Complex64) -> Self {
        PhasePoint::new(z.re, z.im)
    }

    pub fn is_origin(&self) -> bool {
        self.xi == 0.0 && self.eta == 0.0
    }

    fn order(&self, other: &Self) -> Ordering {
        self.modulus()
            .total_cmp(&other.modulus())
            .then(self.angle().total_cmp(&other.angle()))
    }
}

/// A named generator of phase-space sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSetSpec {
    /// `{(+-1, 0)} U {(0, +-sqrt(2n))} U {(+-sqrt(2n), 0)}`, `n >= 1`.
    AxesTheorem1,
    /// `aZ x bZ` with the origin dropped.
    Lattice { a: f64, b: f64 },
    /// `aZ x bZ` with the origin and one further lattice point dropped.
    LatticeMinusPoint { a: f64, b: f64, omitted: PhasePoint },
    Explicit { points: Vec<PhasePoint> },
}

impl PointSetSpec {
    pub fn lattice(a: f64, b: f64) -> Self {
        PointSetSpec::Lattice { a, b }
    }

    pub fn explicit(points: Vec<PhasePoint>) -> Self {
        PointSetSpec::Explicit { points }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PointSetSpec::AxesTheorem1 => Ok(()),
            PointSetSpec::Lattice { a, b } => check_lattice_constants(*a, *b),
            PointSetSpec::LatticeMinusPoint { a, b, omitted } => {
                check_lattice_constants(*a, *b)?;
                lattice_index(*a, *b, omitted).map(|_| ())
            }
            PointSetSpec::Explicit { points } => {
                for (i, p) in points.iter().enumerate() {
                    if !(p.xi.is_finite() && p.eta.is_finite()) {
                        return invalid(format!("explicit point {i} is not finite"));
                    }
                    if p.is_origin() {
                        return invalid("explicit point list contains the origin");
                    }
                    if points[..i].iter().any(|q| q == p) {
                        return invalid(format!("duplicate explicit point ({}, {})", p.xi, p.eta));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_lattice_constants(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return invalid(format!("lattice constants must be positive, got a = {a}, b = {b}"));
    }
    Ok(())
}

fn lattice_index(a: f64, b: f64, p: &PhasePoint) -> Result<(i64, i64)> {
    let m = (p.xi / a).round();
    let n = (p.eta / b).round();
    let tol = 1e-9;
    if (p.xi / a - m).abs() > tol || (p.eta / b - n).abs() > tol {
        return invalid(format!("omitted point ({}, {}) is not a lattice point", p.xi, p.eta));
    }
    Ok((m as i64, n as i64))
}

/// Radius given as an exact small integer, when it is one.
fn integer_radius(r: f64) -> Option<u64> {
    (r.fract() == 0.0 && r <= (1u64 << 26) as f64).then_some(r as u64)
}

/// `sqrt(q) < r` for a squared modulus `q`, with boundary hits counted outside.
fn inside(q: f64, r: f64) -> bool {
    let r2 = r * r;
    q < r2 * (1.0 - BOUNDARY_GUARD)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return invalid(format!("radius must be positive and finite, got {r}"));
    }
    Ok(())
}

/// All points of `spec` with modulus strictly below `radius`, sorted by
/// `(modulus, angle)`.
pub fn generate_points(spec: &PointSetSpec, radius: f64) -> Result<Vec<PhasePoint>> {
    check_radius(radius)?;
    spec.validate()?;
    let mut pts = match spec {
        PointSetSpec::AxesTheorem1 => axes_points(radius)?,
        PointSetSpec::Lattice { a, b } => lattice_points(*a, *b, radius, None)?,
        PointSetSpec::LatticeMinusPoint { a, b, omitted } => {
            let idx = lattice_index(*a, *b, omitted)?;
            lattice_points(*a, *b, radius, Some(idx))?
        }
        PointSetSpec::Explicit { points } => points
            .iter()
            .copied()
            .filter(|p| inside(p.xi * p.xi + p.eta * p.eta, radius))
            .collect(),
    };
    pts.sort_by(PhasePoint::order);
    Ok(pts)
}

fn axes_points(radius: f64) -> Result<Vec<PhasePoint>> {
    let estimate = 2.0 * radius * radius + 2.0;
    if estimate > MAX_GENERATED_POINTS as f64 {
        return Err(Error::TooManyPoints {
            count: estimate as usize,
            cap: MAX_GENERATED_POINTS,
        });
    }
    let exact = integer_radius(radius);
    // 2n < r^2, exactly for integer radii
    let shell_inside = |n: u64| match exact {
        Some(ri) => 2 * n < ri * ri,
        None => inside(2.0 * n as f64, radius),
    };
    let mut pts = Vec::with_capacity(estimate as usize);
    if shell_inside(0) && (exact.map_or_else(|| inside(1.0, radius), |ri| ri > 1)) {
        pts.push(PhasePoint::new(1.0, 0.0));
        pts.push(PhasePoint::new(-1.0, 0.0));
    }
    let mut n = 1u64;
    while shell_inside(n) {
        let s = ((2 * n) as f64).sqrt();
        pts.push(PhasePoint::new(s, 0.0));
        pts.push(PhasePoint::new(0.0, s));
        pts.push(PhasePoint::new(-s, 0.0));
        pts.push(PhasePoint::new(0.0, -s));
        n += 1;
    }
    Ok(pts)
}

fn lattice_points(a: f64, b: f64, radius: f64, omitted: Option<(i64, i64)>) -> Result<Vec<PhasePoint>> {
    let estimate = PI * (radius / a + 1.0) * (radius / b + 1.0);
    if estimate > MAX_GENERATED_POINTS as f64 {
        return Err(Error::TooManyPoints {
            count: estimate as usize,
            cap: MAX_GENERATED_POINTS,
        });
    }
    let m_max = (radius / a).floor() as i64;
    let n_max = (radius / b).floor() as i64;
    // exact integer test when a, b and r are all integers
    let exact = match (integer_radius(a), integer_radius(b), integer_radius(radius)) {
        (Some(ai), Some(bi), Some(ri)) => Some((ai as i128, bi as i128, ri as i128)),
        _ => None,
    };
    log::info!("lattice origin dropped from the generated set (lambda^-2 is undefined there)");
    let mut pts = Vec::new();
    for m in -m_max..=m_max {
        for n in -n_max..=n_max {
            if (m, n) == (0, 0) || Some((m, n)) == omitted {
                continue;
            }
            let keep = match exact {
                Some((ai, bi, ri)) => {
                    let (mi, ni) = (m as i128, n as i128);
                    mi * mi * ai * ai + ni * ni * bi * bi < ri * ri
                }
                None => {
                    let (x, y) = (m as f64 * a, n as f64 * b);
                    inside(x * x + y * y, radius)
                }
            };
            if keep {
                pts.push(PhasePoint::new(m as f64 * a, n as f64 * b));
            }
        }
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorCount {
    pub r: f64,
    pub theta: f64,
    pub vartheta: f64,
    pub count: usize,
}

impl SectorCount {
    /// `count / (pi r^2)`.
    pub fn density(&self) -> f64 {
        self.count as f64 / (PI * self.r * self.r)
    }
}

fn check_sector(theta: f64, vartheta: f64) -> Result<()> {
    if !(theta.is_finite() && vartheta.is_finite()) {
        return invalid("sector angles must be finite");
    }
    if !(0.0 <= theta && theta < vartheta && vartheta <= TAU) {
        return invalid(format!(
            "sector needs 0 <= theta < vartheta <= 2 pi, got ({theta}, {vartheta}]"
        ));
    }
    Ok(())
}

/// `#{lambda : |lambda| < r, theta < arg(lambda) <= vartheta}`.
pub fn count_sector(spec: &PointSetSpec, r: f64, theta: f64, vartheta: f64) -> Result<SectorCount> {
    check_sector(theta, vartheta)?;
    let pts = generate_points(spec, r)?;
    let count = pts
        .iter()
        .filter(|p| {
            let a = p.angle();
            theta < a && a <= vartheta
        })
        .count();
    Ok(SectorCount {
        r,
        theta,
        vartheta,
        count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub theta: f64,
    pub vartheta: f64,
    pub r_ladder: Vec<f64>,
    pub counts: Vec<usize>,
    /// `counts[i] / (pi r_ladder[i]^2)`
    pub values: Vec<f64>,
    /// Value at the largest rung; no extrapolation model is fitted.
    pub extrapolated: f64,
}

pub fn angular_density(
    spec: &PointSetSpec,
    theta: f64,
    vartheta: f64,
    r_ladder: &[f64],
) -> Result<DensityEstimate> {
    if r_ladder.len() < 3 {
        return invalid("density ladder needs at least 3 rungs");
    }
    if r_ladder.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid("density ladder must be strictly increasing");
    }
    let counts = r_ladder
        .par_iter()
        .map(|&r| count_sector(spec, r, theta, vartheta))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = counts.iter().map(SectorCount::density).collect();
    Ok(DensityEstimate {
        theta,
        vartheta,
        r_ladder: r_ladder.to_vec(),
        counts: counts.iter().map(|c| c.count).collect(),
        extrapolated: *values.last().expect("ladder is non-empty"),
        values,
    })
}

/// `sum_{|lambda| < r} lambda^{-2}` with `lambda = xi + i eta`.
pub fn inverse_square_partial_sum(spec: &PointSetSpec, r: f64) -> Result<Complex64> {
    let pts = generate_points(spec, r)?;
    let mut acc = CompensatedComplexSum::new();
    for p in &pts {
        if p.is_origin() {
            return Err(Error::Precondition("origin in point set; lambda^-2 undefined".into()));
        }
        let sq_re = p.xi * p.xi - p.eta * p.eta;
        let sq_im = 2.0 * p.xi * p.eta;
        let denom = sq_re * sq_re + sq_im * sq_im;
        acc.add(Complex64::new(sq_re / denom, -sq_im / denom));
    }
    Ok(acc.value())
}
