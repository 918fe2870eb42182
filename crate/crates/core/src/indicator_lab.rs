//! Order-2 indicator functions `h(theta) = limsup r^{-2} log|F(r e^{i theta})|`
//! and the density machinery built on them: the Levin integral, Jensen's
//! formula, trigonometric convexity and the envelope `H(theta; theta_1..theta_n)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bargmann_fock::EntireFunctionSpec;
use crate::error::{invalid, Error, Result};
use crate::numeric::{gauss_legendre, periodic_trapezoid};
use crate::special_functions::{wrap_angle, DEFAULT_EXCLUSION_EPSILON};

pub const MIN_THETA_COUNT: usize = 64;
/// `|F(0)|` at or below which Jensen's formula is refused.
pub const JENSEN_ORIGIN_FLOOR: f64 = 1e-8;
/// Zeros closer than this to the Jensen circle are refused.
pub const JENSEN_BOUNDARY_GAP: f64 = 1e-6;
/// Slack on `2 pi` in the level inequality.
pub const LEVEL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorProfile {
    pub thetas: Vec<f64>,
    pub h_values: Vec<f64>,
    pub r_ladder: Vec<f64>,
    /// Spread `max - min` of `r^{-2} log|F|` over the rungs used at each angle.
    pub fit_residuals: Vec<f64>,
}

impl IndicatorProfile {
    /// A profile on the uniform grid from given values (for tests and CLI input).
    pub fn from_values(h_values: Vec<f64>) -> Result<Self> {
        let n = h_values.len();
        if n < MIN_THETA_COUNT {
            return invalid(format!("profile needs at least {MIN_THETA_COUNT} angles, got {n}"));
        }
        Ok(IndicatorProfile {
            thetas: (0..n).map(|k| TAU * k as f64 / n as f64).collect(),
            fit_residuals: vec![0.0; n],
            r_ladder: Vec::new(),
            h_values,
        })
    }
}

fn excluded(zeros: &[Complex64], z: Complex64, radius: f64) -> bool {
    zeros.iter().any(|a| (z - a).norm() <= radius)
}

/// `h(theta_k)` as the largest `r^{-2} log|F(r e^{i theta_k})|` over the upper
/// half of the ladder. A rung whose point falls inside a zero-exclusion disk
/// of radius `0.3 r^{-1/2}` is retried half a grid step to either side and
/// dropped if both retries are excluded too.
pub fn estimate_indicator(f: &EntireFunctionSpec, theta_count: usize, r_ladder: &[f64]) -> Result<IndicatorProfile> {
    f.validate()?;
    if theta_count < MIN_THETA_COUNT {
        return invalid(format!("theta_count must be at least {MIN_THETA_COUNT}"));
    }
    if r_ladder.len() < 2 {
        return invalid("indicator ladder needs at least 2 rungs");
    }
    if r_ladder[0] <= 0.0 || r_ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("indicator ladder must be positive and strictly increasing");
    }
    let top = &r_ladder[r_ladder.len() / 2..];
    let r_max = top[top.len() - 1];
    let zeros = match f.zeros_within(r_max + 1.0) {
        Ok(z) => z,
        Err(Error::Precondition(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let step = TAU / theta_count as f64;
    let rows = (0..theta_count)
        .into_par_iter()
        .map(|k| {
            let theta = step * k as f64;
            let mut samples = Vec::with_capacity(top.len());
            for &r in top {
                let radius = DEFAULT_EXCLUSION_EPSILON / r.sqrt();
                let angle = [theta, theta + 0.5 * step, theta - 0.5 * step]
                    .into_iter()
                    .find(|&a| !excluded(&zeros, Complex64::from_polar(r, a), radius));
                if let Some(a) = angle {
                    let l = f.log_eval(Complex64::from_polar(r, a))?;
                    samples.push(l.ln_abs / (r * r));
                }
            }
            if samples.is_empty() {
                return Err(Error::AllRungsExcluded { theta });
            }
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((theta, hi, hi - lo))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndicatorProfile {
        thetas: rows.iter().map(|r| r.0).collect(),
        h_values: rows.iter().map(|r| r.1).collect(),
        fit_residuals: rows.iter().map(|r| r.2).collect(),
        r_ladder: r_ladder.to_vec(),
    })
}

/// `(1/pi^2) int_0^{2 pi} h(theta) d theta` by the periodic trapezoid rule.
pub fn levin_density(profile: &IndicatorProfile) -> f64 {
    let n = profile.h_values.len();
    if n == 0 {
        return 0.0;
    }
    profile.h_values.iter().sum::<f64>() * (TAU / n as f64) / (PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JensenResult {
    pub r: f64,
    /// `sum ln(r/|a|)` over zeros `|a| < r`
    pub lhs: f64,
    /// mean of `log|F|` over `|z| = r`, minus `log|F(0)|`
    pub rhs: f64,
    pub zero_count: usize,
}

pub fn jensen_check(f: &EntireFunctionSpec, r: f64) -> Result<JensenResult> {
    f.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return invalid("Jensen radius must be positive");
    }
    let f0 = f.log_eval(Complex64::new(0.0, 0.0))?;
    if !(f0.abs() > JENSEN_ORIGIN_FLOOR) {
        return Err(Error::Precondition(format!("|F(0)| = {:e} is too close to zero", f0.abs())));
    }
    let zeros = f.zeros_within(r + JENSEN_BOUNDARY_GAP)?;
    if let Some(a) = zeros.iter().find(|a| (a.norm() - r).abs() < JENSEN_BOUNDARY_GAP) {
        return Err(Error::Precondition(format!(
            "zero {a} lies within {JENSEN_BOUNDARY_GAP:e} of |z| = {r}; choose another radius"
        )));
    }
    let inside: Vec<f64> = zeros.iter().map(|a| a.norm()).filter(|m| *m < r).collect();
    let lhs = inside.iter().map(|m| (r / m).ln()).sum();
    let failure = std::cell::RefCell::new(None);
    let mean = periodic_trapezoid(
        |theta| match f.log_eval(Complex64::from_polar(r, theta)) {
            Ok(l) => l.ln_abs,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        256,
        1 << 20,
        1e-13,
        1e-13,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(JensenResult {
        r,
        lhs,
        rhs: mean?.value / TAU - f0.ln_abs,
        zero_count: inside.len(),
    })
}

/// Directions `0 <= theta_1 < ... < theta_n < 2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    angles: Vec<f64>,
}

impl DirectionSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return invalid("direction set is empty");
        }
        if angles.iter().any(|a| !(0.0..TAU).contains(a)) {
            return invalid("directions must lie in [0, 2 pi)");
        }
        if angles.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("directions must be strictly increasing");
        }
        Ok(DirectionSet { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Gaps `theta_{j+1} - theta_j`, the last one wrapping around.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.angles.len();
        (0..n)
            .map(|j| {
                if j + 1 < n {
                    self.angles[j + 1] - self.angles[j]
                } else {
                    self.angles[0] + TAU - self.angles[j]
                }
            })
            .collect()
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps().into_iter().fold(0.0, f64::max)
    }

    /// A random set whose gaps are all at most `pi/2`.
    pub fn random_admissible<R: Rng>(rng: &mut R) -> Self {
        loop {
            let n = rng.gen_range(4..=12);
            let mut a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
            a.sort_by(f64::total_cmp);
            if let Ok(d) = DirectionSet::new(a) {
                if d.max_gap() <= FRAC_PI_2 {
                    return d;
                }
            }
        }
    }
}

/// `H(theta) = (pi/2) cos 2(theta - theta_j)` with `theta_j` the nearest
/// direction, i.e. sector boundaries at the midpoints between directions.
pub fn h_envelope(dirs: &DirectionSet, theta: f64) -> f64 {
    let d = dirs
        .angles
        .iter()
        .map(|a| wrap_angle(theta - a).abs())
        .fold(f64::INFINITY, f64::min);
    FRAC_PI_2 * (2.0 * d).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub integral: f64,
    pub passes: bool,
}

/// `int_0^{2 pi} H d theta` by Gauss-Legendre on each half-sector, where `H` is smooth.
pub fn envelope_integral(dirs: &DirectionSet) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let mut total = 0.0;
    for (j, gap) in dirs.gaps().into_iter().enumerate() {
        let start = dirs.angles[j];
        for (a, b) in [(start, start + 0.5 * gap), (start + 0.5 * gap, start + gap)] {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            total += half
                * nodes
                    .iter()
                    .zip(&weights)
                    .map(|(x, w)| w * h_envelope(dirs, (mid + half * x).rem_euclid(TAU)))
                    .sum::<f64>();
        }
    }
    total
}

pub fn level_inequality_check(dirs: &DirectionSet) -> Result<LevelCheck> {
    let g = dirs.max_gap();
    if g > FRAC_PI_2 {
        return Err(Error::Precondition(format!("largest gap {g} exceeds pi/2")));
    }
    let integral = envelope_integral(dirs);
    Ok(LevelCheck {
        integral,
        passes: integral >= TAU - LEVEL_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    /// Grid indices of the detected local maxima.
    pub maxima: Vec<usize>,
    /// Smallest `h(theta) - h(theta_0) cos 2(theta - theta_0)` over `|theta - theta_0| <= pi/4`.
    pub min_margin: f64,
}

/// Local maxima of the 3-tap circular moving average; a plateau counts once,
/// at its leftmost index.
fn local_maxima(h: &[f64]) -> Vec<usize> {
    let n = h.len();
    let s: Vec<f64> = (0..n).map(|i| (h[(i + n - 1) % n] + h[i] + h[(i + 1) % n]) / 3.0).collect();
    let mut out = Vec::new();
    for i in 0..n {
        if !(s[i] > s[(i + n - 1) % n]) {
            continue;
        }
        let next = (1..n).map(|d| s[(i + d) % n]).find(|v| *v != s[i]);
        if matches!(next, Some(v) if v < s[i]) {
            out.push(i);
        }
    }
    out
}

pub fn convexity_floor_check(profile: &IndicatorProfile) -> ConvexityReport {
    let h = &profile.h_values;
    let maxima = local_maxima(h);
    let mut min_margin = f64::INFINITY;
    for &i in &maxima {
        let t0 = profile.thetas[i];
        for (t, v) in profile.thetas.iter().zip(h) {
            let d = wrap_angle(t - t0);
            if d.abs() <= FRAC_PI_4 + 1e-12 {
                min_margin = min_margin.min(v - h[i] * (2.0 * d).cos());
            }
        }
    }
    ConvexityReport {
        maxima,
        min_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
    }
}
