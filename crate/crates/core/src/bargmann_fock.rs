//! Bargmann transform of time-domain catalog functions and truncated Fock
//! norms of entire catalog functions.
//!
//! Time functions are all of the form `t^k (rho_{x,y} g)(t)`, so their inner
//! products and transforms reduce to moments of a complex-centred Gaussian.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{gauss_kronrod_adaptive, gauss_legendre, periodic_trapezoid};
use crate::phase_space::{generate_points, PointSetSpec};
use crate::special_functions::{log_s, mittag_leffler_half_split, LogValue};

pub const MAX_TIME_MONOMIAL: u32 = 8;
pub const MAX_ENTIRE_MONOMIAL: u32 = 16;
pub const BARGMANN_MAX_MODULUS: f64 = 10.0;
pub const FOCK_MAX_RADIUS: f64 = 30.0;
/// `|base(root)|` allowed for a removable singularity.
pub const QUOTIENT_ROOT_TOLERANCE: f64 = 1e-8;
/// Inside this distance to the root, quotients are filled in by circle averages.
pub const QUOTIENT_NEAR_ROOT: f64 = 1e-3;

const FOURTH_ROOT_2: f64 = 1.189_207_115_002_721;
const CONTOUR_HALF_WIDTH: f64 = 4.0;
const RADIAL_PANEL: f64 = 0.5;
const RADIAL_NODES: usize = 16;
const RADIAL_REL_TOL: f64 = 1e-8;
const RADIAL_MAX_DEPTH: u32 = 6;
const ANGULAR_REL_TOL: f64 = 1e-10;
const ANGULAR_MAX_POINTS: usize = 1 << 20;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(2i - 1)!!` with `(-1)!! = 1`.
fn double_factorial_odd(i: u32) -> f64 {
    (1..=i).fold(1.0, |acc, j| acc * (2 * j - 1) as f64)
}

/// `int t^k exp(-2 pi (t - m)^2) dt` over the real line, for complex `m`.
pub(crate) fn gaussian_moment(k: u32, m: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=k / 2 {
        let c = binomial(k, 2 * i) * double_factorial_odd(i) / (4.0 * PI).powi(i as i32);
        acc += m.powu(k - 2 * i) * c;
    }
    acc / 2f64.sqrt()
}

/// Time-domain catalog: `t^k e^{2 pi i y t} g(t - x)` with
/// `g(t) = 2^{1/4} e^{-pi t^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunctionSpec {
    Gaussian,
    ShiftedGaussian { x: f64, y: f64 },
    /// `t^k g(t)`, not normalized.
    MonomialGaussian { k: u32 },
}

impl TimeFunctionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeFunctionSpec::ShiftedGaussian { x, y } if !(x.is_finite() && y.is_finite()) => {
                invalid("shift must be finite")
            }
            TimeFunctionSpec::MonomialGaussian { k } if k > MAX_TIME_MONOMIAL => invalid(format!(
                "monomial degree {k} above {MAX_TIME_MONOMIAL}"
            )),
            _ => Ok(()),
        }
    }

    /// `(k, x, y)` such that the function is `t^k rho_{x,y} g`.
    fn parts(&self) -> (u32, f64, f64) {
        match *self {
            TimeFunctionSpec::Gaussian => (0, 0.0, 0.0),
            TimeFunctionSpec::ShiftedGaussian { x, y } => (0, x, y),
            TimeFunctionSpec::MonomialGaussian { k } => (k, 0.0, 0.0),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let (k, x, y) = self.parts();
        let g = FOURTH_ROOT_2 * (-PI * (t - x) * (t - x)).exp();
        Complex64::from_polar(g * t.powi(k as i32), TAU * y * t)
    }

    pub fn norm(&self) -> f64 {
        let (k, _, _) = self.parts();
        (double_factorial_odd(k) / (4.0 * PI).powi(k as i32)).sqrt()
    }

    /// `<self, other> = int self(t) conj(other(t)) dt`, in closed form.
    pub fn inner(&self, other: &TimeFunctionSpec) -> Complex64 {
        let (k1, x1, y1) = self.parts();
        let (k2, x2, y2) = other.parts();
        let m = Complex64::new(x1 + x2, y1 - y2) * 0.5;
        let exponent = m * m * TAU - PI * (x1 * x1 + x2 * x2);
        gaussian_moment(k1 + k2, m) * exponent.exp() * 2f64.sqrt()
    }

    /// Largest `|t|` where the function has visible mass.
    pub fn time_extent(&self) -> f64 {
        let (k, x, _) = self.parts();
        x.abs() + 4.0 + 0.5 * (k as f64).sqrt()
    }
}

/// `(Bf)(z) = 2^{1/4} int f(t) e^{-pi t^2 + 2 pi t z - (pi/2) z^2} dt`.
///
/// The integrand is a polynomial times `exp(-2 pi t^2 + 2 pi t (x + iy + z) + ...)`;
/// the contour is moved onto the line through the saddle `(x + iy + z)/2`, where
/// the integrand no longer oscillates, and integrated over
/// `|t - saddle| <= 4` by adaptive Gauss-Kronrod.
pub fn bargmann_transform(f: &TimeFunctionSpec, z: Complex64) -> Result<Complex64> {
    f.validate()?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid(format!("non-finite argument {z}"));
    }
    if z.norm() > BARGMANN_MAX_MODULUS {
        return Err(Error::Range {
            what: "|z| for the Bargmann transform",
            value: z.norm(),
            limit: format!("<= {BARGMANN_MAX_MODULUS}"),
        });
    }
    let (k, x, y) = f.parts();
    let m = (Complex64::new(x, y) + z) * 0.5;
    let base = m * m * TAU - PI * x * x - z * z * (PI / 2.0);
    let integrand = |s: f64| (m + s).powu(k) * (base - TAU * s * s).exp();
    let scale = base.re.exp() * (1.0 + m.norm()).powi(k as i32);
    let q = gauss_kronrod_adaptive(
        integrand,
        -CONTOUR_HALF_WIDTH,
        CONTOUR_HALF_WIDTH,
        1e-15 * scale,
        1e-14,
        200,
    )?;
    Ok(q.value * 2f64.sqrt())
}

/// Entire-function catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntireFunctionSpec {
    One,
    Monomial { n: u32 },
    /// `exp(c z^2)`
    ExpQuadratic { c: Complex64 },
    SFunction,
    /// `E_{1/2}(scale z)`
    MittagLefflerHalf { scale: f64 },
    /// `base(z) / (z - root)`, with `base(root) = 0`.
    QuotientByLinear {
        base: Box<EntireFunctionSpec>,
        root: Complex64,
    },
    Product { factors: Vec<EntireFunctionSpec> },
}

impl EntireFunctionSpec {
    /// Checked constructor: the root must be a zero of `base`.
    pub fn quotient_by_linear(base: EntireFunctionSpec, root: Complex64) -> Result<Self> {
        let q = EntireFunctionSpec::QuotientByLinear {
            base: Box::new(base),
            root,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EntireFunctionSpec::One | EntireFunctionSpec::SFunction => Ok(()),
            EntireFunctionSpec::Monomial { n } => {
                if *n > MAX_ENTIRE_MONOMIAL {
                    return invalid(format!("monomial degree {n} above {MAX_ENTIRE_MONOMIAL}"));
                }
                Ok(())
            }
            EntireFunctionSpec::ExpQuadratic { c } => {
                if !(c.norm() <= PI) {
                    return invalid(format!("|c| = {} exceeds pi", c.norm()));
                }
                Ok(())
            }
            EntireFunctionSpec::MittagLefflerHalf { scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return invalid("Mittag-Leffler scale must be positive");
                }
                Ok(())
            }
            EntireFunctionSpec::QuotientByLinear { base, root } => {
                base.validate()?;
                if !(root.re.is_finite() && root.im.is_finite()) {
                    return invalid("root must be finite");
                }
                let at_root = base.log_eval(*root)?.abs();
                if !(at_root <= QUOTIENT_ROOT_TOLERANCE) {
                    return Err(Error::Precondition(format!(
                        "|base({root})| = {at_root:e} is not a zero; the quotient would not be entire"
                    )));
                }
                Ok(())
            }
            EntireFunctionSpec::Product { factors } => {
                if factors.is_empty() {
                    return invalid("empty product");
                }
                factors.iter().try_for_each(|f| f.validate())
            }
        }
    }

    /// `log F(z)`.
    pub fn log_eval(&self, z: Complex64) -> Result<LogValue> {
        Ok(match self {
            EntireFunctionSpec::One => LogValue::ONE,
            EntireFunctionSpec::Monomial { n } => LogValue::from_complex(z).powi(*n as i32),
            EntireFunctionSpec::ExpQuadratic { c } => LogValue::exp(c * z * z),
            EntireFunctionSpec::SFunction => log_s(z)?,
            EntireFunctionSpec::MittagLefflerHalf { scale } => {
                mittag_leffler_half_split(z * scale)?.log_value()
            }
            EntireFunctionSpec::QuotientByLinear { base, root } => {
                if (z - root).norm() > QUOTIENT_NEAR_ROOT {
                    base.log_eval(z)?.div(LogValue::from_complex(z - root))
                } else {
                    removable_value(base, *root, z)?
                }
            }
            EntireFunctionSpec::Product { factors } => {
                let mut acc = LogValue::ONE;
                for f in factors {
                    acc = acc.mul(f.log_eval(z)?);
                }
                acc
            }
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.log_eval(z)?.to_complex()
    }

    /// Zeros with `|a| < r`, repeated by multiplicity, when the catalog knows them.
    pub fn zeros_within(&self, r: f64) -> Result<Vec<Complex64>> {
        Ok(match self {
            EntireFunctionSpec::One | EntireFunctionSpec::ExpQuadratic { .. } => Vec::new(),
            EntireFunctionSpec::Monomial { n } => {
                if r > 0.0 {
                    vec![Complex64::new(0.0, 0.0); *n as usize]
                } else {
                    Vec::new()
                }
            }
            EntireFunctionSpec::SFunction => generate_points(&PointSetSpec::AxesTheorem1, r)?
                .into_iter()
                .map(|p| p.to_complex())
                .collect(),
            EntireFunctionSpec::MittagLefflerHalf { .. } => {
                return Err(Error::Precondition(
                    "zeros of E_1/2 are not available in closed form".into(),
                ))
            }
            EntireFunctionSpec::QuotientByLinear { base, root } => {
                let mut zs = base.zeros_within(r)?;
                if let Some(i) = zs
                    .iter()
                    .position(|a| (a - root).norm() <= QUOTIENT_ROOT_TOLERANCE)
                {
                    zs.remove(i);
                }
                zs
            }
            EntireFunctionSpec::Product { factors } => {
                let mut zs = Vec::new();
                for f in factors {
                    zs.extend(f.zeros_within(r)?);
                }
                zs
            }
        })
    }
}

/// `base(z)/(z - root)` near the root, from four-point circle averages of the
/// quotient at radii `rho` and `2 rho`, combined by Richardson extrapolation.
fn removable_value(base: &EntireFunctionSpec, root: Complex64, z: Complex64) -> Result<LogValue> {
    let rho = 4.0 * QUOTIENT_NEAR_ROOT;
    let mut logs = Vec::with_capacity(8);
    for radius in [rho, 2.0 * rho] {
        for k in 0..4 {
            let w = z + Complex64::from_polar(radius, k as f64 * PI / 2.0);
            logs.push(base.log_eval(w)?.div(LogValue::from_complex(w - root)));
        }
    }
    let reference = logs.iter().map(|l| l.ln_abs).fold(f64::NEG_INFINITY, f64::max);
    if reference == f64::NEG_INFINITY {
        return Ok(LogValue::ZERO);
    }
    let scaled: Vec<Complex64> = logs
        .iter()
        .map(|l| {
            LogValue {
                ln_abs: l.ln_abs - reference,
                arg: l.arg,
            }
            .to_complex()
        })
        .collect::<Result<_>>()?;
    let inner: Complex64 = scaled[..4].iter().sum::<Complex64>() / 4.0;
    let outer: Complex64 = scaled[4..].iter().sum::<Complex64>() / 4.0;
    let v = LogValue::from_complex((inner * 16.0 - outer) / 15.0);
    Ok(LogValue {
        ln_abs: v.ln_abs + reference,
        arg: v.arg,
    })
}

fn check_radius(r: f64, what: &'static str) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("{what} must be positive, got {r}"));
    }
    if r > FOCK_MAX_RADIUS {
        return Err(Error::Range {
            what,
            value: r,
            limit: format!("<= {FOCK_MAX_RADIUS}"),
        });
    }
    Ok(())
}

struct PolarQuadrature<'a> {
    f: &'a EntireFunctionSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> PolarQuadrature<'a> {
    fn new(f: &'a EntireFunctionSpec) -> Self {
        let (nodes, weights) = gauss_legendre(RADIAL_NODES);
        PolarQuadrature { f, nodes, weights }
    }

    /// `r int_0^{2 pi} |F(r e^{i theta})|^2 e^{-pi r^2} d theta`
    fn ring(&self, r: f64) -> Result<f64> {
        let min_points = (32.0 * r).max(64.0) as usize;
        let failure = std::cell::RefCell::new(None);
        let q = periodic_trapezoid(
            |theta| match self.f.log_eval(Complex64::from_polar(r, theta)) {
                Ok(l) => (2.0 * l.ln_abs - PI * r * r).exp(),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            min_points.next_power_of_two(),
            ANGULAR_MAX_POINTS,
            ANGULAR_REL_TOL,
            0.0,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(q?.value * r)
    }

    fn gauss(&self, a: f64, b: f64) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let rings = self
            .nodes
            .par_iter()
            .map(|x| self.ring(mid + half * x))
            .collect::<Result<Vec<_>>>()?;
        Ok(half * rings.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>())
    }

    fn panel(&self, a: f64, b: f64, whole: f64, depth: u32) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left = self.gauss(a, mid)?;
        let right = self.gauss(mid, b)?;
        let split = left + right;
        if (split - whole).abs() <= RADIAL_REL_TOL * split || split == 0.0 {
            return Ok(split);
        }
        if depth >= RADIAL_MAX_DEPTH {
            return Err(Error::Quadrature(format!(
                "radial panel [{a}, {b}] not resolved: {whole:e} vs {split:e}"
            )));
        }
        Ok(self.panel(a, mid, left, depth + 1)? + self.panel(mid, b, right, depth + 1)?)
    }

    /// Integral over the annulus `a <= |z| < b`, cut at multiples of the panel width.
    fn annulus(&self, a: f64, b: f64) -> Result<f64> {
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let next = ((lo / RADIAL_PANEL).floor() + 1.0) * RADIAL_PANEL;
            let hi = next.min(b);
            total += self.panel(lo, hi, self.gauss(lo, hi)?, 0)?;
            lo = hi;
        }
        Ok(total)
    }
}

/// `int_{|z| < R} |F(z)|^2 e^{-pi |z|^2} dm(z)`.
pub fn fock_norm_truncated(f: &EntireFunctionSpec, r: f64) -> Result<f64> {
    f.validate()?;
    check_radius(r, "Fock truncation radius")?;
    PolarQuadrature::new(f).annulus(0.0, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

/// Last relative increment below which a ladder counts as converged.
pub const CONVERGED_RELATIVE_INCREMENT: f64 = 1e-3;
/// Decay exponent of per-unit-radius increments at or above which the tail is summable.
pub const CONVERGING_DECAY: f64 = 1.5;
/// Decay exponent at or below which the increments are not decaying.
pub const DIVERGING_DECAY: f64 = 0.5;

/// Truncated squared Fock norms along a radius ladder.
///
/// The verdict is a heuristic. With `d_i` the increment per unit radius on
/// the i-th annulus and `p` the log-log decay rate of `d_i` against the annulus
/// mid-radius, fitted on the last three annuli:
///
/// * `Converging` if the last relative increment is below 1e-3, or `p >= 1.5`;
/// * `Diverging` if `p <= 0.5`;
/// * `Inconclusive` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockNormLadder {
    pub r_ladder: Vec<f64>,
    pub values: Vec<f64>,
    /// `values[i] - values[i - 1]`; the first entry is `values[0]`.
    pub increments: Vec<f64>,
    pub last_relative_increment: f64,
    pub decay_exponent: Option<f64>,
    pub verdict: Verdict,
    pub heuristic: bool,
}

fn decay_exponent(r: &[f64], values: &[f64]) -> Option<f64> {
    let mut pts = Vec::new();
    for i in 1..r.len() {
        let d = (values[i] - values[i - 1]) / (r[i] - r[i - 1]);
        if d <= 0.0 {
            return None;
        }
        pts.push(((0.5 * (r[i] + r[i - 1])).ln(), d.ln()));
    }
    let pts = &pts[pts.len().saturating_sub(3)..];
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

pub fn fock_membership_probe(f: &EntireFunctionSpec, r_ladder: &[f64]) -> Result<FockNormLadder> {
    f.validate()?;
    if r_ladder.len() < 4 {
        return invalid("membership probe needs at least 4 rungs");
    }
    if r_ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("radius ladder must be strictly increasing");
    }
    for &r in r_ladder {
        check_radius(r, "probe radius")?;
    }
    let quad = PolarQuadrature::new(f);
    let mut values = Vec::with_capacity(r_ladder.len());
    let mut increments = Vec::with_capacity(r_ladder.len());
    let mut lo = 0.0;
    let mut acc = 0.0;
    for &r in r_ladder {
        let inc = quad.annulus(lo, r)?;
        acc += inc;
        increments.push(inc);
        values.push(acc);
        lo = r;
    }
    let last = *values.last().unwrap_or(&0.0);
    let last_relative_increment = if last > 0.0 {
        increments[increments.len() - 1] / last
    } else {
        0.0
    };
    let p = decay_exponent(r_ladder, &values);
    let verdict = if last_relative_increment < CONVERGED_RELATIVE_INCREMENT {
        Verdict::Converging
    } else {
        match p {
            Some(p) if p >= CONVERGING_DECAY => Verdict::Converging,
            Some(p) if p <= DIVERGING_DECAY => Verdict::Diverging,
            _ => Verdict::Inconclusive,
        }
    };
    Ok(FockNormLadder {
        r_ladder: r_ladder.to_vec(),
        values,
        increments,
        last_relative_increment,
        decay_exponent: p,
        verdict,
        heuristic: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheckSample {
    pub r: f64,
    pub theta: f64,
    /// `log|F(z)| - (pi/2)|z|^2`
    pub log_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheckReport {
    pub r_list: Vec<f64>,
    /// Per rung, the maximum of `|F(z)| e^{-(pi/2)|z|^2}` over the circle.
    pub rung_max: Vec<f64>,
    pub rung_log_max: Vec<f64>,
    pub samples: Vec<GrowthCheckSample>,
}

pub fn fock_growth_check(
    f: &EntireFunctionSpec,
    r_list: &[f64],
    theta_count: usize,
) -> Result<GrowthCheckReport> {
    f.validate()?;
    if r_list.is_empty() || theta_count == 0 {
        return invalid("empty growth-check grid");
    }
    for &r in r_list {
        check_radius(r, "growth-check radius")?;
    }
    let grid: Vec<(f64, f64)> = r_list
        .iter()
        .flat_map(|&r| (0..theta_count).map(move |k| (r, TAU * k as f64 / theta_count as f64)))
        .collect();
    let samples = grid
        .par_iter()
        .map(|&(r, theta)| {
            let l = f.log_eval(Complex64::from_polar(r, theta))?;
            Ok(GrowthCheckSample {
                r,
                theta,
                log_weighted: l.ln_abs - 0.5 * PI * r * r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rung_log_max: Vec<f64> = samples
        .chunks(theta_count)
        .map(|c| c.iter().map(|s| s.log_weighted).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(GrowthCheckReport {
        r_list: r_list.to_vec(),
        rung_max: rung_log_max.iter().map(|l| l.exp()).collect(),
        rung_log_max,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::eval_s;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn s_over_z_minus_1() -> EntireFunctionSpec {
        EntireFunctionSpec::quotient_by_linear(EntireFunctionSpec::SFunction, c(1.0, 0.0)).unwrap()
    }

    /// Closed form of the transform by completing the square.
    fn bargmann_closed_form(f: &TimeFunctionSpec, z: Complex64) -> Complex64 {
        let (k, x, y) = f.parts();
        let m = (c(x, y) + z) * 0.5;
        let e = m * m * TAU - PI * x * x - z * z * FRAC_PI_2;
        gaussian_moment(k, m) * e.exp() * 2f64.sqrt()
    }

    fn real_line(f: impl Fn(f64) -> Complex64, t: f64) -> Complex64 {
        gauss_kronrod_adaptive(f, -t, t, 1e-15, 1e-13, 2000).unwrap().value
    }

    #[test]
    fn time_norms_and_inner_products_match_quadrature() {
        let catalog = [
            TimeFunctionSpec::Gaussian,
            TimeFunctionSpec::ShiftedGaussian { x: 0.7, y: -1.2 },
            TimeFunctionSpec::ShiftedGaussian { x: -1.5, y: 0.4 },
            TimeFunctionSpec::MonomialGaussian { k: 1 },
            TimeFunctionSpec::MonomialGaussian { k: 4 },
            TimeFunctionSpec::MonomialGaussian { k: 7 },
        ];
        for a in &catalog {
            let n2 = real_line(|t| c(a.eval(t).norm_sqr(), 0.0), 8.0).re;
            assert!((n2.sqrt() - a.norm()).abs() < 1e-12 * a.norm(), "{a:?}");
            for b in &catalog {
                let q = real_line(|t| a.eval(t) * b.eval(t).conj(), 8.0);
                assert!((q - a.inner(b)).norm() < 1e-12, "{a:?} {b:?}");
            }
        }
        let g = TimeFunctionSpec::Gaussian;
        assert!((g.norm() - 1.0).abs() < 1e-15);
        let tg = TimeFunctionSpec::MonomialGaussian { k: 1 };
        assert!((tg.norm() - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn transform_of_gaussian_is_one() {
        for &z in &[c(0.0, 0.0), c(3.0, -4.0), c(-7.0, 7.0), c(0.0, 10.0)] {
            let b = bargmann_transform(&TimeFunctionSpec::Gaussian, z).unwrap();
            assert!((b - 1.0).norm() < 1e-12, "z = {z}: {b}");
        }
    }

    #[test]
    fn transform_of_t_gaussian_is_half_z() {
        let f = TimeFunctionSpec::MonomialGaussian { k: 1 };
        for &z in &[c(0.0, 0.0), c(1.0, 2.0), c(-4.0, 3.0), c(6.0, -6.0)] {
            let b = bargmann_transform(&f, z).unwrap();
            assert!((b - z / 2.0).norm() < 1e-12, "z = {z}: {b}");
        }
    }

    #[test]
    fn transform_matches_completed_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let f = match rng.gen_range(0..3) {
                0 => TimeFunctionSpec::Gaussian,
                1 => TimeFunctionSpec::ShiftedGaussian {
                    x: rng.gen_range(-2.0..2.0),
                    y: rng.gen_range(-2.0..2.0),
                },
                _ => TimeFunctionSpec::MonomialGaussian { k: rng.gen_range(0..=8) },
            };
            let z = Complex64::from_polar(rng.gen_range(0.0..10.0), rng.gen_range(0.0..TAU));
            let a = bargmann_transform(&f, z).unwrap();
            let b = bargmann_closed_form(&f, z);
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "{f:?} at {z}");
        }
    }

    #[test]
    fn transform_matches_real_line_integral() {
        let f = TimeFunctionSpec::ShiftedGaussian { x: 0.5, y: -0.3 };
        for &z in &[c(0.4, 0.2), c(-1.0, 1.5), c(2.0, 0.0)] {
            let direct = real_line(
                |t| {
                    let k = c(-PI * t * t, 0.0) + z * (TAU * t) - z * z * FRAC_PI_2;
                    f.eval(t) * k.exp() * FOURTH_ROOT_2
                },
                10.0,
            );
            let b = bargmann_transform(&f, z).unwrap();
            assert!((direct - b).norm() < 1e-9, "z = {z}");
        }
    }

    #[test]
    fn transform_range_is_enforced() {
        assert!(matches!(
            bargmann_transform(&TimeFunctionSpec::Gaussian, c(8.0, 8.0)),
            Err(Error::Range { .. })
        ));
        assert!(bargmann_transform(&TimeFunctionSpec::MonomialGaussian { k: 9 }, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn transform_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = TimeFunctionSpec::ShiftedGaussian { x: 1.0, y: 0.5 };
        let h = TimeFunctionSpec::MonomialGaussian { k: 2 };
        for _ in 0..50 {
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let z = Complex64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..TAU));
            // transform of a f + b h by direct integration of the combination
            let combo = real_line(
                |t| {
                    let k = c(-PI * t * t, 0.0) + z * (TAU * t) - z * z * FRAC_PI_2;
                    (f.eval(t) * a + h.eval(t) * b) * k.exp() * FOURTH_ROOT_2
                },
                8.0,
            );
            let parts = bargmann_transform(&f, z).unwrap() * a + bargmann_transform(&h, z).unwrap() * b;
            assert!((combo - parts).norm() <= 1e-9 * parts.norm().max(1.0), "z = {z}");
        }
    }

    /// Transforms on a polar grid over |z| < r, with the matching
    /// quadrature weights including `e^{-pi |z|^2}`.
    fn fock_grid(fs: &[TimeFunctionSpec], r: f64) -> (Vec<f64>, Vec<Vec<Complex64>>) {
        let (nodes, weights) = gauss_legendre(16);
        let angles = 256;
        let mut w = Vec::new();
        let mut zs = Vec::new();
        for p in 0..(r / 0.5) as usize {
            let (a, b) = (p as f64 * 0.5, (p + 1) as f64 * 0.5);
            for (x, gw) in nodes.iter().zip(&weights) {
                let rr = 0.5 * (a + b) + 0.5 * (b - a) * x;
                for k in 0..angles {
                    zs.push(Complex64::from_polar(rr, TAU * k as f64 / angles as f64));
                    w.push((-PI * rr * rr).exp() * (TAU / angles as f64) * rr * gw * 0.5 * (b - a));
                }
            }
        }
        let values = fs
            .iter()
            .map(|f| zs.iter().map(|&z| bargmann_transform(f, z).unwrap()).collect())
            .collect();
        (w, values)
    }

    #[test]
    fn bargmann_transform_is_an_isometry() {
        let catalog = [
            TimeFunctionSpec::Gaussian,
            TimeFunctionSpec::ShiftedGaussian { x: 1.0, y: -0.5 },
            TimeFunctionSpec::MonomialGaussian { k: 1 },
            TimeFunctionSpec::MonomialGaussian { k: 3 },
        ];
        let (w, values) = fock_grid(&catalog, 8.0);
        for i in 0..catalog.len() {
            for j in i..catalog.len() {
                let lhs = catalog[i].inner(&catalog[j]);
                let rhs: Complex64 = (0..w.len()).map(|n| values[i][n] * values[j][n].conj() * w[n]).sum();
                assert!((lhs - rhs).norm() < 1e-5, "{:?} {:?}: {lhs} vs {rhs}", catalog[i], catalog[j]);
            }
        }
    }

    #[test]
    fn shifted_gaussian_peaks_at_conjugate_point() {
        for &(x, y) in &[(1.0, 0.5), (-2.0, 1.5), (0.0, -2.5)] {
            let f = TimeFunctionSpec::ShiftedGaussian { x, y };
            let peak = c(x, -y);
            let weighted = |z: Complex64| bargmann_transform(&f, z).unwrap().norm() * (-FRAC_PI_2 * z.norm_sqr()).exp();
            let at_peak = weighted(peak);
            let mut best = 0.0f64;
            for i in -40..=40 {
                for j in -40..=40 {
                    let z = c(i as f64 * 0.1, j as f64 * 0.1);
                    best = best.max(weighted(z));
                }
            }
            assert!((best - at_peak).abs() <= 1e-12 * at_peak, "({x}, {y}): {best} vs {at_peak}");
        }
    }

    #[test]
    fn catalog_values() {
        let one = EntireFunctionSpec::One;
        assert_eq!(one.eval(c(3.0, 4.0)).unwrap(), c(1.0, 0.0));
        let m = EntireFunctionSpec::Monomial { n: 3 };
        assert!((m.eval(c(1.0, 1.0)).unwrap() - c(-2.0, 2.0)).norm() < 1e-14);
        let e = EntireFunctionSpec::ExpQuadratic { c: c(0.0, 1.0) };
        assert!((e.eval(c(1.0, 1.0)).unwrap() - c(-2.0, 0.0).exp()).norm() < 1e-14);
        let p = EntireFunctionSpec::Product {
            factors: vec![EntireFunctionSpec::SFunction, EntireFunctionSpec::Monomial { n: 2 }],
        };
        let z = c(0.3, 0.7);
        assert!((p.eval(z).unwrap() - eval_s(z).unwrap() * z * z).norm() < 1e-13);
    }

    #[test]
    fn quotient_requires_a_root() {
        assert!(EntireFunctionSpec::quotient_by_linear(EntireFunctionSpec::SFunction, c(1.5, 0.0)).is_err());
        assert!(EntireFunctionSpec::quotient_by_linear(EntireFunctionSpec::SFunction, c(0.0, 2.0)).is_ok());
        assert!(EntireFunctionSpec::quotient_by_linear(EntireFunctionSpec::One, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn quotient_is_continuous_through_the_root() {
        let q = s_over_z_minus_1();
        // s'(1) = 2 sin(pi/2) = 2
        assert!((q.eval(c(1.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-10);
        for &d in &[c(5e-4, 0.0), c(0.0, 9e-4), c(-3e-4, 2e-4)] {
            let z = c(1.0, 0.0) + d;
            let inside = q.eval(z).unwrap();
            let direct = eval_s(z).unwrap() / d;
            assert!((inside - direct).norm() < 1e-9, "offset {d}");
        }
    }

    #[test]
    fn zero_lists() {
        assert_eq!(EntireFunctionSpec::SFunction.zeros_within(1.5).unwrap().len(), 6);
        assert_eq!(s_over_z_minus_1().zeros_within(1.5).unwrap().len(), 5);
        let p = EntireFunctionSpec::Product {
            factors: vec![EntireFunctionSpec::SFunction, EntireFunctionSpec::Monomial { n: 2 }],
        };
        assert_eq!(p.zeros_within(1.5).unwrap().len(), 8);
        assert!(EntireFunctionSpec::MittagLefflerHalf { scale: 1.0 }.zeros_within(2.0).is_err());
    }

    #[test]
    fn fock_norm_of_one() {
        for &r in &[0.5, 1.0, 2.3] {
            let v = fock_norm_truncated(&EntireFunctionSpec::One, r).unwrap();
            let want = 1.0 - (-PI * r * r).exp();
            assert!((v - want).abs() < 1e-10 * want, "R = {r}");
        }
    }

    #[test]
    fn fock_norm_of_z_tends_to_one_over_pi() {
        let m = EntireFunctionSpec::Monomial { n: 1 };
        let v = fock_norm_truncated(&m, 6.0).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn fock_norm_of_monomials() {
        // ||z^n||^2 = n! / pi^n
        let v = fock_norm_truncated(&EntireFunctionSpec::Monomial { n: 5 }, 8.0).unwrap();
        assert!((v - 120.0 / PI.powi(5)).abs() < 1e-8);
    }

    #[test]
    fn probe_verdicts() {
        let one = fock_membership_probe(&EntireFunctionSpec::One, &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert_eq!(one.verdict, Verdict::Converging);
        let s = fock_membership_probe(&EntireFunctionSpec::SFunction, &[4.0, 6.0, 8.0, 10.0]).unwrap();
        assert_eq!(s.verdict, Verdict::Diverging, "{s:?}");
        // independent tensor-grid values of the truncated norm of s
        for (v, want) in s.values.iter().zip([5.0936, 6.5128, 7.9288, 9.3439]) {
            assert!((v - want).abs() < 1e-3, "{v} vs {want}");
        }
        let q = fock_membership_probe(&s_over_z_minus_1(), &[4.0, 6.0, 8.0, 10.0]).unwrap();
        assert_eq!(q.verdict, Verdict::Converging, "{q:?}");
        for (v, want) in q.values.iter().zip([3.83331, 3.89493, 3.92505, 3.94296]) {
            assert!((v - want).abs() < 1e-4, "{v} vs {want}");
        }
    }

    #[test]
    fn probe_rejects_short_or_unordered_ladders() {
        let one = EntireFunctionSpec::One;
        assert!(fock_membership_probe(&one, &[1.0, 2.0, 3.0]).is_err());
        assert!(fock_membership_probe(&one, &[1.0, 3.0, 2.0, 4.0]).is_err());
        assert!(fock_membership_probe(&one, &[1.0, 2.0, 3.0, 31.0]).is_err());
    }

    #[test]
    fn growth_check_examples() {
        let one = fock_growth_check(&EntireFunctionSpec::One, &[5.0, 10.0, 20.0], 128).unwrap();
        for (m, r) in one.rung_max.iter().zip([5.0f64, 10.0, 20.0]) {
            assert!((m / (-FRAC_PI_2 * r * r).exp() - 1.0).abs() < 1e-12);
        }
        let q = fock_growth_check(&s_over_z_minus_1(), &[5.0, 10.0, 20.0], 256).unwrap();
        assert!(q.rung_max.windows(2).all(|w| w[1] <= w[0]), "{:?}", q.rung_max);
        let boundary = EntireFunctionSpec::ExpQuadratic { c: c(0.0, FRAC_PI_2) };
        let b = fock_growth_check(&boundary, &[5.0, 10.0, 20.0], 256).unwrap();
        for m in &b.rung_max {
            assert!((m - 1.0).abs() < 1e-9, "{m}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn truncated_norms_are_monotone(r1 in 0.2f64..5.0, dr in 0.01f64..3.0, which in 0usize..3) {
            let f = [
                EntireFunctionSpec::SFunction,
                EntireFunctionSpec::MittagLefflerHalf { scale: 0.8 },
                EntireFunctionSpec::ExpQuadratic { c: Complex64::new(0.3, 0.4) },
            ][which].clone();
            let a = fock_norm_truncated(&f, r1).unwrap();
            let b = fock_norm_truncated(&f, r1 + dr).unwrap();
            prop_assert!(a <= b);
        }
    }
}
