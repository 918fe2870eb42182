//! The entire functions behind the axes example:
//!
//! * `s(z) = (z^2 - 1) z^{-2} sin(pi z^2 / 2)`, whose zero set is the axes
//!   point set, evaluated in log-magnitude/phase form so that radii where
//!   `|s|` overflows remain usable;
//! * the Mittag-Leffler function `E_{1/2}(z) = sum z^k / Gamma(1 + k/2)`;
//! * a polar scan of `|s|` against the model growth `exp((pi/2) r^2 |sin 2 theta|)`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{ComplexDd, Dd};

/// Largest `ln|value|` that is turned back into an ordinary complex number.
pub const MATERIALIZE_LIMIT: f64 = 700.0;

/// `|z|` beyond which `s` is not evaluated at all.
pub const S_MAX_MODULUS: f64 = 1.0e4;

/// `|z|` at and below which `E_{1/2}` uses the double-double power series.
pub const MLF_SWITCH_RADIUS: f64 = 6.0;

/// `|z|` beyond which `E_{1/2}` is not evaluated.
pub const MLF_MAX_MODULUS: f64 = 1.0e3;

/// Default radius factor of the zero-exclusion disks, `eps * r^{-1/2}`.
pub const DEFAULT_EXCLUSION_EPSILON: f64 = 0.3;

// 2/sqrt(pi) as a double-double
const TWO_OVER_SQRT_PI: Dd = Dd::new(1.128_379_167_095_512_6, 1.533_545_961_316_588e-17);

/// A complex number stored as `exp(ln_abs + i arg)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub const ONE: LogValue = LogValue { ln_abs: 0.0, arg: 0.0 };

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        LogValue {
            ln_abs: z.norm().ln(),
            arg: z.arg(),
        }
    }

    /// `exp(w)` for a complex exponent `w`.
    pub fn exp(w: Complex64) -> Self {
        LogValue { ln_abs: w.re, arg: w.im }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogValue) -> LogValue {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogValue {
            ln_abs: self.ln_abs + other.ln_abs,
            arg: wrap_angle(self.arg + other.arg),
        }
    }

    pub fn div(self, other: LogValue) -> LogValue {
        LogValue {
            ln_abs: self.ln_abs - other.ln_abs,
            arg: wrap_angle(self.arg - other.arg),
        }
    }

    pub fn powi(self, n: i32) -> LogValue {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        LogValue {
            ln_abs: self.ln_abs * n as f64,
            arg: wrap_angle(self.arg * n as f64),
        }
    }

    pub fn abs(&self) -> f64 {
        self.ln_abs.exp()
    }

    /// The plain complex value, or a range error when it would overflow.
    pub fn to_complex(&self) -> Result<Complex64> {
        if self.ln_abs > MATERIALIZE_LIMIT {
            return Err(Error::Range {
                what: "ln|value|",
                value: self.ln_abs,
                limit: format!("<= {MATERIALIZE_LIMIT}"),
            });
        }
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let m = self.ln_abs.exp();
        // keep real and imaginary values exact on the axes
        Ok(match self.arg {
            a if a == 0.0 => Complex64::new(m, 0.0),
            a if a == PI || a == -PI => Complex64::new(-m, 0.0),
            a if a == FRAC_PI_2 => Complex64::new(0.0, m),
            a if a == -FRAC_PI_2 => Complex64::new(0.0, -m),
            a => Complex64::from_polar(m, a),
        })
    }
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a - TAU * (a / TAU).round();
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// `log sin(pi z^2 / 2)` without overflow, with the real part of `z^2 / 2`
/// reduced modulo 2 in double-double before multiplying by `pi`.
fn log_sin_half_pi_square(z: Complex64) -> LogValue {
    let half_sq_re = (Dd::prod(z.re, z.re) - Dd::prod(z.im, z.im)).mul_f64(0.5);
    let k = 2.0 * (half_sq_re.hi / 2.0).round();
    let reduced = (half_sq_re - Dd::from_f64(k)).to_f64();
    let u = PI * reduced;
    let v = PI * z.re * z.im;
    if v.abs() <= 1.0 {
        let w = Complex64::new(u.sin() * v.cosh(), u.cos() * v.sinh());
        return LogValue::from_complex(w);
    }
    // sin w = (i/2) e^{-iw} (1 - e^{2iw})          for Im w > 0
    //       = -(i/2) e^{iw} (1 - e^{-2iw})         for Im w < 0
    let (phase, tail) = if v > 0.0 {
        (FRAC_PI_2 - u, Complex64::from_polar((-2.0 * v).exp(), 2.0 * u))
    } else {
        (u - FRAC_PI_2, Complex64::from_polar((2.0 * v).exp(), -2.0 * u))
    };
    let corr = LogValue::from_complex(Complex64::new(1.0, 0.0) - tail);
    LogValue {
        ln_abs: v.abs() - LN_2 + corr.ln_abs,
        arg: wrap_angle(phase + corr.arg),
    }
}

fn check_finite(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid(format!("non-finite argument {z}"));
    }
    Ok(())
}

/// `log s(z)`, with the removable singularity at the origin filled in.
pub fn log_s(z: Complex64) -> Result<LogValue> {
    check_finite(z)?;
    let r = z.norm();
    if r > S_MAX_MODULUS {
        return Err(Error::Range {
            what: "|z| for s(z)",
            value: r,
            limit: format!("<= {S_MAX_MODULUS}"),
        });
    }
    let one = Complex64::new(1.0, 0.0);
    if r < 1e-2 {
        // (z^2 - 1) (pi/2) sin(w)/w with w = pi z^2 / 2
        let w = z * z * FRAC_PI_2;
        let w2 = w * w;
        let sinc = one - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0;
        return Ok(LogValue::from_complex((z - one) * (z + one) * FRAC_PI_2 * sinc));
    }
    let rational = (z - one) * (z + one) / (z * z);
    Ok(LogValue::from_complex(rational).mul(log_sin_half_pi_square(z)))
}

/// `s(z) = (z^2 - 1) z^{-2} sin(pi z^2 / 2)`; `s(0) = -pi/2`.
pub fn eval_s(z: Complex64) -> Result<Complex64> {
    log_s(z)?.to_complex()
}

/// Zeros of `s` (the axes set) closest to `z`: a short candidate list that is
/// guaranteed to contain the nearest one.
pub fn s_zero_candidates(z: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    let mut push_axis = |t: f64, real: bool| {
        let n0 = (t * t / 2.0).round() as i64;
        for n in (n0 - 1).max(1)..=(n0 + 1).max(1) {
            let s = ((2 * n) as f64).sqrt();
            for sgn in [1.0, -1.0] {
                out.push(if real {
                    Complex64::new(sgn * s, 0.0)
                } else {
                    Complex64::new(0.0, sgn * s)
                });
            }
        }
    };
    push_axis(z.re, true);
    push_axis(z.im, false);
    out
}

/// Distance from `z` to the nearest zero of `s`.
pub fn s_zero_distance(z: Complex64) -> f64 {
    s_zero_candidates(z)
        .into_iter()
        .map(|w| (z - w).norm())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlfBranch {
    Series,
    Asymptotic,
}

/// `E_{1/2}(z) = exp_coefficient * exp(exponent) + remainder`, with
/// `exponent = z^2` and `exp_coefficient` equal to 2 on `Re z >= 0` and 0
/// elsewhere. The remainder is `-e^{z^2} erfc(z)` on the right half-plane and
/// `e^{z^2} erfc(-z)` on the left one, and is `O(1/|z|)` for large `|z|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlfSplit {
    pub exp_coefficient: f64,
    pub exponent: Complex64,
    pub remainder: Complex64,
    pub branch: MlfBranch,
}

impl MlfSplit {
    pub fn value(&self) -> Result<Complex64> {
        self.log_value().to_complex()
    }

    /// `log E_{1/2}(z)`, combined without materializing `exp(z^2)`.
    pub fn log_value(&self) -> LogValue {
        let rem = LogValue::from_complex(self.remainder);
        if self.exp_coefficient == 0.0 {
            return rem;
        }
        let dominant = LogValue {
            ln_abs: self.exp_coefficient.ln() + self.exponent.re,
            arg: wrap_angle(self.exponent.im),
        };
        let (big, small) = if dominant.ln_abs >= rem.ln_abs {
            (dominant, rem)
        } else {
            (rem, dominant)
        };
        if small.is_zero() {
            return big;
        }
        // big * (1 + small/big)
        let ratio = small.div(big).to_complex().unwrap_or_default();
        big.mul(LogValue::from_complex(Complex64::new(1.0, 0.0) + ratio))
    }

    /// Scale of the two parts, `|2 e^{z^2}| + |remainder|`, used for
    /// relative comparisons near zeros of `E_{1/2}`.
    pub fn magnitude_scale(&self) -> f64 {
        self.exp_coefficient * self.exponent.re.exp() + self.remainder.norm()
    }
}

/// Power series in double-double arithmetic. The even part of the series is
/// `exp(z^2)`; the odd part is `(2z/sqrt(pi)) sum (z^2)^m / (3/2)_m`.
pub fn mittag_leffler_half_series(z: Complex64) -> MlfSplit {
    let z2 = ComplexDd::square_of(z);
    let z2_mod = z2.norm_f64();
    let mut even = ComplexDd::from_c64(Complex64::new(1.0, 0.0));
    let mut even_term = even;
    let mut odd_term = ComplexDd::from_c64(z).scale(TWO_OVER_SQRT_PI);
    let mut odd = odd_term;
    let mut largest = 1.0f64.max(odd_term.norm_f64());
    let mut m = 1u32;
    loop {
        even_term = (even_term * z2).div_f64(m as f64);
        odd_term = (odd_term * z2).div_f64(m as f64 + 0.5);
        even = even + even_term;
        odd = odd + odd_term;
        let size = even_term.norm_f64().max(odd_term.norm_f64());
        largest = largest.max(size);
        if m as f64 > z2_mod && size < 1e-34 * largest {
            break;
        }
        m += 1;
    }
    let right = z.re >= 0.0;
    let remainder = if right { odd - even } else { odd + even };
    MlfSplit {
        exp_coefficient: if right { 2.0 } else { 0.0 },
        exponent: z * z,
        remainder: remainder.to_c64(),
        branch: MlfBranch::Series,
    }
}

/// `e^{w^2} erfc(w) ~ (1/(w sqrt(pi))) sum (-1)^m (2m-1)!! / (2 w^2)^m`,
/// truncated at the smallest term. Valid for `Re w >= 0`, large `|w|`.
fn scaled_erfc_asymptotic(w: Complex64) -> Complex64 {
    let inv_two_w2 = (w * w * 2.0).inv();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut m = 1.0;
    loop {
        let next = term * inv_two_w2 * (-(2.0 * m - 1.0));
        if next.norm() >= term.norm() || next.norm() < 1e-18 * sum.norm() {
            if next.norm() < term.norm() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        m += 1.0;
    }
    sum / (w * PI.sqrt())
}

pub fn mittag_leffler_half_asymptotic(z: Complex64) -> MlfSplit {
    let right = z.re >= 0.0;
    let remainder = if right {
        -scaled_erfc_asymptotic(z)
    } else {
        scaled_erfc_asymptotic(-z)
    };
    MlfSplit {
        exp_coefficient: if right { 2.0 } else { 0.0 },
        exponent: z * z,
        remainder,
        branch: MlfBranch::Asymptotic,
    }
}

/// `E_{1/2}(z)` in split form, choosing the branch by `|z|`.
pub fn mittag_leffler_half_split(z: Complex64) -> Result<MlfSplit> {
    check_finite(z)?;
    let r = z.norm();
    if r > MLF_MAX_MODULUS {
        return Err(Error::Range {
            what: "|z| for E_1/2",
            value: r,
            limit: format!("<= {MLF_MAX_MODULUS}"),
        });
    }
    Ok(if r <= MLF_SWITCH_RADIUS {
        mittag_leffler_half_series(z)
    } else {
        mittag_leffler_half_asymptotic(z)
    })
}

pub fn eval_mittag_leffler_half(z: Complex64) -> Result<Complex64> {
    mittag_leffler_half_split(z)?.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub r: f64,
    pub theta: f64,
    pub log_abs_s: f64,
    /// `(pi/2) r^2 |sin 2 theta|`
    pub model_exponent: f64,
    pub ratio: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRatioReport {
    pub epsilon: f64,
    pub samples: Vec<GrowthSample>,
    /// Ratios of the non-excluded samples, in grid order.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub excluded: usize,
}

/// Polar scan of `|s(r e^{i theta})| exp(-(pi/2) r^2 |sin 2 theta|)`, skipping
/// points within `epsilon r^{-1/2}` of a zero of `s`.
pub fn growth_ratio_scan(r_list: &[f64], theta_count: usize, epsilon: f64) -> Result<GrowthRatioReport> {
    if r_list.is_empty() {
        return invalid("empty radius list");
    }
    if let Some(r) = r_list.iter().find(|r| !(2.0..=30.0).contains(*r)) {
        return Err(Error::Range {
            what: "scan radius",
            value: *r,
            limit: "[2, 30]".into(),
        });
    }
    if theta_count < 64 {
        return invalid(format!("theta_count must be at least 64, got {theta_count}"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return invalid("epsilon must be positive");
    }
    let grid: Vec<(f64, f64)> = r_list
        .iter()
        .flat_map(|&r| (0..theta_count).map(move |k| (r, TAU * k as f64 / theta_count as f64)))
        .collect();
    let samples = grid
        .par_iter()
        .map(|&(r, theta)| {
            let z = Complex64::from_polar(r, theta);
            let log_abs_s = log_s(z)?.ln_abs;
            let model_exponent = FRAC_PI_2 * r * r * (2.0 * theta).sin().abs();
            let excluded = s_zero_distance(z) <= epsilon / r.sqrt();
            Ok(GrowthSample {
                r,
                theta,
                log_abs_s,
                model_exponent,
                ratio: (log_abs_s - model_exponent).exp(),
                excluded,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = samples.iter().filter(|s| !s.excluded).map(|s| s.ratio).collect();
    if ratios.is_empty() {
        return Err(Error::Precondition("empty grid after zero exclusion".into()));
    }
    Ok(GrowthRatioReport {
        epsilon,
        excluded: samples.len() - ratios.len(),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        ratios,
        samples,
    })
}
