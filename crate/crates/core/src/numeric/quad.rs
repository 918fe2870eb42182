//! Quadrature rules: adaptive Gauss-Kronrod (G7/K15) for complex-valued
//! integrands on finite intervals, Gauss-Legendre nodes, and a nested
//! trapezoid rule for periodic integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn kronrod15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

/// Globally adaptive G7/K15 integration of a complex integrand over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn gauss_kronrod_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult<Complex64>> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    let (v, e) = kronrod15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(QuadResult {
                value: total,
                error_estimate: err,
                evaluations,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {err:e} above tolerance after {max_intervals} subintervals"
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Trapezoid rule over one period `[0, 2*pi)` with nested doubling.
///
/// Starts at `min_points` (rounded up to a power of two) and doubles until
/// consecutive estimates agree to `rel_tol` relative or `abs_tol` absolute.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(
    f: F,
    min_points: usize,
    max_points: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<f64>> {
    let two_pi = std::f64::consts::TAU;
    let mut n = min_points.max(4).next_power_of_two();
    let mut acc = 0.0;
    for k in 0..n {
        acc += f(two_pi * k as f64 / n as f64);
    }
    let mut estimate = acc * two_pi / n as f64;
    let mut evaluations = n;
    while n < max_points {
        // odd nodes of the doubled grid
        let mut extra = 0.0;
        for k in 0..n {
            extra += f(two_pi * (2 * k + 1) as f64 / (2 * n) as f64);
        }
        evaluations += n;
        acc += extra;
        n *= 2;
        let next = acc * two_pi / n as f64;
        let diff = (next - estimate).abs();
        estimate = next;
        if !estimate.is_finite() {
            return Err(Error::Quadrature("non-finite periodic integrand".into()));
        }
        if diff <= abs_tol.max(rel_tol * estimate.abs()) {
            return Ok(QuadResult {
                value: estimate,
                error_estimate: diff,
                evaluations,
            });
        }
    }
    Err(Error::Quadrature(format!(
        "periodic trapezoid not converged with {max_points} points"
    )))
}
