//! Time-frequency shifts of the normalized Gaussian `g(t) = 2^{1/4} e^{-pi t^2}`
//! and finite-section diagnostics of the system `{rho_lambda g}`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bargmann_fock::TimeFunctionSpec;
use crate::error::{invalid, Error, Result};
use crate::numeric::gauss_kronrod_adaptive;
use crate::phase_space::{generate_points, PhasePoint, PointSetSpec};

pub const GRAM_POINT_CAP: usize = 400;
/// Relative regularization used when a section is singular and none was given.
pub const DEFAULT_REGULARIZATION: f64 = 1e-12;
/// Most negative eigenvalue accepted before clamping.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// `sigma_min / sigma_max` below which a section counts as numerically singular.
pub const SINGULAR_RATIO: f64 = 1e-13;

const FOURTH_ROOT_2: f64 = 1.189_207_115_002_721;

pub fn window(t: f64) -> f64 {
    FOURTH_ROOT_2 * (-PI * t * t).exp()
}

/// `(rho_{x,y} g)(t) = e^{2 pi i y t} g(t - x)`
pub fn tf_shift_eval(x: f64, y: f64, t: f64) -> Complex64 {
    Complex64::from_polar(window(t - x), TAU * y * t)
}

/// `<rho_lambda g, rho_mu g>`, linear in the first argument:
/// `exp(-pi (dx^2 + dy^2)/2) exp(i pi (y1 - y2)(x1 + x2))`.
pub fn gauss_inner_product(lambda: PhasePoint, mu: PhasePoint) -> Complex64 {
    let dx = lambda.xi - mu.xi;
    let dy = lambda.eta - mu.eta;
    let modulus = (-0.5 * PI * (dx * dx + dy * dy)).exp();
    Complex64::from_polar(modulus, PI * dy * (lambda.xi + mu.xi))
}

/// The same inner product by adaptive quadrature over `|t| <= max(4, max|x| + 4)`.
pub fn gauss_inner_product_quadrature(lambda: PhasePoint, mu: PhasePoint) -> Result<Complex64> {
    let t = 4.0f64.max(lambda.xi.abs().max(mu.xi.abs()) + 4.0);
    let q = gauss_kronrod_adaptive(
        |t| tf_shift_eval(lambda.xi, lambda.eta, t) * tf_shift_eval(mu.xi, mu.eta, t).conj(),
        -t,
        t,
        1e-14,
        1e-13,
        4000,
    )?;
    Ok(q.value)
}

/// Gram matrix `G[i][j] = <rho_{p_i} g, rho_{p_j} g>` of a finite section.
#[derive(Debug, Clone)]
pub struct GramSection {
    pub points: Vec<PhasePoint>,
    pub entries: DMatrix<Complex64>,
    /// Ascending eigenvalues, clamped at 0.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, columns in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Smallest eigenvalue before clamping.
    pub raw_min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSummary {
    pub points: Vec<PhasePoint>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub condition: f64,
}

impl GramSection {
    pub fn from_points(points: Vec<PhasePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        if points.len() > GRAM_POINT_CAP {
            return Err(Error::TooManyPoints {
                count: points.len(),
                cap: GRAM_POINT_CAP,
            });
        }
        let n = points.len();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| gauss_inner_product(points[i], points[j])).collect())
            .collect();
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let eig = SymmetricEigen::new(entries.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let raw_min_eigenvalue = eig.eigenvalues[order[0]];
        if raw_min_eigenvalue < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite(raw_min_eigenvalue));
        }
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(GramSection {
            points,
            sigma_min: eigenvalues[0],
            sigma_max: eigenvalues[n - 1],
            entries,
            eigenvalues,
            eigenvectors,
            raw_min_eigenvalue,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn condition(&self) -> f64 {
        if self.sigma_min > 0.0 {
            self.sigma_max / self.sigma_min
        } else {
            f64::INFINITY
        }
    }

    pub fn is_singular(&self) -> bool {
        self.sigma_min <= SINGULAR_RATIO * self.sigma_max
    }

    pub fn summary(&self) -> GramSummary {
        GramSummary {
            points: self.points.clone(),
            sigma_min: self.sigma_min,
            sigma_max: self.sigma_max,
            condition: self.condition(),
        }
    }

    /// Tikhonov filter `lambda / (lambda^2 + tau^2)` with `tau = reg * sigma_max`;
    /// plain inversion when `reg = 0`.
    fn filter(&self, reg: f64) -> Vec<f64> {
        let tau = reg * self.sigma_max;
        self.eigenvalues
            .iter()
            .map(|&l| if reg == 0.0 { 1.0 / l } else { l / (l * l + tau * tau) })
            .collect()
    }
}

pub fn gram_section(spec: &PointSetSpec, radius: f64) -> Result<GramSection> {
    let points = generate_points(spec, radius)?;
    GramSection::from_points(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiorthogonalReport {
    pub points: Vec<PhasePoint>,
    /// `max |<g~_lambda, rho_mu g> - delta_{lambda mu}|`
    pub residual_matrix_deviation: f64,
    pub regularization: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Dual family `g~_i = sum_j B[i][j] rho_{p_j} g` with `B` the (regularized)
/// inverse of the Gram matrix; reports how far `B G` is from the identity.
pub fn biorthogonal_residual(spec: &PointSetSpec, radius: f64, regularization: f64) -> Result<BiorthogonalReport> {
    if !(regularization >= 0.0 && regularization.is_finite()) {
        return invalid("regularization must be nonnegative");
    }
    let gram = gram_section(spec, radius)?;
    if regularization == 0.0 && gram.is_singular() {
        return Err(Error::Singular {
            sigma_min: gram.sigma_min,
            sigma_max: gram.sigma_max,
        });
    }
    let f = DVector::from_vec(gram.filter(regularization).into_iter().map(|v| Complex64::new(v, 0.0)).collect());
    let u = &gram.eigenvectors;
    let b = u * DMatrix::from_diagonal(&f) * u.adjoint();
    let bg = b * &gram.entries;
    let n = gram.len();
    let deviation = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let delta = if i == j { 1.0 } else { 0.0 };
            (bg[(i, j)] - delta).norm()
        })
        .fold(0.0, f64::max);
    Ok(BiorthogonalReport {
        points: gram.points,
        residual_matrix_deviation: deviation,
        regularization,
        sigma_min: gram.sigma_min,
        sigma_max: gram.sigma_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub radii: Vec<f64>,
    pub point_counts: Vec<usize>,
    /// Distance from the normalized target to the span of each section.
    pub residuals: Vec<f64>,
    /// Relative regularization used per rung (0 when the section was solved exactly).
    pub regularization: Vec<f64>,
}

/// `residual^2 = 1 - sum |w_k|^2 l_k (l_k^2 + 2 t^2) / (l_k^2 + t^2)^2`, the
/// squared error of the Tikhonov-regularized projection, with `w = U^H c`.
fn section_residual(gram: &GramSection, target: &TimeFunctionSpec, reg: f64) -> f64 {
    let norm = target.norm();
    let c = DVector::from_iterator(
        gram.len(),
        gram.points
            .iter()
            .map(|p| TimeFunctionSpec::ShiftedGaussian { x: p.xi, y: p.eta }.inner(target) / norm),
    );
    let w = gram.eigenvectors.adjoint() * c;
    let tau2 = (reg * gram.sigma_max).powi(2);
    let captured: f64 = gram
        .eigenvalues
        .iter()
        .zip(w.iter())
        .filter(|(l, _)| **l > 0.0)
        .map(|(&l, wk)| wk.norm_sqr() * l * (l * l + 2.0 * tau2) / (l * l + tau2).powi(2))
        .sum();
    (1.0 - captured).max(0.0).sqrt()
}

pub fn completeness_residual(
    target: &TimeFunctionSpec,
    spec: &PointSetSpec,
    radius_ladder: &[f64],
) -> Result<CompletenessReport> {
    target.validate()?;
    if radius_ladder.is_empty() {
        return invalid("empty radius ladder");
    }
    if radius_ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("radius ladder must be strictly increasing");
    }
    let mut report = CompletenessReport {
        radii: radius_ladder.to_vec(),
        point_counts: Vec::new(),
        residuals: Vec::new(),
        regularization: Vec::new(),
    };
    let mut best = 1.0f64;
    for &r in radius_ladder {
        let points = generate_points(spec, r)?;
        let (residual, reg) = if points.is_empty() {
            (1.0, 0.0)
        } else {
            let gram = GramSection::from_points(points.clone())?;
            let reg = if gram.is_singular() {
                log::info!("section at radius {r} is singular, regularizing with {DEFAULT_REGULARIZATION:e}");
                DEFAULT_REGULARIZATION
            } else {
                0.0
            };
            (section_residual(&gram, target, reg), reg)
        };
        // the span only grows along the ladder, so the best residual so far is attainable
        best = best.min(residual);
        report.point_counts.push(points.len());
        report.residuals.push(best);
        report.regularization.push(reg);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn random_point(rng: &mut ChaCha8Rng, r: f64) -> PhasePoint {
        PhasePoint::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
    }

    #[test]
    fn shift_examples() {
        let c = FOURTH_ROOT_2;
        assert!((tf_shift_eval(0.0, 0.0, 0.0) - c).norm() < 1e-15);
        assert!((tf_shift_eval(1.0, 0.0, 1.0) - c).norm() < 1e-15);
        let v = tf_shift_eval(0.0, 1.0, 0.5);
        assert!((v - Complex64::new(-c * (-PI / 4.0).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn window_has_unit_norm() {
        let q = gauss_kronrod_adaptive(|t| Complex64::new(window(t).powi(2), 0.0), -6.0, 6.0, 1e-15, 1e-14, 100).unwrap();
        assert!((q.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        let o = PhasePoint::new(0.0, 0.0);
        let p = PhasePoint::new(1.0, 2.0);
        assert!((gauss_inner_product(p, p) - 1.0).norm() < 1e-15);
        let a = gauss_inner_product(PhasePoint::new(1.0, 0.0), o).norm();
        assert!((a - (-PI / 2.0).exp()).abs() < 1e-15);
        assert!((a - 0.20788).abs() < 1e-5);
        let b = gauss_inner_product(PhasePoint::new(0.0, SQRT_2), o).norm();
        assert!((b - 0.04321391826377226).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let (l, m) = (random_point(&mut rng, 3.0 / SQRT_2), random_point(&mut rng, 3.0 / SQRT_2));
            let q = gauss_inner_product_quadrature(l, m).unwrap();
            assert!((q - gauss_inner_product(l, m)).norm() < 1e-9, "{l:?} {m:?}");
        }
    }

    #[test]
    fn hermitian_modulus_and_cauchy_schwarz() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let (l, m) = (random_point(&mut rng, 5.0), random_point(&mut rng, 5.0));
            let a = gauss_inner_product(l, m);
            assert_eq!(a, gauss_inner_product(m, l).conj());
            let d2 = (l.xi - m.xi).powi(2) + (l.eta - m.eta).powi(2);
            assert!((a.norm() - (-PI * d2 / 2.0).exp()).abs() < 1e-12);
            assert!(a.norm() < 1.0);
        }
    }

    #[test]
    fn gram_of_first_axes_shell() {
        let g = gram_section(&PointSetSpec::AxesTheorem1, 1.5).unwrap();
        assert_eq!(g.len(), 6);
        for i in 0..6 {
            assert!((g.entries[(i, i)] - 1.0).norm() < 1e-15);
            for j in 0..6 {
                assert_eq!(g.entries[(i, j)], g.entries[(j, i)].conj());
                if i != j {
                    assert!(g.entries[(i, j)].norm() < 1.0);
                }
            }
        }
        assert!(g.sigma_min > 0.1, "{}", g.sigma_min);
        // eigenvalues sum to the trace
        assert!((g.eigenvalues.iter().sum::<f64>() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn gram_of_a_single_point() {
        let g = gram_section(&PointSetSpec::explicit(vec![PhasePoint::new(0.3, -0.2)]), 1.0).unwrap();
        assert_eq!(g.entries, DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
        assert_eq!((g.sigma_min, g.sigma_max), (1.0, 1.0));
    }

    #[test]
    fn gram_interlacing_under_extension() {
        let g4 = gram_section(&PointSetSpec::AxesTheorem1, 4.0).unwrap();
        let g6 = gram_section(&PointSetSpec::AxesTheorem1, 6.0).unwrap();
        // both values are at rounding level, where only the ordering up to eps*sigma_max is meaningful
        assert!(g6.sigma_min <= g4.sigma_min + 1e-14 * g6.sigma_max, "{} {}", g6.sigma_min, g4.sigma_min);
        assert!(g6.sigma_max >= g4.sigma_max);
    }

    #[test]
    fn gram_errors() {
        assert!(matches!(gram_section(&PointSetSpec::AxesTheorem1, 0.5), Err(Error::EmptySet)));
        assert!(matches!(
            gram_section(&PointSetSpec::lattice(1.0, 1.0), 12.0),
            Err(Error::TooManyPoints { .. })
        ));
    }

    #[test]
    fn biorthogonal_examples() {
        let r = biorthogonal_residual(&PointSetSpec::AxesTheorem1, 1.5, 0.0).unwrap();
        assert!(r.residual_matrix_deviation <= 1e-8);
        let one = PointSetSpec::explicit(vec![PhasePoint::new(1.0, 1.0)]);
        assert_eq!(biorthogonal_residual(&one, 3.0, 0.0).unwrap().residual_matrix_deviation, 0.0);
        let a = biorthogonal_residual(&PointSetSpec::AxesTheorem1, 5.0, 1e-10).unwrap();
        let b = biorthogonal_residual(&PointSetSpec::AxesTheorem1, 5.0, 1e-10).unwrap();
        assert!(a.residual_matrix_deviation.is_finite());
        assert_eq!(a, b);
        assert_eq!(a.regularization, 1e-10);
    }

    #[test]
    fn biorthogonal_direct_solve_oracle() {
        // B G = I checked against a dense LU inverse
        let g = gram_section(&PointSetSpec::AxesTheorem1, 1.5).unwrap();
        let inv = g.entries.clone().try_inverse().unwrap();
        let prod = inv * &g.entries;
        let lu_dev = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .map(|(i, j)| (prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).norm())
            .fold(0.0, f64::max);
        let r = biorthogonal_residual(&PointSetSpec::AxesTheorem1, 1.5, 0.0).unwrap();
        assert!(lu_dev < 1e-12 && r.residual_matrix_deviation < 1e-12);
    }

    #[test]
    fn singular_section_requires_regularization() {
        let pts = vec![PhasePoint::new(1.0, 0.0), PhasePoint::new(1.0 + 1e-9, 0.0)];
        let spec = PointSetSpec::explicit(pts);
        assert!(matches!(biorthogonal_residual(&spec, 3.0, 0.0), Err(Error::Singular { .. })));
        assert!(biorthogonal_residual(&spec, 3.0, 1e-6).is_ok());
    }

    #[test]
    fn member_of_the_span_has_zero_residual() {
        let p = PhasePoint::new(0.5, -0.25);
        let spec = PointSetSpec::explicit(vec![PhasePoint::new(1.0, 1.0), p, PhasePoint::new(-1.0, 0.0)]);
        let target = TimeFunctionSpec::ShiftedGaussian { x: p.xi, y: p.eta };
        let rep = completeness_residual(&target, &spec, &[1.0, 2.0]).unwrap();
        assert_eq!(rep.point_counts, vec![1, 3]);
        for r in rep.residuals {
            assert!(r < 1e-7, "{r}");
        }
    }

    #[test]
    fn residual_of_single_shift_oracle() {
        // projection onto one unit vector: residual^2 = 1 - |<g, rho_p g>|^2
        let p = PhasePoint::new(1.0, 0.0);
        let rep = completeness_residual(&TimeFunctionSpec::Gaussian, &PointSetSpec::explicit(vec![p]), &[2.0]).unwrap();
        let want = (1.0 - (-PI).exp()).sqrt();
        assert!((rep.residuals[0] - want).abs() < 1e-14);
    }

    #[test]
    fn residuals_on_axes_ladder() {
        let ladder = [1.5, 3.0, 5.0];
        let g = completeness_residual(&TimeFunctionSpec::Gaussian, &PointSetSpec::AxesTheorem1, &ladder).unwrap();
        assert!(g.residuals.iter().all(|r| *r > 0.0), "{:?}", g.residuals);
        assert!(g.residuals.windows(2).all(|w| w[1] <= w[0]));
        let tg = completeness_residual(&TimeFunctionSpec::MonomialGaussian { k: 1 }, &PointSetSpec::AxesTheorem1, &ladder).unwrap();
        assert!(tg.residuals.windows(2).all(|w| w[1] <= w[0]), "{:?}", tg.residuals);
    }

    #[test]
    fn unregularized_residual_matches_least_squares() {
        // residual^2 = 1 - c^H G^{-1} c on a well-conditioned section
        let spec = PointSetSpec::AxesTheorem1;
        let gram = gram_section(&spec, 1.5).unwrap();
        let target = TimeFunctionSpec::MonomialGaussian { k: 1 };
        let n = target.norm();
        let c = DVector::from_iterator(
            6,
            gram.points.iter().map(|p| TimeFunctionSpec::ShiftedGaussian { x: p.xi, y: p.eta }.inner(&target) / n),
        );
        let sol = gram.entries.clone().lu().solve(&c).unwrap();
        let captured = c.dotc(&sol).re;
        let rep = completeness_residual(&target, &spec, &[1.5]).unwrap();
        assert!((rep.residuals[0] - (1.0 - captured).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn completeness_residual_is_nonincreasing(k in 0u32..4, x in -1.0f64..1.0, y in -1.0f64..1.0, which in 0usize..3) {
            let target = match which {
                0 => TimeFunctionSpec::Gaussian,
                1 => TimeFunctionSpec::ShiftedGaussian { x, y },
                _ => TimeFunctionSpec::MonomialGaussian { k },
            };
            let rep = completeness_residual(&target, &PointSetSpec::AxesTheorem1, &[1.5, 3.0, 5.0]).unwrap();
            prop_assert!(rep.residuals.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(rep.residuals.iter().all(|r| (0.0..=1.0).contains(r)));
        }

        #[test]
        fn entries_obey_cauchy_schwarz(a in 1.0f64..3.0, b in 1.0f64..3.0) {
            let g = gram_section(&PointSetSpec::lattice(a, b), 4.0).unwrap();
            for i in 0..g.len() {
                for j in 0..g.len() {
                    let m = g.entries[(i, j)].norm();
                    if i == j { prop_assert!((m - 1.0).abs() < 1e-15) } else { prop_assert!(m < 1.0) }
                }
            }
        }
    }
}
