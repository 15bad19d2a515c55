//! One-dimensional interpolation: the RBF-Direct baseline, the direct HermiteGF
//! transform (`M = N`), and the HermiteGF-QR variant (`M > N`).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::basis::{cd_matrices, d_tilde, hermitegf_matrix, HermiteGFBasis};
use crate::linalg::{
    hadamard, qr_decompose, solve_linear, solve_upper_triangular, DenseMatrix, LinalgError,
};
use crate::{Error, PhaseTimes, Result};

/// Which interpolation scheme produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RbfDirect,
    HermitegfDirect,
    HermitegfQr,
}

#[derive(Debug, Clone)]
enum Model {
    RbfDirect {
        epsilon: f64,
        centers: Vec<f64>,
    },
    HermiteGf {
        basis: HermiteGFBasis,
    },
    /// `correction` is `Λ = [Id | D̃ ∘ R̃]`, `N x M`.
    HermiteGfQr {
        basis: HermiteGFBasis,
        correction: DenseMatrix,
    },
}

/// A fitted one-dimensional interpolant. Immutable; evaluation is thread-safe.
#[derive(Debug, Clone)]
pub struct Interpolant1D {
    model: Model,
    coeffs: Vec<f64>,
    timings: PhaseTimes,
}

impl Interpolant1D {
    pub fn method(&self) -> Method {
        match self.model {
            Model::RbfDirect { .. } => Method::RbfDirect,
            Model::HermiteGf { .. } => Method::HermitegfDirect,
            Model::HermiteGfQr { .. } => Method::HermitegfQr,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// HermiteGF basis; `None` for the RBF-Direct baseline.
    pub fn basis(&self) -> Option<&HermiteGFBasis> {
        match &self.model {
            Model::RbfDirect { .. } => None,
            Model::HermiteGf { basis } | Model::HermiteGfQr { basis, .. } => Some(basis),
        }
    }

    /// The `N x M` correction matrix of a QR fit.
    pub fn correction(&self) -> Option<&DenseMatrix> {
        match &self.model {
            Model::HermiteGfQr { correction, .. } => Some(correction),
            _ => None,
        }
    }

    pub fn timings(&self) -> PhaseTimes {
        self.timings
    }

    /// Evaluates the interpolant at `points`.
    pub fn evaluate(&self, points: &[f64]) -> Result<Vec<f64>> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        match &self.model {
            Model::RbfDirect { epsilon, centers } => {
                let phi = gaussian_matrix(*epsilon, points, centers)?;
                Ok(phi.matvec(&self.coeffs)?)
            }
            Model::HermiteGf { basis } => {
                Ok(hermitegf_matrix(basis, points)?.matvec(&self.coeffs)?)
            }
            Model::HermiteGfQr { basis, correction } => {
                let h = hermitegf_matrix(basis, points)?;
                // H(x) Λᵀ β computed as H(x) (Λᵀ β).
                let expanded = correction.transpose().matvec(&self.coeffs)?;
                Ok(h.matvec(&expanded)?)
            }
        }
    }
}

fn gaussian_matrix(epsilon: f64, points: &[f64], centers: &[f64]) -> Result<DenseMatrix> {
    let e2 = epsilon * epsilon;
    Ok(DenseMatrix::from_fn(
        points.len(),
        centers.len(),
        |i, j| {
            let r = points[i] - centers[j];
            (-e2 * r * r).exp()
        },
    )?)
}

pub(crate) fn check_data(colloc: &[f64], values: &[f64]) -> Result<()> {
    if colloc.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one collocation point".into(),
        ));
    }
    if colloc.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "{} collocation points but {} values",
            colloc.len(),
            values.len()
        )));
    }
    if colloc.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite collocation data".into()));
    }
    Ok(())
}

pub(crate) fn check_distinct(points: &[f64]) -> Result<()> {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput(format!(
            "duplicate collocation point {}",
            w[0]
        )));
    }
    Ok(())
}

/// RBF-Direct: solves `Φ α = f` with `Φ_ij = exp(-ε²(x_i - c_j)²)`.
///
/// In the flat limit the collocation matrix is numerically singular and this
/// returns [`Error::Linalg`] with [`LinalgError::Singular`]; that failure is the
/// baseline's expected behavior, not a bug.
pub fn fit_rbf_direct(
    centers: &[f64],
    colloc: &[f64],
    values: &[f64],
    epsilon: f64,
) -> Result<Interpolant1D> {
    check_data(colloc, values)?;
    if centers.len() != colloc.len() {
        return Err(Error::InvalidInput(format!(
            "{} centers but {} collocation points",
            centers.len(),
            colloc.len()
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let start = Instant::now();
    let phi = gaussian_matrix(epsilon, colloc, centers)?;
    let build = start.elapsed();
    let start = Instant::now();
    let alpha = solve_linear(&phi, &DenseMatrix::column(values)?)?;
    let solve = start.elapsed();
    Ok(Interpolant1D {
        model: Model::RbfDirect {
            epsilon,
            centers: centers.to_vec(),
        },
        coeffs: alpha.into_vec(),
        timings: PhaseTimes::new(build, solve),
    })
}

/// Direct HermiteGF interpolant `s(x) = H(x) H(X_col)⁻¹ f` with `M = N`.
///
/// No centers enter: the interpolant is the same for every center grid.
pub fn fit_hermitegf(
    colloc: &[f64],
    values: &[f64],
    gamma: f64,
    epsilon: f64,
    interval: [f64; 2],
) -> Result<Interpolant1D> {
    check_data(colloc, values)?;
    check_distinct(colloc)?;
    let basis = HermiteGFBasis::for_interval(gamma, epsilon, interval, colloc.len())?;
    let start = Instant::now();
    let h = hermitegf_matrix(&basis, colloc)?;
    let build = start.elapsed();
    let start = Instant::now();
    let c = solve_linear(&h, &DenseMatrix::column(values)?).map_err(|e| match e {
        LinalgError::Singular { pivot, index } => Error::SingularHermite {
            gamma_l: basis.gamma_l(),
            pivot,
            index,
        },
        other => other.into(),
    })?;
    let solve = start.elapsed();
    Ok(Interpolant1D {
        model: Model::HermiteGf { basis },
        coeffs: c.into_vec(),
        timings: PhaseTimes::new(build, solve),
    })
}

/// HermiteGF-QR interpolant with `M >= N` expansion terms.
///
/// Factors `C = Q [R₁ R₂]`, forms `Λ = [Id | D̃ ∘ (R₁⁻¹ R₂)]`, and solves the
/// collocation system in the basis `Ψ(x) = H(x) Λᵀ`.
pub fn fit_hermitegf_qr(
    centers: &[f64],
    colloc: &[f64],
    values: &[f64],
    gamma: f64,
    epsilon: f64,
    interval: [f64; 2],
    m_terms: usize,
) -> Result<Interpolant1D> {
    check_data(colloc, values)?;
    check_distinct(colloc)?;
    let n = colloc.len();
    if centers.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} centers but {} collocation points",
            centers.len(),
            n
        )));
    }
    if m_terms < n {
        return Err(Error::InvalidInput(format!(
            "m_terms = {m_terms} is below N = {n}; the rank-deficient case is not supported"
        )));
    }
    let basis = HermiteGFBasis::for_interval(gamma, epsilon, interval, m_terms)?;
    let start = Instant::now();
    let correction = qr_correction(&basis, centers)?;
    let h = hermitegf_matrix(&basis, colloc)?;
    let psi = h.matmul(&correction.transpose())?;
    let build = start.elapsed();
    let start = Instant::now();
    let beta = solve_linear(&psi, &DenseMatrix::column(values)?).map_err(|e| match e {
        LinalgError::Singular { pivot, index } => Error::SingularHermite {
            gamma_l: basis.gamma_l(),
            pivot,
            index,
        },
        other => other.into(),
    })?;
    let solve = start.elapsed();
    Ok(Interpolant1D {
        model: Model::HermiteGfQr { basis, correction },
        coeffs: beta.into_vec(),
        timings: PhaseTimes::new(build, solve),
    })
}

/// `Λ = [Id | D̃ ∘ R̃]` for the given basis (with `M = basis.m_terms()`) and centers.
pub fn qr_correction(basis: &HermiteGFBasis, centers: &[f64]) -> Result<DenseMatrix> {
    let n = centers.len();
    let m = basis.m_terms();
    let mut lambda = DenseMatrix::zeros(n, m);
    for i in 0..n {
        lambda.set(i, i, 1.0);
    }
    if m == n {
        return Ok(lambda);
    }
    let c = cd_matrices(basis, centers).c;
    let qr = qr_decompose(&c)?;
    let r1 = qr.r.columns(0, n);
    let r2 = qr.r.columns(n, m);
    let r_tilde = solve_upper_triangular(&r1, &r2).map_err(|e| match e {
        LinalgError::SingularTriangular { index } => Error::RankDeficient { index },
        other => other.into(),
    })?;
    let block = hadamard(&d_tilde(basis, n, m)?, &r_tilde)?;
    for j in 0..m - n {
        lambda.col_mut(n + j).copy_from_slice(block.col(j));
    }
    Ok(lambda)
}

/// Error metric for comparing predictions with the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Root of the sum of squared differences.
    #[default]
    L2,
    /// [`Metric::L2`] divided by the square root of the point count.
    L2Normalized,
    /// Discrete `L₂` norm `sqrt(h Σ e²)` on a uniform grid with cell volume `h`.
    L2Quadrature,
}

impl Metric {
    /// `cell_volume` is the uniform grid cell (`Π (B-A)/(P-1)`); only
    /// [`Metric::L2Quadrature`] uses it.
    pub fn apply(self, predicted: &[f64], truth: &[f64], cell_volume: f64) -> Result<f64> {
        let e = l2_error(predicted, truth)?;
        Ok(match self {
            Metric::L2 => e,
            Metric::L2Normalized if predicted.is_empty() => 0.0,
            Metric::L2Normalized => e / (predicted.len() as f64).sqrt(),
            Metric::L2Quadrature => e * cell_volume.sqrt(),
        })
    }
}

/// Cell volume of the uniform grid with `points[ℓ]` points on `intervals[ℓ]`.
pub fn uniform_cell_volume(points: &[usize], intervals: &[[f64; 2]]) -> f64 {
    points
        .iter()
        .zip(intervals)
        .map(|(&p, [a, b])| {
            if p > 1 {
                (b - a) / (p - 1) as f64
            } else {
                b - a
            }
        })
        .product()
}

/// Unnormalized root-sum-of-squares difference.
pub fn l2_error(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} predictions vs {} reference values",
            predicted.len(),
            truth.len()
        )));
    }
    Ok(predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::{chebyshev_nodes, uniform_nodes, TestFunction};

    fn sample(f: impl Fn(f64) -> f64, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| f(x)).collect()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rbf_direct_trivial_systems() {
        let m = fit_rbf_direct(&[0.0], &[0.0], &[3.0], 0.7).unwrap();
        assert_eq!(m.coeffs(), &[3.0]);
        assert_eq!(m.method(), Method::RbfDirect);

        let x = chebyshev_nodes(6, [-1.0, 1.0]).unwrap();
        let m = fit_rbf_direct(&x, &x, &[0.0; 6], 1.0).unwrap();
        assert!(m.coeffs().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn rbf_direct_well_conditioned_reproduces_square() {
        let x = chebyshev_nodes(10, [-1.0, 1.0]).unwrap();
        let m = fit_rbf_direct(&x, &x, &sample(|t| t * t, &x), 1.0).unwrap();
        let eval = uniform_nodes(100, [-1.0, 1.0]).unwrap();
        assert!(max_abs_diff(&m.evaluate(&x).unwrap(), &sample(|t| t * t, &x)) < 1e-10);
        // Off-grid the Gaussian span only approximates x^2 to about 1.6e-4.
        let s = m.evaluate(&eval).unwrap();
        assert!(max_abs_diff(&s, &sample(|t| t * t, &eval)) < 1e-3);
    }

    #[test]
    fn rbf_direct_flat_limit_is_singular() {
        let x = chebyshev_nodes(30, [-4.0, 4.0]).unwrap();
        let f = sample(|t| TestFunction::F2.eval_1d(t), &x);
        let err = fit_rbf_direct(&x, &x, &f, 0.01).unwrap_err();
        assert!(
            matches!(err, Error::Linalg(LinalgError::Singular { .. })),
            "{err}"
        );
    }

    #[test]
    fn rbf_direct_input_validation() {
        assert!(fit_rbf_direct(&[0.0], &[0.0, 1.0], &[1.0, 2.0], 1.0).is_err());
        assert!(fit_rbf_direct(&[0.0], &[0.0], &[1.0, 2.0], 1.0).is_err());
        assert!(fit_rbf_direct(&[0.0], &[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn hermitegf_single_point() {
        let m = fit_hermitegf(&[0.0], &[2.5], 1.0, 0.3, [-1.0, 1.0]).unwrap();
        let s = m.evaluate(&[-0.5, 0.0, 0.8]).unwrap();
        for (v, x) in s.iter().zip([-0.5f64, 0.0, 0.8]) {
            assert!((v - 2.5 * (-0.09 * x * x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn hermitegf_constant_data_reproduced_off_grid() {
        let x = chebyshev_nodes(10, [-1.0, 1.0]).unwrap();
        let m = fit_hermitegf(&x, &[1.0; 10], 4.0, 0.1, [-1.0, 1.0]).unwrap();
        let s = m
            .evaluate(&uniform_nodes(57, [-1.0, 1.0]).unwrap())
            .unwrap();
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn hermitegf_interpolates_collocation_data() {
        let x = chebyshev_nodes(20, [-1.0, 1.0]).unwrap();
        let f = sample(|t| TestFunction::F1.eval_1d(t), &x);
        let m = fit_hermitegf(&x, &f, 4.0, 0.1, [-1.0, 1.0]).unwrap();
        assert!(max_abs_diff(&m.evaluate(&x).unwrap(), &f) < 1e-8);
        assert!(m.evaluate(&[]).unwrap().is_empty());
    }

    #[test]
    fn hermitegf_rejects_duplicates_and_mismatch() {
        assert!(fit_hermitegf(&[0.0, 0.0], &[1.0, 1.0], 1.0, 0.1, [-1.0, 1.0]).is_err());
        assert!(fit_hermitegf(&[0.0, 0.5], &[1.0], 1.0, 0.1, [-1.0, 1.0]).is_err());
        assert!(fit_hermitegf(&[], &[], 1.0, 0.1, [-1.0, 1.0]).is_err());
        assert!(fit_hermitegf(&[0.0], &[1.0], 1.0, 0.1, [1.0, -1.0]).is_err());
    }

    #[test]
    fn hermitegf_singular_suggests_gamma() {
        // With a tiny γ all Hermite columns collapse onto low-order monomials.
        let x = chebyshev_nodes(30, [-1.0, 1.0]).unwrap();
        let err = fit_hermitegf(&x, &[1.0; 30], 1e-3, 0.1, [-1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::SingularHermite { .. }), "{err}");
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn qr_with_m_equal_n_matches_direct() {
        let x = chebyshev_nodes(20, [-4.0, 4.0]).unwrap();
        let f = sample(|t| TestFunction::F2.eval_1d(t), &x);
        let eval = uniform_nodes(100, [-4.0, 4.0]).unwrap();
        let direct = fit_hermitegf(&x, &f, 1.0, 0.1, [-4.0, 4.0]).unwrap();
        let qr = fit_hermitegf_qr(&x, &x, &f, 1.0, 0.1, [-4.0, 4.0], 20).unwrap();
        assert_eq!(qr.correction().unwrap(), &DenseMatrix::identity(20));
        let d = max_abs_diff(
            &direct.evaluate(&eval).unwrap(),
            &qr.evaluate(&eval).unwrap(),
        );
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn qr_zero_data_gives_zero_model() {
        let x = chebyshev_nodes(12, [-1.0, 1.0]).unwrap();
        let m = fit_hermitegf_qr(&x, &x, &[0.0; 12], 2.0, 0.3, [-1.0, 1.0], 20).unwrap();
        assert!(m.coeffs().iter().all(|&b| b == 0.0));
        assert!(m.evaluate(&[0.3, -0.7]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn qr_interpolates_and_tracks_direct() {
        let x = chebyshev_nodes(16, [-1.0, 1.0]).unwrap();
        let f = sample(|t| TestFunction::Fu.eval_1d(t), &x);
        let qr = fit_hermitegf_qr(&x, &x, &f, 3.0, 0.2, [-1.0, 1.0], 40).unwrap();
        assert!(max_abs_diff(&qr.evaluate(&x).unwrap(), &f) < 1e-8);
        let lam = qr.correction().unwrap();
        assert_eq!(lam.shape(), (16, 40));
    }

    #[test]
    fn qr_rejects_rank_deficient_setups() {
        let x = [-0.5, 0.0, 0.5];
        assert!(fit_hermitegf_qr(&x, &x, &[1.0; 3], 1.0, 0.1, [-1.0, 1.0], 2).is_err());
        // Coinciding centers make C rank-deficient.
        let centers = [0.2, 0.2, 0.2];
        let err = fit_hermitegf_qr(&centers, &x, &[1.0; 3], 1.0, 0.1, [-1.0, 1.0], 6);
        assert!(err.is_err());
    }

    #[test]
    fn safe_regime_agreement_with_baseline() {
        let x = chebyshev_nodes(14, [-1.0, 1.0]).unwrap();
        let f = sample(|t| (2.0 * t).sin(), &x);
        let eval = uniform_nodes(100, [-1.0, 1.0]).unwrap();
        let a = fit_hermitegf(&x, &f, 3.0, 1.0, [-1.0, 1.0]).unwrap();
        let b = fit_rbf_direct(&x, &x, &f, 1.0).unwrap();
        let d = max_abs_diff(&a.evaluate(&eval).unwrap(), &b.evaluate(&eval).unwrap());
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn flat_limit_stability_sweep() {
        let x = chebyshev_nodes(30, [-4.0, 4.0]).unwrap();
        let f = sample(|t| TestFunction::F2.eval_1d(t), &x);
        let eval = uniform_nodes(100, [-4.0, 4.0]).unwrap();
        let truth = sample(|t| TestFunction::F2.eval_1d(t), &eval);
        for i in 1..=50 {
            let eps = 0.01 * i as f64;
            let m = fit_hermitegf(&x, &f, 1.0, eps, [-4.0, 4.0]).unwrap();
            let e = l2_error(&m.evaluate(&eval).unwrap(), &truth).unwrap();
            assert!(e.is_finite() && e < 1e-6, "eps={eps} err={e}");
            if eps <= 0.05 + 1e-12 {
                match fit_rbf_direct(&x, &x, &f, eps) {
                    Err(_) => {}
                    Ok(b) => {
                        let eb = l2_error(&b.evaluate(&eval).unwrap(), &truth).unwrap();
                        assert!(
                            eb.is_nan() || eb > 1e-2,
                            "baseline unexpectedly accurate at eps={eps}: {eb}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn l2_error_cases() {
        assert_eq!(l2_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(l2_error(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert!(l2_error(&[1.0], &[]).is_err());
        assert_eq!(
            Metric::L2Normalized
                .apply(&[3.0, 4.0, 0.0, 0.0], &[0.0; 4], 1.0)
                .unwrap(),
            2.5
        );
        let h = uniform_cell_volume(&[5], &[[-1.0, 1.0]]);
        assert_eq!(h, 0.5);
        assert_eq!(
            Metric::L2Quadrature
                .apply(&[3.0, 4.0], &[0.0; 2], 0.25)
                .unwrap(),
            2.5
        );
        assert_eq!(
            uniform_cell_volume(&[3, 5], &[[0.0, 2.0], [-1.0, 1.0]]),
            0.5
        );
    }
}
