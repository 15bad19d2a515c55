//! HermiteGF basis functions and the expansion matrices that relate them to
//! Gaussian RBFs.
//!
//! The basis is `H_n(x) = h_n(γx) e^{-ε²x²} / sqrt(2ⁿ n!)`, translated to the
//! interval midpoint `x₀`. A Gaussian centered at `y` expands as
//!
//! ```text
//! e^{-ε²(x-y)²} = exp(ε²y²(ε²/γ² - 1)) Σₙ (ε^{2n} sqrt(2ⁿ) / (γⁿ sqrt(n!))) yⁿ H_n(x)
//! ```
//!
//! which is what [`b_matrix`] tabulates. All factorial and power prefactors are
//! accumulated as running products of consecutive ratios.

use std::f64::consts::PI;

use thiserror::Error;

use crate::linalg::DenseMatrix;

/// Constant in the classical envelope `|h_n(x)| <= c e^{x²/2} 2^{n/2} sqrt(n!)`.
pub const HERMITE_ENVELOPE_CONST: f64 = 1.086435;

/// Largest exponent accepted in the Hermite-function rescaling factor.
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("invalid basis parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "exponential rescaling overflows at |x - x0| = {offset} (gamma*L = {gamma_l}); reduce gamma"
    )]
    Overflow { gamma_l: f64, offset: f64 },
    #[error("d_tilde needs m > n (got n = {n}, m = {m})")]
    TruncationOrder { n: usize, m: usize },
}

/// Parameters of a HermiteGF basis on `[x0 - half_width, x0 + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteGFBasis {
    gamma: f64,
    epsilon: f64,
    x0: f64,
    half_width: f64,
    m_terms: usize,
}

impl HermiteGFBasis {
    pub fn new(
        gamma: f64,
        epsilon: f64,
        x0: f64,
        half_width: f64,
        m_terms: usize,
    ) -> Result<Self, BasisError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(gamma) {
            return Err(BasisError::InvalidParameter(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        if !positive(epsilon) {
            return Err(BasisError::InvalidParameter(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if !positive(half_width) {
            return Err(BasisError::InvalidParameter(format!(
                "half width must be > 0, got {half_width}"
            )));
        }
        if !x0.is_finite() {
            return Err(BasisError::InvalidParameter(format!(
                "x0 must be finite, got {x0}"
            )));
        }
        if m_terms == 0 {
            return Err(BasisError::InvalidParameter("m_terms must be >= 1".into()));
        }
        Ok(Self {
            gamma,
            epsilon,
            x0,
            half_width,
            m_terms,
        })
    }

    /// Basis centered on `[a, b]`: `x0 = (a+b)/2`, `L = (b-a)/2`.
    pub fn for_interval(
        gamma: f64,
        epsilon: f64,
        interval: [f64; 2],
        m_terms: usize,
    ) -> Result<Self, BasisError> {
        let [a, b] = interval;
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(BasisError::InvalidParameter(format!(
                "interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        Self::new(gamma, epsilon, 0.5 * (a + b), 0.5 * (b - a), m_terms)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn m_terms(&self) -> usize {
        self.m_terms
    }

    pub fn with_m_terms(mut self, m_terms: usize) -> Self {
        self.m_terms = m_terms.max(1);
        self
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma * self.half_width
    }

    /// Whether `γL` lies in the empirically good range `[3, 5]`. Advisory only.
    pub fn in_recommended_range(&self) -> bool {
        (3.0..=5.0).contains(&self.gamma_l())
    }

    /// Geometric ratio `q = sqrt(2) ε² L / γ` of the truncation tail.
    pub fn tail_ratio(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.epsilon * self.epsilon * self.half_width / self.gamma
    }

    /// Gaussian prefactor `exp(ε²y²(ε²/γ² - 1))` for a centered offset `y`.
    fn center_prefactor(&self, y: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        (e2 * y * y * (e2 / (self.gamma * self.gamma) - 1.0)).exp()
    }

    /// Ratio `D(n)/D(n-1) = sqrt(2) ε² / (γ sqrt(n))`, without the `L` scaling.
    fn coef_ratio(&self, n: usize) -> f64 {
        std::f64::consts::SQRT_2 * self.epsilon * self.epsilon / (self.gamma * (n as f64).sqrt())
    }

    fn warn_outside(&self, what: &str, values: &[f64]) {
        let slack = 1e-12 * self.half_width.max(1.0);
        let outside = values
            .iter()
            .filter(|&&v| (v - self.x0).abs() > self.half_width + slack)
            .count();
        if outside > 0 {
            log::warn!(
                "{outside} {what} lie outside [{}, {}]",
                self.x0 - self.half_width,
                self.x0 + self.half_width
            );
        }
    }
}

/// Normalized physicists' Hermite polynomials `g_n(x) = h_n(x) / sqrt(2ⁿ n!)`, `n = 0..=n_max`.
pub fn hermite_scaled(n_max: usize, x: f64) -> Vec<f64> {
    three_term(n_max, x, 1.0)
}

/// Hermite functions `ψ_n(x) = g_n(x) π^{-1/4} e^{-x²/2}`, `n = 0..=n_max`.
pub fn hermite_function(n_max: usize, x: f64) -> Vec<f64> {
    three_term(n_max, x, PI.powf(-0.25) * (-0.5 * x * x).exp())
}

/// `v_{n+1} = x sqrt(2/(n+1)) v_n - sqrt(n/(n+1)) v_{n-1}` from `v_0 = start`.
fn three_term(n_max: usize, x: f64, start: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(start);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * start);
    for n in 1..n_max {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// HermiteGF values at one point for `n = 0..m`, through the Hermite functions.
pub(crate) fn hermitegf_row(
    basis: &HermiteGFBasis,
    x: f64,
    m: usize,
) -> Result<Vec<f64>, BasisError> {
    let y = x - basis.x0;
    let s = basis.gamma * y;
    let exponent = 0.5 * s * s - basis.epsilon * basis.epsilon * y * y;
    if 0.5 * s * s > MAX_EXPONENT || exponent > MAX_EXPONENT {
        return Err(BasisError::Overflow {
            gamma_l: basis.gamma_l(),
            offset: y.abs(),
        });
    }
    let scale = PI.powf(0.25) * exponent.exp();
    let mut row = hermite_function(m.saturating_sub(1), s);
    row.truncate(m);
    for v in &mut row {
        *v *= scale;
    }
    Ok(row)
}

/// `P x M` matrix with entry `(p, n) = H_n(x_p - x0)`.
pub fn hermitegf_matrix(basis: &HermiteGFBasis, points: &[f64]) -> Result<DenseMatrix, BasisError> {
    basis.warn_outside("evaluation points", points);
    let m = basis.m_terms;
    let p = points.len();
    let mut data = vec![0.0; p * m];
    for (i, &x) in points.iter().enumerate() {
        let row = hermitegf_row(basis, x, m)?;
        for (n, v) in row.into_iter().enumerate() {
            data[i + n * p] = v;
        }
    }
    DenseMatrix::new(p, m, data).map_err(|_| BasisError::Overflow {
        gamma_l: basis.gamma_l(),
        offset: basis.half_width,
    })
}

/// `M x N` expansion matrix `B` of the Gaussians centered at `centers`.
pub fn b_matrix(basis: &HermiteGFBasis, centers: &[f64]) -> DenseMatrix {
    basis.warn_outside("centers", centers);
    let m = basis.m_terms;
    if m > 200 {
        log::warn!("b_matrix with M = {m}: high-order entries underflow to zero");
    }
    let mut b = DenseMatrix::zeros(m, centers.len());
    for (k, &c) in centers.iter().enumerate() {
        let y = c - basis.x0;
        let col = b.col_mut(k);
        let mut term = basis.center_prefactor(y);
        col[0] = term;
        for (n, slot) in col.iter_mut().enumerate().take(m).skip(1) {
            term *= basis.coef_ratio(n) * y;
            *slot = term;
        }
    }
    b
}

/// `B` split as `B = (C D)^T` with the `L`-scaled QR-friendly factors.
#[derive(Debug, Clone)]
pub struct ExpansionMatrices {
    /// `M x N`.
    pub b: DenseMatrix,
    /// `N x M`, entries `prefactor(y_k) (y_k / L)^n`.
    pub c: DenseMatrix,
    /// Diagonal of `D`, length `M`, entries `D(n) Lⁿ`.
    pub d_diag: Vec<f64>,
}

pub fn cd_matrices(basis: &HermiteGFBasis, centers: &[f64]) -> ExpansionMatrices {
    let m = basis.m_terms;
    let nc = centers.len();
    let l = basis.half_width;
    let mut c = DenseMatrix::zeros(nc, m);
    for (k, &ck) in centers.iter().enumerate() {
        let y = (ck - basis.x0) / l;
        let mut v = basis.center_prefactor(ck - basis.x0);
        c.set(k, 0, v);
        for n in 1..m {
            v *= y;
            c.set(k, n, v);
        }
    }
    let mut d_diag = Vec::with_capacity(m);
    let mut d = 1.0;
    d_diag.push(d);
    for n in 1..m {
        d *= basis.coef_ratio(n) * l;
        d_diag.push(d);
    }
    ExpansionMatrices {
        b: b_matrix(basis, centers),
        c,
        d_diag,
    }
}

/// `N x (M-N)` matrix with entries `D(N+j) / D(i)`, the scaling of the RBF-QR
/// correction block. Built by telescoping ratio products.
pub fn d_tilde(basis: &HermiteGFBasis, n: usize, m: usize) -> Result<DenseMatrix, BasisError> {
    if m <= n {
        return Err(BasisError::TruncationOrder { n, m });
    }
    let l = basis.half_width;
    let ratio = |p: usize| basis.coef_ratio(p) * l;
    let mut out = DenseMatrix::zeros(n, m - n);
    for i in 0..n {
        let mut v: f64 = (i + 1..=n).map(ratio).product();
        out.set(i, 0, v);
        for j in 1..m - n {
            v *= ratio(n + j);
            out.set(i, j, v);
        }
    }
    Ok(out)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Coefficient-free truncation tail `q^M / ((1-q) sqrt(M!))`; `+inf` when `q >= 1`.
pub fn expansion_tail_bound(basis: &HermiteGFBasis) -> f64 {
    let q = basis.tail_ratio();
    if q >= 1.0 {
        return f64::INFINITY;
    }
    let m = basis.m_terms;
    let ln_q_term = if m == 0 { 0.0 } else { m as f64 * q.ln() };
    (ln_q_term - 0.5 * ln_factorial(m) - (1.0 - q).ln()).exp()
}

/// Tail constant `c P₁ P₂` for a single unit-weight Gaussian with center and
/// evaluation point in `[-L, L]`. Multiplying [`expansion_tail_bound`] by this
/// gives a rigorous bound on the pointwise truncation error of one kernel.
pub fn kernel_tail_constant(basis: &HermiteGFBasis) -> f64 {
    let (g, e, l) = (basis.gamma, basis.epsilon, basis.half_width);
    let p1 = ((0.5 * g * g - e * e) * l * l).exp().max(1.0);
    let p2 = (e * e * l * l * (e * e / (g * g) - 1.0)).exp().max(1.0);
    HERMITE_ENVELOPE_CONST * p1 * p2
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    /// Unscaled physicists' Hermite values by the textbook recurrence.
    fn hermite_raw(n_max: usize, x: f64) -> Vec<f64> {
        let mut h = vec![1.0, 2.0 * x];
        for n in 1..n_max {
            h.push(2.0 * x * h[n] - 2.0 * n as f64 * h[n - 1]);
        }
        h.truncate(n_max + 1);
        h
    }

    fn scale_factor(n: usize) -> f64 {
        ((1..=n).map(|k| 2.0 * k as f64).product::<f64>()).sqrt()
    }

    #[test]
    fn scaled_hermite_low_orders() {
        let g = hermite_scaled(2, 3.0);
        assert_eq!(g[0], 1.0);
        assert!(rel(hermite_scaled(1, 1.0)[1], std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!(rel(g[2], 34.0 / 8f64.sqrt()) < 1e-14);
        assert!(rel(g[2], 12.0208152801713) < 1e-12);
        assert_eq!(hermite_scaled(0, 5.0), vec![1.0]);
    }

    #[test]
    fn scaled_hermite_matches_raw_recurrence() {
        for &x in &[-2.5, -0.3, 0.7, 1.9, 4.0] {
            let g = hermite_scaled(30, x);
            let h = hermite_raw(30, x);
            for n in 0..=30 {
                let expected = h[n] / scale_factor(n);
                assert!(
                    (g[n] - expected).abs() <= 1e-11 * expected.abs().max(1.0),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn hermite_function_values() {
        let psi = hermite_function(3, 0.0);
        assert!(rel(psi[0], 0.751125544464943) < 1e-14);
        assert_eq!(psi[1], 0.0);
    }

    #[test]
    fn hermite_function_consistent_with_scaled() {
        for i in 0..=40 {
            let x = -5.0 + 0.25 * i as f64;
            let g = hermite_scaled(50, x);
            let psi = hermite_function(50, x);
            let back = (0.5 * x * x).exp() * PI.powf(0.25);
            for n in 0..=50 {
                if g[n].abs() > 1e-8 {
                    assert!(rel(psi[n] * back, g[n]) < 1e-10, "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn basis_rejects_bad_parameters() {
        assert!(HermiteGFBasis::new(0.0, 0.1, 0.0, 1.0, 5).is_err());
        assert!(HermiteGFBasis::new(1.0, -0.1, 0.0, 1.0, 5).is_err());
        assert!(HermiteGFBasis::new(1.0, 0.1, 0.0, 0.0, 5).is_err());
        assert!(HermiteGFBasis::new(1.0, 0.1, 0.0, 1.0, 0).is_err());
        assert!(HermiteGFBasis::for_interval(1.0, 0.1, [1.0, 1.0], 5).is_err());
        let b = HermiteGFBasis::for_interval(1.0, 0.1, [-4.0, 4.0], 5).unwrap();
        assert_eq!((b.x0(), b.half_width()), (0.0, 4.0));
        assert!(b.in_recommended_range());
        let narrow = HermiteGFBasis::for_interval(1.0, 0.1, [-1.0, 1.0], 5).unwrap();
        assert!(!narrow.in_recommended_range());
    }

    #[test]
    fn hermitegf_matrix_at_midpoint() {
        let basis = HermiteGFBasis::new(1.3, 0.2, 0.5, 2.0, 7).unwrap();
        let h = hermitegf_matrix(&basis, &[0.5]).unwrap();
        let expected = [
            1.0,
            0.0,
            -(0.5f64).sqrt(),
            0.0,
            (3.0f64 / 8.0).sqrt(),
            0.0,
            -(15.0f64 / 48.0).sqrt(),
        ];
        for n in 0..7 {
            assert!((h.get(0, n) - expected[n]).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn hermitegf_matrix_matches_direct_route() {
        let basis = HermiteGFBasis::new(1.0, 0.1, 0.0, 4.0, 11).unwrap();
        let h = hermitegf_matrix(&basis, &[2.0]).unwrap();
        let direct = hermite_scaled(10, 2.0)[10] * (-0.04f64).exp();
        assert!(rel(h.get(0, 10), direct) < 1e-12);

        // Column 0 is the plain Gaussian envelope.
        let pts = [-3.0, -1.0, 0.25, 3.5];
        let h = hermitegf_matrix(&basis, &pts).unwrap();
        for (i, &x) in pts.iter().enumerate() {
            assert!(rel(h.get(i, 0), (-0.01 * x * x).exp()) < 1e-14);
        }
    }

    #[test]
    fn hermitegf_matrix_agrees_with_scaled_hermite_everywhere() {
        for &(gamma, eps) in &[(1.0, 0.1), (3.0, 0.5), (5.0, 1.0)] {
            let basis = HermiteGFBasis::new(gamma, eps, 0.0, 1.0, 40).unwrap();
            let pts: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
            let h = hermitegf_matrix(&basis, &pts).unwrap();
            for (p, &x) in pts.iter().enumerate() {
                let g = hermite_scaled(39, gamma * x);
                let env = (-eps * eps * x * x).exp();
                for n in 0..40 {
                    let direct = g[n] * env;
                    if direct.abs() > 1e-8 {
                        assert!(rel(h.get(p, n), direct) < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn hermitegf_matrix_overflow_is_reported() {
        let basis = HermiteGFBasis::new(60.0, 0.1, 0.0, 1.0, 5).unwrap();
        let err = hermitegf_matrix(&basis, &[1.0]).unwrap_err();
        assert!(matches!(err, BasisError::Overflow { gamma_l, .. } if gamma_l == 60.0));
    }

    #[test]
    fn b_matrix_simple_entries() {
        let basis = HermiteGFBasis::new(1.0, 1.0, 0.0, 1.0, 4).unwrap();
        let b = b_matrix(&basis, &[0.0, 1.0]);
        assert_eq!(b.col(0), &[1.0, 0.0, 0.0, 0.0]);
        assert!((b.get(1, 1) - std::f64::consts::SQRT_2).abs() < 1e-15);

        let basis = HermiteGFBasis::new(1.7, 0.3, 0.0, 1.0, 6).unwrap();
        let centers = [-0.8, 0.1, 0.9];
        let b = b_matrix(&basis, &centers);
        for (k, &y) in centers.iter().enumerate() {
            let pre = (0.09 * y * y * (0.09 / (1.7 * 1.7) - 1.0)).exp();
            assert_eq!(b.get(0, k), pre);
        }
    }

    #[test]
    fn b_matrix_expansion_identity() {
        let basis = HermiteGFBasis::new(1.0, 0.1, 0.0, 4.0, 60).unwrap();
        let centers: Vec<f64> = (0..9).map(|k| -4.0 + k as f64).collect();
        let xs: Vec<f64> = (0..=80).map(|i| -4.0 + 0.1 * i as f64).collect();
        let b = b_matrix(&basis, &centers);
        let h = hermitegf_matrix(&basis, &xs).unwrap();
        let approx = h.matmul(&b).unwrap();
        for (k, &y) in centers.iter().enumerate() {
            for (p, &x) in xs.iter().enumerate() {
                let exact = (-0.01 * (x - y) * (x - y)).exp();
                assert!((approx.get(p, k) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cd_matrices_factor_b() {
        let basis = HermiteGFBasis::new(1.2, 0.4, 0.5, 3.0, 25).unwrap();
        let centers = [0.5, -2.0, 1.1, 3.4];
        let ExpansionMatrices { b, c, d_diag } = cd_matrices(&basis, &centers);
        assert_eq!(d_diag[0], 1.0);
        assert_eq!(c.get(0, 0), 1.0);
        for n in 1..25 {
            assert_eq!(c.get(0, n), 0.0);
        }
        for k in 0..centers.len() {
            for n in 0..25 {
                let cd = c.get(k, n) * d_diag[n];
                let bn = b.get(n, k);
                assert!(
                    (cd - bn).abs() <= 1e-12 * bn.abs().max(1e-300),
                    "k={k} n={n}"
                );
            }
        }
    }

    #[test]
    fn d_tilde_entries() {
        let unit = HermiteGFBasis::new(1.0, 1.0, 0.0, 1.0, 2).unwrap();
        let d = d_tilde(&unit, 1, 2).unwrap();
        assert_eq!(d.shape(), (1, 1));
        assert!((d.get(0, 0) - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(d_tilde(&unit, 3, 3).is_err());

        let basis = HermiteGFBasis::new(1.3, 0.2, 0.0, 4.0, 40).unwrap();
        let (n, m) = (12, 40);
        let dt = d_tilde(&basis, n, m).unwrap();
        let dd = cd_matrices(&basis, &[0.0]).d_diag;
        for i in 0..n {
            for j in 0..m - n {
                let j2 = n + j;
                assert!(rel(dt.get(i, j) * dd[i] / dd[j2], 1.0) < 1e-12);
                if j > 0 {
                    let ratio = dt.get(i, j) / dt.get(i, j - 1);
                    let expected =
                        std::f64::consts::SQRT_2 * 0.04 * 4.0 / (1.3 * (j2 as f64).sqrt());
                    assert!(rel(ratio, expected) < 1e-14);
                }
            }
        }
    }

    /// Truncation tail measured as the sum of the omitted expansion terms.
    fn measured_tail(basis: &HermiteGFBasis, x: f64, y: f64) -> f64 {
        let m = basis.m_terms();
        let wide = basis.with_m_terms(m + 120);
        let b = b_matrix(&wide, &[y]);
        let h = hermitegf_matrix(&wide, &[x]).unwrap();
        (m..m + 120)
            .map(|n| h.get(0, n) * b.get(n, 0))
            .sum::<f64>()
            .abs()
    }

    #[test]
    fn tail_bound_edge_cases() {
        let basis = HermiteGFBasis::new(1.0, 0.1, 0.0, 4.0, 60).unwrap();
        assert!(rel(basis.tail_ratio(), 0.0565685424949238) < 1e-14);
        let wide = HermiteGFBasis::new(0.1, 1.0, 0.0, 4.0, 10).unwrap();
        assert_eq!(expansion_tail_bound(&wide), f64::INFINITY);
        let q = 0.5f64;
        let b = HermiteGFBasis::new(std::f64::consts::SQRT_2 / q, 1.0, 0.0, 1.0, 3).unwrap();
        let expected = q.powi(3) / ((1.0 - q) * 6f64.sqrt());
        assert!(rel(expansion_tail_bound(&b), expected) < 1e-12);
    }

    #[test]
    fn tail_bound_dominates_measured_truncation() {
        let basis = HermiteGFBasis::new(1.0, 0.1, 0.0, 4.0, 60).unwrap();
        let bound = kernel_tail_constant(&basis) * expansion_tail_bound(&basis);
        let mut worst = 0.0f64;
        for i in 0..40 {
            for j in 0..25 {
                let x = -4.0 + 8.0 * i as f64 / 39.0;
                let y = -4.0 + 8.0 * j as f64 / 24.0;
                worst = worst.max(measured_tail(&basis, x, y));
            }
        }
        assert!(
            worst > 0.0 && worst < bound,
            "worst {worst:e} bound {bound:e}"
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn scaled_hermite_envelope(x in -6.0f64..6.0) {
                let env = HERMITE_ENVELOPE_CONST * (0.5 * x * x).exp();
                for g in hermite_scaled(100, x) {
                    prop_assert!(g.abs() <= env);
                }
            }

            #[test]
            fn truncated_expansion_reproduces_gaussian(
                eps in prop::sample::select(vec![0.1, 0.5, 1.0]),
                gamma_l in 1u32..=5,
                x in -1.0f64..1.0,
                y in -1.0f64..1.0,
            ) {
                let basis = HermiteGFBasis::new(gamma_l as f64, eps, 0.0, 1.0, 60).unwrap();
                let exact = (-eps * eps * (x - y) * (x - y)).exp();
                let mut prev = f64::INFINITY;
                for m in [10, 20, 40, 60] {
                    let b = basis.with_m_terms(m);
                    let h = hermitegf_matrix(&b, &[x]).unwrap();
                    let col = b_matrix(&b, &[y]);
                    let approx: f64 = (0..m).map(|n| h.get(0, n) * col.get(n, 0)).sum();
                    let err = (approx - exact).abs();
                    prop_assert!(err <= prev + 4.0 * f64::EPSILON);
                    prev = err;
                }
                prop_assert!(prev < 1e-12, "err {}", prev);
            }
        }
    }
}
