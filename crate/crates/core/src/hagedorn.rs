//! Anisotropic Gaussians `exp(-(x-c)ᵀE(x-c))` through the HagedornGF expansion.
//!
//! With `t = E c` the Gaussian expands as
//!
//! ```text
//! exp(-cᵀEc + tᵀt) Σ_ℓ t^ℓ/ℓ! h_ℓ(x) exp(-xᵀEx)
//! ```
//!
//! where `h_ℓ` is a tensor product of physicists' Hermite polynomials. The
//! interpolant works directly with the basis `g_ℓ(x) exp(-xᵀEx)` over the first
//! `N` multi-indices in graded lexicographic order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::basis::hermite_scaled;
use crate::linalg::{solve_linear, DenseMatrix, LinalgError};
use crate::{Error, Result};

/// Largest `degree_cap` accepted by [`hagedorn_expansion`].
pub const MAX_DEGREE_CAP: usize = 60;

/// Largest number of multi-indices [`hagedorn_poly`] will enumerate (all `|ℓ| ≤ 30` for `d = 3`).
pub const MAX_POLY_INDICES: usize = 5456;

const SYMMETRY_TOL: f64 = 1e-14;

/// Multi-index ordered by total degree, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    fn shifted(&self, j: usize, up: bool) -> Self {
        let mut e = self.0.clone();
        if up {
            e[j] += 1;
        } else {
            e[j] -= 1;
        }
        Self(e)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of total degree `k` in `d` variables, lexicographically ascending.
fn level(d: usize, k: usize, out: &mut Vec<MultiIndex>) {
    fn rec(prefix: &mut Vec<usize>, d: usize, left: usize, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == d {
            prefix.push(left);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in 0..=left {
            prefix.push(a);
            rec(prefix, d, left - a, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(d), d, k, out);
}

/// The first `n` multi-indices in `d` variables in graded lexicographic order.
pub fn multiindex_sequence(d: usize, n: usize) -> Result<Vec<MultiIndex>> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "multi-index sequence needs d >= 1 and n >= 1, got d={d}, n={n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while out.len() < n {
        level(d, k, &mut out);
        k += 1;
    }
    out.truncate(n);
    Ok(out)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Symmetric positive definite shape matrix `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMatrix {
    e: DenseMatrix,
}

impl ShapeMatrix {
    /// Validates symmetry and positive definiteness (all Cholesky pivots positive).
    pub fn new(e: DenseMatrix) -> Result<Self> {
        check_symmetric(&e)?;
        let d = e.rows();
        if d == 0 {
            return Err(Error::ShapeMatrix("empty matrix".into()));
        }
        let mut l = vec![0.0; d * d];
        for j in 0..d {
            let s: f64 = (0..j).map(|k| l[j + k * d] * l[j + k * d]).sum();
            let pivot = e.get(j, j) - s;
            if pivot.is_nan() || pivot <= 0.0 {
                return Err(Error::ShapeMatrix(format!(
                    "not positive definite: Cholesky pivot {pivot:e} at {j}"
                )));
            }
            let ljj = pivot.sqrt();
            l[j + j * d] = ljj;
            for i in j + 1..d {
                let s: f64 = (0..j).map(|k| l[i + k * d] * l[j + k * d]).sum();
                l[i + j * d] = (e.get(i, j) - s) / ljj;
            }
        }
        Ok(Self { e })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?)
    }

    /// `ε² Id`, the shape matrix of the tensor-product Gaussians.
    pub fn isotropic(d: usize, epsilon: f64) -> Result<Self> {
        if d == 0 || !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::ShapeMatrix(format!(
                "isotropic shape needs d >= 1 and epsilon > 0, got d={d}, epsilon={epsilon}"
            )));
        }
        Self::new(DenseMatrix::identity(d).scale(epsilon * epsilon))
    }

    /// `[[ε², ξ²], [ξ², ε²]]` with `0 <= ξ < ε < 1`.
    pub fn test_family(epsilon: f64, xi: f64) -> Result<Self> {
        if !(0.0 <= xi && xi < epsilon && epsilon < 1.0) {
            return Err(Error::ShapeMatrix(format!(
                "need 0 <= xi < epsilon < 1, got epsilon={epsilon}, xi={xi}"
            )));
        }
        let (e2, x2) = (epsilon * epsilon, xi * xi);
        Self::from_rows(&[vec![e2, x2], vec![x2, e2]])
    }

    pub fn dim(&self) -> usize {
        self.e.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.e
    }

    /// `E x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.e.matvec(x).expect("dimension checked by caller")
    }

    /// `xᵀ E x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

fn check_symmetric(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::ShapeMatrix(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    for i in 0..m.rows() {
        for j in 0..i {
            if (m.get(i, j) - m.get(j, i)).abs() > SYMMETRY_TOL {
                return Err(Error::ShapeMatrix(format!("not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

fn check_dim(what: &str, x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::InvalidInput(format!(
            "{what} has dimension {}, expected {d}",
            x.len()
        )));
    }
    Ok(())
}

/// Generalized Hagedorn polynomials `q_ℓ^M(x)` for all `|ℓ| <= l_max`.
///
/// Uses `q_{ℓ+e_j} = 2x_j q_ℓ - 2 Σ_i M_{ji} ℓ_i q_{ℓ-e_i}` with `q_0 = 1`, always
/// stepping from the lexicographically smallest parent.
pub fn hagedorn_poly(
    m: &DenseMatrix,
    l_max: usize,
    x: &[f64],
) -> Result<BTreeMap<MultiIndex, f64>> {
    check_symmetric(m)?;
    let d = m.rows();
    check_dim("point", x, d)?;
    let count = binomial(l_max + d, d);
    if count > MAX_POLY_INDICES {
        return Err(Error::Guard(format!(
            "{count} multi-indices for degree {l_max} in {d} dimensions exceeds {MAX_POLY_INDICES}"
        )));
    }
    let mut q = BTreeMap::new();
    q.insert(MultiIndex::zero(d), 1.0);
    let step = |q: &BTreeMap<MultiIndex, f64>, parent: &MultiIndex, j: usize| -> f64 {
        let mut v = 2.0 * x[j] * q[parent];
        for i in 0..d {
            let li = parent.0[i];
            if li > 0 {
                v -= 2.0 * m.get(j, i) * li as f64 * q[&parent.shifted(i, false)];
            }
        }
        v
    };
    let mut lvl = Vec::new();
    for k in 1..=l_max {
        lvl.clear();
        level(d, k, &mut lvl);
        for idx in &lvl {
            let j = idx.0.iter().position(|&v| v > 0).expect("degree >= 1");
            let parent = idx.shifted(j, false);
            let v = step(&q, &parent, j);
            #[cfg(debug_assertions)]
            for jj in j + 1..d {
                if idx.0[jj] > 0 {
                    let alt = step(&q, &idx.shifted(jj, false), jj);
                    debug_assert!(
                        (alt - v).abs() <= 1e-9 * v.abs().max(1.0),
                        "parents disagree at {idx}: {v} vs {alt}"
                    );
                }
            }
            q.insert(idx.clone(), v);
        }
    }
    Ok(q)
}

/// `exp(-(x-c)ᵀE(x-c))` evaluated directly.
pub fn aniso_gaussian(e: &ShapeMatrix, center: &[f64], x: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    (-e.quad(&diff)).exp()
}

/// Truncated HagedornGF expansion of `exp(-(x-c)ᵀE(x-c))` over `|ℓ| <= degree_cap`.
///
/// Each term is formed as `Π_j t_j^{ℓ_j} sqrt(2^{ℓ_j}/ℓ_j!) g_{ℓ_j}(x_j)`, which
/// equals `t^ℓ/ℓ! h_ℓ(x)` without forming factorials.
pub fn hagedorn_expansion(
    e: &ShapeMatrix,
    center: &[f64],
    x: &[f64],
    degree_cap: usize,
) -> Result<f64> {
    let d = e.dim();
    check_dim("center", center, d)?;
    check_dim("point", x, d)?;
    if degree_cap > MAX_DEGREE_CAP {
        return Err(Error::Guard(format!(
            "degree cap {degree_cap} exceeds {MAX_DEGREE_CAP}"
        )));
    }
    let t = e.apply(center);
    // by_degree[k] = sum of products over the dimensions seen so far with total degree k.
    let mut by_degree = vec![0.0; degree_cap + 1];
    by_degree[0] = 1.0;
    for (&tj, &xj) in t.iter().zip(x) {
        let g = hermite_scaled(degree_cap, xj);
        let mut coef = 1.0;
        let factors: Vec<f64> = g
            .iter()
            .enumerate()
            .map(|(n, gn)| {
                if n > 0 {
                    coef *= tj * (2.0 / n as f64).sqrt();
                }
                coef * gn
            })
            .collect();
        let mut next = vec![0.0; degree_cap + 1];
        for (k, &acc) in by_degree.iter().enumerate() {
            for (n, &f) in factors[..=degree_cap - k].iter().enumerate() {
                next[k + n] += acc * f;
            }
        }
        by_degree = next;
    }
    let sum: f64 = by_degree.iter().sum();
    let tt: f64 = t.iter().map(|v| v * v).sum();
    Ok((-e.quad(center) + tt - e.quad(x)).exp() * sum)
}

/// Anisotropic interpolant in the basis `g_ℓ(x) exp(-xᵀEx)`.
#[derive(Debug, Clone)]
pub struct AnisoInterpolant {
    e: ShapeMatrix,
    nodes: Vec<Vec<f64>>,
    indices: Vec<MultiIndex>,
    coeffs: Vec<f64>,
}

impl AnisoInterpolant {
    pub fn shape(&self) -> &ShapeMatrix {
        &self.e
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Basis values at `x`, one per multi-index.
    fn basis_row(&self, x: &[f64]) -> Vec<f64> {
        aniso_basis_row(&self.e, &self.indices, x)
    }
}

fn aniso_basis_row(e: &ShapeMatrix, indices: &[MultiIndex], x: &[f64]) -> Vec<f64> {
    let top = indices.iter().map(MultiIndex::degree).max().unwrap_or(0);
    let g: Vec<Vec<f64>> = x.iter().map(|&xj| hermite_scaled(top, xj)).collect();
    let w = (-e.quad(x)).exp();
    indices
        .iter()
        .map(|l| w * l.0.iter().zip(&g).map(|(&n, gj)| gj[n]).product::<f64>())
        .collect()
}

/// Collocation fit with the first `N` graded-lex basis functions, `N = nodes.len()`.
pub fn fit_aniso(e: &ShapeMatrix, nodes: &[Vec<f64>], values: &[f64]) -> Result<AnisoInterpolant> {
    let n = nodes.len();
    let d = e.dim();
    if n == 0 {
        return Err(Error::InvalidInput("need at least one node".into()));
    }
    if values.len() != n {
        return Err(Error::InvalidInput(format!(
            "{n} nodes but {} values",
            values.len()
        )));
    }
    for x in nodes {
        check_dim("node", x, d)?;
    }
    if nodes.iter().flatten().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite node or value".into()));
    }
    let mut sorted: Vec<&Vec<f64>> = nodes.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput(format!("duplicate node {:?}", w[0])));
    }
    let indices = multiindex_sequence(d, n)?;
    let rows: Vec<Vec<f64>> = nodes
        .iter()
        .map(|x| aniso_basis_row(e, &indices, x))
        .collect();
    let psi = DenseMatrix::from_rows(&rows)?;
    let c = solve_linear(&psi, &DenseMatrix::column(values)?).map_err(|err| match err {
        LinalgError::Singular { pivot, .. } => Error::SingularAniso { pivot },
        other => other.into(),
    })?;
    Ok(AnisoInterpolant {
        e: e.clone(),
        nodes: nodes.to_vec(),
        indices,
        coeffs: c.into_vec(),
    })
}

/// `Σ_ℓ c_ℓ g_ℓ(x) exp(-xᵀEx)` at each point.
pub fn evaluate_aniso(model: &AnisoInterpolant, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = model.e.dim();
    for x in points {
        check_dim("point", x, d)?;
    }
    Ok(points
        .par_iter()
        .map(|x| {
            model
                .basis_row(x)
                .iter()
                .zip(&model.coeffs)
                .map(|(b, c)| b * c)
                .sum()
        })
        .collect())
}
