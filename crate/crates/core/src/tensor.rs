//! Tensor-product HermiteGF interpolation.
//!
//! On a grid `X₁ × … × X_d` the interpolation operator factors as
//! `⊗_ℓ H(x_ℓ) H(X_ℓ)⁻¹`, so only the `d` one-dimensional operators are ever
//! stored and they are applied to the data tensor one mode at a time.

use std::time::Instant;

use rayon::prelude::*;

use crate::basis::{hermitegf_matrix, HermiteGFBasis};
use crate::interp1d::check_distinct;
use crate::linalg::{solve_linear, DenseMatrix, LinalgError};
use crate::{Error, PhaseTimes, Result};

/// Assembled Kronecker products larger than this many rows or columns are refused.
pub const KRON_ORACLE_MAX: usize = 10_000;

/// Element count below which mode products run on the calling thread.
const PAR_THRESHOLD: usize = 1 << 14;

/// Dense `d`-way tensor stored first-index-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct NdTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl NdTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if shape.is_empty() {
            return Err(Error::InvalidInput("tensor needs at least one mode".into()));
        }
        if len != data.len() {
            return Err(Error::InvalidInput(format!(
                "shape {shape:?} has {len} entries, data has {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![0.0; len])
    }

    /// Fills the tensor by calling `f` with every multi-index in storage order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (i, &s) in idx.iter_mut().zip(&shape) {
                *i += 1;
                if *i < s {
                    break;
                }
                *i = 0;
            }
        }
        Self::new(shape, data)
    }

    /// Samples `f` on the tensor grid `grids[0] × … × grids[d-1]`.
    pub fn from_grid(grids: &[Vec<f64>], mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; grids.len()];
        Self::from_fn(grids.iter().map(Vec::len).collect(), |idx| {
            for ((xi, &i), g) in x.iter_mut().zip(idx).zip(grids) {
                *xi = g[i];
            }
            f(&x)
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Linear storage offset of a multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len(), "index rank mismatch");
        idx.iter().zip(&self.shape).rev().fold(0, |acc, (&i, &s)| {
            assert!(i < s, "index {i} out of range {s}");
            acc * s + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }
}

/// Contracts `a` (P×N) against mode `mode` of `t`, replacing that extent N by P.
///
/// Each output entry is a dot product summed in ascending `k`, so the result
/// does not depend on how the work is split between threads.
pub fn mode_multiply(t: &NdTensor, a: &DenseMatrix, mode: usize) -> Result<NdTensor> {
    if mode >= t.ndim() {
        return Err(Error::InvalidInput(format!(
            "mode {mode} out of range for a {}-way tensor",
            t.ndim()
        )));
    }
    let n = t.shape[mode];
    if a.cols() != n {
        return Err(LinalgError::Shape {
            expected: format!("Px{n} operator for mode {mode}"),
            rows: a.rows(),
            cols: a.cols(),
        }
        .into());
    }
    let p = a.rows();
    let inner: usize = t.shape[..mode].iter().product();
    let outer: usize = t.shape[mode + 1..].iter().product();
    let mut shape = t.shape.clone();
    shape[mode] = p;
    let mut out = vec![0.0; inner * p * outer];
    if inner == 0 || p == 0 || outer == 0 {
        return NdTensor::new(shape, out);
    }

    // One chunk per (row of a, outer index): `inner` contiguous outputs.
    let fill = |(c, chunk): (usize, &mut [f64])| {
        let (row, o) = (c % p, c / p);
        let src = &t.data[o * inner * n..(o + 1) * inner * n];
        for k in 0..n {
            let w = a.get(row, k);
            let slab = &src[k * inner..(k + 1) * inner];
            for (y, &x) in chunk.iter_mut().zip(slab) {
                *y += w * x;
            }
        }
    };
    if out.len() * n < PAR_THRESHOLD {
        out.chunks_mut(inner).enumerate().for_each(fill);
    } else {
        let min_len = (PAR_THRESHOLD / (inner * n).max(1)).max(1);
        out.par_chunks_mut(inner)
            .enumerate()
            .with_min_len(min_len)
            .for_each(fill);
    }
    NdTensor::new(shape, out)
}

/// Explicitly assembles `A_d ⊗ … ⊗ A_1`, the matrix acting on first-index-fastest vectors.
pub fn kron_assemble(matrices: &[DenseMatrix]) -> Result<DenseMatrix> {
    if matrices.is_empty() {
        return Err(Error::InvalidInput("no matrices to assemble".into()));
    }
    let rows: usize = matrices.iter().map(DenseMatrix::rows).product();
    let cols: usize = matrices.iter().map(DenseMatrix::cols).product();
    if rows > KRON_ORACLE_MAX || cols > KRON_ORACLE_MAX {
        return Err(Error::Guard(format!(
            "Kronecker product {rows}x{cols} exceeds {KRON_ORACLE_MAX} rows or columns"
        )));
    }
    let mut k = DenseMatrix::identity(1);
    for a in matrices {
        // Left-multiplying keeps the first matrix on the fastest index.
        k = DenseMatrix::from_fn(a.rows() * k.rows(), a.cols() * k.cols(), |i, j| {
            a.get(i / k.rows(), j / k.cols()) * k.get(i % k.rows(), j % k.cols())
        })?;
    }
    Ok(k)
}

/// Multiplies `vec` by the assembled Kronecker product. Test oracle only.
pub fn kron_oracle(matrices: &[DenseMatrix], vec: &[f64]) -> Result<Vec<f64>> {
    Ok(kron_assemble(matrices)?.matvec(vec)?)
}

/// Work counters from one application of a [`TensorInterpolant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ApplyStats {
    /// Entries held by the per-dimension operators.
    pub operator_entries: usize,
    /// Largest tensor produced along the way, input included.
    pub max_intermediate: usize,
    /// Largest number of entries alive at once (operators plus tensors).
    pub peak_live_entries: usize,
}

/// Per-dimension operators `T_ℓ = H(x_ℓ) H(X_ℓ)⁻¹` for a tensor grid.
#[derive(Debug, Clone)]
pub struct TensorInterpolant {
    bases: Vec<HermiteGFBasis>,
    per_dim_ops: Vec<DenseMatrix>,
    build_time: std::time::Duration,
}

impl TensorInterpolant {
    /// Builds `T_ℓ` for every dimension by solving `H(X_ℓ)ᵀ Tᵀ = H(x_ℓ)ᵀ`.
    ///
    /// `gamma` is shared; `epsilons` may differ per dimension.
    pub fn new(
        colloc_grids: &[Vec<f64>],
        eval_grids: &[Vec<f64>],
        gamma: f64,
        epsilons: &[f64],
        intervals: &[[f64; 2]],
    ) -> Result<Self> {
        let d = colloc_grids.len();
        if d == 0 {
            return Err(Error::InvalidInput("need at least one dimension".into()));
        }
        if eval_grids.len() != d || epsilons.len() != d || intervals.len() != d {
            return Err(Error::InvalidInput(format!(
                "{d} collocation grids but {} evaluation grids, {} epsilons, {} intervals",
                eval_grids.len(),
                epsilons.len(),
                intervals.len()
            )));
        }
        let start = Instant::now();
        let mut bases = Vec::with_capacity(d);
        let mut per_dim_ops = Vec::with_capacity(d);
        for dim in 0..d {
            let in_dim = |e: Error| Error::SingularDimension {
                dim,
                source: Box::new(e),
            };
            let colloc = &colloc_grids[dim];
            if colloc.is_empty() || colloc.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "collocation grid {dim} is empty or not finite"
                )));
            }
            check_distinct(colloc)?;
            let basis =
                HermiteGFBasis::for_interval(gamma, epsilons[dim], intervals[dim], colloc.len())?;
            let h = hermitegf_matrix(&basis, colloc)?;
            let e = hermitegf_matrix(&basis, &eval_grids[dim])?;
            let t = solve_linear(&h.transpose(), &e.transpose()).map_err(|err| match err {
                LinalgError::Singular { pivot, index } => in_dim(Error::SingularHermite {
                    gamma_l: basis.gamma_l(),
                    pivot,
                    index,
                }),
                other => other.into(),
            })?;
            per_dim_ops.push(t.transpose());
            bases.push(basis);
        }
        Ok(Self {
            bases,
            per_dim_ops,
            build_time: start.elapsed(),
        })
    }

    pub fn dims(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[HermiteGFBasis] {
        &self.bases
    }

    pub fn per_dim_ops(&self) -> &[DenseMatrix] {
        &self.per_dim_ops
    }

    /// `Σ_ℓ P_ℓ N_ℓ`.
    pub fn stored_operator_entries(&self) -> usize {
        self.per_dim_ops.iter().map(|t| t.rows() * t.cols()).sum()
    }

    fn check_values(&self, values: &NdTensor) -> Result<()> {
        let expected: Vec<usize> = self.per_dim_ops.iter().map(DenseMatrix::cols).collect();
        if values.shape() != expected.as_slice() {
            return Err(Error::InvalidInput(format!(
                "values shape {:?} does not match collocation grid {expected:?}",
                values.shape()
            )));
        }
        Ok(())
    }

    /// Applies the operators mode-wise in ascending order.
    pub fn apply(&self, values: &NdTensor) -> Result<NdTensor> {
        self.apply_with_stats(values).map(|(t, _)| t)
    }

    pub fn apply_with_stats(&self, values: &NdTensor) -> Result<(NdTensor, ApplyStats)> {
        self.check_values(values)?;
        let operator_entries = self.stored_operator_entries();
        let mut stats = ApplyStats {
            operator_entries,
            max_intermediate: values.len(),
            peak_live_entries: operator_entries + values.len(),
        };
        let mut cur = mode_multiply(values, &self.per_dim_ops[0], 0)?;
        stats.record(values.len(), cur.len());
        for (mode, t) in self.per_dim_ops.iter().enumerate().skip(1) {
            let next = mode_multiply(&cur, t, mode)?;
            stats.record(cur.len(), next.len());
            cur = next;
        }
        Ok((cur, stats))
    }

    /// Timed application: operator construction and mode-wise application.
    pub fn apply_timed(&self, values: &NdTensor) -> Result<(NdTensor, PhaseTimes)> {
        let start = Instant::now();
        let out = self.apply(values)?;
        Ok((out, PhaseTimes::new(self.build_time, start.elapsed())))
    }

    /// Treats row `p` of every operator as the coordinates of one scattered
    /// point and returns `Σ_k Π_ℓ T_ℓ[p, k_ℓ] f_k` for each `p`.
    ///
    /// All operators must have the same number of rows.
    pub fn apply_scattered(&self, values: &NdTensor) -> Result<Vec<f64>> {
        self.check_values(values)?;
        let p = self.per_dim_ops[0].rows();
        if self.per_dim_ops.iter().any(|t| t.rows() != p) {
            return Err(Error::InvalidInput(
                "scattered evaluation needs one coordinate per point in every dimension".into(),
            ));
        }
        let contract = |row: usize| {
            let mut cur = values.data().to_vec();
            for t in self.per_dim_ops.iter().rev() {
                let n = t.cols();
                let inner = cur.len() / n;
                let mut next = vec![0.0; inner];
                for k in 0..n {
                    let w = t.get(row, k);
                    for (y, &x) in next.iter_mut().zip(&cur[k * inner..(k + 1) * inner]) {
                        *y += w * x;
                    }
                }
                cur = next;
            }
            cur[0]
        };
        Ok((0..p).into_par_iter().map(contract).collect())
    }
}

impl ApplyStats {
    fn record(&mut self, input: usize, output: usize) {
        self.max_intermediate = self.max_intermediate.max(output);
        self.peak_live_entries = self
            .peak_live_entries
            .max(self.operator_entries + input + output);
    }
}

/// Interpolates grid data and evaluates on another tensor grid.
pub fn fit_eval_tensor(
    colloc_grids: &[Vec<f64>],
    values: &NdTensor,
    eval_grids: &[Vec<f64>],
    gamma: f64,
    epsilons: &[f64],
    intervals: &[[f64; 2]],
) -> Result<NdTensor> {
    TensorInterpolant::new(colloc_grids, eval_grids, gamma, epsilons, intervals)?.apply(values)
}

/// Interpolates grid data and evaluates at scattered points (each of length `d`).
pub fn eval_tensor_scattered(
    colloc_grids: &[Vec<f64>],
    values: &NdTensor,
    points: &[Vec<f64>],
    gamma: f64,
    epsilons: &[f64],
    intervals: &[[f64; 2]],
) -> Result<Vec<f64>> {
    let d = colloc_grids.len();
    if let Some(bad) = points.iter().find(|x| x.len() != d) {
        return Err(Error::InvalidInput(format!(
            "point of dimension {} in a {d}-dimensional interpolant",
            bad.len()
        )));
    }
    let coords: Vec<Vec<f64>> = (0..d)
        .map(|l| points.iter().map(|x| x[l]).collect())
        .collect();
    TensorInterpolant::new(colloc_grids, &coords, gamma, epsilons, intervals)?
        .apply_scattered(values)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::grids::{chebyshev_nodes, uniform_nodes, TestFunction};
    use crate::interp1d::fit_hermitegf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    fn random_tensor(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> NdTensor {
        NdTensor::from_fn(shape, |_| rng.gen_range(-1.0..1.0)).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn tensor_layout_is_first_index_fastest() {
        let t = NdTensor::from_fn(vec![2, 3], |i| (10 * i[0] + i[1]) as f64).unwrap();
        assert_eq!(t.data(), &[0.0, 10.0, 1.0, 11.0, 2.0, 12.0]);
        assert_eq!(t.get(&[1, 2]), 12.0);
        assert!(NdTensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(NdTensor::new(vec![], vec![]).is_err());
    }

    #[test]
    fn identity_mode_product_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_tensor(&mut rng, vec![3, 4, 2]);
        for mode in 0..3 {
            let id = DenseMatrix::identity(t.shape()[mode]);
            assert_eq!(mode_multiply(&t, &id, mode).unwrap(), t);
        }
    }

    #[test]
    fn one_dimensional_mode_product_is_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 5, 4);
        let t = random_tensor(&mut rng, vec![4]);
        let out = mode_multiply(&t, &a, 0).unwrap();
        assert_eq!(out.shape(), &[5]);
        assert!(max_abs_diff(out.data(), &a.matvec(t.data()).unwrap()) < 1e-15);
    }

    #[test]
    fn mode_product_rejects_bad_shapes() {
        let t = NdTensor::zeros(vec![3, 4]).unwrap();
        assert!(mode_multiply(&t, &DenseMatrix::zeros(2, 3), 1).is_err());
        assert!(mode_multiply(&t, &DenseMatrix::zeros(2, 3), 2).is_err());
    }

    #[test]
    fn mode_products_match_kronecker_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a1 = random_matrix(&mut rng, 3, 3);
        let a2 = random_matrix(&mut rng, 2, 2);
        let t = random_tensor(&mut rng, vec![3, 2]);
        let s = mode_multiply(&mode_multiply(&t, &a1, 0).unwrap(), &a2, 1).unwrap();
        let k = kron_oracle(&[a1, a2], t.data()).unwrap();
        assert!(max_abs_diff(s.data(), &k) < 1e-13);
    }

    #[test]
    fn kron_oracle_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(&mut rng, 4, 3);
        let v = [0.5, -1.0, 2.0];
        assert_eq!(
            kron_oracle(std::slice::from_ref(&a), &v).unwrap(),
            a.matvec(&v).unwrap()
        );
        let w: Vec<f64> = (0..6).map(f64::from).collect();
        let id = [DenseMatrix::identity(2), DenseMatrix::identity(3)];
        assert_eq!(kron_oracle(&id, &w).unwrap(), w);
    }

    #[test]
    fn kron_oracle_size_guard() {
        let big = [DenseMatrix::zeros(200, 1), DenseMatrix::zeros(51, 1)];
        assert!(matches!(kron_assemble(&big), Err(Error::Guard(_))));
    }

    #[test]
    fn mode_products_commute_across_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tensor(&mut rng, vec![6, 5, 4]);
        let a = random_matrix(&mut rng, 7, 6);
        let b = random_matrix(&mut rng, 3, 4);
        let ab = mode_multiply(&mode_multiply(&t, &a, 0).unwrap(), &b, 2).unwrap();
        let ba = mode_multiply(&mode_multiply(&t, &b, 2).unwrap(), &a, 0).unwrap();
        let scale = ab.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_abs_diff(ab.data(), ba.data()) <= 1e-12 * scale);
    }

    #[test]
    fn parallel_mode_product_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = random_tensor(&mut rng, vec![40, 40, 30]);
        let a = random_matrix(&mut rng, 35, 40);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| [0, 1].map(|m| mode_multiply(&t, &a, m).unwrap()))
        };
        let (one, four) = (run(1), run(4));
        for (x, y) in one.iter().zip(&four) {
            assert!(x
                .data()
                .iter()
                .zip(y.data())
                .all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    fn kron_dense_interp(
        colloc: &[Vec<f64>],
        eval: &[Vec<f64>],
        values: &NdTensor,
        gamma: f64,
        eps: f64,
        interval: [f64; 2],
    ) -> Vec<f64> {
        let mut hc = Vec::new();
        let mut he = Vec::new();
        for (c, e) in colloc.iter().zip(eval) {
            let basis = HermiteGFBasis::for_interval(gamma, eps, interval, c.len()).unwrap();
            hc.push(hermitegf_matrix(&basis, c).unwrap());
            he.push(hermitegf_matrix(&basis, e).unwrap());
        }
        let k = kron_assemble(&hc).unwrap();
        let coef = solve_linear(&k, &DenseMatrix::column(values.data()).unwrap()).unwrap();
        kron_oracle(&he, coef.as_slice()).unwrap()
    }

    #[test]
    fn fit_eval_matches_dense_kronecker_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (d, n, tol) in [(1, 6, 1e-12), (2, 8, 1e-12), (3, 5, 1e-11), (3, 6, 1e-11)] {
            let colloc = vec![chebyshev_nodes(n, [-1.0, 1.0]).unwrap(); d];
            let eval = vec![uniform_nodes(n + 3, [-1.0, 1.0]).unwrap(); d];
            let (a, b): (Vec<f64>, Vec<f64>) = (0..d)
                .map(|_| (rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)))
                .unzip();
            let values = NdTensor::from_grid(&colloc, |x| {
                x.iter()
                    .zip(&a)
                    .zip(&b)
                    .map(|((x, a), b)| (a * x + b).sin())
                    .sum()
            })
            .unwrap();
            let s = fit_eval_tensor(
                &colloc,
                &values,
                &eval,
                3.0,
                &vec![0.1; d],
                &vec![[-1.0, 1.0]; d],
            )
            .unwrap();
            let k = kron_dense_interp(&colloc, &eval, &values, 3.0, 0.1, [-1.0, 1.0]);
            let err = max_abs_diff(s.data(), &k);
            assert!(err < tol, "d={d} n={n}: {err:e}");
        }
    }

    #[test]
    fn separable_data_gives_outer_product() {
        let cx = chebyshev_nodes(12, [-1.0, 1.0]).unwrap();
        let cy = chebyshev_nodes(9, [-2.0, 2.0]).unwrap();
        let ex = uniform_nodes(15, [-1.0, 1.0]).unwrap();
        let ey = uniform_nodes(11, [-2.0, 2.0]).unwrap();
        let g = |x: f64| (2.0 * x).cos() + 0.3;
        let h = |y: f64| (0.5 * y).exp();
        let colloc = vec![cx.clone(), cy.clone()];
        let values = NdTensor::from_grid(&colloc, |x| g(x[0]) * h(x[1])).unwrap();
        let eps = [0.1, 0.3];
        let s = fit_eval_tensor(
            &colloc,
            &values,
            &[ex.clone(), ey.clone()],
            3.0,
            &eps,
            &[[-1.0, 1.0], [-2.0, 2.0]],
        )
        .unwrap();
        let gx: Vec<f64> = cx.iter().map(|&x| g(x)).collect();
        let hy: Vec<f64> = cy.iter().map(|&y| h(y)).collect();
        let sx = fit_hermitegf(&cx, &gx, 3.0, 0.1, [-1.0, 1.0])
            .unwrap()
            .evaluate(&ex)
            .unwrap();
        let sy = fit_hermitegf(&cy, &hy, 3.0, 0.3, [-2.0, 2.0])
            .unwrap()
            .evaluate(&ey)
            .unwrap();
        for j in 0..ey.len() {
            for i in 0..ex.len() {
                let want = sx[i] * sy[j];
                let got = s.get(&[i, j]);
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "{got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn constant_data_reproduced() {
        let colloc = vec![chebyshev_nodes(10, [-1.0, 1.0]).unwrap(); 2];
        let eval = vec![uniform_nodes(13, [-1.0, 1.0]).unwrap(); 2];
        let values = NdTensor::from_grid(&colloc, |_| 2.0).unwrap();
        let s =
            fit_eval_tensor(&colloc, &values, &eval, 4.0, &[0.1, 0.1], &[[-1.0, 1.0]; 2]).unwrap();
        assert!(s.data().iter().all(|v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn singular_dimension_is_named() {
        let colloc = vec![vec![0.0], chebyshev_nodes(30, [-1.0, 1.0]).unwrap()];
        let values = NdTensor::zeros(vec![1, 30]).unwrap();
        let err = fit_eval_tensor(
            &colloc,
            &values,
            &colloc,
            1e-3,
            &[0.1, 0.1],
            &[[-1.0, 1.0]; 2],
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::SingularDimension { dim: 1, .. }),
            "{err}"
        );
        assert!(err.to_string().contains("dimension 1"));
    }

    #[test]
    fn operator_memory_is_sum_not_product() {
        let colloc: Vec<Vec<f64>> = [7, 5, 6]
            .iter()
            .map(|&n| chebyshev_nodes(n, [-1.0, 1.0]).unwrap())
            .collect();
        let eval: Vec<Vec<f64>> = [9, 4, 8]
            .iter()
            .map(|&n| uniform_nodes(n, [-1.0, 1.0]).unwrap())
            .collect();
        let ti = TensorInterpolant::new(&colloc, &eval, 3.0, &[0.1; 3], &[[-1.0, 1.0]; 3]).unwrap();
        assert_eq!(ti.stored_operator_entries(), 9 * 7 + 4 * 5 + 8 * 6);
        let values = NdTensor::from_grid(&colloc, |x| x.iter().sum::<f64>().cos()).unwrap();
        let (out, stats) = ti.apply_with_stats(&values).unwrap();
        assert_eq!(out.shape(), &[9, 4, 8]);
        assert!(stats.peak_live_entries <= stats.operator_entries + 2 * stats.max_intermediate);
        assert_eq!(stats.max_intermediate, 9 * 4 * 8);
    }

    #[test]
    fn scattered_evaluation_matches_grid() {
        let colloc = vec![chebyshev_nodes(8, [-1.0, 1.0]).unwrap(); 2];
        let values = NdTensor::from_grid(&colloc, |x| TestFunction::F3.eval(x).unwrap()).unwrap();
        let eval = vec![uniform_nodes(5, [-1.0, 1.0]).unwrap(); 2];
        let grid =
            fit_eval_tensor(&colloc, &values, &eval, 3.0, &[0.1; 2], &[[-1.0, 1.0]; 2]).unwrap();
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![eval[0][i], eval[1][(i + 2) % 5]])
            .collect();
        let s = eval_tensor_scattered(&colloc, &values, &pts, 3.0, &[0.1; 2], &[[-1.0, 1.0]; 2])
            .unwrap();
        for (i, v) in s.iter().enumerate() {
            assert!((v - grid.get(&[i, (i + 2) % 5])).abs() < 1e-12);
        }
    }

    #[test]
    fn f3_error_decays_in_every_dimension() {
        for d in 1..=3 {
            let err = |n: usize| {
                let colloc = vec![chebyshev_nodes(n, [-1.0, 1.0]).unwrap(); d];
                let eval =
                    vec![uniform_nodes(if d == 3 { 20 } else { 40 }, [-1.0, 1.0]).unwrap(); d];
                let values =
                    NdTensor::from_grid(&colloc, |x| TestFunction::F3.eval(x).unwrap()).unwrap();
                let truth =
                    NdTensor::from_grid(&eval, |x| TestFunction::F3.eval(x).unwrap()).unwrap();
                let s = fit_eval_tensor(
                    &colloc,
                    &values,
                    &eval,
                    3.0,
                    &vec![0.1; d],
                    &vec![[-1.0, 1.0]; d],
                )
                .unwrap();
                crate::interp1d::l2_error(s.data(), truth.data()).unwrap()
            };
            let (e5, e25) = (err(5), err(25));
            assert!(e25 <= 1e-4 * e5, "d={d}: {e5:e} -> {e25:e}");
        }
    }
}
