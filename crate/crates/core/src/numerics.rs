//! Hermitian linear algebra used by every other module: a sparse Hermitian
//! operator, a dense eigensolver, an iterative lowest-eigenpair solver and a
//! Krylov propagator for `exp(-iHt)`.
//!
//! All routines are pure functions of their inputs.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Largest dimension accepted by [`eigensystem_dense`].
pub const DENSE_CUTOFF: usize = 4096;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Accumulates matrix elements of a Hermitian operator.
///
/// Only the upper triangle is stored; [`OperatorBuilder::add`] at `(r, c)`
/// implies the conjugate entry at `(c, r)`, so the result is Hermitian by
/// construction.
#[derive(Clone, Debug)]
pub struct OperatorBuilder {
    dim: usize,
    upper: BTreeMap<(usize, usize), C64>,
}

impl OperatorBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, upper: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value |row><col| + conj(value) |col><row|`. On the diagonal only
    /// the real part is kept.
    pub fn add(&mut self, row: usize, col: usize, value: C64) {
        assert!(row < self.dim && col < self.dim, "index out of range");
        let (key, v) = match row.cmp(&col) {
            std::cmp::Ordering::Less => ((row, col), value),
            std::cmp::Ordering::Greater => ((col, row), value.conj()),
            std::cmp::Ordering::Equal => ((row, row), C64::new(value.re, 0.0)),
        };
        *self.upper.entry(key).or_insert(ZERO) += v;
    }

    pub fn add_real(&mut self, row: usize, col: usize, value: f64) {
        self.add(row, col, C64::new(value, 0.0));
    }

    pub fn build(self) -> HermitianOperator {
        let dim = self.dim;
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for ((r, c), v) in self.upper {
            if v == ZERO {
                continue;
            }
            rows[r].push((c, v));
            if r != c {
                rows[c].push((r, v.conj()));
            }
        }
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        HermitianOperator { dim, indptr, indices, values }
    }
}

/// Sparse Hermitian matrix in compressed-row form (both triangles present).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl HermitianOperator {
    pub fn zero(dim: usize) -> Self {
        OperatorBuilder::new(dim).build()
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut b = OperatorBuilder::new(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            b.add_real(i, i, d);
        }
        b.build()
    }

    /// Builds an operator from the upper triangle of a dense matrix. Entries
    /// with magnitude at most `drop_tol` are discarded.
    pub fn from_dense_upper(m: &DMatrix<C64>, drop_tol: f64) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut b = OperatorBuilder::new(m.nrows());
        for r in 0..m.nrows() {
            for c in r..m.ncols() {
                let v = m[(r, c)];
                if v.norm() > drop_tol {
                    b.add(r, c, v);
                }
            }
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries of row `r` as `(col, value)`, columns ascending.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// All stored entries `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// Entries with `row <= col`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries().filter(|(r, c, _)| r <= c)
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Upper bound on the spectral norm (maximum absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    /// `<v|H|v>` for a (not necessarily normalized) vector.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        inner(v, &self.apply(v)).re
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `sum_k coeff_k * op_k`. All operators must share a dimension.
    pub fn linear_combination(terms: &[(f64, &HermitianOperator)]) -> Result<Self> {
        let dim = match terms.first() {
            Some((_, op)) => op.dim,
            None => return invalid("empty linear combination"),
        };
        let mut b = OperatorBuilder::new(dim);
        for &(coeff, op) in terms {
            if op.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: op.dim });
            }
            if coeff == 0.0 {
                continue;
            }
            for (r, c, v) in op.upper_entries() {
                b.add(r, c, v * coeff);
            }
        }
        Ok(b.build())
    }

    /// Compression onto the coordinate subspace spanned by `basis`.
    pub fn submatrix(&self, basis: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (k, &i) in basis.iter().enumerate() {
            pos[i] = k;
        }
        let mut b = OperatorBuilder::new(basis.len());
        for (k, &i) in basis.iter().enumerate() {
            for (c, v) in self.row(i) {
                let kc = pos[c];
                if kc != usize::MAX && k <= kc {
                    b.add(k, kc, v);
                }
            }
        }
        b.build()
    }

    /// Largest entrywise deviation `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> Result<f64> {
        let diff = HermitianOperator::linear_combination(&[(1.0, self), (-1.0, other)])?;
        Ok(diff.max_abs_entry())
    }
}

/// Complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps and normalizes a nonzero vector.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return invalid("state vector must have positive dimension");
        }
        let nrm = norm(&amps);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return invalid("state vector has zero or non-finite norm");
        }
        Ok(Self { amps: amps.into_iter().map(|a| a / nrm).collect() })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Removes the components of `v` along each (orthonormal) vector of `basis`.
fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for b in basis {
        let c = inner(b, v);
        axpy(-c, b, v);
    }
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> StateVector {
        StateVector { amps: self.vectors.column(k).iter().copied().collect() }
    }
}

/// Dense Hermitian eigendecomposition with the default cutoff.
pub fn eigensystem_dense(op: &HermitianOperator) -> Result<Eigensystem> {
    eigensystem_dense_with_cutoff(op, DENSE_CUTOFF)
}

pub fn eigensystem_dense_with_cutoff(op: &HermitianOperator, cutoff: usize) -> Result<Eigensystem> {
    if op.dim() > cutoff {
        return Err(Error::DenseCutoff { dim: op.dim(), cutoff });
    }
    if op.is_real() {
        let m = DMatrix::from_fn(op.dim(), op.dim(), |r, c| op.get(r, c).re);
        let (values, vecs) = symmetric_eigh(m);
        let vectors = vecs.map(|x| C64::new(x, 0.0));
        Ok(Eigensystem { values, vectors })
    } else {
        let (values, vectors) = hermitian_eigh(op.to_dense());
        Ok(Eigensystem { values, vectors })
    }
}

/// Eigenvalues only, ascending.
pub fn eigenvalues_dense(op: &HermitianOperator) -> Result<Vec<f64>> {
    if op.dim() > DENSE_CUTOFF {
        return Err(Error::DenseCutoff { dim: op.dim(), cutoff: DENSE_CUTOFF });
    }
    let mut vals: Vec<f64> = if op.is_real() {
        let m = DMatrix::from_fn(op.dim(), op.dim(), |r, c| op.get(r, c).re);
        m.symmetric_eigenvalues().iter().copied().collect()
    } else {
        op.to_dense().symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Sorted eigendecomposition of a dense Hermitian matrix.
pub fn hermitian_eigh(m: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m);
    let order = argsort(eig.eigenvalues.as_slice());
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Sorted eigendecomposition of a dense real symmetric matrix.
pub fn symmetric_eigh(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let order = argsort(eig.eigenvalues.as_slice());
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    idx
}

/// Tuning knobs for [`lowest_eigenpairs_sparse`].
#[derive(Clone, Debug)]
pub struct SparseOptions {
    /// Maximum Krylov basis size before a thick restart.
    pub max_basis: usize,
    /// Ritz vectors retained across a restart.
    pub keep: usize,
    pub max_restarts: usize,
    /// Seed for the start vector.
    pub seed: u64,
}

impl Default for SparseOptions {
    fn default() -> Self {
        Self { max_basis: 80, keep: 16, max_restarts: 400, seed: 0x5eed }
    }
}

/// Lowest eigenpairs found by the iterative solver.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
    pub residuals: Vec<f64>,
}

/// The `count` lowest eigenpairs of `op`, each with residual `<= tol`.
pub fn lowest_eigenpairs_sparse(op: &HermitianOperator, count: usize, tol: f64) -> Result<Eigenpairs> {
    lowest_eigenpairs_deflated(op, count, tol, &[], &SparseOptions::default())
}

/// Like [`lowest_eigenpairs_sparse`] but restricted to the orthogonal
/// complement of `deflate` (which need not be orthonormal).
///
/// Pairs are found one at a time, each orthogonal to the previous ones, so
/// degenerate levels are returned with their multiplicity.
pub fn lowest_eigenpairs_deflated(
    op: &HermitianOperator,
    count: usize,
    tol: f64,
    deflate: &[StateVector],
    opts: &SparseOptions,
) -> Result<Eigenpairs> {
    if count == 0 {
        return invalid("count must be positive");
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    // Orthonormalize the deflation set.
    let mut locked: Vec<Vec<C64>> = Vec::new();
    for d in deflate {
        if d.dim() != op.dim() {
            return Err(Error::DimensionMismatch { expected: op.dim(), got: d.dim() });
        }
        let mut v = d.amps.clone();
        project_out(&mut v, &locked);
        project_out(&mut v, &locked);
        let nv = norm(&v);
        if nv > 1e-10 {
            v.iter_mut().for_each(|x| *x /= nv);
            locked.push(v);
        }
    }
    if locked.len() + count > op.dim() {
        return invalid(format!(
            "requested {count} pairs but only {} dimensions remain",
            op.dim() - locked.len()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Eigenpairs { values: Vec::new(), vectors: Vec::new(), residuals: Vec::new() };
    for _ in 0..count {
        let (val, vec, res) = lowest_pair(op, &locked, tol, opts, &mut rng)?;
        out.values.push(val);
        out.residuals.push(res);
        out.vectors.push(StateVector { amps: vec.clone() });
        locked.push(vec);
    }
    Ok(out)
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

/// Thick-restart Krylov iteration with explicit Rayleigh-Ritz projection for
/// the lowest eigenpair orthogonal to `locked`.
fn lowest_pair(
    op: &HermitianOperator,
    locked: &[Vec<C64>],
    tol: f64,
    opts: &SparseOptions,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<C64>, f64)> {
    let dim = op.dim();
    let free = dim - locked.len();
    let max_basis = opts.max_basis.max(2).min(free);
    let keep = opts.keep.max(1).min(max_basis.saturating_sub(1).max(1));
    let scale = 1.0 + op.norm_bound();

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<C64>> = Vec::with_capacity(max_basis);
    let mut next: Option<Vec<C64>> = None;
    let mut best = f64::INFINITY;

    for _ in 0..opts.max_restarts {
        while basis.len() < max_basis {
            let mut w = match next.take() {
                Some(w) => w,
                None if basis.is_empty() => random_vector(dim, rng),
                None => images.last().cloned().unwrap(),
            };
            let mut nw = 0.0;
            for attempt in 0..3 {
                for _ in 0..2 {
                    project_out(&mut w, locked);
                    project_out(&mut w, &basis);
                }
                nw = norm(&w);
                if nw > 1e-10 * scale || attempt == 2 {
                    break;
                }
                // Invariant subspace reached; continue with a fresh direction.
                w = random_vector(dim, rng);
            }
            if nw <= 1e-12 {
                break;
            }
            w.iter_mut().for_each(|x| *x /= nw);
            images.push(op.apply(&w));
            basis.push(w);
        }
        let m = basis.len();
        let proj = DMatrix::from_fn(m, m, |a, b| inner(&basis[a], &images[b]));
        let proj = (&proj + proj.adjoint()) * C64::new(0.5, 0.0);
        let (theta, s) = hermitian_eigh(proj);

        let ritz = |col: usize, src: &[Vec<C64>]| {
            let mut v = vec![ZERO; dim];
            for (i, b) in src.iter().enumerate() {
                axpy(s[(i, col)], b, &mut v);
            }
            v
        };
        let y = ritz(0, &basis);
        let hy = ritz(0, &images);
        let mut r = hy.clone();
        axpy(C64::new(-theta[0], 0.0), &y, &mut r);
        project_out(&mut r, locked);
        let res = norm(&r);
        best = best.min(res);
        if res <= tol {
            let ny = norm(&y);
            let y: Vec<C64> = y.into_iter().map(|x| x / ny).collect();
            return Ok((theta[0], y, res));
        }
        if m >= free {
            // Whole free space spanned; the residual is limited by roundoff.
            return Err(Error::NoConvergence { best_residual: best });
        }
        let k = keep.min(m - 1).max(1);
        let new_basis: Vec<Vec<C64>> = (0..k).map(|c| ritz(c, &basis)).collect();
        let new_images: Vec<Vec<C64>> = (0..k).map(|c| ritz(c, &images)).collect();
        basis = new_basis;
        images = new_images;
        next = Some(r);
    }
    Err(Error::NoConvergence { best_residual: best })
}

/// Diagnostics from [`evolve_with_stats`].
#[derive(Clone, Debug, Default)]
pub struct EvolveStats {
    pub substeps: usize,
    /// Accumulated `| ||psi|| - 1 |` over substeps, before renormalization.
    pub norm_drift: f64,
    /// Sum of per-substep a-posteriori error estimates.
    pub error_estimate: f64,
}

/// Krylov subspace size used by the propagator.
const KRYLOV_DIM: usize = 30;

/// `exp(-i op duration) state`, with estimated 2-norm error at most `tol`.
pub fn evolve(op: &HermitianOperator, state: &StateVector, duration: f64, tol: f64) -> Result<StateVector> {
    evolve_with_stats(op, state, duration, tol).map(|(s, _)| s)
}

pub fn evolve_with_stats(
    op: &HermitianOperator,
    state: &StateVector,
    duration: f64,
    tol: f64,
) -> Result<(StateVector, EvolveStats)> {
    if state.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: state.dim() });
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return invalid("duration must be finite and nonnegative");
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut stats = EvolveStats::default();
    if duration == 0.0 {
        return Ok((state.clone(), stats));
    }
    let dim = op.dim();
    let scale = 1.0 + op.norm_bound();
    let mut psi = state.amps.clone();
    let mut elapsed = 0.0;
    let mut tau = duration;

    while elapsed < duration {
        let beta0 = norm(&psi);
        // Lanczos basis with full reorthogonalization.
        let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|x| x / beta0).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut exact = false;
        let m_max = KRYLOV_DIM.min(dim);
        loop {
            let j = basis.len() - 1;
            let mut w = op.apply(&basis[j]);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                project_out(&mut w, &basis);
            }
            let b = norm(&w);
            if b <= 1e-13 * scale {
                exact = true;
                break;
            }
            beta.push(b);
            if basis.len() == m_max {
                break;
            }
            basis.push(w.into_iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let tri = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let (theta, s) = symmetric_eigh(tri);
        let remaining = duration - elapsed;
        tau = tau.min(remaining);
        loop {
            let coeffs: Vec<C64> = (0..m)
                .map(|r| {
                    (0..m)
                        .map(|k| C64::from_polar(s[(r, k)] * s[(0, k)], -theta[k] * tau))
                        .sum::<C64>()
                })
                .collect();
            let est = if exact || m == dim { 0.0 } else { beta[m - 1] * coeffs[m - 1].norm() * beta0 };
            let budget = tol * tau / duration;
            if est <= budget {
                let mut next = vec![ZERO; dim];
                for (c, b) in coeffs.iter().zip(&basis) {
                    axpy(c * beta0, b, &mut next);
                }
                stats.norm_drift += (norm(&next) - beta0).abs();
                stats.error_estimate += est;
                stats.substeps += 1;
                psi = next;
                elapsed += tau;
                if tau >= remaining {
                    elapsed = duration;
                }
                if est < 0.1 * budget {
                    tau *= 2.0;
                }
                break;
            }
            tau *= 0.5;
            if tau < duration * 1e-13 {
                return Err(Error::StepUnderflow { time: elapsed, estimate: est });
            }
        }
    }
    let nrm = norm(&psi);
    Ok((StateVector { amps: psi.into_iter().map(|x| x / nrm).collect() }, stats))
}
