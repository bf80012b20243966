//! Effective spin chains of the string register: the ferromagnetic XXZ
//! chain with kink boundary conditions, its weight-`n` groundstate, and the
//! gap certificate for `H(lambda)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::fock::{check_lambda, hamiltonian_parts, FockBasis, StringSector, TermFlags};
use crate::geometry::{enumerate_strings, PlaquetteCircuit, StringConfig};
use crate::numerics::{
    eigenvalues_dense, lowest_eigenpairs_sparse, HermitianOperator, OperatorBuilder, StateVector, C64,
};

/// Largest chain (in units of `n`, i.e. `2n` qubits) that is assembled.
pub const MAX_CHAIN_N: usize = 9;

/// Deformation parameter: the root of `q^2 - (2 / lambda) q + 1 = 0` in
/// `[0, 1]`, with `q(0) = 0`.
pub fn q_of_lambda(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    // (1 - sqrt(1 - l^2)) / l, written to avoid cancellation for small l.
    let s = (1.0 - lambda * lambda).sqrt();
    Ok(lambda / (1.0 + s))
}

/// Inverse of [`q_of_lambda`]: `2 / (q + 1/q)`.
pub fn lambda_of_q(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return invalid(format!("q = {q} outside [0, 1]"));
    }
    Ok(2.0 * q / (1.0 + q * q))
}

fn check_chain(n: usize) -> Result<()> {
    if n == 0 || n > MAX_CHAIN_N {
        return invalid(format!("chain size n = {n} outside 1..={MAX_CHAIN_N}"));
    }
    Ok(())
}

/// `H_XXZ(lambda)` on `2n` qubits in Pauli form:
/// `(1/4) sqrt(1 - l^2) (Z_2n - Z_1) - (1/4) sum_w [(Z Z - 1) + l (X X + Y Y)]`.
pub fn build_h_xxz(n: usize, lambda: f64) -> Result<HermitianOperator> {
    check_chain(n)?;
    check_lambda(lambda)?;
    let nq = 2 * n;
    let dim = 1usize << nq;
    let s = (1.0 - lambda * lambda).sqrt();
    let z = |x: usize, w: usize| if (x >> (nq - w)) & 1 == 0 { 1.0 } else { -1.0 };
    let mut b = OperatorBuilder::new(dim);
    for x in 0..dim {
        let mut d = 0.25 * s * (z(x, nq) - z(x, 1));
        for w in 1..nq {
            d -= 0.25 * (z(x, w) * z(x, w + 1) - 1.0);
            // (XX + YY) / 2 swaps a 01 / 10 pair.
            if z(x, w) != z(x, w + 1) {
                let y = x ^ (1 << (nq - w)) ^ (1 << (nq - w - 1));
                if y > x {
                    b.add_real(y, x, -0.5 * lambda);
                }
            }
        }
        b.add_real(x, x, d);
    }
    Ok(b.build())
}

/// `H_XXZ(lambda)` as a sum of projectors on the q-deformed singlet
/// `(|10> - q |01>) / sqrt(1 + q^2)`.
pub fn build_h_xxz_projectors(n: usize, lambda: f64) -> Result<HermitianOperator> {
    check_chain(n)?;
    let q = q_of_lambda(lambda)?;
    let nq = 2 * n;
    let dim = 1usize << nq;
    let norm = 1.0 + q * q;
    let mut b = OperatorBuilder::new(dim);
    for x in 0..dim {
        for w in 1..nq {
            let hi = (x >> (nq - w)) & 1;
            let lo = (x >> (nq - w - 1)) & 1;
            match (hi, lo) {
                (1, 0) => b.add_real(x, x, 1.0 / norm),
                (0, 1) => {
                    b.add_real(x, x, q * q / norm);
                    let y = x ^ (1 << (nq - w)) ^ (1 << (nq - w - 1));
                    b.add_real(y, x, -q / norm);
                }
                _ => {}
            }
        }
    }
    Ok(b.build())
}

/// Indices of the weight-`n` strings in the `2^{2n}` basis, in rank order.
pub fn weight_block(n: usize) -> Vec<usize> {
    enumerate_strings(n).iter().map(|z| z.value() as usize).collect()
}

/// Unique zero-energy state of weight `n`, with amplitudes proportional to
/// `q^{-A(z)}` over strings in rank order. At `lambda = 0` this is the point
/// mass on `0^n 1^n`.
pub fn xxz_groundstate(n: usize, lambda: f64) -> Result<StateVector> {
    check_chain(n)?;
    let q = q_of_lambda(lambda)?;
    let amps: Vec<f64> = if q == 0.0 {
        enumerate_strings(n).iter().map(|z| if z.area() == n * n { 1.0 } else { 0.0 }).collect()
    } else {
        // q^{n^2 - A} <= 1, so the largest weight is 1 and nothing overflows.
        let lq = q.ln();
        enumerate_strings(n).iter().map(|z| ((n * n - z.area()) as f64 * lq).exp()).collect()
    };
    StateVector::from_real(&amps)
}

/// Weight-`n` groundstate obtained by applying `Q = T^1 (x) T^2 (x) ... (x) T^{2n}`,
/// `T = diag(1, 1/q)`, to the uniform superposition. Requires `lambda > 0`.
pub fn xxz_groundstate_transfer(n: usize, lambda: f64) -> Result<StateVector> {
    check_chain(n)?;
    let q = q_of_lambda(lambda)?;
    if q == 0.0 {
        return invalid("the transfer map is singular at lambda = 0");
    }
    let exponents: Vec<f64> = enumerate_strings(n)
        .iter()
        .map(|z| -((1..=2 * n).map(|w| w * z.bit(w) as usize).sum::<usize>() as f64) * q.ln())
        .collect();
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let amps: Vec<f64> = exponents.iter().map(|e| (e - top).exp()).collect();
    StateVector::from_real(&amps)
}

/// Embeds a weight-`n` block vector into the full `2^{2n}` space.
pub fn embed_weight_block(n: usize, v: &StateVector) -> Result<StateVector> {
    let idx = weight_block(n);
    if v.dim() != idx.len() {
        return Err(Error::DimensionMismatch { expected: idx.len(), got: v.dim() });
    }
    let mut out = vec![C64::new(0.0, 0.0); 1 << (2 * n)];
    for (k, &i) in idx.iter().enumerate() {
        out[i] = v.amplitudes()[k];
    }
    StateVector::new(out)
}

/// Closed-form smallest nonzero eigenvalue `1 - lambda cos(pi / 2n)`.
pub fn xxz_gap(n: usize, lambda: f64) -> Result<f64> {
    check_chain(n)?;
    check_lambda(lambda)?;
    Ok(1.0 - lambda * (PI / (2.0 * n as f64)).cos())
}

/// Smallest eigenvalue above `tol` in an ascending list.
pub fn smallest_nonzero(values: &[f64], tol: f64) -> Option<f64> {
    values.iter().copied().find(|&v| v > tol)
}

/// Numerical gap of `H_XXZ(lambda)` on all `2^{2n}` states. The nullspace
/// has one state per Hamming weight, so the gap is eigenvalue `2n + 1`.
pub fn xxz_gap_numeric(n: usize, lambda: f64) -> Result<XxzSpectrumSummary> {
    let h = build_h_xxz(n, lambda)?;
    let values = eigenvalues_dense(&h)?;
    let null_dim = 2 * n + 1;
    Ok(XxzSpectrumSummary {
        ground: values[0],
        null_max: values[null_dim - 1],
        gap: values[null_dim],
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XxzSpectrumSummary {
    /// Lowest eigenvalue.
    pub ground: f64,
    /// Largest of the `2n + 1` lowest eigenvalues (should vanish).
    pub null_max: f64,
    /// Next eigenvalue.
    pub gap: f64,
}

/// `max |V(z')^dag H_{z'z} V(z) - 2 H_XXZ[z', z] 1|` over all string pairs,
/// where `H = H_circuit(lambda) - sqrt(1 - lambda^2)` on the string sector.
pub fn rotated_conjugation_check(circuit: &PlaquetteCircuit, lambda: f64) -> Result<f64> {
    let n = circuit.n();
    if n > 3 {
        return invalid(format!("rotated conjugation check is limited to n <= 3, got {n}"));
    }
    let sector = StringSector::new(n)?;
    let basis = FockBasis::Strings(sector.clone());
    let h = hamiltonian_parts(&basis, TermFlags::circuit(), circuit)?.at(lambda)?;
    let s = (1.0 - lambda * lambda).sqrt();
    let xxz = build_h_xxz(n, lambda)?;
    let strings = sector.strings();
    let m = strings.len();
    let regdim = 1usize << (2 * n);
    let vs: Vec<DMatrix<C64>> = strings.iter().map(|z| circuit.partial_unitary(z)).collect();

    // Dense blocks H_{z'z}[x', x].
    let mut blocks = vec![DMatrix::<C64>::zeros(regdim, regdim); m * m];
    for (r, c, v) in h.entries() {
        let (xr, zr) = (r / m, r % m);
        let (xc, zc) = (c / m, c % m);
        blocks[zr * m + zc][(xr, xc)] += v;
    }
    let mut worst = 0.0f64;
    for zr in 0..m {
        for zc in 0..m {
            let mut block = blocks[zr * m + zc].clone();
            if zr == zc {
                for d in 0..regdim {
                    block[(d, d)] -= C64::new(s, 0.0);
                }
            }
            let rotated = vs[zr].adjoint() * block * &vs[zc];
            let target = xxz.get(strings[zr].value() as usize, strings[zc].value() as usize) * 2.0;
            for i in 0..regdim {
                for j in 0..regdim {
                    let expected = if i == j { target } else { C64::new(0.0, 0.0) };
                    worst = worst.max((rotated[(i, j)] - expected).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Nullspace projection lower bound `c d / (c + d + |B|)` on the gap of a
/// sum `A + B` of positive semidefinite operators, where `d` bounds the gap
/// of `A` and `c` the gap of `B` restricted to the nullspace of `A`.
pub fn npl_bound(c: f64, d: f64, norm_b: f64) -> Result<f64> {
    if !(c > 0.0) || !(d > 0.0) {
        return invalid(format!("gap bounds must be positive (c = {c}, d = {d})"));
    }
    if !(norm_b >= 0.0) {
        return invalid(format!("operator norm must be nonnegative, got {norm_b}"));
    }
    Ok(c * d / (c + d + norm_b))
}

/// `(1 - lambda cos(pi / 2n)) / (4n + 3)`.
pub fn gap_lower_bound(n: usize, lambda: f64) -> Result<f64> {
    Ok(xxz_gap(n, lambda)? / (4 * n + 3) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapCertificate {
    pub n: usize,
    pub lambda: f64,
    /// Lowest eigenvalue of `H(lambda) - sqrt(1 - lambda^2)` on the string
    /// sector (should vanish).
    pub ground: f64,
    /// Second-lowest eigenvalue of the same operator.
    pub numeric_gap: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compares the gap of `H(lambda)` on the string sector against the
/// analytic lower bound. `circuit` must leave the left half of the grid
/// untouched for the ground energy to be `sqrt(1 - lambda^2)`.
pub fn gap_certificate(n: usize, lambda: f64, circuit: &PlaquetteCircuit) -> Result<GapCertificate> {
    if circuit.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: circuit.n() });
    }
    if n > 3 {
        return invalid(format!("gap certificate is limited to n <= 3, got {n}"));
    }
    let basis = FockBasis::strings(n)?;
    let h = hamiltonian_parts(&basis, TermFlags::all(), circuit)?.at(lambda)?;
    let s = (1.0 - lambda * lambda).sqrt();
    let (e0, e1) = if h.dim() <= 400 {
        let v = eigenvalues_dense(&h)?;
        (v[0], v[1])
    } else {
        let p = lowest_eigenpairs_sparse(&h, 2, 1e-9)?;
        (p.values[0], p.values[1])
    };
    let bound = gap_lower_bound(n, lambda)?;
    let numeric_gap = e1 - s;
    Ok(GapCertificate {
        n,
        lambda,
        ground: e0 - s,
        numeric_gap,
        bound,
        pass: numeric_gap >= bound - 1e-9,
    })
}

/// Occupation probabilities `|<z|psi>|^2` of the strings, in rank order.
pub fn string_weights(n: usize, lambda: f64) -> Result<Vec<(StringConfig, f64)>> {
    let gs = xxz_groundstate(n, lambda)?;
    Ok(enumerate_strings(n).into_iter().zip(gs.probabilities()).collect())
}
