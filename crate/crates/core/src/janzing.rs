//! Computation by free evolution under the propagation Hamiltonian: the XY
//! chain on the string register, its single-particle solution, time-averaged
//! statistics, and the boundary blocks of the torus geometry.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::geometry::{enumerate_strings, GridSpec, StringConfig};
use crate::numerics::{eigenvalues_dense, hermitian_eigh, symmetric_eigh, HermitianOperator, OperatorBuilder, C64};

/// Largest chain built on all `2^{2n}` states.
pub const MAX_XY_N: usize = 6;

fn check_n(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return invalid(format!("chain size n = {n} outside 1..={max}"));
    }
    Ok(())
}

/// `-(1/2) sum_w (X_w X_{w+1} + Y_w Y_{w+1})` on `2n` qubits.
pub fn build_h_xy(n: usize) -> Result<HermitianOperator> {
    check_n(n, MAX_XY_N)?;
    let nq = 2 * n;
    let mut b = OperatorBuilder::new(1 << nq);
    for x in 0..1usize << nq {
        for w in 1..nq {
            let hi = (x >> (nq - w)) & 1;
            let lo = (x >> (nq - w - 1)) & 1;
            if hi == 0 && lo == 1 {
                b.add_real(x ^ (0b11 << (nq - w - 1)), x, -1.0);
            }
        }
    }
    Ok(b.build())
}

/// The same operator on the weight-`n` strings in rank order.
pub fn xy_weight_block(n: usize) -> Result<DMatrix<f64>> {
    check_n(n, 9)?;
    let strings = enumerate_strings(n);
    let index: std::collections::HashMap<u64, usize> =
        strings.iter().enumerate().map(|(k, z)| (z.value(), k)).collect();
    let m = strings.len();
    let mut h = DMatrix::zeros(m, m);
    for (k, z) in strings.iter().enumerate() {
        for (next, _, _) in z.neighbors() {
            h[(index[&next.value()], k)] = -1.0;
        }
    }
    Ok(h)
}

/// Single-particle solution on the path with `2n` sites:
/// `lambda_r = -2 cos(pi r / (2n + 1))`,
/// `e_r(j) = sqrt(2 / (2n + 1)) sin(j r pi / (2n + 1))`, `r, j = 1..=2n`.
#[derive(Clone, Debug)]
pub struct SingleParticle {
    pub n: usize,
    pub values: Vec<f64>,
    /// `vectors[r - 1][j - 1] = e_r(j)`.
    pub vectors: Vec<Vec<f64>>,
}

pub fn xy_single_particle(n: usize) -> Result<SingleParticle> {
    if n == 0 {
        return invalid("chain size must be positive");
    }
    let l = (2 * n + 1) as f64;
    let norm = (2.0 / l).sqrt();
    let values = (1..=2 * n).map(|r| -2.0 * (PI * r as f64 / l).cos()).collect();
    let vectors = (1..=2 * n)
        .map(|r| (1..=2 * n).map(|j| norm * (PI * (j * r) as f64 / l).sin()).collect())
        .collect();
    Ok(SingleParticle { n, values, vectors })
}

impl SingleParticle {
    /// Smallest distance between two single-particle levels.
    pub fn min_gap(&self) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `(1/T) int_0^T e^{-i d t} dt`, real part: `sin(d T) / (d T)`; 1 at `d = 0`
/// and 0 for `T = inf` with `d != 0`.
fn average_factor(d: f64, t: f64) -> f64 {
    if d == 0.0 {
        1.0
    } else if t.is_infinite() {
        0.0
    } else {
        let x = d * t;
        if x.abs() < 1e-8 {
            1.0 - x * x / 6.0
        } else {
            x.sin() / x
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return invalid(format!("averaging time must be positive (or infinite), got {t}"));
    }
    Ok(())
}

/// Time-averaged probability of hopping from site `l` to site `j` in the
/// weight-1 sector, over `[0, T]`. `T = f64::INFINITY` gives the long-time
/// limit.
pub fn timeavg_transition(sp: &SingleParticle, l: usize, j: usize, t: f64) -> Result<f64> {
    let len = 2 * sp.n;
    if !(1..=len).contains(&l) || !(1..=len).contains(&j) {
        return Err(Error::InvalidCoordinate(format!("sites ({l}, {j}) outside 1..={len}")));
    }
    check_time(t)?;
    let amp: Vec<f64> = sp.vectors.iter().map(|e| e[j - 1] * e[l - 1]).collect();
    let mut total = 0.0;
    for r in 0..len {
        for s in 0..len {
            total += amp[r] * amp[s] * average_factor(sp.values[r] - sp.values[s], t);
        }
    }
    Ok(total)
}

/// Prob(l -> j) at a fixed time, from the single-particle solution.
pub fn transition_at(sp: &SingleParticle, l: usize, j: usize, time: f64) -> f64 {
    let a: C64 = sp
        .vectors
        .iter()
        .zip(&sp.values)
        .map(|(e, &lam)| C64::from_polar(e[j - 1] * e[l - 1], -lam * time))
        .sum();
    a.norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectationMethod {
    /// Evolution of the weight-`n` block, averaged by quadrature.
    ManyBody,
    /// Sum of weight-1 transition probabilities.
    SingleParticle,
}

/// Number of ones among the first `n` bits.
pub fn left_count(z: &StringConfig) -> usize {
    (1..=z.n()).map(|w| z.bit(w) as usize).sum()
}

/// Time-averaged expected number of ones among the first `n` bits, starting
/// from `0^n 1^n`.
pub fn expected_n(n: usize, t: f64, method: ExpectationMethod) -> Result<f64> {
    check_time(t)?;
    match method {
        ExpectationMethod::SingleParticle => {
            let sp = xy_single_particle(n)?;
            let mut total = 0.0;
            for j in 1..=n {
                for l in n + 1..=2 * n {
                    total += timeavg_transition(&sp, l, j, t)?;
                }
            }
            Ok(total)
        }
        ExpectationMethod::ManyBody => {
            if n > 4 {
                return invalid(format!("many-body average is limited to n <= 4, got {n}"));
            }
            let evo = BlockEvolution::new(n)?;
            let counts: Vec<f64> = evo.strings.iter().map(|z| left_count(z) as f64).collect();
            if t.is_infinite() {
                return Ok(evo.time_average(f64::INFINITY).iter().zip(&counts).map(|(p, c)| p * c).sum());
            }
            let f = |time: f64| evo.probabilities_at(time).iter().zip(&counts).map(|(p, c)| p * c).sum::<f64>();
            Ok(average_by_quadrature(f, t, evo.max_frequency(), 1e-10)? / t)
        }
    }
}

/// Eigendecomposition of the weight-`n` block and the initial overlaps.
struct BlockEvolution {
    strings: Vec<StringConfig>,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
    overlaps: Vec<f64>,
}

impl BlockEvolution {
    fn new(n: usize) -> Result<Self> {
        let strings = enumerate_strings(n);
        let (energies, vectors) = symmetric_eigh(xy_weight_block(n)?);
        // 0^n 1^n has the smallest value, hence rank 0.
        let overlaps = (0..energies.len()).map(|a| vectors[(0, a)]).collect();
        Ok(Self { strings, energies, vectors, overlaps })
    }

    fn max_frequency(&self) -> f64 {
        let lo = self.energies.first().copied().unwrap_or(0.0);
        let hi = self.energies.last().copied().unwrap_or(0.0);
        hi - lo
    }

    fn probabilities_at(&self, time: f64) -> Vec<f64> {
        let m = self.strings.len();
        let phases: Vec<C64> = self
            .energies
            .iter()
            .zip(&self.overlaps)
            .map(|(&e, &c)| C64::from_polar(c, -e * time))
            .collect();
        (0..m)
            .map(|z| {
                let a: C64 = (0..m).map(|k| phases[k] * self.vectors[(z, k)]).sum();
                a.norm_sqr()
            })
            .collect()
    }

    /// Exact time average of `|<z|psi_t>|^2` over `[0, T]`. Levels closer
    /// than `1e-10` are merged so that numerically split degeneracies do not
    /// produce spurious oscillating terms.
    fn time_average(&self, t: f64) -> Vec<f64> {
        let m = self.strings.len();
        // Cluster sorted levels.
        let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, &e) in self.energies.iter().enumerate() {
            match clusters.last_mut() {
                Some((e0, members)) if (e - *e0).abs() < 1e-10 => members.push(k),
                _ => clusters.push((e, vec![k])),
            }
        }
        // Projection of the initial state onto each cluster, per string.
        let proj: Vec<Vec<f64>> = clusters
            .iter()
            .map(|(_, members)| {
                (0..m).map(|z| members.iter().map(|&k| self.overlaps[k] * self.vectors[(z, k)]).sum()).collect()
            })
            .collect();
        (0..m)
            .map(|z| {
                let mut total = 0.0;
                for a in 0..clusters.len() {
                    for b in 0..clusters.len() {
                        let f = if a == b { 1.0 } else { average_factor(clusters[a].0 - clusters[b].0, t) };
                        total += proj[a][z] * proj[b][z] * f;
                    }
                }
                total
            })
            .collect()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` from the eigenvalues of the
/// Jacobi matrix.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let (nodes, vecs) = symmetric_eigh(jacobi);
    let weights = (0..order).map(|k| 2.0 * vecs[(0, k)].powi(2)).collect();
    (nodes, weights)
}

const GL_ORDER: usize = 16;

/// `int_0^T f(t) dt` for a trigonometric polynomial with frequencies up to
/// `max_freq`, with composite Gauss-Legendre panels. The panel count doubles
/// until two estimates agree to `tol` (relative to `T`).
pub fn average_by_quadrature(f: impl Fn(f64) -> f64, t: f64, max_freq: f64, tol: f64) -> Result<f64> {
    let (nodes, weights) = gauss_legendre(GL_ORDER);
    let integrate = |panels: usize| {
        let h = t / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(&weights) {
                total += w * f(mid + 0.5 * h * x);
            }
        }
        total * 0.5 * h
    };
    let mut panels = ((t * max_freq / 4.0).ceil() as usize).max(1);
    let mut prev = integrate(panels);
    for _ in 0..12 {
        panels *= 2;
        let next = integrate(panels);
        if (next - prev).abs() <= tol * t.max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence { best_residual: 0.0 })
}

/// Time-averaged distribution of the string over `[0, T]`, in rank order.
pub fn timeavg_string_distribution(n: usize, t: f64) -> Result<Vec<(StringConfig, f64)>> {
    check_time(t)?;
    if n > 5 {
        return invalid(format!("string distribution is limited to n <= 5, got {n}"));
    }
    let evo = BlockEvolution::new(n)?;
    let probs = evo.time_average(t);
    Ok(evo.strings.into_iter().zip(probs).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessEstimate {
    pub n: usize,
    pub region_size: usize,
    pub time: f64,
    /// Probability that every particle lies right of the region.
    pub success: f64,
    pub expected_m: f64,
    /// Markov bound on failure: `P(M >= n - K + 1) <= E[M] / (n - K + 1)`.
    pub failure_markov_bound: f64,
    /// `P(M >= 3n/4)`.
    pub prob_m_three_quarters: f64,
    /// `4 E[M] / (3n)`.
    pub three_quarters_bound: f64,
}

impl SuccessEstimate {
    /// Whether both Markov inequalities hold (with a small slack for
    /// rounding).
    pub fn bounds_hold(&self) -> bool {
        let slack = 1e-12;
        1.0 - self.success <= self.failure_markov_bound + slack
            && self.prob_m_three_quarters <= self.three_quarters_bound + slack
    }
}

/// Exact success probability for a `K x K` region in the left corner,
/// averaged over `t` uniform in `[0, T]`.
pub fn janzing_success_estimate(n: usize, k: usize, t: f64) -> Result<SuccessEstimate> {
    let grid = GridSpec::janzing_left_corner(n, k)?;
    let dist = timeavg_string_distribution(n, t)?;
    let mut success = 0.0;
    let mut expected_m = 0.0;
    let mut tail = 0.0;
    for (z, p) in &dist {
        let m = n - left_count(z);
        expected_m += p * m as f64;
        if grid.string_right_of_region(z) {
            success += p;
        }
        if 4 * m >= 3 * n {
            tail += p;
        }
    }
    Ok(SuccessEstimate {
        n,
        region_size: k,
        time: t,
        success,
        expected_m,
        failure_markov_bound: expected_m / (n - k + 1) as f64,
        prob_m_three_quarters: tail,
        three_quarters_bound: 4.0 * expected_m / (3 * n) as f64,
    })
}

/// Boundary-register size and plane-wave momentum of a torus block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
}

impl TorusSpec {
    pub fn new(n: usize, d: usize, k: usize) -> Result<Self> {
        check_n(n, 4)?;
        if d == 0 || d > 8 {
            return invalid(format!("boundary dimension D = {d} outside 1..=8"));
        }
        if k >= d {
            return invalid(format!("momentum k = {k} outside 0..{d}"));
        }
        Ok(Self { n, d, k })
    }

    /// `k / D`.
    pub fn flux(&self) -> f64 {
        self.k as f64 / self.d as f64
    }
}

/// Adds `-sum_w (|..01..><..10..| + h.c.)` and the twisted boundary hop
/// `-phase sigma_1^- sigma_2n^+ + h.c.` (with `sigma^- = |0><1|`) to `b`,
/// acting on a `2n`-qubit register embedded at `offset` with stride 1.
fn add_boundary_chain(b: &mut OperatorBuilder, n: usize, phase: C64, offset: usize, target_offset: usize) {
    let nq = 2 * n;
    let first = 1usize << (nq - 1);
    let last = 1usize;
    for x in 0..1usize << nq {
        if offset == target_offset {
            for w in 1..nq {
                if (x >> (nq - w)) & 1 == 0 && (x >> (nq - w - 1)) & 1 == 1 {
                    b.add_real(offset + (x ^ (0b11 << (nq - w - 1))), offset + x, -1.0);
                }
            }
        }
        // sigma_1^- sigma_2n^+ : qubit 1 from 1 to 0, qubit 2n from 0 to 1.
        if x & first != 0 && x & last == 0 {
            let y = x ^ first ^ last;
            b.add(target_offset + y, offset + x, -phase);
        }
    }
}

/// `H_XY^boundary(k)` on the `2n` string qubits.
pub fn torus_block(spec: &TorusSpec) -> HermitianOperator {
    let mut b = OperatorBuilder::new(1 << (2 * spec.n));
    let phase = C64::from_polar(1.0, 2.0 * PI * spec.flux());
    add_boundary_chain(&mut b, spec.n, phase, 0, 0);
    b.build()
}

/// The torus Hamiltonian on `C^D (x) C^{2^{2n}}` (boundary register most
/// significant), before the plane-wave decomposition.
pub fn torus_full(n: usize, d: usize) -> Result<HermitianOperator> {
    TorusSpec::new(n, d, 0)?;
    let chain = 1usize << (2 * n);
    let mut b = OperatorBuilder::new(d * chain);
    for tau in 0..d {
        // Chain part, diagonal in tau.
        add_boundary_chain(&mut b, n, C64::new(0.0, 0.0), tau * chain, tau * chain);
        // |tau - 1><tau| (x) sigma_1^- sigma_2n^+.
        let target = (tau + d - 1) % d;
        add_boundary_chain_hop_only(&mut b, n, tau * chain, target * chain);
    }
    Ok(b.build())
}

fn add_boundary_chain_hop_only(b: &mut OperatorBuilder, n: usize, offset: usize, target_offset: usize) {
    let nq = 2 * n;
    let first = 1usize << (nq - 1);
    for x in 0..1usize << nq {
        if x & first != 0 && x & 1 == 0 {
            b.add(target_offset + (x ^ first ^ 1), offset + x, C64::new(-1.0, 0.0));
        }
    }
}

/// Eigenvalues of the block restricted to Hamming weight `m`.
pub fn torus_weight_spectrum(spec: &TorusSpec, m: usize) -> Result<Vec<f64>> {
    let nq = 2 * spec.n;
    if m > nq {
        return invalid(format!("weight {m} exceeds {nq} sites"));
    }
    let block = torus_block(spec);
    let idx: Vec<usize> = (0..1usize << nq).filter(|x| x.count_ones() as usize == m).collect();
    eigenvalues_dense(&block.submatrix(&idx))
}

/// Single-particle ring with flux `phi`:
/// `h[w][w+1] = -exp(-2 pi i phi / 2n)`, closed periodically.
pub fn ring_hamiltonian(n: usize, phi: f64) -> DMatrix<C64> {
    let len = 2 * n;
    let hop = -C64::from_polar(1.0, -2.0 * PI * phi / len as f64);
    let mut h = DMatrix::zeros(len, len);
    for w in 0..len {
        let next = (w + 1) % len;
        h[(w, next)] += hop;
        h[(next, w)] += hop.conj();
    }
    h
}

/// `-2 cos(2 pi (s + phi) / 2n)`, `s = 0..2n`, ascending.
pub fn ring_spectrum(n: usize, phi: f64) -> Vec<f64> {
    let len = (2 * n) as f64;
    let mut v: Vec<f64> = (0..2 * n).map(|s| -2.0 * (2.0 * PI * (s as f64 + phi) / len).cos()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Spectrum of `m` free fermions on the ring: sums over `m`-subsets of the
/// single-particle levels, ascending.
pub fn ring_filling_spectrum(n: usize, phi: f64, m: usize) -> Vec<f64> {
    let levels = ring_spectrum(n, phi);
    let len = levels.len();
    let mut out = Vec::new();
    for mask in 0u64..1 << len {
        if mask.count_ones() as usize == m {
            out.push((0..len).filter(|&i| mask >> i & 1 == 1).map(|i| levels[i]).sum());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Flux seen by `m` fermions: the boundary hop of the spin chain picks up
/// the Jordan-Wigner sign `(-1)^{m-1}`, i.e. an extra half flux quantum for
/// even `m`.
pub fn effective_flux(spec: &TorusSpec, m: usize) -> f64 {
    let shift = if m % 2 == 0 { 0.5 } else { 0.0 };
    (spec.flux() + shift).rem_euclid(1.0)
}

fn max_sorted_deviation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusCheck {
    pub spec: TorusSpec,
    /// Weight-1 block versus the ring at flux `k / D`.
    pub weight1_deviation: f64,
    /// Weight-`n` block versus `n` fermions on the ring at flux `k / D`.
    pub weight_n_deviation: f64,
    /// Weight-`n` block versus `n` fermions at the parity-corrected flux.
    pub weight_n_corrected_deviation: f64,
}

/// Compares the torus block with the persistent-current ring. The
/// many-particle comparison is only made for even `n`.
pub fn torus_check(spec: &TorusSpec) -> Result<TorusCheck> {
    if spec.n % 2 == 1 {
        return invalid(format!(
            "the ring equivalence is stated for even n only; n = {} is odd (use torus_weight_spectrum and ring_filling_spectrum directly)",
            spec.n
        ));
    }
    let n = spec.n;
    let w1 = torus_weight_spectrum(spec, 1)?;
    let wn = torus_weight_spectrum(spec, n)?;
    Ok(TorusCheck {
        spec: *spec,
        weight1_deviation: max_sorted_deviation(&w1, &ring_spectrum(n, spec.flux())),
        weight_n_deviation: max_sorted_deviation(&wn, &ring_filling_spectrum(n, spec.flux(), n)),
        weight_n_corrected_deviation: max_sorted_deviation(
            &wn,
            &ring_filling_spectrum(n, effective_flux(spec, n), n),
        ),
    })
}

/// Eigenvalues of a dense Hermitian matrix, ascending.
pub fn dense_spectrum(m: &DMatrix<C64>) -> Vec<f64> {
    hermitian_eigh(m.clone()).0
}
