//! Quantum walk on Young's lattice: partitions, hook-length dimensions, the
//! exact walk solution and its truncated numeric counterpart, Plancherel
//! sampling by row insertion and the limit-shape curve.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{enumerate_strings, StringConfig};
use crate::numerics::{evolve, OperatorBuilder, StateVector, C64};

pub const MAX_LATTICE_M: usize = 40;

/// Integer partition with parts in nonincreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts the parts and drops zeros.
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    pub fn conjugate(&self) -> Self {
        let width = self.parts.first().copied().unwrap_or(0);
        Self { parts: (0..width).map(|c| self.parts.iter().filter(|&&p| p > c).count()).collect() }
    }

    /// Hook length of box `(row, col)`, 0-based.
    pub fn hook(&self, row: usize, col: usize) -> usize {
        let arm = self.parts[row] - col - 1;
        let leg = self.parts[row + 1..].iter().filter(|&&p| p > col).count();
        arm + leg + 1
    }

    fn hooks(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.iter().enumerate().flat_map(move |(r, &len)| (0..len).map(move |c| self.hook(r, c)))
    }

    /// Partitions obtained by adding one box.
    pub fn covers(&self) -> Vec<Partition> {
        let mut out = Vec::new();
        for r in 0..=self.parts.len() {
            let cur = self.parts.get(r).copied().unwrap_or(0);
            if r == 0 || self.parts[r - 1] > cur {
                let mut parts = self.parts.clone();
                if r == parts.len() {
                    parts.push(1);
                } else {
                    parts[r] += 1;
                }
                out.push(Self { parts });
            }
        }
        out
    }

    /// Partitions obtained by removing one box.
    pub fn covered(&self) -> Vec<Partition> {
        let mut out = Vec::new();
        for r in 0..self.parts.len() {
            let next = self.parts.get(r + 1).copied().unwrap_or(0);
            if self.parts[r] > next {
                let mut parts = self.parts.clone();
                parts[r] -= 1;
                if parts[r] == 0 {
                    parts.pop();
                }
                out.push(Self { parts });
            }
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "()");
        }
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", body.join(","))
    }
}

impl std::str::FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if inner.is_empty() {
            return Ok(Self::empty());
        }
        let parts = inner
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Malformed(format!("partition {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return Err(Error::Malformed(format!("partition {s:?} is not positive and nonincreasing")));
        }
        Ok(Self { parts })
    }
}

/// All partitions of `m`, parts in reverse lexicographic order.
pub fn partitions_of(m: usize) -> Vec<Partition> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, m, &mut Vec::new(), &mut out);
    out
}

/// Young's lattice cut at size `m_max`.
#[derive(Clone, Debug)]
pub struct TruncatedLattice {
    m_max: usize,
    nodes: Vec<Partition>,
    index: HashMap<Partition, usize>,
    /// `level_start[m]..level_start[m + 1]` indexes partitions of `m`.
    level_start: Vec<usize>,
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
}

pub fn enumerate_partitions(m_max: usize) -> Result<TruncatedLattice> {
    if m_max > MAX_LATTICE_M {
        return invalid(format!("m_max = {m_max} exceeds {MAX_LATTICE_M}"));
    }
    let mut nodes = Vec::new();
    let mut level_start = Vec::with_capacity(m_max + 2);
    for m in 0..=m_max {
        level_start.push(nodes.len());
        nodes.extend(partitions_of(m));
    }
    level_start.push(nodes.len());
    let index: HashMap<Partition, usize> = nodes.iter().cloned().enumerate().map(|(k, p)| (p, k)).collect();
    let mut up = vec![Vec::new(); nodes.len()];
    let mut down = vec![Vec::new(); nodes.len()];
    for (k, p) in nodes.iter().enumerate() {
        if p.size() < m_max {
            for c in p.covers() {
                let j = index[&c];
                up[k].push(j);
                down[j].push(k);
            }
        }
    }
    Ok(TruncatedLattice { m_max, nodes, index, level_start, up, down })
}

impl TruncatedLattice {
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Partition] {
        &self.nodes
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn level(&self, m: usize) -> &[Partition] {
        &self.nodes[self.level_start[m]..self.level_start[m + 1]]
    }

    /// Nodes covering node `k` (one box more).
    pub fn up(&self, k: usize) -> &[usize] {
        &self.up[k]
    }

    /// Nodes covered by node `k` (one box less).
    pub fn down(&self, k: usize) -> &[usize] {
        &self.down[k]
    }

    pub fn edge_count(&self) -> usize {
        self.up.iter().map(Vec::len).sum()
    }

    /// Applies the box-adding operator `A^dagger` to a vector on the nodes.
    pub fn raise(&self, v: &[BigUint]) -> Vec<BigUint> {
        let mut out = vec![BigUint::default(); v.len()];
        for (k, x) in v.iter().enumerate() {
            for &j in &self.up[k] {
                out[j] += x;
            }
        }
        out
    }
}

/// `d = m! / prod(hooks)`, the number of standard tableaux of the shape.
pub fn hook_dimension(p: &Partition) -> BigUint {
    let mut num = BigUint::from(1u32);
    for k in 2..=p.size() {
        num *= BigUint::from(k);
    }
    let den = p.hooks().fold(BigUint::from(1u32), |acc, h| acc * BigUint::from(h));
    num / den
}

/// `ln d` in floating point, usable for large shapes.
pub fn log_hook_dimension(p: &Partition) -> f64 {
    ln_factorial(p.size()) - p.hooks().map(|h| (h as f64).ln()).sum::<f64>()
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// Standard Young tableaux counted by recursion on the removable corners.
pub fn count_tableaux(p: &Partition) -> BigUint {
    fn rec(p: &Partition, memo: &mut HashMap<Partition, BigUint>) -> BigUint {
        if p.size() <= 1 {
            return BigUint::from(1u32);
        }
        if let Some(v) = memo.get(p) {
            return v.clone();
        }
        let total = p.covered().iter().map(|q| rec(q, memo)).sum::<BigUint>();
        memo.insert(p.clone(), total.clone());
        total
    }
    rec(p, &mut HashMap::new())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialPosetReport {
    pub m_max: usize,
    pub interior_nodes: usize,
    /// Interior nodes whose up-degree differs from down-degree + 1.
    pub degree_failures: usize,
    /// Interior pairs with a different number of common covers and of
    /// common covered elements.
    pub pair_failures: usize,
    /// Largest entry of `[A, A^dagger] - 1` on the interior block.
    pub commutator_deviation: i64,
    /// Same quantity on the whole truncated lattice; nonzero because the
    /// top level has no covers.
    pub boundary_deviation: i64,
}

impl DifferentialPosetReport {
    pub fn holds(&self) -> bool {
        self.degree_failures == 0 && self.pair_failures == 0 && self.commutator_deviation == 0
    }
}

pub fn differential_poset_check(lat: &TruncatedLattice) -> Result<DifferentialPosetReport> {
    if lat.m_max < 2 {
        return invalid("differential poset check needs m_max >= 2");
    }
    let interior = lat.level_start[lat.m_max];
    let mut degree_failures = 0;
    for k in 0..interior {
        if lat.up[k].len() != lat.down[k].len() + 1 {
            degree_failures += 1;
        }
    }
    // (A A^dagger)_{jk} = #common covers, (A^dagger A)_{jk} = #common covered.
    let mut aad: HashMap<(usize, usize), i64> = HashMap::new();
    let mut ada: HashMap<(usize, usize), i64> = HashMap::new();
    for k in 0..lat.len() {
        for &a in &lat.up[k] {
            for &b in &lat.down[a] {
                *aad.entry((b, k)).or_default() += 1;
            }
        }
        for &a in &lat.down[k] {
            for &b in &lat.up[a] {
                *ada.entry((b, k)).or_default() += 1;
            }
        }
    }
    let mut keys: Vec<(usize, usize)> = aad.keys().chain(ada.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    for k in 0..lat.len() {
        if !aad.contains_key(&(k, k)) && !ada.contains_key(&(k, k)) {
            keys.push((k, k));
        }
    }
    let mut pair_failures = 0;
    let mut commutator_deviation = 0;
    let mut boundary_deviation = 0;
    for (r, c) in keys {
        let comm = aad.get(&(r, c)).copied().unwrap_or(0) - ada.get(&(r, c)).copied().unwrap_or(0);
        let dev = (comm - i64::from(r == c)).abs();
        boundary_deviation = boundary_deviation.max(dev);
        if r < interior && c < interior {
            commutator_deviation = commutator_deviation.max(dev);
            if r != c && dev != 0 {
                pair_failures += 1;
            }
        }
    }
    Ok(DifferentialPosetReport {
        m_max: lat.m_max,
        interior_nodes: interior,
        degree_failures,
        pair_failures: pair_failures / 2,
        commutator_deviation,
        boundary_deviation,
    })
}

/// Amplitudes of the walk on the nodes of a truncated lattice.
#[derive(Clone, Debug)]
pub struct WalkState {
    pub time: f64,
    pub partitions: Vec<Partition>,
    pub amplitudes: Vec<C64>,
}

impl WalkState {
    pub fn amplitude(&self, p: &Partition) -> Option<C64> {
        self.partitions.iter().position(|q| q == p).map(|k| self.amplitudes[k])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &WalkState) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return invalid(format!("walk time must be finite and nonnegative, got {t}"));
    }
    Ok(())
}

/// `e^{-t^2/2} (-i t)^m d / m!`.
pub fn exact_amplitude(p: &Partition, t: f64) -> C64 {
    let m = p.size();
    if t == 0.0 {
        return if m == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let modulus = (-t * t / 2.0 + m as f64 * t.ln() + log_hook_dimension(p) - ln_factorial(m)).exp();
    let phase = match m % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    };
    phase * modulus
}

pub fn exact_walk_amplitudes(t: f64, m_max: usize) -> Result<WalkState> {
    check_t(t)?;
    let lat = enumerate_partitions(m_max)?;
    let amplitudes = lat.nodes.iter().map(|p| exact_amplitude(p, t)).collect();
    Ok(WalkState { time: t, partitions: lat.nodes, amplitudes })
}

/// `P(m >= k)` for `m ~ Poisson(mean)`.
pub fn poisson_tail(mean: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut j = k;
    loop {
        let term = (-mean + j as f64 * mean.ln() - ln_factorial(j)).exp();
        total += term;
        if j as f64 > mean && term < total * 1e-17 {
            break;
        }
        j += 1;
    }
    total
}

/// Largest Poisson mass allowed at or above the truncation level.
pub const TRUNCATION_TAIL: f64 = 1e-8;

/// Evolves `|empty>` under the adjacency matrix of the truncated lattice.
pub fn numeric_walk(t: f64, m_max: usize) -> Result<WalkState> {
    check_t(t)?;
    let tail = poisson_tail(t * t, m_max);
    if tail >= TRUNCATION_TAIL {
        return invalid(format!(
            "t = {t} is unsafe for m_max = {m_max}: Poisson mass {tail:.3e} at m >= m_max (limit {TRUNCATION_TAIL:e})"
        ));
    }
    let lat = enumerate_partitions(m_max)?;
    let mut b = OperatorBuilder::new(lat.len());
    for k in 0..lat.len() {
        for &j in lat.up(k) {
            b.add_real(j, k, 1.0);
        }
    }
    let h = b.build();
    let start = StateVector::basis(lat.len(), 0);
    let amplitudes = if t == 0.0 { start.into_amplitudes() } else { evolve(&h, &start, t, 1e-13)?.into_amplitudes() };
    Ok(WalkState { time: t, partitions: lat.nodes, amplitudes })
}

/// `e^{-t^2} t^{2m} d^2 / (m!)^2`.
pub fn poissonized_plancherel(p: &Partition, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("t must be positive, got {t}"));
    }
    let m = p.size() as f64;
    Ok((-t * t + 2.0 * m * t.ln() + 2.0 * log_hook_dimension(p) - 2.0 * ln_factorial(p.size())).exp())
}

/// `d^2 / m!` for every partition of `m`.
pub fn plancherel_law(m: usize) -> Vec<(Partition, f64)> {
    let ln_m = ln_factorial(m);
    partitions_of(m).into_iter().map(|p| {
        let prob = (2.0 * log_hook_dimension(&p) - ln_m).exp();
        (p, prob)
    }).collect()
}

/// Shape of the row-insertion tableau of a permutation.
pub fn rsk_shape(perm: &[usize]) -> Partition {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for &v in perm {
        let mut x = v;
        let mut placed = false;
        for row in rows.iter_mut() {
            let pos = row.partition_point(|&y| y < x);
            if pos == row.len() {
                row.push(x);
                placed = true;
                break;
            }
            std::mem::swap(&mut row[pos], &mut x);
        }
        if !placed {
            rows.push(vec![x]);
        }
    }
    Partition { parts: rows.iter().map(Vec::len).collect() }
}

fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Plancherel-distributed partition of `m`, from a uniformly random
/// permutation.
pub fn rsk_sample(m: usize, seed: u64) -> Result<Partition> {
    rsk_sample_stream(m, seed, 0)
}

/// As [`rsk_sample`], drawing from stream `stream` of the seeded generator.
pub fn rsk_sample_stream(m: usize, seed: u64, stream: u64) -> Result<Partition> {
    if m == 0 {
        return invalid("rsk_sample needs m >= 1");
    }
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut sample_rng(seed, stream));
    Ok(rsk_shape(&perm))
}

/// `count` samples using streams `0..count`, split across threads.
pub fn rsk_samples(m: usize, count: usize, seed: u64) -> Result<Vec<Partition>> {
    if m == 0 {
        return invalid("rsk_sample needs m >= 1");
    }
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(count.max(1));
    let chunk = count.div_ceil(threads.max(1)).max(1);
    let mut out = vec![Partition::empty(); count];
    std::thread::scope(|s| {
        for (c, slot) in out.chunks_mut(chunk).enumerate() {
            s.spawn(move || {
                for (k, p) in slot.iter_mut().enumerate() {
                    let stream = (c * chunk + k) as u64;
                    *p = rsk_sample_stream(m, seed, stream).expect("m >= 1");
                }
            });
        }
    });
    Ok(out)
}

/// Point of the limit curve, diagram edges along the positive axes.
pub fn limit_shape(theta: f64) -> Result<(f64, f64)> {
    if !(-PI / 2.0..=PI / 2.0).contains(&theta) {
        return invalid(format!("theta = {theta} outside [-pi/2, pi/2]"));
    }
    let (s, c) = theta.sin_cos();
    let k = 2.0 * theta / PI;
    Ok(((k + 1.0) * s + 2.0 / PI * c, (k - 1.0) * s + 2.0 / PI * c))
}

/// `count` evenly spaced points of the limit curve.
pub fn limit_shape_points(count: usize) -> Vec<(f64, f64)> {
    let count = count.max(2);
    (0..count)
        .map(|k| {
            let theta = -PI / 2.0 + PI * k as f64 / (count - 1) as f64;
            limit_shape(theta.clamp(-PI / 2.0, PI / 2.0)).expect("in range")
        })
        .collect()
}

/// The limit curve in rotated coordinates `u = x - y`, `v = x + y`.
pub fn limit_profile(u: f64) -> f64 {
    if u.abs() >= 2.0 {
        u.abs()
    } else {
        2.0 / PI * (u * (u / 2.0).asin() + (4.0 - u * u).sqrt())
    }
}

/// Corners of the diagram boundary from the end of the first column to the
/// end of the first row, scaled by `scale`.
pub fn diagram_boundary(p: &Partition, scale: f64) -> Vec<(f64, f64)> {
    let l = p.rows();
    let mut pts = vec![(0.0, l as f64 * scale)];
    for i in (0..l).rev() {
        let x = p.parts[i] as f64 * scale;
        pts.push((x, (i + 1) as f64 * scale));
        pts.push((x, i as f64 * scale));
    }
    if l == 0 {
        pts.push((0.0, 0.0));
    }
    pts
}

/// Rotated profile `v(u)` of a diagram boundary: piecewise linear with
/// slopes +-1, equal to `|u|` beyond the diagram.
fn diagram_profile(corners: &[(f64, f64)], u: f64) -> f64 {
    let rot: Vec<(f64, f64)> = corners.iter().map(|&(x, y)| (x - y, x + y)).collect();
    let (u0, v0) = rot[0];
    let (u1, v1) = rot[rot.len() - 1];
    if u <= u0 {
        return v0 + (u0 - u);
    }
    if u >= u1 {
        return v1 + (u - u1);
    }
    let k = rot.partition_point(|&(x, _)| x <= u).max(1);
    let (ua, va) = rot[k - 1];
    let (ub, vb) = rot[k];
    if ub == ua {
        va
    } else {
        va + (vb - va) * (u - ua) / (ub - ua)
    }
}

/// Sup distance, in rotated coordinates, between the diagram scaled by
/// `1/sqrt(m)` and the limit curve.
pub fn limit_shape_deviation(p: &Partition) -> f64 {
    let m = p.size();
    if m == 0 {
        return limit_profile(0.0);
    }
    let scale = 1.0 / (m as f64).sqrt();
    let corners = diagram_boundary(p, scale);
    let mut us: Vec<f64> = corners.iter().map(|&(x, y)| x - y).collect();
    let grid = 4000;
    us.extend((0..=grid).map(|k| -2.0 + 4.0 * k as f64 / grid as f64));
    us.iter().map(|&u| (diagram_profile(&corners, u) - limit_profile(u)).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGridComparison {
    pub n: usize,
    pub time: f64,
    /// Largest difference of partition probabilities.
    pub max_deviation: f64,
    /// Walk probability on shapes that do not fit in the `n x n` box.
    pub mass_outside_box: f64,
}

/// Shape of the plaquettes left of a string, one part per column.
pub fn string_partition(z: &StringConfig) -> Partition {
    Partition::new(z.column_depths().iter().map(|&d| z.n() - d).collect())
}

/// Evolution of the string sector under the plaquette-flip adjacency,
/// compared with the walk on the full lattice.
pub fn finite_grid_comparison(n: usize, t: f64) -> Result<FiniteGridComparison> {
    check_t(t)?;
    if n == 0 || n > 6 {
        return invalid(format!("finite grid comparison needs 1 <= n <= 6, got {n}"));
    }
    let strings = enumerate_strings(n);
    let index: HashMap<u64, usize> = strings.iter().enumerate().map(|(k, z)| (z.value(), k)).collect();
    let mut b = OperatorBuilder::new(strings.len());
    for (k, z) in strings.iter().enumerate() {
        for (next, _, forward) in z.neighbors() {
            if forward {
                b.add_real(index[&next.value()], k, 1.0);
            }
        }
    }
    let start = StateVector::basis(strings.len(), index[&StringConfig::initial(n).value()]);
    let state = if t == 0.0 { start } else { evolve(&b.build(), &start, t, 1e-12)? };
    let mut max_deviation: f64 = 0.0;
    let mut inside = 0.0;
    for (z, a) in strings.iter().zip(state.amplitudes()) {
        let walk = exact_amplitude(&string_partition(z), t).norm_sqr();
        inside += walk;
        max_deviation = max_deviation.max((a.norm_sqr() - walk).abs());
    }
    Ok(FiniteGridComparison { n, time: t, max_deviation, mass_outside_box: (1.0 - inside).max(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partitions_of(4).len(), 5);
        let lat = enumerate_partitions(12).unwrap();
        assert_eq!(lat.len(), 272);
        assert_eq!(lat.up(0).len(), 1);
        assert_eq!(lat.down(0).len(), 0);
        assert!(enumerate_partitions(41).is_err());
        // No duplicates, every edge adds one box.
        let mut seen = std::collections::HashSet::new();
        for (k, p) in lat.nodes().iter().enumerate() {
            assert!(seen.insert(p.clone()));
            for &j in lat.up(k) {
                assert_eq!(lat.nodes()[j].size(), p.size() + 1);
            }
        }
    }

    #[test]
    fn partition_parsing() {
        assert_eq!(part("(2,1)").parts(), &[2, 1]);
        assert_eq!(part("()"), Partition::empty());
        assert!("(1,2)".parse::<Partition>().is_err());
        assert_eq!(part("(3,1,1)").to_string(), "(3,1,1)");
        assert_eq!(part("(3,1)").conjugate(), part("(2,1,1)"));
    }

    #[test]
    fn hook_examples() {
        assert_eq!(hook_dimension(&part("(1)")), BigUint::from(1u32));
        assert_eq!(hook_dimension(&part("(2,1)")), BigUint::from(2u32));
        for m in 0..=8 {
            let total: BigUint = partitions_of(m).iter().map(|p| hook_dimension(p).pow(2)).sum();
            let fact: BigUint = (1..=m).fold(BigUint::from(1u32), |a, k| a * BigUint::from(k));
            assert_eq!(total, fact);
        }
    }

    #[test]
    fn hook_matches_tableaux_and_paths() {
        let lat = enumerate_partitions(8).unwrap();
        let mut v = vec![BigUint::default(); lat.len()];
        v[0] = BigUint::from(1u32);
        for m in 1..=8 {
            v = lat.raise(&v);
            for p in lat.level(m) {
                let d = hook_dimension(p);
                assert_eq!(v[lat.index_of(p).unwrap()], d);
                assert_eq!(count_tableaux(p), d);
            }
        }
    }

    #[test]
    fn large_hook_dimension() {
        let p = Partition::new(vec![60, 50, 30, 20, 10]);
        let d = hook_dimension(&p);
        let ln = d.to_string().len() as f64 * 10f64.ln();
        assert!((log_hook_dimension(&p) - ln).abs() < 2.5);
        assert!(hook_dimension(&Partition::new(vec![170])) == BigUint::from(1u32));
    }

    #[test]
    fn differential_poset_examples() {
        let lat = enumerate_partitions(10).unwrap();
        let report = differential_poset_check(&lat).unwrap();
        assert!(report.holds(), "{report:?}");
        assert!(report.boundary_deviation > 0);
        let a = lat.index_of(&part("(2)")).unwrap();
        let b = lat.index_of(&part("(1,1)")).unwrap();
        let common_up = lat.up(a).iter().filter(|j| lat.up(b).contains(j)).count();
        let common_down = lat.down(a).iter().filter(|j| lat.down(b).contains(j)).count();
        assert_eq!((common_up, common_down), (1, 1));
        assert!(differential_poset_check(&enumerate_partitions(1).unwrap()).is_err());
    }

    #[test]
    fn exact_amplitude_examples() {
        let t: f64 = 0.8;
        let g = (-t * t / 2.0).exp();
        assert!((exact_amplitude(&Partition::empty(), t) - C64::new(g, 0.0)).norm() < 1e-15);
        assert!((exact_amplitude(&part("(1)"), t) - C64::new(0.0, -t * g)).norm() < 1e-15);
        for s in ["(2)", "(1,1)"] {
            assert!((exact_amplitude(&part(s), t) - C64::new(-t * t * g / 2.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn truncated_norm_deficit_is_poisson_tail() {
        let t = 1.7;
        let state = exact_walk_amplitudes(t, 10).unwrap();
        let deficit = 1.0 - state.norm_sqr();
        assert!((deficit - poisson_tail(t * t, 11)).abs() < 1e-12);
    }

    #[test]
    fn numeric_walk_matches_exact() {
        let num = numeric_walk(1.0, 12).unwrap();
        let exact = exact_walk_amplitudes(1.0, 12).unwrap();
        assert!(num.max_abs_diff(&exact) < 1e-6, "{}", num.max_abs_diff(&exact));
        let survival = num.amplitudes[0].norm_sqr();
        assert!((survival - (-1.0f64).exp()).abs() < 1e-8);
        let zero = numeric_walk(0.0, 5).unwrap();
        assert_eq!(zero.amplitudes[0], C64::new(1.0, 0.0));
        assert!(numeric_walk(3.0, 12).is_err());
    }

    #[test]
    fn truncation_consistency() {
        let t = 1.2;
        let a = numeric_walk(t, 14).unwrap();
        let b = numeric_walk(t, 16).unwrap();
        let bound = poisson_tail(t * t, 14).sqrt();
        for (k, x) in a.amplitudes.iter().enumerate() {
            assert!((x - b.amplitudes[k]).norm() <= bound);
        }
    }

    #[test]
    fn poisson_tail_matches_statrs() {
        use statrs::distribution::{DiscreteCDF, Poisson};
        let d = Poisson::new(2.5).unwrap();
        for k in 1..12 {
            assert!((poisson_tail(2.5, k) - d.sf(k as u64 - 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn plancherel_examples() {
        let t = 1.3f64;
        assert!((poissonized_plancherel(&Partition::empty(), t).unwrap() - (-t * t).exp()).abs() < 1e-15);
        let p = poissonized_plancherel(&part("(2,1)"), 1.0).unwrap();
        assert!((p - 4.0 * (-1.0f64).exp() / 36.0).abs() < 1e-15);
        for m in 0..=7 {
            let total: f64 = partitions_of(m).iter().map(|p| poissonized_plancherel(p, t).unwrap()).sum();
            let expected = (-t * t + 2.0 * m as f64 * t.ln() - ln_factorial(m)).exp();
            assert!((total - expected).abs() < 1e-14);
        }
        assert!(poissonized_plancherel(&Partition::empty(), 0.0).is_err());
    }

    #[test]
    fn rsk_exact_law_for_small_m() {
        // Shapes of all 6 permutations of 3.
        let mut counts: HashMap<Partition, usize> = HashMap::new();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            *counts.entry(rsk_shape(&p)).or_default() += 1;
        }
        assert_eq!(counts[&part("(3)")], 1);
        assert_eq!(counts[&part("(2,1)")], 4);
        assert_eq!(counts[&part("(1,1,1)")], 1);
        for seed in 0..5 {
            assert_eq!(rsk_sample(1, seed).unwrap(), part("(1)"));
        }
        assert!(rsk_sample(0, 1).is_err());
    }

    fn chi_square_ok(m: usize, samples: usize, seed: u64) {
        let law = plancherel_law(m);
        let drawn = rsk_samples(m, samples, seed).unwrap();
        let mut counts: HashMap<Partition, usize> = HashMap::new();
        for p in drawn {
            *counts.entry(p).or_default() += 1;
        }
        let stat: f64 = law
            .iter()
            .map(|(p, prob)| {
                let e = prob * samples as f64;
                let o = counts.get(p).copied().unwrap_or(0) as f64;
                (o - e).powi(2) / e
            })
            .sum();
        let crit = ChiSquared::new((law.len() - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(stat < crit, "m = {m}: {stat} >= {crit}");
    }

    #[test]
    fn rsk_matches_plancherel() {
        chi_square_ok(3, 60000, 11);
        chi_square_ok(8, 60000, 12);
    }

    #[test]
    fn rsk_is_deterministic() {
        assert_eq!(rsk_sample(50, 9).unwrap(), rsk_sample(50, 9).unwrap());
        assert_eq!(rsk_samples(30, 10, 4).unwrap(), rsk_samples(30, 10, 4).unwrap());
    }

    #[test]
    fn limit_shape_examples() {
        let (x, y) = limit_shape(0.0).unwrap();
        assert!((x - 2.0 / PI).abs() < 1e-15 && (y - 2.0 / PI).abs() < 1e-15);
        let (x, y) = limit_shape(PI / 2.0).unwrap();
        assert!((x - 2.0).abs() < 1e-15 && y.abs() < 1e-15);
        let (x, y) = limit_shape(-PI / 2.0).unwrap();
        assert!(x.abs() < 1e-15 && (y - 2.0).abs() < 1e-15);
        assert!(limit_shape(2.0).is_err());
    }

    #[test]
    fn rotated_profile_matches_curve() {
        for k in 0..=50 {
            let theta = -PI / 2.0 + PI * k as f64 / 50.0;
            let (x, y) = limit_shape(theta).unwrap();
            assert!((limit_profile(x - y) - (x + y)).abs() < 1e-12);
        }
    }

    #[test]
    fn diagram_profile_examples() {
        let p = part("(2,1)");
        let corners = diagram_boundary(&p, 1.0);
        assert_eq!(corners, vec![(0.0, 2.0), (1.0, 2.0), (1.0, 1.0), (2.0, 1.0), (2.0, 0.0)]);
        assert_eq!(diagram_profile(&corners, -2.0), 2.0);
        assert_eq!(diagram_profile(&corners, 0.0), 2.0);
        assert_eq!(diagram_profile(&corners, 1.0), 3.0);
        assert_eq!(diagram_profile(&corners, 5.0), 5.0);
    }

    #[test]
    fn large_samples_approach_limit() {
        let samples = rsk_samples(1600, 20, 7).unwrap();
        let good = samples.iter().filter(|p| limit_shape_deviation(p) <= 0.12).count();
        assert!(good >= 19, "{good}");
    }

    #[test]
    fn finite_grid_agrees_at_short_times() {
        let early = finite_grid_comparison(4, 0.3).unwrap();
        assert!(early.max_deviation < 1e-6);
        let later = finite_grid_comparison(4, 2.0).unwrap();
        assert!(later.max_deviation > early.max_deviation);
        assert_eq!(string_partition(&StringConfig::initial(3)), Partition::empty());
        assert_eq!(string_partition(&StringConfig::terminal(3)).parts(), &[3, 3, 3]);
    }

    proptest! {
        #[test]
        fn limit_shape_symmetry(theta in -PI / 2.0..PI / 2.0) {
            let (x, y) = limit_shape(theta).unwrap();
            let (x2, y2) = limit_shape(-theta).unwrap();
            prop_assert_eq!(x, y2);
            prop_assert_eq!(y, x2);
        }

        #[test]
        fn rsk_shape_has_size_m(m in 1usize..60, seed in any::<u64>()) {
            prop_assert_eq!(rsk_sample(m, seed).unwrap().size(), m);
        }

        #[test]
        fn conjugation_preserves_dimension(m in 1usize..15, pick in any::<prop::sample::Index>()) {
            let all = partitions_of(m);
            let p = pick.get(&all);
            prop_assert_eq!(hook_dimension(p), hook_dimension(&p.conjugate()));
        }
    }
}
