//! The rotated `n x n` grid: edge coordinates, strings, plaquettes, circuits
//! and the partial circuit unitaries `V(z)`.
//!
//! Conventions used throughout the crate:
//!
//! * Vertices are `(i, j)` with `0 <= i, j <= n`; `(0, 0)` is the top corner,
//!   `(n, 0)` the left corner and `(n, n)` the bottom corner.
//! * A string is a bitstring `z_1 ... z_2n` of weight `n`; bit `0` steps from
//!   `(i, j)` to `(i + 1, j)` (down-left), bit `1` steps to `(i, j + 1)`
//!   (down-right). It is stored as an integer with `z_1` as the most
//!   significant bit, so lexicographic and numeric order agree.
//! * The edge leaving `(i, j)` with bit `x` is `(i, j, x)` in rotated form and
//!   `(t, w) = (j - i + n + x, i + j + 1)` in unrotated form; `t <= n` is the
//!   left half of the grid.
//! * Plaquette `(a, b)` is the unit square whose top vertex is `(a, b)`. It
//!   carries a gate on qubits `w = a + b + 1` and `w + 1`; the first tensor
//!   factor of the 4x4 matrix is line `w`.
//! * Qubit `w` of a `2n`-qubit register is bit `2n - w` of the basis index.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, Matrix4};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::C64;

/// Tolerance for accepting a gate as unitary.
pub const UNITARY_TOL: f64 = 1e-12;

/// A weight-`n` bitstring of length `2n` describing a connected string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StringConfig {
    n: usize,
    bits: u64,
}

impl StringConfig {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || 2 * n > 62 {
            return invalid(format!("grid size n = {n} out of range"));
        }
        if bits >> (2 * n) != 0 || bits.count_ones() as usize != n {
            return invalid(format!("bits {bits:#b} do not form a weight-{n} string of length {}", 2 * n));
        }
        Ok(Self { n, bits })
    }

    /// Parses a string such as `"0011"`.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() % 2 != 0 {
            return invalid(format!("string {s:?} must have positive even length"));
        }
        let mut bits = 0u64;
        for ch in s.chars() {
            bits = (bits << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return invalid(format!("string {s:?} contains {ch:?}")),
                };
        }
        Self::new(s.len() / 2, bits)
    }

    /// `0^n 1^n`: every particle on the left boundary.
    pub fn initial(n: usize) -> Self {
        Self { n, bits: (1u64 << n) - 1 }
    }

    /// `1^n 0^n`: every particle on the right boundary.
    pub fn terminal(n: usize) -> Self {
        Self { n, bits: ((1u64 << n) - 1) << n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        2 * self.n
    }

    /// Integer value with `z_1` most significant; the basis index of `|z>`.
    pub fn value(&self) -> u64 {
        self.bits
    }

    /// Bit `z_w` for `1 <= w <= 2n`.
    pub fn bit(&self, w: usize) -> u8 {
        debug_assert!((1..=2 * self.n).contains(&w));
        ((self.bits >> (2 * self.n - w)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=2 * self.n).map(|w| self.bit(w)).collect()
    }

    /// Number of plaquettes to the right of the string:
    /// `sum_j j z_j - n (n + 1) / 2`.
    pub fn area(&self) -> usize {
        let s: usize = (1..=2 * self.n).map(|w| w * self.bit(w) as usize).sum();
        s - self.n * (self.n + 1) / 2
    }

    /// Number of adjacent positions with differing bits.
    pub fn kinks(&self) -> usize {
        (1..2 * self.n).filter(|&w| self.bit(w) != self.bit(w + 1)).count()
    }

    /// Vertices visited by the string, from `(0, 0)` to `(n, n)`.
    pub fn vertices(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(2 * self.n + 1);
        let (mut i, mut j) = (0, 0);
        v.push((i, j));
        for w in 1..=2 * self.n {
            if self.bit(w) == 0 {
                i += 1;
            } else {
                j += 1;
            }
            v.push((i, j));
        }
        v
    }

    /// Occupied edge on each line `w = 1..=2n`.
    pub fn edges(&self) -> Vec<RotatedEdge> {
        let verts = self.vertices();
        (1..=2 * self.n)
            .map(|w| {
                let (i, j) = verts[w - 1];
                RotatedEdge { i, j, x: self.bit(w) }
            })
            .collect()
    }

    /// `depths[b]` is the number of zeros preceding the `(b+1)`-th one: the
    /// column `b` of plaquettes is split at `i = depths[b]`.
    pub fn column_depths(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        let mut zeros = 0;
        for w in 1..=2 * self.n {
            if self.bit(w) == 0 {
                zeros += 1;
            } else {
                out.push(zeros);
            }
        }
        out
    }

    /// Whether plaquette `p` lies to the left of the string (its gate has
    /// been applied).
    pub fn is_left(&self, p: Plaquette) -> bool {
        p.a >= self.column_depths()[p.b]
    }

    /// Plaquettes left of the string, listed column by column (`b`
    /// ascending, `a` descending). This is a linear extension of the gate
    /// order.
    pub fn plaquettes_left(&self) -> Vec<Plaquette> {
        let depths = self.column_depths();
        let mut out = Vec::new();
        for (b, &d) in depths.iter().enumerate() {
            for a in (d..self.n).rev() {
                out.push(Plaquette { a, b });
            }
        }
        out
    }

    /// Strings reachable by swapping one adjacent `01`/`10` pair, with the
    /// plaquette between them and whether the move is forward (`01 -> 10`).
    pub fn neighbors(&self) -> Vec<(StringConfig, Plaquette, bool)> {
        let verts = self.vertices();
        let mut out = Vec::new();
        for w in 1..2 * self.n {
            let (b1, b2) = (self.bit(w), self.bit(w + 1));
            if b1 == b2 {
                continue;
            }
            let mask = (1u64 << (2 * self.n - w)) | (1u64 << (2 * self.n - w - 1));
            let next = StringConfig { n: self.n, bits: self.bits ^ mask };
            let (i, j) = verts[w - 1];
            let p = Plaquette { a: i, b: j };
            out.push((next, p, b1 == 0));
        }
        out
    }
}

impl fmt::Display for StringConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in 1..=2 * self.n {
            write!(f, "{}", self.bit(w))?;
        }
        Ok(())
    }
}

/// All `C(2n, n)` strings in lexicographic order.
pub fn enumerate_strings(n: usize) -> Vec<StringConfig> {
    assert!(n >= 1 && 2 * n <= 62, "grid size out of range");
    let len = 2 * n;
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << n) - 1;
    let limit = 1u64 << len;
    while v < limit {
        out.push(StringConfig { n, bits: v });
        // Next integer with the same popcount.
        let t = v | (v - 1);
        let next = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
        v = next;
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Edge in rotated coordinates: upper vertex `(i, j)` and direction `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RotatedEdge {
    pub i: usize,
    pub j: usize,
    pub x: u8,
}

/// Edge in unrotated coordinates: horizontal position `t` on line `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridEdge {
    pub t: usize,
    pub w: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeCoord {
    Rotated(RotatedEdge),
    Grid(GridEdge),
}

impl RotatedEdge {
    pub fn line(&self) -> usize {
        self.i + self.j + 1
    }

    pub fn upper_vertex(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn lower_vertex(&self) -> (usize, usize) {
        if self.x == 0 {
            (self.i + 1, self.j)
        } else {
            (self.i, self.j + 1)
        }
    }

    pub fn is_valid(&self, n: usize) -> bool {
        let (li, lj) = self.lower_vertex();
        self.x <= 1 && li <= n && lj <= n
    }

    pub fn to_grid(&self, n: usize) -> Result<GridEdge> {
        if !self.is_valid(n) {
            return Err(Error::InvalidCoordinate(format!("{self:?} is not an edge of the n = {n} grid")));
        }
        Ok(GridEdge { t: self.j + n + self.x as usize - self.i, w: self.line() })
    }
}

impl GridEdge {
    pub fn is_valid(&self, n: usize) -> bool {
        if self.w < 1 || self.w > 2 * n {
            return false;
        }
        let c = line_half_width(n, self.w);
        self.t + c > n && self.t <= n + c
    }

    pub fn to_rotated(&self, n: usize) -> Result<RotatedEdge> {
        if !self.is_valid(n) {
            return Err(Error::InvalidCoordinate(format!("{self:?} is not an edge of the n = {n} grid")));
        }
        // j - i = t - n - x and i + j = w - 1 share parity.
        let (t, w, n) = (self.t as i64, self.w as i64, n as i64);
        let x = (t - n - (w - 1)).rem_euclid(2);
        let diff = t - n - x;
        let j = (w - 1 + diff) / 2;
        let i = w - 1 - j;
        Ok(RotatedEdge { i: i as usize, j: j as usize, x: x as u8 })
    }

    /// Mirror image about the vertical center line.
    pub fn mirror(&self, n: usize) -> GridEdge {
        GridEdge { t: 2 * n + 1 - self.t, w: self.w }
    }

    pub fn is_left_half(&self, n: usize) -> bool {
        self.t <= n
    }
}

/// Converts between rotated and unrotated edge coordinates.
pub fn edge_convert(n: usize, coord: EdgeCoord) -> Result<EdgeCoord> {
    match coord {
        EdgeCoord::Rotated(e) => e.to_grid(n).map(EdgeCoord::Grid),
        EdgeCoord::Grid(e) => e.to_rotated(n).map(EdgeCoord::Rotated),
    }
}

/// `min(w, 2n + 1 - w)`; line `w` has `2 * line_half_width` edges at
/// positions `n + 1 - c ..= n + c`.
pub fn line_half_width(n: usize, w: usize) -> usize {
    w.min(2 * n + 1 - w)
}

/// Edges of line `w`, left to right.
pub fn line_edges(n: usize, w: usize) -> Vec<GridEdge> {
    let c = line_half_width(n, w);
    (n + 1 - c..=n + c).map(|t| GridEdge { t, w }).collect()
}

/// Occupied edge of a string on each line, as [`EdgeCoord::Rotated`].
pub fn string_edges(z: &StringConfig) -> Vec<EdgeCoord> {
    z.edges().into_iter().map(EdgeCoord::Rotated).collect()
}

/// Plaquette with top vertex `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Plaquette {
    pub a: usize,
    pub b: usize,
}

impl Plaquette {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// Upper line `w`; the gate acts on lines `w` and `w + 1`.
    pub fn line(&self) -> usize {
        self.a + self.b + 1
    }

    /// Position `t` of the two left edges; the right edges sit at `t + 1`.
    pub fn t(&self, n: usize) -> usize {
        self.b + n - self.a
    }

    pub fn is_valid(&self, n: usize) -> bool {
        self.a < n && self.b < n
    }

    /// Topological layer: number of gates on the longest chain before it.
    pub fn layer(&self, n: usize) -> usize {
        (n - 1 - self.a) + self.b
    }
}

/// All plaquettes of the grid in `(a, b)` order.
pub fn all_plaquettes(n: usize) -> Vec<Plaquette> {
    (0..n).flat_map(|a| (0..n).map(move |b| Plaquette { a, b })).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Left corner of the region at vertex `(ceil(n/2), ceil(n/2))`.
    AdiabaticCenter,
    /// Region touching the left corner `(n, 0)` of the grid.
    JanzingLeftCorner,
    /// Region whose top plaquette is `origin`.
    Custom,
}

/// Grid size together with its square interaction region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub n: usize,
    pub kind: RegionKind,
    pub size: usize,
    /// Top plaquette `(a0, b0)` of the region; the region is
    /// `a0 <= a < a0 + size`, `b0 <= b < b0 + size`.
    pub origin: Plaquette,
}

impl GridSpec {
    pub fn adiabatic_center(n: usize, size: usize) -> Result<Self> {
        let c = n.div_ceil(2);
        if size == 0 || size > c {
            return invalid(format!("region size {size} does not fit at the center of the n = {n} grid"));
        }
        Self::checked(n, RegionKind::AdiabaticCenter, size, Plaquette { a: c - size, b: c })
    }

    pub fn janzing_left_corner(n: usize, size: usize) -> Result<Self> {
        if size == 0 || size > n {
            return invalid(format!("region size {size} does not fit in the n = {n} grid"));
        }
        Self::checked(n, RegionKind::JanzingLeftCorner, size, Plaquette { a: n - size, b: 0 })
    }

    pub fn custom(n: usize, size: usize, origin: Plaquette) -> Result<Self> {
        Self::checked(n, RegionKind::Custom, size, origin)
    }

    fn checked(n: usize, kind: RegionKind, size: usize, origin: Plaquette) -> Result<Self> {
        if n == 0 {
            return invalid("grid size must be positive");
        }
        if size == 0 || origin.a + size > n || origin.b + size > n {
            return invalid(format!("region of size {size} at {origin:?} does not fit in the n = {n} grid"));
        }
        Ok(Self { n, kind, size, origin })
    }

    pub fn contains(&self, p: Plaquette) -> bool {
        (self.origin.a..self.origin.a + self.size).contains(&p.a)
            && (self.origin.b..self.origin.b + self.size).contains(&p.b)
    }

    pub fn region_plaquettes(&self) -> Vec<Plaquette> {
        all_plaquettes(self.n).into_iter().filter(|p| self.contains(*p)).collect()
    }

    /// The `2 * size` lines that intersect the region.
    pub fn region_lines(&self) -> Vec<usize> {
        let first = self.origin.a + self.origin.b + 1;
        (first..first + 2 * self.size).collect()
    }

    /// Whether every region plaquette lies left of the string.
    pub fn string_right_of_region(&self, z: &StringConfig) -> bool {
        let depths = z.column_depths();
        (self.origin.b..self.origin.b + self.size).all(|b| depths[b] <= self.origin.a)
    }

    /// On line `w`, the smallest `t` that is right of every region edge.
    pub fn right_threshold(&self, w: usize) -> Option<usize> {
        self.region_plaquettes()
            .into_iter()
            .filter(|p| p.line() == w || p.line() + 1 == w)
            .map(|p| p.t(self.n) + 1)
            .max()
    }
}

/// A 4x4 gate on every plaquette; identity outside the interaction region.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaquetteCircuit {
    grid: GridSpec,
    gates: BTreeMap<Plaquette, Matrix4<C64>>,
}

pub fn unitarity_deviation(u: &Matrix4<C64>) -> f64 {
    (u.adjoint() * u - Matrix4::<C64>::identity()).camax()
}

impl PlaquetteCircuit {
    /// All-identity circuit.
    pub fn identity(grid: GridSpec) -> Self {
        Self { grid, gates: BTreeMap::new() }
    }

    /// Haar-random gates on every region plaquette.
    pub fn random<R: Rng + ?Sized>(grid: GridSpec, rng: &mut R) -> Self {
        let mut c = Self::identity(grid);
        for p in grid.region_plaquettes() {
            c.gates.insert(p, random_unitary(rng));
        }
        c
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn set_gate(&mut self, p: Plaquette, u: Matrix4<C64>) -> Result<()> {
        if !p.is_valid(self.grid.n) {
            return Err(Error::InvalidCoordinate(format!("plaquette {p:?} outside the n = {} grid", self.grid.n)));
        }
        if !self.grid.contains(p) {
            return Err(Error::GateOutsideRegion { a: p.a, b: p.b });
        }
        let deviation = unitarity_deviation(&u);
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NonUnitary { a: p.a, b: p.b, deviation });
        }
        self.gates.insert(p, u);
        Ok(())
    }

    pub fn gate(&self, p: Plaquette) -> Matrix4<C64> {
        self.gates.get(&p).copied().unwrap_or_else(Matrix4::identity)
    }

    /// Explicitly set gates.
    pub fn gates(&self) -> impl Iterator<Item = (&Plaquette, &Matrix4<C64>)> {
        self.gates.iter()
    }

    /// Applies the gates left of `z` to a `2n`-qubit state in place.
    pub fn apply_partial(&self, z: &StringConfig, state: &mut [C64]) {
        self.apply_sequence(&z.plaquettes_left(), state);
    }

    /// Applies the gates of `order` (first element first).
    pub fn apply_sequence(&self, order: &[Plaquette], state: &mut [C64]) {
        let nq = 2 * self.grid.n;
        for p in order {
            if let Some(u) = self.gates.get(p) {
                apply_two_qubit(state, nq, p.line(), u);
            }
        }
    }

    /// `V(z)` as a dense `2^{2n}` matrix.
    pub fn partial_unitary(&self, z: &StringConfig) -> DMatrix<C64> {
        self.unitary_of_sequence(&z.plaquettes_left())
    }

    pub fn unitary_of_sequence(&self, order: &[Plaquette]) -> DMatrix<C64> {
        let dim = 1usize << (2 * self.grid.n);
        let mut m = DMatrix::identity(dim, dim);
        for c in 0..dim {
            let mut col: Vec<C64> = m.column(c).iter().copied().collect();
            self.apply_sequence(order, &mut col);
            m.set_column(c, &nalgebra::DVector::from_vec(col));
        }
        m
    }

    /// Runs the whole circuit layer by layer on `state`.
    pub fn simulate(&self, state: &mut [C64]) {
        let n = self.grid.n;
        let mut order = all_plaquettes(n);
        order.sort_by_key(|p| (p.layer(n), p.a));
        self.apply_sequence(&order, state);
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            n: self.grid.n,
            region: RegionSpec {
                kind: self.grid.kind,
                size: self.grid.size,
                origin: Some([self.grid.origin.a, self.grid.origin.b]),
            },
            gates: self
                .gates
                .iter()
                .map(|(p, u)| GateSpec {
                    plaquette: [p.a, p.b],
                    unitary: std::array::from_fn(|r| std::array::from_fn(|c| [u[(r, c)].re, u[(r, c)].im])),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &CircuitFile) -> Result<Self> {
        let grid = file.region.to_grid(file.n)?;
        let mut circuit = Self::identity(grid);
        for g in &file.gates {
            let u = Matrix4::from_fn(|r, c| C64::new(g.unitary[r][c][0], g.unitary[r][c][1]));
            circuit.set_gate(Plaquette::new(g.plaquette[0], g.plaquette[1]), u)?;
        }
        Ok(circuit)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CircuitFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("circuit serializes")
    }
}

/// On-disk circuit description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n: usize,
    pub region: RegionSpec,
    #[serde(default)]
    pub gates: Vec<GateSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[usize; 2]>,
}

impl RegionSpec {
    pub fn to_grid(&self, n: usize) -> Result<GridSpec> {
        match self.kind {
            RegionKind::AdiabaticCenter => GridSpec::adiabatic_center(n, self.size),
            RegionKind::JanzingLeftCorner => GridSpec::janzing_left_corner(n, self.size),
            RegionKind::Custom => match self.origin {
                Some([a, b]) => GridSpec::custom(n, self.size, Plaquette::new(a, b)),
                None => Err(Error::Malformed("custom region requires an origin".into())),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub plaquette: [usize; 2],
    /// Row-major 4x4 matrix of `[re, im]` pairs.
    pub unitary: [[[f64; 2]; 4]; 4],
}

/// Applies a 4x4 gate to qubits `w` (first factor) and `w + 1` of an
/// `nq`-qubit state vector.
pub fn apply_two_qubit(state: &mut [C64], nq: usize, w: usize, u: &Matrix4<C64>) {
    debug_assert_eq!(state.len(), 1 << nq);
    let hi = 1usize << (nq - w);
    let lo = 1usize << (nq - w - 1);
    for base in 0..state.len() {
        if base & (hi | lo) != 0 {
            continue;
        }
        let idx = [base, base | lo, base | hi, base | hi | lo];
        let v = idx.map(|k| state[k]);
        for r in 0..4 {
            state[idx[r]] = (0..4).map(|c| u[(r, c)] * v[c]).sum();
        }
    }
}

/// Haar-random 4x4 unitary (QR of a complex Gaussian matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<C64> {
    let g = Matrix4::from_fn(|_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = Matrix4::from_fn(|i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    q * phases
}
