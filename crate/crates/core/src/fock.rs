//! Interacting-particle Hamiltonian with one particle per line.
//!
//! A particle on line `w` sits on one of the `2 c_w` edges of that line and
//! carries one internal qubit. Particles never change lines, so they are
//! treated as distinguishable and labelled by `w`.
//!
//! Full-space basis ordering: mixed radix over lines with line 1 most
//! significant; the local index on line `w` is `2 (t - t_min(w)) + bit`.
//!
//! String-sector ordering: `x * C(2n, n) + rank(z)` where `x` is the
//! `2n`-bit register (line 1 most significant) and `rank` is the
//! lexicographic rank of the string.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    all_plaquettes, enumerate_strings, line_half_width, GridEdge, Plaquette, PlaquetteCircuit, RotatedEdge,
    StringConfig,
};
use crate::numerics::{HermitianOperator, OperatorBuilder, StateVector, C64};

/// Largest `n` for which the full Fock space is enumerated.
pub const MAX_FULL_N: usize = 3;

/// Edge position and internal bit of every particle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FockConfig {
    n: usize,
    /// `(t, bit)` for lines `1..=2n`, stored at index `w - 1`.
    particles: Vec<(usize, u8)>,
}

impl FockConfig {
    pub fn new(n: usize, particles: Vec<(usize, u8)>) -> Result<Self> {
        if particles.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: particles.len() });
        }
        for (k, &(t, bit)) in particles.iter().enumerate() {
            if bit > 1 || !(GridEdge { t, w: k + 1 }).is_valid(n) {
                return Err(Error::InvalidCoordinate(format!("line {} has no edge {t} (bit {bit})", k + 1)));
            }
        }
        Ok(Self { n, particles })
    }

    /// Particles along the string `z` with internal register `x`.
    pub fn from_string(z: &StringConfig, x: u64) -> Self {
        let n = z.n();
        let particles = z
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let t = e.to_grid(n).expect("string edges are valid").t;
                (t, ((x >> (2 * n - 1 - k)) & 1) as u8)
            })
            .collect();
        Self { n, particles }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Position on line `w` (1-based).
    pub fn position(&self, w: usize) -> usize {
        self.particles[w - 1].0
    }

    pub fn bit(&self, w: usize) -> u8 {
        self.particles[w - 1].1
    }

    pub fn particles(&self) -> &[(usize, u8)] {
        &self.particles
    }

    pub fn edge(&self, w: usize) -> RotatedEdge {
        GridEdge { t: self.position(w), w }.to_rotated(self.n).expect("valid by construction")
    }

    /// Internal register with line 1 most significant.
    pub fn register(&self) -> u64 {
        self.particles.iter().fold(0, |acc, &(_, b)| (acc << 1) | b as u64)
    }

    /// The string traced by the particles, if they are connected.
    pub fn as_string(&self) -> Option<StringConfig> {
        if segment_count(self) != 1 {
            return None;
        }
        let bits = (1..=2 * self.n).fold(0u64, |acc, w| (acc << 1) | self.edge(w).x as u64);
        StringConfig::new(self.n, bits).ok()
    }
}

/// Number of maximal runs of particles on consecutive lines whose edges
/// share a vertex.
pub fn segment_count(cfg: &FockConfig) -> usize {
    1 + (1..2 * cfg.n)
        .filter(|&w| cfg.edge(w).lower_vertex() != cfg.edge(w + 1).upper_vertex())
        .count()
}

/// Shape of the full Fock space for a given `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    n: usize,
    /// Local dimension `4 c_w` of each line.
    local: Vec<usize>,
    strides: Vec<usize>,
}

impl FockSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_FULL_N {
            return invalid(format!("full Fock space is only built for 1 <= n <= {MAX_FULL_N}, got {n}"));
        }
        let local: Vec<usize> = (1..=2 * n).map(|w| 4 * line_half_width(n, w)).collect();
        let mut strides = vec![1; 2 * n];
        for k in (0..2 * n - 1).rev() {
            strides[k] = strides[k + 1] * local[k + 1];
        }
        Ok(Self { n, local, strides })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.strides[0] * self.local[0]
    }

    fn t_min(&self, w: usize) -> usize {
        self.n + 1 - line_half_width(self.n, w)
    }

    pub fn index_of(&self, cfg: &FockConfig) -> usize {
        cfg.particles
            .iter()
            .enumerate()
            .map(|(k, &(t, b))| ((t - self.t_min(k + 1)) * 2 + b as usize) * self.strides[k])
            .sum()
    }

    pub fn config(&self, index: usize) -> FockConfig {
        let particles = (0..2 * self.n)
            .map(|k| {
                let local = (index / self.strides[k]) % self.local[k];
                (self.t_min(k + 1) + local / 2, (local % 2) as u8)
            })
            .collect();
        FockConfig { n: self.n, particles }
    }
}

/// All configurations of the full space in basis order.
pub fn enumerate_fock_basis(n: usize) -> Result<Vec<FockConfig>> {
    let space = FockSpace::new(n)?;
    Ok((0..space.dim()).map(|i| space.config(i)).collect())
}

/// Ordered set of configurations an operator is assembled on.
#[derive(Clone, Debug)]
pub enum FockBasis {
    Full(FockSpace),
    Strings(StringSector),
}

impl FockBasis {
    pub fn full(n: usize) -> Result<Self> {
        FockSpace::new(n).map(FockBasis::Full)
    }

    pub fn strings(n: usize) -> Result<Self> {
        StringSector::new(n).map(FockBasis::Strings)
    }

    pub fn n(&self) -> usize {
        match self {
            FockBasis::Full(s) => s.n,
            FockBasis::Strings(s) => s.n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FockBasis::Full(s) => s.dim(),
            FockBasis::Strings(s) => s.dim(),
        }
    }

    pub fn config(&self, index: usize) -> FockConfig {
        match self {
            FockBasis::Full(s) => s.config(index),
            FockBasis::Strings(s) => s.config(index),
        }
    }

    pub fn index_of(&self, cfg: &FockConfig) -> Option<usize> {
        match self {
            FockBasis::Full(s) => Some(s.index_of(cfg)),
            FockBasis::Strings(s) => s.index_of(cfg),
        }
    }
}

/// The connected-string subspace `span{|x>|z>}`.
#[derive(Clone, Debug)]
pub struct StringSector {
    n: usize,
    strings: Vec<StringConfig>,
    rank: HashMap<u64, usize>,
}

/// Largest `n` for which the string sector is assembled.
pub const MAX_SECTOR_N: usize = 5;

impl StringSector {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SECTOR_N {
            return invalid(format!("string sector is only built for 1 <= n <= {MAX_SECTOR_N}, got {n}"));
        }
        let strings = enumerate_strings(n);
        let rank = strings.iter().enumerate().map(|(k, z)| (z.value(), k)).collect();
        Ok(Self { n, strings, rank })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn strings(&self) -> &[StringConfig] {
        &self.strings
    }

    pub fn num_strings(&self) -> usize {
        self.strings.len()
    }

    pub fn dim(&self) -> usize {
        self.strings.len() << (2 * self.n)
    }

    pub fn rank(&self, z: &StringConfig) -> usize {
        self.rank[&z.value()]
    }

    pub fn index(&self, x: u64, z: &StringConfig) -> usize {
        x as usize * self.strings.len() + self.rank(z)
    }

    /// `(x, z)` of a sector index.
    pub fn split(&self, index: usize) -> (u64, StringConfig) {
        let m = self.strings.len();
        ((index / m) as u64, self.strings[index % m])
    }

    pub fn config(&self, index: usize) -> FockConfig {
        let (x, z) = self.split(index);
        FockConfig::from_string(&z, x)
    }

    pub fn index_of(&self, cfg: &FockConfig) -> Option<usize> {
        cfg.as_string().map(|z| self.index(cfg.register(), &z))
    }

    /// Full-space indices of the sector states, in sector order.
    pub fn full_indices(&self, space: &FockSpace) -> Vec<usize> {
        (0..self.dim()).map(|k| space.index_of(&self.config(k))).collect()
    }
}

/// Which pieces of `H(lambda)` to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermFlags {
    pub string: bool,
    pub gates: bool,
    pub init: bool,
    pub input: bool,
}

impl TermFlags {
    pub fn all() -> Self {
        Self { string: true, gates: true, init: true, input: true }
    }

    /// `H_circuit` only: gates and initialization.
    pub fn circuit() -> Self {
        Self { string: false, gates: true, init: true, input: false }
    }
}

/// Parameters of `H(lambda)`.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms<'a> {
    pub lambda: f64,
    pub flags: TermFlags,
    pub circuit: &'a PlaquetteCircuit,
}

impl<'a> HamiltonianTerms<'a> {
    pub fn new(lambda: f64, flags: TermFlags, circuit: &'a PlaquetteCircuit) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda, flags, circuit })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("lambda = {lambda} outside [0, 1]"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    String,
    Prop(Plaquette),
    Gate(Plaquette),
    Init,
    Input,
}

/// Energy of `cfg` under the vertex penalties: each non-corner vertex costs
/// one unit when exactly one of its upper and lower edges is occupied.
pub fn string_energy(cfg: &FockConfig) -> f64 {
    let n = cfg.n;
    let mut energy = 0usize;
    for i in 0..=n {
        for j in 0..=n {
            if (i, j) == (0, 0) || (i, j) == (n, n) {
                continue;
            }
            let level = i + j;
            let up = level >= 1 && cfg.edge(level).lower_vertex() == (i, j);
            let down = level < 2 * n && cfg.edge(level + 1).upper_vertex() == (i, j);
            energy += (up != down) as usize;
        }
    }
    energy as f64
}

/// Number of plaquette-`p` occupations `n_T n_T + n_{T+1} n_{T+1}`.
fn gate_diagonal(cfg: &FockConfig, p: Plaquette) -> f64 {
    let (w, t) = (p.line(), p.t(cfg.n));
    let (a, b) = (cfg.position(w), cfg.position(w + 1));
    ((a == t && b == t) || (a == t + 1 && b == t + 1)) as u8 as f64
}

fn init_diagonal(cfg: &FockConfig) -> f64 {
    let n = cfg.n;
    (cfg.position(1) == n + 1) as u8 as f64 + (cfg.position(2 * n) == n + 1) as u8 as f64
}

fn input_diagonal(cfg: &FockConfig) -> f64 {
    cfg.particles.iter().filter(|&&(t, b)| t <= cfg.n && b == 1).count() as f64
}

/// `H_prop^p |cfg>` restricted to the forward move (both particles from the
/// left edges to the right edges of `p`).
fn prop_forward(cfg: &FockConfig, p: Plaquette, circuit: &PlaquetteCircuit) -> Vec<(FockConfig, C64)> {
    let (w, t) = (p.line(), p.t(cfg.n));
    if cfg.position(w) != t || cfg.position(w + 1) != t {
        return Vec::new();
    }
    let u = circuit.gate(p);
    let col = ((cfg.bit(w) as usize) << 1) | cfg.bit(w + 1) as usize;
    (0..4)
        .filter(|&row| u[(row, col)] != C64::new(0.0, 0.0))
        .map(|row| {
            let mut next = cfg.clone();
            next.particles[w - 1] = (t + 1, (row >> 1) as u8);
            next.particles[w] = (t + 1, (row & 1) as u8);
            (next, -u[(row, col)])
        })
        .collect()
}

/// Whether a backward move of `p` from `cfg` exists (used for leakage
/// detection only).
fn prop_backward_targets(cfg: &FockConfig, p: Plaquette) -> Option<FockConfig> {
    let (w, t) = (p.line(), p.t(cfg.n));
    if cfg.position(w) != t + 1 || cfg.position(w + 1) != t + 1 {
        return None;
    }
    let mut prev = cfg.clone();
    prev.particles[w - 1].0 = t;
    prev.particles[w].0 = t;
    Some(prev)
}

/// Diagonal weights and hopping plaquettes of one term.
struct TermSpec {
    diagonal: Vec<(f64, DiagKind)>,
    hops: Vec<(f64, Plaquette)>,
}

#[derive(Clone, Copy)]
enum DiagKind {
    String,
    Gate(Plaquette),
    Init,
    Input,
}

fn diag_value(cfg: &FockConfig, kind: DiagKind) -> f64 {
    match kind {
        DiagKind::String => string_energy(cfg),
        DiagKind::Gate(p) => gate_diagonal(cfg, p),
        DiagKind::Init => init_diagonal(cfg),
        DiagKind::Input => input_diagonal(cfg),
    }
}

fn assemble(basis: &FockBasis, spec: &TermSpec, circuit: &PlaquetteCircuit) -> Result<HermitianOperator> {
    let n = basis.n();
    if circuit.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: circuit.n() });
    }
    for &(_, p) in &spec.hops {
        if !p.is_valid(n) {
            return Err(Error::InvalidCoordinate(format!("plaquette {p:?} outside the n = {n} grid")));
        }
    }
    let mut b = OperatorBuilder::new(basis.dim());
    let mut leaked = 0.0f64;
    let check_leaks = matches!(basis, FockBasis::Strings(_));
    for src in 0..basis.dim() {
        let cfg = basis.config(src);
        let d: f64 = spec.diagonal.iter().map(|&(c, k)| c * diag_value(&cfg, k)).sum();
        if d != 0.0 {
            b.add_real(src, src, d);
        }
        for &(coeff, p) in &spec.hops {
            if coeff == 0.0 {
                continue;
            }
            for (target, amp) in prop_forward(&cfg, p, circuit) {
                match basis.index_of(&target) {
                    Some(dst) => b.add(dst, src, amp * coeff),
                    None => leaked = leaked.max((amp * coeff).norm()),
                }
            }
            if check_leaks {
                if let Some(prev) = prop_backward_targets(&cfg, p) {
                    if basis.index_of(&prev).is_none() {
                        leaked = leaked.max(coeff.abs());
                    }
                }
            }
        }
    }
    if leaked > 0.0 {
        return Err(Error::Leakage(leaked));
    }
    Ok(b.build())
}

fn term_spec(kind: TermKind, lambda: f64, n: usize) -> Result<TermSpec> {
    let check = |p: Plaquette| {
        if p.is_valid(n) {
            Ok(p)
        } else {
            Err(Error::InvalidCoordinate(format!("plaquette {p:?} outside the n = {n} grid")))
        }
    };
    Ok(match kind {
        TermKind::String => TermSpec { diagonal: vec![(1.0, DiagKind::String)], hops: vec![] },
        TermKind::Prop(p) => TermSpec { diagonal: vec![], hops: vec![(1.0, check(p)?)] },
        TermKind::Gate(p) => {
            let p = check(p)?;
            TermSpec { diagonal: vec![(1.0, DiagKind::Gate(p))], hops: vec![(lambda, p)] }
        }
        TermKind::Init => TermSpec { diagonal: vec![(1.0, DiagKind::Init)], hops: vec![] },
        TermKind::Input => TermSpec { diagonal: vec![(1.0, DiagKind::Input)], hops: vec![] },
    })
}

/// A single term on the full Fock space.
pub fn build_term(kind: TermKind, terms: &HamiltonianTerms) -> Result<HermitianOperator> {
    let n = terms.circuit.n();
    let basis = FockBasis::full(n)?;
    build_term_on(&basis, kind, terms)
}

pub fn build_term_on(basis: &FockBasis, kind: TermKind, terms: &HamiltonianTerms) -> Result<HermitianOperator> {
    let spec = term_spec(kind, terms.lambda, basis.n())?;
    assemble(basis, &spec, terms.circuit)
}

/// `H(lambda)` split as `base + lambda * prop + sqrt(1 - lambda^2) * init`.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub base: HermitianOperator,
    pub prop: HermitianOperator,
    pub init: HermitianOperator,
}

impl HamiltonianParts {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn at(&self, lambda: f64) -> Result<HermitianOperator> {
        check_lambda(lambda)?;
        let s = (1.0 - lambda * lambda).max(0.0).sqrt();
        HermitianOperator::linear_combination(&[(1.0, &self.base), (lambda, &self.prop), (s, &self.init)])
    }
}

pub fn hamiltonian_parts(basis: &FockBasis, flags: TermFlags, circuit: &PlaquetteCircuit) -> Result<HamiltonianParts> {
    let n = basis.n();
    let plaquettes = all_plaquettes(n);
    let mut diagonal = Vec::new();
    if flags.string {
        diagonal.push((1.0, DiagKind::String));
    }
    if flags.input {
        diagonal.push((1.0, DiagKind::Input));
    }
    let mut hops = Vec::new();
    if flags.gates {
        diagonal.extend(plaquettes.iter().map(|&p| (1.0, DiagKind::Gate(p))));
        hops.extend(plaquettes.iter().map(|&p| (1.0, p)));
    }
    let base = assemble(basis, &TermSpec { diagonal, hops: vec![] }, circuit)?;
    let prop = assemble(basis, &TermSpec { diagonal: vec![], hops }, circuit)?;
    let init_diag = if flags.init { vec![(1.0, DiagKind::Init)] } else { vec![] };
    let init = assemble(basis, &TermSpec { diagonal: init_diag, hops: vec![] }, circuit)?;
    Ok(HamiltonianParts { base, prop, init })
}

/// `H(lambda)` on an arbitrary basis.
pub fn assemble_h_on(basis: &FockBasis, terms: &HamiltonianTerms) -> Result<HermitianOperator> {
    hamiltonian_parts(basis, terms.flags, terms.circuit)?.at(terms.lambda)
}

/// `H(lambda)` on the full Fock space (`n <= 3`).
pub fn assemble_h(terms: &HamiltonianTerms) -> Result<HermitianOperator> {
    assemble_h_on(&FockBasis::full(terms.circuit.n())?, terms)
}

/// `H(lambda)` directly on the string sector.
pub fn assemble_h_strings(terms: &HamiltonianTerms) -> Result<HermitianOperator> {
    assemble_h_on(&FockBasis::strings(terms.circuit.n())?, terms)
}

/// Compression of a full-space operator onto the string sector.
pub fn restrict_to_strings(op: &HermitianOperator, n: usize) -> Result<HermitianOperator> {
    let space = FockSpace::new(n)?;
    if op.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: op.dim() });
    }
    let sector = StringSector::new(n)?;
    Ok(op.submatrix(&sector.full_indices(&space)))
}

/// Embeds a string-sector vector into the full Fock space.
pub fn embed_in_full(n: usize, v: &StateVector) -> Result<StateVector> {
    let space = FockSpace::new(n)?;
    let sector = StringSector::new(n)?;
    if v.dim() != sector.dim() {
        return Err(Error::DimensionMismatch { expected: sector.dim(), got: v.dim() });
    }
    let mut out = vec![C64::new(0.0, 0.0); space.dim()];
    for (k, i) in sector.full_indices(&space).into_iter().enumerate() {
        out[i] = v.amplitudes()[k];
    }
    StateVector::new(out)
}

/// Frobenius norm of `(1 - P) op P` where `P` projects on the string
/// sector; an upper bound on the operator norm.
pub fn leakage_norm(op: &HermitianOperator, n: usize) -> Result<f64> {
    let space = FockSpace::new(n)?;
    if op.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: op.dim() });
    }
    let sector = StringSector::new(n)?;
    let mut inside = vec![false; space.dim()];
    for i in sector.full_indices(&space) {
        inside[i] = true;
    }
    let sum: f64 = op
        .entries()
        .filter(|&(r, c, _)| inside[c] && !inside[r])
        .map(|(_, _, v)| v.norm_sqr())
        .sum();
    Ok(sum.sqrt())
}

/// Nonzero entries as `(row, col, re, im)`, sorted by row then column.
pub fn operator_triples(op: &HermitianOperator) -> Vec<(usize, usize, f64, f64)> {
    let mut out: Vec<_> = op.entries().map(|(r, c, v)| (r, c, v.re, v.im)).collect();
    out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    out
}
