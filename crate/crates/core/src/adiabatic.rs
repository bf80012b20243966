//! Adiabatic preparation of the circuit groundstate and the statistics of
//! the final string measurement.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chains::{q_of_lambda, xxz_groundstate};
use crate::error::{invalid, Error, Result};
use crate::fock::{check_lambda, hamiltonian_parts, FockBasis, HamiltonianParts, StringSector, TermFlags};
use crate::geometry::{binomial, enumerate_strings, GridEdge, GridSpec, PlaquetteCircuit, RotatedEdge, StringConfig};
use crate::numerics::{evolve, StateVector, C64};

fn big_binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Fraction of strings that pass through an edge:
/// `C(i + j, j) C(2n - i - j - 1, n - j - x) / C(2n, n)`.
pub fn edge_probability(n: usize, e: RotatedEdge) -> Result<BigRational> {
    if n == 0 || !e.is_valid(n) {
        return Err(Error::InvalidCoordinate(format!("{e:?} is not an edge of the n = {n} grid")));
    }
    let (i, j, x, n) = (e.i as i64, e.j as i64, e.x as i64, n as i64);
    let through = big_binomial(i + j, j) * big_binomial(2 * n - (i + j + 1), n - j - x);
    Ok(BigRational::new(through, big_binomial(2 * n, n)))
}

/// Nearest `f64` to an exact probability.
pub fn rational_to_f64(p: &BigRational) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}

/// The same fraction by counting strings one by one.
pub fn edge_probability_enumerated(n: usize, e: RotatedEdge) -> Result<BigRational> {
    if n == 0 || !e.is_valid(n) {
        return Err(Error::InvalidCoordinate(format!("{e:?} is not an edge of the n = {n} grid")));
    }
    let strings = enumerate_strings(n);
    let w = e.line();
    let hits = strings.iter().filter(|z| z.edges()[w - 1] == e).count();
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(strings.len())))
}

/// Whether `p <= 2 sqrt(2) / sqrt(n)`, decided exactly as `p^2 n <= 8`.
pub fn edge_probability_within_bound(n: usize, p: &BigRational) -> bool {
    p * p * BigInt::from(n) <= BigRational::from_integer(BigInt::from(8))
}

/// Probability that particle `w` sits on the left half (`t <= n`) when the
/// string is distributed as the weight-`n` groundstate at `lambda`.
pub fn particle_left_probability(n: usize, lambda: f64, w: usize) -> Result<f64> {
    if w == 0 || w > 2 * n {
        return invalid(format!("line {w} outside 1..={}", 2 * n));
    }
    let probs = xxz_groundstate(n, lambda)?.probabilities();
    Ok(enumerate_strings(n)
        .iter()
        .zip(probs)
        .filter(|(z, _)| z.edges()[w - 1].to_grid(n).expect("valid").t <= n)
        .map(|(_, p)| p)
        .sum())
}

/// Reflects the part of `z` between the last vertex on the center line
/// before edge `e` and the first one after it. `e` must be an occupied edge
/// on the left half.
pub fn reflect_string(z: &StringConfig, e: GridEdge) -> Result<StringConfig> {
    let n = z.n();
    let rot = e.to_rotated(n)?;
    if !e.is_left_half(n) {
        return Err(Error::InvalidCoordinate(format!("{e:?} is not on the left half")));
    }
    let w = e.w;
    if z.edges()[w - 1] != rot {
        return invalid(format!("string {z} does not pass through {e:?}"));
    }
    let verts = z.vertices();
    let on_center = |k: usize| verts[k].0 == verts[k].1;
    let start = (0..w).rev().find(|&k| on_center(k)).expect("top vertex is centered");
    let end = (w..=2 * n).find(|&k| on_center(k)).expect("bottom vertex is centered");
    // Bits start+1 ..= end (1-based positions) lie between the two vertices.
    let mut mask = 0u64;
    for pos in start + 1..=end {
        mask |= 1u64 << (2 * n - pos);
    }
    StringConfig::new(n, z.value() ^ mask)
}

/// Cached internal states `V(z)|x>` for every string.
struct RotatedFrame {
    sector: StringSector,
    internal: Vec<Vec<C64>>,
}

impl RotatedFrame {
    fn new(circuit: &PlaquetteCircuit, x: u64) -> Result<Self> {
        let n = circuit.n();
        let sector = StringSector::new(n)?;
        let regdim = 1usize << (2 * n);
        if x as usize >= regdim {
            return invalid(format!("input {x} does not fit in {} qubits", 2 * n));
        }
        let internal = sector
            .strings()
            .iter()
            .map(|z| {
                let mut v = vec![C64::new(0.0, 0.0); regdim];
                v[x as usize] = C64::new(1.0, 0.0);
                circuit.apply_partial(z, &mut v);
                v
            })
            .collect();
        Ok(Self { sector, internal })
    }

    fn family(&self, lambda: f64) -> Result<StateVector> {
        let n = self.sector.n();
        let weights = xxz_groundstate(n, lambda)?;
        let m = self.sector.num_strings();
        let mut amps = vec![C64::new(0.0, 0.0); self.sector.dim()];
        for (r, wz) in weights.amplitudes().iter().enumerate() {
            for (xp, a) in self.internal[r].iter().enumerate() {
                amps[xp * m + r] = a * wz;
            }
        }
        StateVector::new(amps)
    }
}

/// `sum_z q^{-A(z)} V(z)|x>|z>`, normalized, in string-sector order. At
/// `lambda = 0` this is `|x>|0^n 1^n>`.
pub fn groundstate_family(circuit: &PlaquetteCircuit, lambda: f64, x: u64) -> Result<StateVector> {
    if circuit.n() > 3 {
        return invalid(format!("groundstate family is limited to n <= 3, got {}", circuit.n()));
    }
    RotatedFrame::new(circuit, x)?.family(lambda)
}

/// Interpolation profile `s -> lambda(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Linear,
    /// `sin(pi s / 2)`, so that `sqrt(1 - lambda^2) = cos(pi s / 2)` and every
    /// coefficient of `H` is smooth in `s`.
    Sine,
}

impl Profile {
    pub fn lambda(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Profile::Linear => s,
            Profile::Sine => (std::f64::consts::FRAC_PI_2 * s).sin(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub total_time: f64,
    pub steps: usize,
    pub profile: Profile,
}

impl Schedule {
    pub fn linear(total_time: f64, steps: usize) -> Result<Self> {
        Self::new(total_time, steps, Profile::Linear)
    }

    pub fn new(total_time: f64, steps: usize, profile: Profile) -> Result<Self> {
        if !(total_time >= 0.0) || !total_time.is_finite() {
            return invalid(format!("total time {total_time} must be finite and nonnegative"));
        }
        if steps == 0 {
            return invalid("schedule needs at least one step");
        }
        Ok(Self { total_time, steps, profile })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub time: f64,
    pub lambda: f64,
    /// Overlap with the instantaneous groundstate `|Phi_lambda(0)>`.
    pub fidelity: f64,
}

#[derive(Clone, Debug)]
pub struct AdiabaticRun {
    pub final_state: StateVector,
    pub trace: Vec<FidelityPoint>,
    pub final_fidelity: f64,
}

/// Integrates `i d/dt psi = H(lambda(t / T)) psi` on the string sector from
/// `|0>|0^n 1^n>`, holding `H` at its midpoint value over each step.
/// `checkpoints` evenly spaced fidelity samples are recorded (plus the
/// endpoints).
pub fn run_adiabatic(circuit: &PlaquetteCircuit, schedule: &Schedule, checkpoints: usize) -> Result<AdiabaticRun> {
    let n = circuit.n();
    if n > 3 {
        return invalid(format!("adiabatic runs are limited to n <= 3, got {n}"));
    }
    let frame = RotatedFrame::new(circuit, 0)?;
    let parts = hamiltonian_parts(&FockBasis::Strings(frame.sector.clone()), TermFlags::all(), circuit)?;
    run_with_parts(&parts, &frame, schedule, checkpoints)
}

fn run_with_parts(
    parts: &HamiltonianParts,
    frame: &RotatedFrame,
    schedule: &Schedule,
    checkpoints: usize,
) -> Result<AdiabaticRun> {
    let init_index = frame.sector.rank(&StringConfig::initial(frame.sector.n()));
    let mut state = StateVector::basis(parts.dim(), init_index);
    let dt = schedule.total_time / schedule.steps as f64;
    let every = if checkpoints == 0 { usize::MAX } else { (schedule.steps / checkpoints).max(1) };
    let mut trace = vec![FidelityPoint { time: 0.0, lambda: 0.0, fidelity: state.fidelity(&frame.family(0.0)?) }];
    for k in 0..schedule.steps {
        if dt > 0.0 {
            let lambda = schedule.profile.lambda((k as f64 + 0.5) / schedule.steps as f64);
            let h = parts.at(lambda)?;
            state = evolve(&h, &state, dt, 1e-10)?;
        }
        let done = k + 1 == schedule.steps;
        if done || (k + 1) % every == 0 {
            let s = (k + 1) as f64 / schedule.steps as f64;
            let lambda = schedule.profile.lambda(s);
            let fidelity = state.fidelity(&frame.family(lambda)?);
            trace.push(FidelityPoint { time: s * schedule.total_time, lambda, fidelity });
        }
    }
    let final_fidelity = trace.last().map(|p| p.fidelity).unwrap_or(0.0);
    Ok(AdiabaticRun { final_state: state, trace, final_fidelity })
}

/// Exact statistics of measuring the particle positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDistribution {
    /// Probability of each string, in rank order.
    pub string_probabilities: Vec<(String, f64)>,
    /// Probability that every region plaquette lies left of the string.
    pub success_probability: f64,
    /// Distribution of the region-line qubits (listed top line first)
    /// conditioned on success. Empty when success has probability zero.
    pub conditional: BTreeMap<String, f64>,
}

fn bits_of(x: u64, nq: usize, lines: &[usize]) -> String {
    lines.iter().map(|&w| if (x >> (nq - w)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Born-rule distribution of the string and the region qubits.
pub fn measure_output(state: &StateVector, grid: &GridSpec) -> Result<OutputDistribution> {
    let n = grid.n;
    let sector = StringSector::new(n)?;
    if state.dim() != sector.dim() {
        return Err(Error::DimensionMismatch { expected: sector.dim(), got: state.dim() });
    }
    let m = sector.num_strings();
    let probs = state.probabilities();
    let lines = grid.region_lines();
    let mut per_string = vec![0.0; m];
    let mut joint: BTreeMap<String, f64> = BTreeMap::new();
    for (k, p) in probs.iter().enumerate() {
        let (x, z) = sector.split(k);
        per_string[k % m] += p;
        if *p > 0.0 && grid.string_right_of_region(&z) {
            *joint.entry(bits_of(x, 2 * n, &lines)).or_insert(0.0) += p;
        }
    }
    let success: f64 = joint.values().sum();
    let conditional = if success > 0.0 { joint.into_iter().map(|(k, v)| (k, v / success)).collect() } else { BTreeMap::new() };
    Ok(OutputDistribution {
        string_probabilities: sector.strings().iter().map(|z| z.to_string()).zip(per_string).collect(),
        success_probability: success,
        conditional,
    })
}

/// Distribution of the region qubits after running the whole circuit on
/// `|0^{2n}>` with a plain state-vector simulator.
pub fn direct_output_distribution(circuit: &PlaquetteCircuit) -> BTreeMap<String, f64> {
    let n = circuit.n();
    let nq = 2 * n;
    let mut state = vec![C64::new(0.0, 0.0); 1 << nq];
    state[0] = C64::new(1.0, 0.0);
    circuit.simulate(&mut state);
    let lines = circuit.grid().region_lines();
    let mut out = BTreeMap::new();
    for (x, a) in state.iter().enumerate() {
        *out.entry(bits_of(x as u64, nq, &lines)).or_insert(0.0) += a.norm_sqr();
    }
    out
}

/// `(1/2) sum |p - q|` over the union of supports.
pub fn total_variation(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// One simulated measurement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub string: String,
    pub right_of_region: bool,
    /// Region qubits, present only when `right_of_region`.
    pub output_bits: Option<String>,
}

/// Draws `shots` measurement outcomes from `state` with a seeded generator.
pub fn sample_measurements(state: &StateVector, grid: &GridSpec, shots: usize, seed: u64) -> Result<Vec<MeasurementOutcome>> {
    let n = grid.n;
    let sector = StringSector::new(n)?;
    if state.dim() != sector.dim() {
        return Err(Error::DimensionMismatch { expected: sector.dim(), got: state.dim() });
    }
    let probs = state.probabilities();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let lines = grid.region_lines();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let k = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
            let (x, z) = sector.split(k);
            let right = grid.string_right_of_region(&z);
            MeasurementOutcome {
                string: z.to_string(),
                right_of_region: right,
                output_bits: right.then(|| bits_of(x, 2 * n, &lines)),
            }
        })
        .collect())
}

/// Summary written by the command-line driver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub steps: usize,
    pub final_fidelity: f64,
    pub success_probability: f64,
    pub conditional_output_distribution: BTreeMap<String, f64>,
    pub direct_output_distribution: BTreeMap<String, f64>,
    pub total_variation: f64,
    pub fidelity_trace: Vec<FidelityPoint>,
}

/// Runs the schedule, measures, and compares with direct simulation.
pub fn adiabatic_report(circuit: &PlaquetteCircuit, schedule: &Schedule, checkpoints: usize) -> Result<RunReport> {
    let run = run_adiabatic(circuit, schedule, checkpoints)?;
    let measured = measure_output(&run.final_state, circuit.grid())?;
    let direct = direct_output_distribution(circuit);
    Ok(RunReport {
        n: circuit.n(),
        total_time: schedule.total_time,
        steps: schedule.steps,
        final_fidelity: run.final_fidelity,
        success_probability: measured.success_probability,
        total_variation: total_variation(&measured.conditional, &direct),
        conditional_output_distribution: measured.conditional,
        direct_output_distribution: direct,
        fidelity_trace: run.trace,
    })
}

/// Fraction of strings with the region entirely on their left.
pub fn uniform_success_fraction(grid: &GridSpec) -> (u64, u64) {
    let strings = enumerate_strings(grid.n);
    let hits = strings.iter().filter(|z| grid.string_right_of_region(z)).count() as u64;
    (hits, binomial(2 * grid.n as u64, grid.n as u64))
}

/// `q(lambda)`, re-exported for report writers that annotate schedules.
pub fn deformation(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    q_of_lambda(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{assemble_h, assemble_h_strings, embed_in_full, HamiltonianTerms};
    use crate::geometry::{line_edges, random_unitary, Plaquette};
    use crate::numerics::lowest_eigenpairs_sparse;
    use nalgebra::Matrix4;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn centered(n: usize, seed: u64) -> PlaquetteCircuit {
        let grid = GridSpec::adiabatic_center(n, 1).unwrap();
        PlaquetteCircuit::random(grid, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn edge_probability_examples() {
        assert_eq!(edge_probability(2, RotatedEdge { i: 0, j: 0, x: 0 }).unwrap(), r(1, 2));
        assert_eq!(edge_probability(2, RotatedEdge { i: 1, j: 0, x: 0 }).unwrap(), r(1, 6));
        assert!(edge_probability(2, RotatedEdge { i: 2, j: 0, x: 0 }).is_err());
    }

    #[test]
    fn edge_probabilities_sum_to_one_per_line() {
        for n in 1..=6 {
            for w in 1..=2 * n {
                let total: BigRational = line_edges(n, w)
                    .iter()
                    .map(|g| edge_probability(n, g.to_rotated(n).unwrap()).unwrap())
                    .fold(BigRational::zero(), |a, b| a + b);
                assert!(total.is_one());
            }
        }
    }

    #[test]
    fn edge_probability_matches_enumeration() {
        for n in 1..=5 {
            for w in 1..=2 * n {
                for g in line_edges(n, w) {
                    let e = g.to_rotated(n).unwrap();
                    assert_eq!(edge_probability(n, e).unwrap(), edge_probability_enumerated(n, e).unwrap());
                }
            }
        }
    }

    #[test]
    fn bound_decided_exactly() {
        assert!(edge_probability_within_bound(2, &r(1, 2)));
        assert!(!edge_probability_within_bound(9, &r(1, 1)));
        assert!(edge_probability_within_bound(8, &BigRational::one()));
    }

    #[test]
    fn left_probability_examples() {
        for n in 1..=3 {
            for w in 1..=2 * n {
                assert!((particle_left_probability(n, 1.0, w).unwrap() - 0.5).abs() < 1e-12);
                assert_eq!(particle_left_probability(n, 0.0, w).unwrap(), 1.0);
                assert!(particle_left_probability(n, 0.5, w).unwrap() >= 0.5);
            }
        }
        assert!(particle_left_probability(2, 0.5, 5).is_err());
    }

    #[test]
    fn reflect_example() {
        let z = StringConfig::parse("0011").unwrap();
        let out = reflect_string(&z, GridEdge { t: 1, w: 2 }).unwrap();
        assert_eq!(out.to_string(), "1100");
        assert!(out.area() < z.area());
        assert_eq!(out.edges()[1].to_grid(2).unwrap(), GridEdge { t: 4, w: 2 });
        assert!(reflect_string(&z, GridEdge { t: 1, w: 1 }).is_err());
        assert!(reflect_string(&z, GridEdge { t: 3, w: 1 }).is_err());
    }

    #[test]
    fn reflection_is_injective_and_lowers_area() {
        for n in 1..=4 {
            for w in 1..=2 * n {
                for e in line_edges(n, w).into_iter().filter(|e| e.is_left_half(n)) {
                    let rot = e.to_rotated(n).unwrap();
                    let mut images = std::collections::BTreeSet::new();
                    for z in enumerate_strings(n).into_iter().filter(|z| z.edges()[w - 1] == rot) {
                        let out = reflect_string(&z, e).unwrap();
                        assert!(out.area() < z.area());
                        assert_eq!(out.edges()[w - 1].to_grid(n).unwrap(), e.mirror(n));
                        assert!(images.insert(out.value()), "collision at {z}");
                    }
                }
            }
        }
    }

    #[test]
    fn family_endpoints() {
        let c = centered(2, 3);
        let f0 = groundstate_family(&c, 0.0, 0).unwrap();
        assert_eq!(f0.amplitudes()[0], C64::new(1.0, 0.0));
        let f1 = groundstate_family(&c, 1.0, 0).unwrap();
        let sector = StringSector::new(2).unwrap();
        for z in sector.strings() {
            let mut v = vec![C64::new(0.0, 0.0); 16];
            v[0] = C64::new(1.0, 0.0);
            c.apply_partial(z, &mut v);
            for (x, a) in v.iter().enumerate() {
                let got = f1.amplitudes()[sector.index(x as u64, z)];
                assert!((got - a / 6f64.sqrt()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn family_is_eigenvector() {
        let c = centered(2, 12);
        for lambda in [0.0, 0.3, 0.6, 1.0] {
            let terms = HamiltonianTerms::new(lambda, TermFlags::all(), &c).unwrap();
            let h = assemble_h_strings(&terms).unwrap();
            let f = groundstate_family(&c, lambda, 0).unwrap();
            let hf = h.apply(f.amplitudes());
            let e = (1.0 - lambda * lambda).sqrt();
            let res: f64 = hf.iter().zip(f.amplitudes()).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-9, "{lambda}: {res}");
        }
    }

    #[test]
    fn family_matches_full_space_groundstate() {
        let c = centered(2, 6);
        let terms = HamiltonianTerms::new(0.6, TermFlags::all(), &c).unwrap();
        let h = assemble_h(&terms).unwrap();
        let gs = lowest_eigenpairs_sparse(&h, 1, 1e-10).unwrap();
        let f = embed_in_full(2, &groundstate_family(&c, 0.6, 0).unwrap()).unwrap();
        assert!(gs.vectors[0].fidelity(&f) >= 1.0 - 1e-8);
    }

    #[test]
    fn sudden_run_keeps_initial_state() {
        let c = centered(2, 1);
        let run = run_adiabatic(&c, &Schedule::linear(0.0, 4).unwrap(), 4).unwrap();
        let initial = groundstate_family(&c, 0.0, 0).unwrap();
        assert!((run.final_state.fidelity(&initial) - 1.0).abs() < 1e-14);
        let f1 = groundstate_family(&c, 1.0, 0).unwrap();
        assert!((run.final_fidelity - initial.fidelity(&f1)).abs() < 1e-14);
    }

    #[test]
    fn fidelity_improves_with_time() {
        let grid = GridSpec::adiabatic_center(2, 1).unwrap();
        let c = PlaquetteCircuit::identity(grid);
        let mut last = 0.0;
        for (t, steps) in [(10.0, 200), (50.0, 500), (200.0, 2000)] {
            let run = run_adiabatic(&c, &Schedule::new(t, steps, Profile::Sine).unwrap(), 10).unwrap();
            assert!(run.final_fidelity > last);
            assert!((run.final_state.norm() - 1.0).abs() < 1e-10);
            last = run.final_fidelity;
        }
        assert!(last >= 0.99, "{last}");
    }

    #[test]
    fn smooth_profile_beats_linear_ramp() {
        // The linear ramp crosses lambda = 1 with unbounded d/ds sqrt(1 - lambda^2).
        let c = centered(2, 77);
        let mut last_linear = 0.0;
        for t in [50.0, 200.0] {
            let linear = run_adiabatic(&c, &Schedule::new(t, 1000, Profile::Linear).unwrap(), 1).unwrap();
            let sine = run_adiabatic(&c, &Schedule::new(t, 1000, Profile::Sine).unwrap(), 1).unwrap();
            assert!(sine.final_fidelity > linear.final_fidelity);
            assert!(linear.final_fidelity > last_linear);
            last_linear = linear.final_fidelity;
        }
    }

    #[test]
    fn measurement_of_exact_groundstate() {
        let c = centered(2, 4);
        let f1 = groundstate_family(&c, 1.0, 0).unwrap();
        let out = measure_output(&f1, c.grid()).unwrap();
        let (hits, total) = uniform_success_fraction(c.grid());
        assert!((out.success_probability - hits as f64 / total as f64).abs() < 1e-12);
        let direct = direct_output_distribution(&c);
        assert!(total_variation(&out.conditional, &direct) < 1e-9);
    }

    #[test]
    fn identity_circuit_outputs_zero() {
        let grid = GridSpec::adiabatic_center(3, 1).unwrap();
        let c = PlaquetteCircuit::identity(grid);
        let out = measure_output(&groundstate_family(&c, 1.0, 0).unwrap(), &grid).unwrap();
        assert_eq!(out.conditional.len(), 1);
        assert!((out.conditional["00"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_gate_flips_outputs() {
        let grid = GridSpec::adiabatic_center(2, 1).unwrap();
        let mut c = PlaquetteCircuit::identity(grid);
        let mut xx = Matrix4::<C64>::zeros();
        for k in 0..4 {
            xx[(3 - k, k)] = C64::new(1.0, 0.0);
        }
        c.set_gate(Plaquette::new(0, 1), xx).unwrap();
        let out = measure_output(&groundstate_family(&c, 1.0, 0).unwrap(), &grid).unwrap();
        assert!((out.conditional["11"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_is_seeded() {
        let c = centered(2, 2);
        let f1 = groundstate_family(&c, 1.0, 0).unwrap();
        let a = sample_measurements(&f1, c.grid(), 50, 7).unwrap();
        let b = sample_measurements(&f1, c.grid(), 50, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|o| o.right_of_region == o.output_bits.is_some()));
        let _ = random_unitary(&mut ChaCha8Rng::seed_from_u64(0));
    }

    proptest! {
        #[test]
        fn left_probability_at_least_half(n in 1usize..=4, lambda in 0.0f64..=1.0, seed in any::<u32>()) {
            let w = 1 + seed as usize % (2 * n);
            prop_assert!(particle_left_probability(n, lambda, w).unwrap() >= 0.5 - 1e-12);
        }
    }
}
