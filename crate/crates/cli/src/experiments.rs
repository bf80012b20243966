//! One function per subcommand. Each validates its parameters, computes,
//! writes its artifacts and returns whether every check passed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use spacetime_core::adiabatic::{
    adiabatic_report, edge_probability, edge_probability_enumerated, edge_probability_within_bound,
    groundstate_family, measure_output, particle_left_probability, rational_to_f64, run_adiabatic,
    sample_measurements, total_variation, direct_output_distribution, Schedule,
};
use spacetime_core::chains::{rotated_conjugation_check, gap_certificate, xxz_gap_numeric};
use spacetime_core::fock::{
    assemble_h_strings, build_term, enumerate_fock_basis, segment_count, string_energy, HamiltonianTerms,
    TermFlags, TermKind,
};
use spacetime_core::geometry::{line_edges, GridSpec, Plaquette, PlaquetteCircuit};
use spacetime_core::janzing::{
    build_h_xy, expected_n, janzing_success_estimate, left_count, ring_filling_spectrum, ring_spectrum,
    timeavg_string_distribution, torus_weight_spectrum, xy_single_particle, effective_flux, ExpectationMethod,
    TorusSpec,
};
use spacetime_core::numerics::{eigensystem_dense, eigenvalues_dense, lowest_eigenpairs_sparse};
use spacetime_core::young::{
    diagram_boundary, differential_poset_check, enumerate_partitions, exact_walk_amplitudes, limit_shape,
    limit_shape_deviation, numeric_walk, plancherel_law, poisson_tail, rsk_samples, Partition,
};

use crate::output::{num, OutDir, Svg};
use crate::{parse_circuit, parse_lambda_grid, CliError, Command};

pub fn dispatch(cmd: &Command, out: &Path) -> Result<bool, CliError> {
    match cmd {
        Command::Verify { n, seed } => verify(out, *n, *seed),
        Command::GapScan { n, lambdas, seed, circuit } => gap_scan(out, *n, lambdas, *seed, circuit.as_deref()),
        Command::AdiabaticRun {
            n,
            region_size,
            total_time,
            steps,
            profile,
            checkpoints,
            seed,
            circuit,
            shots,
            max_tv,
            min_fidelity,
        } => {
            let circuit = match circuit {
                Some(path) => parse_circuit(path)?,
                None => random_circuit(center_region(*n, *region_size)?, *seed),
            };
            let schedule = Schedule::new(*total_time, *steps, (*profile).into())?;
            adiabatic(out, &circuit, &schedule, *checkpoints, *shots, *seed, *max_tv, *min_fidelity)
        }
        Command::JanzingRun { n, k, total_time } => janzing(out, *n, *k, *total_time),
        Command::TorusCheck { n, d } => torus(out, *n, *d),
        Command::YoungWalk { t, m_max } => young_walk(out, *t, *m_max),
        Command::PlancherelSample { m, samples, seed } => plancherel(out, *m, *samples, *seed),
        Command::LimitShape { m, samples, seed, threshold, min_fraction } => {
            limit(out, *m, *samples, *seed, *threshold, *min_fraction)
        }
        Command::EdgeProbs { n } => edge_probs(out, *n),
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::config(msg()))
    }
}

/// Region of side `size` whose gates lie on the right half of the grid.
pub fn center_region(n: usize, size: usize) -> Result<GridSpec, CliError> {
    require((1..=3).contains(&n), || format!("n = {n} outside 1..=3"))?;
    Ok(if n == 1 {
        require(size == 1, || "n = 1 admits only a region of size 1".into())?;
        GridSpec::custom(1, 1, Plaquette::new(0, 0))?
    } else {
        GridSpec::adiabatic_center(n, size)?
    })
}

fn random_circuit(grid: GridSpec, seed: u64) -> PlaquetteCircuit {
    PlaquetteCircuit::random(grid, &mut ChaCha8Rng::seed_from_u64(seed))
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, pass: value <= tolerance }
    }
}

fn verify(out: &Path, n: usize, seed: u64) -> Result<bool, CliError> {
    require((1..=3).contains(&n), || format!("verify supports 1 <= n <= 3, got {n}"))?;
    let circuit = random_circuit(center_region(n, 1)?, seed);
    let lambdas5 = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut checks = Vec::new();

    // String term against segment counting.
    let identity = PlaquetteCircuit::identity(circuit.grid().to_owned());
    let terms = HamiltonianTerms::new(0.0, TermFlags::all(), &identity)?;
    let diag = build_term(TermKind::String, &terms)?.diag();
    let mismatches = enumerate_fock_basis(n)?
        .iter()
        .zip(&diag)
        .filter(|(cfg, &d)| d != 2.0 * segment_count(cfg) as f64 - 2.0 || string_energy(cfg) != d)
        .count();
    checks.push(Check::at_most("string_term_spectrum", mismatches as f64, 0.0));

    // Ground energy and groundstate on the string sector.
    let mut worst: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for &lambda in &lambdas5 {
        let h = assemble_h_strings(&HamiltonianTerms::new(lambda, TermFlags::all(), &circuit)?)?;
        let (values, ground) = if h.dim() <= 400 {
            let es = eigensystem_dense(&h)?;
            (vec![es.values[0], es.values[1]], es.vector(0))
        } else {
            let p = lowest_eigenpairs_sparse(&h, 2, 1e-10)?;
            (p.values.clone(), p.vectors[0].clone())
        };
        let family = groundstate_family(&circuit, lambda, 0)?;
        worst = worst.max((values[0] - (1.0 - lambda * lambda).sqrt()).abs());
        worst = worst.max(1.0 - ground.fidelity(&family));
        min_gap = min_gap.min(values[1] - values[0]);
    }
    checks.push(Check::at_most("ground_energy_law", worst, 1e-8));
    checks.push(Check { name: "ground_state_unique", value: min_gap, tolerance: 0.0, pass: min_gap > 1e-6 });

    // Rotated frame against the XXZ chain.
    let full = random_circuit(GridSpec::custom(n, n, Plaquette::new(0, 0))?, seed);
    let mut worst: f64 = 0.0;
    for lambda in [0.3, 0.7, 1.0] {
        worst = worst.max(rotated_conjugation_check(&full, lambda)?);
    }
    checks.push(Check::at_most("xxz_equivalence", worst, 1e-10));

    let mut worst: f64 = 0.0;
    for &lambda in &lambdas5 {
        let analytic = 1.0 - lambda * (PI / (2 * n) as f64).cos();
        worst = worst.max((xxz_gap_numeric(n, lambda)?.gap - analytic).abs());
    }
    checks.push(Check::at_most("xxz_gap_formula", worst, 1e-8));

    let mut margin = f64::INFINITY;
    let mut all = true;
    for k in 0..=10 {
        let cert = gap_certificate(n, k as f64 / 10.0, &circuit)?;
        all &= cert.pass;
        margin = margin.min(cert.numeric_gap - cert.bound);
    }
    checks.push(Check { name: "gap_certificate", value: margin, tolerance: 0.0, pass: all });

    let (mismatches, over) = edge_counts(n)?;
    checks.push(Check::at_most("edge_probabilities", (mismatches + over) as f64, 0.0));

    let mut min_p = f64::INFINITY;
    let mut half: f64 = 0.0;
    for k in 0..=5 {
        for w in 1..=2 * n {
            let p = particle_left_probability(n, k as f64 / 5.0, w)?;
            min_p = min_p.min(p);
            if k == 5 {
                half = half.max((p - 0.5).abs());
            }
        }
    }
    checks.push(Check { name: "particle_left_half", value: min_p, tolerance: 0.5, pass: min_p >= 0.5 - 1e-12 && half <= 1e-12 });

    let sp = xy_single_particle(n)?;
    let idx: Vec<usize> = (0..1usize << (2 * n)).filter(|x| x.count_ones() == 1).collect();
    let numeric = eigenvalues_dense(&build_h_xy(n)?.submatrix(&idx))?;
    let mut analytic = sp.values.clone();
    analytic.sort_by(f64::total_cmp);
    checks.push(Check::at_most("xy_single_particle", max_dev(&numeric, &analytic), 1e-12));

    let mut worst: f64 = 0.0;
    for t in [10.0, 50.0] {
        let a = expected_n(n, t, ExpectationMethod::ManyBody)?;
        let b = expected_n(n, t, ExpectationMethod::SingleParticle)?;
        worst = worst.max((a - b).abs());
    }
    checks.push(Check::at_most("expected_count_methods", worst, 1e-6));

    let est = janzing_success_estimate(n, (n / 4).max(1), 50.0)?;
    checks.push(Check { name: "markov_bounds", value: 1.0 - est.success, tolerance: est.failure_markov_bound, pass: est.bounds_hold() });

    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        for k in 0..d {
            let spec = TorusSpec::new(n, d, k)?;
            worst = worst.max(max_dev(&torus_weight_spectrum(&spec, 1)?, &ring_spectrum(n, spec.flux())));
        }
    }
    checks.push(Check::at_most("torus_weight_one", worst, 1e-10));

    let dev = numeric_walk(1.0, 12)?.max_abs_diff(&exact_walk_amplitudes(1.0, 12)?);
    checks.push(Check::at_most("young_walk_amplitudes", dev, 1e-6));
    let report = differential_poset_check(&enumerate_partitions(10)?)?;
    checks.push(Check::at_most("young_commutator", report.commutator_deviation as f64, 0.0));

    let dir = OutDir::create(out, "verify")?;
    dir.write_csv(
        "checks.csv",
        &["check", "value", "tolerance", "pass"],
        checks.iter().map(|c| vec![c.name.to_string(), num(c.value), num(c.tolerance), c.pass.to_string()]),
    )?;
    let pass = checks.iter().all(|c| c.pass);
    let results: BTreeMap<&str, Value> =
        checks.iter().map(|c| (c.name, json!({"value": c.value, "tolerance": c.tolerance, "pass": c.pass}))).collect();
    dir.write_summary("verify", json!({"n": n, "seed": seed}), json!(results), pass)?;
    Ok(pass)
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn gap_scan(out: &Path, n: usize, lambdas: &str, seed: u64, circuit: Option<&Path>) -> Result<bool, CliError> {
    require((1..=3).contains(&n), || format!("gap-scan supports 1 <= n <= 3, got {n}"))?;
    let grid = parse_lambda_grid(lambdas)?;
    let circuit = match circuit {
        Some(path) => parse_circuit(path)?,
        None => random_circuit(center_region(n, 1)?, seed),
    };
    require(circuit.n() == n, || format!("circuit has n = {}, expected {n}", circuit.n()))?;
    let certs = grid.iter().map(|&l| gap_certificate(n, l, &circuit)).collect::<Result<Vec<_>, _>>()?;
    let dir = OutDir::create(out, "gap-scan")?;
    dir.write_csv(
        "gap_scan.csv",
        &["lambda", "ground", "numeric_gap", "bound", "pass"],
        certs.iter().map(|c| vec![num(c.lambda), num(c.ground), num(c.numeric_gap), num(c.bound), c.pass.to_string()]),
    )?;
    let pass = certs.iter().all(|c| c.pass);
    let min_margin = certs.iter().map(|c| c.numeric_gap - c.bound).fold(f64::INFINITY, f64::min);
    dir.write_summary(
        "gap-scan",
        json!({"n": n, "lambdas": grid, "seed": seed}),
        json!({"points": certs.len(), "violations": certs.iter().filter(|c| !c.pass).count(), "min_margin": min_margin}),
        pass,
    )?;
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
fn adiabatic(
    out: &Path,
    circuit: &PlaquetteCircuit,
    schedule: &Schedule,
    checkpoints: usize,
    shots: usize,
    seed: u64,
    max_tv: f64,
    min_fidelity: f64,
) -> Result<bool, CliError> {
    require(circuit.n() <= 3, || format!("adiabatic-run supports n <= 3, got {}", circuit.n()))?;
    require(checkpoints >= 1, || "checkpoints must be at least 1".into())?;
    require(max_tv >= 0.0 && (0.0..=1.0).contains(&min_fidelity), || "tolerances out of range".into())?;
    let dir = OutDir::create(out, "adiabatic-run")?;
    let report = if shots > 0 {
        let run = run_adiabatic(circuit, schedule, checkpoints)?;
        let samples = sample_measurements(&run.final_state, circuit.grid(), shots, seed)?;
        dir.write_csv(
            "samples.csv",
            &["shot", "string", "right_of_region", "output_bits"],
            samples.iter().enumerate().map(|(k, s)| {
                vec![k.to_string(), s.string.clone(), s.right_of_region.to_string(), s.output_bits.clone().unwrap_or_default()]
            }),
        )?;
        let measured = measure_output(&run.final_state, circuit.grid())?;
        let direct = direct_output_distribution(circuit);
        spacetime_core::adiabatic::RunReport {
            n: circuit.n(),
            total_time: schedule.total_time,
            steps: schedule.steps,
            final_fidelity: run.final_fidelity,
            success_probability: measured.success_probability,
            total_variation: total_variation(&measured.conditional, &direct),
            conditional_output_distribution: measured.conditional,
            direct_output_distribution: direct,
            fidelity_trace: run.trace,
        }
    } else {
        adiabatic_report(circuit, schedule, checkpoints)?
    };
    dir.write_csv(
        "trace.csv",
        &["time", "lambda", "fidelity"],
        report.fidelity_trace.iter().map(|p| vec![num(p.time), num(p.lambda), num(p.fidelity)]),
    )?;
    let keys: std::collections::BTreeSet<&String> =
        report.conditional_output_distribution.keys().chain(report.direct_output_distribution.keys()).collect();
    dir.write_csv(
        "outputs.csv",
        &["bits", "measured", "direct"],
        keys.iter().map(|k| {
            vec![
                k.to_string(),
                num(report.conditional_output_distribution.get(*k).copied().unwrap_or(0.0)),
                num(report.direct_output_distribution.get(*k).copied().unwrap_or(0.0)),
            ]
        }),
    )?;
    dir.write_text("circuit.json", &(circuit.to_json() + "\n"))?;
    let pass = report.total_variation <= max_tv && report.final_fidelity >= min_fidelity;
    dir.write_summary(
        "adiabatic-run",
        json!({
            "n": circuit.n(),
            "T": schedule.total_time,
            "steps": schedule.steps,
            "profile": schedule.profile,
            "checkpoints": checkpoints,
            "seed": seed,
            "shots": shots,
            "max_tv": max_tv,
            "min_fidelity": min_fidelity,
        }),
        serde_json::to_value(&report).expect("report serializes"),
        pass,
    )?;
    Ok(pass)
}

fn janzing(out: &Path, n: usize, k: Option<usize>, t: f64) -> Result<bool, CliError> {
    require((1..=5).contains(&n), || format!("janzing-run supports 1 <= n <= 5, got {n}"))?;
    let k = k.unwrap_or((n / 4).max(1));
    require((1..=n).contains(&k), || format!("region size k = {k} outside 1..={n}"))?;
    require(t > 0.0, || format!("T must be positive, got {t}"))?;
    let est = janzing_success_estimate(n, k, t)?;
    let single = expected_n(n, t, ExpectationMethod::SingleParticle)?;
    let many = if n <= 4 { Some(expected_n(n, t, ExpectationMethod::ManyBody)?) } else { None };
    let grid = GridSpec::janzing_left_corner(n, k)?;
    let dist = timeavg_string_distribution(n, t)?;
    let dir = OutDir::create(out, "janzing-run")?;
    dir.write_csv(
        "distribution.csv",
        &["string", "left_ones", "probability", "right_of_region"],
        dist.iter().map(|(z, p)| {
            vec![z.to_string(), left_count(z).to_string(), num(*p), grid.string_right_of_region(z).to_string()]
        }),
    )?;
    let agree = many.is_none_or(|m| (m - single).abs() <= 1e-6);
    let pass = est.bounds_hold() && agree;
    let time = if t.is_infinite() { json!("inf") } else { json!(t) };
    dir.write_summary(
        "janzing-run",
        json!({"n": n, "k": k, "T": time}),
        json!({
            "success_probability": est.success,
            "expected_m": est.expected_m,
            "failure_markov_bound": est.failure_markov_bound,
            "prob_m_three_quarters": est.prob_m_three_quarters,
            "three_quarters_bound": est.three_quarters_bound,
            "expected_left_ones_single_particle": single,
            "expected_left_ones_many_body": many,
            "single_particle_min_gap": xy_single_particle(n)?.min_gap(),
        }),
        pass,
    )?;
    Ok(pass)
}

fn torus(out: &Path, n: usize, d: usize) -> Result<bool, CliError> {
    require(n % 2 == 0, || {
        format!(
            "n = {n} is odd: the ring equivalence of the torus blocks is only checked for even n \
             (the weight-1 comparison holds for every n, but the many-particle comparison is stated for even n)"
        )
    })?;
    require((2..=4).contains(&n), || format!("torus-check supports n in {{2, 4}}, got {n}"))?;
    require((1..=8).contains(&d), || format!("D = {d} outside 1..=8"))?;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut bare_weight_n: f64 = 0.0;
    for k in 0..d {
        let spec = TorusSpec::new(n, d, k)?;
        for m in 0..=2 * n {
            let numeric = torus_weight_spectrum(&spec, m)?;
            let bare = max_dev(&numeric, &ring_filling_spectrum(n, spec.flux(), m));
            let shifted = effective_flux(&spec, m);
            let corrected = max_dev(&numeric, &ring_filling_spectrum(n, shifted, m));
            pass &= corrected <= 1e-10;
            if m == 1 {
                pass &= bare <= 1e-10;
            }
            if m == n {
                bare_weight_n = bare_weight_n.max(bare);
            }
            rows.push(vec![k.to_string(), m.to_string(), num(spec.flux()), num(shifted), num(bare), num(corrected)]);
        }
    }
    let dir = OutDir::create(out, "torus-check")?;
    dir.write_csv(
        "torus.csv",
        &["k", "weight", "flux", "effective_flux", "deviation_at_flux", "deviation_at_effective_flux"],
        rows,
    )?;
    dir.write_summary(
        "torus-check",
        json!({"n": n, "D": d}),
        json!({"weight_n_deviation_at_bare_flux": bare_weight_n, "blocks": d}),
        pass,
    )?;
    Ok(pass)
}

fn young_walk(out: &Path, t: f64, m_max: usize) -> Result<bool, CliError> {
    require(t >= 0.0 && t.is_finite(), || format!("t must be finite and nonnegative, got {t}"))?;
    require((2..=24).contains(&m_max), || format!("m_max = {m_max} outside 2..=24"))?;
    let numeric = numeric_walk(t, m_max)?;
    let exact = exact_walk_amplitudes(t, m_max)?;
    let lat = enumerate_partitions(m_max)?;
    let report = differential_poset_check(&lat)?;
    let dev = numeric.max_abs_diff(&exact);
    let dir = OutDir::create(out, "young-walk")?;
    dir.write_csv(
        "walk.csv",
        &["partition", "m", "probability", "numeric_probability", "t"],
        exact.partitions.iter().zip(exact.amplitudes.iter().zip(&numeric.amplitudes)).map(|(p, (a, b))| {
            vec![p.to_string(), p.size().to_string(), num(a.norm_sqr()), num(b.norm_sqr()), num(t)]
        }),
    )?;
    let pass = dev <= 1e-6 && report.holds();
    dir.write_summary(
        "young-walk",
        json!({"t": t, "m_max": m_max}),
        json!({
            "nodes": lat.len(),
            "max_amplitude_deviation": dev,
            "survival_probability": numeric.amplitudes[0].norm_sqr(),
            "survival_expected": (-t * t).exp(),
            "truncated_norm_deficit": 1.0 - exact.norm_sqr(),
            "poisson_tail_beyond_m_max": poisson_tail(t * t, m_max + 1),
            "interior_commutator_deviation": report.commutator_deviation,
            "boundary_commutator_deviation": report.boundary_deviation,
        }),
        pass,
    )?;
    Ok(pass)
}

/// Largest `m` for which the exact law is tabulated.
const EXACT_LAW_MAX_M: usize = 20;

fn plancherel(out: &Path, m: usize, samples: usize, seed: u64) -> Result<bool, CliError> {
    require(m >= 1, || "m must be at least 1".into())?;
    require((1..=10_000_000).contains(&samples), || format!("samples = {samples} outside 1..=10^7"))?;
    let drawn = rsk_samples(m, samples, seed)?;
    let mut counts: BTreeMap<Partition, usize> = BTreeMap::new();
    for p in drawn {
        *counts.entry(p).or_default() += 1;
    }
    let dir = OutDir::create(out, "plancherel-sample")?;
    let mut results = json!({"distinct_shapes": counts.len()});
    let mut pass = true;
    if m <= EXACT_LAW_MAX_M {
        let law = plancherel_law(m);
        let stat: f64 = law
            .iter()
            .map(|(p, prob)| {
                let e = prob * samples as f64;
                let o = counts.get(p).copied().unwrap_or(0) as f64;
                (o - e).powi(2) / e
            })
            .sum();
        let critical = if law.len() > 1 {
            ChiSquared::new((law.len() - 1) as f64).expect("dof > 0").inverse_cdf(0.99)
        } else {
            f64::INFINITY
        };
        pass = stat < critical;
        dir.write_csv(
            "shapes.csv",
            &["partition", "m", "count", "frequency", "exact_probability"],
            law.iter().map(|(p, prob)| {
                let c = counts.get(p).copied().unwrap_or(0);
                vec![p.to_string(), m.to_string(), c.to_string(), num(c as f64 / samples as f64), num(*prob)]
            }),
        )?;
        results["chi_square"] = json!(stat);
        results["chi_square_critical_99"] = json!(critical);
    } else {
        dir.write_csv(
            "shapes.csv",
            &["partition", "m", "count", "frequency"],
            counts.iter().map(|(p, &c)| vec![p.to_string(), m.to_string(), c.to_string(), num(c as f64 / samples as f64)]),
        )?;
    }
    dir.write_summary("plancherel-sample", json!({"m": m, "samples": samples, "seed": seed}), results, pass)?;
    Ok(pass)
}

/// Sample boundaries drawn in the SVG and listed in `profiles.csv`.
const DRAWN_PROFILES: usize = 10;

fn limit(out: &Path, m: usize, samples: usize, seed: u64, threshold: f64, min_fraction: f64) -> Result<bool, CliError> {
    require((1..=1_000_000).contains(&m), || format!("m = {m} outside 1..=10^6"))?;
    require(samples >= 1, || "samples must be at least 1".into())?;
    require(threshold > 0.0 && (0.0..=1.0).contains(&min_fraction), || "threshold/min-fraction out of range".into())?;
    let drawn = rsk_samples(m, samples, seed)?;
    let devs: Vec<f64> = drawn.iter().map(limit_shape_deviation).collect();
    let within = devs.iter().filter(|&&d| d <= threshold).count();
    let fraction = within as f64 / samples as f64;
    let curve: Vec<(f64, f64, f64)> = (0..=200)
        .map(|k| {
            let theta = -PI / 2.0 + PI * k as f64 / 200.0;
            let (x, y) = limit_shape(theta.clamp(-PI / 2.0, PI / 2.0)).expect("theta in range");
            (theta, x, y)
        })
        .collect();
    let scale = 1.0 / (m as f64).sqrt();
    let dir = OutDir::create(out, "limit-shape")?;
    dir.write_csv("curve.csv", &["theta", "x", "y"], curve.iter().map(|&(t, x, y)| vec![num(t), num(x), num(y)]))?;
    dir.write_csv(
        "deviations.csv",
        &["sample", "deviation", "within_threshold"],
        devs.iter().enumerate().map(|(k, d)| vec![k.to_string(), num(*d), (*d <= threshold).to_string()]),
    )?;
    let mut profiles = Vec::new();
    let mut svg = Svg::new(480.0, 2.6);
    for (k, p) in drawn.iter().take(DRAWN_PROFILES).enumerate() {
        let corners = diagram_boundary(p, scale);
        svg.polyline(&corners, "#4a7ab5", 1.0, 0.5);
        profiles.extend(corners.iter().map(|&(x, y)| vec![k.to_string(), num(x), num(y)]));
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|&(_, x, y)| (x, y)).collect();
    svg.polyline(&pts, "#c0392b", 2.0, 1.0);
    dir.write_csv("profiles.csv", &["sample", "x", "y"], profiles)?;
    dir.write_text("limit_shape.svg", &svg.finish())?;
    let mean = devs.iter().sum::<f64>() / samples as f64;
    let max = devs.iter().copied().fold(0.0, f64::max);
    let pass = fraction >= min_fraction;
    dir.write_summary(
        "limit-shape",
        json!({"m": m, "samples": samples, "seed": seed, "threshold": threshold, "min_fraction": min_fraction}),
        json!({"within_threshold": within, "fraction": fraction, "mean_deviation": mean, "max_deviation": max}),
        pass,
    )?;
    Ok(pass)
}

/// Largest grid on which edge probabilities are re-derived by enumeration.
const ENUMERATION_MAX_N: usize = 8;

fn edge_counts(n: usize) -> Result<(usize, usize), CliError> {
    let mut mismatches = 0;
    let mut over = 0;
    for w in 1..=2 * n {
        for g in line_edges(n, w) {
            let e = g.to_rotated(n)?;
            let p = edge_probability(n, e)?;
            if n <= ENUMERATION_MAX_N && p != edge_probability_enumerated(n, e)? {
                mismatches += 1;
            }
            if w == n && !edge_probability_within_bound(n, &p) {
                over += 1;
            }
        }
    }
    Ok((mismatches, over))
}

fn edge_probs(out: &Path, n: usize) -> Result<bool, CliError> {
    require((1..=30).contains(&n), || format!("edge-probs supports 1 <= n <= 30, got {n}"))?;
    let mut rows = Vec::new();
    for w in 1..=2 * n {
        for g in line_edges(n, w) {
            let e = g.to_rotated(n)?;
            let p = edge_probability(n, e)?;
            let bound = if w == n { edge_probability_within_bound(n, &p).to_string() } else { String::new() };
            rows.push(vec![
                g.t.to_string(),
                g.w.to_string(),
                e.i.to_string(),
                e.j.to_string(),
                e.x.to_string(),
                p.to_string(),
                num(rational_to_f64(&p)),
                bound,
            ]);
        }
    }
    let (mismatches, over) = edge_counts(n)?;
    let dir = OutDir::create(out, "edge-probs")?;
    dir.write_csv("edges.csv", &["t", "w", "i", "j", "x", "probability", "value", "within_bound"], rows)?;
    let pass = mismatches == 0 && over == 0;
    dir.write_summary(
        "edge-probs",
        json!({"n": n}),
        json!({
            "enumeration_checked": n <= ENUMERATION_MAX_N,
            "enumeration_mismatches": mismatches,
            "bound": 2.0 * 2f64.sqrt() / (n as f64).sqrt(),
            "bound_violations": over,
        }),
        pass,
    )?;
    Ok(pass)
}
