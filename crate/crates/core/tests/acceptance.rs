//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the test
//! harness so that the lines are always printed.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use spacetime_core::adiabatic::{
    direct_output_distribution, edge_probability, edge_probability_enumerated, edge_probability_within_bound,
    groundstate_family, measure_output, particle_left_probability, run_adiabatic, total_variation, Profile,
    Schedule,
};
use spacetime_core::chains::{rotated_conjugation_check, gap_certificate, xxz_gap, xxz_gap_numeric};
use spacetime_core::fock::{
    assemble_h, build_term, embed_in_full, enumerate_fock_basis, segment_count, HamiltonianTerms, TermFlags,
    TermKind,
};
use spacetime_core::geometry::{line_edges, GridSpec, Plaquette, PlaquetteCircuit, RotatedEdge};
use spacetime_core::janzing::{
    expected_n, ring_spectrum, torus_weight_spectrum, xy_single_particle, ExpectationMethod, TorusSpec,
};
use spacetime_core::numerics::{eigenvalues_dense, lowest_eigenpairs_sparse};
use spacetime_core::young::{
    differential_poset_check, enumerate_partitions, exact_walk_amplitudes, limit_shape_deviation, numeric_walk,
    plancherel_law, rsk_samples,
};
use spacetime_core::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

/// Random circuit on a region whose gates leave the left half untouched.
fn right_half_circuit(n: usize, seed: u64) -> PlaquetteCircuit {
    let grid = match n {
        1 => GridSpec::custom(1, 1, Plaquette::new(0, 0)),
        3 => GridSpec::custom(3, 2, Plaquette::new(0, 1)),
        _ => GridSpec::adiabatic_center(n, 1),
    }
    .expect("valid region");
    PlaquetteCircuit::random(grid, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn c1_string_spectrum() -> Result<Outcome> {
    let circuit = PlaquetteCircuit::identity(GridSpec::adiabatic_center(2, 1)?);
    let terms = HamiltonianTerms::new(0.0, TermFlags::all(), &circuit)?;
    let h = build_term(TermKind::String, &terms)?;
    let values = eigenvalues_dense(&h)?;
    let mut brute: HashMap<usize, usize> = HashMap::new();
    for cfg in enumerate_fock_basis(2)? {
        *brute.entry(2 * segment_count(&cfg) - 2).or_default() += 1;
    }
    let mut numeric: HashMap<usize, usize> = HashMap::new();
    let mut worst: f64 = 0.0;
    for v in &values {
        let level = v.round();
        worst = worst.max((v - level).abs());
        *numeric.entry(level as usize).or_default() += 1;
    }
    let mut levels: Vec<_> = brute.iter().collect();
    levels.sort();
    outcome(
        h.dim() == 1024 && worst <= 1e-9 && numeric == brute,
        format!("dim {} levels {levels:?} max off-integer {worst:.1e}", h.dim()),
    )
}

fn c2_ground_energy() -> Result<Outcome> {
    let circuit = right_half_circuit(2, 2);
    let mut pass = true;
    let mut worst_e: f64 = 0.0;
    let mut worst_overlap: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let terms = HamiltonianTerms::new(lambda, TermFlags::all(), &circuit)?;
        let h = assemble_h(&terms)?;
        let pairs = lowest_eigenpairs_sparse(&h, 2, 1e-10)?;
        let expected = (1.0 - lambda * lambda).sqrt();
        let family = embed_in_full(2, &groundstate_family(&circuit, lambda, 0)?)?;
        let e_err = (pairs.values[0] - expected).abs();
        let overlap_err = 1.0 - pairs.vectors[0].fidelity(&family);
        let gap = pairs.values[1] - pairs.values[0];
        worst_e = worst_e.max(e_err);
        worst_overlap = worst_overlap.max(overlap_err);
        min_gap = min_gap.min(gap);
        pass &= e_err <= 1e-8 && overlap_err <= 1e-8 && gap > 1e-6;
    }
    outcome(pass, format!("max |E0 - sqrt(1-l^2)| {worst_e:.1e}, max 1-overlap {worst_overlap:.1e}, min gap {min_gap:.4}"))
}

fn c3_xxz_equivalence() -> Result<Outcome> {
    let grid = GridSpec::custom(2, 2, Plaquette::new(0, 0))?;
    let circuit = PlaquetteCircuit::random(grid, &mut ChaCha8Rng::seed_from_u64(3));
    let mut worst: f64 = 0.0;
    for lambda in [0.3, 0.7, 1.0] {
        worst = worst.max(rotated_conjugation_check(&circuit, lambda)?);
    }
    outcome(worst <= 1e-10, format!("max element deviation {worst:.1e}"))
}

fn c4_gap_formula() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let numeric = xxz_gap_numeric(n, lambda)?.gap;
            let analytic = 1.0 - lambda * (PI / (2 * n) as f64).cos();
            worst = worst.max((numeric - analytic).abs());
            worst = worst.max((xxz_gap(n, lambda)? - analytic).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max gap deviation {worst:.1e}"))
}

fn c5_gap_certificate() -> Result<Outcome> {
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for n in 1..=3 {
        let circuit = right_half_circuit(n, 50 + n as u64);
        for k in 0..=10 {
            let cert = gap_certificate(n, k as f64 / 10.0, &circuit)?;
            if !cert.pass || cert.ground.abs() > 1e-8 {
                violations += 1;
            }
            min_margin = min_margin.min(cert.numeric_gap - cert.bound);
        }
    }
    outcome(violations == 0, format!("33 certificates, {violations} violations, min margin {min_margin:.4}"))
}

fn c6_edge_probabilities() -> Result<Outcome> {
    let mut mismatches = 0;
    let mut edges = 0;
    for n in 1..=6 {
        for i in 0..=n {
            for j in 0..=n {
                for x in 0..2 {
                    let e = RotatedEdge { i, j, x };
                    if !e.is_valid(n) {
                        continue;
                    }
                    edges += 1;
                    if edge_probability(n, e)? != edge_probability_enumerated(n, e)? {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let mut over = 0;
    for n in 1..=12 {
        for g in line_edges(n, n) {
            if !edge_probability_within_bound(n, &edge_probability(n, g.to_rotated(n)?)?) {
                over += 1;
            }
        }
    }
    outcome(mismatches == 0 && over == 0, format!("{edges} edges compared exactly, {mismatches} mismatches, {over} bound violations"))
}

fn c7_particle_left() -> Result<Outcome> {
    let mut min_p = f64::INFINITY;
    let mut worst_half: f64 = 0.0;
    for n in 1..=4 {
        for k in 0..=5 {
            let lambda = k as f64 / 5.0;
            for w in 1..=2 * n {
                let p = particle_left_probability(n, lambda, w)?;
                min_p = min_p.min(p);
                if k == 5 {
                    worst_half = worst_half.max((p - 0.5).abs());
                }
            }
        }
    }
    outcome(min_p >= 0.5 - 1e-12 && worst_half <= 1e-12, format!("min p_w {min_p:.6}, max |p_w(1) - 1/2| {worst_half:.1e}"))
}

fn c8_adiabatic() -> Result<Outcome> {
    let circuit = PlaquetteCircuit::random(GridSpec::adiabatic_center(2, 1)?, &mut ChaCha8Rng::seed_from_u64(8));
    let run = run_adiabatic(&circuit, &Schedule::new(200.0, 2000, Profile::Sine)?, 10)?;
    let measured = measure_output(&run.final_state, circuit.grid())?;
    let tv = total_variation(&measured.conditional, &direct_output_distribution(&circuit));
    outcome(
        run.final_fidelity >= 0.99 && tv <= 0.02,
        format!("fidelity {:.5}, TV {tv:.2e}, success probability {:.4}", run.final_fidelity, measured.success_probability),
    )
}

fn c9_xy() -> Result<Outcome> {
    let mut worst_spec: f64 = 0.0;
    for n in 1..=8 {
        let sp = xy_single_particle(n)?;
        let len = 2 * n;
        let mut path = nalgebra::DMatrix::<f64>::zeros(len, len);
        for j in 0..len - 1 {
            path[(j, j + 1)] = -1.0;
            path[(j + 1, j)] = -1.0;
        }
        let mut numeric: Vec<f64> = path.symmetric_eigen().eigenvalues.iter().copied().collect();
        numeric.sort_by(f64::total_cmp);
        let mut analytic = sp.values.clone();
        analytic.sort_by(f64::total_cmp);
        for (a, b) in numeric.iter().zip(&analytic) {
            worst_spec = worst_spec.max((a - b).abs());
        }
    }
    let mut worst_n: f64 = 0.0;
    for n in 1..=3 {
        for t in [10.0, 50.0] {
            let a = expected_n(n, t, ExpectationMethod::ManyBody)?;
            let b = expected_n(n, t, ExpectationMethod::SingleParticle)?;
            worst_n = worst_n.max((a - b).abs());
        }
    }
    outcome(worst_spec <= 1e-12 && worst_n <= 1e-6, format!("spectrum deviation {worst_spec:.1e}, E[N] deviation {worst_n:.1e}"))
}

fn c10_torus() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        for k in 0..d {
            let spec = TorusSpec::new(2, d, k)?;
            let numeric = torus_weight_spectrum(&spec, 1)?;
            let ring = ring_spectrum(2, spec.flux());
            for (a, b) in numeric.iter().zip(&ring) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max weight-1 deviation {worst:.1e}"))
}

fn c11_young_walk() -> Result<Outcome> {
    let mut worst_amp: f64 = 0.0;
    let mut worst_survival: f64 = 0.0;
    for t in [0.5, 1.0] {
        let num = numeric_walk(t, 12)?;
        let exact = exact_walk_amplitudes(t, 12)?;
        worst_amp = worst_amp.max(num.max_abs_diff(&exact));
        worst_survival = worst_survival.max((num.amplitudes[0].norm_sqr() - (-t * t).exp()).abs());
    }
    let report = differential_poset_check(&enumerate_partitions(12)?)?;
    outcome(
        worst_amp <= 1e-6 && worst_survival <= 1e-6 && report.holds(),
        format!(
            "amplitude deviation {worst_amp:.1e}, survival deviation {worst_survival:.1e}, interior commutator deviation {}",
            report.commutator_deviation
        ),
    )
}

fn chi_square(m: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let law = plancherel_law(m);
    let mut counts: HashMap<_, usize> = HashMap::new();
    for p in rsk_samples(m, samples, seed)? {
        *counts.entry(p).or_default() += 1;
    }
    let stat = law
        .iter()
        .map(|(p, prob)| {
            let e = prob * samples as f64;
            let o = counts.get(p).copied().unwrap_or(0) as f64;
            (o - e).powi(2) / e
        })
        .sum();
    let crit = ChiSquared::new((law.len() - 1) as f64).expect("dof > 0").inverse_cdf(0.99);
    Ok((stat, crit))
}

fn c12_plancherel() -> Result<Outcome> {
    let (s3, c3) = chi_square(3, 60000, 3)?;
    let (s8, c8) = chi_square(8, 60000, 8)?;
    let samples = rsk_samples(1600, 200, 7)?;
    let good = samples.iter().filter(|p| limit_shape_deviation(p) <= 0.12).count();
    outcome(
        s3 < c3 && s8 < c8 && good * 100 >= 95 * samples.len(),
        format!("chi2 m=3 {s3:.2}/{c3:.2}, m=8 {s8:.2}/{c8:.2}, limit shape {good}/200 within 0.12"),
    )
}

fn main() {
    type Check = fn() -> Result<Outcome>;
    let criteria: [(&str, Check, Duration); 12] = [
        ("string-term spectrum", c1_string_spectrum, Duration::from_secs(10)),
        ("ground energy law", c2_ground_energy, Duration::from_secs(30)),
        ("XXZ equivalence", c3_xxz_equivalence, Duration::MAX),
        ("XXZ gap formula", c4_gap_formula, Duration::from_secs(60)),
        ("gap certificate", c5_gap_certificate, Duration::MAX),
        ("edge probabilities", c6_edge_probabilities, Duration::MAX),
        ("particle left of centre", c7_particle_left, Duration::MAX),
        ("adiabatic end-to-end", c8_adiabatic, Duration::from_secs(300)),
        ("XY spectrum and E[N]", c9_xy, Duration::MAX),
        ("torus blocks", c10_torus, Duration::MAX),
        ("Young walk", c11_young_walk, Duration::MAX),
        ("Plancherel sampling", c12_plancherel, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2}s]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
