//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qfk_cli::{convergence, run, ExperimentConfig, Preset, RunReport};
use qfk_core::classical::{bp_generator, ls_generator, unitary_conjugation_generator, AutomorphismGroup};
use qfk_core::fock::LatticeParams;
use qfk_core::ito::{inside_integral_check, integral_norm_check, ito_verify, BlockIntegrand};
use qfk_core::linalg::{pauli, ComplexMatrix};
use qfk_core::multiplier::{
    multiplier_cocycle_check, norm_bound_check, picard_apply, vacuum_commutation_check, MultiplierProcess, VectorFamily,
};
use qfk_core::random::{complex_matrix, hermitian, rng_from_seed, state_vector, vacuum_rooted_vector, QfkRng};
use qfk_core::semigroup::{generator_fd, semigroup_law_all_times, FdScheme, PerturbedSemigroup};
use qfk_core::structure::{
    phi_from_hp, psi_from_phi, tau_block, tau_gen, unitary_conj_coeff, HPGenerator, MultiplierCoeff,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn config(pairs: &[(&str, &str)]) -> ExperimentConfig {
    let entries: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ExperimentConfig::from_pairs(entries).expect("acceptance configs are valid")
}

fn preset_report(preset: Preset) -> RunReport {
    let cfg = match preset {
        Preset::BahnPark => config(&[("preset", preset.name()), ("b", "sigma_x")]),
        _ => config(&[("preset", preset.name())]),
    };
    run(&cfg).expect("preset runs")
}

fn record_value(report: &RunReport, check: &str) -> (f64, bool) {
    let r = report.find(check).unwrap_or_else(|| panic!("{} report has no {check} row", report.preset));
    (r.observed, r.pass)
}

fn random_coeff(rng: &mut QfkRng, n: usize, d: usize) -> MultiplierCoeff {
    MultiplierCoeff::new(
        complex_matrix(rng, n, n).scale_real(0.5),
        (0..d).map(|_| complex_matrix(rng, n, n).scale_real(0.5)).collect(),
    )
    .unwrap()
}

fn bahn_park(b: &ComplexMatrix) -> MultiplierCoeff {
    MultiplierCoeff::new((b * b).scale_real(-0.5), vec![b.clone()]).unwrap()
}

fn sigma_z_flow() -> HPGenerator {
    HPGenerator::gaussian_subordination(&qfk_core::linalg::HermitianMatrix::new(pauli::z()).unwrap())
}

fn bp_semigroup(h: f64, slices: usize) -> PerturbedSemigroup {
    let c = bahn_park(&pauli::x());
    let params = LatticeParams::new(2, 1, slices, h).unwrap();
    PerturbedSemigroup::from_parts(sigma_z_flow(), params, c.clone(), c).unwrap()
}

fn generator_formula() -> Outcome {
    let start = Instant::now();
    let rich = generator_fd(&bp_semigroup(0.025, 1), FdScheme::Richardson).unwrap().error;
    let coarse = generator_fd(&bp_semigroup(0.05, 1), FdScheme::Euler).unwrap().error;
    let fine = generator_fd(&bp_semigroup(0.025, 1), FdScheme::Euler).unwrap().error;
    let ratio = coarse / fine;
    let elapsed = start.elapsed();
    Outcome::new(
        rich <= 0.05 && (1.6..=2.5).contains(&ratio) && elapsed <= Duration::from_secs(60),
        format!("Richardson error {rich:.3e} at h=0.025, Euler halving ratio {ratio:.3}, {elapsed:.2?}"),
    )
}

fn algebraic_reductions() -> Outcome {
    let mut rng = rng_from_seed(2024);
    let mut block = 0.0f64;
    for i in 0..100 {
        let d = 1 + i % 2;
        let gen = HPGenerator::random(&mut rng, 2, d, 0.8);
        let psi = psi_from_phi(&phi_from_hp(&gen));
        let c = random_coeff(&mut rng, 2, d);
        let dd = random_coeff(&mut rng, 2, d);
        let x = complex_matrix(&mut rng, 2, 2);
        let diff = tau_gen(&psi, &c, &dd, &x).unwrap() - tau_block(&psi, &c, &dd, &x).unwrap();
        block = block.max(diff.spectral_norm());
    }

    let (mut bp, mut ls, mut uc, mut unital) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let htilde = hermitian(&mut rng, 2);
        let ag = AutomorphismGroup::new(htilde.clone());
        let psi = psi_from_phi(&phi_from_hp(&HPGenerator::gaussian_subordination(&htilde)));
        let x = complex_matrix(&mut rng, 2, 2);

        let b = hermitian(&mut rng, 2).into_inner();
        let c = bahn_park(&b);
        bp = bp.max((tau_gen(&psi, &c, &c, &x).unwrap() - bp_generator(&ag, &b, &x).unwrap()).spectral_norm());

        let b = complex_matrix(&mut rng, 2, 2);
        let d = MultiplierCoeff::creation(vec![b.clone()]).unwrap();
        let zero = MultiplierCoeff::zero(2, 1);
        ls = ls.max((tau_gen(&psi, &zero, &d, &x).unwrap() - ls_generator(&ag, &b, &x)).spectral_norm());

        let gen = HPGenerator::random(&mut rng, 2, 1, 0.8);
        let psi = psi_from_phi(&phi_from_hp(&gen));
        let h = hermitian(&mut rng, 2);
        let l = complex_matrix(&mut rng, 2, 2);
        let c = unitary_conj_coeff(&h, std::slice::from_ref(&l)).unwrap();
        let reference = unitary_conjugation_generator(&psi, &h, &l, &x).unwrap();
        uc = uc.max((tau_gen(&psi, &c, &c, &x).unwrap() - reference).spectral_norm());
        unital = unital.max(tau_gen(&psi, &c, &c, &ComplexMatrix::identity(2)).unwrap().spectral_norm());
    }
    let worst = block.max(bp).max(ls).max(uc).max(unital);
    Outcome::new(
        worst <= 1e-12,
        format!("tau_block {block:.1e}, bahn-park {bp:.1e}, lindsay-sinha {ls:.1e}, unitary-conjugation {uc:.1e}, tau(I) {unital:.1e}"),
    )
}

fn semigroup_law() -> Outcome {
    let mut rng = rng_from_seed(3);
    let mut worst = semigroup_law_all_times(&bp_semigroup(0.05, 10)).unwrap();
    for d in [1, 2] {
        let gen = HPGenerator::random(&mut rng, 2, d, 0.8);
        let c = random_coeff(&mut rng, 2, d);
        let dd = random_coeff(&mut rng, 2, d);
        let params = LatticeParams::new(2, d, 8, 0.05).unwrap();
        let ps = PerturbedSemigroup::from_parts(gen, params, c, dd).unwrap();
        worst = worst.max(semigroup_law_all_times(&ps).unwrap());
    }
    Outcome::new(worst <= 1e-9, format!("max residual {worst:.2e} over all aligned s, t and matrix units"))
}

fn complete_positivity(reports: &[RunReport]) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut all = true;
    for r in
        reports.iter().filter(|r| r.preset != Preset::LindsaySinha.name() && r.preset != Preset::RandomStructure.name())
    {
        let (v, pass) = record_value(r, "complete_positivity");
        worst = worst.min(v);
        all &= pass;
    }
    Outcome::new(
        all && worst >= -1e-9,
        format!("min Choi eigenvalue {worst:.2e} over gaussian, bahn-park, unitary-conjugation"),
    )
}

/// The bahn-park multiplier on `slices`, and both multipliers of a random d = 2
/// model on `random_slices`.
fn multiplier_cases(
    rng: &mut QfkRng,
    slices: usize,
    random_slices: usize,
    h: f64,
) -> Vec<(&'static str, MultiplierProcess)> {
    let bp = bp_semigroup(h, slices);
    let gen = HPGenerator::random(rng, 2, 2, 0.8);
    let params = LatticeParams::new(2, 2, random_slices, h).unwrap();
    let c = random_coeff(rng, 2, 2);
    let d = random_coeff(rng, 2, 2);
    let random = PerturbedSemigroup::from_parts(gen, params, c, d).unwrap();
    vec![
        ("bahn-park", bp.left().clone()),
        ("random left", random.left().clone()),
        ("random right", random.right().clone()),
    ]
}

fn multiplier_axioms() -> Outcome {
    let mut rng = rng_from_seed(5);
    let (mut m0, mut comm, mut cocycle, mut picard) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (_, mp) in multiplier_cases(&mut rng, 6, 6, 0.1) {
        let p = mp.params();
        let v = state_vector(&mut rng, p);
        m0 = m0.max(mp.apply(0, &v).unwrap().distance(&v));
        for t in 0..=p.slices {
            comm = comm.max(vacuum_commutation_check(&mp, t, 2, &mut rng).unwrap());
            for s in 0..=p.slices - t {
                cocycle = cocycle.max(multiplier_cocycle_check(&mp, s, t, 2, &mut rng).unwrap());
            }
        }
        let w = vacuum_rooted_vector(&mut rng, p);
        let direct = mp.apply(p.slices, &w).unwrap().sub(&w);
        picard = picard.max(picard_apply(&mp, p.slices, &w, 20).unwrap().distance(&direct));
    }
    Outcome::new(
        m0 == 0.0 && comm <= 1e-10 && cocycle <= 1e-9 && picard <= 1e-10,
        format!("M(i) {m0:e}, M(ii) {comm:.1e}, M(iii) {cocycle:.1e}, Picard n=20 {picard:.1e}"),
    )
}

fn norm_bound() -> Outcome {
    let mut rng = rng_from_seed(6);
    let mut worst_ratio = 0.0f64;
    let mut all = true;
    let mut cases = multiplier_cases(&mut rng, 20, 12, 0.05);
    let gauss = PerturbedSemigroup::from_parts(
        sigma_z_flow(),
        LatticeParams::new(2, 1, 20, 0.05).unwrap(),
        MultiplierCoeff::zero(2, 1),
        MultiplierCoeff::creation(vec![pauli::x()]).unwrap(),
    )
    .unwrap();
    cases.push(("lindsay-sinha", gauss.right().clone()));
    for (_, mp) in &cases {
        for t in [5, mp.params().slices] {
            let r = norm_bound_check(mp, t, 100, VectorFamily::VacuumRooted, &mut rng).unwrap();
            all &= r.holds();
            worst_ratio = worst_ratio.max(r.observed / r.bound);
        }
    }
    Outcome::new(all, format!("largest observed/bound {worst_ratio:.3} over {} multipliers x 100 vectors", cases.len()))
}

fn classical_oracle(gaussian: &RunReport) -> Outcome {
    let cfg = config(&[("preset", "gaussian-subordination"), ("T", "0.5"), ("h", "0.05")]);
    let conv = convergence(&cfg, &[0.1, 0.05, 0.025]).unwrap();
    let orders: Vec<f64> =
        conv.convergence.iter().find(|s| s.name == "semigroup").unwrap().orders.iter().flatten().copied().collect();
    let orders_ok = !orders.is_empty() && orders.iter().all(|o| (0.7..=1.3).contains(o));
    let (lattice, lattice_ok) = record_value(gaussian, "classical_lattice");
    let (quad, quad_ok) = record_value(gaussian, "gauss_hermite");
    let (expo, expo_ok) = record_value(gaussian, "closed_form_vs_tau0");
    Outcome::new(
        orders_ok && lattice_ok && quad_ok && expo_ok,
        format!("orders {orders:.3?}, lattice error {lattice:.2e} <= h, Gauss-Hermite {quad:.1e}, tau0 exponential {expo:.1e}"),
    )
}

fn ito_product() -> Outcome {
    let mut rng = rng_from_seed(8);
    let mut ratios = Vec::new();
    let (mut inside, mut norm_ok) = (0.0f64, true);
    for d in [1, 2] {
        let m = 2 * (1 + d);
        let blocks: Vec<ComplexMatrix> = (0..3).map(|_| complex_matrix(&mut rng, m, m)).collect();
        ratios.push(ito_verify(&blocks[..2], 2, d, 0.5, 0.1, 3, &mut rng).unwrap().ratio());
        ratios.push(ito_verify(&blocks, 2, d, 0.5, 0.1, 3, &mut rng).unwrap().ratio());

        let p = LatticeParams::new(2, d, 6, 0.1).unwrap();
        let b: Vec<ComplexMatrix> = (0..d).map(|_| complex_matrix(&mut rng, 2, 2)).collect();
        let creation = BlockIntegrand::pure_creation(p, &b).unwrap();
        let a = complex_matrix(&mut rng, 2, 2);
        let x = move |v: &qfk_core::fock::StateVector| Ok(v.apply_initial(&a));
        inside = inside.max(inside_integral_check(&creation, x, 2, 6, 3, &mut rng).unwrap());

        let mats = (0..p.slices).map(|_| complex_matrix(&mut rng, m, m)).collect();
        let g = BlockIntegrand::from_matrices(p, mats).unwrap();
        norm_ok &= integral_norm_check(&g, p.slices, 100, &mut rng).unwrap().holds();
    }
    let ratios_ok = ratios.iter().all(|r| (1.5..=2.8).contains(r));
    Outcome::new(
        ratios_ok && inside <= 1e-10 && norm_ok,
        format!("halving ratios {ratios:.3?}, inside {inside:.1e}, norm estimate held on 2 x 100 trials: {norm_ok}"),
    )
}

fn structural_exactness(reports: &[RunReport]) -> Outcome {
    const CHECKS: [&str; 6] = [
        "flow_homomorphism",
        "flow_unitality",
        "flow_cocycle_identity",
        "vacuum_adaptedness",
        "projection_commutation",
        "tower_property",
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for r in reports
        .iter()
        .filter(|r| r.preset == Preset::GaussianSubordination.name() || r.preset == Preset::RandomStructure.name())
    {
        for check in CHECKS {
            worst = worst.max(record_value(r, check).0);
            count += 1;
        }
    }
    Outcome::new(count == 12 && worst <= 1e-10, format!("max residual {worst:.1e} over {count} randomized checks"))
}

fn reproducibility(reports: &[RunReport], suite_time: Duration) -> Outcome {
    let mut identical = true;
    for preset in [Preset::BahnPark, Preset::RandomStructure] {
        let again = preset_report(preset).to_json().unwrap();
        let first = reports.iter().find(|r| r.preset == preset.name()).unwrap().to_json().unwrap();
        identical &= again == first;
    }
    Outcome::new(
        identical && suite_time <= Duration::from_secs(300),
        format!("byte-identical JSON: {identical}, full preset suite {suite_time:.2?}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let reports: Vec<RunReport> = Preset::ALL.iter().map(|&p| preset_report(p)).collect();
    let suite_time = start.elapsed();
    let gaussian = &reports[0];
    assert_eq!(gaussian.preset, Preset::GaussianSubordination.name());

    let outcomes = [
        ("generator formula", generator_formula()),
        ("algebraic reductions", algebraic_reductions()),
        ("semigroup law", semigroup_law()),
        ("complete positivity", complete_positivity(&reports)),
        ("multiplier axioms", multiplier_axioms()),
        ("norm bound", norm_bound()),
        ("classical oracle", classical_oracle(gaussian)),
        ("Ito product", ito_product()),
        ("structural exactness", structural_exactness(&reports)),
        ("reproducibility", reproducibility(&reports, suite_time)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    for r in &reports {
        for f in r.failures() {
            println!("  {} preset row failed: {}", r.preset, f.summary());
        }
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
