//! Preset check suites.

use qfk_core::classical::{
    bp_generator, gauss_hermite_check, gaussian_semigroup, ls_generator, unitary_conjugation_generator,
    AutomorphismGroup,
};
use qfk_core::flow::{
    cocycle_identity_check, flow_apply, flow_homomorphism_check, projection_commutation_check, tower_property_check,
    unitality_check, vacuum_adaptedness_check, FlowHandle,
};
use qfk_core::fock::{steps_for, vacuum_projection, LatticeParams};
use qfk_core::ito::{
    adjoint_check, inside_integral_check, integral_norm_check, ito_verify, positivity_check, BlockIntegrand,
};
use qfk_core::linalg::{ComplexMatrix, C64};
use qfk_core::multiplier::{
    multiplier_cocycle_check, norm_bound_check, picard_apply, vacuum_commutation_check, MultiplierProcess, VectorFamily,
};
use qfk_core::random::{complex_matrix, rng_from_seed, state_vector, vacuum_rooted_vector, QfkRng};
use qfk_core::semigroup::{
    convergence_study, cp_check_all_times, generator_convergence, generator_fd, semigroup_element,
    semigroup_law_all_times, validate_ladder, FdScheme, PerturbedSemigroup,
};
use qfk_core::structure::{
    phi_from_hp, psi_from_phi, tau_block, tau_gen, unitary_conj_coeff, Adaptedness, HPGenerator, MultiplierCoeff,
};

use crate::config::{ExperimentConfig, Preset};
use crate::report::{CheckRecord, ConvergenceSection, RunReport, Target};
use crate::CliError;

/// Anchor strings attached to report rows.
pub mod anchors {
    pub const GENERATOR_FORMULA: &str = "main-theorem/generator-formula";
    pub const DIRECT_SUM: &str = "closing-remark/direct-sum-decomposition";
    pub const SEMIGROUP_LAW: &str = "semigroup-theorem/semigroup-law";
    pub const COMPLETE_POSITIVITY: &str = "semigroup-theorem/complete-positivity";
    pub const MULTIPLIER_IDENTITY: &str = "multiplier-theorem/identity-at-zero";
    pub const MULTIPLIER_COMMUTATION: &str = "multiplier-theorem/vacuum-commutation";
    pub const MULTIPLIER_COCYCLE: &str = "multiplier-theorem/multiplier-cocycle";
    pub const PICARD: &str = "qsde-theorem/picard-iteration";
    pub const NORM_BOUND: &str = "qsde-theorem/norm-bound";
    pub const BAHN_PARK: &str = "bahn-park-generator";
    pub const LINDSAY_SINHA: &str = "lindsay-sinha-generator";
    pub const UNITARY_CONJUGATION: &str = "unitary-conjugation-generator";
    pub const GAUSSIAN: &str = "gaussian-subordination/closed-form";
    pub const GAUSS_HERMITE: &str = "gaussian-subordination/brownian-expectation";
    pub const PRE_GENERATOR: &str = "gaussian-subordination/pre-generator";
    pub const HOMOMORPHISM: &str = "cocycle-definition/homomorphism";
    pub const UNITALITY: &str = "cocycle-definition/unitality";
    pub const FLOW_COCYCLE: &str = "cocycle-definition/cocycle-identity";
    pub const VACUUM_ADAPTED: &str = "cocycle-definition/vacuum-adaptedness";
    pub const PROJECTION_COMMUTATION: &str = "vacuum-projection/commutation";
    pub const TOWER: &str = "conditional-expectation/tower-property";
    pub const PRODUCT_FORMULA: &str = "product-formula-lemma";
    pub const TRIPLE_PRODUCT: &str = "product-formula-corollary";
    pub const INSIDE: &str = "inside-integral-lemma";
    pub const INTEGRAL_NORM: &str = "integral-proposition/norm-estimate";
    pub const INTEGRAL_ADJOINT: &str = "integral-proposition/adjoint";
}

/// The flow generator and multiplier coefficients a preset runs on.
#[derive(Debug, Clone)]
pub struct PresetModel {
    pub gen: HPGenerator,
    pub c: MultiplierCoeff,
    pub d: MultiplierCoeff,
}

pub fn build_model(cfg: &ExperimentConfig, rng: &mut QfkRng) -> Result<PresetModel, CliError> {
    let n = cfg.n;
    let gaussian = || HPGenerator::gaussian_subordination(&cfg.htilde);
    Ok(match cfg.preset {
        Preset::GaussianSubordination => {
            PresetModel { gen: gaussian(), c: MultiplierCoeff::zero(n, 1), d: MultiplierCoeff::zero(n, 1) }
        }
        Preset::LindsaySinha => PresetModel {
            gen: gaussian(),
            c: MultiplierCoeff::zero(n, 1),
            d: MultiplierCoeff::creation(vec![cfg.b.clone()])?,
        },
        Preset::BahnPark => {
            let c = MultiplierCoeff::new((&cfg.b * &cfg.b).scale_real(-0.5), vec![cfg.b.clone()])?;
            PresetModel { gen: gaussian(), c: c.clone(), d: c }
        }
        Preset::UnitaryConjugation => {
            let c = unitary_conj_coeff(&cfg.hamiltonian, std::slice::from_ref(&cfg.coupling))?;
            PresetModel { gen: gaussian(), c: c.clone(), d: c }
        }
        Preset::RandomStructure => {
            let gen = HPGenerator::random(rng, n, cfg.d, cfg.gauge_angle);
            let coeff = |rng: &mut QfkRng| {
                MultiplierCoeff::new(
                    complex_matrix(rng, n, n).scale_real(0.5),
                    (0..cfg.d).map(|_| complex_matrix(rng, n, n).scale_real(0.5)).collect(),
                )
            };
            let c = coeff(rng)?;
            let d = coeff(rng)?;
            PresetModel { gen, c, d }
        }
    })
}

fn matrix_units(n: usize) -> Vec<ComplexMatrix> {
    (0..n).flat_map(|i| (0..n).map(move |j| ComplexMatrix::unit(n, i, j))).collect()
}

/// Matrix units plus a few random elements.
fn probe_elements(n: usize, rng: &mut QfkRng) -> Vec<ComplexMatrix> {
    let mut out = matrix_units(n);
    out.extend((0..4).map(|_| complex_matrix(rng, n, n)));
    out
}

fn max_of(xs: impl IntoIterator<Item = Result<f64, CliError>>) -> Result<f64, CliError> {
    xs.into_iter().try_fold(0.0f64, |acc, x| Ok(acc.max(x?)))
}

/// A few `(s, t)` pairs with `s + t ≤ N` covering the start, middle and a short tail.
fn split_pairs(slices: usize) -> Vec<(usize, usize)> {
    let mut pairs =
        vec![(1.min(slices), slices - 1.min(slices)), (slices / 2, slices - slices / 2), (slices / 3, slices / 3)];
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn ratio_record(check: &str, anchor: &'static str, coarse: f64, fine: f64, lo: f64, hi: f64) -> CheckRecord {
    if coarse <= 1e-12 && fine <= 1e-12 {
        CheckRecord::new(check, anchor, coarse.max(fine), Target::Exact { tol: 1e-12 })
    } else {
        CheckRecord::within(check, anchor, coarse / fine, lo, hi)
    }
}

fn flow_suite(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    fh: &FlowHandle,
    rng: &mut QfkRng,
) -> Result<(), CliError> {
    let (n, big_n, trials) = (cfg.n, cfg.slices, cfg.trials);
    let mid = big_n / 2;
    let a = complex_matrix(rng, n, n);
    let b = complex_matrix(rng, n, n);
    let vac = fh.with_mode(Adaptedness::Vacuum);

    let hom = flow_homomorphism_check(fh, &a, &b, big_n, trials, rng)?
        .max(flow_homomorphism_check(&vac, &a, &b, mid, trials, rng)?);
    report.push(CheckRecord::at_most(
        "flow_homomorphism",
        anchors::HOMOMORPHISM,
        hom,
        cfg.tol("flow_homomorphism", 1e-10),
    ));
    let unit = unitality_check(fh, big_n, trials, rng)?.max(unitality_check(&vac, mid, trials, rng)?);
    report.push(CheckRecord::at_most("flow_unitality", anchors::UNITALITY, unit, cfg.tol("flow_unitality", 1e-10)));
    let mut cocycle = 0.0f64;
    for (s, t) in split_pairs(big_n) {
        cocycle = cocycle.max(cocycle_identity_check(fh, &a, s, t, trials, rng)?);
    }
    report.push(CheckRecord::at_most(
        "flow_cocycle_identity",
        anchors::FLOW_COCYCLE,
        cocycle,
        cfg.tol("flow_cocycle_identity", 1e-10),
    ));
    let adapted = vacuum_adaptedness_check(fh, &a, mid, trials, rng)?;
    report.push(CheckRecord::at_most(
        "vacuum_adaptedness",
        anchors::VACUUM_ADAPTED,
        adapted,
        cfg.tol("vacuum_adaptedness", 1e-10),
    ));
    let comm = projection_commutation_check(fh, &a, mid, trials, rng)?;
    report.push(CheckRecord::at_most(
        "projection_commutation",
        anchors::PROJECTION_COMMUTATION,
        comm,
        cfg.tol("projection_commutation", 1e-10),
    ));
    let tower = tower_property_check(fh, &a, mid, trials, rng)?;
    report.push(CheckRecord::at_most("tower_property", anchors::TOWER, tower, cfg.tol("tower_property", 1e-10)));
    Ok(())
}

fn semigroup_suite(report: &mut RunReport, cfg: &ExperimentConfig, ps: &PerturbedSemigroup) -> Result<(), CliError> {
    let rich = generator_fd(ps, FdScheme::Richardson)?;
    report.push(CheckRecord::at_most(
        "generator_fd",
        anchors::GENERATOR_FORMULA,
        rich.error,
        cfg.tol("generator_fd", 0.05),
    ));
    let coarse = generator_fd(&ps.restricted(1)?, FdScheme::Euler)?.error;
    let fine = generator_fd(&ps.with_step(cfg.h / 2.0, 1)?, FdScheme::Euler)?.error;
    report.push(ratio_record("generator_euler_halving", anchors::GENERATOR_FORMULA, coarse, fine, 1.6, 2.5));
    let law = semigroup_law_all_times(ps)?;
    report.push(CheckRecord::at_most("semigroup_law", anchors::SEMIGROUP_LAW, law, cfg.tol("semigroup_law", 1e-9)));
    if ps.is_symmetric() {
        let cp = cp_check_all_times(ps)?;
        report.push(CheckRecord::at_least(
            "complete_positivity",
            anchors::COMPLETE_POSITIVITY,
            cp,
            -cfg.tol("complete_positivity", 1e-9),
        ));
    }
    Ok(())
}

fn multiplier_suite(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    mp: &MultiplierProcess,
    rng: &mut QfkRng,
) -> Result<(), CliError> {
    let p = mp.params();
    let big_n = p.slices;
    let v = state_vector(rng, p);
    let m0 = mp.apply(0, &v)?.distance(&v);
    report.push(CheckRecord::at_most("multiplier_identity", anchors::MULTIPLIER_IDENTITY, m0, 0.0));
    let comm = max_of([big_n / 2, big_n].map(|t| Ok(vacuum_commutation_check(mp, t, cfg.trials, rng)?)))?;
    report.push(CheckRecord::at_most(
        "multiplier_vacuum_commutation",
        anchors::MULTIPLIER_COMMUTATION,
        comm,
        cfg.tol("multiplier_vacuum_commutation", 1e-10),
    ));
    let mut cocycle = 0.0f64;
    for (s, t) in split_pairs(big_n) {
        cocycle = cocycle.max(multiplier_cocycle_check(mp, s, t, cfg.trials, rng)?);
    }
    report.push(CheckRecord::at_most(
        "multiplier_cocycle",
        anchors::MULTIPLIER_COCYCLE,
        cocycle,
        cfg.tol("multiplier_cocycle", 1e-9),
    ));

    let short = mp.restricted(big_n.min(6))?;
    let ts = short.params().slices;
    let w = vacuum_rooted_vector(rng, short.params());
    let picard = picard_apply(&short, ts, &w, 20)?;
    let direct = short.apply(ts, &w)?.sub(&w);
    report.push(CheckRecord::at_most(
        "picard_sum",
        anchors::PICARD,
        picard.distance(&direct),
        cfg.tol("picard_sum", 1e-10),
    ));

    let nb = norm_bound_check(mp, big_n, cfg.norm_trials, VectorFamily::VacuumRooted, rng)?;
    report.push(CheckRecord::at_most("norm_bound", anchors::NORM_BOUND, nb.observed, nb.bound * (1.0 + 1e-6)));
    Ok(())
}

fn classical_suite(report: &mut RunReport, cfg: &ExperimentConfig, ps: &PerturbedSemigroup) -> Result<(), CliError> {
    let ag = AutomorphismGroup::new(cfg.htilde.clone());
    let t = cfg.horizon();
    let units = matrix_units(cfg.n);
    let tau0 = ps.exact_generator()?;
    let mut lattice = 0.0f64;
    let mut quad = 0.0f64;
    let mut expo = 0.0f64;
    for a in &units {
        let closed = gaussian_semigroup(&ag, t, a)?;
        lattice = lattice.max((semigroup_element(ps, a, cfg.slices)? - closed.clone()).spectral_norm());
        quad = quad.max((gauss_hermite_check(&ag, t, a, 40)? - closed.clone()).spectral_norm());
        expo = expo.max((tau0.scale(t).exp().apply(a) - closed).spectral_norm());
    }
    report.push(CheckRecord::at_most(
        "classical_lattice",
        anchors::GAUSSIAN,
        lattice,
        cfg.tol("classical_lattice", cfg.h),
    ));
    report.push(CheckRecord::at_most("gauss_hermite", anchors::GAUSS_HERMITE, quad, cfg.tol("gauss_hermite", 1e-8)));
    report.push(CheckRecord::at_most(
        "closed_form_vs_tau0",
        anchors::PRE_GENERATOR,
        expo,
        cfg.tol("closed_form_vs_tau0", 1e-10),
    ));
    Ok(())
}

fn reduction_residual(
    elements: &[ComplexMatrix],
    mut lhs: impl FnMut(&ComplexMatrix) -> Result<ComplexMatrix, CliError>,
    mut rhs: impl FnMut(&ComplexMatrix) -> Result<ComplexMatrix, CliError>,
) -> Result<f64, CliError> {
    max_of(elements.iter().map(|x| Ok((lhs(x)? - rhs(x)?).spectral_norm())))
}

fn reduction_suite(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    model: &PresetModel,
    rng: &mut QfkRng,
) -> Result<(), CliError> {
    let psi = psi_from_phi(&phi_from_hp(&model.gen));
    let xs = probe_elements(cfg.n, rng);
    let ag = AutomorphismGroup::new(cfg.htilde.clone());
    let via_tau = |x: &ComplexMatrix| Ok(tau_gen(&psi, &model.c, &model.d, x)?);
    match cfg.preset {
        Preset::LindsaySinha => {
            let r = reduction_residual(&xs, via_tau, |x| Ok(ls_generator(&ag, &cfg.b, x)))?;
            report.push(CheckRecord::at_most(
                "ls_reduction",
                anchors::LINDSAY_SINHA,
                r,
                cfg.tol("ls_reduction", 1e-12),
            ));
        }
        Preset::BahnPark => {
            let r = reduction_residual(&xs, via_tau, |x| Ok(bp_generator(&ag, &cfg.b, x)?))?;
            report.push(CheckRecord::at_most("bp_reduction", anchors::BAHN_PARK, r, cfg.tol("bp_reduction", 1e-12)));
        }
        Preset::UnitaryConjugation => {
            let r = reduction_residual(&xs, via_tau, |x| {
                Ok(unitary_conjugation_generator(&psi, &cfg.hamiltonian, &cfg.coupling, x)?)
            })?;
            report.push(CheckRecord::at_most(
                "uc_reduction",
                anchors::UNITARY_CONJUGATION,
                r,
                cfg.tol("uc_reduction", 1e-12),
            ));
            let unital = via_tau(&ComplexMatrix::identity(cfg.n))?.spectral_norm();
            report.push(CheckRecord::at_most(
                "uc_unital",
                anchors::UNITARY_CONJUGATION,
                unital,
                cfg.tol("uc_unital", 1e-12),
            ));
        }
        Preset::GaussianSubordination | Preset::RandomStructure => {}
    }
    let r = reduction_residual(&xs, via_tau, |x| Ok(tau_block(&psi, &model.c, &model.d, x)?))?;
    report.push(CheckRecord::at_most(
        "tau_block_agreement",
        anchors::DIRECT_SUM,
        r,
        cfg.tol("tau_block_agreement", 1e-12),
    ));
    Ok(())
}

fn ito_suite(report: &mut RunReport, cfg: &ExperimentConfig, rng: &mut QfkRng) -> Result<(), CliError> {
    let (n, d) = (cfg.n, cfg.d);
    let m = n * (1 + d);
    let blocks: Vec<ComplexMatrix> = (0..3).map(|_| complex_matrix(rng, m, m)).collect();
    let two = ito_verify(&blocks[..2], n, d, cfg.ito_t, cfg.ito_h, cfg.trials, rng)?;
    report.push(ratio_record(
        "ito_product_ratio",
        anchors::PRODUCT_FORMULA,
        two.residual_coarse,
        two.residual_fine,
        1.5,
        2.8,
    ));
    let three = ito_verify(&blocks, n, d, cfg.ito_t, cfg.ito_h, cfg.trials, rng)?;
    report.push(ratio_record(
        "ito_triple_ratio",
        anchors::TRIPLE_PRODUCT,
        three.residual_coarse,
        three.residual_fine,
        1.5,
        2.8,
    ));

    let p = LatticeParams::with_horizon(n, d, cfg.ito_t, cfg.ito_h)?;
    let creation = BlockIntegrand::pure_creation(p, &(0..d).map(|_| complex_matrix(rng, n, n)).collect::<Vec<_>>())?;
    let s = p.slices / 2;
    let fh = FlowHandle::new(HPGenerator::random(rng, n, d, cfg.gauge_angle), p, Adaptedness::Vacuum)?;
    let a = complex_matrix(rng, n, n);
    let x = move |v: &qfk_core::fock::StateVector| flow_apply(&fh, &a, s, &vacuum_projection(s, v)?);
    let inside = inside_integral_check(&creation, x, s, p.slices, cfg.trials, rng)?;
    report.push(CheckRecord::at_most("inside_integral", anchors::INSIDE, inside, cfg.tol("inside_integral", 1e-10)));

    let mats = (0..p.slices).map(|_| complex_matrix(rng, m, m)).collect();
    let g = BlockIntegrand::from_matrices(p, mats)?;
    let est = integral_norm_check(&g, p.slices, cfg.norm_trials, rng)?;
    report.push(CheckRecord::at_most(
        "integral_norm_estimate",
        anchors::INTEGRAL_NORM,
        est.observed,
        est.bound * (1.0 + 1e-12),
    ));
    let adj = adjoint_check(&g, p.slices, cfg.trials, rng)?;
    report.push(CheckRecord::at_most(
        "integral_adjoint",
        anchors::INTEGRAL_ADJOINT,
        adj,
        cfg.tol("integral_adjoint", 1e-10),
    ));
    let pos = positivity_check(&g, p.slices, cfg.trials, rng)?;
    report.push(CheckRecord::at_least(
        "integral_positivity",
        anchors::INTEGRAL_ADJOINT,
        pos,
        -cfg.tol("integral_positivity", 1e-10),
    ));
    Ok(())
}

/// Runs the preset's check suite. Deterministic given the config.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let mut rng = rng_from_seed(cfg.seed);
    let mut report = RunReport::new("run", cfg.preset.name().to_string(), cfg.seed, cfg.entries().clone());
    let model = build_model(cfg, &mut rng)?;
    let params = cfg.lattice()?;
    let fh = FlowHandle::new(model.gen.clone(), params, Adaptedness::Identity)?;
    let ps = PerturbedSemigroup::new(fh.clone(), model.c.clone(), model.d.clone())?;

    reduction_suite(&mut report, cfg, &model, &mut rng)?;
    if matches!(cfg.preset, Preset::GaussianSubordination | Preset::RandomStructure) {
        flow_suite(&mut report, cfg, &fh, &mut rng)?;
    }
    semigroup_suite(&mut report, cfg, &ps)?;
    match cfg.preset {
        Preset::GaussianSubordination => classical_suite(&mut report, cfg, &ps)?,
        Preset::LindsaySinha => multiplier_suite(&mut report, cfg, ps.right(), &mut rng)?,
        Preset::BahnPark | Preset::UnitaryConjugation => multiplier_suite(&mut report, cfg, ps.left(), &mut rng)?,
        Preset::RandomStructure => {
            multiplier_suite(&mut report, cfg, ps.left(), &mut rng)?;
            ito_suite(&mut report, cfg, &mut rng)?;
        }
    }
    Ok(report)
}

/// `Σ_{i≠j} E_ij`, the test element of the convergence tables.
fn convergence_element(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { C64::new(0.0, 0.0) } else { C64::new(1.0, 0.0) })
}

fn order_records(report: &mut RunReport, name: &str, section: &ConvergenceSection) {
    if section.exact {
        let worst = section.errors.iter().cloned().fold(0.0, f64::max);
        report.push(CheckRecord::new(
            format!("{name}_order"),
            anchors::GENERATOR_FORMULA,
            worst,
            Target::Exact { tol: 1e-12 },
        ));
        return;
    }
    for (k, order) in section.orders.iter().enumerate() {
        let observed = order.unwrap_or(f64::NAN);
        report.push(CheckRecord::within(
            format!("{name}_order_{}", k + 1),
            anchors::GENERATOR_FORMULA,
            observed,
            0.7,
            1.3,
        ));
    }
}

/// Error-vs-`h` tables and fitted orders for the semigroup and Euler generator.
pub fn convergence(cfg: &ExperimentConfig, ladder: &[f64]) -> Result<RunReport, CliError> {
    validate_ladder(ladder).map_err(|e| CliError::Config(e.to_string()))?;
    let t = cfg.horizon();
    for &h in ladder {
        let slices = steps_for(t, h).map_err(|e| CliError::Config(format!("ladder step {h}: {e}")))?;
        LatticeParams::new(cfg.n, cfg.d, slices, h).map_err(|e| CliError::Config(format!("ladder step {h}: {e}")))?;
    }
    let mut rng = rng_from_seed(cfg.seed);
    let model = build_model(cfg, &mut rng)?;
    let mut report = RunReport::new("convergence", cfg.preset.name().to_string(), cfg.seed, cfg.entries().clone());
    let a = convergence_element(cfg.n);
    let semigroup =
        ConvergenceSection::new("semigroup", &convergence_study(&model.gen, &model.c, &model.d, ladder, t, &a)?);
    let generator =
        ConvergenceSection::new("generator", &generator_convergence(&model.gen, &model.c, &model.d, ladder)?);
    order_records(&mut report, "semigroup", &semigroup);
    order_records(&mut report, "generator", &generator);
    report.convergence = vec![semigroup, generator];
    Ok(report)
}
