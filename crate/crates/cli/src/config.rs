//! `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Matrices are written as
//! named Paulis (`sigma_x`, `sigma_y`, `sigma_z`, `identity`, `zero`), an
//! optional complex scale (`0.5*sigma_x`), or a literal `[[1, 0], [0, -1]]`
//! whose entries use the `a+bi` notation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qfk_core::fock::{steps_for, LatticeParams};
use qfk_core::linalg::{pauli, ComplexMatrix, HermitianMatrix, C64};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Preset {
    GaussianSubordination,
    LindsaySinha,
    BahnPark,
    UnitaryConjugation,
    RandomStructure,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::GaussianSubordination,
        Preset::LindsaySinha,
        Preset::BahnPark,
        Preset::UnitaryConjugation,
        Preset::RandomStructure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::GaussianSubordination => "gaussian-subordination",
            Preset::LindsaySinha => "lindsay-sinha",
            Preset::BahnPark => "bahn-park",
            Preset::UnitaryConjugation => "unitary-conjugation",
            Preset::RandomStructure => "random-structure",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::GaussianSubordination => {
                "Brownian subordination of Ad(exp(isH~)), no perturbation; checked against the classical closed form"
            }
            Preset::LindsaySinha => "Gaussian flow perturbed on the right by the creation coefficient (0; b)",
            Preset::BahnPark => "Gaussian flow with c = d = (-b^2/2; b) for self-adjoint b",
            Preset::UnitaryConjugation => {
                "Gaussian flow conjugated by the unitary process with coefficient (-ih - l*l/2; l)"
            }
            Preset::RandomStructure => {
                "seeded random structure generator with unequal random multipliers, plus product-formula checks"
            }
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "n",
    "d",
    "N",
    "h",
    "T",
    "seed",
    "trials",
    "norm_trials",
    "htilde",
    "b",
    "hamiltonian",
    "coupling",
    "gauge_angle",
    "ito_t",
    "ito_h",
    "out",
];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub n: usize,
    pub d: usize,
    pub slices: usize,
    pub h: f64,
    pub seed: u64,
    /// Random vectors per structural check.
    pub trials: usize,
    /// Random vectors for the norm-bound checks.
    pub norm_trials: usize,
    pub htilde: HermitianMatrix,
    pub b: ComplexMatrix,
    pub hamiltonian: HermitianMatrix,
    pub coupling: ComplexMatrix,
    pub gauge_angle: f64,
    pub ito_t: f64,
    pub ito_h: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub out_dir: Option<PathBuf>,
    entries: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_complex(s: &str) -> Result<C64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    t.parse::<C64>().map_err(|_| config_err(format!("cannot parse complex number {s:?}")))
}

pub fn parse_matrix(s: &str) -> Result<ComplexMatrix, CliError> {
    let s = s.trim();
    if let Some((scale, rest)) = s.split_once('*') {
        return Ok(parse_matrix(rest)?.scale(parse_complex(scale)?));
    }
    match s {
        "sigma_x" => return Ok(pauli::x()),
        "sigma_y" => return Ok(pauli::y()),
        "sigma_z" => return Ok(pauli::z()),
        "identity" => return Ok(ComplexMatrix::identity(2)),
        "zero" => return Ok(ComplexMatrix::zeros(2, 2)),
        _ => {}
    }
    let inner = s
        .strip_prefix("[[")
        .and_then(|r| r.strip_suffix("]]"))
        .ok_or_else(|| config_err(format!("unrecognised matrix {s:?}")))?;
    let rows = inner
        .split("],")
        .map(|row| row.trim().trim_start_matches('[').split(',').map(parse_complex).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(config_err(format!("matrix {s:?} is not square")));
    }
    Ok(ComplexMatrix::from_rows(&rows))
}

fn parse_hermitian(key: &str, s: &str) -> Result<HermitianMatrix, CliError> {
    HermitianMatrix::new(parse_matrix(s)?).map_err(|e| config_err(format!("{key} must be Hermitian: {e}")))
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| config_err(format!("cannot parse {key} = {s:?}")))
}

/// Splits config text into ordered `key → value` pairs.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().to_string();
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(config_err(format!("line {}: duplicate key {key}", lineno + 1)));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_pairs(parse_pairs(text)?)
    }

    /// Builds a config after command-line overrides have been merged into `entries`.
    pub fn from_pairs(entries: BTreeMap<String, String>) -> Result<Self, CliError> {
        for key in entries.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) && !key.starts_with("tol.") {
                return Err(config_err(format!("unknown key {key}")));
            }
        }
        let get = |k: &str| entries.get(k).map(String::as_str);
        let preset_name = get("preset").ok_or_else(|| config_err("missing required key preset"))?;
        let preset =
            Preset::from_name(preset_name).ok_or_else(|| config_err(format!("unknown preset {preset_name}")))?;

        let (slices, h) = resolve_time(get("N"), get("h"), get("T"))?;

        let htilde = parse_hermitian("htilde", get("htilde").unwrap_or("sigma_z"))?;
        let b = match (preset, get("b")) {
            (Preset::BahnPark, None) => return Err(config_err("bahn-park requires a Hermitian b")),
            (Preset::BahnPark, Some(s)) => parse_hermitian("b", s)
                .map_err(|_| config_err(format!("bahn-park requires a Hermitian b, got {s}")))?
                .into_inner(),
            (_, s) => parse_matrix(s.unwrap_or("sigma_x"))?,
        };
        let hamiltonian = parse_hermitian("hamiltonian", get("hamiltonian").unwrap_or("0.5*sigma_z"))?;
        let coupling = parse_matrix(get("coupling").unwrap_or("0.5*sigma_x"))?;

        let (n, d) = match preset {
            Preset::RandomStructure => (
                get("n").map(|s| parse_num("n", s)).transpose()?.unwrap_or(2),
                get("d").map(|s| parse_num("d", s)).transpose()?.unwrap_or(1),
            ),
            _ => {
                let n = htilde.dim();
                for (key, want) in [("n", n), ("d", 1)] {
                    if let Some(s) = get(key) {
                        let got: usize = parse_num(key, s)?;
                        if got != want {
                            return Err(config_err(format!("{preset} fixes {key} = {want}, got {got}")));
                        }
                    }
                }
                (n, 1)
            }
        };
        if n == 0 || d == 0 {
            return Err(config_err("n and d must be at least 1"));
        }
        for (key, m) in [("b", &b), ("hamiltonian", hamiltonian.matrix()), ("coupling", &coupling)] {
            if preset != Preset::RandomStructure && m.shape() != (n, n) {
                return Err(config_err(format!("{key} must be {n}x{n} to match htilde")));
            }
        }

        let mut tolerances = BTreeMap::new();
        for (k, v) in &entries {
            if let Some(name) = k.strip_prefix("tol.") {
                tolerances.insert(name.to_string(), parse_num::<f64>(k, v)?);
            }
        }

        let cfg = Self {
            preset,
            n,
            d,
            slices,
            h,
            seed: get("seed").map(|s| parse_num("seed", s)).transpose()?.unwrap_or(1),
            trials: get("trials").map(|s| parse_num("trials", s)).transpose()?.unwrap_or(3),
            norm_trials: get("norm_trials").map(|s| parse_num("norm_trials", s)).transpose()?.unwrap_or(100),
            htilde,
            b,
            hamiltonian,
            coupling,
            gauge_angle: get("gauge_angle").map(|s| parse_num("gauge_angle", s)).transpose()?.unwrap_or(0.8),
            ito_t: get("ito_t").map(|s| parse_num("ito_t", s)).transpose()?.unwrap_or(0.5),
            ito_h: get("ito_h").map(|s| parse_num("ito_h", s)).transpose()?.unwrap_or(0.1),
            tolerances,
            out_dir: get("out").map(PathBuf::from),
            entries,
        };
        if cfg.trials == 0 || cfg.norm_trials == 0 {
            return Err(config_err("trials and norm_trials must be at least 1"));
        }
        cfg.lattice()?;
        if preset == Preset::RandomStructure {
            LatticeParams::with_horizon(n, d, cfg.ito_t, cfg.ito_h / 2.0)
                .map_err(|e| config_err(format!("ito lattice: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn horizon(&self) -> f64 {
        self.slices as f64 * self.h
    }

    pub fn lattice(&self) -> Result<LatticeParams, CliError> {
        LatticeParams::new(self.n, self.d, self.slices, self.h).map_err(|e| config_err(e.to_string()))
    }

    pub fn tol(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }

    /// The key/value pairs the config was built from.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}

fn resolve_time(n: Option<&str>, h: Option<&str>, t: Option<&str>) -> Result<(usize, f64), CliError> {
    let n: Option<usize> = n.map(|s| parse_num("N", s)).transpose()?;
    let h: Option<f64> = h.map(|s| parse_num("h", s)).transpose()?;
    let t: Option<f64> = t.map(|s| parse_num("T", s)).transpose()?;
    if n == Some(0) {
        return Err(config_err("N must be at least 1 (got N = 0)"));
    }
    if let Some(h) = h {
        if !(h.is_finite() && h > 0.0) {
            return Err(config_err(format!("h must be positive (got h = {h})")));
        }
    }
    match (n, h, t) {
        (Some(n), Some(h), Some(t)) => {
            if (n as f64 * h - t).abs() > 1e-12 {
                return Err(config_err(format!("N*h must equal T within 1e-12 (N = {n}, h = {h}, T = {t})")));
            }
            Ok((n, h))
        }
        (Some(n), Some(h), None) => Ok((n, h)),
        (None, Some(h), Some(t)) => Ok((steps_for(t, h).map_err(|e| config_err(e.to_string()))?, h)),
        (Some(n), None, Some(t)) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(config_err(format!("T must be positive (got T = {t})")));
            }
            Ok((n, t / n as f64))
        }
        (None, None, None) => Ok((10, 0.05)),
        _ => Err(config_err("give two of N, h and T")),
    }
}
