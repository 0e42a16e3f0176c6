//! Run configuration: shift spaces, systems and potentials declared in JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thermoform::beta::BetaValue;
use thermoform::dimension::{CellWeighting, DimensionCheckParams, PressureSettings};
use thermoform::gdms::{self, Branch, BranchMap, Gdms, Interval};
use thermoform::shift::{IncidenceMatrix, Potential, ShiftSpace};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShiftSpec {
    Full {
        letters: usize,
    },
    GoldenMean,
    CountableFull,
    /// 0/1 incidence rows.
    Matrix {
        rows: Vec<Vec<u8>>,
    },
}

impl ShiftSpec {
    pub fn build(&self) -> Result<ShiftSpace, CliError> {
        Ok(match self {
            ShiftSpec::Full { letters } => {
                if *letters == 0 {
                    return Err(CliError::Config("a full shift needs at least one letter".into()));
                }
                ShiftSpace::full(*letters)
            }
            ShiftSpec::GoldenMean => ShiftSpace::golden_mean(),
            ShiftSpec::CountableFull => ShiftSpace::countable_full(),
            ShiftSpec::Matrix { rows } => {
                if rows.iter().flatten().any(|v| *v > 1) {
                    return Err(CliError::Config("incidence entries must be 0 or 1".into()));
                }
                let bools = rows.iter().map(|r| r.iter().map(|v| *v == 1).collect()).collect();
                let m = IncidenceMatrix::from_matrix(bools).map_err(|e| CliError::Config(e.to_string()))?;
                ShiftSpace::new(Some(rows.len()), m)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BuiltinSystem {
    Gauss,
    BackwardCf,
    MannevillePomeau {
        alpha: f64,
    },
    Luroth,
    /// Increasing affine branches onto `[offset, offset + slope]`; offsets
    /// default to consecutive placement from 0.
    Affine {
        slopes: Vec<f64>,
        #[serde(default)]
        offsets: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Affine,
    Moebius,
    MpBranch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub kind: MapKind,
    pub params: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSystem {
    pub vertices: Vec<[f64; 2]>,
    pub edges: Vec<EdgeSpec>,
    /// Labels of parabolic edges.
    #[serde(default)]
    pub parabolic: Vec<String>,
    /// Forbidden transitions as label pairs.
    #[serde(default)]
    pub forbidden: Vec<[String; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineParams {
    slope: f64,
    offset: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MoebiusParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MpParams {
    alpha: f64,
    right: bool,
}

fn params<T: serde::de::DeserializeOwned>(edge: &EdgeSpec) -> Result<T, CliError> {
    serde_json::from_value(edge.params.clone())
        .map_err(|e| CliError::Config(format!("edge {}: bad params: {e}", edge.label)))
}

/// A system given inline, by builtin name, or as a path to a JSON file
/// holding either form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Builtin(BuiltinSystem),
    Explicit(ExplicitSystem),
    File(PathBuf),
}

impl SystemSpec {
    /// Inline form with file references read (relative to `base`).
    pub fn resolve(&self, base: &Path) -> Result<SystemSpec, CliError> {
        match self {
            SystemSpec::File(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("cannot read system file {}: {e}", path.display())))?;
                let spec: SystemSpec = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("system file {}: {e}", path.display())))?;
                if matches!(spec, SystemSpec::File(_)) {
                    return Err(CliError::Config("system files cannot refer to other files".into()));
                }
                Ok(spec)
            }
            other => Ok(other.clone()),
        }
    }

    /// The system and the indices of its parabolic edges.
    pub fn build(&self) -> Result<(Gdms, Vec<usize>), CliError> {
        match self {
            SystemSpec::File(_) => Err(CliError::Config("unresolved system file reference".into())),
            SystemSpec::Builtin(b) => Ok(match b {
                BuiltinSystem::Gauss => (gdms::gauss_cf(), vec![]),
                BuiltinSystem::BackwardCf => (gdms::backward_cf().system().clone(), vec![0]),
                BuiltinSystem::MannevillePomeau { alpha } => {
                    (gdms::manneville_pomeau(*alpha)?.system().clone(), vec![0])
                }
                BuiltinSystem::Luroth => (gdms::luroth(), vec![]),
                BuiltinSystem::Affine { slopes, offsets } => {
                    let offsets = match offsets {
                        Some(o) if o.len() == slopes.len() => o.clone(),
                        Some(_) => return Err(CliError::Config("need one offset per slope".into())),
                        None => slopes
                            .iter()
                            .scan(0.0, |acc, s| {
                                let o = *acc;
                                *acc += s;
                                Some(o)
                            })
                            .collect(),
                    };
                    let branches = slopes
                        .iter()
                        .zip(&offsets)
                        .enumerate()
                        .map(|(e, (&s, &o))| Branch::new(e.to_string(), 0, 0, BranchMap::affine(s, o)))
                        .collect();
                    (Gdms::finite("affine", vec![Interval::unit()], branches)?, vec![])
                }
            }),
            SystemSpec::Explicit(x) => {
                let vertices = x.vertices.iter().map(|v| Interval::new(v[0], v[1])).collect();
                let mut branches = Vec::with_capacity(x.edges.len());
                for e in &x.edges {
                    let map = match e.kind {
                        MapKind::Affine => {
                            let p: AffineParams = params(e)?;
                            BranchMap::affine(p.slope, p.offset)
                        }
                        MapKind::Moebius => {
                            let p: MoebiusParams = params(e)?;
                            BranchMap::moebius(p.a, p.b, p.c, p.d)
                        }
                        MapKind::MpBranch => {
                            let p: MpParams = params(e)?;
                            BranchMap::MpBranch { alpha: p.alpha, right: p.right }
                        }
                    };
                    branches.push(Branch::new(e.label.clone(), e.source, e.target, map));
                }
                let index = |label: &str| {
                    x.edges
                        .iter()
                        .position(|e| e.label == label)
                        .ok_or_else(|| CliError::Config(format!("unknown edge label {label:?}")))
                };
                let forbidden: Vec<(usize, usize)> =
                    x.forbidden.iter().map(|[a, b]| Ok((index(a)?, index(b)?))).collect::<Result<_, CliError>>()?;
                let parabolic: Vec<usize> = x.parabolic.iter().map(|l| index(l)).collect::<Result<_, _>>()?;
                let s = Gdms::finite("explicit", vertices, branches)?.with_forbidden(forbidden);
                if !parabolic.is_empty() {
                    gdms::ParabolicSystem::new(s.clone(), &parabolic)?;
                }
                Ok((s, parabolic))
            }
        }
    }
}

/// Declarative potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant {
        value: f64,
    },
    /// `ψ(ω) = values[ω_0]`.
    Memory1Table {
        values: Vec<f64>,
    },
    /// `ψ(ω) = values[ω_0][ω_1]`.
    Memory2Table {
        values: Vec<Vec<f64>>,
    },
    /// `ψ(ω) = -s log(ω_0 + 1)` on a countable alphabet.
    PowerLaw {
        exponent: f64,
    },
    /// `t log|φ_{ω_0}'(π(σω))| + q(θ - P_θ)` of the configured system with
    /// `θ ≡ 0`.
    Geometric {
        t: f64,
        #[serde(default)]
        q: f64,
        #[serde(default = "one")]
        memory: usize,
    },
}

fn one() -> usize {
    1
}

impl PotentialSpec {
    pub fn build(&self, system: Option<&Gdms>, truncation: usize) -> Result<Potential, CliError> {
        Ok(match self {
            PotentialSpec::Constant { value } => Potential::constant(*value),
            PotentialSpec::Memory1Table { values } => Potential::letter_table(values.clone()),
            PotentialSpec::Memory2Table { values } => {
                let k = values.len();
                if values.iter().any(|r| r.len() != k) {
                    return Err(CliError::Config("memory2-table must be square".into()));
                }
                Potential::pair_table(values.clone())
            }
            PotentialSpec::PowerLaw { exponent } => {
                let s = *exponent;
                Potential::from_fn(1, move |w| -s * ((w[0] + 1) as f64).ln())
            }
            PotentialSpec::Geometric { t, q, memory } => {
                let system = system.ok_or_else(|| CliError::Config("a geometric potential needs a system".into()))?;
                if *memory == 0 {
                    return Err(CliError::Config("memory must be at least 1".into()));
                }
                gdms::geometric_potential(system, *t, *q, None, 0.0, *memory, truncation)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureConfig {
    pub shift: Option<ShiftSpec>,
    pub system: Option<SystemSpec>,
    pub potential: PotentialSpec,
    pub n_max: usize,
    pub truncation: usize,
    /// Truncation sizes for the sweep table; empty skips it.
    pub sweep: Vec<usize>,
    pub sweep_tolerance: f64,
    pub summability_tolerance: f64,
    pub seed: u64,
}

impl Default for PressureConfig {
    fn default() -> Self {
        Self {
            shift: None,
            system: None,
            potential: PotentialSpec::Constant { value: 0.0 },
            n_max: 12,
            truncation: 4096,
            sweep: Vec::new(),
            sweep_tolerance: 1e-6,
            summability_tolerance: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub sample_size: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { n_min: 1, n_max: 12, sample_size: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsConfig {
    pub shift: Option<ShiftSpec>,
    pub system: Option<SystemSpec>,
    pub potential: PotentialSpec,
    /// Potential audited against the measure; defaults to `potential`.
    pub audit_potential: Option<PotentialSpec>,
    pub truncation: usize,
    pub audit: Option<AuditConfig>,
    pub export: bool,
    pub seed: u64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            shift: None,
            system: None,
            potential: PotentialSpec::Constant { value: 0.0 },
            audit_potential: None,
            truncation: 64,
            audit: Some(AuditConfig::default()),
            export: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaConfig {
    pub beta: BetaValue,
    /// Digits of 1 computed.
    pub depth: usize,
    /// Cells listed in the partition table.
    pub cells: usize,
    pub identity_samples: usize,
    pub seed: u64,
}

impl Default for BetaConfig {
    fn default() -> Self {
        Self { beta: BetaValue::Golden, depth: 1024, cells: 16, identity_samples: 10_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovConfig {
    pub steps: usize,
    pub orbits: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self { steps: 1_000_000, orbits: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlsRunConfig {
    pub beta: BetaValue,
    pub weighting: CellWeighting,
    pub cells: usize,
    pub lyapunov: LyapunovConfig,
    pub conditional: bool,
    pub global: bool,
    pub checks: DimensionCheckParams,
}

impl Default for GlsRunConfig {
    fn default() -> Self {
        Self {
            beta: BetaValue::Golden,
            weighting: CellWeighting::Parry,
            cells: thermoform::dimension::DEFAULT_CELLS,
            lyapunov: LyapunovConfig::default(),
            conditional: true,
            global: true,
            checks: DimensionCheckParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureConfig {
    pub system: SystemSpec,
    /// Letter-table weights `θ` and their pressure `P_θ`.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub theta_pressure: f64,
    #[serde(default = "default_q")]
    pub q: Vec<f64>,
    #[serde(default)]
    pub bracket: Option<[f64; 2]>,
    #[serde(default)]
    pub settings: PressureSettings,
}

fn default_q() -> Vec<f64> {
    vec![0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionConfig {
    pub gls: Option<GlsRunConfig>,
    pub temperature: Option<TemperatureConfig>,
    pub seed: u64,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        Self { gls: Some(GlsRunConfig::default()), temperature: None, seed: 0 }
    }
}

/// Parse a config file body, reporting schema violations as config errors.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Shift space from an explicit shift entry, else from the system.
pub fn resolve_space(shift: Option<&ShiftSpec>, system: Option<&Gdms>) -> Result<ShiftSpace, CliError> {
    match (shift, system) {
        (Some(s), _) => s.build(),
        (None, Some(g)) => Ok(g.shift_space()),
        (None, None) => Err(CliError::Config("need a shift or a system".into())),
    }
}
