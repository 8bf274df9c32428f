//! Flat `key = value` run configuration.
//!
//! `#` starts a comment. Unknown and repeated keys are rejected. Every key
//! except `domain` has a default; `domain` may instead come from the
//! command line.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `domain` | (required) | preset name or polygon file |
//! | `mesh` | none | mesh file to solve on (overrides `domain`/`level`) |
//! | `level` | `0` | refinement level for `mesh` and `solve` |
//! | `levels` | `2..5` | level range for `study` |
//! | `nonlinearity` | `power_law` | `power_law` or `zero` |
//! | `scale` | `1` | power-law factor |
//! | `exponent` | `1` | power-law exponent in (0, 1], `a/b` allowed |
//! | `shift` | `0` | constant shift ψ |
//! | `weight` | `1` | constant weight φ ≥ 0 |
//! | `cut_M` | none | clamp the nonlinearity to `[-M, M]` |
//! | `rhs` | `constant 1` | `constant <c>` or `manufactured` |
//! | `reference` | `fine+2` | `exact` or `fine+<k>` |
//! | `residual_tol` | `1e-10` | Newton tolerance |
//! | `max_newton` | `50` | Newton iteration cap |
//! | `slope_floor` | `1e-6` | slope floor ρ |
//! | `cg_tol` | `1e-12` | inner CG tolerance |
//! | `continuation_sigma0` | `0` | initial mass shift of the fallback |
//! | `output` | per command | output path |

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

use crate::analysis::{sine_product_rhs, Reference, SineProduct, SourceFn};
use crate::mesh::{DomainPreset, Polygon};
use crate::nonlinearity::{cut, Nonlinearity, NonlinearityError, PowerLaw, Zero};
use crate::solver::SolverConfig;

pub const KEYS: [&str; 18] = [
    "domain",
    "mesh",
    "level",
    "levels",
    "nonlinearity",
    "scale",
    "exponent",
    "shift",
    "weight",
    "cut_M",
    "rhs",
    "reference",
    "residual_tol",
    "max_newton",
    "slope_floor",
    "cg_tol",
    "continuation_sigma0",
    "output",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected 'key = value'")]
    Syntax { line: usize },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key '{0}'")]
    MissingKey(&'static str),
    #[error("invalid value '{value}' for '{key}': {reason}")]
    Invalid { key: String, value: String, reason: String },
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), value: value.into(), reason: reason.into() }
}

/// Where the computational domain comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Preset(DomainPreset),
    PolygonFile(PathBuf),
}

impl DomainSpec {
    pub fn parse(s: &str) -> Self {
        DomainPreset::from_name(s).map_or_else(|| DomainSpec::PolygonFile(PathBuf::from(s)), DomainSpec::Preset)
    }

    pub fn name(&self) -> String {
        match self {
            DomainSpec::Preset(p) => p.name().to_string(),
            DomainSpec::PolygonFile(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    PowerLaw,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub scale: f64,
    pub exponent: f64,
    pub shift: f64,
    pub weight: f64,
    pub cut_m: Option<f64>,
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        Self { kind: NonlinearityKind::PowerLaw, scale: 1.0, exponent: 1.0, shift: 0.0, weight: 1.0, cut_m: None }
    }
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Arc<dyn Nonlinearity>, ConfigError> {
        let base: Arc<dyn Nonlinearity> = match self.kind {
            NonlinearityKind::Zero => Arc::new(Zero),
            NonlinearityKind::PowerLaw => Arc::new(
                PowerLaw::new(self.scale, self.exponent)?.with_shift(self.shift)?.with_weight(self.weight)?,
            ),
        };
        Ok(match self.cut_m {
            Some(m) => Arc::new(cut(base, m)?),
            None => base,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsSpec {
    Constant(f64),
    /// Source making `sin(πx) sin(πy)` the exact solution on the unit square.
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSpec {
    Exact,
    Fine(usize),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: Option<DomainSpec>,
    pub mesh: Option<PathBuf>,
    pub level: usize,
    pub levels: RangeInclusive<usize>,
    pub nonlinearity: NonlinearitySpec,
    pub rhs: RhsSpec,
    pub reference: ReferenceSpec,
    pub solver: SolverConfig,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: None,
            mesh: None,
            level: 0,
            levels: 2..=5,
            nonlinearity: NonlinearitySpec::default(),
            rhs: RhsSpec::Constant(1.0),
            reference: ReferenceSpec::Fine(2),
            solver: SolverConfig::default(),
            output: None,
        }
    }
}

/// Parses a real, also accepting `a/b`.
pub fn parse_real(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = match value.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| invalid(key, value, "not a number"))?;
            let b: f64 = b.trim().parse().map_err(|_| invalid(key, value, "not a number"))?;
            a / b
        }
        None => value.parse().map_err(|_| invalid(key, value, "not a number"))?,
    };
    if !v.is_finite() {
        return Err(invalid(key, value, "not finite"));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| invalid(key, value, "not a non-negative integer"))
}

/// Parses `a..b` (inclusive).
pub fn parse_levels(value: &str) -> Result<RangeInclusive<usize>, ConfigError> {
    let (a, b) = value.split_once("..").ok_or_else(|| invalid("levels", value, "expected 'min..max'"))?;
    let a = parse_usize("levels", a.trim())?;
    let b = parse_usize("levels", b.trim())?;
    if a > b {
        return Err(invalid("levels", value, "min exceeds max"));
    }
    Ok(a..=b)
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<&str, String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            };
            if entries.insert(known, value.to_string()).is_some() {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
        }
        let mut cfg = RunConfig::default();
        for (key, value) in &entries {
            cfg.set(key, value)?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Sets one key; used both by the file parser and command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "domain" => self.domain = Some(DomainSpec::parse(value)),
            "mesh" => self.mesh = Some(PathBuf::from(value)),
            "level" => self.level = parse_usize(key, value)?,
            "levels" => self.levels = parse_levels(value)?,
            "nonlinearity" => {
                self.nonlinearity.kind = match value {
                    "power_law" => NonlinearityKind::PowerLaw,
                    "zero" => NonlinearityKind::Zero,
                    _ => return Err(invalid(key, value, "expected 'power_law' or 'zero'")),
                }
            }
            "scale" => self.nonlinearity.scale = parse_real(key, value)?,
            "exponent" => self.nonlinearity.exponent = parse_real(key, value)?,
            "shift" => self.nonlinearity.shift = parse_real(key, value)?,
            "weight" => self.nonlinearity.weight = parse_real(key, value)?,
            "cut_M" => self.nonlinearity.cut_m = Some(parse_real(key, value)?),
            "rhs" => {
                self.rhs = if value == "manufactured" {
                    RhsSpec::Manufactured
                } else if let Some(c) = value.strip_prefix("constant") {
                    RhsSpec::Constant(parse_real(key, c.trim())?)
                } else {
                    return Err(invalid(key, value, "expected 'constant <c>' or 'manufactured'"));
                }
            }
            "reference" => {
                self.reference = if value == "exact" {
                    ReferenceSpec::Exact
                } else if let Some(k) = value.strip_prefix("fine+") {
                    let k = parse_usize(key, k)?;
                    if k < 1 {
                        return Err(invalid(key, value, "fine+k needs k >= 1"));
                    }
                    ReferenceSpec::Fine(k)
                } else {
                    return Err(invalid(key, value, "expected 'exact' or 'fine+<k>'"));
                }
            }
            "residual_tol" => self.solver.residual_tol = parse_real(key, value)?,
            "max_newton" => self.solver.max_newton = parse_usize(key, value)?,
            "slope_floor" => self.solver.slope_floor = parse_real(key, value)?,
            "cg_tol" => self.solver.cg_tol = parse_real(key, value)?,
            "continuation_sigma0" => self.solver.continuation_sigma0 = parse_real(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(ConfigError::UnknownKey { line: 0, key: key.to_string() }),
        }
        Ok(())
    }

    /// Cross-key consistency.
    pub fn check(&self) -> Result<(), ConfigError> {
        self.nonlinearity.build()?;
        self.solver
            .validate()
            .map_err(|e| invalid("solver", "", e.to_string()))?;
        if self.reference == ReferenceSpec::Exact && self.rhs != RhsSpec::Manufactured {
            return Err(invalid("reference", "exact", "an exact reference needs rhs = manufactured"));
        }
        if self.rhs == RhsSpec::Manufactured {
            if let Some(DomainSpec::PolygonFile(_)) | Some(DomainSpec::Preset(DomainPreset::UnitTriangle | DomainPreset::Pentagon)) = &self.domain {
                return Err(invalid("rhs", "manufactured", "the manufactured solution lives on the unit square"));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<&DomainSpec, ConfigError> {
        self.domain.as_ref().ok_or(ConfigError::MissingKey("domain"))
    }

    pub fn load_polygon(&self) -> Result<Polygon, crate::io::IoError> {
        match self.domain.as_ref().expect("domain checked by caller") {
            DomainSpec::Preset(p) => Ok(p.polygon()),
            DomainSpec::PolygonFile(path) => {
                let f = std::fs::File::open(path)?;
                crate::io::read_polygon(std::io::BufReader::new(f))
            }
        }
    }

    /// Source term for the configured right-hand side.
    pub fn source(&self, d: &Arc<dyn Nonlinearity>) -> SourceFn {
        match self.rhs {
            RhsSpec::Constant(c) => Arc::new(move |_| c),
            RhsSpec::Manufactured => {
                let d = Arc::clone(d);
                Arc::new(move |x| sine_product_rhs(&*d, x))
            }
        }
    }

    pub fn study_reference(&self) -> Reference {
        match self.reference {
            ReferenceSpec::Exact => Reference::Exact(Arc::new(SineProduct)),
            ReferenceSpec::Fine(k) => Reference::FineGrid { extra_refinements: k },
        }
    }
}
