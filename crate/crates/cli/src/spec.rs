//! Experiment spec files: JSON, `schema: 1`, unknown keys rejected.

use std::str::FromStr;

use num_complex::Complex64;
use qpse_core::factory::{random_hermite_superposition, EnergyBranch, SpinorPacketSpec, StateSpec};
use qpse_core::grid::{Axis, GridSpec};
use qpse_core::spin::{SpinSpec, SpinValue};
use qpse_core::transform::{TransformKind, TransformSpec};
use qpse_core::{EvolutionSpec, Potential};
use rand::Rng;
use serde::Deserialize;

pub const DEFAULT_PRECISION: usize = 10;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[allow(dead_code)]
    pub schema: Schema,
    #[serde(default)]
    pub seed: Option<u64>,
    pub grid: GridDto,
    pub state: StateDto,
    #[serde(default = "enabled")]
    pub entropy: bool,
    #[serde(default)]
    pub spin: Option<SpinDto>,
    #[serde(default)]
    pub transforms: Vec<TransformDto>,
    #[serde(default)]
    pub evolution: Option<EvolutionDto>,
    #[serde(default)]
    pub outputs: OutputsDto,
}

fn enabled() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(try_from = "u64")]
pub struct Schema;

impl TryFrom<u64> for Schema {
    type Error = String;
    fn try_from(v: u64) -> Result<Self, String> {
        if v == 1 {
            Ok(Schema)
        } else {
            Err(format!("unsupported schema version {v} (expected 1)"))
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn expand(&self, dim: usize, what: &str) -> Result<Vec<T>, String> {
        match self {
            OneOrMany::One(v) => Ok(vec![v.clone(); dim]),
            OneOrMany::Many(v) if v.len() == dim => Ok(v.clone()),
            OneOrMany::Many(v) => Err(format!(
                "{what} has {} entries but the grid has dimension {dim}",
                v.len()
            )),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    points: OneOrMany<usize>,
    #[serde(default)]
    extent: Option<OneOrMany<f64>>,
    #[serde(default)]
    spacing: Option<OneOrMany<f64>>,
    #[serde(default)]
    origin: Option<OneOrMany<f64>>,
}

/// Either `extent` (centered grid) or `spacing` with optional `origin`.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridDto(pub GridSpec);

impl TryFrom<RawGrid> for GridDto {
    type Error = String;
    fn try_from(raw: RawGrid) -> Result<Self, String> {
        if !(1..=3).contains(&raw.dim) {
            return Err(format!("grid dim must be 1, 2 or 3, got {}", raw.dim));
        }
        let points = raw.points.expand(raw.dim, "grid.points")?;
        let axes: Vec<Axis> = match (raw.extent, raw.spacing, raw.origin) {
            (Some(extent), None, None) => {
                let extent = extent.expand(raw.dim, "grid.extent")?;
                if extent.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
                    return Err("grid.extent must be positive".into());
                }
                points
                    .iter()
                    .zip(&extent)
                    .map(|(&n, &l)| Axis::centered(n, l))
                    .collect()
            }
            (None, Some(spacing), origin) => {
                let spacing = spacing.expand(raw.dim, "grid.spacing")?;
                let origin = match origin {
                    Some(o) => o.expand(raw.dim, "grid.origin")?,
                    None => points
                        .iter()
                        .zip(&spacing)
                        .map(|(&n, &h)| -(n as f64) / 2.0 * h)
                        .collect(),
                };
                points
                    .iter()
                    .zip(spacing.iter().zip(&origin))
                    .map(|(&n, (&h, &o))| Axis {
                        points: n,
                        origin: o,
                        spacing: h,
                    })
                    .collect()
            }
            (Some(_), Some(_), _) => {
                return Err("grid takes either extent or spacing, not both".into())
            }
            (Some(_), None, Some(_)) => {
                return Err("grid.origin goes with spacing, not extent".into())
            }
            (None, None, _) => return Err("grid needs extent or spacing".into()),
        };
        GridSpec::new(axes).map(GridDto).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateDto {
    Gaussian {
        #[serde(default)]
        center: Option<OneOrMany<f64>>,
        sigma: OneOrMany<f64>,
        #[serde(default)]
        boost: Option<OneOrMany<f64>>,
    },
    Hermite {
        order: OneOrMany<u32>,
        sigma: f64,
    },
    Superposition {
        terms: Vec<TermDto>,
    },
    RandomSuperposition {
        terms: usize,
        max_order: u32,
        sigma: f64,
    },
    TwoParticleGaussian {
        sigma: f64,
        correlation: f64,
    },
    SpinorPacket {
        #[serde(default)]
        center: f64,
        sigma: f64,
        #[serde(default)]
        k0: f64,
        #[serde(default)]
        branch: BranchDto,
        #[serde(default = "spin_up_weight")]
        spin_up: [f64; 2],
        #[serde(default)]
        spin_down: [f64; 2],
        #[serde(default = "unit_mass")]
        mass: f64,
    },
}

fn spin_up_weight() -> [f64; 2] {
    [1.0, 0.0]
}

fn unit_mass() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDto {
    pub coefficient: [f64; 2],
    pub state: StateDto,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchDto {
    #[default]
    Positive,
    Negative,
}

impl StateDto {
    pub fn is_spinor(&self) -> bool {
        matches!(self, StateDto::SpinorPacket { .. })
    }

    /// Resolves broadcasting and draws random coefficients from `rng`.
    pub fn to_spec(&self, dim: usize, rng: &mut impl Rng) -> Result<StateSpec, String> {
        let zeros = OneOrMany::One(0.0);
        Ok(match self {
            StateDto::Gaussian {
                center,
                sigma,
                boost,
            } => StateSpec::Gaussian {
                center: center
                    .as_ref()
                    .unwrap_or(&zeros)
                    .expand(dim, "state.center")?,
                sigma: sigma.expand(dim, "state.sigma")?,
                boost: boost
                    .as_ref()
                    .unwrap_or(&zeros)
                    .expand(dim, "state.boost")?,
            },
            StateDto::Hermite { order, sigma } => StateSpec::Hermite {
                order: order.expand(dim, "state.order")?,
                sigma: *sigma,
            },
            StateDto::Superposition { terms } => {
                if terms.is_empty() {
                    return Err("superposition needs at least one term".into());
                }
                let mut out = Vec::with_capacity(terms.len());
                for t in terms {
                    if t.state.is_spinor()
                        || matches!(t.state, StateDto::TwoParticleGaussian { .. })
                    {
                        return Err(
                            "superposition terms must be scalar single-particle states".into()
                        );
                    }
                    out.push((
                        Complex64::new(t.coefficient[0], t.coefficient[1]),
                        t.state.to_spec(dim, rng)?,
                    ));
                }
                StateSpec::Superposition(out)
            }
            StateDto::RandomSuperposition {
                terms,
                max_order,
                sigma,
            } => {
                if dim != 1 {
                    return Err("random_superposition is one-dimensional".into());
                }
                random_hermite_superposition(rng, *terms, *max_order, *sigma)
                    .map_err(|e| e.to_string())?
            }
            StateDto::TwoParticleGaussian { sigma, correlation } => {
                if dim != 2 {
                    return Err(
                        "two_particle_gaussian needs a 2D grid (one axis per particle)".into(),
                    );
                }
                StateSpec::TwoParticleGaussian {
                    sigma: *sigma,
                    correlation: *correlation,
                }
            }
            StateDto::SpinorPacket {
                center,
                sigma,
                k0,
                branch,
                spin_up,
                spin_down,
                mass,
            } => {
                if dim != 1 {
                    return Err("spinor_packet needs a 1D grid".into());
                }
                StateSpec::SpinorPacket(SpinorPacketSpec {
                    center: *center,
                    sigma: *sigma,
                    k0: *k0,
                    branch: match branch {
                        BranchDto::Positive => EnergyBranch::Positive,
                        BranchDto::Negative => EnergyBranch::Negative,
                    },
                    spin_up: Complex64::new(spin_up[0], spin_up[1]),
                    spin_down: Complex64::new(spin_down[0], spin_down[1]),
                    mass: *mass,
                })
            }
        })
    }
}

/// `"0"`, `"1/2"`, or `{"theta": θ}` for an entangled pair.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawSpin")]
pub struct SpinDto(pub SpinSpec);

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSpin {
    Value(String),
    Pair(PairDto),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDto {
    theta: f64,
}

impl TryFrom<RawSpin> for SpinDto {
    type Error = String;
    fn try_from(raw: RawSpin) -> Result<Self, String> {
        match raw {
            RawSpin::Value(s) => {
                let value = SpinValue::from_str(&s).map_err(|e| e.to_string())?;
                if value.twice() > 1 {
                    return Err(format!("spin {value} is not supported (use 0 or 1/2)"));
                }
                Ok(SpinDto(SpinSpec::Single(value)))
            }
            RawSpin::Pair(p) if p.theta.is_finite() => {
                Ok(SpinDto(SpinSpec::entangled_pair(p.theta)))
            }
            RawSpin::Pair(_) => Err("spin.theta must be finite".into()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDto {
    pub kind: TransformKindDto,
    #[serde(default)]
    pub amount: f64,
    #[serde(default = "unit_mass")]
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKindDto {
    TranslateX,
    TranslateK,
    Dilate,
    Parity,
    Conjugate,
    LorentzBoostK,
}

impl TransformDto {
    pub fn to_spec(&self) -> TransformSpec {
        let kind = match self.kind {
            TransformKindDto::TranslateX => TransformKind::TranslateX,
            TransformKindDto::TranslateK => TransformKind::TranslateK,
            TransformKindDto::Dilate => TransformKind::Dilate,
            TransformKindDto::Parity => TransformKind::Parity,
            TransformKindDto::Conjugate => TransformKind::Conjugate,
            TransformKindDto::LorentzBoostK => TransformKind::LorentzBoostK,
        };
        TransformSpec {
            kind,
            amount: self.amount,
            mass: self.mass,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolution {
    #[serde(default)]
    potential: PotentialDto,
    #[serde(default)]
    omega: Option<f64>,
    dt: f64,
    #[serde(default)]
    steps: Option<usize>,
    #[serde(default)]
    horizon: Option<f64>,
    #[serde(default = "every_step")]
    record_every: usize,
}

fn every_step() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PotentialDto {
    #[default]
    Free,
    Harmonic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawEvolution")]
pub struct EvolutionDto(pub EvolutionSpec);

impl TryFrom<RawEvolution> for EvolutionDto {
    type Error = String;
    fn try_from(raw: RawEvolution) -> Result<Self, String> {
        let potential = match (raw.potential, raw.omega) {
            (PotentialDto::Free, None) => Potential::Free,
            (PotentialDto::Free, Some(_)) => {
                return Err("omega only applies to the harmonic potential".into())
            }
            (PotentialDto::Harmonic, Some(omega)) => Potential::Harmonic { omega },
            (PotentialDto::Harmonic, None) => return Err("harmonic potential needs omega".into()),
        };
        if !(raw.dt > 0.0) || !raw.dt.is_finite() {
            return Err(format!("evolution.dt must be positive, got {}", raw.dt));
        }
        let steps = match (raw.steps, raw.horizon) {
            (Some(n), None) => n,
            (None, Some(h)) => {
                let n = (h / raw.dt).round();
                if !(h >= 0.0) || !h.is_finite() || (n * raw.dt - h).abs() > 1e-9 * h.max(1.0) {
                    return Err(format!(
                        "evolution.horizon {h} is not a whole number of steps of {}",
                        raw.dt
                    ));
                }
                n as usize
            }
            (Some(_), Some(_)) => return Err("evolution takes steps or horizon, not both".into()),
            (None, None) => return Err("evolution needs steps or horizon".into()),
        };
        let spec = EvolutionSpec {
            potential,
            dt: raw.dt,
            steps,
            record_every: raw.record_every,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(EvolutionDto(spec))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsDto {
    #[serde(default)]
    pub json: Option<FileName>,
    #[serde(default)]
    pub csv: Option<FileName>,
    #[serde(default)]
    pub precision: Option<Precision>,
}

/// Bare file name inside the output directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "String")]
pub struct FileName(pub String);

impl TryFrom<String> for FileName {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        if s.is_empty() || s == "." || s == ".." || s.contains(['/', '\\']) {
            Err(format!("output name {s:?} must be a plain file name"))
        } else {
            Ok(FileName(s))
        }
    }
}

/// Significant digits for every number written, 6 to 17.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(try_from = "u64")]
pub struct Precision(pub usize);

impl TryFrom<u64> for Precision {
    type Error = String;
    fn try_from(v: u64) -> Result<Self, String> {
        if (6..=17).contains(&v) {
            Ok(Precision(v as usize))
        } else {
            Err(format!("precision must be between 6 and 17, got {v}"))
        }
    }
}

/// A validation failure anchored to a position in the spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub fn parse(text: &str) -> Result<SpecFile, Located> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        // Tagged enums are buffered, so serde reports their errors at the end
        // of the enclosing object; point at the offending key instead.
        let (line, column) = unknown_key(&message)
            .map(|key| locate(text, key))
            .filter(|&at| at != (1, 1))
            .unwrap_or((e.line().max(1), e.column().max(1)));
        Located {
            line,
            column,
            message,
        }
    })
}

fn unknown_key(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

/// Position of the first `"key":` in `text`, falling back to the start.
pub fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(i) = text[from..].find(&needle) {
        let at = from + i;
        let rest = text[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            let before = &text[..at];
            let line = before.matches('\n').count() + 1;
            let column = at - before.rfind('\n').map_or(0, |n| n + 1) + 1;
            return (line, column);
        }
        from = at + needle.len();
    }
    (1, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema": 1,
  "grid": {"dim": 1, "points": 256, "extent": 40},
  "state": {"kind": "gaussian", "sigma": 1}
}"#;

    #[test]
    fn minimal_spec_parses() {
        let spec = parse(MINIMAL).unwrap();
        assert_eq!(spec.grid.0.len(), 256);
        assert!(spec.entropy);
        assert!(spec.transforms.is_empty());
    }

    #[test]
    fn unknown_key_is_anchored() {
        let text = MINIMAL.replace("\"sigma\": 1", "\"sigma\": 1, \"width\": 2");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("width"), "{}", err.message);
    }

    #[test]
    fn schema_version_is_checked() {
        let err = parse(&MINIMAL.replace("\"schema\": 1", "\"schema\": 2")).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("schema"));
    }

    #[test]
    fn precision_range() {
        let text = MINIMAL.replace(
            "\"schema\": 1,",
            "\"schema\": 1,\n  \"outputs\": {\"precision\": 40},",
        );
        let err = parse(&text).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("precision"));
    }

    #[test]
    fn grid_forms() {
        let text = MINIMAL.replace("\"extent\": 40", "\"spacing\": 0.25");
        let grid = parse(&text).unwrap().grid.0;
        assert_eq!(grid.axis(0).origin, -32.0);
        assert!(
            parse(&MINIMAL.replace("\"extent\": 40", "\"extent\": 40, \"spacing\": 1")).is_err()
        );
        assert!(parse(&MINIMAL.replace("\"points\": 256", "\"points\": 100")).is_err());
    }

    #[test]
    fn evolution_horizon() {
        let text = MINIMAL.replace(
            "\"schema\": 1,",
            "\"schema\": 1, \"evolution\": {\"dt\": 0.01, \"horizon\": 2.0, \"record_every\": 10},",
        );
        let spec = parse(&text).unwrap();
        assert_eq!(spec.evolution.unwrap().0.steps, 200);
    }

    #[test]
    fn spin_forms() {
        let single =
            parse(&MINIMAL.replace("\"schema\": 1,", "\"schema\": 1, \"spin\": \"1/2\",")).unwrap();
        assert!(matches!(single.spin.unwrap().0, SpinSpec::Single(v) if v == SpinValue::HALF));
        let pair = parse(&MINIMAL.replace(
            "\"schema\": 1,",
            "\"schema\": 1, \"spin\": {\"theta\": 0.5},",
        ))
        .unwrap();
        assert!(matches!(
            pair.spin.unwrap().0,
            SpinSpec::EntangledPair { .. }
        ));
        assert!(
            parse(&MINIMAL.replace("\"schema\": 1,", "\"schema\": 1, \"spin\": \"1\",")).is_err()
        );
    }

    #[test]
    fn locate_finds_keys_not_values() {
        let text = "{\n  \"a\": \"state\",\n  \"state\": {}\n}";
        assert_eq!(locate(text, "state"), (3, 3));
        assert_eq!(locate(text, "missing"), (1, 1));
    }

    #[test]
    fn output_names_are_plain() {
        assert!(FileName::try_from("../x.json".to_string()).is_err());
        assert!(FileName::try_from("report.json".to_string()).is_ok());
    }
}
