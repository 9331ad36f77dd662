//! JSON scenario files: named curves, coverings, bundles, local fields and
//! spectral data, plus an optional property check to replay.
//!
//! Rationals are strings `"p/q"`, Gaussian rationals `"p/q+r/s i"`.
//!
//! ```json
//! {
//!   "curves": { "X": { "genus": 0, "points": ["p", "q"] },
//!               "Z": { "genus": 0, "points": ["a", "b"] } },
//!   "coverings": { "phi": { "source": "X", "target": "Z", "degree": 2,
//!                           "points": { "p": { "target": "a", "multiplicity": 2 },
//!                                       "q": { "target": "b", "multiplicity": 2 } } } },
//!   "bundles": { "O": { "curve": "X", "lines": [ { "degree": 0 } ] } }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curve::{CoveringMap, MarkedCurve, Point, Preimage};
use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::matrix::Matrix;
use crate::naht::SpectralPoint;
use crate::parabolic::{Flag, FlagStep, ParaLine, ParabolicChar, SplitParabolicBundle, Weight};
use crate::rational::{format_rational, parse_rational};
use crate::spectral::{FieldKind, LocalSpectralField};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub curves: BTreeMap<String, CurveSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coverings: BTreeMap<String, CoveringSpec>,
    /// Covering profiles loaded without validation (validator test cases).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub profiles: BTreeMap<String, CoveringSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bundles: BTreeMap<String, BundleSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spectral: BTreeMap<String, FieldSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spectra: BTreeMap<String, SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub genus: u32,
    #[serde(default)]
    pub points: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringSpec {
    pub source: String,
    pub target: String,
    pub degree: u32,
    #[serde(default)]
    pub points: BTreeMap<String, Preimage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub curve: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lines: Option<Vec<LineSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char: Option<CharSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub degree: i64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharSpec {
    pub rank: usize,
    pub degree: i64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub order: u32,
    /// `(weight, multiplicity)` steps in increasing weight.
    pub flag: Vec<(String, usize)>,
    /// `A_{-1}, A_0, ...`, each a row-major array of entries.
    pub coeffs: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub kind: FieldKind,
    pub points: Vec<SpectralPointSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralPointSpec {
    pub jump: String,
    pub eigenvalue: String,
    #[serde(default = "default_multiplicity")]
    pub multiplicity: u32,
}

fn default_multiplicity() -> u32 {
    1
}

/// A property to re-evaluate on the scenario's objects (see
/// [`crate::verify::evaluate`]).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub property: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bundles: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Local multiplicities paired with `spectra`, for direct images.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub multiplicities: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bundle {
    Split(SplitParabolicBundle),
    Char(ParabolicChar),
}

impl Bundle {
    pub fn char(&self) -> ParabolicChar {
        match self {
            Bundle::Split(e) => e.char(),
            Bundle::Char(c) => c.clone(),
        }
    }

    pub fn curve(&self) -> &MarkedCurve {
        match self {
            Bundle::Split(e) => e.curve(),
            Bundle::Char(c) => c.curve(),
        }
    }
}

/// A parsed and fully validated scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub curves: BTreeMap<String, MarkedCurve>,
    pub coverings: BTreeMap<String, CoveringMap>,
    pub profiles: BTreeMap<String, CoveringMap>,
    pub bundles: BTreeMap<String, Bundle>,
    pub spectral: BTreeMap<String, LocalSpectralField>,
    pub spectra: BTreeMap<String, Vec<SpectralPoint>>,
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::UnknownName {
        kind: kind.to_owned(),
        name: name.to_owned(),
    }
}

fn invalid(locus: &str, err: impl std::fmt::Display) -> Error {
    Error::Validation(format!("{locus}: {err}"))
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse(format!(
                "line {} column {} at `{}`: {}",
                inner.line(),
                inner.column(),
                path,
                inner
            ))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn add_curve(&mut self, name: &str, curve: &MarkedCurve) {
        self.curves.insert(
            name.to_owned(),
            CurveSpec {
                genus: curve.genus(),
                points: curve.points().iter().map(|p| p.0.clone()).collect(),
            },
        );
    }

    fn covering_spec(source: &str, target: &str, f: &CoveringMap) -> CoveringSpec {
        CoveringSpec {
            source: source.to_owned(),
            target: target.to_owned(),
            degree: f.degree(),
            points: f
                .point_map()
                .iter()
                .map(|(p, pre)| (p.0.clone(), pre.clone()))
                .collect(),
        }
    }

    /// Adds a covering between two curves already registered by name.
    pub fn add_covering(&mut self, name: &str, source: &str, target: &str, f: &CoveringMap) {
        self.coverings
            .insert(name.to_owned(), Self::covering_spec(source, target, f));
    }

    pub fn add_profile(&mut self, name: &str, source: &str, target: &str, f: &CoveringMap) {
        self.profiles
            .insert(name.to_owned(), Self::covering_spec(source, target, f));
    }

    pub fn add_split(&mut self, name: &str, curve: &str, e: &SplitParabolicBundle) {
        let lines = e
            .summands()
            .iter()
            .map(|l| LineSpec {
                degree: l.degree(),
                weights: l
                    .weights()
                    .iter()
                    .map(|(p, w)| (p.0.clone(), w.to_string()))
                    .collect(),
            })
            .collect();
        self.bundles.insert(
            name.to_owned(),
            BundleSpec {
                curve: curve.to_owned(),
                lines: Some(lines),
                char: None,
            },
        );
    }

    pub fn add_char(&mut self, name: &str, curve: &str, c: &ParabolicChar) {
        let spec = CharSpec {
            rank: c.rank(),
            degree: c.degree(),
            weights: c
                .weights()
                .iter()
                .map(|(p, ws)| (p.0.clone(), ws.iter().map(ToString::to_string).collect()))
                .collect(),
        };
        self.bundles.insert(
            name.to_owned(),
            BundleSpec {
                curve: curve.to_owned(),
                lines: None,
                char: Some(spec),
            },
        );
    }

    pub fn add_field(&mut self, name: &str, field: &LocalSpectralField) {
        let spec = FieldSpec {
            kind: field.kind(),
            order: field.order(),
            flag: field
                .flag()
                .steps()
                .iter()
                .map(|s| (s.weight.to_string(), s.multiplicity))
                .collect(),
            coeffs: field
                .coeffs()
                .iter()
                .map(|a| {
                    a.rows()
                        .iter()
                        .map(|row| row.iter().map(ToString::to_string).collect())
                        .collect()
                })
                .collect(),
        };
        self.spectral.insert(name.to_owned(), spec);
    }

    pub fn add_spectrum(&mut self, name: &str, kind: FieldKind, pts: &[SpectralPoint]) {
        let spec = SpectrumSpec {
            kind,
            points: pts
                .iter()
                .map(|p| SpectralPointSpec {
                    jump: format_rational(&p.jump),
                    eigenvalue: p.eigenvalue.to_string(),
                    multiplicity: p.multiplicity,
                })
                .collect(),
        };
        self.spectra.insert(name.to_owned(), spec);
    }
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::resolve(ScenarioFile::from_json(text)?)
    }

    /// Builds and validates every object, resolving names.
    pub fn resolve(file: ScenarioFile) -> Result<Self> {
        let mut curves = BTreeMap::new();
        for (name, spec) in &file.curves {
            let curve = MarkedCurve::new(spec.genus, spec.points.iter().map(Point::new))
                .map_err(|e| invalid(&format!("curves.{name}"), e))?;
            curves.insert(name.clone(), curve);
        }
        let curve_ref = |locus: &str, name: &str| -> Result<MarkedCurve> {
            curves
                .get(name)
                .cloned()
                .ok_or_else(|| invalid(locus, format!("unknown curve `{name}`")))
        };

        let build_covering = |locus: &str, spec: &CoveringSpec| -> Result<CoveringMap> {
            let source = curve_ref(&format!("{locus}.source"), &spec.source)?;
            let target = curve_ref(&format!("{locus}.target"), &spec.target)?;
            let map = spec
                .points
                .iter()
                .map(|(p, pre)| (Point::new(p), pre.clone()))
                .collect();
            Ok(CoveringMap::unchecked(source, target, spec.degree, map))
        };

        let mut coverings = BTreeMap::new();
        for (name, spec) in &file.coverings {
            let locus = format!("coverings.{name}");
            let f = build_covering(&locus, spec)?;
            f.validate().map_err(|v| invalid(&locus, v))?;
            coverings.insert(name.clone(), f);
        }
        let mut profiles = BTreeMap::new();
        for (name, spec) in &file.profiles {
            profiles.insert(
                name.clone(),
                build_covering(&format!("profiles.{name}"), spec)?,
            );
        }

        let mut bundles = BTreeMap::new();
        for (name, spec) in &file.bundles {
            let locus = format!("bundles.{name}");
            let curve = curve_ref(&format!("{locus}.curve"), &spec.curve)?;
            let bundle = match (&spec.lines, &spec.char) {
                (Some(lines), None) => Bundle::Split(build_split(&locus, &curve, lines)?),
                (None, Some(c)) => Bundle::Char(build_char(&locus, &curve, c)?),
                _ => {
                    return Err(invalid(
                        &locus,
                        "exactly one of `lines` or `char` is required",
                    ));
                }
            };
            bundles.insert(name.clone(), bundle);
        }

        let mut spectral = BTreeMap::new();
        for (name, spec) in &file.spectral {
            let locus = format!("spectral.{name}");
            spectral.insert(name.clone(), build_field(&locus, spec)?);
        }

        let mut spectra = BTreeMap::new();
        for (name, spec) in &file.spectra {
            let locus = format!("spectra.{name}");
            let pts = spec
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let locus = format!("{locus}.points[{i}]");
                    let jump = parse_rational(&p.jump).map_err(|e| invalid(&locus, e))?;
                    let eig =
                        GaussianRational::parse(&p.eigenvalue).map_err(|e| invalid(&locus, e))?;
                    SpectralPoint::new(spec.kind, jump, eig, p.multiplicity)
                        .map_err(|e| invalid(&locus, e))
                })
                .collect::<Result<Vec<_>>>()?;
            spectra.insert(name.clone(), pts);
        }

        Ok(Self {
            file,
            curves,
            coverings,
            profiles,
            bundles,
            spectral,
            spectra,
        })
    }

    pub fn covering(&self, name: &str) -> Result<&CoveringMap> {
        self.coverings
            .get(name)
            .ok_or_else(|| unknown("covering", name))
    }

    pub fn bundle(&self, name: &str) -> Result<&Bundle> {
        self.bundles
            .get(name)
            .ok_or_else(|| unknown("bundle", name))
    }

    pub fn field(&self, name: &str) -> Result<&LocalSpectralField> {
        self.spectral
            .get(name)
            .ok_or_else(|| unknown("spectral field", name))
    }

    pub fn profile(&self, name: &str) -> Result<&CoveringMap> {
        self.profiles
            .get(name)
            .ok_or_else(|| unknown("profile", name))
    }

    /// Names of the source and target curves of a covering.
    pub fn covering_curves(&self, name: &str) -> Result<(&str, &str)> {
        let spec = self
            .file
            .coverings
            .get(name)
            .ok_or_else(|| unknown("covering", name))?;
        Ok((&spec.source, &spec.target))
    }

    /// Name of the curve a bundle lives on.
    pub fn bundle_curve(&self, name: &str) -> Result<&str> {
        let spec = self
            .file
            .bundles
            .get(name)
            .ok_or_else(|| unknown("bundle", name))?;
        Ok(&spec.curve)
    }

    pub fn spectrum(&self, name: &str) -> Result<&[SpectralPoint]> {
        self.spectra
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| unknown("spectrum", name))
    }
}

fn parse_weight(locus: &str, text: &str) -> Result<Weight> {
    let q = parse_rational(text).map_err(|e| invalid(locus, e))?;
    Weight::new(q).map_err(|e| invalid(locus, e))
}

fn build_split(
    locus: &str,
    curve: &MarkedCurve,
    lines: &[LineSpec],
) -> Result<SplitParabolicBundle> {
    let summands = lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let locus = format!("{locus}.lines[{i}]");
            let weights = l
                .weights
                .iter()
                .map(|(p, w)| {
                    Ok((
                        Point::new(p),
                        parse_weight(&format!("{locus}.weights.{p}"), w)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            ParaLine::new(curve.clone(), l.degree, weights).map_err(|e| invalid(&locus, e))
        })
        .collect::<Result<Vec<_>>>()?;
    SplitParabolicBundle::new(summands).map_err(|e| invalid(locus, e))
}

fn build_char(locus: &str, curve: &MarkedCurve, spec: &CharSpec) -> Result<ParabolicChar> {
    let weights = spec
        .weights
        .iter()
        .map(|(p, ws)| {
            let locus = format!("{locus}.char.weights.{p}");
            let ws = ws
                .iter()
                .map(|w| parse_weight(&locus, w))
                .collect::<Result<Vec<_>>>()?;
            Ok((Point::new(p), ws))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    ParabolicChar::from_parts(curve.clone(), spec.rank, spec.degree, weights)
        .map_err(|e| invalid(&format!("{locus}.char"), e))
}

fn build_field(locus: &str, spec: &FieldSpec) -> Result<LocalSpectralField> {
    let steps = spec
        .flag
        .iter()
        .map(|(w, multiplicity)| {
            Ok(FlagStep {
                weight: parse_weight(&format!("{locus}.flag"), w)?,
                multiplicity: *multiplicity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let flag = Flag::new(steps).map_err(|e| invalid(&format!("{locus}.flag"), e))?;
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, rows)| {
            let locus = format!("{locus}.coeffs[{k}]");
            let rows = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| GaussianRational::parse(v).map_err(|e| invalid(&locus, e)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Matrix::from_rows(rows).map_err(|e| invalid(&locus, e))
        })
        .collect::<Result<Vec<_>>>()?;
    LocalSpectralField::new(spec.kind, spec.order, coeffs, flag).map_err(|e| invalid(locus, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOUBLE_COVER: &str = r#"{
        "curves": {
            "X": { "genus": 0, "points": ["p", "q"] },
            "Z": { "genus": 0, "points": ["a", "b"] }
        },
        "coverings": {
            "phi": { "source": "X", "target": "Z", "degree": 2,
                     "points": { "p": { "target": "a", "multiplicity": 2 },
                                 "q": { "target": "b", "multiplicity": 2 } } }
        },
        "bundles": {
            "O": { "curve": "X", "lines": [ { "degree": 0 } ] },
            "C": { "curve": "Z", "char": { "rank": 2, "degree": -1,
                                           "weights": { "a": ["0", "1/2"] } } }
        },
        "spectral": {
            "F": { "kind": "connection", "order": 2, "flag": [["1/2", 1]],
                   "coeffs": [[["1/2+1 i"]], [["3"]]] }
        },
        "spectra": {
            "P": { "kind": "higgs", "points": [ { "jump": "1/2", "eigenvalue": "1/4+1 i" } ] }
        }
    }"#;

    #[test]
    fn minimal_file() {
        let s = Scenario::from_json(r#"{ "curves": { "X": { "genus": 2 } } }"#).unwrap();
        assert_eq!(s.curves.len(), 1);
        assert_eq!(s.curves["X"].genus(), 2);
    }

    #[test]
    fn full_file_resolves_and_round_trips() {
        let s = Scenario::from_json(DOUBLE_COVER).unwrap();
        assert_eq!(s.covering("phi").unwrap().degree(), 2);
        assert!(matches!(s.bundle("O").unwrap(), Bundle::Split(_)));
        assert_eq!(s.field("F").unwrap().order(), 2);
        assert_eq!(s.spectrum("P").unwrap().len(), 1);

        let again = Scenario::from_json(&s.file.to_json()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn out_of_range_weight_is_a_validation_error() {
        let text = r#"{ "curves": { "X": { "genus": 0, "points": ["x"] } },
                        "bundles": { "L": { "curve": "X",
                                            "lines": [ { "degree": 0, "weights": { "x": "3/2" } } ] } } }"#;
        let err = Scenario::from_json(text).unwrap_err();
        assert!(
            matches!(&err, Error::Validation(m) if m.contains("bundles.L.lines[0].weights.x")),
            "{err}"
        );
    }

    #[test]
    fn riemann_hurwitz_violation_names_clause() {
        let text = r#"{ "curves": { "X": { "genus": 0 }, "Z": { "genus": 0 } },
                        "coverings": { "f": { "source": "X", "target": "Z", "degree": 2,
                                              "points": { "p": { "target": "a", "multiplicity": 2 } } } } }"#;
        let err = Scenario::from_json(text).unwrap_err();
        assert!(
            matches!(&err, Error::Validation(m) if m.contains("Riemann–Hurwitz")),
            "{err}"
        );
    }

    #[test]
    fn parse_errors_carry_locus() {
        let err = Scenario::from_json(r#"{ "curves": { "X": { "genus": "zero" } } }"#).unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("curves.X.genus") && m.contains("line 1")),
            "{err}"
        );
        let err = Scenario::from_json(r#"{ "curvez": {} }"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn unknown_references_rejected() {
        let text =
            r#"{ "bundles": { "L": { "curve": "nowhere", "lines": [ { "degree": 0 } ] } } }"#;
        assert!(matches!(
            Scenario::from_json(text),
            Err(Error::Validation(_))
        ));
    }
}
