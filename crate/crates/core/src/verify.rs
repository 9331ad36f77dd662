//! Randomized property verifier.
//!
//! Every trial generates a self-contained [`ScenarioFile`] whose `check`
//! section names the property and the objects it applies to; the trial then
//! loads that scenario and evaluates the property on it. A failing trial's
//! scenario is therefore a replayable counterexample.
//!
//! Trials draw from a ChaCha stream selected by (property, trial index), so a
//! report depends only on the seed and bounds, never on scheduling.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{CoveringMap, MarkedCurve, Point, Preimage, Violation};
use crate::error::{Error, Result};
use crate::functors::{
    direct_image_char, galois_orbit_sum, galois_pullback_of_direct_image, pullback_char,
    pullback_split,
};
use crate::gaussian::GaussianRational;
use crate::matrix::{Matrix, Polynomial};
use crate::naht::{
    canonical, conn_to_higgs, direct_image_spectrum, higgs_to_conn, is_residual_point,
    is_strongly_parabolic_point, pullback_spectrum, SpectralPoint,
};
use crate::parabolic::{Flag, FlagStep, ParaLine, ParabolicChar, SplitParabolicBundle, Weight};
use crate::rational::{floor_i64, int, rat, Rational};
use crate::scenario::{Bundle, CheckSpec, Scenario, ScenarioFile};
use crate::spectral::{
    check_parabolic, check_residual, check_strongly_parabolic, direct_image_residue_conn,
    direct_image_residue_higgs, hitchin_traces, pullback_residue_conn, pullback_residue_higgs,
    pullback_residue_higgs_flagged, triangular_eigenvalues, FieldKind, LocalSpectralField,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifierConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_rank: usize,
    pub max_degree: i64,
    pub max_multiplicity: u32,
    pub weight_denominator_bound: i64,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            max_rank: 3,
            max_degree: 3,
            max_multiplicity: 4,
            weight_denominator_bound: 6,
        }
    }
}

impl VerifierConfig {
    pub fn validate(&self) -> Result<()> {
        let bounds = [
            ("trials", self.trials as i64),
            ("max-rank", self.max_rank as i64),
            ("max-degree", self.max_degree),
            ("max-multiplicity", i64::from(self.max_multiplicity)),
            ("weight-denominator-bound", self.weight_denominator_bound),
        ];
        for (name, value) in bounds {
            if value < 1 {
                return Err(Error::InvalidValue(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

pub type CharOp = fn(&CoveringMap, &ParabolicChar) -> Result<ParabolicChar>;

/// The functor implementations a property run exercises. Swapping one out
/// lets a test check that the suite notices a broken implementation.
#[derive(Debug, Clone, Copy)]
pub struct Ops {
    pub pullback_char: CharOp,
    pub direct_image_char: CharOp,
}

fn direct_image_only(phi: &CoveringMap, c: &ParabolicChar) -> Result<ParabolicChar> {
    Ok(direct_image_char(phi, c)?.char)
}

impl Default for Ops {
    fn default() -> Self {
        Self {
            pullback_char,
            direct_image_char: direct_image_only,
        }
    }
}

type Generator = fn(&mut ChaCha8Rng, &VerifierConfig) -> ScenarioFile;
type Evaluator = fn(&Scenario, &CheckSpec, &Ops) -> Outcome;
type Outcome = std::result::Result<(), String>;

struct Property {
    name: &'static str,
    generate: Generator,
    evaluate: Evaluator,
}

const PROPERTIES: &[Property] = &[
    Property {
        name: "riemann_hurwitz_validator",
        generate: gen_validator,
        evaluate: eval_validator,
    },
    Property {
        name: "compose_laws",
        generate: gen_compose,
        evaluate: eval_compose,
    },
    Property {
        name: "line_algebra",
        generate: gen_lines,
        evaluate: eval_lines,
    },
    Property {
        name: "pullback_degree_multiplicativity",
        generate: gen_pullback,
        evaluate: eval_pullback_degree,
    },
    Property {
        name: "direct_image_degree",
        generate: gen_direct_image,
        evaluate: eval_direct_image_degree,
    },
    Property {
        name: "pullback_functoriality",
        generate: gen_pullback_chain,
        evaluate: eval_pullback_functoriality,
    },
    Property {
        name: "direct_image_functoriality",
        generate: gen_direct_image_chain,
        evaluate: eval_direct_image_functoriality,
    },
    Property {
        name: "galois_decomposition",
        generate: gen_galois,
        evaluate: eval_galois,
    },
    Property {
        name: "split_semistability",
        generate: gen_semistability,
        evaluate: eval_semistability,
    },
    Property {
        name: "table1_square",
        generate: gen_table1,
        evaluate: eval_table1,
    },
    Property {
        name: "table2_square",
        generate: gen_table2,
        evaluate: eval_table2,
    },
    Property {
        name: "table2_residue",
        generate: gen_table2_residue,
        evaluate: eval_table2_residue,
    },
    Property {
        name: "residue_transport",
        generate: gen_residue_transport,
        evaluate: eval_residue_transport,
    },
    Property {
        name: "hitchin_equivariance",
        generate: gen_hitchin,
        evaluate: eval_hitchin,
    },
];

pub fn property_names() -> Vec<&'static str> {
    PROPERTIES.iter().map(|p| p.name).collect()
}

fn property(name: &str) -> Result<(usize, &'static Property)> {
    PROPERTIES
        .iter()
        .enumerate()
        .find(|(_, p)| p.name == name)
        .ok_or_else(|| Error::InvalidValue(format!("unknown property `{name}`")))
}

/// Evaluates the scenario's `check` section with the given functors.
pub fn evaluate_with(scenario: &Scenario, ops: &Ops) -> Result<Outcome> {
    let check = scenario
        .file
        .check
        .as_ref()
        .ok_or_else(|| Error::InvalidValue("scenario has no `check` section".into()))?;
    let (_, prop) = property(&check.property)?;
    Ok((prop.evaluate)(scenario, check, ops))
}

pub fn evaluate(scenario: &Scenario) -> Result<Outcome> {
    evaluate_with(scenario, &Ops::default())
}

/// The generated scenario of one trial.
pub fn generate(name: &str, config: &VerifierConfig, trial: u64) -> Result<ScenarioFile> {
    let (index, prop) = property(name)?;
    Ok((prop.generate)(
        &mut trial_rng(config.seed, index, trial),
        config,
    ))
}

fn trial_rng(seed: u64, property: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((property as u64) << 40) | trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub trial: u64,
    pub message: String,
    pub scenario: ScenarioFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub first_failure: Option<Failure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub config: VerifierConfig,
    pub properties: Vec<PropertyReport>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed == p.trials)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "verify seed={} trials={} max-rank={} max-degree={} max-multiplicity={} weight-denominator-bound={}\n",
            c.seed, c.trials, c.max_rank, c.max_degree, c.max_multiplicity, c.weight_denominator_bound
        );
        let width = self
            .properties
            .iter()
            .map(|p| p.name.len())
            .max()
            .unwrap_or(0);
        for p in &self.properties {
            let status = if p.passed == p.trials { "pass" } else { "FAIL" };
            out += &format!(
                "{:width$}  {:>6}/{:<6} {status}\n",
                p.name, p.passed, p.trials
            );
        }
        for p in &self.properties {
            if let Some(f) = &p.first_failure {
                out += &format!(
                    "\ncounterexample for {} (trial {}): {}\n{}\n",
                    p.name,
                    f.trial,
                    f.message,
                    f.scenario.to_json()
                );
            }
        }
        let failed = self
            .properties
            .iter()
            .filter(|p| p.passed != p.trials)
            .count();
        if failed == 0 {
            out += &format!("all {} properties passed\n", self.properties.len());
        } else {
            out += &format!("{failed} of {} properties failed\n", self.properties.len());
        }
        out
    }
}

fn run_trial(
    prop: &Property,
    index: usize,
    config: &VerifierConfig,
    trial: u64,
    ops: &Ops,
) -> Option<Failure> {
    let file = (prop.generate)(&mut trial_rng(config.seed, index, trial), config);
    let outcome = match Scenario::resolve(file.clone()) {
        Ok(scenario) => {
            let check = file.check.as_ref().expect("generators always add a check");
            (prop.evaluate)(&scenario, check, ops)
        }
        Err(e) => Err(format!("generated scenario does not load: {e}")),
    };
    outcome.err().map(|message| Failure {
        trial,
        message,
        scenario: file,
    })
}

/// Runs the named properties (all when `names` is empty).
pub fn verify_with(config: &VerifierConfig, ops: &Ops, names: &[&str]) -> Result<Report> {
    config.validate()?;
    let selected: Vec<(usize, &Property)> = if names.is_empty() {
        PROPERTIES.iter().enumerate().collect()
    } else {
        names.iter().map(|n| property(n)).collect::<Result<_>>()?
    };
    let jobs: Vec<(usize, usize, u64)> = selected
        .iter()
        .enumerate()
        .flat_map(|(slot, &(index, _))| (0..config.trials as u64).map(move |t| (slot, index, t)))
        .collect();
    let results: Vec<Option<Failure>> = jobs
        .par_iter()
        .map(|&(slot, index, trial)| run_trial(selected[slot].1, index, config, trial, ops))
        .collect();

    let mut properties: Vec<PropertyReport> = selected
        .iter()
        .map(|(_, p)| PropertyReport {
            name: p.name.to_owned(),
            trials: config.trials,
            passed: 0,
            first_failure: None,
        })
        .collect();
    for (&(slot, _, _), result) in jobs.iter().zip(results) {
        let report = &mut properties[slot];
        match result {
            None => report.passed += 1,
            Some(f) => {
                if report.first_failure.is_none() {
                    report.first_failure = Some(f);
                }
            }
        }
    }
    Ok(Report {
        config: config.clone(),
        properties,
    })
}

pub fn verify(config: &VerifierConfig) -> Result<Report> {
    verify_with(config, &Ops::default(), &[])
}

// ---------------------------------------------------------------------------
// Random objects

fn random_weight(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> Weight {
    let d = rng.gen_range(1..=cfg.weight_denominator_bound);
    Weight::new(rat(rng.gen_range(0..d), d)).expect("k/d lies in [0, 1)")
}

fn random_rational(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> Rational {
    let d = rng.gen_range(1..=cfg.weight_denominator_bound);
    rat(rng.gen_range(-2 * d..=2 * d), d)
}

fn random_gaussian(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> GaussianRational {
    let re = random_rational(rng, cfg);
    let im = if rng.gen_bool(0.25) {
        Rational::zero()
    } else {
        random_rational(rng, cfg)
    };
    GaussianRational::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, cfg: &VerifierConfig, size: usize) -> Matrix {
    let mut a = Matrix::zeros(size);
    for i in 0..size {
        for j in 0..size {
            if rng.gen_bool(0.7) {
                a.set(i, j, random_gaussian(rng, cfg));
            }
        }
    }
    a
}

fn random_partition(rng: &mut ChaCha8Rng, n: u32) -> Vec<u32> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let p = rng.gen_range(1..=left);
        parts.push(p);
        left -= p;
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Any,
    /// Every fiber totally ramified or unramified.
    Cyclic,
}

fn random_fiber(rng: &mut ChaCha8Rng, n: u32, shape: Shape) -> Vec<u32> {
    match shape {
        Shape::Any => random_partition(rng, n),
        Shape::Cyclic if rng.gen_bool(0.5) => vec![n],
        Shape::Cyclic => vec![1; n as usize],
    }
}

/// Source genus from Riemann–Hurwitz, when it is a nonnegative integer.
fn solve_source_genus(target_genus: u32, degree: u32, fibers: &[Vec<u32>]) -> Option<u32> {
    let ramification: i64 = fibers.iter().flatten().map(|&m| i64::from(m) - 1).sum();
    let euler = i64::from(degree) * (2 * i64::from(target_genus) - 2) + ramification;
    if euler % 2 != 0 || euler < -2 {
        return None;
    }
    u32::try_from(euler / 2 + 1).ok()
}

/// A covering under construction: fibers over target labels.
struct CoverPlan {
    degree: u32,
    source_genus: u32,
    fibers: Vec<(String, Vec<(String, u32)>)>,
}

impl CoverPlan {
    fn sources(&self) -> Vec<String> {
        self.fibers
            .iter()
            .flat_map(|(_, f)| f.iter().map(|(s, _)| s.clone()))
            .collect()
    }

    fn targets(&self) -> Vec<String> {
        self.fibers.iter().map(|(t, _)| t.clone()).collect()
    }

    fn point_map(&self) -> BTreeMap<Point, Preimage> {
        self.fibers
            .iter()
            .flat_map(|(t, fiber)| {
                fiber.iter().map(move |(s, m)| {
                    (
                        Point::new(s),
                        Preimage {
                            target: Point::new(t),
                            multiplicity: *m,
                        },
                    )
                })
            })
            .collect()
    }
}

/// Samples fibers over `required` targets plus up to `max_extra` fresh
/// ones, retrying until Riemann–Hurwitz gives a valid source genus. Falls
/// back to lower degrees, ending at degree one which always succeeds.
#[allow(clippy::too_many_arguments)]
fn random_cover(
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    target_genus: u32,
    required: &[String],
    max_extra: usize,
    shape: Shape,
    target_prefix: &str,
    source_prefix: &str,
) -> CoverPlan {
    let mut degree = rng.gen_range(1..=cfg.max_multiplicity);
    loop {
        for _ in 0..32 {
            let extra = rng.gen_range(0..=max_extra);
            let fibers: Vec<Vec<u32>> = (0..required.len() + extra)
                .map(|_| random_fiber(rng, degree, shape))
                .collect();
            if let Some(source_genus) = solve_source_genus(target_genus, degree, &fibers) {
                let mut labels: Vec<String> = required.to_vec();
                labels.extend((1..=extra).map(|k| format!("{target_prefix}{k}")));
                let mut counter = 0;
                let fibers = labels
                    .into_iter()
                    .zip(fibers)
                    .map(|(t, parts)| {
                        let fiber = parts
                            .into_iter()
                            .map(|m| {
                                counter += 1;
                                (format!("{source_prefix}{counter}"), m)
                            })
                            .collect();
                        (t, fiber)
                    })
                    .collect();
                return CoverPlan {
                    degree,
                    source_genus,
                    fibers,
                };
            }
        }
        degree = (degree - 1).max(1);
    }
}

fn curve_of(genus: u32, points: &[String]) -> MarkedCurve {
    MarkedCurve::new(genus, points.iter().map(Point::new)).expect("generated labels are distinct")
}

/// A covering `source -> target` with a fresh target curve.
struct Cover {
    target: MarkedCurve,
    source: MarkedCurve,
    map: CoveringMap,
}

fn single_cover(rng: &mut ChaCha8Rng, cfg: &VerifierConfig, shape: Shape) -> Cover {
    let target_genus = rng.gen_range(0..=2);
    let max_extra = cfg.max_multiplicity as usize + 2;
    let plan = random_cover(rng, cfg, target_genus, &[], max_extra, shape, "z", "x");
    let target = curve_of(target_genus, &plan.targets());
    let source = curve_of(plan.source_genus, &plan.sources());
    let map = CoveringMap::new(
        source.clone(),
        target.clone(),
        plan.degree,
        plan.point_map(),
    )
    .expect("generated covering satisfies Riemann–Hurwitz");
    Cover {
        target,
        source,
        map,
    }
}

/// Curves `C_0 <- C_1 <- ... <- C_len` with maps `maps[k]: C_{k+1} -> C_k`.
/// Each map above the first lists exactly the points listed by the map
/// below it, so the chain composes without fresh labels.
fn random_chain(
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    len: usize,
) -> (Vec<MarkedCurve>, Vec<CoveringMap>) {
    const PREFIXES: [&str; 4] = ["z", "x", "y", "w"];
    let first = single_cover(rng, cfg, Shape::Any);
    let mut curves = vec![first.target, first.source];
    let mut maps = vec![first.map];
    for level in 1..len {
        let below = &curves[level];
        let required: Vec<String> = below.points().iter().map(|p| p.0.clone()).collect();
        let plan = random_cover(
            rng,
            cfg,
            below.genus(),
            &required,
            0,
            Shape::Any,
            PREFIXES[level],
            PREFIXES[level + 1],
        );
        let source = curve_of(plan.source_genus, &plan.sources());
        let map = CoveringMap::new(source.clone(), below.clone(), plan.degree, plan.point_map())
            .expect("generated covering satisfies Riemann–Hurwitz");
        curves.push(source);
        maps.push(map);
    }
    (curves, maps)
}

fn random_line(rng: &mut ChaCha8Rng, cfg: &VerifierConfig, curve: &MarkedCurve) -> ParaLine {
    let degree = rng.gen_range(-cfg.max_degree..=cfg.max_degree);
    let weights: Vec<(Point, Weight)> = curve
        .points()
        .iter()
        .filter(|_| rng.gen_bool(0.6))
        .cloned()
        .collect::<Vec<Point>>()
        .into_iter()
        .map(|p| (p, random_weight(rng, cfg)))
        .collect();
    ParaLine::new(curve.clone(), degree, weights).expect("weights sit on marked points")
}

fn random_split(
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    curve: &MarkedCurve,
) -> SplitParabolicBundle {
    let rank = rng.gen_range(1..=cfg.max_rank);
    let lines = (0..rank).map(|_| random_line(rng, cfg, curve)).collect();
    SplitParabolicBundle::new(lines).expect("rank is positive")
}

/// A split bundle whose summands share one parabolic degree.
fn equal_slope_split(
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    curve: &MarkedCurve,
) -> SplitParabolicBundle {
    let rank = rng.gen_range(1..=cfg.max_rank);
    let target_frac = random_weight(rng, cfg);
    let par_deg = int(rng.gen_range(-cfg.max_degree..=cfg.max_degree)) + target_frac.value();
    let points = curve.points();
    let lines = (0..rank)
        .map(|_| {
            let mut weights: Vec<(Point, Weight)> = Vec::new();
            if let Some((last, rest)) = points.split_last() {
                let mut total = Rational::zero();
                for p in rest {
                    let w = random_weight(rng, cfg);
                    total += w.value();
                    weights.push((p.clone(), w));
                }
                let closing = Weight::reduce(&(target_frac.value() - &total));
                total += closing.value();
                weights.push((last.clone(), closing));
                let degree = &par_deg - &total;
                let degree = floor_i64(&degree);
                ParaLine::new(curve.clone(), degree, weights).expect("weights sit on marked points")
            } else {
                let degree = floor_i64(&par_deg);
                ParaLine::new(curve.clone(), degree, weights).expect("no weights")
            }
        })
        .collect();
    SplitParabolicBundle::new(lines).expect("rank is positive")
}

fn random_char(rng: &mut ChaCha8Rng, cfg: &VerifierConfig, curve: &MarkedCurve) -> ParabolicChar {
    let rank = rng.gen_range(1..=cfg.max_rank);
    let degree = rng.gen_range(-cfg.max_degree..=cfg.max_degree);
    let weights = curve
        .points()
        .iter()
        .filter(|_| rng.gen_bool(0.6))
        .cloned()
        .collect::<Vec<Point>>()
        .into_iter()
        .map(|p| (p, (0..rank).map(|_| random_weight(rng, cfg)).collect()))
        .collect();
    ParabolicChar::from_parts(curve.clone(), rank, degree, weights)
        .expect("weights sit on marked points")
}

/// Adds a random bundle on `curve`, either as split lines or as bare
/// characteristic data.
fn add_random_bundle(
    file: &mut ScenarioFile,
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    name: &str,
    curve_name: &str,
    curve: &MarkedCurve,
) {
    if rng.gen_bool(0.5) {
        file.add_split(name, curve_name, &random_split(rng, cfg, curve));
    } else {
        file.add_char(name, curve_name, &random_char(rng, cfg, curve));
    }
}

fn random_flag(rng: &mut ChaCha8Rng, cfg: &VerifierConfig, max_rank: usize) -> Flag {
    let steps = rng.gen_range(1..=max_rank.min(3));
    let mut weights: Vec<Weight> = (0..steps).map(|_| random_weight(rng, cfg)).collect();
    weights.sort();
    weights.dedup();
    let mut left = max_rank.saturating_sub(weights.len());
    let steps = weights
        .into_iter()
        .map(|weight| {
            let extra = rng.gen_range(0..=left.min(1));
            left -= extra;
            FlagStep {
                weight,
                multiplicity: 1 + extra,
            }
        })
        .collect();
    Flag::new(steps).expect("weights strictly increase")
}

#[derive(Clone, Copy)]
enum ResidueShape {
    /// Block lower triangular.
    Parabolic,
    /// Strictly block lower triangular.
    Strong,
    /// Block lower triangular, weight times identity on the diagonal blocks.
    Residual,
}

fn random_residue(
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    flag: &Flag,
    shape: ResidueShape,
) -> Matrix {
    let block = flag.block_index();
    let weights = flag.basis_weights();
    let n = flag.rank();
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let value = if block[i] > block[j] {
                random_gaussian(rng, cfg)
            } else if block[i] < block[j] {
                continue;
            } else {
                match shape {
                    ResidueShape::Parabolic => random_gaussian(rng, cfg),
                    ResidueShape::Strong => continue,
                    ResidueShape::Residual if i == j => {
                        GaussianRational::real(weights[i].value().clone())
                    }
                    ResidueShape::Residual => continue,
                }
            };
            a.set(i, j, value);
        }
    }
    a
}

fn random_field(
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    kind: FieldKind,
    order: u32,
    flag: Flag,
    shape: ResidueShape,
) -> LocalSpectralField {
    let mut coeffs = vec![random_residue(rng, cfg, &flag, shape)];
    coeffs.extend((1..order).map(|_| random_matrix(rng, cfg, flag.rank())));
    LocalSpectralField::new(kind, order, coeffs, flag).expect("sizes match the flag")
}

fn random_higgs_points(
    rng: &mut ChaCha8Rng,
    cfg: &VerifierConfig,
    nilpotent: bool,
) -> Vec<SpectralPoint> {
    let count = rng.gen_range(1..=3);
    (0..count)
        .map(|_| {
            let eig = if nilpotent {
                GaussianRational::zero()
            } else {
                random_gaussian(rng, cfg)
            };
            let mult = rng.gen_range(1..=2);
            SpectralPoint::new(
                FieldKind::Higgs,
                random_weight(rng, cfg).value().clone(),
                eig,
                mult,
            )
            .expect("jump lies in [0, 1)")
        })
        .collect()
}

fn check(property: &str) -> CheckSpec {
    CheckSpec {
        property: property.to_owned(),
        ..CheckSpec::default()
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| (*s).to_owned()).collect()
}

// ---------------------------------------------------------------------------
// Evaluation helpers

fn fail<T>(message: impl Into<String>) -> std::result::Result<T, String> {
    Err(message.into())
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn map_arg<'a>(
    s: &'a Scenario,
    check: &CheckSpec,
    i: usize,
) -> std::result::Result<&'a CoveringMap, String> {
    let name = check
        .maps
        .get(i)
        .ok_or_else(|| format!("check needs map #{}", i + 1))?;
    lib(s.covering(name))
}

fn bundle_arg<'a>(
    s: &'a Scenario,
    check: &CheckSpec,
    i: usize,
) -> std::result::Result<&'a Bundle, String> {
    let name = check
        .bundles
        .get(i)
        .ok_or_else(|| format!("check needs bundle #{}", i + 1))?;
    lib(s.bundle(name))
}

fn field_arg<'a>(
    s: &'a Scenario,
    check: &CheckSpec,
    i: usize,
) -> std::result::Result<&'a LocalSpectralField, String> {
    let name = check
        .fields
        .get(i)
        .ok_or_else(|| format!("check needs field #{}", i + 1))?;
    lib(s.field(name))
}

fn m_arg(check: &CheckSpec) -> std::result::Result<u32, String> {
    match check.m {
        Some(m) if m >= 1 => Ok(m),
        _ => fail("check needs a multiplicity m >= 1"),
    }
}

fn describe(c: &ParabolicChar) -> String {
    let weights: Vec<String> = c
        .weights()
        .iter()
        .map(|(p, ws)| {
            let ws: Vec<String> = ws.iter().map(ToString::to_string).collect();
            format!("{p}: [{}]", ws.join(", "))
        })
        .collect();
    format!(
        "rank {} degree {} weights {{{}}}",
        c.rank(),
        c.degree(),
        weights.join("; ")
    )
}

fn same_char(label: &str, left: &ParabolicChar, right: &ParabolicChar) -> Outcome {
    ensure(left.same_data(right), || {
        format!("{label}: {} != {}", describe(left), describe(right))
    })
}

// ---------------------------------------------------------------------------
// riemann_hurwitz_validator

fn gen_validator(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let cover = single_cover(rng, cfg, Shape::Any);
    let mut source_genus = cover.source.genus();
    let mut target_genus = cover.target.genus();
    let mut degree = cover.map.degree();
    let mut map = cover.map.point_map().clone();

    let roll = rng.gen_range(0..10);
    let expect = match roll {
        0 => {
            degree = 0;
            "degree"
        }
        1 if !map.is_empty() => {
            let keys: Vec<Point> = map.keys().cloned().collect();
            let victim = keys.choose(rng).expect("nonempty");
            map.get_mut(victim).expect("listed").multiplicity = 0;
            "multiplicity"
        }
        2 if !map.is_empty() => {
            let keys: Vec<Point> = map.keys().cloned().collect();
            let victim = keys.choose(rng).expect("nonempty");
            map.get_mut(victim).expect("listed").multiplicity += rng.gen_range(1..=2);
            "fiber"
        }
        3 => "valid",
        _ => {
            // Keep every fiber complete and break only the genus count.
            let mergeable: Vec<Point> = cover
                .map
                .listed_targets()
                .into_iter()
                .filter(|t| cover.map.fiber(t).len() >= 2)
                .cloned()
                .collect();
            match rng.gen_range(0..4) {
                0 if !mergeable.is_empty() => {
                    let t = mergeable.choose(rng).expect("nonempty");
                    let fiber: Vec<(Point, u32)> = cover
                        .map
                        .fiber(t)
                        .into_iter()
                        .map(|(p, m)| (p.clone(), m))
                        .collect();
                    map.remove(&fiber[1].0);
                    map.get_mut(&fiber[0].0).expect("listed").multiplicity += fiber[1].1;
                }
                1 if source_genus > 0 => source_genus -= 1,
                2 => target_genus += rng.gen_range(1..=2),
                _ => source_genus += rng.gen_range(1..=3),
            }
            "Riemann–Hurwitz"
        }
    };

    let sources: Vec<String> = map.keys().map(|p| p.0.clone()).collect();
    let targets: Vec<String> = cover.target.points().iter().map(|p| p.0.clone()).collect();
    let source = curve_of(source_genus, &sources);
    let target = curve_of(target_genus, &targets);
    let profile = CoveringMap::unchecked(source.clone(), target.clone(), degree, map);

    let mut file = ScenarioFile::default();
    file.add_curve("Xv", &source);
    file.add_curve("Zv", &target);
    file.add_profile("f", "Xv", "Zv", &profile);
    file.check = Some(CheckSpec {
        maps: names(&["f"]),
        expect: Some(expect.to_owned()),
        ..check("riemann_hurwitz_validator")
    });
    file
}

fn eval_validator(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let name = check.maps.first().ok_or("check needs a profile")?;
    let profile = s
        .profiles
        .get(name)
        .ok_or_else(|| format!("unknown profile `{name}`"))?;
    let expect = check
        .expect
        .as_deref()
        .ok_or("check needs an expected clause")?;
    let found = match profile.validate() {
        Ok(()) => "valid",
        Err(v) => v.clause(),
    };
    ensure(found == expect, || {
        format!("expected {expect}, validator reported {found}")
    })?;
    if let Err(Violation::RiemannHurwitz {
        source_euler,
        predicted,
    }) = profile.validate()
    {
        ensure(source_euler != predicted, || {
            "violation without a mismatch".into()
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// compose_laws

fn add_chain(file: &mut ScenarioFile, curves: &[MarkedCurve], maps: &[CoveringMap]) -> Vec<String> {
    const CURVES: [&str; 4] = ["Z", "X", "Y", "W"];
    const MAPS: [&str; 3] = ["f", "psi", "chi"];
    for (name, curve) in CURVES.iter().zip(curves) {
        file.add_curve(name, curve);
    }
    for (k, map) in maps.iter().enumerate() {
        file.add_covering(MAPS[k], CURVES[k + 1], CURVES[k], map);
    }
    // innermost map first
    MAPS[..maps.len()]
        .iter()
        .rev()
        .map(|s| (*s).to_owned())
        .collect()
}

fn gen_compose(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let (curves, maps) = random_chain(rng, cfg, 3);
    let mut file = ScenarioFile::default();
    let chain = add_chain(&mut file, &curves, &maps);
    file.check = Some(CheckSpec {
        maps: chain,
        ..check("compose_laws")
    });
    file
}

fn eval_compose(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let (h, g, f) = (
        map_arg(s, check, 0)?,
        map_arg(s, check, 1)?,
        map_arg(s, check, 2)?,
    );
    let hg = lib(h.compose(g))?;
    let gf = lib(g.compose(f))?;
    let left = lib(hg.compose(f))?;
    let right = lib(h.compose(&gf))?;
    ensure(left == right, || {
        format!("(h g) f = {left:?}\n h (g f) = {right:?}")
    })?;
    ensure(
        left.degree() == h.degree() * g.degree() * f.degree(),
        || format!("composite degree {} is not the product", left.degree()),
    )?;
    for (label, map) in [
        ("h", h),
        ("g", g),
        ("f", f),
        ("hg", &hg),
        ("gf", &gf),
        ("hgf", &left),
    ] {
        ensure(map.validate().is_ok(), || {
            format!("{label} does not validate")
        })?;
        let expected = 2 * i64::from(map.source().genus())
            - 2
            - i64::from(map.degree()) * (2 * i64::from(map.target().genus()) - 2);
        let found = map.ramification_divisor().degree();
        ensure(found == expected, || {
            format!("ramification divisor of {label} has degree {found}, expected {expected}")
        })?;
    }
    let d: Vec<&Point> = f.listed_targets().into_iter().collect();
    let direct = lib(gf.reduced_preimage(d.iter().copied()))?;
    let staged = lib(f.reduced_preimage(d.iter().copied()))?;
    let staged = lib(g.reduced_preimage(staged.iter()))?;
    ensure(direct == staged, || {
        format!("reduced preimages differ: {direct:?} vs {staged:?}")
    })
}

// ---------------------------------------------------------------------------
// line_algebra

fn gen_lines(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let genus = rng.gen_range(0..=2);
    let count = rng.gen_range(0..=4);
    let labels: Vec<String> = (1..=count).map(|k| format!("p{k}")).collect();
    let curve = curve_of(genus, &labels);
    let mut file = ScenarioFile::default();
    file.add_curve("C", &curve);
    let lines: Vec<ParaLine> = (0..3).map(|_| random_line(rng, cfg, &curve)).collect();
    let e = SplitParabolicBundle::new(lines).expect("three lines");
    file.add_split("E", "C", &e);
    file.check = Some(CheckSpec {
        bundles: names(&["E"]),
        ..check("line_algebra")
    });
    file
}

fn eval_lines(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let Bundle::Split(e) = bundle_arg(s, check, 0)? else {
        return fail("line_algebra needs a split bundle");
    };
    let sum: Rational = e.summands().iter().map(ParaLine::par_deg).sum();
    ensure(e.char().par_deg() == sum, || {
        "par-deg of char differs from the summands".into()
    })?;
    ensure(e.par_deg() == sum, || {
        "par-deg of bundle differs from the summands".into()
    })?;

    let unit = ParaLine::trivial(e.curve().clone());
    for l in e.summands() {
        ensure(l.dual().dual() == *l, || {
            format!("dual is not an involution on {l:?}")
        })?;
        ensure(l.dual().par_deg() == -l.par_deg(), || {
            "dual does not negate par-deg".into()
        })?;
        ensure(lib(l.tensor(&unit))? == *l, || {
            "trivial line is not a unit".into()
        })?;
        let dual_pair = lib(l.tensor(&l.dual()))?;
        ensure(dual_pair.par_deg().is_zero(), || {
            "L tensor dual L has nonzero par-deg".into()
        })?;
        for m in e.summands() {
            let lm = lib(l.tensor(m))?;
            ensure(lm == lib(m.tensor(l))?, || {
                "tensor is not commutative".into()
            })?;
            ensure(lm.par_deg() == l.par_deg() + m.par_deg(), || {
                "par-deg is not additive under tensor".into()
            })?;
            for n in e.summands() {
                let left = lib(lm.tensor(n))?;
                let right = lib(l.tensor(&lib(m.tensor(n))?))?;
                ensure(left == right, || "tensor is not associative".into())?;
            }
        }
    }
    let c = e.char();
    for p in e.curve().points() {
        let total: usize = c.flag_at(p).steps().iter().map(|s| s.multiplicity).sum();
        ensure(total == c.rank(), || {
            format!("flag at {p} has {total} steps for rank {}", c.rank())
        })?;
    }
    let equal = e
        .summands()
        .iter()
        .all(|l| l.par_deg() == e.summands()[0].par_deg());
    ensure(
        e.is_semistable() == equal && e.is_polystable() == equal,
        || "split semistability differs from equal summand slopes".into(),
    )
}

// ---------------------------------------------------------------------------
// pullback and direct image degrees

fn gen_pullback(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let cover = single_cover(rng, cfg, Shape::Any);
    let mut file = ScenarioFile::default();
    file.add_curve("Z", &cover.target);
    file.add_curve("X", &cover.source);
    file.add_covering("f", "X", "Z", &cover.map);
    file.add_split("E", "Z", &random_split(rng, cfg, &cover.target));
    file.check = Some(CheckSpec {
        maps: names(&["f"]),
        bundles: names(&["E"]),
        ..check("pullback_degree_multiplicativity")
    });
    file
}

fn eval_pullback_degree(s: &Scenario, check: &CheckSpec, ops: &Ops) -> Outcome {
    let f = map_arg(s, check, 0)?;
    let e = bundle_arg(s, check, 0)?;
    let c = e.char();
    let pulled = lib((ops.pullback_char)(f, &c))?;
    let expected = c.par_deg() * int(i64::from(f.degree()));
    ensure(pulled.par_deg() == expected, || {
        format!(
            "par-deg of pullback is {}, expected deg(f) * {} = {}",
            pulled.par_deg(),
            c.par_deg(),
            expected
        )
    })?;
    ensure(pulled.rank() == c.rank(), || {
        "pullback changed the rank".into()
    })?;
    if let Bundle::Split(split) = e {
        let lines = lib(pullback_split(f, split))?;
        same_char(
            "pullback of split bundle vs of its char",
            &lines.char(),
            &pulled,
        )?;
    }
    Ok(())
}

fn gen_direct_image(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let cover = single_cover(rng, cfg, Shape::Any);
    let mut file = ScenarioFile::default();
    file.add_curve("Z", &cover.target);
    file.add_curve("X", &cover.source);
    file.add_covering("phi", "X", "Z", &cover.map);
    add_random_bundle(&mut file, rng, cfg, "E", "X", &cover.source);
    file.check = Some(CheckSpec {
        maps: names(&["phi"]),
        bundles: names(&["E"]),
        ..check("direct_image_degree")
    });
    file
}

fn eval_direct_image_degree(s: &Scenario, check: &CheckSpec, ops: &Ops) -> Outcome {
    let phi = map_arg(s, check, 0)?;
    let c = bundle_arg(s, check, 0)?.char();
    let pushed = lib((ops.direct_image_char)(phi, &c))?;
    ensure(pushed.par_deg() == c.par_deg(), || {
        format!(
            "par-deg of direct image is {}, expected {}",
            pushed.par_deg(),
            c.par_deg()
        )
    })?;
    let n = phi.degree() as usize;
    ensure(pushed.rank() == n * c.rank(), || {
        "direct image has the wrong rank".into()
    })?;
    let r = c.rank() as i64;
    let grr = c.degree() + r * (1 - i64::from(phi.source().genus()))
        - r * n as i64 * (1 - i64::from(phi.target().genus()));
    ensure(pushed.degree() == grr, || {
        format!(
            "underlying degree {} differs from Riemann–Roch {grr}",
            pushed.degree()
        )
    })
}

// ---------------------------------------------------------------------------
// functoriality

fn gen_pullback_chain(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let (curves, maps) = random_chain(rng, cfg, 2);
    let mut file = ScenarioFile::default();
    let chain = add_chain(&mut file, &curves, &maps);
    add_random_bundle(&mut file, rng, cfg, "E", "Z", &curves[0]);
    file.check = Some(CheckSpec {
        maps: chain,
        bundles: names(&["E"]),
        ..check("pullback_functoriality")
    });
    file
}

fn eval_pullback_functoriality(s: &Scenario, check: &CheckSpec, ops: &Ops) -> Outcome {
    let (psi, f) = (map_arg(s, check, 0)?, map_arg(s, check, 1)?);
    let c = bundle_arg(s, check, 0)?.char();
    let composite = lib(psi.compose(f))?;
    let direct = lib((ops.pullback_char)(&composite, &c))?;
    let staged = lib((ops.pullback_char)(psi, &lib((ops.pullback_char)(f, &c))?))?;
    same_char("one-step vs two-step pullback", &direct, &staged)
}

fn gen_direct_image_chain(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let (curves, maps) = random_chain(rng, cfg, 2);
    let mut file = ScenarioFile::default();
    let chain = add_chain(&mut file, &curves, &maps);
    add_random_bundle(&mut file, rng, cfg, "E", "Y", &curves[2]);
    file.check = Some(CheckSpec {
        maps: chain,
        bundles: names(&["E"]),
        ..check("direct_image_functoriality")
    });
    file
}

fn eval_direct_image_functoriality(s: &Scenario, check: &CheckSpec, ops: &Ops) -> Outcome {
    let (psi, phi) = (map_arg(s, check, 0)?, map_arg(s, check, 1)?);
    let c = bundle_arg(s, check, 0)?.char();
    let composite = lib(psi.compose(phi))?;
    let direct = lib((ops.direct_image_char)(&composite, &c))?;
    let staged = lib((ops.direct_image_char)(
        phi,
        &lib((ops.direct_image_char)(psi, &c))?,
    ))?;
    same_char("one-step vs two-step direct image", &direct, &staged)
}

// ---------------------------------------------------------------------------
// galois_decomposition

fn gen_galois(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let cover = single_cover(rng, cfg, Shape::Cyclic);
    let constant = rng.gen_bool(0.5);
    let c = if constant {
        // one weight multiset per fiber
        let rank = rng.gen_range(1..=cfg.max_rank);
        let degree = rng.gen_range(-cfg.max_degree..=cfg.max_degree);
        let mut weights = BTreeMap::new();
        for t in cover.map.listed_targets() {
            if rng.gen_bool(0.3) {
                continue;
            }
            let ws: Vec<Weight> = (0..rank).map(|_| random_weight(rng, cfg)).collect();
            for (x, _) in cover.map.fiber(t) {
                weights.insert(x.clone(), ws.clone());
            }
        }
        ParabolicChar::from_parts(cover.source.clone(), rank, degree, weights)
            .expect("listed points")
    } else {
        random_char(rng, cfg, &cover.source)
    };
    let mut file = ScenarioFile::default();
    file.add_curve("Z", &cover.target);
    file.add_curve("X", &cover.source);
    file.add_covering("phi", "X", "Z", &cover.map);
    file.add_char("E", "X", &c);
    file.check = Some(CheckSpec {
        maps: names(&["phi"]),
        bundles: names(&["E"]),
        expect: Some(if constant { "copies" } else { "orbit" }.to_owned()),
        ..check("galois_decomposition")
    });
    file
}

fn eval_galois(s: &Scenario, check: &CheckSpec, ops: &Ops) -> Outcome {
    let phi = map_arg(s, check, 0)?;
    let c = bundle_arg(s, check, 0)?.char();
    let n = phi.degree() as usize;
    let round_trip = lib((ops.pullback_char)(
        phi,
        &lib((ops.direct_image_char)(phi, &c))?,
    ))?;
    ensure(round_trip.rank() == n * c.rank(), || {
        "rank of pullback of direct image".into()
    })?;
    ensure(round_trip.par_deg() == c.par_deg() * int(n as i64), || {
        format!(
            "par-deg of pullback of direct image is {}, expected {}",
            round_trip.par_deg(),
            c.par_deg() * int(n as i64)
        )
    })?;
    for ws in round_trip.weights().values() {
        ensure(ws.len() == n * c.rank(), || {
            "weight multiset of the wrong size".into()
        })?;
    }
    let library = lib(galois_pullback_of_direct_image(phi, &c))?;
    same_char(
        "composed functors vs galois_pullback_of_direct_image",
        &round_trip,
        &library,
    )?;
    same_char(
        "pullback of direct image vs orbit sum",
        &round_trip,
        &lib(galois_orbit_sum(phi, &c))?,
    )?;
    if check.expect.as_deref() == Some("copies") {
        same_char(
            "pullback of direct image vs n copies",
            &round_trip,
            &c.repeated(n),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// split_semistability

fn gen_semistability(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let cover = single_cover(rng, cfg, Shape::Any);
    let e = if rng.gen_bool(0.5) {
        equal_slope_split(rng, cfg, &cover.target)
    } else {
        random_split(rng, cfg, &cover.target)
    };
    let mut file = ScenarioFile::default();
    file.add_curve("Z", &cover.target);
    file.add_curve("X", &cover.source);
    file.add_covering("f", "X", "Z", &cover.map);
    file.add_split("E", "Z", &e);
    file.check = Some(CheckSpec {
        maps: names(&["f"]),
        bundles: names(&["E"]),
        ..check("split_semistability")
    });
    file
}

fn eval_semistability(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let f = map_arg(s, check, 0)?;
    let Bundle::Split(e) = bundle_arg(s, check, 0)? else {
        return fail("split_semistability needs a split bundle");
    };
    let pulled = lib(pullback_split(f, e))?;
    let equal = |b: &SplitParabolicBundle| {
        b.summands()
            .iter()
            .all(|l| l.par_deg() == b.summands()[0].par_deg())
    };
    ensure(e.is_semistable() == pulled.is_semistable(), || {
        format!(
            "semistable before: {}, after pullback: {}",
            e.is_semistable(),
            pulled.is_semistable()
        )
    })?;
    ensure(
        e.is_semistable() == equal(e) && pulled.is_semistable() == equal(&pulled),
        || "semistability differs from equal summand slopes".into(),
    )?;
    ensure(e.is_polystable() == pulled.is_polystable(), || {
        "polystability not preserved".into()
    })?;
    ensure(
        pulled.slope() == e.slope() * int(i64::from(f.degree())),
        || "slope does not scale by the degree".into(),
    )
}

// ---------------------------------------------------------------------------
// Table 1 and Table 2

fn gen_table1(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let nilpotent = rng.gen_bool(0.25);
    let pts = random_higgs_points(rng, cfg, nilpotent);
    let mut file = ScenarioFile::default();
    file.add_spectrum("P", FieldKind::Higgs, &pts);
    file.check = Some(CheckSpec {
        spectra: names(&["P"]),
        ..check("table1_square")
    });
    file
}

fn to_conn(pts: &[SpectralPoint]) -> std::result::Result<Vec<SpectralPoint>, String> {
    pts.iter().map(|p| lib(higgs_to_conn(p))).collect()
}

fn eval_table1(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let name = check.spectra.first().ok_or("check needs a spectrum")?;
    let pts = lib(s.spectrum(name))?;
    for p in pts {
        let back = lib(conn_to_higgs(&lib(higgs_to_conn(p))?))?;
        ensure(back == *p, || {
            format!("conn_to_higgs(higgs_to_conn({p:?})) = {back:?}")
        })?;
    }
    let ms: Vec<u32> = match check.m {
        Some(m) => vec![m],
        None => (1..=7).collect(),
    };
    let nilpotent = pts.iter().all(is_strongly_parabolic_point);
    let conn = to_conn(pts)?;
    if nilpotent {
        ensure(conn.iter().all(is_residual_point), || {
            "nilpotent Higgs points map off the residual locus".into()
        })?;
    }
    for m in ms {
        let higgs_first = to_conn(&lib(pullback_spectrum(FieldKind::Higgs, m, pts))?)?;
        let conn_first = lib(pullback_spectrum(FieldKind::Connection, m, &conn))?;
        ensure(canonical(&higgs_first) == canonical(&conn_first), || {
            format!(
                "m = {m}: NAHT then pullback {conn_first:?} != pullback then NAHT {higgs_first:?}"
            )
        })?;
        if nilpotent {
            ensure(conn_first.iter().all(is_residual_point), || {
                format!("m = {m}: pullback leaves the residual locus")
            })?;
        }
    }
    Ok(())
}

fn gen_table2(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let nilpotent = rng.gen_bool(0.25);
    let count = rng.gen_range(1..=3);
    let mut file = ScenarioFile::default();
    let mut spectra = Vec::new();
    let mut multiplicities = Vec::new();
    for k in 1..=count {
        let name = format!("P{k}");
        file.add_spectrum(
            &name,
            FieldKind::Higgs,
            &random_higgs_points(rng, cfg, nilpotent),
        );
        spectra.push(name);
        multiplicities.push(rng.gen_range(1..=cfg.max_multiplicity));
    }
    file.check = Some(CheckSpec {
        spectra,
        multiplicities,
        ..check("table2_square")
    });
    file
}

fn eval_table2(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    ensure(
        check.spectra.len() == check.multiplicities.len() && !check.spectra.is_empty(),
        || "table2_square needs one multiplicity per spectrum".into(),
    )?;
    let mut higgs_fiber = Vec::new();
    let mut conn_fiber = Vec::new();
    for (name, &m) in check.spectra.iter().zip(&check.multiplicities) {
        let pts = lib(s.spectrum(name))?.to_vec();
        conn_fiber.push((m, to_conn(&pts)?));
        higgs_fiber.push((m, pts));
    }
    let higgs_first = to_conn(&lib(direct_image_spectrum(FieldKind::Higgs, &higgs_fiber))?)?;
    let conn_first = lib(direct_image_spectrum(FieldKind::Connection, &conn_fiber))?;
    ensure(canonical(&higgs_first) == canonical(&conn_first), || {
        format!("NAHT then direct image {conn_first:?} != direct image then NAHT {higgs_first:?}")
    })?;
    let nilpotent = higgs_fiber
        .iter()
        .all(|(_, pts)| pts.iter().all(is_strongly_parabolic_point));
    if nilpotent {
        let pushed = lib(direct_image_spectrum(FieldKind::Higgs, &higgs_fiber))?;
        ensure(pushed.iter().all(is_strongly_parabolic_point), || {
            "direct image leaves the nilpotent locus".into()
        })?;
        ensure(conn_first.iter().all(is_residual_point), || {
            "direct image leaves the residual locus".into()
        })?;
    }
    Ok(())
}

fn gen_table2_residue(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let m = rng.gen_range(2..=5);
    let rank = rng.gen_range(1..=cfg.max_rank.min(3));
    let mut file = ScenarioFile::default();
    let line_flag = Flag::new(vec![FlagStep {
        weight: random_weight(rng, cfg),
        multiplicity: 1,
    }])
    .expect("one step");
    let fields = [
        ("F", FieldKind::Connection, line_flag),
        ("G", FieldKind::Higgs, random_flag(rng, cfg, rank)),
        ("H", FieldKind::Connection, random_flag(rng, cfg, rank)),
    ];
    for (name, kind, flag) in fields {
        let field = random_field(rng, cfg, kind, m, flag, ResidueShape::Parabolic);
        file.add_field(name, &field);
    }
    file.check = Some(CheckSpec {
        fields: names(&["F", "G", "H"]),
        ..check("table2_residue")
    });
    file
}

fn eval_table2_residue(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let (f, g, h) = (
        field_arg(s, check, 0)?,
        field_arg(s, check, 1)?,
        field_arg(s, check, 2)?,
    );

    // rank one connection: residue eigenvalues against the spectral rule
    ensure(f.rank() == 1, || "first field must have rank one".into())?;
    let m = f.order();
    let res = lib(direct_image_residue_conn(f))?;
    let mut eigs =
        triangular_eigenvalues(&res.matrix).ok_or("direct-image residue is not triangular")?;
    eigs.sort();
    let alpha = f.flag().steps()[0].weight.value().clone();
    let point = lib(SpectralPoint::new(
        FieldKind::Connection,
        alpha,
        f.residue().get(0, 0).clone(),
        1,
    ))?;
    let spectrum = lib(direct_image_spectrum(
        FieldKind::Connection,
        &[(m, vec![point])],
    ))?;
    let mut predicted: Vec<GaussianRational> =
        spectrum.iter().map(|p| p.eigenvalue.clone()).collect();
    predicted.sort();
    ensure(eigs == predicted, || {
        format!("residue eigenvalues {eigs:?} != spectrum {predicted:?}")
    })?;
    let jumps: Vec<Weight> = spectrum.iter().map(|p| Weight::reduce(&p.jump)).collect();
    ensure(res.flag == lib(Flag::from_multiset(&jumps))?, || {
        "residue flag differs from spectrum jumps".into()
    })?;

    // Higgs: char(M) = char(A/m)^m
    let m_inv = Rational::new(1.into(), i64::from(g.order()).into());
    let res = lib(direct_image_residue_higgs(g))?;
    let expected = g
        .residue()
        .scale_rational(&m_inv)
        .char_poly()
        .pow(g.order());
    ensure(res.matrix.char_poly() == expected, || {
        "Higgs direct-image char poly".into()
    })?;

    // connection: char(M) = prod_k char((A + k) / m)
    let m_inv = Rational::new(1.into(), i64::from(h.order()).into());
    let res = lib(direct_image_residue_conn(h))?;
    let expected = (0..h.order()).fold(Polynomial::one(), |acc, k| {
        let shifted =
            h.residue() + &Matrix::scalar(h.rank(), GaussianRational::from_int(i64::from(k)));
        &acc * &shifted.scale_rational(&m_inv).char_poly()
    });
    ensure(res.matrix.char_poly() == expected, || {
        "connection direct-image char poly".into()
    })
}

// ---------------------------------------------------------------------------
// residue_transport

fn gen_residue_transport(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let rank = rng.gen_range(1..=cfg.max_rank.min(4));
    let flag = random_flag(rng, cfg, rank);
    let order = rng.gen_range(1..=cfg.max_multiplicity.min(4));
    let mut file = ScenarioFile::default();
    let fields = [
        ("S", FieldKind::Higgs, ResidueShape::Strong),
        ("R", FieldKind::Connection, ResidueShape::Residual),
        ("Q", FieldKind::Connection, ResidueShape::Parabolic),
    ];
    for (name, kind, shape) in fields {
        file.add_field(
            name,
            &random_field(rng, cfg, kind, order, flag.clone(), shape),
        );
    }
    file.check = Some(CheckSpec {
        fields: names(&["S", "R", "Q"]),
        m: Some(rng.gen_range(1..=7)),
        ..check("residue_transport")
    });
    file
}

fn eval_residue_transport(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let (strong, residual, general) = (
        field_arg(s, check, 0)?,
        field_arg(s, check, 1)?,
        field_arg(s, check, 2)?,
    );
    let m = m_arg(check)?;
    let m_g = GaussianRational::from_int(i64::from(m));

    ensure(
        lib(check_strongly_parabolic(strong.residue(), strong.flag()))?,
        || "precondition: first field is not strongly parabolic".into(),
    )?;
    ensure(
        lib(check_residual(residual.residue(), residual.flag()))?,
        || "precondition: second field is not residual".into(),
    )?;
    ensure(
        lib(check_parabolic(general.residue(), general.flag()))?,
        || "precondition: third field is not parabolic".into(),
    )?;

    // Res(f^* theta) = m Res(theta), entry by entry
    let scaled = pullback_residue_higgs(m, strong.residue());
    let n = strong.rank();
    for i in 0..n {
        for j in 0..n {
            let expected = strong.residue().get(i, j) * &m_g;
            ensure(*scaled.get(i, j) == expected, || {
                format!("entry ({i}, {j}) of m Res")
            })?;
        }
    }
    let (pulled, flag) = lib(pullback_residue_higgs_flagged(
        m,
        strong.residue(),
        strong.flag(),
    ))?;
    ensure(lib(check_strongly_parabolic(&pulled, &flag))?, || {
        format!("m = {m}: pullback of a strongly parabolic Higgs residue is not strongly parabolic")
    })?;
    let (pulled, flag) = lib(pullback_residue_conn(
        m,
        residual.residue(),
        residual.flag(),
    ))?;
    ensure(lib(check_residual(&pulled, &flag))?, || {
        format!("m = {m}: pullback of a residual connection is not residual")
    })?;

    // general parabolic residue: the pulled-back residue is parabolic and its
    // spectrum is that of the blocks m B - floor(m a) I
    let (pulled, flag) = lib(pullback_residue_conn(m, general.residue(), general.flag()))?;
    ensure(lib(check_parabolic(&pulled, &flag))?, || {
        format!("m = {m}: pullback of a parabolic connection is not parabolic")
    })?;
    let mut expected = Polynomial::one();
    let mut start = 0;
    for step in general.flag().steps() {
        let size = step.multiplicity;
        let mut block = Matrix::zeros(size);
        for i in 0..size {
            for j in 0..size {
                block.set(i, j, general.residue().get(start + i, start + j).clone());
            }
        }
        let twist = floor_i64(&(step.weight.value() * int(i64::from(m))));
        let shifted = &block.scale(&m_g) - &Matrix::scalar(size, GaussianRational::from_int(twist));
        expected = &expected * &shifted.char_poly();
        start += size;
    }
    ensure(pulled.char_poly() == expected, || {
        format!("m = {m}: pulled-back residue has the wrong characteristic polynomial")
    })?;

    let pushed = lib(direct_image_residue_higgs(strong))?;
    ensure(
        lib(check_strongly_parabolic(
            &pushed.sorted_matrix(),
            &pushed.flag,
        ))?,
        || "direct image of a strongly parabolic Higgs field is not strongly parabolic".into(),
    )?;
    let pushed = lib(direct_image_residue_conn(residual))?;
    ensure(
        lib(check_residual(&pushed.sorted_matrix(), &pushed.flag))?,
        || "direct image of a residual connection is not residual".into(),
    )?;
    let pushed = lib(direct_image_residue_conn(general))?;
    ensure(
        lib(check_parabolic(&pushed.sorted_matrix(), &pushed.flag))?,
        || "direct image of a parabolic connection is not parabolic".into(),
    )
}

// ---------------------------------------------------------------------------
// hitchin_equivariance

fn gen_hitchin(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> ScenarioFile {
    let rank = rng.gen_range(1..=cfg.max_rank.min(6));
    let a = random_matrix(rng, cfg, rank);
    let field = LocalSpectralField::new(FieldKind::Higgs, 1, vec![a], Flag::trivial(rank))
        .expect("sizes match");
    let mut file = ScenarioFile::default();
    file.add_field("A", &field);
    file.check = Some(CheckSpec {
        fields: names(&["A"]),
        m: Some(rng.gen_range(1..=7)),
        ..check("hitchin_equivariance")
    });
    file
}

fn eval_hitchin(s: &Scenario, check: &CheckSpec, _: &Ops) -> Outcome {
    let a = field_arg(s, check, 0)?.residue();
    let m = m_arg(check)?;
    let r = a.size();
    let m_q = int(i64::from(m));
    let pulled = pullback_residue_higgs(m, a);
    let before = hitchin_traces(a, r);
    let after = hitchin_traces(&pulled, r);
    // (dx/x)^i = (m dy/y)^i under x = y^m
    let mut factor = Rational::one();
    for (i, (b, c)) in before.iter().zip(&after).enumerate() {
        factor *= &m_q;
        ensure(*c == b.scale(&factor), || {
            format!("tr(Res^{}) does not scale by m^{}", i + 1, i + 1)
        })?;
    }
    // coefficient of t^(r - k) in det(t - mA) is m^k times that of det(t - A)
    let (p, q) = (a.char_poly(), pulled.char_poly());
    let mut power = Rational::one();
    for k in 0..=r {
        let expected = p
            .coeffs()
            .get(r - k)
            .map_or_else(GaussianRational::zero, |c| c.scale(&power));
        let found = q
            .coeffs()
            .get(r - k)
            .cloned()
            .unwrap_or_else(GaussianRational::zero);
        ensure(found == expected, || {
            format!("char poly coefficient of t^{}", r - k)
        })?;
        power *= &m_q;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifierConfig {
        VerifierConfig {
            trials: 20,
            ..VerifierConfig::default()
        }
    }

    #[test]
    fn every_property_passes_on_a_small_run() {
        let report = verify(&small()).unwrap();
        assert!(report.all_passed(), "{}", report.render());
        assert_eq!(report.properties.len(), PROPERTIES.len());
    }

    #[test]
    fn generated_scenarios_round_trip() {
        let cfg = small();
        for name in property_names() {
            for trial in 0..5 {
                let file = generate(name, &cfg, trial).unwrap();
                let text = file.to_json();
                let again = ScenarioFile::from_json(&text).unwrap();
                assert_eq!(again, file, "{name} trial {trial}");
                let scenario = Scenario::resolve(again).unwrap();
                assert_eq!(evaluate(&scenario).unwrap(), Ok(()), "{name} trial {trial}");
            }
        }
    }

    #[test]
    fn rejects_zero_bounds() {
        let cfg = VerifierConfig {
            max_rank: 0,
            ..VerifierConfig::default()
        };
        assert!(verify(&cfg).is_err());
    }

    #[test]
    fn solve_genus() {
        // double cover of P^1 branched at two points is P^1
        assert_eq!(solve_source_genus(0, 2, &[vec![2], vec![2]]), Some(0));
        assert_eq!(solve_source_genus(0, 2, &[vec![2]]), None);
        assert_eq!(
            solve_source_genus(0, 2, &[vec![2], vec![2], vec![2], vec![2]]),
            Some(1)
        );
        assert_eq!(solve_source_genus(0, 3, &[vec![2, 1], vec![2, 1]]), None);
    }
}
