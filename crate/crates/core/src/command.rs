//! Commands run against a loaded [`Scenario`], producing a report in table
//! and JSON form.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::curve::CoveringMap;
use crate::error::{Error, Result};
use crate::functors::{direct_image_char, pullback_char, pullback_split};
use crate::matrix::{Matrix, Polynomial};
use crate::naht::{
    canonical, conn_to_higgs, direct_image_spectrum, higgs_to_conn, pullback_spectrum,
    SpectralPoint,
};
use crate::parabolic::{Flag, ParabolicChar, SplitParabolicBundle};
use crate::rational::format_rational;
use crate::scenario::{Bundle, Scenario, ScenarioFile};
use crate::spectral::{
    check_parabolic, check_residual, check_strongly_parabolic, direct_image_residue_conn,
    direct_image_residue_higgs, hitchin_traces, pullback_residue_conn,
    pullback_residue_higgs_flagged, triangular_eigenvalues, FieldKind, LocalSpectralField,
};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pullback,
    Pushforward,
    Degree,
    Slope,
    Stability,
    Residue,
    Naht,
    Compose,
    Validate,
    Check,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pullback" => Command::Pullback,
            "pushforward" => Command::Pushforward,
            "degree" => Command::Degree,
            "slope" => Command::Slope,
            "stability" => Command::Stability,
            "residue" => Command::Residue,
            "naht" => Command::Naht,
            "compose" => Command::Compose,
            "validate" => Command::Validate,
            "check" => Command::Check,
            other => return Err(Error::Usage(format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommandArgs {
    /// Objects (`--name`), in order.
    pub names: Vec<String>,
    /// Coverings (`--map`), innermost first for `compose`.
    pub maps: Vec<String>,
    /// `table1` or `table2` for `naht`.
    pub table: Option<String>,
    /// Local multiplicities for `naht`.
    pub m: Vec<u32>,
    /// `residue`: pull back along a point of this multiplicity.
    pub pullback: Option<u32>,
    /// `residue`: take the direct-image residue.
    pub pushforward: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    PropertyFailed,
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub status: Status,
    /// Human-readable `(label, value)` rows; values may span lines.
    pub rows: Vec<(String, String)>,
    pub result: Value,
    /// Objects produced by the command, as a loadable scenario.
    pub scenario: Option<ScenarioFile>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            status: Status::Ok,
            rows: Vec::new(),
            result: Value::Null,
            scenario: None,
        }
    }

    fn row(&mut self, label: impl Into<String>, value: impl Into<String>) {
        self.rows.push((label.into(), value.into()));
    }

    pub fn exit_status(&self) -> u8 {
        match self.status {
            Status::Ok => 0,
            Status::PropertyFailed => 1,
            Status::Invalid => 3,
        }
    }

    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|(l, _)| l.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (label, value) in &self.rows {
            let mut lines = value.lines();
            let first = lines.next().unwrap_or("");
            let pad = width - label.chars().count();
            let _ = writeln!(out, "{label}{}  {first}", " ".repeat(pad));
            for line in lines {
                let _ = writeln!(out, "{}  {line}", " ".repeat(width));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut value = json!({
            "command": self.command,
            "status": self.status,
            "result": self.result,
        });
        if let Some(s) = &self.scenario {
            value["scenario"] = serde_json::to_value(s).expect("scenario serializes");
        }
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

fn one<'a>(list: &'a [String], what: &str) -> Result<&'a str> {
    match list {
        [only] => Ok(only),
        _ => Err(Error::Usage(format!(
            "expected exactly one {what}, got {}",
            list.len()
        ))),
    }
}

pub fn run_command(scenario: &Scenario, command: Command, args: &CommandArgs) -> Result<Report> {
    match command {
        Command::Pullback => pullback(scenario, args),
        Command::Pushforward => pushforward(scenario, args),
        Command::Degree => degree(scenario, args),
        Command::Slope => slope(scenario, args),
        Command::Stability => stability(scenario, args),
        Command::Residue => residue(scenario, args),
        Command::Naht => naht(scenario, args),
        Command::Compose => compose(scenario, args),
        Command::Validate => Ok(validate(scenario)),
        Command::Check => check(scenario),
    }
}

fn weights_text(c: &ParabolicChar) -> String {
    if c.weights().is_empty() {
        return "none".into();
    }
    c.weights()
        .iter()
        .map(|(p, ws)| {
            let ws: Vec<String> = ws.iter().map(ToString::to_string).collect();
            format!("{p}: {}", ws.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn char_rows(report: &mut Report, c: &ParabolicChar) {
    report.row("rank", c.rank().to_string());
    report.row("degree", c.degree().to_string());
    report.row("par-deg", format_rational(&c.par_deg()));
    report.row("slope", format_rational(&c.slope()));
    report.row("weights", weights_text(c));
}

fn char_json(c: &ParabolicChar) -> Value {
    let weights: serde_json::Map<String, Value> = c
        .weights()
        .iter()
        .map(|(p, ws)| {
            (
                p.0.clone(),
                ws.iter().map(|w| Value::from(w.to_string())).collect(),
            )
        })
        .collect();
    json!({
        "rank": c.rank(),
        "degree": c.degree(),
        "par_deg": format_rational(&c.par_deg()),
        "slope": format_rational(&c.slope()),
        "weights": weights,
    })
}

fn require_curve(found: &str, expected: &str, role: &str) -> Result<()> {
    if found != expected {
        return Err(Error::CurveMismatch(format!(
            "bundle lives on `{found}`, but the covering's {role} is `{expected}`"
        )));
    }
    Ok(())
}

fn pullback(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let map_name = one(&args.maps, "--map")?;
    let name = one(&args.names, "--name")?;
    let f = s.covering(map_name)?;
    let (source, target) = s.covering_curves(map_name)?;
    require_curve(s.bundle_curve(name)?, target, "target")?;

    let result_name = format!("{map_name}*{name}");
    let mut report = Report::new("pullback");
    let mut file = ScenarioFile::default();
    let c = match s.bundle(name)? {
        Bundle::Split(e) => {
            let pulled = pullback_split(f, e)?;
            file.add_curve(source, pulled.curve());
            file.add_split(&result_name, source, &pulled);
            pulled.char()
        }
        Bundle::Char(c) => {
            let pulled = pullback_char(f, c)?;
            file.add_curve(source, pulled.curve());
            file.add_char(&result_name, source, &pulled);
            pulled
        }
    };
    report.row("bundle", format!("{result_name} on {source}"));
    char_rows(&mut report, &c);
    report.result = char_json(&c);
    report.scenario = Some(file);
    Ok(report)
}

fn pushforward(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let map_name = one(&args.maps, "--map")?;
    let name = one(&args.names, "--name")?;
    let phi = s.covering(map_name)?;
    let (source, target) = s.covering_curves(map_name)?;
    require_curve(s.bundle_curve(name)?, source, "source")?;

    let pushed = direct_image_char(phi, &s.bundle(name)?.char())?;
    let result_name = format!("{map_name}_*{name}");
    let mut report = Report::new("pushforward");
    report.row("bundle", format!("{result_name} on {target}"));
    char_rows(&mut report, &pushed.char);

    let mut breakdown = serde_json::Map::new();
    for (t, contributions) in &pushed.breakdown {
        let mut lines = Vec::new();
        let mut entries = Vec::new();
        for c in contributions {
            let source_ws: Vec<String> = c.source_weights.iter().map(ToString::to_string).collect();
            let produced: Vec<String> = c.produced.iter().map(ToString::to_string).collect();
            lines.push(format!(
                "{} (m={}) [{}] -> [{}]",
                c.source,
                c.multiplicity,
                source_ws.join(", "),
                produced.join(", ")
            ));
            entries.push(json!({
                "source": c.source.0,
                "multiplicity": c.multiplicity,
                "source_weights": source_ws,
                "produced": produced,
            }));
        }
        report.row(format!("over {t}"), lines.join("\n"));
        breakdown.insert(t.0.clone(), Value::Array(entries));
    }

    let mut result = char_json(&pushed.char);
    result["breakdown"] = Value::Object(breakdown);
    report.result = result;
    let mut file = ScenarioFile::default();
    file.add_curve(target, pushed.char.curve());
    file.add_char(&result_name, target, &pushed.char);
    report.scenario = Some(file);
    Ok(report)
}

fn degree(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let mut report = Report::new("degree");
    match (args.names.as_slice(), args.maps.as_slice()) {
        ([name], []) => {
            let c = s.bundle(name)?.char();
            report.row("par-deg", format_rational(&c.par_deg()));
            report.row("degree", c.degree().to_string());
            report.row("rank", c.rank().to_string());
            report.result = json!({
                "par_deg": format_rational(&c.par_deg()),
                "degree": c.degree(),
                "rank": c.rank(),
            });
        }
        ([], [map]) => {
            let f = s.covering(map)?;
            let r = f.ramification_divisor();
            report.row("degree", f.degree().to_string());
            report.row("ramification degree", r.degree().to_string());
            report.result = json!({ "degree": f.degree(), "ramification_degree": r.degree() });
        }
        _ => return Err(Error::Usage("degree takes one --name or one --map".into())),
    }
    Ok(report)
}

fn slope(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let c = s.bundle(one(&args.names, "--name")?)?.char();
    let mut report = Report::new("slope");
    report.row("slope", format_rational(&c.slope()));
    report.result = json!({ "slope": format_rational(&c.slope()) });
    Ok(report)
}

fn split_arg<'a>(s: &'a Scenario, name: &str) -> Result<&'a SplitParabolicBundle> {
    match s.bundle(name)? {
        Bundle::Split(e) => Ok(e),
        Bundle::Char(_) => Err(Error::KindMismatch {
            expected: "split bundle".into(),
            found: "characteristic data".into(),
        }),
    }
}

fn stability(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let e = split_arg(s, one(&args.names, "--name")?)?;
    let mut report = Report::new("stability");
    report.row("slope", format_rational(&e.slope()));
    report.row("semistable", e.is_semistable().to_string());
    report.row("stable", e.is_stable().to_string());
    report.row("polystable", e.is_polystable().to_string());
    let summand_slopes: Vec<String> = e
        .summands()
        .iter()
        .map(|l| format_rational(&l.par_deg()))
        .collect();
    report.row("summand par-degs", summand_slopes.join(", "));
    report.result = json!({
        "slope": format_rational(&e.slope()),
        "semistable": e.is_semistable(),
        "stable": e.is_stable(),
        "polystable": e.is_polystable(),
        "summand_par_degs": summand_slopes,
    });
    Ok(report)
}

fn matrix_json(m: &Matrix) -> Value {
    m.rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| Value::from(v.to_string()))
                .collect::<Value>()
        })
        .collect()
}

fn flag_text(flag: &Flag) -> String {
    flag.steps()
        .iter()
        .map(|s| format!("({}, {})", s.weight, s.multiplicity))
        .collect::<Vec<_>>()
        .join(" ")
}

fn flag_json(flag: &Flag) -> Value {
    flag.steps()
        .iter()
        .map(|s| json!([s.weight.to_string(), s.multiplicity]))
        .collect()
}

fn poly_text(p: &Polynomial) -> String {
    let coeffs: Vec<String> = p.coeffs().iter().map(ToString::to_string).collect();
    format!("[{}]", coeffs.join(", "))
}

fn residue_rows(report: &mut Report, kind: FieldKind, res: &Matrix, flag: &Flag) -> Result<Value> {
    let parabolic = check_parabolic(res, flag)?;
    let strongly = check_strongly_parabolic(res, flag)?;
    let residual = check_residual(res, flag)?;
    report.row("kind", kind.to_string());
    report.row("flag", flag_text(flag));
    report.row("residue", res.to_string());
    report.row("parabolic", parabolic.to_string());
    report.row("strongly parabolic", strongly.to_string());
    report.row("residual", residual.to_string());
    let char_poly = res.char_poly();
    report.row("char poly (low to high)", poly_text(&char_poly));
    let mut value = json!({
        "kind": kind,
        "flag": flag_json(flag),
        "residue": matrix_json(res),
        "parabolic": parabolic,
        "strongly_parabolic": strongly,
        "residual": residual,
        "char_poly": char_poly.coeffs().iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    if let Some(eigs) = triangular_eigenvalues(res) {
        let eigs: Vec<String> = eigs.iter().map(ToString::to_string).collect();
        report.row("eigenvalues", eigs.join(", "));
        value["eigenvalues"] = json!(eigs);
    }
    if kind == FieldKind::Higgs {
        let traces: Vec<String> = hitchin_traces(res, res.size())
            .iter()
            .map(ToString::to_string)
            .collect();
        report.row("tr(Res^i)", traces.join(", "));
        value["hitchin_traces"] = json!(traces);
    }
    Ok(value)
}

fn residue(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let field: &LocalSpectralField = s.field(one(&args.names, "--name")?)?;
    let mut report = Report::new("residue");
    let (res, flag, operation) = match (args.pullback, args.pushforward) {
        (None, false) => (
            field.residue().clone(),
            field.flag().clone(),
            "residue".to_owned(),
        ),
        (Some(m), false) => {
            if m == 0 {
                return Err(Error::Usage("--pullback needs a multiplicity >= 1".into()));
            }
            let (res, flag) = match field.kind() {
                FieldKind::Higgs => {
                    pullback_residue_higgs_flagged(m, field.residue(), field.flag())?
                }
                FieldKind::Connection => pullback_residue_conn(m, field.residue(), field.flag())?,
            };
            (res, flag, format!("pullback along multiplicity {m}"))
        }
        (None, true) => {
            let pushed = match field.kind() {
                FieldKind::Higgs => direct_image_residue_higgs(field)?,
                FieldKind::Connection => direct_image_residue_conn(field)?,
            };
            let operation = format!("direct image along multiplicity {}", field.order());
            (pushed.sorted_matrix(), pushed.flag, operation)
        }
        (Some(_), true) => {
            return Err(Error::Usage(
                "--pullback and --pushforward are exclusive".into(),
            ));
        }
    };
    report.row("operation", operation.clone());
    let mut value = residue_rows(&mut report, field.kind(), &res, &flag)?;
    value["operation"] = json!(operation);
    report.result = value;
    Ok(report)
}

fn spectrum_text(pts: &[SpectralPoint]) -> String {
    pts.iter()
        .map(|p| {
            format!(
                "jump {} eigenvalue {} x{}",
                format_rational(&p.jump),
                p.eigenvalue,
                p.multiplicity
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn spectrum_json(pts: &[SpectralPoint]) -> Value {
    pts.iter()
        .map(|p| {
            json!({
                "kind": p.kind,
                "jump": format_rational(&p.jump),
                "eigenvalue": p.eigenvalue.to_string(),
                "multiplicity": p.multiplicity,
            })
        })
        .collect()
}

fn correspond(pts: &[SpectralPoint]) -> Result<Vec<SpectralPoint>> {
    pts.iter()
        .map(|p| match p.kind {
            FieldKind::Higgs => higgs_to_conn(p),
            FieldKind::Connection => conn_to_higgs(p),
        })
        .collect()
}

fn spectrum_kind(s: &Scenario, name: &str) -> Result<FieldKind> {
    s.spectrum(name)?;
    Ok(s.file.spectra[name].kind)
}

fn naht(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let table = args
        .table
        .as_deref()
        .ok_or_else(|| Error::Usage("naht needs `table1` or `table2`".into()))?;
    let mut report = Report::new("naht");
    report.row("table", table);
    match table {
        "table1" => {
            let name = one(&args.names, "--name")?;
            let kind = spectrum_kind(s, name)?;
            let pts = s.spectrum(name)?;
            let image = canonical(&correspond(pts)?);
            let other = match kind {
                FieldKind::Higgs => FieldKind::Connection,
                FieldKind::Connection => FieldKind::Higgs,
            };
            report.row(kind.to_string(), spectrum_text(&canonical(pts)));
            report.row(other.to_string(), spectrum_text(&image));
            let mut value = json!({ "input": spectrum_json(pts), "image": spectrum_json(&image) });
            match args.m.as_slice() {
                [] => {}
                [m] => {
                    let pulled_then = canonical(&correspond(&pullback_spectrum(kind, *m, pts)?)?);
                    let then_pulled = canonical(&pullback_spectrum(other, *m, &image)?);
                    let commutes = pulled_then == then_pulled;
                    report.row(
                        format!("{other} pullback (m={m})"),
                        spectrum_text(&then_pulled),
                    );
                    report.row("square commutes", commutes.to_string());
                    value["pullback"] = spectrum_json(&then_pulled);
                    value["commutes"] = json!(commutes);
                    if !commutes {
                        report.status = Status::PropertyFailed;
                    }
                }
                _ => return Err(Error::Usage("table1 takes at most one --m".into())),
            }
            report.result = value;
        }
        "table2" => {
            if args.names.is_empty() || args.names.len() != args.m.len() {
                return Err(Error::Usage("table2 needs one --m per --name".into()));
            }
            let mut kind: Option<FieldKind> = None;
            let mut fiber = Vec::new();
            let mut image_fiber = Vec::new();
            for (name, &m) in args.names.iter().zip(&args.m) {
                let k = spectrum_kind(s, name)?;
                if let Some(prev) = kind {
                    if prev != k {
                        return Err(Error::KindMismatch {
                            expected: prev.to_string(),
                            found: k.to_string(),
                        });
                    }
                }
                kind = Some(k);
                let pts = s.spectrum(name)?.to_vec();
                image_fiber.push((m, correspond(&pts)?));
                fiber.push((m, pts));
            }
            let kind = kind.expect("at least one spectrum");
            let other = match kind {
                FieldKind::Higgs => FieldKind::Connection,
                FieldKind::Connection => FieldKind::Higgs,
            };
            let pushed = canonical(&direct_image_spectrum(kind, &fiber)?);
            let via_pushed = canonical(&correspond(&pushed)?);
            let via_image = canonical(&direct_image_spectrum(other, &image_fiber)?);
            let commutes = via_pushed == via_image;
            report.row(format!("{kind} direct image"), spectrum_text(&pushed));
            report.row(format!("{other} direct image"), spectrum_text(&via_image));
            report.row("square commutes", commutes.to_string());
            if !commutes {
                report.status = Status::PropertyFailed;
            }
            report.result = json!({
                "direct_image": spectrum_json(&pushed),
                "image_direct_image": spectrum_json(&via_image),
                "commutes": commutes,
            });
        }
        other => return Err(Error::Usage(format!("unknown table `{other}`"))),
    }
    Ok(report)
}

fn covering_json(f: &CoveringMap) -> Value {
    let points: serde_json::Map<String, Value> = f
        .point_map()
        .iter()
        .map(|(p, pre)| {
            (
                p.0.clone(),
                json!({ "target": pre.target.0, "multiplicity": pre.multiplicity }),
            )
        })
        .collect();
    json!({ "degree": f.degree(), "points": points })
}

fn compose(s: &Scenario, args: &CommandArgs) -> Result<Report> {
    let [g_name, f_name] = args.maps.as_slice() else {
        return Err(Error::Usage(
            "compose takes --map g --map f (g applied first)".into(),
        ));
    };
    let (g, f) = (s.covering(g_name)?, s.covering(f_name)?);
    let (g_source, g_target) = s.covering_curves(g_name)?;
    let (f_source, f_target) = s.covering_curves(f_name)?;
    if g_target != f_source {
        return Err(Error::CurveMismatch(format!(
            "`{g_name}` maps to `{g_target}` but `{f_name}` starts at `{f_source}`"
        )));
    }
    let composite = g.compose(f)?;
    let name = format!("{f_name}∘{g_name}");
    let mut report = Report::new("compose");
    report.row("covering", format!("{name}: {g_source} -> {f_target}"));
    report.row("degree", composite.degree().to_string());
    let points: Vec<String> = composite
        .point_map()
        .iter()
        .map(|(p, pre)| format!("{p} -> {} (m={})", pre.target, pre.multiplicity))
        .collect();
    report.row(
        "points",
        if points.is_empty() {
            "none".into()
        } else {
            points.join("\n")
        },
    );
    report.result = covering_json(&composite);
    let mut file = ScenarioFile::default();
    file.add_curve(g_source, composite.source());
    file.add_curve(f_target, composite.target());
    file.add_covering(&name, g_source, f_target, &composite);
    report.scenario = Some(file);
    Ok(report)
}

fn validate(s: &Scenario) -> Report {
    let mut report = Report::new("validate");
    report.row(
        "objects",
        format!(
            "{} curves, {} coverings, {} bundles, {} spectral fields, {} spectra: valid",
            s.curves.len(),
            s.coverings.len(),
            s.bundles.len(),
            s.spectral.len(),
            s.spectra.len()
        ),
    );
    let mut profiles = serde_json::Map::new();
    for (name, profile) in &s.profiles {
        let verdict = match profile.validate() {
            Ok(()) => "valid".to_owned(),
            Err(v) => {
                report.status = Status::Invalid;
                format!("violates {v}")
            }
        };
        report.row(format!("profile {name}"), verdict.clone());
        profiles.insert(name.clone(), Value::from(verdict));
    }
    report.result = json!({ "valid": report.status == Status::Ok, "profiles": profiles });
    report
}

fn check(s: &Scenario) -> Result<Report> {
    let property = s
        .file
        .check
        .as_ref()
        .map(|c| c.property.clone())
        .ok_or_else(|| Error::Usage("scenario has no `check` section".into()))?;
    let outcome = verify::evaluate(s)?;
    let mut report = Report::new("check");
    report.row("property", property.clone());
    match &outcome {
        Ok(()) => report.row("result", "pass"),
        Err(message) => {
            report.status = Status::PropertyFailed;
            report.row("result", "FAIL");
            report.row("reason", message.clone());
        }
    }
    report.result = json!({
        "property": property,
        "passed": outcome.is_ok(),
        "reason": outcome.err(),
    });
    Ok(report)
}
