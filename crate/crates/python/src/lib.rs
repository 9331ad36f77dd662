//! Python bindings for `parcalc`.
//!
//! Rationals cross the boundary as strings (`"p/q"`); anything whose `str()`
//! parses as a rational is accepted on input, so `int` and
//! `fractions.Fraction` work too. Gaussian rationals use the `a+b i` form.

use std::collections::BTreeMap;

use parcalc::functors;
use parcalc::naht;
use parcalc::rational::{format_rational, parse_rational};
use parcalc::verify::VerifierConfig;
use parcalc::{
    run_command, Command, CommandArgs, CoveringMap, FieldKind, GaussianRational, MarkedCurve,
    ParaLine, ParabolicChar, Point, Preimage, Rational, Scenario, SplitParabolicBundle, Weight,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(parcalc, ParcalcError, PyValueError);

fn py_err(e: parcalc::Error) -> PyErr {
    ParcalcError::new_err(e.to_string())
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&obj.str()?.to_cow()?).map_err(py_err)
}

fn weight(obj: &Bound<'_, PyAny>) -> PyResult<Weight> {
    Weight::new(rational(obj)?).map_err(py_err)
}

fn field_kind(text: &str) -> PyResult<FieldKind> {
    match text {
        "higgs" => Ok(FieldKind::Higgs),
        "connection" => Ok(FieldKind::Connection),
        other => Err(ParcalcError::new_err(format!(
            "unknown field kind `{other}` (expected higgs or connection)"
        ))),
    }
}

fn loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "MarkedCurve", module = "parcalc", frozen, from_py_object)]
#[derive(Clone)]
struct PyCurve(MarkedCurve);

#[pymethods]
impl PyCurve {
    #[new]
    #[pyo3(signature = (genus, points = Vec::new()))]
    fn new(genus: u32, points: Vec<String>) -> PyResult<Self> {
        MarkedCurve::new(genus, points.into_iter().map(Point::new))
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn genus(&self) -> u32 {
        self.0.genus()
    }

    #[getter]
    fn points(&self) -> Vec<String> {
        self.0.points().iter().map(|p| p.0.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "MarkedCurve(genus={}, points={:?})",
            self.0.genus(),
            self.points()
        )
    }
}

#[pyclass(name = "CoveringMap", module = "parcalc", frozen, from_py_object)]
#[derive(Clone)]
struct PyCovering(CoveringMap);

#[pymethods]
impl PyCovering {
    /// `points` maps a source label to `(target label, multiplicity)`.
    /// Construction does not validate; call `validate()`.
    #[new]
    fn new(
        source: &PyCurve,
        target: &PyCurve,
        degree: u32,
        points: BTreeMap<String, (String, u32)>,
    ) -> Self {
        let point_map = points
            .into_iter()
            .map(|(s, (t, m))| {
                let image = Preimage {
                    target: Point::new(t),
                    multiplicity: m,
                };
                (Point::new(s), image)
            })
            .collect();
        Self(CoveringMap::unchecked(
            source.0.clone(),
            target.0.clone(),
            degree,
            point_map,
        ))
    }

    #[staticmethod]
    fn identity(curve: &PyCurve) -> Self {
        Self(CoveringMap::identity(curve.0.clone()))
    }

    /// `None` when the profile is a valid covering, otherwise the first
    /// violated condition.
    fn validate(&self) -> Option<String> {
        self.0.validate().err().map(|v| v.to_string())
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    #[getter]
    fn source(&self) -> PyCurve {
        PyCurve(self.0.source().clone())
    }

    #[getter]
    fn target(&self) -> PyCurve {
        PyCurve(self.0.target().clone())
    }

    #[getter]
    fn points(&self) -> BTreeMap<String, (String, u32)> {
        self.0
            .point_map()
            .iter()
            .map(|(s, pre)| (s.0.clone(), (pre.target.0.clone(), pre.multiplicity)))
            .collect()
    }

    fn is_galois_profile(&self) -> bool {
        self.0.is_galois_profile()
    }

    /// `self` followed by `f`.
    fn then(&self, f: &PyCovering) -> PyResult<Self> {
        self.0.compose(&f.0).map(Self).map_err(py_err)
    }
}

#[pyclass(name = "ParaLine", module = "parcalc", frozen, from_py_object)]
#[derive(Clone)]
struct PyLine(ParaLine);

#[pymethods]
impl PyLine {
    #[new]
    #[pyo3(signature = (curve, degree, weights = BTreeMap::new()))]
    fn new(
        curve: &PyCurve,
        degree: i64,
        weights: BTreeMap<String, Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let weights = weights
            .iter()
            .map(|(p, w)| Ok((Point::new(p.as_str()), weight(w)?)))
            .collect::<PyResult<Vec<_>>>()?;
        ParaLine::new(curve.0.clone(), degree, weights)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn degree(&self) -> i64 {
        self.0.degree()
    }

    #[getter]
    fn weights(&self) -> BTreeMap<String, String> {
        self.0
            .weights()
            .iter()
            .map(|(p, w)| (p.0.clone(), w.to_string()))
            .collect()
    }

    fn par_deg(&self) -> String {
        format_rational(&self.0.par_deg())
    }

    fn dual(&self) -> Self {
        Self(self.0.dual())
    }

    fn tensor(&self, other: &PyLine) -> PyResult<Self> {
        self.0.tensor(&other.0).map(Self).map_err(py_err)
    }
}

#[pyclass(name = "SplitBundle", module = "parcalc", frozen, from_py_object)]
#[derive(Clone)]
struct PySplit(SplitParabolicBundle);

#[pymethods]
impl PySplit {
    #[new]
    fn new(lines: Vec<PyLine>) -> PyResult<Self> {
        SplitParabolicBundle::new(lines.into_iter().map(|l| l.0).collect())
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    #[getter]
    fn summands(&self) -> Vec<PyLine> {
        self.0.summands().iter().cloned().map(PyLine).collect()
    }

    fn par_deg(&self) -> String {
        format_rational(&self.0.par_deg())
    }

    fn slope(&self) -> String {
        format_rational(&self.0.slope())
    }

    fn is_semistable(&self) -> bool {
        self.0.is_semistable()
    }

    fn is_stable(&self) -> bool {
        self.0.is_stable()
    }

    fn is_polystable(&self) -> bool {
        self.0.is_polystable()
    }

    fn char(&self) -> PyChar {
        PyChar(self.0.char())
    }

    fn end_char(&self) -> PyChar {
        PyChar(self.0.end_char())
    }
}

#[pyclass(name = "ParabolicChar", module = "parcalc", frozen, from_py_object)]
#[derive(Clone)]
struct PyChar(ParabolicChar);

#[pymethods]
impl PyChar {
    #[new]
    #[pyo3(signature = (curve, rank, degree, weights = BTreeMap::new()))]
    fn new(
        curve: &PyCurve,
        rank: usize,
        degree: i64,
        weights: BTreeMap<String, Vec<Bound<'_, PyAny>>>,
    ) -> PyResult<Self> {
        let weights = weights
            .iter()
            .map(|(p, ws)| {
                let ws = ws.iter().map(weight).collect::<PyResult<Vec<_>>>()?;
                Ok((Point::new(p.as_str()), ws))
            })
            .collect::<PyResult<BTreeMap<_, _>>>()?;
        ParabolicChar::from_parts(curve.0.clone(), rank, degree, weights)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    #[getter]
    fn degree(&self) -> i64 {
        self.0.degree()
    }

    #[getter]
    fn curve(&self) -> PyCurve {
        PyCurve(self.0.curve().clone())
    }

    /// Nonzero weight multisets, sorted, keyed by point.
    #[getter]
    fn weights(&self) -> BTreeMap<String, Vec<String>> {
        self.0
            .weights()
            .iter()
            .map(|(p, ws)| (p.0.clone(), ws.iter().map(Weight::to_string).collect()))
            .collect()
    }

    fn par_deg(&self) -> String {
        format_rational(&self.0.par_deg())
    }

    fn slope(&self) -> String {
        format_rational(&self.0.slope())
    }

    fn same_data(&self, other: &PyChar) -> bool {
        self.0.same_data(&other.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "ParabolicChar(rank={}, degree={}, weights={:?})",
            self.0.rank(),
            self.0.degree(),
            self.weights()
        )
    }
}

#[pyclass(name = "SpectralPoint", module = "parcalc", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPoint(naht::SpectralPoint);

#[pymethods]
impl PyPoint {
    #[new]
    #[pyo3(signature = (kind, jump, eigenvalue, multiplicity = 1))]
    fn new(
        kind: &str,
        jump: &Bound<'_, PyAny>,
        eigenvalue: &Bound<'_, PyAny>,
        multiplicity: u32,
    ) -> PyResult<Self> {
        let eigenvalue = GaussianRational::parse(&eigenvalue.str()?.to_cow()?).map_err(py_err)?;
        naht::SpectralPoint::new(field_kind(kind)?, rational(jump)?, eigenvalue, multiplicity)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind.to_string()
    }

    #[getter]
    fn jump(&self) -> String {
        format_rational(&self.0.jump)
    }

    #[getter]
    fn eigenvalue(&self) -> String {
        self.0.eigenvalue.to_string()
    }

    #[getter]
    fn multiplicity(&self) -> u32 {
        self.0.multiplicity
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralPoint({:?}, {:?}, {:?}, {})",
            self.kind(),
            self.jump(),
            self.eigenvalue(),
            self.0.multiplicity
        )
    }
}

fn points(pts: Vec<naht::SpectralPoint>) -> Vec<PyPoint> {
    pts.into_iter().map(PyPoint).collect()
}

fn unwrap_points(pts: &[PyPoint]) -> Vec<naht::SpectralPoint> {
    pts.iter().map(|p| p.0.clone()).collect()
}

#[pyclass(name = "Scenario", module = "parcalc", frozen)]
struct PyScenario(Scenario);

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Scenario::load(path).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Scenario::from_json(text).map(Self).map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.0.file.to_json()
    }

    fn covering(&self, name: &str) -> PyResult<PyCovering> {
        self.0
            .covering(name)
            .cloned()
            .map(PyCovering)
            .map_err(py_err)
    }

    fn char(&self, name: &str) -> PyResult<PyChar> {
        Ok(PyChar(self.0.bundle(name).map_err(py_err)?.char()))
    }

    /// Runs a `pcalc` command and returns its JSON report as a dict.
    #[pyo3(signature = (
        command, names = Vec::new(), maps = Vec::new(), table = None, m = Vec::new(),
        pullback = None, pushforward = false,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn run<'py>(
        &self,
        py: Python<'py>,
        command: &str,
        names: Vec<String>,
        maps: Vec<String>,
        table: Option<String>,
        m: Vec<u32>,
        pullback: Option<u32>,
        pushforward: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let command: Command = command.parse().map_err(py_err)?;
        let args = CommandArgs {
            names,
            maps,
            table,
            m,
            pullback,
            pushforward,
        };
        let report = run_command(&self.0, command, &args).map_err(py_err)?;
        loads(py, &report.to_json())
    }
}

#[pyfunction]
fn pullback(f: &PyCovering, c: &PyChar) -> PyResult<PyChar> {
    functors::pullback_char(&f.0, &c.0)
        .map(PyChar)
        .map_err(py_err)
}

#[pyfunction]
fn pullback_bundle(f: &PyCovering, e: &PySplit) -> PyResult<PySplit> {
    functors::pullback_split(&f.0, &e.0)
        .map(PySplit)
        .map_err(py_err)
}

#[pyfunction]
fn direct_image(phi: &PyCovering, c: &PyChar) -> PyResult<PyChar> {
    functors::direct_image_char(&phi.0, &c.0)
        .map(|r| PyChar(r.char))
        .map_err(py_err)
}

#[pyfunction]
fn higgs_to_conn(p: &PyPoint) -> PyResult<PyPoint> {
    naht::higgs_to_conn(&p.0).map(PyPoint).map_err(py_err)
}

#[pyfunction]
fn conn_to_higgs(p: &PyPoint) -> PyResult<PyPoint> {
    naht::conn_to_higgs(&p.0).map(PyPoint).map_err(py_err)
}

#[pyfunction]
fn pullback_spectrum(kind: &str, m: u32, pts: Vec<PyPoint>) -> PyResult<Vec<PyPoint>> {
    naht::pullback_spectrum(field_kind(kind)?, m, &unwrap_points(&pts))
        .map(points)
        .map_err(py_err)
}

/// `fiber` lists `(multiplicity, points)` for each source point over the target.
#[pyfunction]
fn direct_image_spectrum(kind: &str, fiber: Vec<(u32, Vec<PyPoint>)>) -> PyResult<Vec<PyPoint>> {
    let fiber: Vec<_> = fiber
        .iter()
        .map(|(m, pts)| (*m, unwrap_points(pts)))
        .collect();
    naht::direct_image_spectrum(field_kind(kind)?, &fiber)
        .map(points)
        .map_err(py_err)
}

#[pyfunction]
fn canonical(pts: Vec<PyPoint>) -> Vec<PyPoint> {
    points(naht::canonical(&unwrap_points(&pts)))
}

/// Runs the randomized verifier and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (
    seed = 0, trials = 100, max_rank = 3, max_degree = 3, max_multiplicity = 4,
    weight_denominator_bound = 6, properties = Vec::new(),
))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    seed: u64,
    trials: usize,
    max_rank: usize,
    max_degree: i64,
    max_multiplicity: u32,
    weight_denominator_bound: i64,
    properties: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = VerifierConfig {
        seed,
        trials,
        max_rank,
        max_degree,
        max_multiplicity,
        weight_denominator_bound,
    };
    let names: Vec<&str> = properties.iter().map(String::as_str).collect();
    let report = py
        .detach(|| parcalc::verify::verify_with(&config, &Default::default(), &names))
        .map_err(py_err)?;
    loads(py, &report.to_json())
}

#[pyfunction]
fn property_names() -> Vec<&'static str> {
    parcalc::verify::property_names()
}

#[pymodule]
#[pyo3(name = "parcalc")]
fn parcalc_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ParcalcError", m.py().get_type::<ParcalcError>())?;
    m.add_class::<PyCurve>()?;
    m.add_class::<PyCovering>()?;
    m.add_class::<PyLine>()?;
    m.add_class::<PySplit>()?;
    m.add_class::<PyChar>()?;
    m.add_class::<PyPoint>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(pullback, m)?)?;
    m.add_function(wrap_pyfunction!(pullback_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(direct_image, m)?)?;
    m.add_function(wrap_pyfunction!(higgs_to_conn, m)?)?;
    m.add_function(wrap_pyfunction!(conn_to_higgs, m)?)?;
    m.add_function(wrap_pyfunction!(pullback_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(direct_image_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(property_names, m)?)?;
    Ok(())
}
