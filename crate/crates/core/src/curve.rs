//! Marked curves and ramification profiles of coverings.
//!
//! Curves are purely combinatorial: a genus and a list of labelled marked
//! points. A covering is described by its degree and a partial map from
//! source points to `(target point, local multiplicity)`; every source point
//! that is not listed is unramified. Whenever one point of a fiber is listed
//! the whole fiber must be listed, so fibers over listed target points are
//! always complete.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque label of a point on a curve.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub String);

impl Point {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Point {
    fn from(label: &str) -> Self {
        Self::new(label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedCurve {
    genus: u32,
    points: Vec<Point>,
}

impl MarkedCurve {
    pub fn new(genus: u32, points: impl IntoIterator<Item = Point>) -> Result<Self> {
        let points: Vec<Point> = points.into_iter().collect();
        let mut seen = BTreeSet::new();
        for p in &points {
            if !seen.insert(p) {
                return Err(Error::InvalidValue(format!("duplicate point label `{p}`")));
            }
        }
        Ok(Self { genus, points })
    }

    pub fn unmarked(genus: u32) -> Self {
        Self {
            genus,
            points: Vec::new(),
        }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.contains(p)
    }

    /// The same curve with `extra` appended to the marked points (labels
    /// already present are skipped).
    pub fn with_points<'a>(&self, extra: impl IntoIterator<Item = &'a Point>) -> Self {
        let mut points = self.points.clone();
        for p in extra {
            if !points.contains(p) {
                points.push(p.clone());
            }
        }
        Self {
            genus: self.genus,
            points,
        }
    }
}

/// Finite formal sum of points; zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Divisor(BTreeMap<Point, i64>);

impl Divisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, p: Point, coefficient: i64) {
        let entry = self.0.entry(p.clone()).or_insert(0);
        *entry += coefficient;
        if *entry == 0 {
            self.0.remove(&p);
        }
    }

    pub fn coefficient(&self, p: &Point) -> i64 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = &Point> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, i64)> {
        self.0.iter().map(|(p, &c)| (p, c))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Preimage {
    pub target: Point,
    pub multiplicity: u32,
}

/// Which covering invariant failed, in the order they are checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Degree,
    Multiplicity {
        source: Point,
    },
    Fiber {
        target: Point,
        sum: u64,
        degree: u32,
    },
    RiemannHurwitz {
        source_euler: i64,
        predicted: i64,
    },
}

impl Violation {
    /// Short clause name used in reports and exit diagnostics.
    pub fn clause(&self) -> &'static str {
        match self {
            Violation::Degree => "degree",
            Violation::Multiplicity { .. } => "multiplicity",
            Violation::Fiber { .. } => "fiber",
            Violation::RiemannHurwitz { .. } => "Riemann–Hurwitz",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Degree => write!(f, "degree: covering degree must be at least 1"),
            Violation::Multiplicity { source } => {
                write!(f, "multiplicity: `{source}` has multiplicity 0")
            }
            Violation::Fiber {
                target,
                sum,
                degree,
            } => write!(
                f,
                "fiber: multiplicities over `{target}` sum to {sum}, expected {degree}"
            ),
            Violation::RiemannHurwitz {
                source_euler,
                predicted,
            } => write!(
                f,
                "Riemann–Hurwitz: 2g-2 of the source is {source_euler}, profile predicts {predicted}"
            ),
        }
    }
}

/// Ramification profile of a covering `source -> target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoveringMap {
    source: MarkedCurve,
    target: MarkedCurve,
    degree: u32,
    point_map: BTreeMap<Point, Preimage>,
}

impl CoveringMap {
    /// Builds a profile without checking it; see [`CoveringMap::validate`].
    pub fn unchecked(
        source: MarkedCurve,
        target: MarkedCurve,
        degree: u32,
        point_map: BTreeMap<Point, Preimage>,
    ) -> Self {
        Self {
            source,
            target,
            degree,
            point_map,
        }
    }

    pub fn new(
        source: MarkedCurve,
        target: MarkedCurve,
        degree: u32,
        point_map: BTreeMap<Point, Preimage>,
    ) -> Result<Self> {
        let map = Self::unchecked(source, target, degree, point_map);
        map.validate().map_err(Error::InvalidCovering)?;
        Ok(map)
    }

    /// Degree-one covering with nothing listed.
    pub fn identity(curve: MarkedCurve) -> Self {
        Self::unchecked(curve.clone(), curve, 1, BTreeMap::new())
    }

    pub fn source(&self) -> &MarkedCurve {
        &self.source
    }

    pub fn target(&self) -> &MarkedCurve {
        &self.target
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn point_map(&self) -> &BTreeMap<Point, Preimage> {
        &self.point_map
    }

    pub fn image(&self, source: &Point) -> Option<&Preimage> {
        self.point_map.get(source)
    }

    /// Local multiplicity at `source` (1 when unlisted).
    pub fn multiplicity(&self, source: &Point) -> u32 {
        self.point_map.get(source).map_or(1, |p| p.multiplicity)
    }

    pub fn listed_targets(&self) -> BTreeSet<&Point> {
        self.point_map.values().map(|p| &p.target).collect()
    }

    /// Listed source points over `target`, in label order.
    pub fn fiber(&self, target: &Point) -> Vec<(&Point, u32)> {
        self.point_map
            .iter()
            .filter(|(_, p)| &p.target == target)
            .map(|(s, p)| (s, p.multiplicity))
            .collect()
    }

    fn fiber_sum(&self, target: &Point) -> u64 {
        self.fiber(target).iter().map(|&(_, m)| u64::from(m)).sum()
    }

    /// Checks the covering invariants and reports the first one violated.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        if self.degree == 0 {
            return Err(Violation::Degree);
        }
        if let Some((s, _)) = self.point_map.iter().find(|(_, p)| p.multiplicity == 0) {
            return Err(Violation::Multiplicity { source: s.clone() });
        }
        for t in self.listed_targets() {
            let sum = self.fiber_sum(t);
            if sum != u64::from(self.degree) {
                return Err(Violation::Fiber {
                    target: t.clone(),
                    sum,
                    degree: self.degree,
                });
            }
        }
        let source_euler = 2 * i64::from(self.source.genus) - 2;
        let predicted = i64::from(self.degree) * (2 * i64::from(self.target.genus) - 2)
            + self.ramification_divisor().degree();
        if source_euler != predicted {
            return Err(Violation::RiemannHurwitz {
                source_euler,
                predicted,
            });
        }
        Ok(())
    }

    /// Completes the fibers over `targets` with fresh unramified points
    /// labelled `target#k`. A degree-one profile reuses the label `target`.
    pub fn saturate<'a>(&self, targets: impl IntoIterator<Item = &'a Point>) -> Result<Self> {
        let mut out = self.clone();
        for t in targets {
            let sum = out.fiber_sum(t);
            let degree = u64::from(out.degree);
            if sum > degree {
                return Err(Error::OverfullFiber {
                    target: t.clone(),
                    sum,
                    degree: out.degree,
                });
            }
            if degree == 1 && sum == 0 && !out.point_map.contains_key(t) {
                // degree one: the unlisted preimage keeps the target's label
                out.point_map.insert(
                    t.clone(),
                    Preimage {
                        target: t.clone(),
                        multiplicity: 1,
                    },
                );
                continue;
            }
            let mut k = 1;
            for _ in sum..degree {
                let label = loop {
                    let candidate = Point(format!("{t}#{k}"));
                    k += 1;
                    if !out.point_map.contains_key(&candidate) {
                        break candidate;
                    }
                };
                out.point_map.insert(
                    label,
                    Preimage {
                        target: t.clone(),
                        multiplicity: 1,
                    },
                );
            }
        }
        Ok(out)
    }

    fn check_saturated<'a>(&self, targets: impl IntoIterator<Item = &'a Point>) -> Result<()> {
        for t in targets {
            if self.fiber_sum(t) != u64::from(self.degree) {
                return Err(Error::UnsaturatedFiber(t.clone()));
            }
        }
        Ok(())
    }

    /// `g` followed by `f`, where `g: Y -> X` is `self`.
    ///
    /// Fibers of `g` over every point listed by `f` are saturated first. A
    /// target point of `g` that `f` does not list is unramified under `f`;
    /// it is given the fresh image label `[x]` (or keeps `x` when `f` has
    /// degree one) with a saturated fiber, so the composite lists every
    /// ramification point.
    pub fn compose(&self, f: &CoveringMap) -> Result<Self> {
        let g = self;
        if g.target.genus != f.source.genus {
            return Err(Error::CurveMismatch(format!(
                "target genus {} of the first map differs from source genus {} of the second",
                g.target.genus, f.source.genus
            )));
        }
        let mut f_ext = f.clone();
        let mut fresh_targets = Vec::new();
        let f_targets: BTreeSet<Point> = f.listed_targets().into_iter().cloned().collect();
        for x in g.listed_targets() {
            if !f_ext.point_map.contains_key(x) {
                // A degree-one profile keeps the labels of the points it
                // does not list.
                let image = if f.degree == 1 && !f_targets.contains(x) {
                    x.clone()
                } else {
                    Point(format!("[{x}]"))
                };
                f_ext.point_map.insert(
                    x.clone(),
                    Preimage {
                        target: image.clone(),
                        multiplicity: 1,
                    },
                );
                fresh_targets.push(image);
            }
        }
        let f_ext = f_ext.saturate(&fresh_targets)?;
        let x_points: Vec<Point> = f_ext.point_map.keys().cloned().collect();
        let g_sat = g.saturate(&x_points)?;

        let point_map = g_sat
            .point_map
            .iter()
            .map(|(y, gy)| {
                let fx = &f_ext.point_map[&gy.target];
                (
                    y.clone(),
                    Preimage {
                        target: fx.target.clone(),
                        multiplicity: gy.multiplicity * fx.multiplicity,
                    },
                )
            })
            .collect();
        let composite = Self::unchecked(
            g.source.clone(),
            f.target.clone(),
            g.degree * f.degree,
            point_map,
        );
        composite
            .validate()
            .map_err(|v| Error::Internal(format!("composite profile is invalid: {v}")))?;
        Ok(composite)
    }

    /// The reduced preimage of a set of target points.
    pub fn reduced_preimage<'a>(
        &self,
        targets: impl IntoIterator<Item = &'a Point>,
    ) -> Result<BTreeSet<Point>> {
        let targets: BTreeSet<&Point> = targets.into_iter().collect();
        self.check_saturated(targets.iter().copied())?;
        Ok(self
            .point_map
            .iter()
            .filter(|(_, p)| targets.contains(&p.target))
            .map(|(s, _)| s.clone())
            .collect())
    }

    /// Image of `marked` together with all ramification points.
    pub fn delta_locus<'a>(
        &self,
        marked: impl IntoIterator<Item = &'a Point>,
    ) -> Result<BTreeSet<Point>> {
        let mut out: BTreeSet<Point> = self
            .point_map
            .values()
            .filter(|p| p.multiplicity >= 2)
            .map(|p| p.target.clone())
            .collect();
        for x in marked {
            let image = self
                .point_map
                .get(x)
                .ok_or_else(|| Error::UnlistedPoint(x.clone()))?;
            out.insert(image.target.clone());
        }
        Ok(out)
    }

    /// Constant multiplicity within every listed fiber. This is a necessary
    /// condition for a Galois covering, used here as its stand-in.
    pub fn is_galois_profile(&self) -> bool {
        self.listed_targets().into_iter().all(|t| {
            let fiber = self.fiber(t);
            fiber.windows(2).all(|w| w[0].1 == w[1].1)
        })
    }

    pub fn ramification_divisor(&self) -> Divisor {
        let mut d = Divisor::new();
        for (s, p) in &self.point_map {
            if p.multiplicity >= 2 {
                d.add(s.clone(), i64::from(p.multiplicity) - 1);
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(
        g_source: u32,
        g_target: u32,
        degree: u32,
        entries: &[(&str, &str, u32)],
    ) -> CoveringMap {
        let point_map = entries
            .iter()
            .map(|&(s, t, m)| {
                (
                    Point::from(s),
                    Preimage {
                        target: Point::from(t),
                        multiplicity: m,
                    },
                )
            })
            .collect();
        CoveringMap::unchecked(
            MarkedCurve::unmarked(g_source),
            MarkedCurve::unmarked(g_target),
            degree,
            point_map,
        )
    }

    fn double_cover() -> CoveringMap {
        profile(0, 0, 2, &[("p", "a", 2), ("q", "b", 2)])
    }

    #[test]
    fn validate_examples() {
        assert_eq!(double_cover().validate(), Ok(()));
        assert_eq!(profile(3, 3, 1, &[]).validate(), Ok(()));
        let v = profile(0, 0, 2, &[("p", "a", 2)]).validate().unwrap_err();
        assert_eq!(v.clause(), "Riemann–Hurwitz");
        assert_eq!(
            v,
            Violation::RiemannHurwitz {
                source_euler: -2,
                predicted: -3
            }
        );
    }

    #[test]
    fn validate_reports_first_clause() {
        assert_eq!(
            profile(0, 0, 0, &[]).validate().unwrap_err().clause(),
            "degree"
        );
        assert_eq!(
            profile(0, 0, 2, &[("p", "a", 0)])
                .validate()
                .unwrap_err()
                .clause(),
            "multiplicity"
        );
        assert_eq!(
            profile(0, 0, 3, &[("p", "a", 2)])
                .validate()
                .unwrap_err()
                .clause(),
            "fiber"
        );
    }

    #[test]
    fn saturate_examples() {
        let f = profile(0, 0, 3, &[("p", "a", 2)]);
        let s = f.saturate(&[Point::from("a")]).unwrap();
        assert_eq!(s.fiber(&Point::from("a")).len(), 2);
        assert_eq!(s.multiplicity(&Point::from("a#1")), 1);
        assert_eq!(s.saturate(&[Point::from("a")]).unwrap(), s);

        let over = profile(0, 0, 3, &[("p", "a", 2), ("q", "a", 2)]);
        assert!(matches!(
            over.saturate(&[Point::from("a")]),
            Err(Error::OverfullFiber { sum: 4, .. })
        ));
    }

    #[test]
    fn saturate_skips_taken_labels() {
        let f = profile(0, 0, 3, &[("a#1", "a", 1)]);
        let s = f.saturate(&[Point::from("a")]).unwrap();
        let labels: Vec<&str> = s.point_map().keys().map(Point::as_str).collect();
        assert_eq!(labels, ["a#1", "a#2", "a#3"]);
    }

    #[test]
    fn compose_examples() {
        // y over x with m = 2 (degree 2, plus one more ramification point so
        // Riemann-Hurwitz holds), x over z with m = 3.
        let g = profile(0, 0, 2, &[("y", "x", 2), ("y2", "x2", 2)]);
        let f = profile(0, 0, 3, &[("x", "z", 3), ("x2", "z2", 3)]);
        g.validate().unwrap();
        f.validate().unwrap();
        let h = g.compose(&f).unwrap();
        assert_eq!(h.degree(), 6);
        assert_eq!(h.image(&Point::from("y")).unwrap().multiplicity, 6);
        assert_eq!(h.image(&Point::from("y")).unwrap().target, Point::from("z"));
        assert_eq!(h.validate(), Ok(()));

        let id = CoveringMap::identity(MarkedCurve::unmarked(0));
        assert_eq!(f.compose(&id).unwrap().point_map(), f.point_map());
        assert_eq!(id.compose(&f).unwrap().point_map(), f.point_map());
    }

    #[test]
    fn compose_unramified_double_covers() {
        let g = profile(9, 5, 2, &[]);
        let f = profile(5, 3, 2, &[]);
        g.validate().unwrap();
        f.validate().unwrap();
        let h = g.compose(&f).unwrap();
        assert_eq!(h.degree(), 4);
        assert!(h.ramification_divisor().is_empty());
        assert_eq!(h.source().genus(), 4 * (3 - 1) + 1);
    }

    #[test]
    fn compose_lifts_points_unlisted_by_second_map() {
        let g = profile(2, 1, 2, &[("y", "x", 2), ("y2", "x2", 2)]);
        let f = profile(1, 1, 2, &[]);
        g.validate().unwrap();
        f.validate().unwrap();
        let h = g.compose(&f).unwrap();
        assert_eq!(
            h.image(&Point::from("y")).unwrap().target,
            Point::from("[x]")
        );
        assert_eq!(h.fiber(&Point::from("[x]")).len(), 3);
        assert_eq!(h.validate(), Ok(()));
    }

    #[test]
    fn preimage_and_delta() {
        let f = profile(0, 0, 3, &[("y1", "x", 2), ("y2", "x", 1), ("w", "v", 3)]);
        let x = Point::from("x");
        let pre = f.reduced_preimage([&x]).unwrap();
        assert_eq!(pre.len(), 2);
        assert!(f.reduced_preimage([]).unwrap().is_empty());
        assert!(matches!(
            f.reduced_preimage([&Point::from("u")]),
            Err(Error::UnsaturatedFiber(_))
        ));

        let g = profile(
            0,
            0,
            3,
            &[
                ("a", "x1", 3),
                ("b1", "x2", 1),
                ("b2", "x2", 1),
                ("b3", "x2", 1),
            ],
        );
        let both = g
            .reduced_preimage([&Point::from("x1"), &Point::from("x2")])
            .unwrap();
        assert_eq!(both.len(), 4);

        let d = f.delta_locus([&Point::from("y2")]).unwrap();
        assert_eq!(
            d,
            [Point::from("v"), Point::from("x")].into_iter().collect()
        );
        let d = f.delta_locus([&Point::from("w")]).unwrap();
        assert_eq!(
            d,
            [Point::from("v"), Point::from("x")].into_iter().collect()
        );
        let unram = profile(0, 0, 1, &[("p", "q", 1)]);
        assert_eq!(
            unram.delta_locus([&Point::from("p")]).unwrap(),
            [Point::from("q")].into_iter().collect()
        );
    }

    #[test]
    fn galois_and_ramification() {
        assert!(profile(0, 0, 4, &[("a", "x", 2), ("b", "x", 2)]).is_galois_profile());
        assert!(!profile(0, 0, 3, &[("a", "x", 2), ("b", "x", 1)]).is_galois_profile());
        assert!(profile(0, 0, 1, &[]).is_galois_profile());

        assert!(profile(0, 0, 1, &[]).ramification_divisor().is_empty());
        let r = profile(0, 0, 3, &[("a", "x", 3)]).ramification_divisor();
        assert_eq!(r.coefficient(&Point::from("a")), 2);
        let r = double_cover().ramification_divisor();
        assert_eq!(r.degree(), 2);
        assert_eq!(r.support().count(), 2);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(MarkedCurve::new(0, [Point::from("a"), Point::from("a")]).is_err());
    }
}
