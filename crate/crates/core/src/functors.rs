//! Pullback and direct image of parabolic bundles along coverings.
//!
//! Pullback twists by floors: a weight `a` at `x` becomes `m a mod 1` at each
//! point `y` over `x` of multiplicity `m`, and `floor(m a)` is added to the
//! degree. Direct image spreads a weight `a` at a point of multiplicity `m`
//! into the `m` weights `(k + a) / m`, `0 <= k < m`; its underlying degree is
//! fixed by requiring the parabolic degree to be preserved, and is checked
//! against Grothendieck–Riemann–Roch.

use std::collections::BTreeMap;

use crate::curve::{CoveringMap, MarkedCurve, Point};
use crate::error::{Error, Result};
use crate::parabolic::{ParaLine, ParabolicChar, SplitParabolicBundle, Weight};
use crate::rational::{floor_i64, int, Rational};

fn check_genus(expected: &MarkedCurve, found: &MarkedCurve, role: &str) -> Result<()> {
    if expected.genus() != found.genus() {
        return Err(Error::CurveMismatch(format!(
            "{role} has genus {}, the covering expects genus {}",
            found.genus(),
            expected.genus()
        )));
    }
    Ok(())
}

/// Listed source points over `target`, failing unless the fiber is complete.
fn full_fiber<'a>(f: &'a CoveringMap, target: &Point) -> Result<Vec<(&'a Point, u32)>> {
    let fiber = f.fiber(target);
    let sum: u64 = fiber.iter().map(|&(_, m)| u64::from(m)).sum();
    if sum != u64::from(f.degree()) {
        return Err(Error::UnsaturatedFiber(target.clone()));
    }
    Ok(fiber)
}

/// Pulls back one weight through a point of multiplicity `m`; returns the
/// new weight and the degree twist `floor(m a)`.
fn pull_weight(m: u32, w: &Weight) -> (Weight, i64) {
    let scaled = w.value() * int(i64::from(m));
    (Weight::reduce(&scaled), floor_i64(&scaled))
}

/// Pullback of the line's `(degree, weights)` as a map on source points.
fn pull_line_data(f: &CoveringMap, line: &ParaLine) -> Result<(i64, BTreeMap<Point, Weight>)> {
    check_genus(f.target(), line.curve(), "line bundle")?;
    let mut degree = i64::from(f.degree()) * line.degree();
    let mut weights = BTreeMap::new();
    for (x, w) in line.weights() {
        for (y, m) in full_fiber(f, x)? {
            let (pulled, twist) = pull_weight(m, w);
            degree += twist;
            weights.insert(y.clone(), pulled);
        }
    }
    Ok((degree, weights))
}

pub fn pullback_line(f: &CoveringMap, line: &ParaLine) -> Result<ParaLine> {
    let (degree, weights) = pull_line_data(f, line)?;
    let curve = f
        .source()
        .with_points(weights.iter().filter(|(_, w)| !w.is_zero()).map(|(p, _)| p));
    ParaLine::new(curve, degree, weights)
}

/// Summand-wise pullback; all summands land on the source curve marked at
/// the union of their weight supports.
pub fn pullback_split(f: &CoveringMap, e: &SplitParabolicBundle) -> Result<SplitParabolicBundle> {
    let pulled: Vec<(i64, BTreeMap<Point, Weight>)> = e
        .summands()
        .iter()
        .map(|l| pull_line_data(f, l))
        .collect::<Result<_>>()?;
    let curve = f.source().with_points(
        pulled
            .iter()
            .flat_map(|(_, ws)| ws.iter().filter(|(_, w)| !w.is_zero()).map(|(p, _)| p)),
    );
    let lines = pulled
        .into_iter()
        .map(|(degree, weights)| ParaLine::new(curve.clone(), degree, weights))
        .collect::<Result<_>>()?;
    SplitParabolicBundle::new(lines)
}

pub fn pullback_char(f: &CoveringMap, c: &ParabolicChar) -> Result<ParabolicChar> {
    check_genus(f.target(), c.curve(), "bundle")?;
    let mut degree = i64::from(f.degree()) * c.degree();
    let mut weights = BTreeMap::new();
    for (x, multiset) in c.weights() {
        for (y, m) in full_fiber(f, x)? {
            let mut pulled = Vec::with_capacity(multiset.len());
            for w in multiset {
                let (pw, twist) = pull_weight(m, w);
                degree += twist;
                pulled.push(pw);
            }
            weights.insert(y.clone(), pulled);
        }
    }
    ParabolicChar::on_extended_curve(f.source(), c.rank(), degree, weights)
}

/// What one source point contributes to the direct image at its image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberContribution {
    pub source: Point,
    pub multiplicity: u32,
    pub source_weights: Vec<Weight>,
    /// `(k + a) / m` for `0 <= k < m` and each source weight `a`, sorted.
    pub produced: Vec<Weight>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectImageResult {
    pub char: ParabolicChar,
    /// Keyed by the target points of the locus `φ(R ∪ D)`.
    pub breakdown: BTreeMap<Point, Vec<FiberContribution>>,
}

fn spread_weights(m: u32, source: &[Weight]) -> Vec<Weight> {
    let m_q = int(i64::from(m));
    let mut out: Vec<Weight> = (0..m)
        .flat_map(|k| {
            let m_q = &m_q;
            source.iter().map(move |a| {
                Weight::new((int(i64::from(k)) + a.value()) / m_q)
                    .expect("(k + a) / m lies in [0, 1)")
            })
        })
        .collect();
    out.sort();
    out
}

pub fn direct_image_char(phi: &CoveringMap, c: &ParabolicChar) -> Result<DirectImageResult> {
    check_genus(phi.source(), c.curve(), "bundle")?;
    let rank = c.rank();
    let delta = phi.delta_locus(c.weights().keys())?;

    let mut breakdown = BTreeMap::new();
    let mut weights = BTreeMap::new();
    let mut produced_total = Rational::from_integer(0.into());
    for t in &delta {
        let mut contributions = Vec::new();
        let mut at_t = Vec::with_capacity(rank * phi.degree() as usize);
        for (x, m) in full_fiber(phi, t)? {
            let source_weights = c.multiset_at(x);
            let produced = spread_weights(m, &source_weights);
            for w in &produced {
                produced_total += w.value();
            }
            at_t.extend(produced.iter().cloned());
            contributions.push(FiberContribution {
                source: x.clone(),
                multiplicity: m,
                source_weights,
                produced,
            });
        }
        weights.insert(t.clone(), at_t);
        breakdown.insert(t.clone(), contributions);
    }

    let degree_q = c.par_deg() - produced_total;
    if !degree_q.is_integer() {
        return Err(Error::Internal(format!(
            "direct image degree {degree_q} is not an integer"
        )));
    }
    let degree = floor_i64(&degree_q);

    // Grothendieck–Riemann–Roch: deg φ_*E = deg E + r(1 - g_X) - r n (1 - g_Z).
    let r = rank as i64;
    let n = i64::from(phi.degree());
    let grr = c.degree() + r * (1 - i64::from(phi.source().genus()))
        - r * n * (1 - i64::from(phi.target().genus()));
    if grr != degree {
        return Err(Error::Internal(format!(
            "direct image degree {degree} disagrees with Riemann–Roch prediction {grr}"
        )));
    }

    let char = ParabolicChar::on_extended_curve(phi.target(), rank * n as usize, degree, weights)?;
    Ok(DirectImageResult { char, breakdown })
}

/// `φ^* φ_* c` for a Galois profile `φ`.
pub fn galois_pullback_of_direct_image(
    phi: &CoveringMap,
    c: &ParabolicChar,
) -> Result<ParabolicChar> {
    if !phi.is_galois_profile() {
        return Err(Error::NotGalois);
    }
    let pushed = direct_image_char(phi, c)?;
    pullback_char(phi, &pushed.char)
}

/// Characteristic data of `⊕_γ γ^* c` for a Galois profile: at a point of
/// multiplicity `m`, the union over its fiber of `m` copies of each weight
/// multiset. Equals `n` copies of `c` when the weights are constant along
/// fibers.
pub fn galois_orbit_sum(phi: &CoveringMap, c: &ParabolicChar) -> Result<ParabolicChar> {
    if !phi.is_galois_profile() {
        return Err(Error::NotGalois);
    }
    check_genus(phi.source(), c.curve(), "bundle")?;
    for x in c.weights().keys() {
        if phi.image(x).is_none() {
            return Err(Error::UnlistedPoint(x.clone()));
        }
    }
    let mut weights = BTreeMap::new();
    for (x, pre) in phi.point_map() {
        let mut orbit = Vec::new();
        for (x2, _) in full_fiber(phi, &pre.target)? {
            for _ in 0..pre.multiplicity {
                orbit.extend(c.multiset_at(x2));
            }
        }
        weights.insert(x.clone(), orbit);
    }
    let n = phi.degree() as usize;
    ParabolicChar::on_extended_curve(phi.source(), c.rank() * n, c.degree() * n as i64, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Preimage;
    use crate::rational::rat;

    fn w(n: i64, d: i64) -> Weight {
        Weight::new(rat(n, d)).unwrap()
    }

    fn covering(
        g_source: u32,
        target: MarkedCurve,
        degree: u32,
        entries: &[(&str, &str, u32)],
    ) -> CoveringMap {
        let map = entries
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
        CoveringMap::new(MarkedCurve::unmarked(g_source), target, degree, map).unwrap()
    }

    fn p1(points: &[&str]) -> MarkedCurve {
        MarkedCurve::new(0, points.iter().map(|p| Point::from(*p))).unwrap()
    }

    /// Double cover of P^1 by P^1 branched over `a` and `b`.
    fn double_cover() -> CoveringMap {
        covering(0, p1(&["a", "b"]), 2, &[("p", "a", 2), ("q", "b", 2)])
    }

    #[test]
    fn pullback_line_examples() {
        // degree 3 map totally ramified over a and b (genus 0 -> 0: -2 = -6 + 4)
        let f = covering(0, p1(&["a", "b"]), 3, &[("p", "a", 3), ("q", "b", 3)]);
        let l = ParaLine::new(p1(&["a", "b"]), 2, [(Point::from("a"), w(1, 2))]).unwrap();
        let pulled = pullback_line(&f, &l).unwrap();
        assert_eq!(pulled.degree(), 7);
        assert_eq!(pulled.weight_at(&Point::from("p")), w(1, 2));
        assert_eq!(pulled.par_deg(), rat(15, 2));
        assert_eq!(pulled.par_deg(), l.par_deg() * int(3));

        let plain = ParaLine::new(p1(&["a", "b"]), -2, []).unwrap();
        let pulled = pullback_line(&f, &plain).unwrap();
        assert_eq!(pulled.degree(), -6);
        assert!(pulled.weights().is_empty());

        // degree 3, fiber {2, 1} over a; genus 0 -> 0 needs total ramification 4.
        let f = covering(
            0,
            p1(&["a"]),
            3,
            &[
                ("y1", "a", 2),
                ("y2", "a", 1),
                ("u", "b", 3),
                ("v1", "c", 2),
                ("v2", "c", 1),
            ],
        );
        let l = ParaLine::new(p1(&["a"]), 0, [(Point::from("a"), w(2, 3))]).unwrap();
        let pulled = pullback_line(&f, &l).unwrap();
        assert_eq!(pulled.degree(), 1);
        assert_eq!(pulled.weight_at(&Point::from("y1")), w(1, 3));
        assert_eq!(pulled.weight_at(&Point::from("y2")), w(2, 3));
        assert_eq!(pulled.par_deg(), rat(2, 1));
    }

    #[test]
    fn pullback_requires_saturated_fibers() {
        let f = double_cover();
        let l = ParaLine::new(p1(&["a", "b", "c"]), 0, [(Point::from("c"), w(1, 2))]).unwrap();
        assert!(matches!(
            pullback_line(&f, &l),
            Err(Error::UnsaturatedFiber(_))
        ));
        let f = f.saturate([&Point::from("c")]).unwrap();
        let pulled = pullback_line(&f, &l).unwrap();
        assert_eq!(pulled.weights().len(), 2);
        assert_eq!(pulled.par_deg(), int(1));
    }

    #[test]
    fn pullback_split_and_char() {
        let f = covering(0, p1(&["a", "b"]), 2, &[("p", "a", 2), ("q", "b", 2)]);
        let e = SplitParabolicBundle::new(vec![
            ParaLine::new(p1(&["a", "b"]), 1, [(Point::from("a"), w(1, 2))]).unwrap(),
            ParaLine::new(p1(&["a", "b"]), 0, [(Point::from("a"), w(1, 3))]).unwrap(),
        ])
        .unwrap();
        let pulled = pullback_split(&f, &e).unwrap();
        let first = pullback_line(&f, &e.summands()[0]).unwrap();
        assert_eq!(pulled.summands()[0].degree(), first.degree());
        assert_eq!(pulled.summands()[0].weights(), first.weights());
        let c = pullback_char(&f, &e.char()).unwrap();
        assert_eq!(c, pulled.char());
        assert_eq!(c.multiset_at(&Point::from("p")), vec![w(0, 1), w(2, 3)]);
        assert_eq!(c.degree(), 2 + 1);

        let same = SplitParabolicBundle::new(vec![
            ParaLine::new(
                p1(&["a", "b"]),
                0,
                [(Point::from("b"), w(3, 4))]
            )
            .unwrap();
            2
        ])
        .unwrap();
        let pulled = pullback_split(&f, &same).unwrap();
        assert_eq!(pulled.summands()[0], pulled.summands()[1]);

        let plain = ParabolicChar::trivial(p1(&["a", "b"]), 3);
        let c = pullback_char(&f, &plain).unwrap();
        assert_eq!((c.rank(), c.degree()), (3, 0));
    }

    #[test]
    fn direct_image_of_trivial_line_on_double_cover() {
        let phi = double_cover();
        let c = ParabolicChar::trivial(MarkedCurve::unmarked(0), 1);
        let pushed = direct_image_char(&phi, &c).unwrap();
        assert_eq!(pushed.char.rank(), 2);
        assert_eq!(pushed.char.degree(), -1);
        assert_eq!(pushed.char.par_deg(), int(0));
        for t in ["a", "b"] {
            assert_eq!(
                pushed.char.multiset_at(&Point::from(t)),
                vec![w(0, 1), w(1, 2)]
            );
        }
        let contrib = &pushed.breakdown[&Point::from("a")][0];
        assert_eq!(contrib.multiplicity, 2);
        assert_eq!(contrib.source_weights, vec![Weight::zero()]);
    }

    #[test]
    fn direct_image_identity_and_spread() {
        let curve = p1(&["x"]);
        let c = ParabolicChar::from_parts(
            curve.clone(),
            2,
            3,
            [(Point::from("x"), vec![w(1, 5), w(1, 2)])].into(),
        )
        .unwrap();
        let id = CoveringMap::new(
            curve.clone(),
            curve.clone(),
            1,
            [(
                Point::from("x"),
                Preimage {
                    target: Point::from("x"),
                    multiplicity: 1,
                },
            )]
            .into(),
        )
        .unwrap();
        assert_eq!(direct_image_char(&id, &c).unwrap().char, c);

        assert_eq!(spread_weights(2, &[w(1, 4)]), vec![w(1, 8), w(5, 8)]);
    }

    #[test]
    fn direct_image_rejects_unlisted_weighted_points() {
        let phi = double_cover();
        let curve = p1(&["z"]);
        let c = ParabolicChar::from_parts(curve, 1, 0, [(Point::from("z"), vec![w(1, 2)])].into())
            .unwrap();
        assert!(matches!(
            direct_image_char(&phi, &c),
            Err(Error::UnlistedPoint(_))
        ));
    }

    #[test]
    fn galois_pullback_of_double_cover() {
        let phi = double_cover();
        let c = ParabolicChar::trivial(MarkedCurve::unmarked(0), 1);
        let back = galois_pullback_of_direct_image(&phi, &c).unwrap();
        assert_eq!(back.rank(), 2);
        assert_eq!(back.degree(), 0);
        assert!(back.weights().is_empty());
        assert!(back.same_data(&c.repeated(2)));
        assert!(back.same_data(&galois_orbit_sum(&phi, &c).unwrap()));

        let non_galois = covering(
            0,
            p1(&["a"]),
            3,
            &[
                ("y1", "a", 2),
                ("y2", "a", 1),
                ("u", "b", 3),
                ("v1", "c", 2),
                ("v2", "c", 1),
            ],
        );
        assert_eq!(
            galois_pullback_of_direct_image(&non_galois, &c),
            Err(Error::NotGalois)
        );
    }
}
