use num_traits::{One, Zero};
use proptest::prelude::*;

use parcalc::functors::{direct_image_char, pullback_line};
use parcalc::naht::{conn_to_higgs, higgs_to_conn, normalize};
use parcalc::rational::{floor_i64, format_rational, int, parse_rational, rat};
use parcalc::{
    CoveringMap, FieldKind, GaussianRational, MarkedCurve, Matrix, ParaLine, ParabolicChar, Point,
    Preimage, Rational, SpectralPoint, Weight,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn weight() -> impl Strategy<Value = Weight> {
    (1i64..=12).prop_flat_map(|d| (0..d).prop_map(move |n| Weight::new(rat(n, d)).unwrap()))
}

fn gaussian() -> impl Strategy<Value = GaussianRational> {
    (rational(), rational()).prop_map(|(re, im)| GaussianRational::new(re, im))
}

fn matrix(size: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(proptest::collection::vec(gaussian(), size), size)
        .prop_map(|rows| Matrix::from_rows(rows).unwrap())
}

fn curve() -> MarkedCurve {
    MarkedCurve::new(1, ["a", "b", "c"].map(Point::from)).unwrap()
}

fn line() -> impl Strategy<Value = ParaLine> {
    (-5i64..=5, weight(), weight(), weight()).prop_map(|(d, wa, wb, wc)| {
        let weights = [("a", wa), ("b", wb), ("c", wc)].map(|(p, w)| (Point::from(p), w));
        ParaLine::new(curve(), d, weights).unwrap()
    })
}

/// Degree 3 covering of P^1 by P^1 with fibers {2, 1} over s, t and {3} over u.
fn triple_cover() -> CoveringMap {
    let fibers = [
        ("s1", "s", 2),
        ("s2", "s", 1),
        ("t1", "t", 2),
        ("t2", "t", 1),
        ("u1", "u", 3),
    ];
    let map = fibers
        .into_iter()
        .map(|(x, t, m)| {
            (
                Point::from(x),
                Preimage {
                    target: Point::from(t),
                    multiplicity: m,
                },
            )
        })
        .collect();
    let source = MarkedCurve::new(0, fibers.map(|(x, _, _)| Point::from(x))).unwrap();
    let target = MarkedCurve::new(0, ["s", "t", "u"].map(Point::from)).unwrap();
    CoveringMap::new(source, target, 3, map).unwrap()
}

proptest! {
    #[test]
    fn rationals_print_and_parse_canonically(q in rational()) {
        let text = format_rational(&q);
        prop_assert_eq!(parse_rational(&text).unwrap(), q);
    }

    #[test]
    fn gaussian_field_laws(a in gaussian(), b in gaussian(), c in gaussian()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if let Some(inv) = a.inv() {
            prop_assert!((&a * &inv).is_one());
        } else {
            prop_assert!(a.is_zero());
        }
        prop_assert_eq!(GaussianRational::parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn char_poly_evaluates_to_determinant(a in matrix(3), t in gaussian()) {
        let shifted = &Matrix::scalar(3, t.clone()) - &a;
        prop_assert_eq!(a.char_poly().eval(&t), shifted.determinant());
    }

    #[test]
    fn dual_and_tensor_laws(l in line(), m in line(), n in line()) {
        prop_assert_eq!(l.dual().dual(), l.clone());
        prop_assert_eq!(l.dual().par_deg(), -l.par_deg());
        let lm = l.tensor(&m).unwrap();
        prop_assert_eq!(&lm, &m.tensor(&l).unwrap());
        prop_assert_eq!(lm.par_deg(), l.par_deg() + m.par_deg());
        prop_assert_eq!(lm.tensor(&n).unwrap(), l.tensor(&m.tensor(&n).unwrap()).unwrap());
        prop_assert_eq!(l.tensor(&ParaLine::trivial(curve())).unwrap(), l);
    }

    #[test]
    fn pullback_line_matches_floor_formula(d in -4i64..=4, ws in proptest::collection::vec(weight(), 3)) {
        let f = triple_cover();
        let weights: Vec<(Point, Weight)> =
            ["s", "t", "u"].iter().zip(&ws).map(|(p, w)| (Point::from(*p), w.clone())).collect();
        let line = ParaLine::new(f.target().clone(), d, weights.clone()).unwrap();
        let pulled = pullback_line(&f, &line).unwrap();

        let mut degree = 3 * d;
        for (x, w) in &weights {
            for (y, m) in f.fiber(x) {
                let scaled = w.value() * int(i64::from(m));
                degree += floor_i64(&scaled);
                prop_assert_eq!(pulled.weight_at(y), Weight::reduce(&scaled));
            }
        }
        prop_assert_eq!(pulled.degree(), degree);
        prop_assert_eq!(pulled.par_deg(), line.par_deg() * int(3));
    }

    #[test]
    fn direct_image_preserves_par_deg(d in -4i64..=4, ws in proptest::collection::vec(weight(), 10)) {
        let f = triple_cover();
        let points = ["s1", "s2", "t1", "t2", "u1"];
        let weights = points
            .iter()
            .zip(ws.chunks(2))
            .map(|(p, pair)| (Point::from(*p), pair.to_vec()))
            .collect();
        let c = ParabolicChar::from_parts(f.source().clone(), 2, d, weights).unwrap();
        let pushed = direct_image_char(&f, &c).unwrap();
        prop_assert_eq!(pushed.char.rank(), 6);
        prop_assert_eq!(pushed.char.par_deg(), c.par_deg());
        // R = 4 ramification, so deg drops by r R / 2 = 4
        prop_assert_eq!(pushed.char.degree(), d - 4);
    }

    #[test]
    fn normalization_keeps_the_right_invariant(raw in rational(), eig in gaussian()) {
        let h = normalize(FieldKind::Higgs, &raw, eig.clone(), 1);
        prop_assert_eq!(&h.eigenvalue, &eig);
        let c = normalize(FieldKind::Connection, &raw, eig.clone(), 1);
        prop_assert!(c.jump >= Rational::zero() && c.jump < Rational::one());
        // eigenvalue minus jump is unchanged by the integer shift
        prop_assert_eq!(&c.eigenvalue.re - &c.jump, &eig.re - &raw);
        prop_assert_eq!(c.eigenvalue.im, eig.im);
    }

    #[test]
    fn naht_round_trips(alpha in weight(), eig in gaussian()) {
        let p = SpectralPoint::new(FieldKind::Higgs, alpha.value().clone(), eig, 1).unwrap();
        let conn = higgs_to_conn(&p).unwrap();
        prop_assert_eq!(conn_to_higgs(&conn).unwrap(), p);
        let back = higgs_to_conn(&conn_to_higgs(&conn).unwrap()).unwrap();
        prop_assert_eq!(back, conn);
    }
}
