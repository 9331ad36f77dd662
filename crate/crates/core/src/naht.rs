//! Jump/eigenvalue data matched by the nonabelian Hodge correspondence, and
//! its behaviour under pullback and direct image.
//!
//! A Higgs point `(a, b + c i)` corresponds to the connection point
//! `(a - 2b, a + 2c i)`. Jumps are only meaningful modulo 1: moving a
//! connection jump by an integer `k` moves its eigenvalue by the same `k`,
//! while a Higgs eigenvalue is unaffected by twisting.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::rational::{floor, frac, int, is_unit_interval, Rational};
use crate::spectral::{expect_kind, FieldKind};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub kind: FieldKind,
    #[serde(with = "crate::rational::serde_rational")]
    pub jump: Rational,
    pub eigenvalue: GaussianRational,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

impl SpectralPoint {
    pub fn new(
        kind: FieldKind,
        jump: Rational,
        eigenvalue: GaussianRational,
        multiplicity: u32,
    ) -> Result<Self> {
        if !is_unit_interval(&jump) {
            return Err(Error::WeightOutOfRange(jump.to_string()));
        }
        if multiplicity == 0 {
            return Err(Error::InvalidValue(
                "multiplicity must be at least 1".into(),
            ));
        }
        Ok(Self {
            kind,
            jump,
            eigenvalue,
            multiplicity,
        })
    }
}

/// Reduces `raw_jump` into `[0, 1)`; a connection eigenvalue follows the
/// jump's integer shift.
pub fn normalize(
    kind: FieldKind,
    raw_jump: &Rational,
    eigenvalue: GaussianRational,
    multiplicity: u32,
) -> SpectralPoint {
    let shift = Rational::from_integer(floor(raw_jump));
    let eigenvalue = match kind {
        FieldKind::Higgs => eigenvalue,
        FieldKind::Connection => &eigenvalue - &GaussianRational::real(shift),
    };
    SpectralPoint {
        kind,
        jump: frac(raw_jump),
        eigenvalue,
        multiplicity,
    }
}

pub fn higgs_to_conn(p: &SpectralPoint) -> Result<SpectralPoint> {
    expect_kind(FieldKind::Higgs, p.kind)?;
    let alpha = &p.jump;
    let b = &p.eigenvalue.re;
    let c = &p.eigenvalue.im;
    let raw_jump = alpha - b * int(2);
    let eig = GaussianRational::new(alpha.clone(), c * int(2));
    Ok(normalize(
        FieldKind::Connection,
        &raw_jump,
        eig,
        p.multiplicity,
    ))
}

/// Inverse of [`higgs_to_conn`] on normalized points.
pub fn conn_to_higgs(p: &SpectralPoint) -> Result<SpectralPoint> {
    expect_kind(FieldKind::Connection, p.kind)?;
    // A normalized connection point (β, λ) is (a - 2b - k, a - k + 2c i)
    // with a in [0, 1), so a = frac(Re λ) and 2b = Re λ - β.
    let re = &p.eigenvalue.re;
    let alpha = frac(re);
    let b = (re - &p.jump) / int(2);
    let c = &p.eigenvalue.im / int(2);
    SpectralPoint::new(
        FieldKind::Higgs,
        alpha,
        GaussianRational::new(b, c),
        p.multiplicity,
    )
}

fn check_kinds(kind: FieldKind, pts: &[SpectralPoint]) -> Result<()> {
    pts.iter().try_for_each(|p| expect_kind(kind, p.kind))
}

/// Spectral data after pulling back along a point of multiplicity `m`.
pub fn pullback_spectrum(
    kind: FieldKind,
    m: u32,
    pts: &[SpectralPoint],
) -> Result<Vec<SpectralPoint>> {
    check_kinds(kind, pts)?;
    let m_q = int(i64::from(m));
    Ok(pts
        .iter()
        .map(|p| {
            normalize(
                kind,
                &(&p.jump * &m_q),
                p.eigenvalue.scale(&m_q),
                p.multiplicity,
            )
        })
        .collect())
}

/// Spectral data of a direct image at a point whose fiber consists of points
/// of multiplicities `m_j` carrying the listed spectral points.
///
/// Each source point yields `m_j` points with jumps `(a + k) / m_j`; Higgs
/// eigenvalues become `λ / m_j`, connection eigenvalues `(λ + k) / m_j`
/// (the diagonal blocks of the direct-image residue).
pub fn direct_image_spectrum(
    kind: FieldKind,
    fiber: &[(u32, Vec<SpectralPoint>)],
) -> Result<Vec<SpectralPoint>> {
    let mut out = Vec::new();
    for (m, pts) in fiber {
        check_kinds(kind, pts)?;
        if *m == 0 {
            return Err(Error::InvalidValue(
                "multiplicity must be at least 1".into(),
            ));
        }
        let inv_m = Rational::new(1.into(), i64::from(*m).into());
        for p in pts {
            for k in 0..*m {
                let k_q = int(i64::from(k));
                let raw_jump = (&p.jump + &k_q) * &inv_m;
                let eig = match kind {
                    FieldKind::Higgs => p.eigenvalue.scale(&inv_m),
                    FieldKind::Connection => {
                        (&p.eigenvalue + &GaussianRational::real(k_q)).scale(&inv_m)
                    }
                };
                out.push(normalize(kind, &raw_jump, eig, p.multiplicity));
            }
        }
    }
    Ok(out)
}

/// Merges equal points (adding multiplicities) and sorts; two lists describe
/// the same spectral multiset iff their canonical forms are equal.
pub fn canonical(pts: &[SpectralPoint]) -> Vec<SpectralPoint> {
    let mut merged: BTreeMap<(FieldKind, &Rational, &GaussianRational), u32> = BTreeMap::new();
    for p in pts {
        *merged.entry((p.kind, &p.jump, &p.eigenvalue)).or_default() += p.multiplicity;
    }
    merged
        .into_iter()
        .map(|((kind, jump, eigenvalue), multiplicity)| SpectralPoint {
            kind,
            jump: jump.clone(),
            eigenvalue: eigenvalue.clone(),
            multiplicity,
        })
        .collect()
}

/// Higgs points with vanishing eigenvalue (nilpotent residue).
pub fn is_strongly_parabolic_point(p: &SpectralPoint) -> bool {
    p.kind == FieldKind::Higgs && p.eigenvalue.is_zero()
}

/// Connection points whose eigenvalue equals the jump.
pub fn is_residual_point(p: &SpectralPoint) -> bool {
    p.kind == FieldKind::Connection && p.eigenvalue == GaussianRational::real(p.jump.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn g(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
        GaussianRational::new(rat(re.0, re.1), rat(im.0, im.1))
    }

    fn higgs(jump: (i64, i64), eig: GaussianRational) -> SpectralPoint {
        SpectralPoint::new(FieldKind::Higgs, rat(jump.0, jump.1), eig, 1).unwrap()
    }

    fn conn(jump: (i64, i64), eig: GaussianRational) -> SpectralPoint {
        SpectralPoint::new(FieldKind::Connection, rat(jump.0, jump.1), eig, 1).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let p = normalize(FieldKind::Connection, &rat(1, 3), g((1, 1), (0, 1)), 1);
        assert_eq!(p, conn((1, 3), g((1, 1), (0, 1))));
        let p = normalize(FieldKind::Connection, &rat(-1, 1), g((0, 1), (4, 1)), 1);
        assert_eq!(p, conn((0, 1), g((1, 1), (4, 1))));
        let eig = g((2, 5), (-1, 1));
        let p = normalize(FieldKind::Higgs, &rat(3, 2), eig.clone(), 1);
        assert_eq!(p, higgs((1, 2), eig));
    }

    #[test]
    fn table1_examples() {
        let p = higgs((1, 2), g((1, 4), (1, 1)));
        assert_eq!(higgs_to_conn(&p).unwrap(), conn((0, 1), g((1, 2), (2, 1))));
        let strongly = higgs((2, 7), GaussianRational::zero());
        let image = higgs_to_conn(&strongly).unwrap();
        assert_eq!(image, conn((2, 7), g((2, 7), (0, 1))));
        assert!(is_residual_point(&image));
        let origin = higgs((0, 1), GaussianRational::zero());
        assert_eq!(
            higgs_to_conn(&origin).unwrap(),
            conn((0, 1), GaussianRational::zero())
        );
        assert!(higgs_to_conn(&image).is_err());
    }

    #[test]
    fn conn_to_higgs_examples() {
        assert_eq!(
            conn_to_higgs(&conn((0, 1), g((1, 2), (2, 1)))).unwrap(),
            higgs((1, 2), g((1, 4), (1, 1)))
        );
        let residual = conn((3, 5), g((3, 5), (0, 1)));
        let back = conn_to_higgs(&residual).unwrap();
        assert!(back.eigenvalue.re.is_zero());
        assert_eq!(back.jump, rat(3, 5));
        assert_eq!(
            conn_to_higgs(&conn((0, 1), GaussianRational::zero())).unwrap(),
            higgs((0, 1), GaussianRational::zero())
        );
    }

    #[test]
    fn pullback_spectrum_examples() {
        let pts = vec![higgs((1, 3), g((1, 1), (2, 1)))];
        assert_eq!(pullback_spectrum(FieldKind::Higgs, 1, &pts).unwrap(), pts);
        let out =
            pullback_spectrum(FieldKind::Higgs, 2, &[higgs((1, 2), g((1, 4), (1, 1)))]).unwrap();
        assert_eq!(out, vec![higgs((0, 1), g((1, 2), (2, 1)))]);
        let out = pullback_spectrum(FieldKind::Connection, 2, &[conn((0, 1), g((1, 2), (2, 1)))])
            .unwrap();
        assert_eq!(out, vec![conn((0, 1), g((1, 1), (4, 1)))]);
        assert!(pullback_spectrum(FieldKind::Connection, 2, &pts).is_err());
    }

    #[test]
    fn direct_image_spectrum_examples() {
        let pts = vec![conn((1, 4), g((1, 3), (1, 1)))];
        assert_eq!(
            direct_image_spectrum(FieldKind::Connection, &[(1, pts.clone())]).unwrap(),
            pts
        );

        let lambda = g((1, 5), (2, 1));
        let out = direct_image_spectrum(
            FieldKind::Connection,
            &[(2, vec![conn((1, 5), lambda.clone())])],
        )
        .unwrap();
        let eigs: Vec<_> = out.iter().map(|p| p.eigenvalue.clone()).collect();
        assert_eq!(
            eigs,
            vec![
                lambda.scale(&rat(1, 2)),
                (&lambda + &GaussianRational::from_int(1)).scale(&rat(1, 2))
            ]
        );

        let bc = g((1, 3), (-1, 1));
        let out = direct_image_spectrum(FieldKind::Higgs, &[(2, vec![higgs((1, 5), bc.clone())])])
            .unwrap();
        assert_eq!(
            out,
            vec![
                higgs((1, 10), bc.scale(&rat(1, 2))),
                higgs((3, 5), bc.scale(&rat(1, 2)))
            ]
        );
    }

    #[test]
    fn canonical_merges() {
        let p = higgs((1, 2), GaussianRational::zero());
        let merged = canonical(&[p.clone(), p.clone()]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].multiplicity, 2);
    }
}
