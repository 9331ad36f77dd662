//! Residues of local Higgs fields and logarithmic connections, and how they
//! transform under pullback and direct image.
//!
//! Basis convention: a residue is written in a basis adapted to its flag,
//! with basis vectors ordered by increasing weight and each weight's vectors
//! contiguous. Preserving the decreasing filtration then means being block
//! lower-triangular.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::matrix::Matrix;
use crate::parabolic::{Flag, Weight};
use crate::rational::{floor_i64, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Higgs,
    Connection,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Higgs => "higgs",
            FieldKind::Connection => "connection",
        })
    }
}

pub(crate) fn expect_kind(expected: FieldKind, found: FieldKind) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::KindMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

/// Laurent coefficients `A_{-1}, A_0, ..., A_{m-2}` of a Higgs field or
/// connection at a point, truncated at the local multiplicity `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSpectralField {
    kind: FieldKind,
    order: u32,
    coeffs: Vec<Matrix>,
    flag: Flag,
}

impl LocalSpectralField {
    pub fn new(kind: FieldKind, order: u32, coeffs: Vec<Matrix>, flag: Flag) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidValue("order must be at least 1".into()));
        }
        if coeffs.len() != order as usize {
            return Err(Error::SizeMismatch {
                expected: order as usize,
                found: coeffs.len(),
            });
        }
        let r = flag.rank();
        if let Some(bad) = coeffs.iter().find(|a| a.size() != r) {
            return Err(Error::SizeMismatch {
                expected: r,
                found: bad.size(),
            });
        }
        Ok(Self {
            kind,
            order,
            coeffs,
            flag,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    pub fn flag(&self) -> &Flag {
        &self.flag
    }

    pub fn rank(&self) -> usize {
        self.flag.rank()
    }

    /// The coefficient of `dx/x`.
    pub fn residue(&self) -> &Matrix {
        &self.coeffs[0]
    }
}

fn check_size(res: &Matrix, flag: &Flag) -> Result<Vec<usize>> {
    if res.size() != flag.rank() {
        return Err(Error::SizeMismatch {
            expected: flag.rank(),
            found: res.size(),
        });
    }
    Ok(flag.block_index())
}

/// Preserves every step of the filtration.
pub fn check_parabolic(res: &Matrix, flag: &Flag) -> Result<bool> {
    let block = check_size(res, flag)?;
    Ok(all_entries(res, |i, j, v| {
        block[i] >= block[j] || v.is_zero()
    }))
}

/// Maps every step into the next one; such a residue is nilpotent.
pub fn check_strongly_parabolic(res: &Matrix, flag: &Flag) -> Result<bool> {
    let block = check_size(res, flag)?;
    Ok(all_entries(res, |i, j, v| {
        block[i] > block[j] || v.is_zero()
    }))
}

/// Parabolic, and acting on each graded piece as multiplication by its
/// weight.
pub fn check_residual(res: &Matrix, flag: &Flag) -> Result<bool> {
    if !check_parabolic(res, flag)? {
        return Ok(false);
    }
    let block = flag.block_index();
    let weights = flag.basis_weights();
    Ok(all_entries(res, |i, j, v| {
        if block[i] != block[j] {
            true
        } else if i == j {
            *v == GaussianRational::real(weights[i].value().clone())
        } else {
            v.is_zero()
        }
    }))
}

fn all_entries(res: &Matrix, ok: impl Fn(usize, usize, &GaussianRational) -> bool) -> bool {
    let n = res.size();
    (0..n).all(|i| (0..n).all(|j| ok(i, j, res.get(i, j))))
}

/// Residue of the pulled-back Higgs field at a point of multiplicity `m`,
/// in the pulled-back frame: `m · Res`.
pub fn pullback_residue_higgs(m: u32, res: &Matrix) -> Matrix {
    res.scale_rational(&int(i64::from(m)))
}

/// [`pullback_residue_higgs`] expressed in the basis adapted to the
/// pulled-back flag (weights `m a mod 1`, re-sorted).
pub fn pullback_residue_higgs_flagged(m: u32, res: &Matrix, flag: &Flag) -> Result<(Matrix, Flag)> {
    transport(m, res, flag, false)
}

/// Residue of the pulled-back connection: `m · Res - floor(m a) I` on the
/// block of weight `a`, in the basis adapted to the pulled-back flag.
pub fn pullback_residue_conn(m: u32, res: &Matrix, flag: &Flag) -> Result<(Matrix, Flag)> {
    transport(m, res, flag, true)
}

/// Rewrites `m · res` in the frame `y^{-floor(m a)} f^* e` of the pulled-back
/// parabolic bundle.
///
/// A component from a vector with twist `floor(m a)` into one with a larger
/// twist picks up a positive power of `y` and so vanishes at the point; those
/// entries are dropped. With `shift` set (connections) the derivative of the
/// twist contributes `-floor(m a)` on the diagonal.
fn transport(m: u32, res: &Matrix, flag: &Flag, shift: bool) -> Result<(Matrix, Flag)> {
    if !check_parabolic(res, flag)? {
        return Err(Error::NotParabolic);
    }
    let m_q = int(i64::from(m));
    let n = res.size();
    let (twists, new_weights): (Vec<i64>, Vec<Weight>) = flag
        .basis_weights()
        .into_iter()
        .map(|w| {
            let scaled = w.value() * &m_q;
            (floor_i64(&scaled), Weight::reduce(&scaled))
        })
        .unzip();

    let mut scaled = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if twists[i] != twists[j] {
                continue;
            }
            let mut v = res.get(i, j).scale(&m_q);
            if shift && i == j {
                v = &v - &GaussianRational::from_int(twists[i]);
            }
            scaled.set(i, j, v);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| new_weights[a].cmp(&new_weights[b]).then(a.cmp(&b)));
    let pulled_flag = Flag::from_multiset(&new_weights)?;
    Ok((scaled.permuted(&order), pulled_flag))
}

/// Residue of a direct image at the image of a point of multiplicity `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectImageResidue {
    /// Basis ordered by the power `x^k` first, then by the source flag.
    pub matrix: Matrix,
    /// Flag with weights `(k + a) / m`.
    pub flag: Flag,
    /// `order[i]` is the `k`-major index of the `i`-th vector of the
    /// weight-sorted basis.
    pub order: Vec<usize>,
}

impl DirectImageResidue {
    /// The residue in the weight-sorted basis adapted to [`Self::flag`].
    pub fn sorted_matrix(&self) -> Matrix {
        self.matrix.permuted(&self.order)
    }
}

/// `(1/m)` times the block lower-triangular Toeplitz matrix with `A_{-1}` on
/// the diagonal and `A_{k-1}` on the `k`-th block subdiagonal. Connections
/// get `+k I` on the `k`-th diagonal block.
fn direct_image_residue(field: &LocalSpectralField) -> DirectImageResidue {
    let m = field.order as usize;
    let r = field.rank();
    let mut big = Matrix::zeros(m * r);
    for row in 0..m {
        for col in 0..=row {
            let mut block = field.coeffs[row - col].clone();
            if row == col && field.kind == FieldKind::Connection {
                block = &block + &Matrix::scalar(r, GaussianRational::from_int(row as i64));
            }
            big.place(row * r, col * r, &block);
        }
    }
    let inv_m = Rational::new(1.into(), (m as i64).into());
    let matrix = big.scale_rational(&inv_m);

    let source_weights = field.flag.basis_weights();
    let weights: Vec<Weight> = (0..m)
        .flat_map(|k| {
            let inv_m = &inv_m;
            source_weights.iter().map(move |a| {
                Weight::new((int(k as i64) + a.value()) * inv_m)
                    .expect("(k + a) / m lies in [0, 1)")
            })
        })
        .collect();
    let mut order: Vec<usize> = (0..m * r).collect();
    order.sort_by(|&a, &b| weights[a].cmp(&weights[b]).then(a.cmp(&b)));
    let flag = Flag::from_multiset(&weights).expect("nonempty basis");
    DirectImageResidue {
        matrix,
        flag,
        order,
    }
}

pub fn direct_image_residue_higgs(field: &LocalSpectralField) -> Result<DirectImageResidue> {
    expect_kind(FieldKind::Higgs, field.kind)?;
    Ok(direct_image_residue(field))
}

pub fn direct_image_residue_conn(field: &LocalSpectralField) -> Result<DirectImageResidue> {
    expect_kind(FieldKind::Connection, field.kind)?;
    Ok(direct_image_residue(field))
}

/// `tr(Res^i)` for `i = 1..=up_to`: the leading coefficients of the Hitchin
/// invariants at the point.
pub fn hitchin_traces(res: &Matrix, up_to: usize) -> Vec<GaussianRational> {
    let mut out = Vec::with_capacity(up_to);
    let mut power = Matrix::identity(res.size());
    for _ in 0..up_to {
        power = &power * res;
        out.push(power.trace());
    }
    out
}

/// Sorted eigenvalues of a triangular matrix, read off the diagonal.
pub fn triangular_eigenvalues(res: &Matrix) -> Option<Vec<GaussianRational>> {
    let n = res.size();
    let upper = (0..n).all(|i| (0..i).all(|j| res.get(i, j).is_zero()));
    if !res.is_lower_triangular() && !upper {
        return None;
    }
    let mut diag = res.diagonal_entries();
    diag.sort();
    Some(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Polynomial;
    use crate::parabolic::FlagStep;
    use crate::rational::rat;

    fn q(n: i64, d: i64) -> GaussianRational {
        GaussianRational::real(rat(n, d))
    }

    fn mat(rows: &[&[GaussianRational]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn flag(steps: &[((i64, i64), usize)]) -> Flag {
        Flag::new(
            steps
                .iter()
                .map(|&((n, d), multiplicity)| FlagStep {
                    weight: Weight::new(rat(n, d)).unwrap(),
                    multiplicity,
                })
                .collect(),
        )
        .unwrap()
    }

    fn field(kind: FieldKind, coeffs: Vec<Matrix>, flag: Flag) -> LocalSpectralField {
        LocalSpectralField::new(kind, coeffs.len() as u32, coeffs, flag).unwrap()
    }

    #[test]
    fn residue_is_leading_coefficient() {
        let f = field(
            FieldKind::Higgs,
            vec![mat(&[&[q(3, 1)]]), mat(&[&[q(7, 1)]])],
            Flag::trivial(1),
        );
        assert_eq!(f.residue(), &mat(&[&[q(3, 1)]]));
        let z = field(FieldKind::Higgs, vec![Matrix::zeros(2)], Flag::trivial(2));
        assert!(z.residue().is_zero());
        assert!(LocalSpectralField::new(
            FieldKind::Higgs,
            2,
            vec![Matrix::zeros(2)],
            Flag::trivial(2)
        )
        .is_err());
        assert!(LocalSpectralField::new(
            FieldKind::Higgs,
            1,
            vec![Matrix::zeros(3)],
            Flag::trivial(2)
        )
        .is_err());
    }

    #[test]
    fn parabolic_checks() {
        let fl = flag(&[((0, 1), 1), ((1, 2), 1)]);
        let diag = mat(&[&[q(1, 1), q(0, 1)], &[q(0, 1), q(2, 1)]]);
        assert!(check_parabolic(&diag, &fl).unwrap());
        let upper = mat(&[&[q(0, 1), q(1, 1)], &[q(0, 1), q(0, 1)]]);
        assert!(!check_parabolic(&upper, &fl).unwrap());
        let any = mat(&[&[q(1, 1), q(5, 1)], &[q(3, 1), q(2, 1)]]);
        assert!(check_parabolic(&any, &Flag::trivial(2)).unwrap());
        assert!(check_parabolic(&any, &Flag::trivial(3)).is_err());

        assert!(check_strongly_parabolic(&Matrix::zeros(2), &fl).unwrap());
        assert!(!check_strongly_parabolic(&diag, &fl).unwrap());
        let lower = mat(&[&[q(0, 1), q(0, 1)], &[q(4, 1), q(0, 1)]]);
        assert!(check_strongly_parabolic(&lower, &fl).unwrap());
        assert!((&lower * &lower).is_zero());

        assert!(check_residual(&Matrix::zeros(3), &Flag::trivial(3)).unwrap());
        assert!(check_residual(&mat(&[&[q(1, 2)]]), &flag(&[((1, 2), 1)])).unwrap());
        let wrong = mat(&[&[q(0, 1), q(0, 1)], &[q(0, 1), q(1, 3)]]);
        assert!(!check_residual(&wrong, &fl).unwrap());
    }

    #[test]
    fn pullback_residue_examples() {
        let a = mat(&[&[q(1, 4)]]);
        assert_eq!(pullback_residue_higgs(1, &a), a);
        assert_eq!(pullback_residue_higgs(3, &a), mat(&[&[q(3, 4)]]));
        let nil = mat(&[&[q(0, 1), q(0, 1)], &[q(5, 1), q(0, 1)]]);
        assert!((&pullback_residue_higgs(4, &nil) * &pullback_residue_higgs(4, &nil)).is_zero());

        let any = mat(&[&[q(1, 1), q(5, 1)], &[q(3, 1), q(2, 1)]]);
        let (pulled, fl) = pullback_residue_conn(3, &any, &Flag::trivial(2)).unwrap();
        assert_eq!(pulled, any.scale_rational(&int(3)));
        assert_eq!(fl, Flag::trivial(2));

        let b_ci = GaussianRational::new(rat(2, 7), rat(-1, 3));
        let (pulled, fl) = pullback_residue_conn(
            2,
            &mat(&[std::slice::from_ref(&b_ci)]),
            &flag(&[((1, 2), 1)]),
        )
        .unwrap();
        assert_eq!(fl, Flag::trivial(1));
        assert_eq!(
            pulled,
            mat(&[&[GaussianRational::new(rat(4, 7) - int(1), rat(-2, 3))]])
        );

        let (pulled, fl) =
            pullback_residue_conn(2, &mat(&[&[q(1, 2)]]), &flag(&[((1, 2), 1)])).unwrap();
        assert_eq!(pulled, mat(&[&[q(0, 1)]]));
        assert!(check_residual(&pulled, &fl).unwrap());

        assert_eq!(
            pullback_residue_conn(
                2,
                &mat(&[&[q(0, 1), q(1, 1)], &[q(0, 1), q(0, 1)]]),
                &flag(&[((0, 1), 1), ((1, 2), 1)])
            ),
            Err(Error::NotParabolic)
        );
    }

    #[test]
    fn pullback_conn_reorders_and_truncates() {
        // weights 1/3 < 2/3 become 2/3 and 1/3 under m = 2; the twists are
        // 0 and 1, so the off-diagonal entry vanishes at the point.
        let fl = flag(&[((1, 3), 1), ((2, 3), 1)]);
        let res = mat(&[&[q(1, 3), q(0, 1)], &[q(7, 1), q(2, 3)]]);
        assert!(check_residual(&res, &fl).unwrap());
        let (pulled, new_flag) = pullback_residue_conn(2, &res, &fl).unwrap();
        assert_eq!(new_flag, fl);
        assert_eq!(pulled, mat(&[&[q(1, 3), q(0, 1)], &[q(0, 1), q(2, 3)]]));
        assert!(check_residual(&pulled, &new_flag).unwrap());
    }

    #[test]
    fn direct_image_higgs_examples() {
        let f = field(
            FieldKind::Higgs,
            vec![mat(&[&[q(0, 1)]]), mat(&[&[q(1, 1)]])],
            Flag::trivial(1),
        );
        let d = direct_image_residue_higgs(&f).unwrap();
        assert_eq!(d.matrix, mat(&[&[q(0, 1), q(0, 1)], &[q(1, 2), q(0, 1)]]));
        assert_eq!(
            triangular_eigenvalues(&d.matrix).unwrap(),
            vec![q(0, 1), q(0, 1)]
        );
        assert_eq!(d.flag, flag(&[((0, 1), 1), ((1, 2), 1)]));
        assert_eq!(d.order, vec![0, 1]);

        let a = mat(&[&[q(1, 1), q(2, 1)], &[q(3, 1), q(4, 1)]]);
        let f = field(FieldKind::Higgs, vec![a.clone()], Flag::trivial(2));
        assert_eq!(direct_image_residue_higgs(&f).unwrap().matrix, a);
        assert!(direct_image_residue_conn(&f).is_err());
    }

    #[test]
    fn direct_image_char_poly_is_power() {
        let a = mat(&[&[q(1, 1), q(2, 1)], &[q(3, 1), q(4, 1)]]);
        let b = mat(&[&[q(0, 1), q(-1, 1)], &[q(5, 1), q(1, 2)]]);
        let c = mat(&[&[q(2, 1), q(0, 1)], &[q(1, 1), q(1, 1)]]);
        let f = field(FieldKind::Higgs, vec![a.clone(), b, c], Flag::trivial(2));
        let d = direct_image_residue_higgs(&f).unwrap();
        let expected = a.scale_rational(&rat(1, 3)).char_poly().pow(3);
        assert_eq!(d.matrix.char_poly(), expected);
    }

    #[test]
    fn direct_image_conn_examples() {
        let lambda = GaussianRational::new(rat(1, 5), rat(2, 1));
        let a0 = q(7, 3);
        let f = field(
            FieldKind::Connection,
            vec![
                mat(&[std::slice::from_ref(&lambda)]),
                mat(&[std::slice::from_ref(&a0)]),
            ],
            Flag::trivial(1),
        );
        let d = direct_image_residue_conn(&f).unwrap();
        let half = rat(1, 2);
        let lambda1 = &lambda + &GaussianRational::from_int(1);
        assert_eq!(
            d.matrix,
            mat(&[
                &[lambda.scale(&half), q(0, 1)],
                &[a0.scale(&half), lambda1.scale(&half)]
            ])
        );
        let mut expected = vec![lambda.scale(&half), lambda1.scale(&half)];
        expected.sort();
        assert_eq!(triangular_eigenvalues(&d.matrix).unwrap(), expected);
        assert_eq!(d.matrix.char_poly(), Polynomial::from_roots(&expected));

        let g = field(
            FieldKind::Connection,
            vec![mat(&[std::slice::from_ref(&lambda)])],
            Flag::trivial(1),
        );
        assert_eq!(
            direct_image_residue_conn(&g).unwrap().matrix,
            mat(&[&[lambda]])
        );
    }

    #[test]
    fn hitchin_trace_examples() {
        assert_eq!(hitchin_traces(&Matrix::zeros(3), 3), vec![q(0, 1); 3]);
        let swap = mat(&[&[q(0, 1), q(1, 1)], &[q(1, 1), q(0, 1)]]);
        assert_eq!(hitchin_traces(&swap, 2), vec![q(0, 1), q(2, 1)]);
    }
}
