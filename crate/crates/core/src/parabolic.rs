//! Split parabolic bundles and their characteristic data.
//!
//! A [`SplitParabolicBundle`] is a direct sum of parabolic line bundles. Its
//! [`ParabolicChar`] keeps only rank, underlying degree and the weight
//! multiset at each marked point, which is all the degree and stability
//! bookkeeping needs. Flags are derived from the multisets on demand.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::curve::{MarkedCurve, Point};
use crate::error::{Error, Result};
use crate::rational::{floor_i64, format_rational, frac, int, is_unit_interval, Rational};

/// Parabolic weight, an exact rational in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Rational);

impl Weight {
    pub fn new(value: Rational) -> Result<Self> {
        if is_unit_interval(&value) {
            Ok(Self(value))
        } else {
            Err(Error::WeightOutOfRange(format_rational(&value)))
        }
    }

    pub fn zero() -> Self {
        Self(Rational::zero())
    }

    /// The fractional part of any rational.
    pub fn reduce(value: &Rational) -> Self {
        Self(frac(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// Parabolic line bundle: degree plus a weight at each marked point.
/// Zero weights are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParaLine {
    curve: MarkedCurve,
    degree: i64,
    weights: BTreeMap<Point, Weight>,
}

impl ParaLine {
    pub fn new(
        curve: MarkedCurve,
        degree: i64,
        weights: impl IntoIterator<Item = (Point, Weight)>,
    ) -> Result<Self> {
        let mut stored = BTreeMap::new();
        for (p, w) in weights {
            if w.is_zero() {
                continue;
            }
            if !curve.contains(&p) {
                return Err(Error::UnknownPoint { point: p });
            }
            stored.insert(p, w);
        }
        Ok(Self {
            curve,
            degree,
            weights: stored,
        })
    }

    pub fn trivial(curve: MarkedCurve) -> Self {
        Self {
            curve,
            degree: 0,
            weights: BTreeMap::new(),
        }
    }

    pub fn curve(&self) -> &MarkedCurve {
        &self.curve
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn weights(&self) -> &BTreeMap<Point, Weight> {
        &self.weights
    }

    pub fn weight_at(&self, p: &Point) -> Weight {
        self.weights.get(p).cloned().unwrap_or_else(Weight::zero)
    }

    pub fn par_deg(&self) -> Rational {
        self.weights
            .values()
            .fold(int(self.degree), |acc, w| acc + w.value())
    }

    /// Parabolic dual: every nonzero weight `a` becomes `1 - a` and costs one
    /// degree, so the parabolic degree changes sign.
    pub fn dual(&self) -> Self {
        let mut degree = -self.degree;
        let mut weights = BTreeMap::new();
        for (p, w) in &self.weights {
            degree -= 1;
            weights.insert(p.clone(), Weight(Rational::one() - w.value()));
        }
        Self {
            curve: self.curve.clone(),
            degree,
            weights,
        }
    }

    /// Parabolic tensor product; weights add modulo 1 and the carries go
    /// into the degree.
    pub fn tensor(&self, other: &ParaLine) -> Result<Self> {
        if self.curve != other.curve {
            return Err(Error::CurveMismatch(
                "tensor product of lines on different curves".into(),
            ));
        }
        let mut degree = self.degree + other.degree;
        let mut weights = BTreeMap::new();
        for p in self.weights.keys().chain(other.weights.keys()) {
            if weights.contains_key(p) {
                continue;
            }
            let sum = self.weight_at(p).value() + other.weight_at(p).value();
            degree += floor_i64(&sum);
            let w = Weight::reduce(&sum);
            weights.insert(p.clone(), w);
        }
        weights.retain(|_, w| !w.is_zero());
        Ok(Self {
            curve: self.curve.clone(),
            degree,
            weights,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SplitParabolicBundle {
    summands: Vec<ParaLine>,
}

impl SplitParabolicBundle {
    pub fn new(summands: Vec<ParaLine>) -> Result<Self> {
        let Some(first) = summands.first() else {
            return Err(Error::InvalidValue(
                "a split bundle needs at least one summand".into(),
            ));
        };
        if summands.iter().any(|l| l.curve != first.curve) {
            return Err(Error::CurveMismatch(
                "summands live on different curves".into(),
            ));
        }
        Ok(Self { summands })
    }

    pub fn summands(&self) -> &[ParaLine] {
        &self.summands
    }

    pub fn curve(&self) -> &MarkedCurve {
        &self.summands[0].curve
    }

    pub fn rank(&self) -> usize {
        self.summands.len()
    }

    pub fn char(&self) -> ParabolicChar {
        let mut weights: BTreeMap<Point, Vec<Weight>> = BTreeMap::new();
        for line in &self.summands {
            for p in line.weights.keys() {
                weights.entry(p.clone()).or_default();
            }
        }
        for (p, multiset) in weights.iter_mut() {
            multiset.extend(self.summands.iter().map(|l| l.weight_at(p)));
        }
        ParabolicChar::from_parts(
            self.curve().clone(),
            self.rank(),
            self.summands.iter().map(|l| l.degree).sum(),
            weights,
        )
        .expect("multisets built from summands have the right size")
    }

    pub fn par_deg(&self) -> Rational {
        self.summands.iter().map(ParaLine::par_deg).sum()
    }

    pub fn slope(&self) -> Rational {
        self.par_deg() / int(self.rank() as i64)
    }

    /// Characteristic data of `End = E ⊗ E^∨`, i.e. of all `L_i ⊗ L_j^∨`.
    pub fn end_char(&self) -> ParabolicChar {
        let mut lines = Vec::with_capacity(self.rank() * self.rank());
        for li in &self.summands {
            for lj in &self.summands {
                lines.push(li.tensor(&lj.dual()).expect("summands share a curve"));
            }
        }
        SplitParabolicBundle { summands: lines }.char()
    }

    /// All nonempty proper sub-sums, in increasing bitmask order of the
    /// summand indices.
    pub fn sub_sums(&self) -> Vec<SplitParabolicBundle> {
        let r = self.rank();
        if r < 2 {
            return Vec::new();
        }
        assert!(r < 31, "sub-sum enumeration is exponential in the rank");
        (1u32..(1 << r) - 1)
            .map(|mask| SplitParabolicBundle {
                summands: (0..r)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.summands[i].clone())
                    .collect(),
            })
            .collect()
    }

    pub fn is_semistable(&self) -> bool {
        let mu = self.slope();
        self.sub_sums().iter().all(|s| s.slope() <= mu)
    }

    /// Strict inequality for every proper sub-sum; only rank one passes.
    pub fn is_stable(&self) -> bool {
        let mu = self.slope();
        self.sub_sums().iter().all(|s| s.slope() < mu)
    }

    pub fn is_polystable(&self) -> bool {
        let mu = self.slope();
        self.summands.iter().all(|l| l.par_deg() == mu)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlagStep {
    pub weight: Weight,
    pub multiplicity: usize,
}

/// Weighted flag at a point, listed by strictly increasing weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flag {
    steps: Vec<FlagStep>,
}

impl Flag {
    pub fn new(steps: Vec<FlagStep>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidValue("a flag needs at least one step".into()));
        }
        if steps.iter().any(|s| s.multiplicity == 0) {
            return Err(Error::InvalidValue("flag step with multiplicity 0".into()));
        }
        if steps.windows(2).any(|w| w[0].weight >= w[1].weight) {
            return Err(Error::InvalidValue(
                "flag weights must strictly increase".into(),
            ));
        }
        Ok(Self { steps })
    }

    pub fn trivial(rank: usize) -> Self {
        Self {
            steps: vec![FlagStep {
                weight: Weight::zero(),
                multiplicity: rank,
            }],
        }
    }

    /// Sorts the weights and merges repeats.
    pub fn from_multiset<'a>(weights: impl IntoIterator<Item = &'a Weight>) -> Result<Self> {
        let mut counts: BTreeMap<&Weight, usize> = BTreeMap::new();
        for w in weights {
            *counts.entry(w).or_default() += 1;
        }
        Self::new(
            counts
                .into_iter()
                .map(|(w, multiplicity)| FlagStep {
                    weight: w.clone(),
                    multiplicity,
                })
                .collect(),
        )
    }

    pub fn steps(&self) -> &[FlagStep] {
        &self.steps
    }

    pub fn rank(&self) -> usize {
        self.steps.iter().map(|s| s.multiplicity).sum()
    }

    /// Weight of each basis vector, in the increasing-weight basis order.
    pub fn basis_weights(&self) -> Vec<&Weight> {
        self.steps
            .iter()
            .flat_map(|s| std::iter::repeat_n(&s.weight, s.multiplicity))
            .collect()
    }

    /// Step index of each basis vector.
    pub fn block_index(&self) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .flat_map(|(i, s)| std::iter::repeat_n(i, s.multiplicity))
            .collect()
    }
}

/// Rank, underlying degree and per-point weight multisets.
///
/// Multisets are kept sorted, and points whose multiset is all zero are
/// dropped, so structural equality is equality of the data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParabolicChar {
    curve: MarkedCurve,
    rank: usize,
    degree: i64,
    weights: BTreeMap<Point, Vec<Weight>>,
}

impl ParabolicChar {
    pub fn from_parts(
        curve: MarkedCurve,
        rank: usize,
        degree: i64,
        weights: BTreeMap<Point, Vec<Weight>>,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidValue("rank must be at least 1".into()));
        }
        let mut stored = BTreeMap::new();
        for (p, mut multiset) in weights {
            if !curve.contains(&p) {
                return Err(Error::UnknownPoint { point: p });
            }
            if multiset.len() != rank {
                return Err(Error::SizeMismatch {
                    expected: rank,
                    found: multiset.len(),
                });
            }
            if multiset.iter().all(Weight::is_zero) {
                continue;
            }
            multiset.sort();
            stored.insert(p, multiset);
        }
        Ok(Self {
            curve,
            rank,
            degree,
            weights: stored,
        })
    }

    /// Like [`ParabolicChar::from_parts`], but first marks every point that
    /// carries a nonzero weight.
    pub(crate) fn on_extended_curve(
        curve: &MarkedCurve,
        rank: usize,
        degree: i64,
        weights: BTreeMap<Point, Vec<Weight>>,
    ) -> Result<Self> {
        let support: Vec<&Point> = weights
            .iter()
            .filter(|(_, ws)| ws.iter().any(|w| !w.is_zero()))
            .map(|(p, _)| p)
            .collect();
        let curve = curve.with_points(support);
        let weights = weights
            .into_iter()
            .filter(|(p, _)| curve.contains(p))
            .collect();
        Self::from_parts(curve, rank, degree, weights)
    }

    pub fn trivial(curve: MarkedCurve, rank: usize) -> Self {
        Self {
            curve,
            rank,
            degree: 0,
            weights: BTreeMap::new(),
        }
    }

    pub fn curve(&self) -> &MarkedCurve {
        &self.curve
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// Points with a nonzero weight.
    pub fn weights(&self) -> &BTreeMap<Point, Vec<Weight>> {
        &self.weights
    }

    pub fn multiset_at(&self, p: &Point) -> Vec<Weight> {
        self.weights
            .get(p)
            .cloned()
            .unwrap_or_else(|| vec![Weight::zero(); self.rank])
    }

    pub fn flag_at(&self, p: &Point) -> Flag {
        match self.weights.get(p) {
            Some(ws) => Flag::from_multiset(ws).expect("multiset is nonempty"),
            None => Flag::trivial(self.rank),
        }
    }

    pub fn par_deg(&self) -> Rational {
        self.weights
            .values()
            .flatten()
            .fold(int(self.degree), |acc, w| acc + w.value())
    }

    pub fn slope(&self) -> Rational {
        self.par_deg() / int(self.rank as i64)
    }

    /// Direct sum of `copies` copies of `self`.
    pub fn repeated(&self, copies: usize) -> Self {
        let weights = self
            .weights
            .iter()
            .map(|(p, ws)| {
                let mut all: Vec<Weight> =
                    ws.iter().cloned().cycle().take(ws.len() * copies).collect();
                all.sort();
                (p.clone(), all)
            })
            .collect();
        Self {
            curve: self.curve.clone(),
            rank: self.rank * copies,
            degree: self.degree * copies as i64,
            weights,
        }
    }

    /// Compares everything except the set of marked points of the curve
    /// (which may differ by points carrying only zero weight).
    pub fn same_data(&self, other: &Self) -> bool {
        self.curve.genus() == other.curve.genus()
            && self.rank == other.rank
            && self.degree == other.degree
            && self.weights == other.weights
    }
}
