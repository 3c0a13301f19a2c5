//! Exact stage sets `F_j`.
//!
//! Every interval of stage `j` has the same length `1/D_j` with
//! `D_j = 3^f3 5^f5 7^f7`, and every endpoint is a multiple of `1/D_j`.
//! A [`StageSet`] therefore stores the shared denominator once and the left
//! endpoint numerators in order; the public view is canonical rationals.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::schedule::{counts_up_to, GeneratorKind, GeneratorSchedule, StageCounts};

pub type ExactRational = Rational;

/// Default deepest stage that may be enumerated (2^22 intervals).
pub const DEFAULT_ENUMERATION_CAP: u32 = 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstructionInterval {
    left: ExactRational,
    right: ExactRational,
}

impl ConstructionInterval {
    pub fn new(left: ExactRational, right: ExactRational) -> Result<Self> {
        if !(left < right && left >= 0 && right <= 1) {
            return Err(Error::InvalidArgument(format!(
                "[{left}, {right}] is not a subinterval of [0, 1]"
            )));
        }
        Ok(ConstructionInterval { left, right })
    }

    pub fn unit() -> Self {
        ConstructionInterval {
            left: Rational::new(),
            right: Rational::from(1),
        }
    }

    pub fn left(&self) -> &ExactRational {
        &self.left
    }

    pub fn right(&self) -> &ExactRational {
        &self.right
    }

    pub fn length(&self) -> ExactRational {
        Rational::from(&self.right - &self.left)
    }

    pub fn contains(&self, other: &ConstructionInterval) -> bool {
        self.left <= other.left && other.right <= self.right
    }

    /// Keeps the two end pieces of relative length `1/divisor`.
    pub fn apply_generator(&self, g: GeneratorKind) -> (ConstructionInterval, ConstructionInterval) {
        let side = self.length() * g.kept_fraction();
        let left = ConstructionInterval {
            left: self.left.clone(),
            right: Rational::from(&self.left + &side),
        };
        let right = ConstructionInterval {
            left: Rational::from(&self.right - &side),
            right: self.right.clone(),
        };
        (left, right)
    }
}

/// All `2^j` intervals of stage `j`, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSet {
    stage: u32,
    denominator: Integer,
    lefts: Vec<Integer>,
    counts: StageCounts,
}

impl StageSet {
    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn len(&self) -> usize {
        self.lefts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lefts.is_empty()
    }

    pub fn counts(&self) -> &StageCounts {
        &self.counts
    }

    /// `D_j`; every interval is `[n/D_j, (n+1)/D_j]`.
    pub fn denominator(&self) -> &Integer {
        &self.denominator
    }

    /// Left endpoint numerators over [`Self::denominator`].
    pub fn scaled_lefts(&self) -> &[Integer] {
        &self.lefts
    }

    pub fn interval_length(&self) -> ExactRational {
        Rational::from((Integer::from(1), self.denominator.clone()))
    }

    pub fn interval(&self, i: usize) -> ConstructionInterval {
        let n = &self.lefts[i];
        ConstructionInterval {
            left: Rational::from((n.clone(), self.denominator.clone())),
            right: Rational::from((Integer::from(n + 1u32), self.denominator.clone())),
        }
    }

    pub fn intervals(&self) -> impl Iterator<Item = ConstructionInterval> + '_ {
        (0..self.len()).map(move |i| self.interval(i))
    }

    /// Sorted endpoints of all intervals, scaled by the denominator.
    pub fn scaled_endpoints(&self) -> impl Iterator<Item = Integer> + '_ {
        self.lefts.iter().flat_map(|n| [n.clone(), Integer::from(n + 1u32)])
    }

    /// Sorted endpoints as exact rationals.
    pub fn endpoints(&self) -> impl Iterator<Item = ExactRational> + '_ {
        self.scaled_endpoints()
            .map(move |n| Rational::from((n, self.denominator.clone())))
    }
}

/// Stage `j` of the construction, starting from `[0, 1]`.
pub fn stage_set(s: &GeneratorSchedule, j: u32, cap: u32) -> Result<StageSet> {
    if j > cap {
        return Err(Error::CapExceeded { stage: j as u64, cap });
    }
    let mut denominator = Integer::from(1);
    let mut lefts = vec![Integer::new()];
    let mut counts = StageCounts::zero();
    let target = Integer::from(j);
    for run in s.runs() {
        let stop = match &run.end {
            Some(e) if *e < target => e.to_u32().unwrap(),
            _ => j,
        };
        let start = run.start.to_u32().unwrap();
        let r = run.kind.divisor();
        for _ in start..stop {
            // [n, n+1]/D becomes [nr, nr+r]/(rD); keep [nr, nr+1] and [nr+r-1, nr+r]
            let mut next = Vec::with_capacity(lefts.len() * 2);
            for n in &lefts {
                let base = Integer::from(n * r);
                let far = Integer::from(&base + (r - 1));
                next.push(base);
                next.push(far);
            }
            lefts = next;
            denominator *= r;
        }
        counts = counts.advance(run.kind, &Integer::from(stop - start));
        if stop == j {
            break;
        }
    }
    debug_assert_eq!(counts, counts_up_to(s, &target));
    Ok(StageSet {
        stage: j,
        denominator,
        lefts,
        counts,
    })
}

/// Exponent triple of the common interval length at stage `j`.
pub fn stage_length_exponents(s: &GeneratorSchedule, j: &Integer) -> StageCounts {
    counts_up_to(s, j)
}

/// Exact interval length `3^-f3 7^-f7 5^-f5` for modest exponents.
pub fn length_from_counts(counts: &StageCounts) -> Option<ExactRational> {
    let (f3, f7, f5) = counts.exponents();
    let (f3, f7, f5) = (f3.to_u32()?, f7.to_u32()?, f5.to_u32()?);
    let d = Integer::from(Integer::u_pow_u(3, f3))
        * Integer::from(Integer::u_pow_u(7, f7))
        * Integer::from(Integer::u_pow_u(5, f5));
    Some(Rational::from((Integer::from(1), d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn iv(a: (i64, i64), b: (i64, i64)) -> ConstructionInterval {
        ConstructionInterval::new(q(a.0, a.1), q(b.0, b.1)).unwrap()
    }

    #[test]
    fn generator_examples() {
        let unit = ConstructionInterval::unit();
        assert_eq!(
            unit.apply_generator(GeneratorKind::G3),
            (iv((0, 1), (1, 3)), iv((2, 3), (1, 1)))
        );
        assert_eq!(
            unit.apply_generator(GeneratorKind::G7),
            (iv((0, 1), (1, 7)), iv((6, 7), (1, 1)))
        );
        let right = iv((4, 5), (1, 1));
        assert_eq!(
            right.apply_generator(GeneratorKind::G5),
            (iv((4, 5), (21, 25)), iv((24, 25), (1, 1)))
        );
    }

    #[test]
    fn rejects_degenerate_intervals() {
        assert!(ConstructionInterval::new(q(1, 2), q(1, 2)).is_err());
        assert!(ConstructionInterval::new(q(-1, 2), q(1, 2)).is_err());
        assert!(ConstructionInterval::new(q(1, 2), q(3, 2)).is_err());
    }

    #[test]
    fn stage_set_examples() {
        let f = GeneratorSchedule::builtin("F").unwrap();
        let s0: Vec<_> = stage_set(&f, 0, 22).unwrap().intervals().collect();
        assert_eq!(s0, vec![ConstructionInterval::unit()]);
        let s1: Vec<_> = stage_set(&f, 1, 22).unwrap().intervals().collect();
        assert_eq!(s1, vec![iv((0, 1), (1, 5)), iv((4, 5), (1, 1))]);
        let s2: Vec<_> = stage_set(&f, 2, 22).unwrap().intervals().collect();
        assert_eq!(
            s2,
            vec![
                iv((0, 1), (1, 25)),
                iv((4, 25), (1, 5)),
                iv((4, 5), (21, 25)),
                iv((24, 25), (1, 1))
            ]
        );
    }

    #[test]
    fn cap_is_enforced() {
        let f = GeneratorSchedule::builtin("F").unwrap();
        let err = stage_set(&f, 23, DEFAULT_ENUMERATION_CAP).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { stage: 23, cap: 22 }));
        assert!(err.to_string().contains("22"));
    }

    #[test]
    fn length_exponent_examples() {
        let f = GeneratorSchedule::builtin("F").unwrap();
        let g = GeneratorSchedule::builtin("G").unwrap();
        let e = |s: &GeneratorSchedule, j: u32| {
            let (a, b, c) = stage_length_exponents(s, &Integer::from(j)).exponents();
            (a.to_u32().unwrap(), b.to_u32().unwrap(), c.to_u32().unwrap())
        };
        assert_eq!(e(&f, 100), (90, 0, 10));
        assert_eq!(e(&f, 3), (0, 0, 3));
        assert_eq!(e(&g, 100), (0, 0, 100));
    }

    #[test]
    fn lengths_match_closed_form() {
        let f = GeneratorSchedule::builtin("F-desk").unwrap();
        for j in 0..10 {
            let set = stage_set(&f, j, 22).unwrap();
            let expected = length_from_counts(set.counts()).unwrap();
            assert!(set.intervals().all(|i| i.length() == expected));
            assert_eq!(set.len(), 1 << j);
        }
    }
}
