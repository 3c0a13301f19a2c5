//! Covering and packing counts.
//!
//! For `delta` in the range of stage `j` both the minimal cover and the
//! maximal packing have `2^j` elements. [`analytic_count`] reads `j` off the
//! closed-form boundaries; the greedy brackets recompute the counts from an
//! enumerated stage set without using that fact.

mod greedy;
mod product;
mod scale;

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{stage_set, StageSet};
use crate::real::{round_prec, working_precision};
use crate::schedule::{GeneratorSchedule, Run, StageCounts};

pub use greedy::{cover_points, cover_union_count, cover_union_windows, pack_points, pack_union_count};
pub use product::{
    grid_count_product, verify_product_inequalities, verify_product_on_sets, PackingCheck, ProductReport,
    GRID_AXIS_BUDGET, PAIR_SAMPLE,
};
pub use scale::{boundary_value, parse_exact_decimal, stage_label, LengthScale};

/// Lower and upper bounds on a count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountBracket {
    pub lower: Integer,
    pub upper: Integer,
}

impl CountBracket {
    pub fn new(lower: Integer, upper: Integer) -> Self {
        assert!(lower <= upper, "bracket lower {lower} exceeds upper {upper}");
        CountBracket { lower, upper }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

impl Serialize for CountBracket {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            lower: String,
            upper: String,
            exact: bool,
        }
        Repr {
            lower: self.lower.to_string(),
            upper: self.upper.to_string(),
            exact: self.is_exact(),
        }
        .serialize(serializer)
    }
}

/// `2^exponent`, kept symbolic when too large to print.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyticCount {
    pub exponent: Integer,
}

impl AnalyticCount {
    const MATERIALIZE_LIMIT: u32 = 1 << 16;

    pub fn value(&self) -> Option<Integer> {
        let e = self.exponent.to_u32().filter(|&e| e <= Self::MATERIALIZE_LIMIT)?;
        Some(Integer::from(1) << e)
    }
}

impl fmt::Display for AnalyticCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) if self.exponent <= 64 => write!(f, "{v}"),
            _ => write!(f, "2^{}", self.exponent),
        }
    }
}

impl Serialize for AnalyticCount {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Where a length scale sits among the stage ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagePosition {
    pub stage: Integer,
    /// `delta` equals the stage-`j` interval length exactly.
    pub on_boundary: bool,
}

/// The stage `j` with `L_j <= delta < L_(j-1)`; `delta >= 1` is stage 0.
pub fn stage_lookup(s: &GeneratorSchedule, delta: &LengthScale) -> Result<Integer> {
    Ok(locate(s, delta)?.stage)
}

/// [`stage_lookup`] together with whether `delta` hits the lower end of the
/// range exactly.
pub fn locate(s: &GeneratorSchedule, delta: &LengthScale) -> Result<StagePosition> {
    match delta.cmp_unit()? {
        Ordering::Greater => {}
        ord => {
            return Ok(StagePosition {
                stage: Integer::new(),
                on_boundary: ord == Ordering::Equal,
            })
        }
    }
    for (run, at_start) in s.runs_with_counts() {
        if let Some(end) = &run.end {
            let at_end = at_start.advance(run.kind, &Integer::from(end - &run.start));
            match delta.cmp_boundary(&at_end)? {
                Ordering::Greater => continue,
                Ordering::Equal => {
                    return Ok(StagePosition {
                        stage: end.clone(),
                        on_boundary: true,
                    })
                }
                Ordering::Less => {}
            }
        }
        return locate_in_run(&run, &at_start, delta);
    }
    unreachable!("the last run is unbounded")
}

/// Search inside one run, known to satisfy `X_start < x` and (when bounded)
/// `x < X_end`. Boundaries grow linearly there, so a floating estimate lands
/// on or next to the answer; galloping and bisection finish the job.
fn locate_in_run(run: &Run, at_start: &StageCounts, delta: &LengthScale) -> Result<StagePosition> {
    let cmp_at = |j: &Integer| delta.cmp_boundary(&at_start.advance(run.kind, &Integer::from(j - &run.start)));
    let one = Integer::from(1);

    let mut lo = run.start.clone();
    let mut hi = run.end.clone();
    let mut hi_equal = false;

    let est = estimate_stage(run, at_start, delta).max(Integer::from(&lo + 1u32));
    let est = match &hi {
        Some(h) if est > *h => h.clone(),
        _ => est,
    };
    match cmp_at(&est)? {
        Ordering::Greater => {
            lo = est;
            let mut step = one.clone();
            loop {
                let probe = Integer::from(&lo + &step);
                if hi.as_ref().is_some_and(|h| probe >= *h) {
                    break;
                }
                match cmp_at(&probe)? {
                    Ordering::Greater => {
                        lo = probe;
                        step <<= 1;
                    }
                    ord => {
                        hi_equal = ord == Ordering::Equal;
                        hi = Some(probe);
                        break;
                    }
                }
            }
        }
        ord => {
            hi_equal = ord == Ordering::Equal;
            hi = Some(est);
            let mut step = one.clone();
            loop {
                let probe = Integer::from(hi.as_ref().unwrap() - &step);
                if probe <= lo {
                    break;
                }
                match cmp_at(&probe)? {
                    Ordering::Greater => {
                        lo = probe;
                        break;
                    }
                    ord => {
                        hi_equal = ord == Ordering::Equal;
                        hi = Some(probe);
                        step <<= 1;
                    }
                }
            }
        }
    }
    let mut hi = hi.expect("galloping found an upper bound");
    while Integer::from(&hi - &lo) > 1 {
        let mid = Integer::from(&lo + &hi) >> 1;
        match cmp_at(&mid)? {
            Ordering::Greater => lo = mid,
            ord => {
                hi_equal = ord == Ordering::Equal;
                hi = mid;
            }
        }
    }
    Ok(StagePosition {
        stage: hi,
        on_boundary: hi_equal,
    })
}

fn estimate_stage(run: &Run, at_start: &StageCounts, delta: &LengthScale) -> Integer {
    let base = working_precision();
    let rough = delta.neg_log(base);
    let magnitude = rough.hi().get_exp().unwrap_or(0).max(0) as u64;
    let prec = round_prec(base as u64 + magnitude + run.start.significant_bits() as u64);
    let x = delta.neg_log(prec).mid();
    let x0 = boundary_value(at_start, prec).mid();
    let ln_k = Float::with_val(prec, run.kind.divisor()).ln();
    let t = Float::with_val(prec, &x - &x0) / ln_k;
    let steps = t.ceil().to_integer().unwrap_or_default().max(Integer::from(1));
    steps + &run.start
}

/// Both covering and packing numbers: `2^j` for the stage of `delta`.
pub fn analytic_count(s: &GeneratorSchedule, delta: &LengthScale) -> Result<AnalyticCount> {
    Ok(AnalyticCount {
        exponent: stage_lookup(s, delta)?,
    })
}

/// Default oracle depth: two stages past the stage of `delta`, clipped to
/// the cap when the stage itself is enumerable.
pub fn default_depth(stage: &Integer, cap: u32) -> u32 {
    match stage.to_u32() {
        Some(j) if j <= cap => (j + 2).min(cap),
        _ => u32::MAX,
    }
}

fn oracle_set(s: &GeneratorSchedule, delta: &LengthScale, depth: Option<u32>, cap: u32) -> Result<StageSet> {
    let stage = stage_lookup(s, delta)?;
    let depth = depth.unwrap_or_else(|| default_depth(&stage, cap));
    if depth < stage {
        return Err(Error::DepthBelowStage {
            depth,
            stage: stage_label(&stage),
        });
    }
    if depth > cap {
        return Err(Error::CapExceeded {
            stage: depth as u64,
            cap,
        });
    }
    stage_set(s, depth, cap)
}

/// Bracket on the covering number from the stage-`depth` enumeration.
pub fn greedy_cover_bracket(
    s: &GeneratorSchedule,
    delta: &LengthScale,
    depth: Option<u32>,
    cap: u32,
) -> Result<CountBracket> {
    cover_bracket_on(&oracle_set(s, delta, depth, cap)?, delta)
}

/// Bracket on the packing number from the stage-`depth` enumeration.
pub fn greedy_pack_bracket(
    s: &GeneratorSchedule,
    delta: &LengthScale,
    depth: Option<u32>,
    cap: u32,
) -> Result<CountBracket> {
    pack_bracket_on(&oracle_set(s, delta, depth, cap)?, delta)
}

/// Endpoints, intervals and `delta` on the common integer grid `1/(D q)`.
pub(crate) struct Scaled {
    pub points: Vec<Integer>,
    pub intervals: Vec<(Integer, Integer)>,
    pub delta: Integer,
}

pub(crate) fn scale_set(set: &StageSet, delta: &Rational) -> Scaled {
    let q = delta.denom();
    let intervals: Vec<(Integer, Integer)> = set
        .scaled_lefts()
        .iter()
        .map(|n| {
            let a = Integer::from(n * q);
            let b = Integer::from(&a + q);
            (a, b)
        })
        .collect();
    let mut points: Vec<Integer> = Vec::with_capacity(intervals.len() * 2);
    for (a, b) in &intervals {
        if points.last() != Some(a) {
            points.push(a.clone());
        }
        points.push(b.clone());
    }
    Scaled {
        points,
        intervals,
        delta: Integer::from(delta.numer() * set.denominator()),
    }
}

/// Cover bracket for one enumerated set: the endpoints lie in the limit set
/// and the stage union contains it.
pub fn cover_bracket_on(set: &StageSet, delta: &LengthScale) -> Result<CountBracket> {
    let (lo, hi) = delta.delta_bounds()?;
    let s = scale_set(set, &hi);
    let lower = Integer::from(cover_points(&s.points, &s.delta).len());
    let s = scale_set(set, &lo);
    let upper = cover_union_count(&s.intervals, &s.delta);
    Ok(CountBracket::new(lower, upper))
}

/// Packing bracket for one enumerated set.
pub fn pack_bracket_on(set: &StageSet, delta: &LengthScale) -> Result<CountBracket> {
    let (lo, hi) = delta.delta_bounds()?;
    let s = scale_set(set, &hi);
    let lower = Integer::from(pack_points(&s.points, &s.delta).len());
    let s = scale_set(set, &lo);
    let upper = pack_union_count(&s.intervals, &s.delta);
    Ok(CountBracket::new(lower, upper))
}

/// Three scales in the range of stage `j`: its lower end, the geometric
/// midpoint (rounded to a rational) and a point just below the upper end.
/// Stage 0 uses `1`, `3/2` and `2`.
pub fn stage_range_samples(s: &GeneratorSchedule, j: u32) -> Result<Vec<(&'static str, LengthScale)>> {
    if j == 0 {
        return Ok(vec![
            ("lower", LengthScale::from_rational(Rational::from(1))?),
            ("mid", LengthScale::from_rational(Rational::from((3, 2)))?),
            ("upper", LengthScale::from_rational(Rational::from(2))?),
        ]);
    }
    let len = |j: u32| {
        let c = crate::schedule::counts_up_to(s, &Integer::from(j));
        crate::geometry::length_from_counts(&c).ok_or_else(|| Error::InvalidArgument(format!("stage {j} too deep")))
    };
    let (lower, upper) = (len(j)?, len(j - 1)?);
    let prec = 192;
    let geo = Float::with_val(prec, Rational::from(&lower * &upper)).sqrt();
    let mid = Float::with_val_round(prec, &geo, Round::Nearest)
        .0
        .to_rational()
        .expect("finite");
    let below = upper * Rational::from(((1u64 << 32) - 1, 1u64 << 32));
    Ok(vec![
        ("lower", LengthScale::from_rational(lower)?),
        ("mid", LengthScale::from_rational(mid)?),
        ("upper", LengthScale::from_rational(below)?),
    ])
}
