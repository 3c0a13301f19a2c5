//! Box-counting profiles `phi(x) = j ln 2 / x` with `x = -ln delta`.
//!
//! `phi` is a step-wise hyperbola: on the x-range of stage `j` it equals
//! `j ln 2 / x`, falling from `j ln 2 / X_(j-1)` (not attained) to
//! `j ln 2 / X_j`. Within a run of one generator both ends are monotone in
//! `j`, so extrema over a range of stages are found at run ends.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::counting::{boundary_value, locate, stage_label, LengthScale};
use crate::error::{Error, Result};
use crate::real::{format_sci, logs, round_prec, working_precision, Real};
use crate::schedule::{counts_up_to, GeneratorKind, GeneratorSchedule, StageCounts};

/// Digits used for `phi` values in reports.
pub const REPORT_DIGITS: usize = 40;

/// `ln 2 / ln 3`, `ln 2 / ln 5`, `ln 2 / ln 7`.
pub fn dimension_targets(prec: u32) -> (Real, Real, Real) {
    let t = logs(prec);
    let q = |d: &Real| t.ln2.div(d).expect("positive log");
    (q(&t.ln3), q(&t.ln5), q(&t.ln7))
}

/// `X_j = f3 ln 3 + f7 ln 7 + f5 ln 5` for `j >= 1`.
pub fn boundary_log(s: &GeneratorSchedule, j: &Integer) -> Result<Real> {
    if *j < 1 {
        return Err(Error::InvalidArgument(format!("boundary_log needs j >= 1, got {j}")));
    }
    Ok(boundary_value(&counts_up_to(s, j), working_precision() + 64))
}

/// `numerator ln 2 / X` for the boundary described by `counts`, evaluated
/// through the exact ratios `f / numerator` so the precision does not grow
/// with the stage.
fn phi_over(counts: &StageCounts, numerator: &Integer, prec: u32) -> Real {
    let p = round_prec(prec as u64 + 64);
    let t = logs(p);
    let (f3, f7, f5) = counts.exponents();
    let r = |f: Integer| Real::from_rational(&Rational::from((f, numerator.clone())), p);
    let per_stage = t.ln3.mul(&r(f3)).add(&t.ln7.mul(&r(f7))).add(&t.ln5.mul(&r(f5)));
    t.ln2.div(&per_stage).expect("positive boundary")
}

/// `phi` at `x = X_j` (the smallest value on stage `j`'s range).
pub fn phi_at_boundary(s: &GeneratorSchedule, j: &Integer) -> Result<Real> {
    if *j < 1 {
        return Err(Error::InvalidArgument(format!("stage {j} has no boundary profile")));
    }
    Ok(phi_over(&counts_up_to(s, j), j, working_precision()))
}

/// Right limit of `phi` at `x = X_j`, i.e. the supremum on stage `j + 1`.
pub fn phi_right_limit(s: &GeneratorSchedule, j: &Integer) -> Result<Real> {
    if *j < 1 {
        return Err(Error::InvalidArgument(format!("stage {j} has no boundary profile")));
    }
    Ok(phi_over(
        &counts_up_to(s, j),
        &Integer::from(j + 1u32),
        working_precision(),
    ))
}

#[derive(Clone, Debug)]
pub struct ProfileSample {
    pub x: Real,
    pub stage: Integer,
    pub phi: Real,
    pub tag: &'static str,
}

/// The exact scale `delta = L_j` of a stage boundary.
pub fn boundary_scale(counts: &StageCounts) -> LengthScale {
    let (f3, f7, f5) = counts.exponents();
    LengthScale::Canonical { a: f3, b: f5, c: f7 }
}

/// `phi(x)` at `x = -ln delta > 0`, locating the stage with
/// `X_(j-1) < x <= X_j`.
pub fn phi(s: &GeneratorSchedule, delta: &LengthScale) -> Result<ProfileSample> {
    if delta.cmp_unit()? != Ordering::Greater {
        return Err(Error::InvalidArgument(format!("phi needs delta < 1, got {delta}")));
    }
    let stage = locate(s, delta)?.stage;
    let prec = round_prec(working_precision() as u64 + 64);
    let x = delta.neg_log(prec);
    let ln2 = logs(round_prec(x.prec().max(prec) as u64)).ln2.clone();
    let phi = ln2.mul_integer(&stage).div(&x).expect("x > 0");
    Ok(ProfileSample {
        x,
        stage,
        phi,
        tag: s.role().tag(),
    })
}

fn phase_offset(s: &GeneratorSchedule, op: &'static str) -> Result<usize> {
    s.role().phase_offset().ok_or(Error::NeedsPhasedSchedule(op))
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionEntry {
    pub n: usize,
    pub k_index: usize,
    pub stage: String,
    pub phi: String,
    pub phi_f64: f64,
    /// Upper bound on `|phi - target|`.
    pub distance: String,
    pub distance_f64: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub set: &'static str,
    pub upper_target: String,
    pub upper: Vec<DimensionEntry>,
    pub lower_target: String,
    pub lower: Vec<DimensionEntry>,
    pub precision_bits: u32,
    pub note: &'static str,
}

fn entry(s: &GeneratorSchedule, n: usize, k_index: usize, target: &Real) -> Result<DimensionEntry> {
    let j = s.k().value(k_index)?;
    let phi = phi_at_boundary(s, &j)?;
    let d = phi.distance_upper(target);
    Ok(DimensionEntry {
        n,
        k_index,
        stage: stage_label(&j),
        phi: phi.to_sci(REPORT_DIGITS),
        phi_f64: phi.to_f64(),
        distance: format_sci(&d, 6),
        distance_f64: d.to_f64(),
    })
}

/// `phi` at the boundaries `K_(6n+1+o)` (tending to `ln 2 / ln 3`) and
/// `K_(6n+2+o)` (tending to `ln 2 / ln 7`) for `n = 0..=n_max`.
pub fn dimension_report(s: &GeneratorSchedule, n_max: usize) -> Result<DimensionReport> {
    let o = phase_offset(s, "dimension_report")?;
    let prec = working_precision();
    let (upper_t, _, lower_t) = dimension_targets(prec + 64);
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for n in 0..=n_max {
        upper.push(entry(s, n, 6 * n + 1 + o, &upper_t)?);
        lower.push(entry(s, n, 6 * n + 2 + o, &lower_t)?);
    }
    Ok(DimensionReport {
        set: s.role().tag(),
        upper_target: upper_t.to_sci(REPORT_DIGITS),
        upper,
        lower_target: lower_t.to_sci(REPORT_DIGITS),
        lower,
        precision_bits: prec,
        note: "finite sequence values with their targets; limits are not claimed",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Band {
    Upper,
    Lower,
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" | "upper-band" => Ok(Band::Upper),
            "lower" | "lower-band" => Ok(Band::Lower),
            _ => Err(Error::Parse(format!("unknown band {s:?}; expected upper or lower"))),
        }
    }
}

/// K-indices `(a, b)` of the stage window `(K_a, K_b]` for cycle `n`.
pub fn band_window(s: &GeneratorSchedule, band: Band, n: usize) -> Result<(usize, usize)> {
    let o = phase_offset(s, "band windows")?;
    let a = match (band, o) {
        (Band::Upper, _) => 6 * n + 2 + o,
        (Band::Lower, 0) => 6 * n + 3,
        // G's lower window is printed as (K_6m, K_6m+4]
        (Band::Lower, _) => 6 * n,
    };
    Ok((a, a + 4))
}

/// Extreme `phi` over the stages of a window.
#[derive(Clone, Debug)]
pub struct WindowExtremum {
    /// Stage whose range carries the extremum.
    pub stage: Integer,
    pub value: Real,
}

/// Supremum (`Band::Upper`) or infimum (`Band::Lower`) of `phi` over the
/// x-ranges of all stages in `(first, last]`.
pub fn window_extremum(s: &GeneratorSchedule, first: &Integer, last: &Integer, band: Band) -> Result<WindowExtremum> {
    if first >= last {
        return Err(Error::InvalidArgument(format!("empty stage window ({first}, {last}]")));
    }
    let prec = working_precision();
    let mut best: Option<WindowExtremum> = None;
    for (run, at_start) in s.runs_with_counts() {
        if run.end.as_ref().is_some_and(|e| e <= first) {
            continue;
        }
        if run.start >= *last {
            break;
        }
        let lo = run.start.clone().max(first.clone());
        let hi = match &run.end {
            Some(e) if e < last => e.clone(),
            _ => last.clone(),
        };
        let counts_at = |j: &Integer| at_start.advance(run.kind, &Integer::from(j - &run.start));
        for j in [Integer::from(&lo + 1u32), hi.clone()] {
            let value = match band {
                // supremum of stage j sits at its left end X_(j-1)
                Band::Upper if j == 1 => continue,
                Band::Upper => phi_over(&counts_at(&Integer::from(&j - 1u32)), &j, prec),
                Band::Lower => phi_over(&counts_at(&j), &j, prec),
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    let ord = value.cmp_certified(&b.value).unwrap_or(Ordering::Equal);
                    (band == Band::Upper && ord == Ordering::Greater) || (band == Band::Lower && ord == Ordering::Less)
                }
            };
            if better {
                best = Some(WindowExtremum { stage: j, value });
            }
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("window holds no stage".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct BandRow {
    pub n: usize,
    pub window: String,
    pub extremum_stage: String,
    pub extremum: String,
    pub extremum_f64: f64,
    /// Amount by which the extremum passes `ln 2 / ln 5` in the forbidden
    /// direction (negative when on the permitted side).
    pub excess: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub set: &'static str,
    pub band: Band,
    pub target: String,
    pub rows: Vec<BandRow>,
}

impl BandReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Tolerance used for cycle `n`: finite-cycle slack at `n = 0`, tight after.
pub fn band_tolerance(n: usize) -> f64 {
    if n == 0 {
        5e-2
    } else {
        1e-3
    }
}

/// Window extrema of `phi` against `ln 2 / ln 5` for cycles `0..=n_max`.
pub fn midband_bound_check(s: &GeneratorSchedule, band: Band, n_max: usize) -> Result<BandReport> {
    let (_, mid, _) = dimension_targets(working_precision() + 64);
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let (a, b) = band_window(s, band, n)?;
        let first = s.k().value(a)?;
        let last = s.k().value(b)?;
        let ext = window_extremum(s, &first, &last, band)?;
        let diff = match band {
            Band::Upper => ext.value.sub(&mid),
            Band::Lower => mid.sub(&ext.value),
        };
        let excess = diff.hi().to_f64();
        let tolerance = band_tolerance(n);
        rows.push(BandRow {
            n,
            window: format!("(K_{a}, K_{b}]"),
            extremum_stage: stage_label(&ext.stage),
            extremum: ext.value.to_sci(REPORT_DIGITS),
            extremum_f64: ext.value.to_f64(),
            excess,
            tolerance,
            holds: excess <= tolerance,
        });
    }
    Ok(BandReport {
        set: s.role().tag(),
        band,
        target: mid.to_sci(REPORT_DIGITS),
        rows,
    })
}

/// Which phase window a bracket index falls into, for a schedule with
/// phase offset `o`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowMembership {
    /// Bracket `b` with the stage in `(K_(b-1), K_b]`.
    pub bracket: usize,
    /// In `(K_(6n+o), K_(6n+2+o)]`.
    pub thirds_window: bool,
    /// In `(K_(6n+1+o), K_(6n+3+o)]`.
    pub sevenths_window: bool,
}

impl WindowMembership {
    pub fn of(bracket: usize, o: usize) -> Self {
        let phase = (bracket as i64 - o as i64).rem_euclid(6);
        WindowMembership {
            bracket,
            thirds_window: bracket > o && (phase == 1 || phase == 2),
            sevenths_window: bracket > o && (phase == 2 || phase == 3),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseSample {
    pub x: String,
    pub stage_f: String,
    pub stage_g: String,
    pub f: WindowMembership,
    pub g: WindowMembership,
    /// Both sets in their thirds windows at once.
    pub thirds_violation: bool,
    /// Both sets in their sevenths windows at once.
    pub sevenths_violation: bool,
}

impl PhaseSample {
    pub fn violated(&self) -> bool {
        self.thirds_violation || self.sevenths_violation
    }
}

/// Window membership of both sets' stages at one `x`.
pub fn phase_disjointness(sf: &GeneratorSchedule, sg: &GeneratorSchedule, delta: &LengthScale) -> Result<PhaseSample> {
    let of = phase_offset(sf, "phase_disjointness")?;
    let og = phase_offset(sg, "phase_disjointness")?;
    let jf = locate(sf, delta)?.stage;
    let jg = locate(sg, delta)?.stage;
    let x = delta.neg_log(working_precision());
    let f = WindowMembership::of(sf.bracket_index(&jf), of);
    let g = WindowMembership::of(sg.bracket_index(&jg), og);
    Ok(PhaseSample {
        x: x.to_sci(20),
        stage_f: stage_label(&jf),
        stage_g: stage_label(&jg),
        f,
        g,
        thirds_violation: f.thirds_window && g.thirds_window,
        sevenths_violation: f.sevenths_window && g.sevenths_window,
    })
}

/// `count` points with `log10 x` evenly spaced on `[lo, hi]`.
pub fn log10_grid(lo: f64, hi: f64, count: usize, prec: u32) -> Vec<Real> {
    let ln10 = Float::with_val(prec, 10).ln();
    (0..count)
        .map(|i| {
            let t = if count == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            };
            Real::point(Float::with_val(prec, &ln10 * t).exp())
        })
        .collect()
}

/// `count` points with `ln ln x` evenly spaced on `[lo, hi]`.
pub fn loglog_grid(lo: f64, hi: f64, count: usize, prec: u32) -> Vec<(f64, Real)> {
    (0..count)
        .map(|i| {
            let t = if count == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            };
            (t, Real::point(Float::with_val(prec, t).exp().exp()))
        })
        .collect()
}

/// Phase windows at many `x` values, evaluated in parallel, in input order.
pub fn phase_sweep(sf: &GeneratorSchedule, sg: &GeneratorSchedule, xs: &[Real]) -> Result<Vec<PhaseSample>> {
    xs.par_iter()
        .map(|x| phase_disjointness(sf, sg, &LengthScale::from_neg_log(x.clone())))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub set: &'static str,
    pub k_index: usize,
    pub n: usize,
    pub l: usize,
    #[serde(skip)]
    pub ratio_g3: Rational,
    #[serde(skip)]
    pub ratio_g7: Rational,
    pub g3_over_k: String,
    pub g7_over_k: String,
    pub target_g3: u8,
    pub target_g7: u8,
    pub distance_g3: String,
    pub distance_g7: String,
}

/// Digits printed for ratio values.
pub const RATIO_DIGITS: usize = 80;

fn sci_rational(q: &Rational, digits: usize) -> String {
    let bits = (digits as f64 * 3.33) as u32 + 64;
    format_sci(&Float::with_val(bits, q), digits)
}

/// `f3(K_i)/K_i` and `f7(K_i)/K_i` for `i = 6n + l`, as exact fractions
/// printed to [`RATIO_DIGITS`] digits, with their limiting targets.
pub fn ratio_limits(s: &GeneratorSchedule, n_max: usize) -> Result<Vec<RatioRow>> {
    let o = phase_offset(s, "ratio_limits")?;
    let mut rows = Vec::new();
    for n in 0..=n_max {
        for l in 0..6 {
            let i = 6 * n + l;
            let k = s.k().value(i)?;
            let c = counts_up_to(s, &k);
            let ratio = |f: &Integer| Rational::from((f.clone(), (*k).clone()));
            let (r3, r7) = (ratio(&c.f3), ratio(&c.f7));
            let m = WindowMembership::of(i, o);
            let phase = (i as i64 - o as i64).rem_euclid(6);
            let t3 = u8::from(m.thirds_window && phase == 1);
            let t7 = u8::from(m.sevenths_window && phase == 2);
            let dist = |r: &Rational, t: u8| Rational::from(r - t).abs();
            rows.push(RatioRow {
                set: s.role().tag(),
                k_index: i,
                n,
                l,
                g3_over_k: sci_rational(&r3, RATIO_DIGITS),
                g7_over_k: sci_rational(&r7, RATIO_DIGITS),
                distance_g3: sci_rational(&dist(&r3, t3), 6),
                distance_g7: sci_rational(&dist(&r7, t7), 6),
                target_g3: t3,
                target_g7: t7,
                ratio_g3: r3,
                ratio_g7: r7,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub loglog_x: f64,
    pub f: ProfileSample,
    pub g: ProfileSample,
    pub sum: Real,
}

/// Both profiles at each `(ln ln x, x)` point, in parallel, in input order.
pub fn profile_rows(sf: &GeneratorSchedule, sg: &GeneratorSchedule, xs: &[(f64, Real)]) -> Result<Vec<ProfileRow>> {
    xs.par_iter()
        .map(|(t, x)| {
            let delta = LengthScale::from_neg_log(x.clone());
            let f = phi(sf, &delta)?;
            let g = phi(sg, &delta)?;
            let sum = f.phi.add(&g.phi);
            Ok(ProfileRow {
                loglog_x: *t,
                f,
                g,
                sum,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SumPoint {
    pub x: String,
    pub right_limit: bool,
    pub phi_f: f64,
    pub phi_g: f64,
    pub sum: String,
    pub sum_f64: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SumExtrema {
    pub x_min: String,
    pub x_max: String,
    pub grid_points: usize,
    pub boundary_points: usize,
    pub max: SumPoint,
    pub min: SumPoint,
    pub upper_target: String,
    pub lower_target: String,
    pub tolerance: f64,
    pub max_within: bool,
    pub min_within: bool,
    /// `max < 2 ln 2 / ln 3` and `min > 2 ln 2 / ln 7`.
    pub strict_upper: bool,
    pub strict_lower: bool,
}

struct Candidate {
    x: Real,
    right_limit: bool,
    phi_f: Real,
    phi_g: Real,
}

/// Ends of the generator runs whose boundary falls in `[x_min, x_max]`.
fn run_boundaries_in(s: &GeneratorSchedule, x_min: &Real, x_max: &Real) -> Vec<Integer> {
    let prec = working_precision();
    let mut out = Vec::new();
    for (run, at_start) in s.runs_with_counts() {
        let Some(end) = &run.end else { break };
        let x = boundary_value(&at_start.advance(run.kind, &Integer::from(end - &run.start)), prec);
        if x.lo() > x_max.hi() {
            break;
        }
        if x.hi() >= x_min.lo() {
            out.push(end.clone());
        }
    }
    out
}

fn point_candidate(sf: &GeneratorSchedule, sg: &GeneratorSchedule, x: &Real) -> Result<Candidate> {
    let delta = LengthScale::from_neg_log(x.clone());
    Ok(Candidate {
        x: x.clone(),
        right_limit: false,
        phi_f: phi(sf, &delta)?.phi,
        phi_g: phi(sg, &delta)?.phi,
    })
}

/// Candidates at the boundary `X_j` of `own`: the attained value and the
/// right limit, with the other set evaluated at the same `x`.
fn boundary_candidates(
    own: &GeneratorSchedule,
    other: &GeneratorSchedule,
    j: &Integer,
    own_is_f: bool,
) -> Result<[Candidate; 2]> {
    let prec = working_precision();
    let counts = counts_up_to(own, j);
    let x = boundary_value(&counts, prec + 64);
    let other_phi = phi(other, &boundary_scale(&counts))?.phi;
    let at = phi_at_boundary(own, j)?;
    let right = phi_right_limit(own, j)?;
    let make = |own_phi: Real, right_limit: bool| {
        let (phi_f, phi_g) = if own_is_f {
            (own_phi, other_phi.clone())
        } else {
            (other_phi.clone(), own_phi)
        };
        Candidate {
            x: x.clone(),
            right_limit,
            phi_f,
            phi_g,
        }
    };
    Ok([make(at, false), make(right, true)])
}

fn sum_point(c: &Candidate) -> SumPoint {
    let sum = c.phi_f.add(&c.phi_g);
    SumPoint {
        x: c.x.to_sci(20),
        right_limit: c.right_limit,
        phi_f: c.phi_f.to_f64(),
        phi_g: c.phi_g.to_f64(),
        sum: sum.to_sci(REPORT_DIGITS),
        sum_f64: sum.to_f64(),
    }
}

/// Extremes of `phi_F + phi_G` over `x` in `[x_min, x_max]`, sampled on a
/// log-log grid of `samples` points plus every run-end boundary of either
/// set in range (with right limits).
pub fn sum_profile_extrema(
    sf: &GeneratorSchedule,
    sg: &GeneratorSchedule,
    x_min: &Real,
    x_max: &Real,
    samples: usize,
    tolerance: f64,
) -> Result<SumExtrema> {
    if x_min.lo() <= &1 || x_min.cmp_certified(x_max) != Some(Ordering::Less) {
        return Err(Error::InvalidArgument("need 1 < x_min < x_max".into()));
    }
    let prec = working_precision();
    let ll = |x: &Real| x.mid().ln().ln().to_f64();
    let grid: Vec<Real> = loglog_grid(ll(x_min), ll(x_max), samples.max(2), prec + 64)
        .into_iter()
        .map(|(_, x)| x)
        .filter(|x| x.cmp_certified(x_min) != Some(Ordering::Less) && x.cmp_certified(x_max) != Some(Ordering::Greater))
        .chain([x_min.clone(), x_max.clone()])
        .collect();
    let mut candidates: Vec<Candidate> = grid
        .par_iter()
        .map(|x| point_candidate(sf, sg, x))
        .collect::<Result<_>>()?;
    let grid_points = candidates.len();
    let bf = run_boundaries_in(sf, x_min, x_max);
    let bg = run_boundaries_in(sg, x_min, x_max);
    let boundary: Vec<[Candidate; 2]> = bf
        .par_iter()
        .map(|j| boundary_candidates(sf, sg, j, true))
        .chain(bg.par_iter().map(|j| boundary_candidates(sg, sf, j, false)))
        .collect::<Result<_>>()?;
    let boundary_points = boundary.len();
    candidates.extend(boundary.into_iter().flatten());

    let sums: Vec<Real> = candidates.iter().map(|c| c.phi_f.add(&c.phi_g)).collect();
    let by = |want: Ordering| {
        (0..sums.len())
            .reduce(|best, i| {
                if sums[i].mid().partial_cmp(&sums[best].mid()) == Some(want) {
                    i
                } else {
                    best
                }
            })
            .expect("non-empty")
    };
    let (imax, imin) = (by(Ordering::Greater), by(Ordering::Less));
    let (t3, t5, t7) = dimension_targets(prec + 64);
    let upper = t3.add(&t5);
    let lower = t7.add(&t5);
    let max_f = sums[imax].hi().to_f64();
    let min_f = sums[imin].lo().to_f64();
    Ok(SumExtrema {
        x_min: x_min.to_sci(20),
        x_max: x_max.to_sci(20),
        grid_points,
        boundary_points,
        max: sum_point(&candidates[imax]),
        min: sum_point(&candidates[imin]),
        upper_target: upper.to_sci(REPORT_DIGITS),
        lower_target: lower.to_sci(REPORT_DIGITS),
        tolerance,
        max_within: max_f <= upper.hi().to_f64() + tolerance,
        min_within: min_f >= lower.lo().to_f64() - tolerance,
        strict_upper: sums[imax].cmp_certified(&t3.add(&t3)) == Some(Ordering::Less),
        strict_lower: sums[imin].cmp_certified(&t7.add(&t7)) == Some(Ordering::Greater),
    })
}

/// Generator acting through the whole of `(K_(i-1), K_i]`.
pub fn bracket_generator(s: &GeneratorSchedule, i: usize) -> Result<GeneratorKind> {
    let o = phase_offset(s, "bracket_generator")?;
    let phase = (i as i64 - o as i64).rem_euclid(6);
    Ok(match phase {
        1 if i > o => GeneratorKind::G3,
        2 if i > o => GeneratorKind::G7,
        _ => GeneratorKind::G5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> GeneratorSchedule {
        GeneratorSchedule::builtin("F").unwrap()
    }

    fn g() -> GeneratorSchedule {
        GeneratorSchedule::builtin("G").unwrap()
    }

    #[test]
    fn boundary_log_examples() {
        let x = boundary_log(&f(), &Integer::from(100)).unwrap();
        assert!((x.to_f64() - (90.0 * 3f64.ln() + 10.0 * 5f64.ln())).abs() < 1e-9);
        assert!((boundary_log(&f(), &Integer::from(1)).unwrap().to_f64() - 5f64.ln()).abs() < 1e-12);
        assert!(boundary_log(&f(), &Integer::from(0)).is_err());
    }

    #[test]
    fn phi_examples() {
        let at = |j: u32| boundary_scale(&counts_up_to(&f(), &Integer::from(j)));
        let p = phi(&f(), &at(100)).unwrap();
        assert_eq!(p.stage, 100);
        let expected = 100.0 * 2f64.ln() / (90.0 * 3f64.ln() + 10.0 * 5f64.ln());
        assert!((p.phi.to_f64() - expected).abs() < 1e-12);
        assert!((phi(&f(), &at(1)).unwrap().phi.to_f64() - 2f64.ln() / 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn phi_steps_up_after_a_boundary() {
        let j = Integer::from(100);
        let at = phi_at_boundary(&f(), &j).unwrap();
        let right = phi_right_limit(&f(), &j).unwrap();
        assert_eq!(right.cmp_certified(&at), Some(Ordering::Greater));
    }

    #[test]
    fn window_memberships() {
        let m = WindowMembership::of(1, 0);
        assert!(m.thirds_window && !m.sevenths_window);
        let m = WindowMembership::of(3, 3);
        assert!(!m.thirds_window && !m.sevenths_window);
        let m = WindowMembership::of(5, 3);
        assert!(m.thirds_window && m.sevenths_window);
        let m = WindowMembership::of(6, 3);
        assert!(!m.thirds_window && m.sevenths_window);
    }

    #[test]
    fn phase_examples() {
        let at = |j: u32| boundary_scale(&counts_up_to(&f(), &Integer::from(j)));
        let p = phase_disjointness(&f(), &g(), &at(10_000)).unwrap();
        assert_eq!(p.f.bracket, 2);
        assert!(!p.violated());
        let p = phase_disjointness(&f(), &g(), &at(1)).unwrap();
        assert_eq!((p.stage_f.as_str(), p.stage_g.as_str()), ("1", "1"));
        assert!(!p.f.thirds_window && !p.g.thirds_window);
    }

    #[test]
    fn ratio_examples() {
        let rows = ratio_limits(&f(), 1).unwrap();
        assert_eq!(rows[1].ratio_g3, Rational::from((9, 10)));
        assert_eq!(rows[1].ratio_g7, 0);
        assert_eq!((rows[1].target_g3, rows[2].target_g7), (1, 1));
        let g_rows = ratio_limits(&g(), 0).unwrap();
        assert_eq!((g_rows[4].target_g3, g_rows[5].target_g7), (1, 1));
    }

    #[test]
    fn bracket_generators_match_schedule() {
        for s in [f(), g()] {
            for i in 0..12 {
                let k = s.k().value(i).unwrap();
                let kind = crate::schedule::generator_at(&s, &k).unwrap();
                assert_eq!(bracket_generator(&s, i).unwrap(), kind, "bracket {i}");
            }
        }
    }

    #[test]
    fn custom_schedules_are_rejected() {
        let s = GeneratorSchedule::builtin("pure-G3").unwrap();
        assert!(matches!(dimension_report(&s, 0), Err(Error::NeedsPhasedSchedule(_))));
    }
}
