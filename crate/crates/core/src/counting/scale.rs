//! Length scales `delta` and exact or certified comparison against stage
//! boundaries.
//!
//! Writing `x = -ln delta`, stage `j` ends at
//! `X_j = f3 ln 3 + f7 ln 7 + f5 ln 5`, the negative log of the common
//! interval length.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::real::{logs, round_prec, working_precision, Real, MAX_PRECISION};
use crate::schedule::StageCounts;

/// Exact power comparisons are used while both sides stay below this many bits.
const EXACT_BITS: f64 = (1u64 << 22) as f64;

const LOG2_3: f64 = 1.584_962_500_721_156;
const LOG2_5: f64 = 2.321_928_094_887_362;
const LOG2_7: f64 = 2.807_354_922_057_604;

#[derive(Clone, Debug)]
pub enum LengthScale {
    /// `delta = 3^-a 5^-b 7^-c`.
    Canonical { a: Integer, b: Integer, c: Integer },
    /// An exact positive rational.
    Rational(Rational),
    /// `delta = exp(-x)` with `x` known as an enclosure.
    Real { neg_log: Real },
}

/// Short printable name for a possibly enormous stage number.
pub fn stage_label(j: &Integer) -> String {
    let digits = j.to_string_radix(10);
    if digits.len() <= 40 {
        digits
    } else {
        format!("{}...({} digits)", &digits[..12], digits.len())
    }
}

/// Enclosure of `X_j` for the given counts with about `prec` bits of
/// relative accuracy.
pub fn boundary_value(counts: &StageCounts, prec: u32) -> Real {
    let p = round_prec(prec as u64 + counts.j.significant_bits() as u64);
    let t = logs(p);
    let (f3, f7, f5) = counts.exponents();
    t.ln3
        .mul_integer(&f3)
        .add(&t.ln7.mul_integer(&f7))
        .add(&t.ln5.mul_integer(&f5))
}

fn approx_bits(a: &Integer, b: &Integer, c: &Integer) -> f64 {
    a.to_f64() * LOG2_3 + b.to_f64() * LOG2_5 + c.to_f64() * LOG2_7
}

fn power_product(a: &Integer, b: &Integer, c: &Integer) -> Integer {
    let p = |base: u32, e: &Integer| Integer::from(base).pow(e.to_u32().expect("bounded exponent"));
    p(3, a) * p(5, b) * p(7, c)
}

fn split(d: Integer) -> (Integer, Integer) {
    if d >= 0 {
        (d, Integer::new())
    } else {
        (Integer::new(), -d)
    }
}

/// Compares two enclosures, doubling the precision until certified.
fn refine<F>(stage: &Integer, start: u32, may_tie: bool, mut pair: F) -> Result<Ordering>
where
    F: FnMut(u32) -> (Real, Real),
{
    let mut prec = start;
    loop {
        let (x, bound) = pair(prec);
        if let Some(ord) = x.cmp_certified(&bound) {
            return Ok(ord);
        }
        let stuck = !x.is_point() && bound.width() * 4u32 < x.width();
        if stuck || prec >= MAX_PRECISION || may_tie && prec >= 1 << 16 {
            let hint = if stuck {
                format!("supply -ln(delta) with more than {} bits", x.prec())
            } else {
                "the scale may sit exactly on this boundary".to_string()
            };
            return Err(Error::Indeterminate {
                stage: stage_label(stage),
                bits: prec,
                hint,
            });
        }
        prec = round_prec(prec as u64 * 2);
    }
}

impl LengthScale {
    pub fn canonical(a: impl Into<Integer>, b: impl Into<Integer>, c: impl Into<Integer>) -> Result<Self> {
        let (a, b, c) = (a.into(), b.into(), c.into());
        if a < 0 || b < 0 || c < 0 {
            return Err(Error::InvalidArgument(
                "canonical exponents must be non-negative".into(),
            ));
        }
        Ok(LengthScale::Canonical { a, b, c })
    }

    /// Exact scale; reciprocals of `3^a 5^b 7^c` become canonical.
    pub fn from_rational(q: Rational) -> Result<Self> {
        if q <= 0 {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {q}")));
        }
        if *q.numer() == 1 {
            let mut d = q.denom().clone();
            let a = d.remove_factor_mut(&Integer::from(3));
            let b = d.remove_factor_mut(&Integer::from(5));
            let c = d.remove_factor_mut(&Integer::from(7));
            if d == 1 {
                return Self::canonical(a, b, c);
            }
        }
        Ok(LengthScale::Rational(q))
    }

    pub fn from_neg_log(neg_log: Real) -> Self {
        LengthScale::Real { neg_log }
    }

    /// `-ln delta` as the exact float `x`.
    pub fn from_neg_log_float(x: Float) -> Self {
        LengthScale::Real {
            neg_log: Real::point(x),
        }
    }

    /// Parses `p/q`, `a,b,c` (canonical exponents), a plain decimal such as
    /// `0.04` (read exactly), or `neglog:<decimal>` for `-ln delta`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("neglog:") {
            let prec = working_precision();
            let parse = || Float::parse(rest).map_err(|e| Error::Parse(format!("{rest:?}: {e}")));
            let lo = Float::with_val_round(prec, parse()?, Round::Down).0;
            let hi = Float::with_val_round(prec, parse()?, Round::Up).0;
            if !lo.is_finite() {
                return Err(Error::Parse(format!("{rest:?} is not finite")));
            }
            return Ok(Self::from_neg_log(Real::from_bounds(lo, hi)));
        }
        if text.contains(',') {
            let parts: Vec<&str> = text.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("{text:?}: expected three exponents a,b,c")));
            }
            let e = parts
                .iter()
                .map(|p| crate::schedule::parse_decimal(p))
                .collect::<Result<Vec<_>>>()?;
            return Self::canonical(e[0].clone(), e[1].clone(), e[2].clone());
        }
        if let Some((n, d)) = text.split_once('/') {
            let n: Integer = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{text:?}: bad numerator")))?;
            let d: Integer = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{text:?}: bad denominator")))?;
            if d == 0 {
                return Err(Error::Parse(format!("{text:?}: zero denominator")));
            }
            return Self::from_rational(Rational::from((n, d)));
        }
        Self::from_rational(parse_exact_decimal(text)?)
    }

    /// The exact value of `delta`, when it is rational and not astronomically
    /// small.
    pub fn exact_delta(&self) -> Option<Rational> {
        match self {
            LengthScale::Canonical { a, b, c } => {
                (approx_bits(a, b, c) <= EXACT_BITS).then(|| Rational::from((1, power_product(a, b, c))))
            }
            LengthScale::Rational(q) => Some(q.clone()),
            LengthScale::Real { .. } => None,
        }
    }

    /// Rational bounds `lo <= delta <= hi`; equal for exact scales.
    pub fn delta_bounds(&self) -> Result<(Rational, Rational)> {
        if let Some(q) = self.exact_delta() {
            return Ok((q.clone(), q));
        }
        match self {
            LengthScale::Real { neg_log } => {
                let d = neg_log.neg().exp();
                let lo = d
                    .lo()
                    .to_rational()
                    .ok_or_else(|| Error::InvalidArgument("delta underflows".into()))?;
                let hi = d
                    .hi()
                    .to_rational()
                    .ok_or_else(|| Error::InvalidArgument("delta overflows".into()))?;
                if lo <= 0 {
                    return Err(Error::InvalidArgument(format!("delta = exp(-{neg_log}) underflows")));
                }
                Ok((lo, hi))
            }
            _ => Err(Error::InvalidArgument(format!(
                "delta = {self} is too small to materialize"
            ))),
        }
    }

    /// Enclosure of `x = -ln delta`.
    pub fn neg_log(&self, prec: u32) -> Real {
        match self {
            LengthScale::Canonical { a, b, c } => {
                let bits = a.significant_bits().max(b.significant_bits()).max(c.significant_bits());
                let t = logs(round_prec(prec as u64 + bits as u64));
                t.ln3
                    .mul_integer(a)
                    .add(&t.ln5.mul_integer(b))
                    .add(&t.ln7.mul_integer(c))
            }
            LengthScale::Rational(q) => {
                let bits = q.numer().significant_bits().max(q.denom().significant_bits());
                let p = round_prec(prec as u64 + bits as u64);
                Real::ln_integer(q.denom(), p).sub(&Real::ln_integer(q.numer(), p))
            }
            LengthScale::Real { neg_log } => neg_log.clone(),
        }
    }

    /// Ordering of `x = -ln delta` against `0`, i.e. `Greater` iff `delta < 1`.
    pub fn cmp_unit(&self) -> Result<Ordering> {
        match self {
            LengthScale::Canonical { a, b, c } => Ok(if *a == 0 && *b == 0 && *c == 0 {
                Ordering::Equal
            } else {
                Ordering::Greater
            }),
            LengthScale::Rational(q) => Ok(Rational::from(1).cmp(q)),
            LengthScale::Real { neg_log } => neg_log.sign().ok_or_else(|| Error::Indeterminate {
                stage: "0".into(),
                bits: neg_log.prec(),
                hint: "-ln(delta) straddles 0".into(),
            }),
        }
    }

    /// Ordering of `x` against `X_j` for the stage described by `counts`.
    pub fn cmp_boundary(&self, counts: &StageCounts) -> Result<Ordering> {
        let (f3, f7, f5) = counts.exponents();
        let start = round_prec(working_precision() as u64);
        match self {
            LengthScale::Canonical { a, b, c } => {
                if *a == f3 && *b == f5 && *c == f7 {
                    return Ok(Ordering::Equal);
                }
                let (a_hi, a_lo) = split(Integer::from(a - &f3));
                let (b_hi, b_lo) = split(Integer::from(b - &f5));
                let (c_hi, c_lo) = split(Integer::from(c - &f7));
                if approx_bits(&a_hi, &b_hi, &c_hi).max(approx_bits(&a_lo, &b_lo, &c_lo)) <= EXACT_BITS {
                    return Ok(power_product(&a_hi, &b_hi, &c_hi).cmp(&power_product(&a_lo, &b_lo, &c_lo)));
                }
                // distinct exponent triples never give equal values
                refine(&counts.j, start, false, |p| {
                    (self.neg_log(p), boundary_value(counts, p))
                })
            }
            LengthScale::Rational(q) => {
                if approx_bits(&f3, &f5, &f7) <= EXACT_BITS {
                    let scaled = q.numer() * power_product(&f3, &f5, &f7);
                    return Ok(q.denom().cmp(&scaled));
                }
                refine(&counts.j, start, true, |p| (self.neg_log(p), boundary_value(counts, p)))
            }
            LengthScale::Real { neg_log } => {
                let start = start.max(neg_log.prec());
                refine(&counts.j, start, false, |p| {
                    (neg_log.clone(), boundary_value(counts, p))
                })
            }
        }
    }
}

/// Reads `123`, `0.04`, `1.5e-3` exactly.
pub fn parse_exact_decimal(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("{text:?} is not a decimal number"));
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let n: Integer = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10).pow(scale.unsigned_abs());
    Ok(if scale >= 0 {
        Rational::from(n * ten)
    } else {
        Rational::from((n, ten))
    })
}

impl FromStr for LengthScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LengthScale::parse(s)
    }
}

impl fmt::Display for LengthScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthScale::Canonical { a, b, c } => {
                let factors: Vec<String> = [(3, a), (5, b), (7, c)]
                    .iter()
                    .filter(|(_, e)| **e != 0)
                    .map(|(p, e)| format!("{p}^-{e}"))
                    .collect();
                if factors.is_empty() {
                    write!(f, "1")
                } else {
                    write!(f, "{}", factors.join("*"))
                }
            }
            LengthScale::Rational(q) => write!(f, "{q}"),
            LengthScale::Real { neg_log } => write!(f, "exp(-{})", neg_log.to_sci(30)),
        }
    }
}

impl Serialize for LengthScale {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}
