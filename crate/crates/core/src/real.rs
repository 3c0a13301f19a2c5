//! Certified real enclosures.
//!
//! A [`Real`] is a closed interval `[lo, hi]` of MPFR floats produced with
//! directed rounding, so the true value is always inside. Comparisons return
//! `None` when the enclosures overlap; callers decide whether to raise the
//! working precision or report indeterminacy.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

/// Upper limit for automatic precision doubling.
pub const MAX_PRECISION: u32 = 1 << 24;

#[derive(Clone, Debug)]
pub struct Real {
    lo: Float,
    hi: Float,
}

impl Real {
    /// Exact enclosure of a single float.
    pub fn point(value: Float) -> Self {
        Real {
            lo: value.clone(),
            hi: value,
        }
    }

    pub fn from_bounds(lo: Float, hi: Float) -> Self {
        assert!(lo <= hi, "inverted enclosure");
        Real { lo, hi }
    }

    pub fn from_integer(n: &Integer, prec: u32) -> Self {
        Real {
            lo: Float::with_val_round(prec, n, Round::Down).0,
            hi: Float::with_val_round(prec, n, Round::Up).0,
        }
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        Real {
            lo: Float::with_val_round(prec, q, Round::Down).0,
            hi: Float::with_val_round(prec, q, Round::Up).0,
        }
    }

    /// Enclosure of `ln(n)` for a positive integer.
    pub fn ln_integer(n: &Integer, prec: u32) -> Self {
        assert!(*n > 0, "ln of non-positive integer");
        if *n == 2 {
            return Real {
                lo: Float::with_val_round(prec, Constant::Log2, Round::Down).0,
                hi: Float::with_val_round(prec, Constant::Log2, Round::Up).0,
            };
        }
        // the conversion may round; widen by taking directed roundings of both steps
        let lo_arg = Float::with_val_round(prec + 64, n, Round::Down).0;
        let hi_arg = Float::with_val_round(prec + 64, n, Round::Up).0;
        Real {
            lo: Float::with_val_round(prec, lo_arg.ln_ref(), Round::Down).0,
            hi: Float::with_val_round(prec, hi_arg.ln_ref(), Round::Up).0,
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> Float {
        let prec = self.prec() + 1;
        let mut m = Float::with_val(prec, &self.lo + &self.hi);
        m /= 2;
        m
    }

    pub fn width(&self) -> Float {
        Float::with_val_round(self.prec(), &self.hi - &self.lo, Round::Up).0
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn add(&self, other: &Real) -> Real {
        let prec = self.prec().max(other.prec());
        Real {
            lo: Float::with_val_round(prec, &self.lo + &other.lo, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi + &other.hi, Round::Up).0,
        }
    }

    pub fn sub(&self, other: &Real) -> Real {
        let prec = self.prec().max(other.prec());
        Real {
            lo: Float::with_val_round(prec, &self.lo - &other.hi, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi - &other.lo, Round::Up).0,
        }
    }

    pub fn neg(&self) -> Real {
        Real {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }

    /// Product with an exact integer of any sign.
    pub fn mul_integer(&self, n: &Integer) -> Real {
        let prec = self.prec();
        let (a, b) = if *n >= 0 {
            (&self.lo, &self.hi)
        } else {
            (&self.hi, &self.lo)
        };
        Real {
            lo: Float::with_val_round(prec, a * n, Round::Down).0,
            hi: Float::with_val_round(prec, b * n, Round::Up).0,
        }
    }

    pub fn mul(&self, other: &Real) -> Real {
        let prec = self.prec().max(other.prec());
        let corners = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = corners
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a * *b, Round::Down).0)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        let hi = corners
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a * *b, Round::Up).0)
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        Real { lo, hi }
    }

    /// Quotient; `None` when the divisor enclosure contains zero.
    pub fn div(&self, other: &Real) -> Option<Real> {
        if other.lo <= 0 && other.hi >= 0 {
            return None;
        }
        let prec = self.prec().max(other.prec());
        let corners = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = corners
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a / *b, Round::Down).0)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        let hi = corners
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a / *b, Round::Up).0)
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        Some(Real { lo, hi })
    }

    pub fn div_integer(&self, n: &Integer) -> Real {
        assert!(*n != 0, "division by zero");
        let prec = self.prec();
        let (a, b) = if *n > 0 {
            (&self.lo, &self.hi)
        } else {
            (&self.hi, &self.lo)
        };
        Real {
            lo: Float::with_val_round(prec, a / n, Round::Down).0,
            hi: Float::with_val_round(prec, b / n, Round::Up).0,
        }
    }

    pub fn exp(&self) -> Real {
        let prec = self.prec();
        Real {
            lo: Float::with_val_round(prec, self.lo.exp_ref(), Round::Down).0,
            hi: Float::with_val_round(prec, self.hi.exp_ref(), Round::Up).0,
        }
    }

    /// Natural log; `None` unless the enclosure is strictly positive.
    pub fn ln(&self) -> Option<Real> {
        if self.lo <= 0 {
            return None;
        }
        let prec = self.prec();
        Some(Real {
            lo: Float::with_val_round(prec, self.lo.ln_ref(), Round::Down).0,
            hi: Float::with_val_round(prec, self.hi.ln_ref(), Round::Up).0,
        })
    }

    /// Certified ordering, `None` when the enclosures overlap (and are not
    /// the same point).
    pub fn cmp_certified(&self, other: &Real) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn sign(&self) -> Option<Ordering> {
        if self.lo > 0 {
            Some(Ordering::Greater)
        } else if self.hi < 0 {
            Some(Ordering::Less)
        } else if self.lo == 0 && self.hi == 0 {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn contains_f64(&self, v: f64) -> bool {
        self.lo <= v && self.hi >= v
    }

    /// Largest distance from any point of the enclosure to `target`; an
    /// upper bound on the true distance.
    pub fn distance_upper(&self, target: &Real) -> Float {
        let prec = self.prec().max(target.prec());
        let a = Float::with_val_round(prec, &self.hi - &target.lo, Round::Up).0;
        let b = Float::with_val_round(prec, &target.hi - &self.lo, Round::Up).0;
        let a = a.abs();
        let b = b.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    /// Midpoint in scientific notation with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        format_sci(&self.mid(), digits)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(20))
    }
}

/// Locale-free scientific formatting, e.g. `6.0289e-1`.
pub fn format_sci(value: &Float, digits: usize) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let (sign, mantissa, exp) = value.to_sign_string_exp(10, Some(digits.max(1)));
    let exp = exp.expect("finite value") - 1;
    let mut s = String::new();
    if sign {
        s.push('-');
    }
    let (first, rest) = mantissa.split_at(1);
    s.push_str(first);
    let rest = rest.trim_end_matches('0');
    if !rest.is_empty() {
        s.push('.');
        s.push_str(rest);
    }
    if exp != 0 {
        s.push_str(&format!("e{exp}"));
    }
    s
}

/// Enclosures of ln 2, ln 3, ln 5, ln 7 at one precision.
#[derive(Debug)]
pub struct LogTable {
    pub ln2: Real,
    pub ln3: Real,
    pub ln5: Real,
    pub ln7: Real,
}

impl LogTable {
    fn compute(prec: u32) -> Self {
        LogTable {
            ln2: Real::ln_integer(&Integer::from(2), prec),
            ln3: Real::ln_integer(&Integer::from(3), prec),
            ln5: Real::ln_integer(&Integer::from(5), prec),
            ln7: Real::ln_integer(&Integer::from(7), prec),
        }
    }

    pub fn ln_of(&self, base: u32) -> &Real {
        match base {
            2 => &self.ln2,
            3 => &self.ln3,
            5 => &self.ln5,
            7 => &self.ln7,
            _ => panic!("no cached log for {base}"),
        }
    }
}

/// Shared, memoised log table for `prec` bits.
pub fn logs(prec: u32) -> Arc<LogTable> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<LogTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&prec) {
        return Arc::clone(t);
    }
    let table = Arc::new(LogTable::compute(prec));
    cache.lock().unwrap().entry(prec).or_insert(table).clone()
}

/// Working precision: `BOXDIM_PRECISION_BITS` if set and valid, else
/// [`DEFAULT_PRECISION`].
pub fn working_precision() -> u32 {
    std::env::var("BOXDIM_PRECISION_BITS")
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|b| (64..=MAX_PRECISION).contains(b))
        .unwrap_or(DEFAULT_PRECISION)
}

/// Rounds a bit count up to a multiple of 64 so the log cache stays small.
pub fn round_prec(bits: u64) -> u32 {
    let b = bits.clamp(64, MAX_PRECISION as u64);
    (b.div_ceil(64) * 64) as u32
}
