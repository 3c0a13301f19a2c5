//! Growth checks on a K-sequence over a finite horizon.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use super::KSequence;
use crate::error::{Error, Result};
use crate::real::{logs, round_prec, DEFAULT_PRECISION};

/// Largest `K_{j+1}` for which `7^K_j < 3^K_{j+1}` is decided by building
/// both powers.
const EXACT_POWER_LIMIT: u32 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionKind {
    /// `sum_{i<=j} K_i < K_{j+1}`.
    PrefixSumBelowNext,
    /// `sum_{i<=j} (K_i - K_{i-1}) > K_{j-1}` read literally with `K_{-1} = 0`.
    TelescopedAbovePrevious,
    /// `(ln 7 / ln 3) K_j < K_{j+1}`.
    LogRatioGrowth,
    /// `sum_{i<j} K_i / K_j` strictly decreasing in `j`.
    TailRatioDecreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
    /// A needed K value lies past the end of an explicit list.
    Unavailable,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionRow {
    pub condition: ConditionKind,
    pub j: usize,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub horizon: usize,
    pub rows: Vec<ConditionRow>,
    /// `sum_{i<horizon} K_i / K_horizon` as an exact fraction.
    pub final_tail_ratio: Option<String>,
    pub final_tail_ratio_approx: Option<f64>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.outcome == Outcome::Pass)
    }

    /// Worst outcome over all rows of one condition.
    pub fn outcome_of(&self, condition: ConditionKind) -> Outcome {
        let outcomes: Vec<Outcome> = self
            .rows
            .iter()
            .filter(|r| r.condition == condition)
            .map(|r| r.outcome)
            .collect();
        [Outcome::Fail, Outcome::Indeterminate, Outcome::Unavailable]
            .into_iter()
            .find(|o| outcomes.contains(o))
            .unwrap_or(Outcome::Pass)
    }
}

fn row(condition: ConditionKind, j: usize, pass: bool, detail: String) -> ConditionRow {
    ConditionRow {
        condition,
        j,
        outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        detail,
    }
}

fn unavailable(condition: ConditionKind, j: usize, index: usize) -> ConditionRow {
    ConditionRow {
        condition,
        j,
        outcome: Outcome::Unavailable,
        detail: format!("K_{index} is not listed"),
    }
}

/// Checks the four growth conditions for every `j <= horizon`.
pub fn validate_k_sequence(seq: &KSequence, horizon: usize) -> Result<ValidationReport> {
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!(
            "horizon must be at least 2, got {horizon}"
        )));
    }
    let ks: Vec<Option<Integer>> = (0..=horizon + 1).map(|i| seq.get(i).map(|k| (*k).clone())).collect();
    let mut rows = Vec::new();

    // prefix sums below the next value
    let mut prefix = Integer::new();
    let mut prefix_ok = true;
    for j in 0..=horizon {
        match &ks[j] {
            Some(k) if prefix_ok => prefix += k,
            _ => prefix_ok = false,
        }
        match (&ks[j + 1], prefix_ok) {
            (Some(next), true) => rows.push(row(
                ConditionKind::PrefixSumBelowNext,
                j,
                prefix < *next,
                format!("{prefix} < {next}"),
            )),
            _ => rows.push(unavailable(ConditionKind::PrefixSumBelowNext, j, j + 1)),
        }
    }

    // literal telescoped form: K_j - K_{-1} > K_{j-1}
    for j in 0..=horizon {
        let prev = if j == 0 {
            Some(Integer::new())
        } else {
            ks[j - 1].clone()
        };
        match (&ks[j], prev) {
            (Some(k), Some(p)) => rows.push(row(
                ConditionKind::TelescopedAbovePrevious,
                j,
                *k > p,
                format!("literal reading with K_(-1) = 0: {k} > {p}"),
            )),
            _ => rows.push(unavailable(ConditionKind::TelescopedAbovePrevious, j, j)),
        }
    }

    for j in 0..=horizon {
        match (&ks[j], &ks[j + 1]) {
            (Some(k), Some(next)) => rows.push(log_ratio_row(j, k, next)),
            _ => rows.push(unavailable(ConditionKind::LogRatioGrowth, j, j + 1)),
        }
    }

    // tail ratios r_j = sum_{i<j} K_i / K_j for j >= 1
    let mut final_ratio = None;
    let mut prev_ratio: Option<Rational> = None;
    let mut tail = Integer::new();
    for j in 0..=horizon {
        let Some(k) = &ks[j] else {
            rows.push(unavailable(ConditionKind::TailRatioDecreasing, j, j));
            prev_ratio = None;
            final_ratio = None;
            continue;
        };
        if j >= 1 && *k > 0 {
            let r = Rational::from((tail.clone(), k.clone()));
            let pass = prev_ratio.as_ref().is_none_or(|p| r < *p);
            let detail = match &prev_ratio {
                Some(p) => format!("{:.6e} < {:.6e}", r.to_f64(), p.to_f64()),
                None => format!("first ratio {:.6e}", r.to_f64()),
            };
            rows.push(row(ConditionKind::TailRatioDecreasing, j, pass, detail));
            final_ratio = Some(r.clone());
            prev_ratio = Some(r);
        }
        tail += k;
    }

    Ok(ValidationReport {
        horizon,
        rows,
        final_tail_ratio_approx: final_ratio.as_ref().map(|r| r.to_f64()),
        final_tail_ratio: final_ratio.map(|r| r.to_string()),
        notes: vec![
            "telescoped-above-previous uses the literal reading K_(-1) = 0, which reduces it to K_j > K_(j-1)"
                .to_string(),
            "tail-ratio-decreasing certifies the trend over the horizon, not the limit".to_string(),
        ],
    })
}

fn log_ratio_row(j: usize, k: &Integer, next: &Integer) -> ConditionRow {
    let cond = ConditionKind::LogRatioGrowth;
    if *next <= EXACT_POWER_LIMIT {
        let lhs = Integer::from(7).pow(k.to_u32().unwrap());
        let rhs = Integer::from(3).pow(next.to_u32().unwrap());
        return row(cond, j, lhs < rhs, format!("exact: 7^{k} < 3^{next}"));
    }
    let mut prec = round_prec(next.significant_bits() as u64 + DEFAULT_PRECISION as u64);
    for _ in 0..4 {
        let t = logs(prec);
        let lhs = t.ln7.mul_integer(k);
        let rhs = t.ln3.mul_integer(next);
        if let Some(ord) = lhs.cmp_certified(&rhs) {
            return row(cond, j, ord == Ordering::Less, format!("certified at {prec} bits"));
        }
        prec *= 2;
    }
    ConditionRow {
        condition: cond,
        j,
        outcome: Outcome::Indeterminate,
        detail: format!("unresolved at {prec} bits"),
    }
}
