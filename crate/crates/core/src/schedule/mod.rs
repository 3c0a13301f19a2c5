//! Generator schedules driven by rapidly growing K-sequences.
//!
//! A schedule says which middle-removal generator acts at each stage
//! `j = 1, 2, ...`. The F and G constructions switch generator only at
//! K-boundaries, so every query is answered by walking the (few) runs of
//! constant generator below the stage of interest instead of the stages
//! themselves. Stage indices are arbitrary-precision throughout.

mod document;
mod validate;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rug::{Integer, Rational};

use crate::error::{Error, Result};

pub(crate) use document::parse_decimal;
pub use document::ScheduleDocument;
pub use validate::{validate_k_sequence, ConditionKind, ConditionRow, Outcome, ValidationReport};

/// Middle-removal generator: keeps two end pieces of relative length
/// `1/divisor` each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorKind {
    G3,
    G5,
    G7,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [GeneratorKind::G3, GeneratorKind::G5, GeneratorKind::G7];

    /// Reciprocal of the kept side fraction (3, 5 or 7).
    pub fn divisor(self) -> u32 {
        match self {
            GeneratorKind::G3 => 3,
            GeneratorKind::G5 => 5,
            GeneratorKind::G7 => 7,
        }
    }

    pub fn kept_fraction(self) -> Rational {
        Rational::from((1, self.divisor()))
    }

    pub fn removed_fraction(self) -> Rational {
        let d = self.divisor();
        Rational::from((d - 2, d))
    }

    pub fn label(self) -> &'static str {
        match self {
            GeneratorKind::G3 => "G3",
            GeneratorKind::G5 => "G5",
            GeneratorKind::G7 => "G7",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "G3" | "g3" | "3" => Ok(GeneratorKind::G3),
            "G5" | "g5" | "5" => Ok(GeneratorKind::G5),
            "G7" | "g7" | "7" => Ok(GeneratorKind::G7),
            other => Err(Error::Parse(format!("unknown generator {other:?}"))),
        }
    }
}

/// How the K-sequence is generated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KRule {
    /// `K_j = 10^(2^j)`.
    Paper,
    /// `K_j = 2^(2^j)`, small enough for brute-force oracles.
    Desk,
    Explicit(Vec<Integer>),
}

/// Largest index the closed-form rules will materialise (2^26 decimal digits).
pub const MAX_RULE_INDEX: usize = 26;

/// A K-sequence with a memo of materialised values. Clones share the memo.
#[derive(Clone, Debug)]
pub struct KSequence {
    rule: KRule,
    memo: Arc<Mutex<Vec<Arc<Integer>>>>,
}

impl PartialEq for KSequence {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule
    }
}

impl KSequence {
    pub fn new(rule: KRule) -> Self {
        KSequence {
            rule,
            memo: Arc::new(Mutex::new(Vec::new())),
        }
    }

    pub fn paper() -> Self {
        Self::new(KRule::Paper)
    }

    pub fn desk() -> Self {
        Self::new(KRule::Desk)
    }

    pub fn explicit(values: Vec<Integer>) -> Self {
        Self::new(KRule::Explicit(values))
    }

    pub fn rule(&self) -> &KRule {
        &self.rule
    }

    /// Number of values, `None` for the unbounded rules.
    pub fn len(&self) -> Option<usize> {
        match &self.rule {
            KRule::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn value(&self, j: usize) -> Result<Arc<Integer>> {
        let base = match &self.rule {
            KRule::Explicit(v) => {
                return v
                    .get(j)
                    .map(|k| Arc::new(k.clone()))
                    .ok_or(Error::KIndexOutOfRange { index: j, len: v.len() })
            }
            KRule::Paper => 10,
            KRule::Desk => 2,
        };
        if j > MAX_RULE_INDEX {
            return Err(Error::KIndexTooLarge {
                index: j,
                max: MAX_RULE_INDEX,
            });
        }
        let mut memo = self.memo.lock().unwrap();
        while memo.len() <= j {
            let next = match memo.last() {
                None => Integer::from(base),
                Some(prev) => Integer::from(&**prev * &**prev),
            };
            memo.push(Arc::new(next));
        }
        Ok(Arc::clone(&memo[j]))
    }

    /// `K_j`, or `None` past the end of an explicit list.
    pub fn get(&self, j: usize) -> Option<Arc<Integer>> {
        self.value(j).ok()
    }
}

/// `K_j` under the sequence's rule.
pub fn k_value(seq: &KSequence, j: usize) -> Result<Integer> {
    seq.value(j).map(|k| (*k).clone())
}

/// A maximal run of stages `(start, end]` using one generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    /// Exclusive lower stage bound.
    pub start: Integer,
    /// Inclusive upper stage bound, `None` for an unbounded final run.
    pub end: Option<Integer>,
    pub kind: GeneratorKind,
}

impl Run {
    pub fn contains(&self, j: &Integer) -> bool {
        *j > self.start && self.end.as_ref().is_none_or(|e| j <= e)
    }
}

/// Which construction a schedule follows.
#[derive(Clone, Debug, PartialEq)]
pub enum Role {
    /// G3 on `(K_{6n}, K_{6n+1}]`, G7 on `(K_{6n+1}, K_{6n+2}]`, G5 otherwise.
    F,
    /// G3 on `(K_{6m+3}, K_{6m+4}]`, G7 on `(K_{6m+4}, K_{6m+5}]`, G5 otherwise.
    G,
    /// Explicit runs covering `[1, inf)`.
    Custom(Vec<Run>),
}

impl Role {
    /// K-index offset of the phase (0 for F, 3 for G).
    pub fn phase_offset(&self) -> Option<usize> {
        match self {
            Role::F => Some(0),
            Role::G => Some(3),
            Role::Custom(_) => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Role::F => "F",
            Role::G => "G",
            Role::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSchedule {
    k: KSequence,
    role: Role,
}

impl GeneratorSchedule {
    pub fn new(k: KSequence, role: Role) -> Result<Self> {
        if let KRule::Explicit(values) = k.rule() {
            if values.iter().any(|v| *v < 0) {
                return Err(Error::InvalidSchedule("K values must be non-negative".into()));
            }
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSchedule("K values must be strictly increasing".into()));
            }
        }
        if let Role::Custom(runs) = &role {
            check_runs(runs)?;
        }
        Ok(GeneratorSchedule { k, role })
    }

    pub fn f(k: KSequence) -> Self {
        GeneratorSchedule { k, role: Role::F }
    }

    pub fn g(k: KSequence) -> Self {
        GeneratorSchedule { k, role: Role::G }
    }

    /// A single generator at every stage.
    pub fn uniform(kind: GeneratorKind) -> Self {
        GeneratorSchedule {
            k: KSequence::paper(),
            role: Role::Custom(vec![Run {
                start: Integer::new(),
                end: None,
                kind,
            }]),
        }
    }

    /// Built-in names: `F`, `G` (`K_j = 10^(2^j)`), `F-desk`, `G-desk`,
    /// `pure-G3`, `pure-G5`, `pure-G7`.
    pub fn builtin(name: &str) -> Option<Self> {
        Some(match name {
            "F" => Self::f(KSequence::paper()),
            "G" => Self::g(KSequence::paper()),
            "F-desk" => Self::f(KSequence::desk()),
            "G-desk" => Self::g(KSequence::desk()),
            "pure-G3" => Self::uniform(GeneratorKind::G3),
            "pure-G5" => Self::uniform(GeneratorKind::G5),
            "pure-G7" => Self::uniform(GeneratorKind::G7),
            _ => return None,
        })
    }

    pub fn k(&self) -> &KSequence {
        &self.k
    }

    pub fn role(&self) -> &Role {
        &self.role
    }

    /// Runs in stage order. Adjacent runs always differ in generator.
    pub fn runs(&self) -> Runs<'_> {
        Runs {
            schedule: self,
            next_bracket: 0,
            cursor: Integer::new(),
            custom_pos: 0,
            done: false,
        }
    }

    /// Runs paired with the generator counts at each run's start.
    pub fn runs_with_counts(&self) -> impl Iterator<Item = (Run, StageCounts)> + '_ {
        let mut counts = StageCounts::zero();
        self.runs().map(move |run| {
            let at_start = counts.clone();
            if let Some(end) = &run.end {
                counts = at_start.advance(run.kind, &Integer::from(end - &run.start));
            }
            (run, at_start)
        })
    }

    /// K-bracket of a stage: the least `i` with `j <= K_i`, or the list
    /// length when `j` lies past an explicit list.
    pub fn bracket_index(&self, j: &Integer) -> usize {
        let mut i = 0;
        loop {
            match self.k.get(i) {
                Some(k) if *j <= *k => return i,
                Some(_) => i += 1,
                None => return i,
            }
        }
    }
}

fn check_runs(runs: &[Run]) -> Result<()> {
    let mut expected = Integer::new();
    for (i, run) in runs.iter().enumerate() {
        if run.start != expected {
            return Err(Error::InvalidSchedule(format!(
                "run {i} starts after stage {} but the previous run ended at {expected}",
                run.start
            )));
        }
        match &run.end {
            Some(end) if *end <= run.start => {
                return Err(Error::InvalidSchedule(format!("run {i} is empty")));
            }
            Some(end) => expected = end.clone(),
            None if i + 1 != runs.len() => {
                return Err(Error::InvalidSchedule(format!("unbounded run {i} is not the last run")));
            }
            None => return Ok(()),
        }
    }
    Err(Error::InvalidSchedule(
        "custom runs must end with an unbounded run".into(),
    ))
}

/// Iterator over the runs of a schedule.
pub struct Runs<'a> {
    schedule: &'a GeneratorSchedule,
    next_bracket: usize,
    cursor: Integer,
    custom_pos: usize,
    done: bool,
}

impl Runs<'_> {
    fn bracket_kind(offset: usize, i: usize) -> GeneratorKind {
        if i > offset && (i - offset) % 6 == 1 {
            GeneratorKind::G3
        } else if i > offset && (i - offset) % 6 == 2 {
            GeneratorKind::G7
        } else {
            GeneratorKind::G5
        }
    }
}

impl Iterator for Runs<'_> {
    type Item = Run;

    fn next(&mut self) -> Option<Run> {
        if self.done {
            return None;
        }
        let offset = match &self.schedule.role {
            Role::Custom(runs) => {
                let merged = merge_from(runs, self.custom_pos);
                return match merged {
                    Some((run, next)) => {
                        self.custom_pos = next;
                        if run.end.is_none() {
                            self.done = true;
                        }
                        Some(run)
                    }
                    None => {
                        self.done = true;
                        None
                    }
                };
            }
            role => role.phase_offset().unwrap(),
        };
        // bracket i is the stage interval (K_{i-1}, K_i] with K_{-1} = 0
        let start = self.cursor.clone();
        let kind = Self::bracket_kind(offset, self.next_bracket);
        loop {
            let i = self.next_bracket;
            if Self::bracket_kind(offset, i) != kind {
                break;
            }
            match self.schedule.k.get(i) {
                Some(k) => {
                    self.cursor = (*k).clone();
                    self.next_bracket += 1;
                }
                None => {
                    // past an explicit list every stage is "otherwise"
                    if kind == GeneratorKind::G5 {
                        self.done = true;
                        return Some(Run { start, end: None, kind });
                    }
                    break;
                }
            }
        }
        if self.cursor == start {
            // a non-G5 bracket with nothing left in an explicit list
            self.done = true;
            return Some(Run {
                start,
                end: None,
                kind: GeneratorKind::G5,
            });
        }
        Some(Run {
            start,
            end: Some(self.cursor.clone()),
            kind,
        })
    }
}

fn merge_from(runs: &[Run], pos: usize) -> Option<(Run, usize)> {
    let first = runs.get(pos)?;
    let mut run = first.clone();
    let mut next = pos + 1;
    while let Some(r) = runs.get(next) {
        if r.kind != run.kind {
            break;
        }
        run.end = r.end.clone();
        next += 1;
        if run.end.is_none() {
            break;
        }
    }
    Some((run, next))
}

/// Generator application counts after stage `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StageCounts {
    pub j: Integer,
    pub f3: Integer,
    pub f7: Integer,
}

impl StageCounts {
    pub fn zero() -> Self {
        StageCounts {
            j: Integer::new(),
            f3: Integer::new(),
            f7: Integer::new(),
        }
    }

    pub fn f5(&self) -> Integer {
        Integer::from(&self.j - &self.f3) - &self.f7
    }

    /// Count of a given generator.
    pub fn count(&self, kind: GeneratorKind) -> Integer {
        match kind {
            GeneratorKind::G3 => self.f3.clone(),
            GeneratorKind::G5 => self.f5(),
            GeneratorKind::G7 => self.f7.clone(),
        }
    }

    /// Counts after `steps` further applications of `kind`.
    pub fn advance(&self, kind: GeneratorKind, steps: &Integer) -> StageCounts {
        let mut next = self.clone();
        next.j += steps;
        match kind {
            GeneratorKind::G3 => next.f3 += steps,
            GeneratorKind::G7 => next.f7 += steps,
            GeneratorKind::G5 => {}
        }
        next
    }

    /// `(f3, f7, f5)`: the stage interval length is `3^-f3 7^-f7 5^-f5`.
    pub fn exponents(&self) -> (Integer, Integer, Integer) {
        (self.f3.clone(), self.f7.clone(), self.f5())
    }
}

/// Generator applied at stage `j >= 1`.
pub fn generator_at(s: &GeneratorSchedule, j: &Integer) -> Result<GeneratorKind> {
    if *j < 1 {
        return Err(Error::InvalidArgument(format!(
            "stage {j} has no generator; stages start at 1"
        )));
    }
    Ok(s.runs().find(|r| r.contains(j)).expect("runs cover every stage").kind)
}

/// Generator counts after stage `j`, by summing runs clipped to `[1, j]`.
pub fn counts_up_to(s: &GeneratorSchedule, j: &Integer) -> StageCounts {
    let mut counts = StageCounts::zero();
    if *j <= 0 {
        return counts;
    }
    for run in s.runs() {
        let stop = match &run.end {
            Some(e) if e < j => e.clone(),
            _ => j.clone(),
        };
        counts = counts.advance(run.kind, &Integer::from(&stop - &run.start));
        if stop == *j {
            break;
        }
    }
    counts
}
