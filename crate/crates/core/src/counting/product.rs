//! Grid counts and cover/packing constructions for products `F x G`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use super::greedy::{ceil_div, floor_div};
use super::{
    cover_bracket_on, cover_union_windows, locate, pack_bracket_on, pack_points, scale_set, stage_label, CountBracket,
    LengthScale,
};
use crate::error::{Error, Result};
use crate::geometry::{stage_set, StageSet};
use crate::schedule::GeneratorSchedule;

/// Largest number of grid cells per axis that grid indices may address.
pub const GRID_AXIS_BUDGET: u64 = 1 << 62;

/// Pairs checked one by one before switching to bucket search plus sampling.
pub const PAIR_SAMPLE: usize = 10_000;

const SAMPLE_SEED: u64 = 0x5eed_b0c5;

/// Merged ranges `[k0, k1]` of half-open grid cells `[k delta, (k+1) delta)`
/// met by the stage intervals, with indices clamped to the last cell of
/// `[0, 1]`.
fn hit_ranges(set: &StageSet, delta: &Rational) -> Vec<(Integer, Integer)> {
    let (p, q) = (delta.numer(), delta.denom());
    let d = set.denominator();
    let last = ceil_div(q, p) - 1u32;
    let pd = Integer::from(p * d);
    let cell = |n: &Integer| floor_div(&Integer::from(n * q), &pd).min(last.clone());
    let mut ranges: Vec<(Integer, Integer)> = Vec::new();
    for n in set.scaled_lefts() {
        let k0 = cell(n);
        let k1 = cell(&Integer::from(n + 1u32));
        match ranges.last_mut() {
            Some((_, end)) if k0 <= Integer::from(&*end + 1u32) => {
                if k1 > *end {
                    *end = k1;
                }
            }
            _ => ranges.push((k0, k1)),
        }
    }
    ranges
}

fn range_total(ranges: &[(Integer, Integer)]) -> Integer {
    ranges.iter().map(|(a, b)| Integer::from(b - a) + 1u32).sum()
}

/// Number of origin-anchored half-open grid cells of side `delta` that meet
/// `sF x sG`. Rows are swept in parallel and summed in a fixed order.
pub fn grid_count_product(sf: &StageSet, sg: &StageSet, delta: &Rational) -> Result<Integer> {
    if *delta <= 0 {
        return Err(Error::InvalidArgument(format!(
            "grid side must be positive, got {delta}"
        )));
    }
    let per_axis = ceil_div(delta.denom(), delta.numer());
    if per_axis > GRID_AXIS_BUDGET {
        return Err(Error::GridBudget {
            cells: Integer::from(&per_axis * &per_axis).to_string(),
            budget: Integer::from(Integer::from(GRID_AXIS_BUDGET).square_ref()).to_string(),
        });
    }
    let rows = hit_ranges(sf, delta);
    let columns = range_total(&hit_ranges(sg, delta));
    // a row meets the product exactly in the columns met by the second factor
    let per_range: Vec<Integer> = rows
        .par_iter()
        .map(|(a, b)| (Integer::from(b - a) + 1u32) * &columns)
        .collect();
    Ok(per_range.into_iter().sum())
}

/// Outcome of checking that packing centres are pairwise more than `delta`
/// apart.
#[derive(Clone, Debug, Serialize)]
pub struct PackingCheck {
    pub centres: u64,
    /// Every pair was compared directly.
    pub all_pairs_direct: bool,
    /// Neighbour-bucket search over all centres (exhaustive).
    pub bucket_search: bool,
    pub sampled_pairs: u64,
    pub violations: u64,
}

impl PackingCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn too_close(a: &(Integer, Integer), b: &(Integer, Integer), delta_sq: &Integer) -> bool {
    let dx = Integer::from(&a.0 - &b.0);
    let dy = Integer::from(&a.1 - &b.1);
    Integer::from(dx.square_ref()) + Integer::from(dy.square_ref()) <= *delta_sq
}

/// Exact pairwise separation check for points on an integer grid.
fn check_separation(points: &[(Integer, Integer)], delta: &Integer) -> PackingCheck {
    let delta_sq = Integer::from(delta.square_ref());
    let n = points.len();
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs <= PAIR_SAMPLE {
        let mut violations = 0;
        for i in 0..n {
            for j in i + 1..n {
                if too_close(&points[i], &points[j], &delta_sq) {
                    violations += 1;
                }
            }
        }
        return PackingCheck {
            centres: n as u64,
            all_pairs_direct: true,
            bucket_search: false,
            sampled_pairs: pairs as u64,
            violations,
        };
    }
    // points within delta of each other share or neighbour a bucket of side delta
    let bucket = |p: &(Integer, Integer)| (floor_div(&p.0, delta), floor_div(&p.1, delta));
    let mut buckets: HashMap<(Integer, Integer), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        buckets.entry(bucket(p)).or_default().push(i);
    }
    let mut violations: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let (bx, by) = bucket(&points[i]);
            let mut hits = 0u64;
            for dx in -1i32..=1 {
                for dy in -1i32..=1 {
                    let key = (Integer::from(&bx + dx), Integer::from(&by + dy));
                    for &j in buckets.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                        if j > i && too_close(&points[i], &points[j], &delta_sq) {
                            hits += 1;
                        }
                    }
                }
            }
            hits
        })
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for _ in 0..PAIR_SAMPLE {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        if too_close(&points[i], &points[j], &delta_sq) {
            violations += 1;
        }
    }
    PackingCheck {
        centres: n as u64,
        all_pairs_direct: false,
        bucket_search: true,
        sampled_pairs: PAIR_SAMPLE as u64,
        violations,
    }
}

/// Checks that every point of `union` lies in some window `[w, w + delta]`.
fn windows_cover(union: &[(Integer, Integer)], windows: &[Integer], delta: &Integer) -> bool {
    let mut merged: Vec<(Integer, Integer)> = Vec::new();
    for w in windows {
        let end = Integer::from(w + delta);
        match merged.last_mut() {
            Some((_, e)) if *w <= *e => {
                if end > *e {
                    *e = end;
                }
            }
            _ => merged.push((w.clone(), end)),
        }
    }
    union.iter().all(|(a, b)| {
        let i = merged.partition_point(|(s, _)| s <= a);
        i > 0 && merged[i - 1].1 >= *b
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub delta: String,
    pub depth: u32,
    pub stage_f: String,
    pub stage_g: String,
    pub cover_f: CountBracket,
    pub cover_g: CountBracket,
    pub pack_f: CountBracket,
    pub pack_g: CountBracket,
    /// `2^(j_F + j_G)`, the product of the one-dimensional counts.
    pub count_product: String,
    /// Half-open grid cells of side `delta` meeting `F_d x G_d`.
    pub grid_count: String,
    /// Grid count `<= N(F, delta) N(G, delta)`.
    pub grid_within_product: bool,
    /// Grid count `<= 4 N(F, delta) N(G, delta)`.
    pub grid_within_four_products: bool,
    /// Squares of side `delta` (diameter `sqrt 2 delta`) formed from the two
    /// greedy covers.
    pub square_cover_size: String,
    pub square_cover_covers: bool,
    pub square_cover_within_product: bool,
    /// Product of the two greedy endpoint packings.
    pub packing_size: String,
    pub packing_matches_product: bool,
    pub packing: PackingCheck,
    /// All certified checks hold: the square cover, grid comparability and
    /// the product packing.
    pub holds: bool,
}

/// Product checks at one exact scale for a pair of schedules.
pub fn verify_product_inequalities(
    sf: &GeneratorSchedule,
    sg: &GeneratorSchedule,
    delta: &LengthScale,
    depth: u32,
    cap: u32,
) -> Result<ProductReport> {
    let jf = locate(sf, delta)?.stage;
    let jg = locate(sg, delta)?.stage;
    for j in [&jf, &jg] {
        if *j > depth {
            return Err(Error::DepthBelowStage {
                depth,
                stage: stage_label(j),
            });
        }
    }
    let set_f = stage_set(sf, depth, cap)?;
    let set_g = stage_set(sg, depth, cap)?;
    verify_product_on_sets(&set_f, &set_g, &jf, &jg, delta)
}

/// As [`verify_product_inequalities`] with the stage sets and stages supplied.
pub fn verify_product_on_sets(
    set_f: &StageSet,
    set_g: &StageSet,
    jf: &Integer,
    jg: &Integer,
    delta: &LengthScale,
) -> Result<ProductReport> {
    let q = delta
        .exact_delta()
        .ok_or_else(|| Error::InvalidArgument(format!("product checks need an exact delta, got {delta}")))?;
    let count_product = Integer::from(1) << (jf.to_u32().unwrap() + jg.to_u32().unwrap());

    let grid = grid_count_product(set_f, set_g, &q)?;

    let sf = scale_set(set_f, &q);
    let sg = scale_set(set_g, &q);
    let wf = cover_union_windows(&sf.intervals, &sf.delta);
    let wg = cover_union_windows(&sg.intervals, &sg.delta);
    let square_cover_size = Integer::from(wf.len()) * wg.len();
    let square_cover_covers =
        windows_cover(&sf.intervals, &wf, &sf.delta) && windows_cover(&sg.intervals, &wg, &sg.delta);

    // centres on one integer grid for both axes
    let unit = Integer::from(set_f.denominator().lcm_ref(set_g.denominator()));
    let mf = Integer::from(&unit / set_f.denominator());
    let mg = Integer::from(&unit / set_g.denominator());
    let cf: Vec<Integer> = pack_points(&sf.points, &sf.delta)
        .into_iter()
        .map(|c| c * &mf)
        .collect();
    let cg: Vec<Integer> = pack_points(&sg.points, &sg.delta)
        .into_iter()
        .map(|c| c * &mg)
        .collect();
    let centres: Vec<(Integer, Integer)> = cf
        .iter()
        .flat_map(|x| cg.iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    let packing = check_separation(&centres, &Integer::from(q.numer() * &unit));
    let packing_size = Integer::from(centres.len());

    let grid_within_product = grid <= count_product;
    let grid_within_four_products = grid <= Integer::from(&count_product * 4u32);
    let square_cover_within_product = square_cover_size <= count_product;
    let packing_matches_product = packing_size == count_product;
    let holds = square_cover_covers
        && square_cover_within_product
        && grid_within_four_products
        && packing_matches_product
        && packing.passed();
    Ok(ProductReport {
        delta: delta.to_string(),
        depth: set_f.stage(),
        stage_f: jf.to_string(),
        stage_g: jg.to_string(),
        cover_f: cover_bracket_on(set_f, delta)?,
        cover_g: cover_bracket_on(set_g, delta)?,
        pack_f: pack_bracket_on(set_f, delta)?,
        pack_g: pack_bracket_on(set_g, delta)?,
        count_product: count_product.to_string(),
        grid_count: grid.to_string(),
        grid_within_product,
        grid_within_four_products,
        square_cover_size: square_cover_size.to_string(),
        square_cover_covers,
        square_cover_within_product,
        packing_size: packing_size.to_string(),
        packing_matches_product,
        packing,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_ENUMERATION_CAP as CAP;

    fn sched(name: &str) -> GeneratorSchedule {
        GeneratorSchedule::builtin(name).unwrap()
    }

    #[test]
    fn unit_square_is_one_cell() {
        let f0 = stage_set(&sched("F"), 0, CAP).unwrap();
        let g0 = stage_set(&sched("G"), 0, CAP).unwrap();
        assert_eq!(grid_count_product(&f0, &g0, &Rational::from(1)).unwrap(), 1);
    }

    #[test]
    fn aligned_intervals_touch_two_cells() {
        // [0, 1/25] meets [0, 1/25) and [1/25, 2/25); [24/25, 1] is clamped
        let f2 = stage_set(&sched("F"), 2, CAP).unwrap();
        let r = hit_ranges(&f2, &Rational::from((1, 25)));
        assert_eq!(range_total(&r), 7);
        assert_eq!(grid_count_product(&f2, &f2, &Rational::from((1, 25))).unwrap(), 49);
    }

    #[test]
    fn degenerate_scale() {
        let r =
            verify_product_inequalities(&sched("F"), &sched("G"), &LengthScale::parse("1").unwrap(), 1, CAP).unwrap();
        assert_eq!(r.grid_count, "1");
        assert_eq!(r.count_product, "1");
        assert!(r.grid_within_product && r.holds);
    }

    #[test]
    fn worked_example_scales() {
        let r = verify_product_inequalities(&sched("F"), &sched("G"), &LengthScale::parse("1/25").unwrap(), 3, CAP)
            .unwrap();
        assert_eq!(r.packing_size, "16");
        assert_eq!(r.square_cover_size, "16");
        assert!(r.holds, "{r:#?}");
        let r = verify_product_inequalities(&sched("F"), &sched("F"), &LengthScale::parse("0,4,0").unwrap(), 5, CAP)
            .unwrap();
        assert_eq!(r.packing_size, "256");
        assert!(r.holds && r.packing.passed());
        assert!(r.packing.bucket_search);
    }

    #[test]
    fn separation_check_finds_close_pairs() {
        let pts: Vec<(Integer, Integer)> = [(0, 0), (3, 0), (5, 4)]
            .iter()
            .map(|&(x, y)| (Integer::from(x), Integer::from(y)))
            .collect();
        assert_eq!(check_separation(&pts, &Integer::from(3)).violations, 1);
        assert_eq!(check_separation(&pts, &Integer::from(2)).violations, 0);
    }

    #[test]
    fn window_cover_check() {
        let union = vec![
            (Integer::from(0), Integer::from(3)),
            (Integer::from(4), Integer::from(5)),
        ];
        assert!(windows_cover(
            &union,
            &[Integer::from(0), Integer::from(2), Integer::from(4)],
            &Integer::from(2)
        ));
        assert!(!windows_cover(
            &union,
            &[Integer::from(0), Integer::from(4)],
            &Integer::from(2)
        ));
    }
}
