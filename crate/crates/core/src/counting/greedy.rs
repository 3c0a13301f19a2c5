//! Left-to-right greedy covering and packing on the line.
//!
//! Inputs are sorted and use a common integer unit, so every decision is
//! exact. Covering uses closed windows of length `delta`; packing demands
//! centre gaps strictly greater than `delta` (closed balls of diameter
//! `delta` are disjoint exactly then).

use rug::ops::DivRounding;
use rug::Integer;

pub(crate) fn ceil_div(n: &Integer, d: &Integer) -> Integer {
    Integer::from(n.div_ceil(d))
}

pub(crate) fn floor_div(n: &Integer, d: &Integer) -> Integer {
    Integer::from(n.div_floor(d))
}

/// Left ends of the greedy cover of a sorted point list.
pub fn cover_points(points: &[Integer], delta: &Integer) -> Vec<Integer> {
    let mut windows: Vec<Integer> = Vec::new();
    let mut reach: Option<Integer> = None;
    for p in points {
        if reach.as_ref().is_some_and(|r| p <= r) {
            continue;
        }
        reach = Some(Integer::from(p + delta));
        windows.push(p.clone());
    }
    windows
}

/// Number of windows in the greedy cover of a union of sorted closed
/// intervals `[a, b]`.
pub fn cover_union_count(intervals: &[(Integer, Integer)], delta: &Integer) -> Integer {
    let mut count = Integer::new();
    let mut covered: Option<Integer> = None;
    for (a, b) in intervals {
        let start = match &covered {
            Some(c) if b <= c => continue,
            // [a, c] is already covered; the rest starts right after c
            Some(c) if a <= c => c.clone(),
            _ => a.clone(),
        };
        let k = ceil_div(&Integer::from(b - &start), delta).max(Integer::from(1));
        covered = Some(start + Integer::from(&k * delta));
        count += k;
    }
    count
}

/// Left ends of the greedy cover of a union of sorted closed intervals.
pub fn cover_union_windows(intervals: &[(Integer, Integer)], delta: &Integer) -> Vec<Integer> {
    let mut windows = Vec::new();
    let mut covered: Option<Integer> = None;
    for (a, b) in intervals {
        let mut start = match &covered {
            Some(c) if b <= c => continue,
            Some(c) if a <= c => c.clone(),
            _ => a.clone(),
        };
        loop {
            windows.push(start.clone());
            start += delta;
            if start >= *b {
                break;
            }
        }
        covered = Some(start);
    }
    windows
}

/// Greedy packing centres from a sorted point list.
pub fn pack_points(points: &[Integer], delta: &Integer) -> Vec<Integer> {
    let mut centres: Vec<Integer> = Vec::new();
    for p in points {
        if centres.last().is_none_or(|last| Integer::from(p - last) > *delta) {
            centres.push(p.clone());
        }
    }
    centres
}

/// Size of the greedy packing with centres anywhere in a union of sorted
/// closed intervals.
///
/// Each centre is placed at the infimum of the admissible region; when that
/// infimum is excluded the centre sits infinitesimally to its right, which
/// changes no later comparison against a finite endpoint.
pub fn pack_union_count(intervals: &[(Integer, Integer)], delta: &Integer) -> Integer {
    let mut count = Integer::new();
    // next centre must lie strictly beyond this bound
    let mut bound: Option<Integer> = None;
    for (a, b) in intervals {
        let (first, k) = match &bound {
            Some(v) if v >= b => continue,
            // centres at v+, (v + delta)+, ... while below b
            Some(v) if v >= a => (v.clone(), ceil_div(&Integer::from(b - v), delta)),
            // a, then (a + delta)+, ... while below b
            _ => (a.clone(), ceil_div(&Integer::from(b - a), delta).max(Integer::from(1))),
        };
        bound = Some(first + Integer::from(&k * delta));
        count += k;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    fn ivs(v: &[(i64, i64)]) -> Vec<(Integer, Integer)> {
        v.iter().map(|&(a, b)| (Integer::from(a), Integer::from(b))).collect()
    }

    #[test]
    fn point_cover_uses_closed_windows() {
        assert_eq!(
            cover_points(&ints(&[0, 1, 4, 5, 20, 21, 24, 25]), &Integer::from(1)).len(),
            4
        );
        assert_eq!(cover_points(&ints(&[0, 2, 4]), &Integer::from(2)).len(), 2);
    }

    #[test]
    fn union_cover_counts_partial_overlap() {
        assert_eq!(cover_union_count(&ivs(&[(0, 1), (3, 4)]), &Integer::from(2)), 2);
        assert_eq!(cover_union_count(&ivs(&[(0, 5)]), &Integer::from(2)), 3);
        assert_eq!(cover_union_count(&ivs(&[(0, 3), (4, 5)]), &Integer::from(2)), 3);
        assert_eq!(
            cover_union_windows(&ivs(&[(0, 3), (4, 5)]), &Integer::from(2)),
            ints(&[0, 2, 4])
        );
    }

    #[test]
    fn packing_is_strict() {
        assert_eq!(
            pack_points(&ints(&[0, 1, 4, 5, 20, 21, 24, 25]), &Integer::from(1)),
            ints(&[0, 4, 20, 24])
        );
        assert_eq!(
            pack_union_count(&ivs(&[(0, 1), (4, 5), (20, 21), (24, 25)]), &Integer::from(1)),
            4
        );
        // 0, 2+, 4+ within [0, 5]
        assert_eq!(pack_union_count(&ivs(&[(0, 5)]), &Integer::from(2)), 3);
        assert_eq!(pack_union_count(&ivs(&[(0, 4)]), &Integer::from(2)), 2);
        // v = 2 equals the next left end, so the next centre is 2+
        assert_eq!(pack_union_count(&ivs(&[(0, 0), (2, 3)]), &Integer::from(2)), 2);
        assert_eq!(pack_union_count(&ivs(&[(0, 0), (2, 2)]), &Integer::from(2)), 1);
    }
}
