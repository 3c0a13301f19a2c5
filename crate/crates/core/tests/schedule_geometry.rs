use boxdim::geometry::{length_from_counts, stage_set, ConstructionInterval, DEFAULT_ENUMERATION_CAP};
use boxdim::schedule::{
    counts_up_to, generator_at, k_value, validate_k_sequence, ConditionKind, GeneratorKind, GeneratorSchedule,
    KSequence, Outcome, Role, StageCounts,
};
use proptest::prelude::*;
use rug::{Integer, Rational};

fn sched(name: &str) -> GeneratorSchedule {
    GeneratorSchedule::builtin(name).unwrap()
}

/// Generator from the bracket rule, computed straight from a list of K values.
fn naive_kind(ks: &[u64], offset: usize, j: u64) -> GeneratorKind {
    let i = ks.iter().position(|&k| j <= k).expect("j within list");
    if i > offset {
        match (i - offset) % 6 {
            1 => return GeneratorKind::G3,
            2 => return GeneratorKind::G7,
            _ => {}
        }
    }
    GeneratorKind::G5
}

fn desk_list() -> Vec<u64> {
    (0..6).map(|j| 1u64 << (1u64 << j)).collect()
}

#[test]
fn desk_closed_form_matches_iteration() {
    let ks = desk_list();
    for (name, offset) in [("F-desk", 0), ("G-desk", 3)] {
        let s = sched(name);
        let (mut f3, mut f7) = (0u64, 0u64);
        for j in 1..=100_000u64 {
            let kind = naive_kind(&ks, offset, j);
            match kind {
                GeneratorKind::G3 => f3 += 1,
                GeneratorKind::G7 => f7 += 1,
                GeneratorKind::G5 => {}
            }
            let jj = Integer::from(j);
            assert_eq!(generator_at(&s, &jj).unwrap(), kind, "{name} j={j}");
            if j % 97 == 0 || j < 300 || ks.contains(&j) || ks.contains(&(j - 1)) {
                let c = counts_up_to(&s, &jj);
                assert_eq!((c.f3, c.f7), (Integer::from(f3), Integer::from(f7)), "{name} j={j}");
            }
        }
        let c = counts_up_to(&s, &Integer::from(100_000));
        assert_eq!((c.f3, c.f7), (Integer::from(f3), Integer::from(f7)));
    }
}

#[test]
fn k_values() {
    assert_eq!(k_value(&KSequence::paper(), 0).unwrap(), 10);
    assert_eq!(k_value(&KSequence::paper(), 2).unwrap(), 10_000);
    assert_eq!(k_value(&KSequence::desk(), 3).unwrap(), 256);
    assert_eq!(
        *KSequence::paper().value(7).unwrap(),
        Integer::from(Integer::u_pow_u(10, 128))
    );
}

#[test]
fn decimal_tower_counts() {
    let f = sched("F");
    let c = counts_up_to(&f, &Integer::from(100));
    assert_eq!(c.exponents(), (Integer::from(90), Integer::from(0), Integer::from(10)));
    let c = counts_up_to(&f, &Integer::from(10_000));
    assert_eq!(
        c.exponents(),
        (Integer::from(90), Integer::from(9900), Integer::from(10))
    );
    assert_eq!(counts_up_to(&f, &Integer::new()), StageCounts::zero());
    assert_eq!(counts_up_to(&sched("G"), &Integer::from(100)).f5(), 100);
    assert_eq!(generator_at(&f, &Integer::from(5)).unwrap(), GeneratorKind::G5);
    assert_eq!(generator_at(&f, &Integer::from(50)).unwrap(), GeneratorKind::G3);
    assert_eq!(
        generator_at(&sched("G"), &Integer::from(50)).unwrap(),
        GeneratorKind::G5
    );
}

#[test]
fn validation_examples() {
    assert!(validate_k_sequence(&KSequence::paper(), 4).unwrap().all_pass());
    assert!(validate_k_sequence(&KSequence::desk(), 4).unwrap().all_pass());
    let geometric = KSequence::explicit([1, 2, 4, 8, 16].into_iter().map(Integer::from).collect());
    let r = validate_k_sequence(&geometric, 3).unwrap();
    assert_eq!(r.outcome_of(ConditionKind::TailRatioDecreasing), Outcome::Fail);
}

#[test]
fn constancy_windows_decimal_tower() {
    // f3 frozen on (K_{6n+1}, K_{6n+6}], f7 on (K_{6n+2}, K_{6n+7}] for n = 0
    let f = sched("F");
    let k = |i: usize| (*KSequence::paper().value(i).unwrap()).clone();
    let f3_at = |j: &Integer| counts_up_to(&f, j).f3;
    let f7_at = |j: &Integer| counts_up_to(&f, j).f7;
    let ref3 = f3_at(&k(1));
    for i in 2..=6 {
        assert_eq!(f3_at(&k(i)), ref3);
        assert_eq!(f3_at(&(k(i - 1) + 1u32)), ref3);
    }
    let ref7 = f7_at(&k(2));
    for i in 3..=7 {
        assert_eq!(f7_at(&k(i)), ref7);
        assert_eq!(f7_at(&((k(i) + k(i - 1)) / 2u32)), ref7);
    }
    // G shifted by three brackets
    let g = sched("G");
    let g3 = counts_up_to(&g, &k(4)).f3;
    for i in 5..=9 {
        assert_eq!(counts_up_to(&g, &k(i)).f3, g3);
    }
    let g7 = counts_up_to(&g, &k(5)).f7;
    for i in 6..=10 {
        assert_eq!(counts_up_to(&g, &k(i)).f7, g7);
    }
}

fn huge_stage() -> impl Strategy<Value = Integer> {
    (1usize..12, any::<u64>()).prop_map(|(i, r)| {
        let k = KSequence::paper().value(i).unwrap();
        // in [1, K_i], mostly near the top of bracket i
        &*k - (Integer::from(r) % &*k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_monotone_and_bounded(a in 0u64..5_000_000, b in 0u64..5_000_000) {
        let (lo, hi) = (a.min(b), a.max(b));
        for name in ["F", "G", "F-desk", "G-desk"] {
            let s = sched(name);
            let x = counts_up_to(&s, &Integer::from(lo));
            let y = counts_up_to(&s, &Integer::from(hi));
            prop_assert!(x.f3 <= y.f3 && x.f7 <= y.f7);
            prop_assert!(Integer::from(&y.f3 + &y.f7) <= hi);
        }
    }

    #[test]
    fn finite_difference_matches_generator(j in huge_stage()) {
        for name in ["F", "G"] {
            let s = sched(name);
            let now = counts_up_to(&s, &j);
            let before = counts_up_to(&s, &Integer::from(&j - 1u32));
            let kind = generator_at(&s, &j).unwrap();
            for k in [GeneratorKind::G3, GeneratorKind::G5, GeneratorKind::G7] {
                let step = now.count(k) - before.count(k) ;
                prop_assert_eq!(step, u32::from(k == kind));
            }
        }
    }
}

fn check_stage_sets(s: &GeneratorSchedule, depth: u32) {
    let mut prev = stage_set(s, 0, DEFAULT_ENUMERATION_CAP).unwrap();
    assert_eq!(prev.intervals().collect::<Vec<_>>(), vec![ConstructionInterval::unit()]);
    for j in 1..=depth {
        let set = stage_set(s, j, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(set.len(), 1usize << j);
        let expect = length_from_counts(&counts_up_to(s, &Integer::from(j))).unwrap();
        let ivs: Vec<_> = set.intervals().collect();
        for iv in &ivs {
            assert_eq!(iv.length(), expect);
            assert!(*iv.left() >= 0 && *iv.right() <= 1);
        }
        let parents: Vec<_> = prev.intervals().collect();
        // parents are sorted and pairwise disjoint, so one containing parent is the only one
        assert!(parents.windows(2).all(|w| w[0].right() < w[1].left()));
        for iv in &ivs {
            let at = parents.partition_point(|p| p.left() <= iv.left());
            assert!(at > 0 && parents[at - 1].contains(iv));
        }
        let ends: std::collections::BTreeSet<Rational> = set.endpoints().collect();
        for e in prev.endpoints() {
            assert!(ends.contains(&e), "stage {j} lost endpoint {e}");
        }
        prev = set;
    }
}

#[test]
fn stage_set_invariants() {
    check_stage_sets(&sched("F-desk"), 12);
    check_stage_sets(&sched("G-desk"), 12);
    check_stage_sets(&sched("pure-G7"), 8);
    let custom = GeneratorSchedule::new(
        KSequence::paper(),
        Role::Custom(vec![
            boxdim::schedule::Run {
                start: Integer::new(),
                end: Some(Integer::from(2)),
                kind: GeneratorKind::G7,
            },
            boxdim::schedule::Run {
                start: Integer::from(2),
                end: None,
                kind: GeneratorKind::G3,
            },
        ]),
    )
    .unwrap();
    check_stage_sets(&custom, 8);
}

#[test]
fn generator_fractions() {
    for g in [GeneratorKind::G3, GeneratorKind::G5, GeneratorKind::G7] {
        assert_eq!(g.removed_fraction() + (g.kept_fraction() * 2u32), 1);
    }
    let (a, b) = ConstructionInterval::unit().apply_generator(GeneratorKind::G7);
    assert_eq!(
        (a.right().clone(), b.left().clone()),
        (Rational::from((1, 7)), Rational::from((6, 7)))
    );
}
