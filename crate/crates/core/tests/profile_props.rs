use std::cmp::Ordering;

use boxdim::counting::LengthScale;
use boxdim::profile::{
    boundary_log, boundary_scale, dimension_report, phase_disjointness, phi, ratio_limits, window_extremum, Band,
};
use boxdim::real::{logs, Real};
use boxdim::schedule::{counts_up_to, GeneratorSchedule, KSequence};
use proptest::prelude::*;
use rug::{Float, Integer, Rational};

const LN2_LN3: f64 = 0.630_929_753_571_457_4;
const LN2_LN5: f64 = 0.430_676_558_073_393_05;
const LN2_LN7: f64 = 0.356_207_187_108_022_2;

fn sched(name: &str) -> GeneratorSchedule {
    GeneratorSchedule::builtin(name).unwrap()
}

fn neg_log(x: f64) -> LengthScale {
    LengthScale::from_neg_log_float(Float::with_val(320, x))
}

#[test]
fn boundary_log_values() {
    let f = sched("F");
    let (l3, l5, l7) = (3f64.ln(), 5f64.ln(), 7f64.ln());
    let close = |j: u64, want: f64| {
        let got = boundary_log(&f, &Integer::from(j)).unwrap().to_f64();
        assert!((got - want).abs() <= 1e-12 * want, "j={j}: {got} vs {want}");
    };
    close(1, l5);
    close(100, 90.0 * l3 + 10.0 * l5);
    close(10_000, 90.0 * l3 + 9900.0 * l7 + 10.0 * l5);
    assert!((boundary_log(&f, &Integer::from(100)).unwrap().to_f64() - 114.9695).abs() < 1e-4);
}

#[test]
fn phi_examples() {
    let f = sched("F");
    let at100 = boundary_scale(&counts_up_to(&f, &Integer::from(100)));
    let p = phi(&f, &at100).unwrap();
    assert_eq!(p.stage, 100);
    let want = 100.0 * 2f64.ln() / (90.0 * 3f64.ln() + 10.0 * 5f64.ln());
    assert!((p.phi.to_f64() - want).abs() < 1e-14);
    let p = phi(&f, &LengthScale::canonical(0, 1, 0).unwrap()).unwrap();
    assert_eq!(p.stage, 1);
    assert!((p.phi.to_f64() - LN2_LN5).abs() < 1e-15);
    let k7 = (*KSequence::paper().value(7).unwrap()).clone();
    let p = phi(&f, &boundary_scale(&counts_up_to(&f, &k7))).unwrap();
    let gap = p.phi.sub(&logs(p.phi.prec()).ln2.div(&logs(p.phi.prec()).ln3).unwrap());
    assert!(gap.hi().clone().abs() < Float::with_val(64, Float::parse("1e-60").unwrap()));
}

#[test]
fn dimension_examples() {
    let f = dimension_report(&sched("F"), 1).unwrap();
    assert!((f.upper[0].phi_f64 - 0.6029).abs() < 5e-5);
    assert!(f.upper[1].distance_f64 < 1e-60);
    let lower0 = 1e4 * 2f64.ln() / (90.0 * 3f64.ln() + 9900.0 * 7f64.ln() + 10.0 * 5f64.ln());
    assert!((f.lower[0].phi_f64 - lower0).abs() < 1e-12);
    assert!((f.lower[0].phi_f64 - 0.3573).abs() < 5e-4);
    let g = dimension_report(&sched("G"), 0).unwrap();
    assert!(g.upper[0].distance_f64 < 1e-7);
    for r in [&f, &g] {
        assert!(r
            .lower
            .iter()
            .all(|e| e.distance_f64 < if e.n == 0 { 2e-3 } else { 1e-6 }));
    }
}

#[test]
fn band_examples() {
    let k = |i: usize| (*KSequence::paper().value(i).unwrap()).clone();
    let f = sched("F");
    let up = window_extremum(&f, &(k(2) + 1u32), &k(6), Band::Upper).unwrap();
    assert!(up.value.to_f64() <= LN2_LN5 + 1e-3);
    let low = window_extremum(&f, &(k(3) + 1u32), &k(7), Band::Lower).unwrap();
    assert!(low.value.to_f64() >= LN2_LN5 - 1e-3);
    let g = sched("G");
    let up = window_extremum(&g, &(k(11) + 1u32), &k(15), Band::Upper).unwrap();
    assert!(up.value.to_f64() <= LN2_LN5 + 1e-3);
}

#[test]
fn phase_examples() {
    let (f, g) = (sched("F"), sched("G"));
    let at = boundary_scale(&counts_up_to(&f, &Integer::from(10_000)));
    let s = phase_disjointness(&f, &g, &at).unwrap();
    assert_eq!(s.stage_f, "10000");
    assert!(s.f.sevenths_window && !s.violated());
    let s = phase_disjointness(&f, &g, &LengthScale::canonical(0, 1, 0).unwrap()).unwrap();
    assert_eq!((s.stage_f.as_str(), s.stage_g.as_str()), ("1", "1"));
    assert!(!s.f.thirds_window && !s.f.sevenths_window && !s.g.thirds_window && !s.g.sevenths_window);
}

#[test]
fn ratio_examples() {
    let rows = ratio_limits(&sched("F"), 1).unwrap();
    assert_eq!(rows[1].ratio_g3, Rational::from((9, 10)));
    assert_eq!(rows[1].ratio_g7, 0);
    let k7 = (*KSequence::paper().value(7).unwrap()).clone();
    let gap = Rational::from(1 - &rows[7].ratio_g3) * Rational::from(k7);
    // 1 - f3/K = (K_6 - 90 + 10 + ...)/K_7 ~ 10^-64
    assert!(gap > Integer::from(Integer::u_pow_u(10, 63)) && gap < Integer::from(Integer::u_pow_u(10, 65)));
}

fn log_uniform_x() -> impl Strategy<Value = f64> {
    (4.0f64..70.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_times_x_is_stage_ln2(x in log_uniform_x(), name in prop::sample::select(vec!["F", "G"])) {
        let s = sched(name);
        let p = phi(&s, &neg_log(x)).unwrap();
        let ln2 = logs(p.phi.prec()).ln2.clone();
        let lhs = p.phi.mul(&p.x);
        let rhs = ln2.mul_integer(&p.stage);
        let diff = lhs.sub(&rhs).to_f64().abs();
        prop_assert!(diff <= 1e-60 * rhs.to_f64());
    }

    #[test]
    fn phi_in_oscillation_band(x in log_uniform_x(), name in prop::sample::select(vec!["F", "G"])) {
        let v = phi(&sched(name), &neg_log(x)).unwrap().phi.to_f64();
        prop_assert!((LN2_LN7 - 1e-2..=LN2_LN3 + 1e-2).contains(&v));
        prop_assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn phi_decreases_within_a_stage(x in log_uniform_x(), t in 0.01f64..0.99) {
        let f = sched("F");
        let p = phi(&f, &neg_log(x)).unwrap();
        // a point further into the same stage range
        let top = boundary_log(&f, &p.stage).unwrap();
        let gap = top.sub(&p.x);
        prop_assume!(gap.sign() == Some(Ordering::Greater));
        let step = Float::with_val(64, t);
        let y = p.x.add(&gap.mul(&Real::point(step)));
        let q = phi(&f, &LengthScale::from_neg_log(Real::point(y.mid()))).unwrap();
        prop_assert_eq!(&q.stage, &p.stage);
        prop_assert_eq!(q.phi.cmp_certified(&p.phi), Some(Ordering::Less));
    }

    #[test]
    fn phases_never_coincide(x in log_uniform_x()) {
        let s = phase_disjointness(&sched("F"), &sched("G"), &neg_log(x)).unwrap();
        prop_assert!(!s.violated());
    }
}
