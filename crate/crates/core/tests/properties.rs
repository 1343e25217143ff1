//! Randomized cross-checks of the invariants the library leans on.

use std::sync::OnceLock;

use proptest::prelude::*;

use mulab::averages::{davenport_sup, star_discrepancy, weighted_average, Weight};
use mulab::moebius::{mobius_oracle, MoebiusTable};
use mulab::orbits::RotationOrbit;
use mulab::polyeval::IntPolynomial;
use mulab::subshift::SymbolSequence;
use mulab::torus::{
    circle_dist, heis_power_translate, Frac64, HeisenbergPoint, RotationSystem,
};

fn shared_table() -> &'static MoebiusTable {
    static TABLE: OnceLock<MoebiusTable> = OnceLock::new();
    TABLE.get_or_init(|| MoebiusTable::build(1_000_000).unwrap())
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn poly(max_degree: usize) -> impl Strategy<Value = IntPolynomial> {
    proptest::collection::vec(-1000i64..=1000, 1..=max_degree + 1).prop_map(IntPolynomial::new)
}

proptest! {
    #[test]
    fn wrapped_evaluation_is_exact_mod_2_64(p in poly(6), n in 0u64..=100_000) {
        let exact = p.eval_exact(n).unwrap();
        prop_assert_eq!(exact.rem_euclid(1i128 << 64) as u64, p.eval_wrapped(n));
    }

    #[test]
    fn streams_match_pointwise_evaluation(p in poly(4), start in any::<u64>()) {
        let mut stream = p.stream(start);
        for i in 0..600u64 {
            let n = start.wrapping_add(i);
            prop_assert_eq!(stream.next().unwrap(), p.eval_wrapped(n));
        }
    }

    #[test]
    fn scaled_streams_scale_every_value(
        p in poly(4),
        start in any::<u64>(),
        scale in any::<u64>(),
    ) {
        let mut stream = p.stream_scaled(start, scale);
        for i in 0..200u64 {
            let n = start.wrapping_add(i);
            prop_assert_eq!(stream.next().unwrap(), p.eval_wrapped(n).wrapping_mul(scale));
        }
    }

    #[test]
    fn circle_addition_behaves_like_a_group(
        a in any::<u64>(),
        b in any::<u64>(),
        c in any::<u64>(),
    ) {
        let (a, b, c) = (Frac64::new(a), Frac64::new(b), Frac64::new(c));
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a - a, Frac64::ZERO);
        prop_assert_eq!(a + (-a), Frac64::ZERO);
    }

    #[test]
    fn sieve_agrees_with_trial_division(n in 1u64..=1_000_000) {
        prop_assert_eq!(shared_table().value(n).unwrap(), mobius_oracle(n));
    }

    #[test]
    fn mu_is_multiplicative_on_coprime_pairs(m in 1u64..=1000, n in 1u64..=1000) {
        prop_assume!(gcd(m, n) == 1);
        let t = shared_table();
        prop_assert_eq!(
            t.value(m * n).unwrap(),
            t.value(m).unwrap() * t.value(n).unwrap()
        );
    }

    #[test]
    fn power_translation_splits_exponents(
        x in any::<u64>(),
        y in any::<u64>(),
        z in 0.0f64..1.0,
        m1 in 0u64..=(1 << 62),
        m2 in 0u64..=(1 << 62),
    ) {
        let a = HeisenbergPoint::new(Frac64::new(x), Frac64::new(y), z);
        let whole = a.pow(m1 + m2);
        let split = heis_power_translate(&a, &a.pow(m2), m1);
        prop_assert_eq!(whole.x, split.x);
        prop_assert_eq!(whole.y, split.y);
        prop_assert!(
            circle_dist(whole.z, split.z) < 1e-10,
            "z drift {} for {} + {}",
            circle_dist(whole.z, split.z), m1, m2
        );
    }

    #[test]
    fn discrepancy_stays_within_its_universal_bounds(
        raws in proptest::collection::vec(any::<u64>(), 1..300),
    ) {
        let points: Vec<Frac64> = raws.into_iter().map(Frac64::new).collect();
        let d = star_discrepancy(&points).unwrap();
        prop_assert!(d <= 1.0, "{d}");
        prop_assert!(d >= 1.0 / (2.0 * points.len() as f64), "{d}");
    }

    #[test]
    fn factor_counts_are_submultiplicative(
        data in proptest::collection::vec(-1i8..=1, 10..200),
        l1 in 1usize..8,
        l2 in 1usize..8,
    ) {
        prop_assume!(l1 + l2 <= data.len());
        let seq = SymbolSequence::from_symbols(data).unwrap();
        let c1 = seq.distinct_factors(l1).unwrap();
        let c2 = seq.distinct_factors(l2).unwrap();
        let c12 = seq.distinct_factors(l1 + l2).unwrap();
        prop_assert!(c12 <= c1 * c2, "count({}) = {c12} > {c1} * {c2}", l1 + l2);
    }
}

#[test]
fn averages_do_not_depend_on_the_worker_count() {
    let t = shared_table();
    let orbit = RotationOrbit::new(
        RotationSystem::golden(),
        Frac64::ZERO,
        "1,2,3".parse().unwrap(),
        3,
    );
    let checkpoints = [997u64, 65_536, 250_000, 1_000_000];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| weighted_average(&orbit, Weight::Moebius(t), &checkpoints).unwrap())
    };
    let one = run(1);
    let eight = run(8);
    for ((a, b), cp) in one.averages.iter().zip(&eight.averages).zip(&checkpoints) {
        assert_eq!(a.re.to_bits(), b.re.to_bits(), "re at N = {cp}");
        assert_eq!(a.im.to_bits(), b.im.to_bits(), "im at N = {cp}");
    }
}

#[test]
fn davenport_does_not_depend_on_the_worker_count() {
    let t = shared_table();
    let p: IntPolynomial = "0,0,1".parse().unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| davenport_sup(t, &p, 50_000, 4096, 5).unwrap())
    };
    let one = run(1);
    let eight = run(8);
    assert_eq!(one.value.to_bits(), eight.value.to_bits());
    assert_eq!(one.theta, eight.theta);
}
