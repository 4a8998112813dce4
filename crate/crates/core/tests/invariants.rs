use num_bigint::BigUint;
use proptest::prelude::*;

use scrambled_core::constructions::parse_point;
use scrambled_core::oracle::{exact_pair_counts_many, verify_oracle_match};
use scrambled_core::{
    estimate_df_at, verify_property_p, verify_step2_window, DeltaGrid, Engine, EstimateOptions, Precision,
    SymbolicPoint,
};

const GAPS: &str = "3,4,9,16,33";

fn family(kind: u8, param: u8) -> String {
    match kind {
        0 => format!("lemma1 gaps={GAPS}"),
        1 => format!("t1 i={} gaps={GAPS}", 1 + param % 5),
        2 => format!("t2 beta={:04b} gaps={GAPS}", param % 16),
        _ => format!("r3 gaps={GAPS}"),
    }
}

fn family_pair() -> impl Strategy<Value = (String, String)> {
    ((0u8..4, any::<u8>()), (0u8..4, any::<u8>()))
        .prop_map(|((a, p), (b, q))| (family(a, p), family(b, q)))
        .prop_filter("distinct points", |(u, v)| u != v)
}

#[test]
fn overlap_free_at_every_power_of_two() {
    for e in 0..=14 {
        assert!(verify_property_p(1 << e).unwrap().passed, "2^{e}");
    }
}

#[test]
fn no_shifted_window_agreement_in_first_families() {
    let names: Vec<String> = std::iter::once("lemma1 gaps=3,4,9,16".to_string())
        .chain((1..=4).map(|i| format!("t1 i={i} gaps=3,4,9,16")))
        .collect();
    let pts: Vec<SymbolicPoint> = names.iter().map(|n| parse_point(n).unwrap()).collect();
    for r in 1..=4 {
        for (a, u) in pts.iter().enumerate() {
            for (b, v) in pts.iter().enumerate() {
                let rep = verify_step2_window(u, v, r, None, 10_000).unwrap();
                assert!(rep.passed, "{} / {} r={r}: {rep}", names[a], names[b]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimators_equal_block_counts((u, v) in family_pair(), m in 2u64..=100_000, extra in 2u64..5_000) {
        let pair = [parse_point(&u).unwrap(), parse_point(&v).unwrap()];
        let grid = DeltaGrid::default_grid();
        let cps = [m.min(extra), m.max(extra + 1)];
        let cps = if cps[0] == cps[1] { vec![cps[0]] } else { cps.to_vec() };
        let exact = exact_pair_counts_many(&pair[0], &pair[1], grid.deltas(), &cps, Precision::default()).unwrap();
        let big: Vec<BigUint> = cps.iter().map(|&c| c.into()).collect();
        for engine in [Engine::Symbolwise, Engine::Blockwise] {
            let opts = EstimateOptions { grid: grid.clone(), precision: Precision::default(), engine };
            let est = estimate_df_at(&pair, &opts, &big).unwrap();
            for (e, x) in est.iter().zip(&exact) {
                prop_assert_eq!(&e.lower_counts, x);
                prop_assert_eq!(&e.upper_counts, x);
            }
        }
    }

    #[test]
    fn oracle_match_report_passes(a in 1u64..6, b in 1u64..6, bits in 4u32..33, m in 2u64..3_000) {
        prop_assume!(a != b);
        let pts = [
            parse_point(&format!("t1 i={a} gaps={GAPS}")).unwrap(),
            parse_point(&format!("t1 i={b} gaps={GAPS}")).unwrap(),
        ];
        let grid: DeltaGrid = format!("2^-{bits},1/2,1-2^-{bits}").parse().unwrap();
        let rep = verify_oracle_match(&pts, &grid, &[m], Precision::new(bits).unwrap()).unwrap();
        prop_assert!(rep.passed, "{}", rep.details);
    }
}
