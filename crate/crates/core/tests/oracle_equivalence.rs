use aztec_core::exact::{self, BiasValue};
use aztec_core::geometry::{aztec_diamond, height_from_tiling, max_extension, min_extension, PartialHeightFunction};
use aztec_core::oracle::{self, StatisticsOptions};
use num_bigint::BigInt;

#[test]
fn biased_enumeration_matches_exact_core() {
    for p in ["1/3", "1/4"] {
        let bias = BiasValue::parse(p).unwrap();
        for n in 1..=5 {
            let region = aztec_diamond(n).unwrap();
            let st = oracle::exact_statistics_with(&region, Some(&bias), &StatisticsOptions { cap: 128, pairs: false })
                .unwrap();
            let grid = exact::biased_placement_grid(n, &bias);
            for ((ell, m), v) in st.north_locations(n) {
                assert_eq!(grid.get(ell, m), v, "p={p} ({ell},{m};{n})");
            }
        }
    }
}

#[test]
fn counts_follow_power_of_two_law() {
    for n in 1..=5u32 {
        let region = aztec_diamond(n as i64).unwrap();
        let expected = BigInt::from(2).pow(n * (n + 1) / 2);
        assert_eq!(oracle::count_tilings(&region), expected);
        assert_eq!(oracle::aztec_count_formula(n), expected);
    }
}

#[test]
fn every_height_function_lies_between_extensions() {
    for n in 1..=4 {
        let region = aztec_diamond(n).unwrap();
        let boundary = PartialHeightFunction::boundary(&region, None).unwrap();
        let lo = min_extension(&boundary).unwrap();
        let hi = max_extension(&boundary).unwrap();
        for t in oracle::enumerate_tilings(&region).unwrap() {
            let h = height_from_tiling(&t, None).unwrap();
            assert!(lo.le(&h) && h.le(&hi));
        }
    }
}
