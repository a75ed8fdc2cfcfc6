mod common;

use common::*;
use dgldpc::exit::ExitCoefficients;
use dgldpc::{binomial, ComponentCode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `(n, k, seed)` for a random full-rank generator.
fn dims(max_n: usize, max_k: usize) -> impl Strategy<Value = (usize, usize, u64)> {
    (3..=max_n).prop_flat_map(move |n| (Just(n), 1..n.min(max_k + 1), any::<u64>()))
}

fn random_code(n: usize, k: usize, seed: u64) -> (Rows, ComponentCode) {
    let rows = random_full_rank(&mut ChaCha8Rng::seed_from_u64(seed), n, k);
    let code = ComponentCode::new(matrix_of(&rows)).unwrap();
    (rows, code)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn independent_sets_give_minimum_distance((n, k, seed) in dims(10, 6)) {
        let (rows, code) = random_code(n, k, seed);
        let d = min_distance_oracle(&rows);
        prop_assert_eq!(code.min_independent_set_size(), d);
        prop_assert_eq!(code.min_distance_bruteforce().unwrap(), d);
    }

    #[test]
    fn info_functions_ignore_the_representation((n, k, seed) in dims(10, 6), steps in 1usize..12) {
        let (rows, code) = random_code(n, k, seed);
        let other = scramble_rows(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), &rows, steps);
        let variant = ComponentCode::new(matrix_of(&other)).unwrap();
        prop_assert_eq!(code.info_functions(), variant.info_functions());
        prop_assert_eq!(code.min_independent_set_size(), variant.min_independent_set_size());
    }

    #[test]
    fn minimal_independent_sets_drop_rank_by_one((n, k, seed) in dims(9, 5)) {
        let (_, code) = random_code(n, k, seed);
        let t = code.min_independent_set_size();
        let sets = code.independent_sets_of_size(t);
        prop_assert!(!sets.is_empty());
        for set in sets {
            prop_assert_eq!(code.rank_drop_of_removal(&set).unwrap(), 1);
        }
    }

    #[test]
    fn any_independent_set_bounds_the_distance((n, k, seed) in dims(9, 5), mask in any::<u16>()) {
        let (rows, code) = random_code(n, k, seed);
        let removed: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if code.rank_drop_of_removal(&removed).unwrap() > 0 {
            prop_assert!(min_distance_oracle(&rows) <= removed.len());
        }
    }

    #[test]
    fn info_functions_match_rank_oracle((n, k, seed) in dims(8, 5)) {
        let (rows, code) = random_code(n, k, seed);
        let table = code.info_functions();
        for g in 0..=n {
            let mut sum = 0u128;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize == g {
                    let sub: Rows = rows
                        .iter()
                        .map(|r| (0..n).filter(|c| mask >> c & 1 == 1).map(|c| r[c]).collect())
                        .collect();
                    sum += if g == 0 { 0 } else { rank_oracle(&sub) as u128 };
                }
            }
            prop_assert_eq!(table.get(g), sum, "g = {}", g);
            prop_assert!(table.get(g) <= k as u128 * binomial(n, g));
        }
    }

    #[test]
    fn exit_coefficient_laws((n, k, seed) in dims(8, 5)) {
        let (rows, code) = random_code(n, k, seed);
        let d = min_distance_oracle(&rows);
        prop_assume!(d >= 2);
        let c = ExitCoefficients::for_variable(&code);
        let a_tz = c.a_tz.as_ref().unwrap();
        prop_assert_eq!(c.a_t[0], 0);
        prop_assert!(a_tz[0].iter().all(|&a| a == 0));
        prop_assert_eq!(c.a_t[1] == 0, d >= 3);
        prop_assert_eq!(a_tz[1].iter().all(|&a| a == 0), d >= 3);
    }
}

#[test]
fn split_tables_depend_on_the_representation() {
    // same code, second row replaced by the sum of both rows
    let a = code("1100\n0011");
    let b = code("1100\n1111");
    assert!(a.generator().same_row_space(b.generator()).unwrap());
    assert_eq!(a.info_functions(), b.info_functions());
    assert_ne!(a.split_info_functions(), b.split_info_functions());
}

#[test]
fn row_swaps_alone_keep_split_tables() {
    // permuting rows permutes the identity columns, and every subset of
    // them is summed over
    let a = code(HAMMING74);
    let b = code("0010011\n1000110\n0001111\n0100101");
    assert_eq!(a.split_info_functions(), b.split_info_functions());
}

#[test]
fn fixture_codes() {
    for (text, d) in [(C32, 2), (HAMMING74, 3), ("11111", 5), ("100001\n010001\n001001\n000101\n000011", 2)] {
        let c = code(text);
        let rows = rows_of(c.generator());
        assert_eq!(min_distance_oracle(&rows), d);
        assert_eq!(c.min_independent_set_size(), d);
        let delta = c.delta_params();
        assert_eq!(delta.delta_n2 > 0, d == 2);
        assert_eq!(delta.delta_n2_kz[0], 0);
    }
}
