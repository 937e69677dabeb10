//! Block-granularity checks of the sorting networks, run through the real
//! BTN/OET implementations with one key per worker.

use mbsp_sort::netsort::{bitonic_schedule, exchange_stages, network_sort_simulated};
use mbsp_sort::{Algorithm, Radix};

fn zero_one_vectors(p: usize) -> impl Iterator<Item = Vec<u32>> {
    (0u32..1 << p).map(move |bits| (0..p).map(|i| (bits >> i) & 1).collect())
}

fn check(algorithm: Algorithm, p: usize) {
    for input in zero_one_vectors(p) {
        let (out, stats) = network_sort_simulated(algorithm, &input, p, Radix::R256).unwrap();
        let ones = input.iter().filter(|&&b| b == 1).count();
        let expected: Vec<u32> = (0..p).map(|i| u32::from(i >= p - ones)).collect();
        assert_eq!(out, expected, "{algorithm} p={p} input={input:?}");
        let stages = match algorithm {
            Algorithm::Btn => bitonic_schedule(p).unwrap().len(),
            _ => p,
        };
        assert_eq!(exchange_stages(&stats), stages);
    }
}

#[test]
fn oet_zero_one_up_to_twelve_workers() {
    for p in 1..=12 {
        check(Algorithm::Oet, p);
    }
}

#[test]
fn btn_zero_one_powers_of_two() {
    for p in [1, 2, 4, 8, 16] {
        check(Algorithm::Btn, p);
    }
}

#[test]
fn oet_needs_all_p_rounds() {
    // reverse order is the worst case: the last key travels p - 1 positions
    for p in 2..=12usize {
        let input: Vec<u32> = (0..p as u32).rev().collect();
        let (out, _) = network_sort_simulated(Algorithm::Oet, &input, p, Radix::R256).unwrap();
        assert_eq!(out, (0..p as u32).collect::<Vec<_>>());
    }
}
