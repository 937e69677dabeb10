use crate::error::SortError;
use crate::instance::Algorithm;

/// What one worker does in one stage: exchange with `partner`, keep the low or high half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub partner: usize,
    pub keep_low: bool,
}

/// One assignment per worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub assignments: Vec<Assignment>,
}

/// Batcher's bitonic network on `p` lines, one [`Stage`] per merge-split step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitonicSchedule {
    pub p: usize,
    pub stages: Vec<Stage>,
}

impl BitonicSchedule {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

/// Number of bitonic stages on `p = 2^k` lines: `k (k + 1) / 2`.
pub fn bitonic_stage_count(p: usize) -> usize {
    let k = p.trailing_zeros() as usize;
    k * (k + 1) / 2
}

/// Builds the bitonic schedule for `p` workers.
///
/// For phase `k = 2, 4, ..., p` and sub-phase `j = k/2, ..., 1`, worker `i`
/// pairs with `i ^ j`. The pair's sub-sequence is ascending when `i & k == 0`;
/// the member that must hold the smaller keys keeps the low half. Blocks stay
/// ascending throughout, the direction lives entirely in the keep-low flag.
pub fn bitonic_schedule(p: usize) -> Result<BitonicSchedule, SortError> {
    if p == 0 {
        return Err(SortError::NoProcessors);
    }
    if !p.is_power_of_two() {
        return Err(SortError::NotPowerOfTwo {
            algorithm: Algorithm::Btn,
            p,
        });
    }
    let mut stages = Vec::with_capacity(bitonic_stage_count(p));
    let mut k = 2;
    while k <= p {
        let mut j = k / 2;
        while j >= 1 {
            let assignments = (0..p)
                .map(|i| {
                    let partner = i ^ j;
                    let ascending = i & k == 0;
                    Assignment {
                        partner,
                        keep_low: (i < partner) == ascending,
                    }
                })
                .collect();
            stages.push(Stage { assignments });
            j /= 2;
        }
        k *= 2;
    }
    Ok(BitonicSchedule { p, stages })
}

/// Partner of worker `i` in odd-even transposition round `round` (1-based), if paired.
///
/// Odd rounds pair (0,1), (2,3), ...; even rounds pair (1,2), (3,4), ....
/// The lower-indexed member keeps the low half.
pub fn oet_partner(i: usize, round: usize, p: usize) -> Option<usize> {
    let partner = if (round % 2 == 1) == i.is_multiple_of(2) {
        i + 1
    } else {
        i.checked_sub(1)?
    };
    (partner < p).then_some(partner)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Applies the schedule to one scalar per line with compare-exchange.
    fn apply_scalar(schedule: &BitonicSchedule, v: &mut [u8]) {
        for stage in &schedule.stages {
            let prev = v.to_vec();
            for (i, a) in stage.assignments.iter().enumerate() {
                let (x, y) = (prev[i], prev[a.partner]);
                v[i] = if a.keep_low { x.min(y) } else { x.max(y) };
            }
        }
    }

    #[test]
    fn stage_counts() {
        assert_eq!(bitonic_schedule(1).unwrap().len(), 0);
        assert_eq!(bitonic_schedule(4).unwrap().len(), 3);
        assert_eq!(bitonic_schedule(16).unwrap().len(), 10);
        for k in 0..=8 {
            let p = 1 << k;
            assert_eq!(bitonic_schedule(p).unwrap().len(), k * (k + 1) / 2);
            assert_eq!(bitonic_stage_count(p), k * (k + 1) / 2);
        }
    }

    #[test]
    fn rejects_non_powers_of_two() {
        for p in [3, 5, 6, 12] {
            assert!(matches!(
                bitonic_schedule(p),
                Err(SortError::NotPowerOfTwo { .. })
            ));
        }
        assert_eq!(bitonic_schedule(0), Err(SortError::NoProcessors));
    }

    #[test]
    fn stages_are_perfect_matchings() {
        for p in [2, 4, 8, 16, 32] {
            for stage in bitonic_schedule(p).unwrap().stages {
                for (i, a) in stage.assignments.iter().enumerate() {
                    assert_ne!(a.partner, i);
                    let back = stage.assignments[a.partner];
                    assert_eq!(back.partner, i);
                    assert_ne!(
                        back.keep_low, a.keep_low,
                        "exactly one of the pair keeps low"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_one_principle_exhaustive() {
        for p in [1, 2, 4, 8, 16] {
            let schedule = bitonic_schedule(p).unwrap();
            for bits in 0u32..(1 << p) {
                let mut v: Vec<u8> = (0..p).map(|i| ((bits >> i) & 1) as u8).collect();
                apply_scalar(&schedule, &mut v);
                assert!(v.windows(2).all(|w| w[0] <= w[1]), "p={p} input={bits:b}");
            }
        }
    }

    #[test]
    fn oet_pairs() {
        assert_eq!(oet_partner(0, 1, 4), Some(1));
        assert_eq!(oet_partner(1, 1, 4), Some(0));
        assert_eq!(oet_partner(3, 1, 4), Some(2));
        assert_eq!(oet_partner(0, 2, 4), None);
        assert_eq!(oet_partner(1, 2, 4), Some(2));
        assert_eq!(oet_partner(3, 2, 4), None);
        assert_eq!(oet_partner(4, 1, 5), None);
        assert_eq!(oet_partner(4, 2, 5), Some(3));
        assert_eq!(oet_partner(0, 1, 1), None);
    }
}
