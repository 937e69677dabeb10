//! Sorting networks over `p` pre-sorted blocks.
//!
//! Both algorithms start with every worker radix-sorting its own block. BTN
//! then runs the `lg p (lg p + 1) / 2` stages of a bitonic network; OET runs `p`
//! rounds of odd-even transposition. Each stage is one superstep: paired workers
//! swap blocks and each keeps the low or high half of the merge.
//!
//! Merge-split needs equal block lengths, so when `p` does not divide `n` the
//! input is padded with `u32::MAX` up to `p * ceil(n / p)` keys and the same number of
//! keys is dropped from the tail of the result. Padding keys are maximal, so they
//! only ever displace genuine maxima of equal value.

mod merge;
mod schedule;

pub use merge::{merge_high, merge_low, merge_split, SortedBlock};
pub use schedule::{
    bitonic_schedule, bitonic_stage_count, oet_partner, Assignment, BitonicSchedule, Stage,
};

use crate::bsp::{self, RunStats, Superstep, SuperstepProgram, Vote};
use crate::error::SortError;
use crate::instance::{Algorithm, Radix, SortInstance, SortOutcome};
use crate::keys::Key;
use crate::radix::serial_radix_sort_in_place;

/// Sorts a BTN instance. `p` must be a power of two.
pub fn btn_sort(instance: &SortInstance) -> Result<Vec<Key>, SortError> {
    btn_sort_run(instance.input(), instance.p(), instance.radix()).map(|o| o.keys)
}

/// Sorts an OET instance; any `p >= 1`.
pub fn oet_sort(instance: &SortInstance) -> Result<Vec<Key>, SortError> {
    oet_sort_run(instance.input(), instance.p(), instance.radix()).map(|o| o.keys)
}

pub(crate) fn btn_sort_run(keys: &[Key], p: usize, radix: Radix) -> Result<SortOutcome, SortError> {
    Algorithm::Btn.check_processors(p)?;
    let network = BlockNetwork::bitonic(p, radix)?;
    run_network(&network, keys, p, false)
}

pub(crate) fn oet_sort_run(keys: &[Key], p: usize, radix: Radix) -> Result<SortOutcome, SortError> {
    Algorithm::Oet.check_processors(p)?;
    let network = BlockNetwork::odd_even(p, radix);
    run_network(&network, keys, p, false)
}

/// Runs BTN or OET on the sequential simulator instead of worker threads.
pub fn network_sort_simulated(
    algorithm: Algorithm,
    keys: &[Key],
    p: usize,
    radix: Radix,
) -> Result<(Vec<Key>, RunStats), SortError> {
    algorithm.check_processors(p)?;
    let network = match algorithm {
        Algorithm::Btn => BlockNetwork::bitonic(p, radix)?,
        Algorithm::Oet => BlockNetwork::odd_even(p, radix),
        other => panic!("{other} is not a block network"),
    };
    let outcome = run_network(&network, keys, p, true)?;
    Ok((outcome.keys, outcome.stats.unwrap_or_default()))
}

/// Merge-split exchange stages recorded in `stats` for a BTN/OET run.
pub fn exchange_stages(stats: &RunStats) -> usize {
    // one superstep for the local sort, then one per stage
    stats.supersteps - 1
}

fn run_network(
    network: &BlockNetwork,
    keys: &[Key],
    p: usize,
    simulate: bool,
) -> Result<SortOutcome, SortError> {
    let n = keys.len();
    let block_len = n.div_ceil(p);
    let mut blocks: Vec<Vec<Key>> = keys.chunks(block_len.max(1)).map(<[Key]>::to_vec).collect();
    blocks.resize_with(p, Vec::new);
    for block in blocks.iter_mut() {
        block.resize(block_len, Key::MAX);
    }

    let (blocks, stats) = if simulate {
        bsp::sequential_simulate(network, blocks)?
    } else {
        bsp::run_supersteps(network, blocks)?
    };
    let mut out = Vec::with_capacity(p * block_len);
    for block in blocks {
        out.extend_from_slice(&block);
    }
    out.truncate(n);
    Ok(SortOutcome {
        keys: out,
        stats: Some(stats),
    })
}

struct BlockNetwork {
    radix: Radix,
    stages: usize,
    partner: Box<dyn Fn(usize, usize) -> Option<Assignment> + Send + Sync>,
}

impl BlockNetwork {
    fn bitonic(p: usize, radix: Radix) -> Result<BlockNetwork, SortError> {
        let schedule = bitonic_schedule(p)?;
        Ok(BlockNetwork {
            radix,
            stages: schedule.len(),
            partner: Box::new(move |stage, worker| {
                Some(schedule.stages[stage].assignments[worker])
            }),
        })
    }

    fn odd_even(p: usize, radix: Radix) -> BlockNetwork {
        BlockNetwork {
            radix,
            stages: p,
            partner: Box::new(move |stage, worker| {
                oet_partner(worker, stage + 1, p).map(|partner| Assignment {
                    partner,
                    keep_low: worker < partner,
                })
            }),
        }
    }
}

impl SuperstepProgram for BlockNetwork {
    type State = Vec<Key>;
    type Message = Vec<Key>;

    fn superstep(&self, step: &mut Superstep<Vec<Key>>, block: &mut Vec<Key>) -> Vote {
        let s = step.index();
        let id = step.id();
        if s == 0 {
            serial_radix_sort_in_place(block, self.radix);
        } else if let Some(a) = (self.partner)(s - 1, id) {
            let other = step
                .take_inbox()
                .pop()
                .expect("partner block missing after exchange barrier")
                .payload;
            *block = if a.keep_low {
                merge_low(block, &other, block.len())
            } else {
                merge_high(block, &other, block.len())
            };
        }
        debug_assert!(crate::keys::is_sorted(block));
        if s < self.stages {
            if let Some(a) = (self.partner)(s, id) {
                step.send(a.partner, block.clone());
            }
            Vote::Continue
        } else {
            Vote::Halt
        }
    }
}
