//! Stable LSD radix sorting: the serial sort (SR4) and the parallel sorts
//! (PR4, PR2) over the superstep runtime.
//!
//! One parallel round takes two supersteps. In the first, every worker counts
//! the digits of its block and sends its count array to every worker. In the
//! second, every worker turns the `p` count arrays into global positions for its
//! keys and routes each key to the worker that owns that position. Positions are
//! the exclusive prefix sum over counters ordered digit-major, then by source
//! worker, then by local order. That order is exactly what a stable serial
//! count-sort of the concatenated blocks would produce, so the parallel sort
//! is bit-identical to the serial one for every `p`.
//!
//! Positions are cut into `p` balanced contiguous ranges each round (the first
//! `n mod p` workers own one extra position). Received keys are placed with one
//! cursor per digit: the inbox is ordered by source, and for a fixed digit the
//! sources' position ranges are consecutive.

use crate::bsp::{self, RunStats, Superstep, SuperstepProgram, Vote};
use crate::error::SortError;
use crate::instance::{Radix, SortInstance, SortOutcome};
use crate::keys::{balanced_blocks, balanced_len, balanced_owner, Key};

/// Occurrences of each digit value in one worker's block for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitCounts {
    pub owner: usize,
    pub round: usize,
    pub counts: Vec<usize>,
}

impl DigitCounts {
    pub fn of(keys: &[Key], owner: usize, round: usize, radix: Radix) -> DigitCounts {
        DigitCounts {
            owner,
            round,
            counts: digit_histogram(keys, round, radix),
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

fn digit_histogram(keys: &[Key], round: usize, radix: Radix) -> Vec<usize> {
    let mut counts = vec![0usize; radix.size()];
    for &k in keys {
        counts[radix.digit(k, round)] += 1;
    }
    counts
}

/// One stable count-sort pass on digit `round` (round 0 is the lowest digit).
pub fn count_sort_round(keys: &[Key], round: usize, radix: Radix) -> Vec<Key> {
    assert!(
        round < radix.rounds(),
        "round {round} out of range for radix {radix}"
    );
    let mut out = vec![0; keys.len()];
    count_sort_into(keys, &mut out, round, radix);
    out
}

fn count_sort_into(src: &[Key], dst: &mut [Key], round: usize, radix: Radix) {
    let mut offsets = digit_histogram(src, round, radix);
    let mut sum = 0;
    for c in offsets.iter_mut() {
        let count = *c;
        *c = sum;
        sum += count;
    }
    for &k in src {
        let d = radix.digit(k, round);
        dst[offsets[d]] = k;
        offsets[d] += 1;
    }
}

/// Serial LSD radix sort: `32 / lg r` stable count-sort rounds, low digit first.
pub fn serial_radix_sort(keys: &[Key], radix: Radix) -> Vec<Key> {
    serial_radix_sort_counted(keys, radix).0
}

/// [`serial_radix_sort`] that also reports how many count-sort rounds ran.
pub fn serial_radix_sort_counted(keys: &[Key], radix: Radix) -> (Vec<Key>, usize) {
    let mut a = keys.to_vec();
    let mut b = vec![0; keys.len()];
    let mut rounds = 0;
    for round in 0..radix.rounds() {
        count_sort_into(&a, &mut b, round, radix);
        std::mem::swap(&mut a, &mut b);
        rounds += 1;
    }
    (a, rounds)
}

/// In-place variant used for the local sorts of the block networks.
pub(crate) fn serial_radix_sort_in_place(keys: &mut Vec<Key>, radix: Radix) {
    if keys.len() < 2 {
        return;
    }
    let mut tmp = vec![0; keys.len()];
    for round in 0..radix.rounds() {
        count_sort_into(keys, &mut tmp, round, radix);
        std::mem::swap(keys, &mut tmp);
    }
}

/// Sorts a PR4/PR2 instance (or any instance, using its radix) on `instance.p()` workers.
pub fn parallel_radix_sort(instance: &SortInstance) -> Result<Vec<Key>, SortError> {
    parallel_radix_sort_run(instance.input(), instance.p(), instance.radix()).map(|o| o.keys)
}

pub(crate) fn parallel_radix_sort_run(
    keys: &[Key],
    p: usize,
    radix: Radix,
) -> Result<SortOutcome, SortError> {
    if p == 0 {
        return Err(SortError::NoProcessors);
    }
    let program = ParallelRadix { radix };
    let states = initial_states(keys, p);
    let (states, stats) = bsp::run_supersteps(&program, states)?;
    Ok(SortOutcome {
        keys: concat(states),
        stats: Some(stats),
    })
}

/// Runs the parallel radix program on the sequential simulator.
pub fn parallel_radix_sort_simulated(
    keys: &[Key],
    p: usize,
    radix: Radix,
) -> Result<(Vec<Key>, RunStats), SortError> {
    if p == 0 {
        return Err(SortError::NoProcessors);
    }
    let (states, stats) =
        bsp::sequential_simulate(&ParallelRadix { radix }, initial_states(keys, p))?;
    Ok((concat(states), stats))
}

/// Number of key-routing rounds recorded in `stats` for a parallel radix run.
pub fn routing_rounds(stats: &RunStats) -> usize {
    // count exchange and key routing alternate; the final superstep only places keys
    stats.supersteps / 2
}

fn initial_states(keys: &[Key], p: usize) -> Vec<WorkerState> {
    let n = keys.len();
    balanced_blocks(keys, p)
        .into_iter()
        .map(|block| WorkerState {
            block,
            n,
            round: 0,
            counts: Vec::new(),
        })
        .collect()
}

fn concat(states: Vec<WorkerState>) -> Vec<Key> {
    let mut out = Vec::with_capacity(states.iter().map(|s| s.block.len()).sum());
    for s in states {
        out.extend_from_slice(&s.block);
    }
    out
}

struct ParallelRadix {
    radix: Radix,
}

struct WorkerState {
    block: Vec<Key>,
    n: usize,
    round: usize,
    // counts of the current round, indexed [source][digit]
    counts: Vec<Vec<usize>>,
}

enum Message {
    Counts(DigitCounts),
    Keys(Vec<Key>),
}

impl SuperstepProgram for ParallelRadix {
    type State = WorkerState;
    type Message = Message;

    fn superstep(&self, step: &mut Superstep<Message>, state: &mut WorkerState) -> Vote {
        let rounds = self.radix.rounds();
        if step.index().is_multiple_of(2) {
            if step.index() > 0 {
                self.place(step, state);
                state.round += 1;
            }
            if state.round == rounds {
                return Vote::Halt;
            }
            let counts = DigitCounts::of(&state.block, step.id(), state.round, self.radix);
            for dest in 0..step.nprocs() {
                step.send(dest, Message::Counts(counts.clone()));
            }
        } else {
            self.route(step, state);
        }
        Vote::Continue
    }
}

impl ParallelRadix {
    /// Computes global positions from all workers' counts and sends each key to its owner.
    fn route(&self, step: &mut Superstep<Message>, state: &mut WorkerState) {
        let p = step.nprocs();
        let id = step.id();
        let r = self.radix.size();
        state.counts = step
            .take_inbox()
            .into_iter()
            .map(|env| match env.payload {
                Message::Counts(c) => {
                    debug_assert_eq!(c.owner, env.source);
                    debug_assert_eq!(c.round, state.round);
                    c.counts
                }
                Message::Keys(_) => unreachable!("keys arrive only after routing"),
            })
            .collect();
        debug_assert_eq!(state.counts.len(), p);

        // offset[d] = keys with a smaller digit anywhere + keys with digit d on lower workers
        let mut offset = vec![0usize; r];
        let mut sum = 0;
        for (d, slot) in offset.iter_mut().enumerate() {
            let before: usize = state.counts[..id].iter().map(|c| c[d]).sum();
            *slot = sum + before;
            sum += state.counts.iter().map(|c| c[d]).sum::<usize>();
        }
        debug_assert_eq!(sum, state.n);

        let n = state.n;
        let mut outgoing: Vec<Vec<Key>> = vec![Vec::new(); p];
        for &k in &state.block {
            let d = self.radix.digit(k, state.round);
            let dest = balanced_owner(n, p, offset[d]);
            offset[d] += 1;
            outgoing[dest].push(k);
        }
        for (dest, keys) in outgoing.into_iter().enumerate() {
            if !keys.is_empty() {
                step.send(dest, Message::Keys(keys));
            }
        }
    }

    /// Writes routed keys into this worker's range of the global digit order.
    fn place(&self, step: &mut Superstep<Message>, state: &mut WorkerState) {
        let p = step.nprocs();
        let id = step.id();
        let n = state.n;
        let lo: usize = (0..id).map(|w| balanced_len(n, p, w)).sum();
        let len = balanced_len(n, p, id);
        let hi = lo + len;

        let mut cursor = vec![0usize; self.radix.size()];
        let mut start = 0;
        for (d, c) in cursor.iter_mut().enumerate() {
            *c = start.clamp(lo, hi) - lo;
            start += state.counts.iter().map(|counts| counts[d]).sum::<usize>();
        }

        let mut block = vec![0; len];
        for env in step.take_inbox() {
            let Message::Keys(keys) = env.payload else {
                unreachable!("only keys are sent in a routing superstep");
            };
            for k in keys {
                let d = self.radix.digit(k, state.round);
                block[cursor[d]] = k;
                cursor[d] += 1;
            }
        }
        state.block = block;
    }
}
