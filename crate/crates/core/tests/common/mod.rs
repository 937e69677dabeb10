#![allow(dead_code)]

use mbsp_sort::bsp::{Superstep, SuperstepProgram, Vote};
use mbsp_sort::{Key, Radix};

pub fn oracle_sort(keys: &[Key]) -> Vec<Key> {
    let mut v = keys.to_vec();
    v.sort_unstable();
    v
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A pseudo-random superstep program: every decision (what to send, to whom,
/// how to update state, when to stop) is a hash of the seed, worker id,
/// superstep index, current state and everything in the inbox.
pub struct RandomProgram {
    pub seed: u64,
    pub max_supersteps: usize,
}

impl SuperstepProgram for RandomProgram {
    type State = Vec<u32>;
    type Message = Vec<u32>;

    fn superstep(&self, step: &mut Superstep<Vec<u32>>, state: &mut Vec<u32>) -> Vote {
        let mut h = mix(self.seed ^ ((step.id() as u64) << 32) ^ step.index() as u64);
        for env in step.inbox() {
            h = mix(h ^ env.source as u64 ^ ((env.superstep as u64) << 20));
            for &x in &env.payload {
                h = mix(h ^ x as u64);
            }
            // fold the received data into the state in delivery order
            state.extend(env.payload.iter().take(3).map(|&x| x ^ env.source as u32));
        }
        for &x in state.iter() {
            h = mix(h ^ x as u64);
        }
        state.push(h as u32);
        if state.len() > 64 {
            let keep = state.len() - 32;
            state.drain(..keep);
        }

        if step.index() >= self.max_supersteps {
            return Vote::Halt;
        }
        let p = step.nprocs();
        let sends = (h % 4) as usize;
        for i in 0..sends {
            let hh = mix(h.wrapping_add(i as u64));
            let dest = (hh % p as u64) as usize;
            let len = (hh >> 8) % 6;
            let payload: Vec<u32> = (0..len).map(|j| mix(hh ^ j) as u32).collect();
            step.send(dest, payload);
        }
        if (h >> 40).is_multiple_of(5) {
            Vote::Halt
        } else {
            Vote::Continue
        }
    }
}

/// Places `index` in the bits of a 32-bit key outside digit `round` of `radix`
/// and `digit` inside it, so equal-digit keys can be told apart by input position.
pub fn tagged_key(index: u32, digit: u32, round: usize, radix: Radix) -> Key {
    let lo = round as u32 * radix.bits();
    let hi = lo + radix.bits();
    let mut key = digit << lo;
    for (bit, pos) in (0..32).filter(|&b| b < lo || b >= hi).enumerate() {
        key |= ((index >> bit) & 1) << pos;
    }
    key
}

/// Inverse of [`tagged_key`] for the index part.
pub fn tag_of(key: Key, round: usize, radix: Radix) -> u32 {
    let lo = round as u32 * radix.bits();
    let hi = lo + radix.bits();
    let mut index = 0;
    for (bit, pos) in (0..32).filter(|&b| b < lo || b >= hi).enumerate() {
        index |= ((key >> pos) & 1) << bit;
    }
    index
}
