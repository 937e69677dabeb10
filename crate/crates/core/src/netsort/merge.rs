use crate::keys::Key;

/// A worker's block, kept in non-decreasing order through every network stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedBlock {
    pub worker: usize,
    pub keys: Vec<Key>,
}

impl SortedBlock {
    pub fn new(worker: usize, keys: Vec<Key>) -> SortedBlock {
        debug_assert!(
            crate::keys::is_sorted(&keys),
            "block {worker} is not sorted"
        );
        SortedBlock { worker, keys }
    }
}

/// Merge-split of two sorted blocks: `low` receives the `a.len()` smallest keys of
/// `a ∪ b`, `high` the `b.len()` largest. Ties take from `a` first.
pub fn merge_split(a: &SortedBlock, b: &SortedBlock) -> (SortedBlock, SortedBlock) {
    let mut merged = Vec::with_capacity(a.keys.len() + b.keys.len());
    let (mut i, mut j) = (0, 0);
    while i < a.keys.len() && j < b.keys.len() {
        if a.keys[i] <= b.keys[j] {
            merged.push(a.keys[i]);
            i += 1;
        } else {
            merged.push(b.keys[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&a.keys[i..]);
    merged.extend_from_slice(&b.keys[j..]);
    let high = merged.split_off(a.keys.len());
    (
        SortedBlock {
            worker: a.worker,
            keys: merged,
        },
        SortedBlock {
            worker: b.worker,
            keys: high,
        },
    )
}

/// The `count` smallest keys of two sorted slices, merged from the front.
pub fn merge_low(mine: &[Key], other: &[Key], count: usize) -> Vec<Key> {
    let mut out = Vec::with_capacity(count);
    let (mut i, mut j) = (0, 0);
    while out.len() < count {
        let take_mine = j == other.len() || (i < mine.len() && mine[i] <= other[j]);
        if take_mine {
            out.push(mine[i]);
            i += 1;
        } else {
            out.push(other[j]);
            j += 1;
        }
    }
    out
}

/// The `count` largest keys of two sorted slices, merged from the back.
pub fn merge_high(mine: &[Key], other: &[Key], count: usize) -> Vec<Key> {
    let mut out = vec![0; count];
    let (mut i, mut j) = (mine.len(), other.len());
    for slot in out.iter_mut().rev() {
        let take_mine = j == 0 || (i > 0 && mine[i - 1] >= other[j - 1]);
        if take_mine {
            i -= 1;
            *slot = mine[i];
        } else {
            j -= 1;
            *slot = other[j];
        }
    }
    out
}
