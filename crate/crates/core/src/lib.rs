//! Multicore integer sorting on a bulk-synchronous superstep runtime.
//!
//! Five algorithms sort 32-bit unsigned keys:
//!
//! - `sr4`: serial LSD radix sort, radix 2^8 (four count-sort rounds);
//! - `pr4` / `pr2`: parallel LSD radix sort with radix 2^8 / 2^16;
//! - `btn`: local radix sorts followed by a bitonic network of merge-split stages;
//! - `oet`: local radix sorts followed by `p` rounds of odd-even transposition.
//!
//! The parallel algorithms run on [`bsp`], a small superstep executor whose
//! results are deterministic and identical to a sequential simulation.
//! [`costmodel`] evaluates the MBSP cost of each algorithm exactly, and
//! [`bench`] times them and compares measured speedups with the model.

pub mod bench;
pub mod bsp;
pub mod costmodel;
mod error;
mod instance;
pub mod keys;
pub mod netsort;
pub mod radix;

pub use error::SortError;
pub use instance::{sort, Algorithm, ParseAlgorithmError, Radix, SortInstance, SortOutcome};
pub use keys::{generate_uniform_keys, verify_sorted_permutation, Key};
