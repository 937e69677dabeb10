use thiserror::Error;

use crate::bsp::BspError;
use crate::instance::Algorithm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("radix {0} is not a power of two whose digit width divides 32 (supported: 2, 4, 16, 256, 65536)")]
    InvalidRadix(u64),

    #[error("processor count must be at least 1")]
    NoProcessors,

    #[error("{algorithm} requires a power-of-two processor count, got p = {p}")]
    NotPowerOfTwo { algorithm: Algorithm, p: usize },

    #[error("{algorithm} runs on a single processor, got p = {p}")]
    SerialOnly { algorithm: Algorithm, p: usize },

    #[error("{algorithm} is defined for radix {expected}, got {got}")]
    RadixMismatch {
        algorithm: Algorithm,
        expected: u64,
        got: u64,
    },

    #[error(transparent)]
    Runtime(#[from] BspError),
}
