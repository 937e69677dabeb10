//! Sort instances: which algorithm, on how many workers, with which radix.

use std::fmt;
use std::str::FromStr;

use crate::bsp::RunStats;
use crate::error::SortError;
use crate::keys::Key;
use crate::{netsort, radix};

/// Radix `r = 2^bits` of an LSD radix sort over 32-bit keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Radix {
    bits: u32,
}

impl Radix {
    /// Radix 2^8: four count-sort rounds.
    pub const R256: Radix = Radix { bits: 8 };
    /// Radix 2^16: two count-sort rounds.
    pub const R65536: Radix = Radix { bits: 16 };

    /// Accepts `r = 2^b` with `b` dividing 32. `r = 2^32` is rejected as its
    /// count array would not fit in memory.
    pub fn new(r: u64) -> Result<Radix, SortError> {
        if !r.is_power_of_two() || r < 2 {
            return Err(SortError::InvalidRadix(r));
        }
        let bits = r.trailing_zeros();
        if 32 % bits != 0 || bits > 16 {
            return Err(SortError::InvalidRadix(r));
        }
        Ok(Radix { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Number of digit values, `r`.
    pub fn size(self) -> usize {
        1usize << self.bits
    }

    pub fn value(self) -> u64 {
        1u64 << self.bits
    }

    /// Number of count-sort rounds needed for 32-bit keys, `32 / lg r`.
    pub fn rounds(self) -> usize {
        (32 / self.bits) as usize
    }

    #[inline(always)]
    pub fn digit(self, key: Key, round: usize) -> usize {
        ((key >> (round as u32 * self.bits)) & ((1u32 << self.bits) - 1)) as usize
    }
}

impl Default for Radix {
    fn default() -> Self {
        Radix::R256
    }
}

impl fmt::Display for Radix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Serial LSD radix sort.
    Sr4,
    /// Parallel radix sort, r = 2^8.
    Pr4,
    /// Parallel radix sort, r = 2^16.
    Pr2,
    /// Bitonic network over sorted blocks.
    Btn,
    /// Odd-even transposition over sorted blocks.
    Oet,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Sr4,
        Algorithm::Pr4,
        Algorithm::Pr2,
        Algorithm::Btn,
        Algorithm::Oet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sr4 => "sr4",
            Algorithm::Pr4 => "pr4",
            Algorithm::Pr2 => "pr2",
            Algorithm::Btn => "btn",
            Algorithm::Oet => "oet",
        }
    }

    /// The radix the algorithm is defined with, if it fixes one.
    pub fn fixed_radix(self) -> Option<Radix> {
        match self {
            Algorithm::Pr4 => Some(Radix::R256),
            Algorithm::Pr2 => Some(Radix::R65536),
            _ => None,
        }
    }

    /// Checks the processor-count precondition for this algorithm.
    pub fn check_processors(self, p: usize) -> Result<(), SortError> {
        if p == 0 {
            return Err(SortError::NoProcessors);
        }
        match self {
            Algorithm::Sr4 if p != 1 => Err(SortError::SerialOnly { algorithm: self, p }),
            Algorithm::Btn if !p.is_power_of_two() => {
                Err(SortError::NotPowerOfTwo { algorithm: self, p })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseAlgorithmError(pub String);

impl fmt::Display for ParseAlgorithmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown algorithm {:?} (expected sr4, pr4, pr2, btn or oet)",
            self.0
        )
    }
}

impl std::error::Error for ParseAlgorithmError {}

impl FromStr for Algorithm {
    type Err = ParseAlgorithmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sr4" => Ok(Algorithm::Sr4),
            "pr4" => Ok(Algorithm::Pr4),
            "pr2" => Ok(Algorithm::Pr2),
            "btn" => Ok(Algorithm::Btn),
            "oet" => Ok(Algorithm::Oet),
            _ => Err(ParseAlgorithmError(s.to_string())),
        }
    }
}

/// One benchmark unit: input keys, worker count, algorithm and radix.
///
/// For PR4/PR2 the radix is fixed by the algorithm. For SR4, BTN and OET it
/// is the radix of the serial (local) sort.
#[derive(Debug, Clone)]
pub struct SortInstance {
    input: Vec<Key>,
    p: usize,
    algorithm: Algorithm,
    radix: Radix,
    seed: u64,
}

impl SortInstance {
    pub fn new(
        input: Vec<Key>,
        p: usize,
        algorithm: Algorithm,
        radix: Radix,
        seed: u64,
    ) -> Result<SortInstance, SortError> {
        algorithm.check_processors(p)?;
        if let Some(expected) = algorithm.fixed_radix() {
            if expected != radix {
                return Err(SortError::RadixMismatch {
                    algorithm,
                    expected: expected.value(),
                    got: radix.value(),
                });
            }
        }
        Ok(SortInstance {
            input,
            p,
            algorithm,
            radix,
            seed,
        })
    }

    /// Builds an instance using the algorithm's own radix (2^8 unless fixed otherwise).
    pub fn with_default_radix(
        input: Vec<Key>,
        p: usize,
        algorithm: Algorithm,
    ) -> Result<SortInstance, SortError> {
        let radix = algorithm.fixed_radix().unwrap_or_default();
        SortInstance::new(input, p, algorithm, radix, 0)
    }

    pub fn input(&self) -> &[Key] {
        &self.input
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn into_input(self) -> Vec<Key> {
        self.input
    }

    /// Sorts the instance's input with its algorithm.
    pub fn run(&self) -> Result<SortOutcome, SortError> {
        match self.algorithm {
            Algorithm::Sr4 => Ok(SortOutcome {
                keys: radix::serial_radix_sort(&self.input, self.radix),
                stats: None,
            }),
            Algorithm::Pr4 | Algorithm::Pr2 => {
                radix::parallel_radix_sort_run(&self.input, self.p, self.radix)
            }
            Algorithm::Btn => netsort::btn_sort_run(&self.input, self.p, self.radix),
            Algorithm::Oet => netsort::oet_sort_run(&self.input, self.p, self.radix),
        }
    }
}

/// Sorted keys plus runtime statistics for the parallel algorithms.
#[derive(Debug, Clone)]
pub struct SortOutcome {
    pub keys: Vec<Key>,
    pub stats: Option<RunStats>,
}

/// Sorts `instance`, returning only the keys.
pub fn sort(instance: &SortInstance) -> Result<Vec<Key>, SortError> {
    instance.run().map(|o| o.keys)
}
