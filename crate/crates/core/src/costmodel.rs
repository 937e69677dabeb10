//! MBSP cost model for the sorting algorithms, evaluated in exact rational
//! arithmetic.
//!
//! Costs are expressed in units of the fast-memory gap `G`. Only `g` (slow
//! memory / communication gap) and `G` enter the formulas; synchronization
//! latency `l`, memory latency `L`, memory-unit count `m` and fast-memory
//! capacity `M` are carried in [`MachineParams`] but do not contribute.
//!
//! Per count-sort round, a serial sort of `N` keys reads its input twice and
//! writes its output once (`3Ng`) and touches the count array twice per key
//! (`2NG`). The parallel sort pays `4Ng` for the extra routing pass plus `2prg`
//! for exchanging count arrays. BTN and OET pay `4(n/p)g` per merge-split stage
//! on top of the local serial sort of `n/p` keys.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::instance::{Algorithm, Radix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("the cost model needs a power-of-two processor count for {0}, got p = {1}")]
    NotPowerOfTwo(Algorithm, u64),

    #[error("processor count must be at least 1")]
    NoProcessors,

    #[error("fast-memory gap G must be positive")]
    NonPositiveFastGap,

    #[error("machine parameters must be non-negative")]
    Negative,

    #[error("speedup is undefined: the modeled cost of {0} is zero")]
    ZeroCost(Algorithm),
}

pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// The MBSP septuplet `(p, l, g, m, L, G, M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineParams {
    /// `p`: cores.
    pub p: u64,
    /// `l`: barrier synchronization latency (unused by the formulas).
    pub sync_latency: Rational,
    /// `g`: slow-memory / communication gap per word.
    pub slow_gap: Rational,
    /// `m`: memory units.
    pub memory_units: u64,
    /// `L`: memory-unit latency (unused by the formulas).
    pub memory_latency: Rational,
    /// `G`: fast-memory gap per word, the unit all costs are reported in.
    pub fast_gap: Rational,
    /// `M`: fast-memory capacity in words; `None` means unbounded.
    pub fast_capacity: Option<u64>,
}

impl MachineParams {
    /// `p` cores with `g = 5G`, `G = 1`, `m = p`, zero latencies, unbounded `M`.
    pub fn new(p: u64) -> MachineParams {
        MachineParams::with_gap_ratio(p, int(5))
    }

    /// `p` cores with `g = ratio * G`.
    pub fn with_gap_ratio(p: u64, ratio: Rational) -> MachineParams {
        MachineParams {
            p,
            sync_latency: Rational::zero(),
            slow_gap: ratio,
            memory_units: p,
            memory_latency: Rational::zero(),
            fast_gap: Rational::one(),
            fast_capacity: None,
        }
    }

    /// Same machine with a different core count (and `m` following `p`).
    pub fn with_p(&self, p: u64) -> MachineParams {
        MachineParams {
            p,
            memory_units: p,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        if self.p == 0 {
            return Err(CostError::NoProcessors);
        }
        if self.fast_gap <= Rational::zero() {
            return Err(CostError::NonPositiveFastGap);
        }
        let zero = Rational::zero();
        if self.slow_gap < zero || self.sync_latency < zero || self.memory_latency < zero {
            return Err(CostError::Negative);
        }
        Ok(())
    }

    /// `g / G`.
    pub fn gap_ratio(&self) -> Rational {
        &self.slow_gap / &self.fast_gap
    }

    fn p_rational(&self) -> Rational {
        int(self.p)
    }
}

/// A modeled cost as an exact multiple of `G`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cost(pub Rational);

impl Cost {
    pub fn in_units_of_fast_gap(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} G", self.0)
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn lg(p: u64) -> u64 {
    debug_assert!(p.is_power_of_two());
    p.trailing_zeros() as u64
}

/// Serial radix-`r` sort of `keys` keys: `(32 / lg r) (3Ng + 2NG)`.
pub fn t_serial(keys: &Rational, params: &MachineParams, radix: Radix) -> Result<Cost, CostError> {
    params.validate()?;
    let rounds = int(radix.rounds() as u64);
    let per_round = keys * (int(3) * &params.slow_gap + int(2) * &params.fast_gap);
    Ok(Cost(rounds * per_round / &params.fast_gap))
}

/// Parallel radix-`r` sort of `n` keys on `p` cores:
/// `(32 / lg r) (4Ng + 2NG + 2prg)` with `N = n / p`.
pub fn t_parallel_radix(
    n: &Rational,
    params: &MachineParams,
    radix: Radix,
) -> Result<Cost, CostError> {
    params.validate()?;
    let p = params.p_rational();
    let big_n = n / &p;
    let g = &params.slow_gap;
    let rounds = int(radix.rounds() as u64);
    let per_round = &big_n * int(4) * g
        + &big_n * int(2) * &params.fast_gap
        + int(2) * &p * int(radix.value()) * g;
    Ok(Cost(rounds * per_round / &params.fast_gap))
}

/// Odd-even transposition over `p` blocks: `T_s(n/p) + p (4n/p) g`.
pub fn t_oet(n: &Rational, params: &MachineParams) -> Result<Cost, CostError> {
    params.validate()?;
    let p = params.p_rational();
    let local = t_serial(&(n / &p), params, Radix::R256)?.0;
    let exchange = &p * (int(4) * n / &p) * &params.slow_gap / &params.fast_gap;
    Ok(Cost(local + exchange))
}

/// Bitonic network over `p` blocks: `T_s(n/p) + (lg p (lg p + 1) / 2) (4n/p) g`.
pub fn t_btn(n: &Rational, params: &MachineParams) -> Result<Cost, CostError> {
    params.validate()?;
    if !params.p.is_power_of_two() {
        return Err(CostError::NotPowerOfTwo(Algorithm::Btn, params.p));
    }
    let p = params.p_rational();
    let k = lg(params.p);
    let stages = int(k * (k + 1) / 2);
    let local = t_serial(&(n / &p), params, Radix::R256)?.0;
    let exchange = stages * (int(4) * n / &p) * &params.slow_gap / &params.fast_gap;
    Ok(Cost(local + exchange))
}

/// Modeled cost of `algorithm` on `n` keys. SR4 uses one core regardless of `params.p`.
pub fn t_algorithm(
    algorithm: Algorithm,
    n: &Rational,
    params: &MachineParams,
) -> Result<Cost, CostError> {
    match algorithm {
        Algorithm::Sr4 => t_serial(n, params, Radix::R256),
        Algorithm::Pr4 => t_parallel_radix(n, params, Radix::R256),
        Algorithm::Pr2 => t_parallel_radix(n, params, Radix::R65536),
        Algorithm::Btn => t_btn(n, params),
        Algorithm::Oet => t_oet(n, params),
    }
}

/// Predicted speedup over SR4: `T_s(n) / T_algo(n)`.
pub fn predicted_speedup(
    algorithm: Algorithm,
    n: &Rational,
    params: &MachineParams,
) -> Result<Rational, CostError> {
    let serial = t_serial(n, params, Radix::R256)?.0;
    let parallel = t_algorithm(algorithm, n, params)?.0;
    if parallel.is_zero() {
        return Err(CostError::ZeroCost(algorithm));
    }
    Ok(serial / parallel)
}

/// Limit of [`predicted_speedup`] as `n` grows without bound.
///
/// Every modeled cost is affine in `n`, so the limit is the ratio of the
/// per-key slopes, read off as `T(1) - T(0)`.
pub fn asymptotic_speedup(
    algorithm: Algorithm,
    params: &MachineParams,
) -> Result<Rational, CostError> {
    let slope = |alg| -> Result<Rational, CostError> {
        Ok(t_algorithm(alg, &Rational::one(), params)?.0
            - t_algorithm(alg, &Rational::zero(), params)?.0)
    };
    let parallel = slope(algorithm)?;
    if parallel.is_zero() {
        return Err(CostError::ZeroCost(algorithm));
    }
    Ok(slope(Algorithm::Sr4)? / parallel)
}

/// Ratio of OET to BTN cost under `g = 5G`.
///
/// With `exact = false` this is the approximation `(68 + 20p) / (68 + 10 lg² p)`.
/// With `exact = true` it is the quotient of the two cost functions,
/// `(68 + 20p) / (68 + 10 lg p (lg p + 1))`. The two differ for every `p > 1`.
pub fn predicted_ratio_oet_btn(p: u64, exact: bool) -> Result<Rational, CostError> {
    if p == 0 {
        return Err(CostError::NoProcessors);
    }
    if !p.is_power_of_two() {
        return Err(CostError::NotPowerOfTwo(Algorithm::Btn, p));
    }
    if exact {
        let params = MachineParams::new(p);
        // the quotient does not depend on n
        let n = int(p);
        Ok(t_oet(&n, &params)?.0 / t_btn(&n, &params)?.0)
    } else {
        let k = lg(p);
        Ok(Rational::new(
            int(68 + 20 * p).to_integer(),
            int(68 + 10 * k * k).to_integer(),
        ))
    }
}

/// The `g = 5G` closed forms, term for term.
pub mod closed_form {
    use super::{int, lg, Rational};

    /// `68 N`.
    pub fn t_serial_r256(keys: &Rational) -> Rational {
        int(68) * keys
    }

    /// `34 N`.
    pub fn t_serial_r65536(keys: &Rational) -> Rational {
        int(34) * keys
    }

    /// `88n/p + 40 * 256 * p`.
    pub fn t_parallel_r256(n: &Rational, p: u64) -> Rational {
        int(88) * n / int(p) + int(40 * 256 * p)
    }

    /// `44n/p + 20 * 256^2 * p`.
    pub fn t_parallel_r65536(n: &Rational, p: u64) -> Rational {
        int(44) * n / int(p) + int(20 * 256 * 256 * p)
    }

    /// `68n/p + 20n`.
    pub fn t_oet(n: &Rational, p: u64) -> Rational {
        int(68) * n / int(p) + int(20) * n
    }

    /// `68n/p + 10 n lg p (lg p + 1) / p`.
    pub fn t_btn(n: &Rational, p: u64) -> Rational {
        let k = lg(p);
        int(68) * n / int(p) + int(10) * n * int(k * (k + 1)) / int(p)
    }

    /// `68p / 88`.
    pub fn pr4_speedup_limit(p: u64) -> Rational {
        Rational::new(int(68 * p).to_integer(), int(88).to_integer())
    }

    /// `68p / (68 + 10 lg p (lg p + 1))`.
    pub fn btn_speedup(p: u64) -> Rational {
        let k = lg(p);
        Rational::new(
            int(68 * p).to_integer(),
            int(68 + 10 * k * (k + 1)).to_integer(),
        )
    }
}
