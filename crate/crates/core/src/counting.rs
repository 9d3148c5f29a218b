//! Exact counting of perfect ordered partitions and the existence decision.
//!
//! `count_brute` walks all `nu^n` labelings and is the oracle for
//! `count_dp`. The DP keeps a map from the first `nu - 1` partial part sums
//! (the last one is implied by the prefix total) to the number of labelings
//! reaching them. Keys are packed into a `u128` in radix `target + 1`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::saturating_pow;
use crate::problem::{check_nu, divisibility_check, Instance};

/// Largest `nu^n` that `count_brute` will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Brute,
    Dp,
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMethod::Brute => "brute",
            CountMethod::Dp => "dp",
        })
    }
}

/// Number of perfect ordered partitions of one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    #[serde(rename = "Z", serialize_with = "crate::numeric::as_string")]
    pub z: BigUint,
    #[serde(rename = "S")]
    pub total: u64,
    pub divisible: bool,
    pub target: Option<u64>,
    pub method: CountMethod,
}

impl CountReport {
    /// Unordered count `Z / nu!`.
    pub fn unordered(&self, nu: usize) -> BigUint {
        &self.z / factorial(nu)
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Guard on the live DP state count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpBudget {
    pub max_states: usize,
}

impl Default for DpBudget {
    fn default() -> Self {
        Self {
            max_states: 1 << 24,
        }
    }
}

pub fn count_brute(inst: &Instance, nu: usize) -> Result<CountReport> {
    let div = divisibility_check(inst, nu)?;
    let n = inst.len();
    let space = saturating_pow(nu as u128, n as u32);
    if space > BRUTE_FORCE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "brute-force labelings nu^n",
            required: space,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    struct Walk<'a> {
        values: &'a [u64],
        nu: u64,
        total: u64,
        sums: Vec<u64>,
        sizes: Vec<usize>,
        hits: u64,
    }

    impl Walk<'_> {
        fn visit(&mut self, j: usize) {
            if j == self.values.len() {
                let balanced = self.sums.iter().all(|&y| y * self.nu == self.total);
                if balanced && self.sizes.iter().all(|&c| c > 0) {
                    self.hits += 1;
                }
                return;
            }
            for part in 0..self.sums.len() {
                self.sums[part] += self.values[j];
                self.sizes[part] += 1;
                self.visit(j + 1);
                self.sums[part] -= self.values[j];
                self.sizes[part] -= 1;
            }
        }
    }

    let mut walk = Walk {
        values: inst.values(),
        nu: nu as u64,
        total: div.total,
        sums: vec![0; nu],
        sizes: vec![0; nu],
        hits: 0,
    };
    walk.visit(0);
    Ok(CountReport {
        z: BigUint::from(walk.hits),
        total: div.total,
        divisible: div.divisible,
        target: div.target,
        method: CountMethod::Brute,
    })
}

trait Tally: Clone {
    fn unit() -> Self;
    /// Adds `other`; false on overflow.
    fn accumulate(&mut self, other: &Self) -> bool;
    fn into_biguint(self) -> BigUint;
}

impl Tally for u128 {
    fn unit() -> Self {
        1
    }

    fn accumulate(&mut self, other: &Self) -> bool {
        match self.checked_add(*other) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }

    fn into_biguint(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Tally for BigUint {
    fn unit() -> Self {
        BigUint::one()
    }

    fn accumulate(&mut self, other: &Self) -> bool {
        *self += other;
        true
    }

    fn into_biguint(self) -> BigUint {
        self
    }
}

/// Packing of `nu - 1` sums in `0..=target` into one `u128`.
struct Codec {
    radix: u128,
    places: Vec<u128>,
}

impl Codec {
    fn new(nu: usize, target: u64) -> Result<Self> {
        let radix = target as u128 + 1;
        let mut places = Vec::with_capacity(nu - 1);
        let mut place: u128 = 1;
        for i in 0..nu - 1 {
            places.push(place);
            if i + 1 < nu - 1 {
                place = place
                    .checked_mul(radix)
                    .ok_or(Error::MemoryBudgetExceeded {
                        states: saturating_pow(radix, (nu - 1) as u32),
                        limit: u128::MAX,
                    })?;
            }
        }
        // the full key range must fit as well
        place
            .checked_mul(radix)
            .ok_or(Error::MemoryBudgetExceeded {
                states: saturating_pow(radix, (nu - 1) as u32),
                limit: u128::MAX,
            })?;
        Ok(Self { radix, places })
    }

    fn decode(&self, mut key: u128, out: &mut [u64]) {
        for s in out.iter_mut() {
            *s = (key % self.radix) as u64;
            key /= self.radix;
        }
    }

    fn encode(&self, sums: &[u64]) -> u128 {
        sums.iter()
            .zip(&self.places)
            .map(|(&s, &p)| s as u128 * p)
            .sum()
    }
}

/// Shared setup: target, codec and the per-position minimum of the remaining values.
struct DpFrame {
    target: u64,
    codec: Codec,
    suffix_min: Vec<u64>,
}

impl DpFrame {
    fn new(inst: &Instance, nu: usize, target: u64) -> Result<Self> {
        let codec = Codec::new(nu, target)?;
        let values = inst.values();
        let mut suffix_min = vec![u64::MAX; values.len() + 1];
        for j in (0..values.len()).rev() {
            suffix_min[j] = suffix_min[j + 1].min(values[j]);
        }
        Ok(Self {
            target,
            codec,
            suffix_min,
        })
    }

    /// A part with sum `s` before item `j` can still be completed.
    fn feasible(&self, s: u64, j: usize) -> bool {
        s <= self.target && (s == self.target || self.target - s >= self.suffix_min[j])
    }
}

fn over_budget(states: usize, budget: DpBudget) -> Error {
    Error::MemoryBudgetExceeded {
        states: states as u128,
        limit: budget.max_states as u128,
    }
}

/// `Ok(None)` signals fixed-width overflow.
fn run_count_dp<T: Tally>(
    inst: &Instance,
    nu: usize,
    frame: &DpFrame,
    budget: DpBudget,
) -> Result<Option<BigUint>> {
    let values = inst.values();
    let mut states: FxHashMap<u128, T> = FxHashMap::default();
    states.insert(0, T::unit());
    let mut sums = vec![0u64; nu - 1];
    let mut prefix = 0u64;
    for (j, &v) in values.iter().enumerate() {
        let mut next: FxHashMap<u128, T> =
            FxHashMap::with_capacity_and_hasher(states.len() * 2, Default::default());
        for (&key, count) in &states {
            frame.codec.decode(key, &mut sums);
            let implied = prefix - sums.iter().sum::<u64>();
            for part in 0..nu {
                let grown = if part + 1 < nu { sums[part] } else { implied } + v;
                if !frame.feasible(grown, j + 1) {
                    continue;
                }
                let child = if part + 1 < nu {
                    key + v as u128 * frame.codec.places[part]
                } else {
                    key
                };
                // remaining parts must stay completable as well
                let others_ok = (0..nu).filter(|&q| q != part).all(|q| {
                    let s = if q + 1 < nu { sums[q] } else { implied };
                    frame.feasible(s, j + 1)
                });
                if !others_ok {
                    continue;
                }
                match next.get_mut(&child) {
                    Some(c) => {
                        if !c.accumulate(count) {
                            return Ok(None);
                        }
                    }
                    None => {
                        next.insert(child, count.clone());
                    }
                }
            }
            if next.len() > budget.max_states {
                return Err(over_budget(next.len(), budget));
            }
        }
        prefix += v;
        states = next;
        if states.is_empty() {
            break;
        }
    }
    let full = frame.codec.encode(&vec![frame.target; nu - 1]);
    Ok(Some(
        states
            .remove(&full)
            .map(T::into_biguint)
            .unwrap_or_else(BigUint::zero),
    ))
}

pub fn count_dp(inst: &Instance, nu: usize) -> Result<CountReport> {
    count_dp_with_budget(inst, nu, DpBudget::default())
}

pub fn count_dp_with_budget(inst: &Instance, nu: usize, budget: DpBudget) -> Result<CountReport> {
    let div = divisibility_check(inst, nu)?;
    let report = |z| CountReport {
        z,
        total: div.total,
        divisible: div.divisible,
        target: div.target,
        method: CountMethod::Dp,
    };
    let Some(target) = div.target else {
        return Ok(report(BigUint::zero()));
    };
    let frame = DpFrame::new(inst, nu, target)?;
    let z = match run_count_dp::<u128>(inst, nu, &frame, budget)? {
        Some(z) => z,
        None => run_count_dp::<BigUint>(inst, nu, &frame, budget)?
            .expect("arbitrary-precision tally cannot overflow"),
    };
    Ok(report(z))
}

pub fn exists_perfect(inst: &Instance, nu: usize) -> Result<bool> {
    exists_perfect_with_budget(inst, nu, DpBudget::default())
}

/// Reachability over the DP state space. Label permutations map reachable
/// states to reachable states, so states are kept with their sums sorted
/// (the largest, implied one dropped).
pub fn exists_perfect_with_budget(inst: &Instance, nu: usize, budget: DpBudget) -> Result<bool> {
    check_nu(nu)?;
    let div = divisibility_check(inst, nu)?;
    let Some(target) = div.target else {
        return Ok(false);
    };
    let frame = DpFrame::new(inst, nu, target)?;
    let values = inst.values();

    let mut states: FxHashSet<u128> = FxHashSet::default();
    states.insert(0);
    let mut sums = vec![0u64; nu];
    let mut child = vec![0u64; nu];
    let mut prefix = 0u64;
    for (j, &v) in values.iter().enumerate() {
        let mut next: FxHashSet<u128> =
            FxHashSet::with_capacity_and_hasher(states.len() * 2, Default::default());
        for &key in &states {
            frame.codec.decode(key, &mut sums[..nu - 1]);
            sums[nu - 1] = prefix - sums[..nu - 1].iter().sum::<u64>();
            for part in 0..nu {
                if part > 0 && sums[part] == sums[part - 1] {
                    continue;
                }
                child.copy_from_slice(&sums);
                child[part] += v;
                if !child.iter().all(|&s| frame.feasible(s, j + 1)) {
                    continue;
                }
                child.sort_unstable();
                // nu - 1 full parts: the rest of the items complete the last one
                if child[1..].iter().all(|&s| s == target) {
                    return Ok(true);
                }
                next.insert(frame.codec.encode(&child[..nu - 1]));
            }
            if next.len() > budget.max_states {
                return Err(over_budget(next.len(), budget));
            }
        }
        prefix += v;
        states = next;
        if states.is_empty() {
            return Ok(false);
        }
    }
    Ok(false)
}
