//! α-covers of `{0,1}^n`: center sets such that every string is α-dependent
//! with some center. Coverage counts a string as covered by itself when it
//! is a center, on top of the information inequality.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::complexity::{diff, log_n, ComplexityTable, TableSource};
use crate::error::{Error, Result};
use crate::machine::C_LITERAL;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Construction {
    Random { samples: usize, seed: u64 },
    Greedy,
    Imported,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCandidate {
    pub n: usize,
    pub alpha: i64,
    pub t: u64,
    pub construction: Construction,
    pub low_complexity_included: bool,
    /// Sorted, without duplicates.
    pub centers: Vec<Bitstring>,
}

impl CoverCandidate {
    pub fn new(n: usize, alpha: i64, t: u64, mut centers: Vec<Bitstring>) -> Result<Self> {
        if centers.iter().any(|c| c.len() != n) {
            return Err(Error::Precondition(format!(
                "every center must be {n} bits"
            )));
        }
        centers.sort();
        centers.dedup();
        Ok(Self {
            n,
            alpha,
            t,
            construction: Construction::Imported,
            low_complexity_included: false,
            centers,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        if c.centers.iter().any(|x| x.len() != c.n) {
            return Err(Error::Parse(format!("cover centers must be {} bits", c.n)));
        }
        Ok(c)
    }
}

/// Complexity threshold below which random covers add every string:
/// `α + 12⌈log₂ n⌉`.
pub fn low_complexity_threshold(n: usize, alpha: i64) -> i64 {
    alpha + 12 * log_n(n)
}

/// `T` uniform samples plus every `u` with `C^t(u) < α + 12⌈log₂ n⌉`.
pub fn random_covering(
    src: &dyn TableSource,
    n: usize,
    alpha: i64,
    samples: usize,
    seed: u64,
    t: u64,
) -> Result<CoverCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 1u64 << n;
    let mut centers: Vec<Bitstring> = (0..samples)
        .map(|_| Bitstring::from_value(rng.gen_range(0..size), n))
        .collect();
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let threshold = low_complexity_threshold(n, alpha);
    centers.extend(
        Bitstring::all(n)
            .enumerate()
            .filter(|(i, _)| plain.at(*i).is_some_and(|c| (c as i64) < threshold))
            .map(|(_, u)| u),
    );
    let mut c = CoverCandidate::new(n, alpha, t, centers)?;
    c.construction = Construction::Random { samples, seed };
    c.low_complexity_included = true;
    Ok(c)
}

/// Bitsets `A_{x,α} ∪ {x}` for each center, indexed by string value.
fn coverage_sets(
    src: &dyn TableSource,
    n: usize,
    alpha: i64,
    t: u64,
    centers: &[Bitstring],
) -> Result<Vec<FixedBitSet>> {
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let size = 1usize << n;
    centers
        .par_iter()
        .map(|x| {
            let cond: Arc<ComplexityTable> = src.table(n, x, t)?;
            let mut set = FixedBitSet::with_capacity(size);
            for y in 0..size {
                if diff(plain.at(y), cond.at(y)).is_some_and(|d| d >= alpha) {
                    set.insert(y);
                }
            }
            set.insert(x.value() as usize);
            Ok(set)
        })
        .collect()
}

/// Standard greedy set cover; each round takes the center covering the
/// most uncovered strings, lowest string on ties.
pub fn greedy_covering(
    src: &dyn TableSource,
    n: usize,
    alpha: i64,
    t: u64,
    max_n: usize,
) -> Result<CoverCandidate> {
    if n > max_n {
        return Err(Error::ResourceRefusal {
            estimated: 2f64.powi(n as i32),
            ceiling: 2f64.powi(max_n as i32),
        });
    }
    let all: Vec<Bitstring> = Bitstring::all(n).collect();
    let sets = coverage_sets(src, n, alpha, t, &all)?;
    let size = 1usize << n;
    let mut uncovered = FixedBitSet::with_capacity(size);
    uncovered.insert_range(..);
    let mut order = Vec::new();
    while !uncovered.is_clear() {
        let (best, gain) = sets
            .par_iter()
            .enumerate()
            .map(|(i, s)| (i, s.intersection(&uncovered).count()))
            .reduce(
                || (usize::MAX, 0),
                |a, b| match a.1.cmp(&b.1) {
                    std::cmp::Ordering::Greater => a,
                    std::cmp::Ordering::Less => b,
                    std::cmp::Ordering::Equal => {
                        if a.0 <= b.0 {
                            a
                        } else {
                            b
                        }
                    }
                },
            );
        debug_assert!(gain > 0, "every string covers itself");
        uncovered.difference_with(&sets[best]);
        order.push(best);
    }
    let mut c = CoverCandidate::new(
        n,
        alpha,
        t,
        order.into_iter().map(|i| all[i].clone()).collect(),
    )?;
    c.construction = Construction::Greedy;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverVerdict {
    pub n: usize,
    pub alpha: i64,
    pub t: u64,
    pub covers: bool,
    pub uncovered: Vec<Bitstring>,
    pub size: usize,
    /// `2^n / (2^(n−α+c_literal+1) + 1)`.
    pub pigeonhole_bound: f64,
    pub meets_pigeonhole: bool,
    /// `2^α`.
    pub small_reference: f64,
    /// `(2n^13 + n^12)·2^α`.
    pub union_bound_reference: f64,
}

pub fn pigeonhole_cover_bound(n: usize, alpha: i64) -> f64 {
    let max_set = 2f64.powf((n as i64 - alpha + C_LITERAL as i64 + 1) as f64) + 1.0;
    2f64.powi(n as i32) / max_set
}

/// Recomputes coverage of every `y ∈ {0,1}^n` from the tables.
pub fn verify_covering(src: &dyn TableSource, c: &CoverCandidate) -> Result<CoverVerdict> {
    let sets = coverage_sets(src, c.n, c.alpha, c.t, &c.centers)?;
    let size = 1usize << c.n;
    let mut covered = FixedBitSet::with_capacity(size);
    for s in &sets {
        covered.union_with(s);
    }
    let uncovered: Vec<Bitstring> = (0..size)
        .filter(|&y| !covered.contains(y))
        .map(|y| Bitstring::from_value(y as u64, c.n))
        .collect();
    let nf = c.n as f64;
    let pigeonhole_bound = pigeonhole_cover_bound(c.n, c.alpha);
    let covers = uncovered.is_empty();
    Ok(CoverVerdict {
        n: c.n,
        alpha: c.alpha,
        t: c.t,
        covers,
        uncovered,
        size: c.centers.len(),
        pigeonhole_bound,
        meets_pigeonhole: c.centers.len() as f64 >= pigeonhole_bound,
        small_reference: 2f64.powf(c.alpha as f64),
        union_bound_reference: (2.0 * nf.powi(13) + nf.powi(12)) * 2f64.powf(c.alpha as f64),
    })
}
