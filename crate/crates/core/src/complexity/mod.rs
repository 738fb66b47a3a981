//! Exact time-bounded complexity `C^t(x | w)` by exhaustive program search.
//!
//! A [`ComplexityTable`] holds `C^t(x | w)` for every `x` of one length under
//! one condition and budget. Tables are built by running every program up to
//! `length_cap` bits; the first program (in enumeration order) that prints `x`
//! is the shortest description `x*`.

mod cache;
mod soi;
mod source;

pub use cache::{cache_file_name, read_table, write_table, MAGIC};
pub use soi::{soi_report, PairSample, SlackDistribution, SlackReport};
pub use source::{Lab, LabConfig, TableKey, TableSet, TableSource};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{ceil_log2, Bitstring};
use crate::error::{Error, Result};
use crate::machine::{self, program_count, run, Program, RunKind};

/// Persisted marker for "no program up to the length cap prints x".
pub const SENTINEL: u8 = 255;
/// Default step budget.
pub const DEFAULT_BUDGET: u64 = 4096;
/// Default `length_cap - n`.
pub const DEFAULT_CAP_SLACK: usize = 4;
/// Default refusal threshold for `2^(length_cap+1) · t`.
pub const DEFAULT_WORK_CEILING: f64 = 1e10;
/// Largest string length a full table is built for.
pub const MAX_TABLE_N: usize = 24;

pub fn default_length_cap(n: usize) -> usize {
    n + DEFAULT_CAP_SLACK
}

/// Estimated interpreter steps of a full sweep: `2^(cap+1) · t`.
pub fn work_estimate(length_cap: usize, budget: u64) -> f64 {
    2f64.powi(length_cap as i32 + 1) * budget as f64
}

pub fn check_work(length_cap: usize, budget: u64, ceiling: f64) -> Result<()> {
    let estimated = work_estimate(length_cap, budget);
    if estimated > ceiling {
        return Err(Error::ResourceRefusal { estimated, ceiling });
    }
    Ok(())
}

/// `C^t(x | condition)` for every `x ∈ {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityTable {
    pub n: usize,
    pub condition: Bitstring,
    pub budget: u64,
    pub length_cap: u8,
    pub machine_version: String,
    values: Vec<u8>,
}

/// A program reproducing `target` from `condition`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub target: Bitstring,
    pub program: Program,
    pub condition: Bitstring,
    pub budget: u64,
}

impl Witness {
    pub fn len(&self) -> usize {
        self.program.len()
    }

    pub fn is_empty(&self) -> bool {
        self.program.is_empty()
    }

    /// Re-executes the program and checks it prints the target.
    pub fn verify(&self) -> bool {
        run(&self.program, &self.condition, self.budget).kind
            == RunKind::Halted(self.target.clone())
    }
}

impl ComplexityTable {
    pub(crate) fn from_parts(
        n: usize,
        condition: Bitstring,
        budget: u64,
        length_cap: u8,
        machine_version: String,
        values: Vec<u8>,
    ) -> Self {
        debug_assert_eq!(values.len(), 1usize << n);
        Self {
            n,
            condition,
            budget,
            length_cap,
            machine_version,
            values,
        }
    }

    pub fn key(&self) -> TableKey {
        TableKey {
            n: self.n,
            condition: self.condition.clone(),
            budget: self.budget,
            length_cap: self.length_cap as usize,
        }
    }

    /// Raw values in lexicographic order of `x`, `SENTINEL` where undefined.
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// Value by lexicographic rank of `x`.
    pub fn at(&self, index: usize) -> Option<u32> {
        match self.values[index] {
            SENTINEL => None,
            v => Some(v as u32),
        }
    }

    pub fn get(&self, x: &Bitstring) -> Option<u32> {
        assert_eq!(x.len(), self.n, "string length does not match table");
        self.at(x.value() as usize)
    }

    /// `|{x : C^t(x|w) < k}|`.
    pub fn count_below(&self, k: u32) -> usize {
        self.values
            .iter()
            .filter(|&&v| v != SENTINEL && (v as u32) < k)
            .count()
    }

    pub fn is_total(&self) -> bool {
        !self.values.contains(&SENTINEL)
    }

    pub fn max_value(&self) -> Option<u32> {
        self.values
            .iter()
            .filter(|&&v| v != SENTINEL)
            .map(|&v| v as u32)
            .max()
    }

    /// First program of length `C^t(x|w)` in enumeration order that prints `x`.
    pub fn witness(&self, x: &Bitstring) -> Option<Witness> {
        let len = self.get(x)? as usize;
        let first = (1u64 << len) - 1;
        (first..first + (1u64 << len))
            .map(Program::from_index)
            .find(|p| run(p, &self.condition, self.budget).kind == RunKind::Halted(x.clone()))
            .map(|program| Witness {
                target: x.clone(),
                program,
                condition: self.condition.clone(),
                budget: self.budget,
            })
    }
}

/// Builds the table for `(n, w, t, length_cap)` by running every program of
/// length at most `length_cap`.
pub fn build_table(
    n: usize,
    w: &Bitstring,
    t: u64,
    length_cap: usize,
    work_ceiling: f64,
) -> Result<ComplexityTable> {
    if n == 0 || n > MAX_TABLE_N {
        return Err(Error::Precondition(format!(
            "table length n = {n} outside 1..={MAX_TABLE_N}"
        )));
    }
    if length_cap >= SENTINEL as usize {
        return Err(Error::Precondition(format!(
            "length_cap {length_cap} does not fit the table encoding"
        )));
    }
    check_work(length_cap, t, work_ceiling)?;

    let size = 1usize << n;
    let total = program_count(length_cap);
    let chunk = 1u64 << 12;
    let chunks = total.div_ceil(chunk);
    let cond = w.bits();

    let best = (0..chunks)
        .into_par_iter()
        .fold(
            || vec![u64::MAX; size],
            |mut best, c| {
                let lo = c * chunk;
                let hi = (lo + chunk).min(total);
                for idx in lo..hi {
                    let p = Program::from_index(idx);
                    if let Some(out) = machine::run_for_length(p.code().bits(), cond, t, n) {
                        let x = out.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                        if idx < best[x] {
                            best[x] = idx;
                        }
                    }
                }
                best
            },
        )
        .reduce(
            || vec![u64::MAX; size],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = (*x).min(y);
                }
                a
            },
        );

    let values = best
        .into_iter()
        .map(|idx| match idx {
            u64::MAX => SENTINEL,
            idx => Program::from_index(idx).len() as u8,
        })
        .collect();
    Ok(ComplexityTable::from_parts(
        n,
        w.clone(),
        t,
        length_cap as u8,
        machine::version_id().to_string(),
        values,
    ))
}

/// `C^t(x | w)` with its first witness, searching programs up to `|x| + 4` bits.
pub fn complexity(x: &Bitstring, w: &Bitstring, t: u64) -> Option<Witness> {
    complexity_capped(x, w, t, default_length_cap(x.len()))
}

/// As [`complexity`], with an explicit length cap.
pub fn complexity_capped(
    x: &Bitstring,
    w: &Bitstring,
    t: u64,
    length_cap: usize,
) -> Option<Witness> {
    (0..program_count(length_cap))
        .find(|&idx| {
            let p = Program::from_index(idx);
            machine::run_for_length(p.code().bits(), w.bits(), t, x.len())
                .is_some_and(|out| out == x.bits())
        })
        .map(|idx| Witness {
            target: x.clone(),
            program: Program::from_index(idx),
            condition: w.clone(),
            budget: t,
        })
}

/// `x*`: the first shortest unconditional description of `x`.
pub fn shortest_description(x: &Bitstring, t: u64) -> Result<Witness> {
    complexity(x, &Bitstring::empty(), t).ok_or_else(|| {
        Error::Precondition(format!("{x:?} has no description within the length cap"))
    })
}

/// `C^t(y) - C^t(y | x)`, the information in `x` about `y`. `None` when either
/// value is undefined under the length cap.
pub fn info(src: &dyn TableSource, x: &Bitstring, y: &Bitstring, t: u64) -> Result<Option<i64>> {
    if x.len() != y.len() {
        return Err(Error::Precondition("info requires |x| = |y|".into()));
    }
    let n = y.len();
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let cond = src.table(n, x, t)?;
    Ok(diff(plain.get(y), cond.get(y)))
}

pub(crate) fn diff(a: Option<u32>, b: Option<u32>) -> Option<i64> {
    Some(a? as i64 - b? as i64)
}

/// `⌈log₂ n⌉` as used in every threshold of the lab.
pub fn log_n(n: usize) -> i64 {
    ceil_log2(n as u64) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::machine::{C_CONDCOPY, C_LITERAL};

    fn table(n: usize, w: &str, t: u64) -> ComplexityTable {
        build_table(n, &bs(w), t, default_length_cap(n), DEFAULT_WORK_CEILING).unwrap()
    }

    /// Independent oracle: run every program with the public `run` and keep
    /// the shortest output of each length-n string.
    fn brute_force(n: usize, w: &Bitstring, t: u64, cap: usize) -> Vec<u8> {
        let mut values = vec![SENTINEL; 1 << n];
        for p in machine::enumerate_programs(cap) {
            if let RunKind::Halted(o) = run(&p, w, t).kind {
                if o.len() == n {
                    let v = &mut values[o.value() as usize];
                    *v = (*v).min(p.len() as u8);
                }
            }
        }
        values
    }

    #[test]
    fn matches_brute_force() {
        for (n, w) in [(3, ""), (4, ""), (4, "1010"), (4, "100"), (5, "11")] {
            let w = bs(w);
            let t = build_table(n, &w, 4096, n + 4, DEFAULT_WORK_CEILING).unwrap();
            assert_eq!(
                t.values(),
                brute_force(n, &w, 4096, n + 4).as_slice(),
                "n={n} w={w:?}"
            );
        }
    }

    #[test]
    fn single_bits_have_literal_programs() {
        let t = table(1, "", 4);
        assert!(t.get(&bs("0")).unwrap() <= 2);
        assert!(t.get(&bs("1")).unwrap() <= 2);
    }

    #[test]
    fn zeros_compress_via_repeat() {
        let t = table(8, "", 4096);
        // "00" γ(3) "100": four copies of "00"
        assert_eq!(t.get(&bs("00000000")), Some(8));
        assert!(t.values().iter().all(|&v| v as u32 <= 8 + C_LITERAL));
    }

    #[test]
    fn alternating_ten_bits() {
        let w = complexity(&bs("1010101010"), &bs(""), 4096).unwrap();
        // "00" γ(4) "110": five copies of "10"
        assert_eq!(w.len(), 10);
        assert!(w.verify());
    }

    #[test]
    fn empty_string_has_empty_description() {
        let w = complexity(&bs(""), &bs(""), 10).unwrap();
        assert_eq!(w.len(), 0);
        assert!(w.program.is_empty());
    }

    #[test]
    fn condition_copy_constant() {
        for x in Bitstring::all(6).step_by(7) {
            let w = complexity(&x, &x, 6 + 1).unwrap();
            assert!(w.len() as u32 <= C_CONDCOPY);
        }
    }

    #[test]
    fn witness_matches_table() {
        let t = table(6, "110", 4096);
        for x in Bitstring::all(6) {
            let w = t.witness(&x).unwrap();
            assert!(w.verify());
            assert_eq!(Some(w.len() as u32), t.get(&x));
            let direct = complexity_capped(&x, &bs("110"), 4096, 10).unwrap();
            assert_eq!(direct, w);
        }
    }

    #[test]
    fn incompressible_description_is_literal() {
        let x = bs("10110010");
        let w = shortest_description(&x, 4096).unwrap();
        // exhaustive check that nothing shorter than the literal prints x
        assert_eq!(w.program, Program::literal(&x));
        for p in machine::enumerate_programs(8) {
            assert_ne!(run(&p, &Bitstring::empty(), 4096).output(), Some(&x));
        }
    }

    #[test]
    fn refuses_oversized_work() {
        let err = build_table(8, &bs(""), 4096, 12, 1e6).unwrap_err();
        assert!(err.is_resource_refusal());
    }

    #[test]
    fn small_budget_leaves_sentinels() {
        let t = build_table(4, &bs(""), 2, 8, DEFAULT_WORK_CEILING).unwrap();
        assert!(!t.is_total());
        assert_eq!(t.count_below(100), 0);
    }
}
