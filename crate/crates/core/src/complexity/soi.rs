//! Measured slack of two symmetry-of-information inequalities under `C^t`:
//!
//! * (a) `C(xy) ≤ C(y) + C(x|y) + 2 log⁺ C(y)`
//! * (c) `C(y) − C(y|x) ≥ C(x) − C(x|y) − 5 log n` for `|x| = |y| = n`
//!
//! Neither is guaranteed for a time-bounded, fixed small machine, so the
//! report counts violations instead of asserting.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{log_n, ComplexityTable, TableSource};
use crate::bits::{ceil_log2, Bitstring};
use crate::error::{Error, Result};
use crate::machine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSample {
    /// Every ordered pair in `{0,1}^n × {0,1}^n`.
    All,
    /// `count` distinct ordered pairs drawn with a seeded generator.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSlack {
    pub x: Bitstring,
    pub y: Bitstring,
    pub c_x: u32,
    pub c_y: u32,
    pub c_x_given_y: u32,
    pub c_y_given_x: u32,
    pub c_xy: u32,
    pub slack_a: i64,
    pub slack_c: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackDistribution {
    pub min: i64,
    pub median: f64,
    pub max: i64,
    pub violations: usize,
}

impl SlackDistribution {
    pub fn of(values: &[i64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_unstable();
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 {
            v[mid] as f64
        } else {
            (v[mid - 1] + v[mid]) as f64 / 2.0
        };
        Some(Self {
            min: v[0],
            median,
            max: v[v.len() - 1],
            violations: v.iter().filter(|&&s| s < 0).count(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub n: usize,
    pub budget: u64,
    pub machine_version: String,
    pub sample: PairSample,
    pub pairs_evaluated: usize,
    /// Pairs skipped because some value was undefined under the length cap.
    pub execution_errors: usize,
    pub slack_a: Option<SlackDistribution>,
    pub slack_c: Option<SlackDistribution>,
    pub pairs: Vec<PairSlack>,
}

fn sampled_pairs(n: usize, sample_kind: PairSample) -> Result<Vec<(u64, u64)>> {
    let size = 1u64 << n;
    let total = size * size;
    match sample_kind {
        PairSample::All => Ok((0..total).map(|i| (i / size, i % size)).collect()),
        PairSample::Random { count, seed } => {
            if count as u64 > total {
                return Err(Error::Precondition(format!(
                    "asked for {count} distinct pairs out of {total}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = sample(&mut rng, total as usize, count).into_vec();
            idx.sort_unstable();
            Ok(idx
                .into_iter()
                .map(|i| (i as u64 / size, i as u64 % size))
                .collect())
        }
    }
}

pub fn soi_report(
    src: &dyn TableSource,
    n: usize,
    t: u64,
    sample_kind: PairSample,
) -> Result<SlackReport> {
    if n == 0 {
        return Err(Error::Precondition("soi_report needs n ≥ 1".into()));
    }
    let pairs = sampled_pairs(n, sample_kind)?;
    let empty = Bitstring::empty();
    let plain = src.table(n, &empty, t)?;
    let joint = src.table(2 * n, &empty, t)?;

    let conds: BTreeSet<u64> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    let conds: Vec<u64> = conds.into_iter().collect();
    let fetched: Vec<(u64, Arc<ComplexityTable>)> = conds
        .par_iter()
        .map(|&c| Ok((c, src.table(n, &Bitstring::from_value(c, n), t)?)))
        .collect::<Result<_>>()?;
    let cond_tables: HashMap<u64, Arc<ComplexityTable>> = fetched.into_iter().collect();

    let log_term = 5 * log_n(n);
    let mut rows = Vec::with_capacity(pairs.len());
    let mut errors = 0;
    for (xv, yv) in pairs {
        let values = (|| {
            let c_x = plain.at(xv as usize)?;
            let c_y = plain.at(yv as usize)?;
            let c_x_given_y = cond_tables[&yv].at(xv as usize)?;
            let c_y_given_x = cond_tables[&xv].at(yv as usize)?;
            let c_xy = joint.at(((xv << n) | yv) as usize)?;
            Some((c_x, c_y, c_x_given_y, c_y_given_x, c_xy))
        })();
        let Some((c_x, c_y, c_x_given_y, c_y_given_x, c_xy)) = values else {
            errors += 1;
            continue;
        };
        let slack_a =
            c_y as i64 + c_x_given_y as i64 + 2 * ceil_log2(c_y as u64) as i64 - c_xy as i64;
        let slack_c =
            (c_y as i64 - c_y_given_x as i64) - (c_x as i64 - c_x_given_y as i64 - log_term);
        rows.push(PairSlack {
            x: Bitstring::from_value(xv, n),
            y: Bitstring::from_value(yv, n),
            c_x,
            c_y,
            c_x_given_y,
            c_y_given_x,
            c_xy,
            slack_a,
            slack_c,
        });
    }

    let a: Vec<i64> = rows.iter().map(|r| r.slack_a).collect();
    let c: Vec<i64> = rows.iter().map(|r| r.slack_c).collect();
    Ok(SlackReport {
        n,
        budget: t,
        machine_version: machine::version_id().to_string(),
        sample: sample_kind,
        pairs_evaluated: rows.len(),
        execution_errors: errors,
        slack_a: SlackDistribution::of(&a),
        slack_c: SlackDistribution::of(&c),
        pairs: rows,
    })
}
