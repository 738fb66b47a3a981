//! The hard invariants of the lab, runnable as one suite at a chosen `n`.

use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::codec::{decode_pair, decode_self_delim, encode_pair, encode_self_delim};
use crate::complexity::TableSource;
use crate::covering::{greedy_covering, verify_covering};
use crate::depsets::{
    a_size_bound, dep_degree, dep_set_a, dep_set_b, thm1_witnesses, Degree, DegreeMode, DepParams,
};
use crate::error::Result;
use crate::extractor::{lower_bound_certificate, make_random_extractor, CountParams};
use crate::independence::{build_dep_graph, caro_wei_independent_set, random_graph};
use crate::machine::{C_CONDCOPY, C_LITERAL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, failures: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: failures.is_empty(),
            detail: if failures.is_empty() {
                "ok".into()
            } else {
                let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
                format!("{} failure(s): {}", failures.len(), shown.join("; "))
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub n: usize,
    pub t: u64,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Conditions used for table-level checks: `ε`, `bin(n)`, and a spread of
/// centers.
pub fn sample_conditions(n: usize) -> Vec<Bitstring> {
    let size = 1u64 << n;
    let mut conds = vec![Bitstring::empty(), Bitstring::bin(n as u64)];
    conds.extend((0..5).map(|i| Bitstring::from_value((i * 37 + 11) % size, n)));
    conds
}

pub fn check_counting(
    src: &dyn TableSource,
    n: usize,
    t: u64,
    conds: &[Bitstring],
) -> Result<Check> {
    let mut bad = Vec::new();
    for w in conds {
        let table = src.table(n, w, t)?;
        for k in 0..=table.length_cap as u32 {
            let below = table.count_below(k);
            if below as u64 >= 1u64 << k {
                bad.push(format!("w={w:?} k={k}: {below}"));
            }
        }
    }
    Ok(Check::new("counting |{x : C(x|w) < k}| < 2^k", bad))
}

pub fn check_literal_and_monotone(
    src: &dyn TableSource,
    n: usize,
    t: u64,
    conds: &[Bitstring],
) -> Result<Check> {
    let mut bad = Vec::new();
    for w in conds {
        let lo = src.table(n, w, t)?;
        let hi = src.table(n, w, 2 * t)?;
        for (i, (a, b)) in lo.values().iter().zip(hi.values()).enumerate() {
            let x = Bitstring::from_value(i as u64, n);
            match lo.at(i) {
                Some(c) if c <= n as u32 + C_LITERAL => {}
                other => bad.push(format!("C({x}|{w:?}) = {other:?} above literal bound")),
            }
            if b > a {
                bad.push(format!("C^2t({x}|{w:?}) = {b} > C^t = {a}"));
            }
        }
    }
    Ok(Check::new("literal bound and budget monotonicity", bad))
}

pub fn check_condcopy(src: &dyn TableSource, n: usize, t: u64) -> Result<Check> {
    let mut bad = Vec::new();
    for x in Bitstring::all(n).step_by(((1usize << n) / 16).max(1)) {
        let c = src.table(n, &x, t)?.get(&x);
        if !c.is_some_and(|c| c <= C_CONDCOPY) {
            bad.push(format!("C({x}|{x}) = {c:?}"));
        }
    }
    Ok(Check::new("C(x|x) ≤ c_condcopy", bad))
}

pub fn check_witnesses(
    src: &dyn TableSource,
    n: usize,
    t: u64,
    conds: &[Bitstring],
) -> Result<Check> {
    let mut bad = Vec::new();
    for w in conds.iter().take(3) {
        let table = src.table(n, w, t)?;
        for x in Bitstring::all(n).step_by(((1usize << n) / 8).max(1)) {
            match table.witness(&x) {
                Some(wit) if wit.verify() && Some(wit.len() as u32) == table.get(&x) => {}
                _ => bad.push(format!("witness for {x} | {w:?}")),
            }
        }
    }
    Ok(Check::new("table witnesses re-execute", bad))
}

pub fn check_codec(max_pair: usize, max_single: usize) -> Check {
    let mut bad = Vec::new();
    for len in 0..=max_single {
        for u in Bitstring::all(len) {
            let e = encode_self_delim(&u);
            if e.len() != 2 * len + 2 || decode_self_delim(&e).ok().as_ref() != Some(&u) {
                bad.push(format!("self-delimited {u:?}"));
            }
        }
    }
    for l1 in 0..=max_pair {
        for l2 in 1..=max_pair {
            for a in Bitstring::all(l1) {
                for b in Bitstring::all(l2) {
                    let want = 2 * Bitstring::bin(l2 as u64).len() + 2 + l1 + l2;
                    match encode_pair(&a, &b) {
                        Ok(e)
                            if e.len() == want
                                && decode_pair(&e).ok() == Some((a.clone(), b.clone())) => {}
                        _ => bad.push(format!("pair ({a:?}, {b:?})")),
                    }
                }
            }
        }
    }
    Check::new("codec roundtrip and lengths", bad)
}

pub fn check_a_size_bound(
    src: &dyn TableSource,
    n: usize,
    t: u64,
    alphas: &[i64],
) -> Result<Check> {
    let mut bad = Vec::new();
    for x in Bitstring::all(n) {
        for &alpha in alphas {
            let a = dep_set_a(src, &x, DepParams::new(n, alpha, t))?;
            if a.size() as f64 > a_size_bound(n, alpha) {
                bad.push(format!("|A({x},{alpha})| = {}", a.size()));
            }
        }
    }
    Ok(Check::new("|A_{x,α}| ≤ 2^(n−α+c_literal+1)", bad))
}

pub fn check_transpose(src: &dyn TableSource, n: usize, t: u64, alphas: &[i64]) -> Result<Check> {
    let mut bad = Vec::new();
    for &alpha in alphas {
        let p = DepParams::new(n, alpha, t);
        let sets = Bitstring::all(n)
            .map(|x| dep_set_a(src, &x, p))
            .collect::<Result<Vec<_>>>()?;
        for u in Bitstring::all(n) {
            let Degree::Exact { members, .. } = dep_degree(src, &u, p, DegreeMode::Full)?.degree
            else {
                unreachable!("full mode is exact")
            };
            for (xi, set) in sets.iter().enumerate() {
                let x = Bitstring::from_value(xi as u64, n);
                if members.binary_search(&x).is_ok() != set.contains(&u) {
                    bad.push(format!("u={u} x={x} α={alpha}"));
                }
            }
        }
    }
    Ok(Check::new("x ∈ D_α(u) ⇔ u ∈ A_{x,α}", bad))
}

pub fn check_caro_wei(src: &dyn TableSource, n: usize, t: u64) -> Result<Check> {
    let mut bad = Vec::new();
    let mut graphs = Vec::new();
    for (i, p) in [0.01, 0.1, 0.5].into_iter().enumerate() {
        graphs.push((format!("G(256,{p})"), random_graph(256, p, i as u64)));
    }
    for beta in [1, 2] {
        let g = build_dep_graph(src, n, beta, t, None, n)?;
        if !g.graph.is_symmetric_irreflexive() {
            bad.push(format!("dep graph β={beta} not symmetric/irreflexive"));
        }
        graphs.push((format!("DepGraph(n={n},β={beta})"), g.graph));
    }
    for (name, g) in graphs {
        let r = caro_wei_independent_set(&g);
        if !g.is_independent(&r.set) || (r.set.len() as u64) < r.bound_ceil {
            bad.push(format!("{name}: |set|={} bound={}", r.set.len(), r.bound));
        }
    }
    Ok(Check::new("Caro-Wei independent set ≥ ⌈Σ 1/(d+1)⌉", bad))
}

pub fn check_covering(src: &dyn TableSource, n: usize, t: u64) -> Result<Check> {
    let mut bad = Vec::new();
    for alpha in 1..=3 {
        let c = greedy_covering(src, n, alpha, t, n)?;
        let v = verify_covering(src, &c)?;
        if !v.covers || !v.meets_pigeonhole {
            bad.push(format!("α={alpha}: covers={} size={}", v.covers, v.size));
        }
    }
    Ok(Check::new(
        "greedy cover verifies and meets pigeonhole bound",
        bad,
    ))
}

pub fn check_extractor(src: &dyn TableSource, n: usize, t: u64) -> Result<Check> {
    let mut bad = Vec::new();
    let p = CountParams {
        s: (n as i64) / 2,
        alpha: 1,
        t,
    };
    let plain_len = src.table(n, &Bitstring::bin(n as u64), t)?;
    if plain_len.count_below(p.s as u32) as u64 >= 1u64 << p.s {
        bad.push("low set not below 2^s".into());
    }
    for seed in 0..4 {
        let m = 2.min(n);
        let e = make_random_extractor(n, m, seed)?;
        for x in Bitstring::all(n).step_by(((1usize << n) / 4).max(1)) {
            let cert = lower_bound_certificate(src, &e, &x, p)?;
            let b = dep_set_b(src, &x, DepParams::new(n, p.alpha, t))?;
            if (cert.popular_count as f64) < cert.pigeonhole || cert.bound > b.size() as i64 {
                bad.push(format!(
                    "seed {seed} x {x}: N={} bound={} |B|={}",
                    cert.popular_count,
                    cert.bound,
                    b.size()
                ));
            }
        }
    }
    Ok(Check::new(
        "extractor pigeonhole and certificate soundness",
        bad,
    ))
}

pub fn check_witness_family(src: &dyn TableSource, n: usize, t: u64) -> Result<Check> {
    let mut bad = Vec::new();
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let slack = 1;
    for x in Bitstring::all(n).step_by(((1usize << n) / 8).max(1)) {
        let Some(c) = plain.get(&x) else { continue };
        let alpha = 1;
        if (c as i64) < alpha + slack || alpha + slack > n as i64 {
            continue;
        }
        let fam = thm1_witnesses(src, &x, alpha, t, Some(slack))?;
        if (fam.size() as f64) < fam.counting_bound
            || fam.members.iter().any(|m| !m.y.starts_with(&fam.prefix))
        {
            bad.push(format!("family for {x}: size {}", fam.size()));
        }
    }
    Ok(Check::new("witness family counting bound", bad))
}

/// Runs every check. Expects `n ≤ 8` for interactive speed.
pub fn run_selftest(src: &dyn TableSource, n: usize, t: u64) -> Result<SelftestReport> {
    let conds = sample_conditions(n);
    let alphas: Vec<i64> = (1..=n as i64).collect();
    let small = n.min(4);
    let checks = vec![
        check_counting(src, n, t, &conds)?,
        check_literal_and_monotone(src, n, t, &conds)?,
        check_condcopy(src, n, t)?,
        check_witnesses(src, n, t, &conds)?,
        check_codec(4, 8),
        check_a_size_bound(src, n, t, &alphas)?,
        check_transpose(src, small, t, &(0..=5).collect::<Vec<_>>())?,
        check_caro_wei(src, small, t)?,
        check_covering(src, n, t)?,
        check_extractor(src, n, t)?,
        check_witness_family(src, n, t)?,
    ];
    Ok(SelftestReport { n, t, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::Lab;

    #[test]
    fn selftest_passes_at_n5() {
        let lab = Lab::default();
        let r = run_selftest(&lab, 5, 4096).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
