//! One test per acceptance criterion. Each prints a `PASS`/`FAIL` line
//! straight to stdout so the verdict is visible without `--nocapture`.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use aitlab::bits::Bitstring;
use aitlab::complexity::{log_n, soi_report, Lab, PairSample, TableSource};
use aitlab::covering::{greedy_covering, pigeonhole_cover_bound, verify_covering};
use aitlab::depsets::{
    a_size_bound, dep_set_a, dep_set_b, thm1_default_slack, thm1_witnesses, DepParams,
};
use aitlab::extractor::{
    lower_bound_certificate, make_random_extractor, CountParams, ExtractorTable,
};
use aitlab::independence::{
    build_dep_graph, caro_wei_independent_set, random_graph, DEFAULT_MAX_GRAPH_N,
};
use aitlab::machine::C_LITERAL;
use aitlab::selftest::{check_codec, check_transpose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const T: u64 = 4096;

fn lab() -> &'static Lab {
    static LAB: OnceLock<Lab> = OnceLock::new();
    LAB.get_or_init(Lab::default)
}

fn verdict(id: u32, name: &str, ok: bool, detail: &str, started: Instant) {
    let line = format!(
        "criterion {id:>2} {:<4} {name} ({:.1}s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

/// `ε`, `bin(n)` and five seeded centers.
fn conditions(n: usize) -> Vec<Bitstring> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut conds = vec![Bitstring::empty(), Bitstring::bin(n as u64)];
    conds.extend((0..5).map(|_| Bitstring::from_value(rng.gen_range(0..1u64 << n), n)));
    conds
}

#[test]
fn criterion_01_counting_invariant() {
    let start = Instant::now();
    let mut failures = 0;
    let mut checked = 0;
    for w in conditions(8) {
        let table = lab().table(8, &w, T).unwrap();
        for k in 0..=table.length_cap as u32 {
            checked += 1;
            if table.count_below(k) as u64 >= 1u64 << k {
                failures += 1;
            }
        }
    }
    verdict(
        1,
        "counting |{x : C(x|w) < k}| < 2^k",
        failures == 0,
        &format!("{checked} (w, k) cells, {failures} violations"),
        start,
    );
}

#[test]
fn criterion_02_literal_and_monotonicity() {
    let start = Instant::now();
    let mut literal = 0;
    let mut monotone = 0;
    for w in conditions(8) {
        let lo = lab().table(8, &w, T).unwrap();
        let hi = lab().table(8, &w, 2 * T).unwrap();
        for i in 0..256 {
            if !lo.at(i).is_some_and(|c| c <= 8 + C_LITERAL) {
                literal += 1;
            }
            if hi.values()[i] > lo.values()[i] {
                monotone += 1;
            }
        }
    }
    verdict(
        2,
        "C ≤ |x| + c_literal and C^2t ≤ C^t",
        literal + monotone == 0,
        &format!("{literal} literal violations, {monotone} monotonicity violations"),
        start,
    );
}

#[test]
fn criterion_03_a_size_hard_bound() {
    let start = Instant::now();
    lab().prefetch_all_conditions(8, T).unwrap();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for x in Bitstring::all(8) {
        for alpha in 1..=6 {
            let a = dep_set_a(lab(), &x, DepParams::new(8, alpha, T)).unwrap();
            let bound = a_size_bound(8, alpha);
            worst = worst.max(a.size() as f64 / bound);
            if a.size() as f64 > bound {
                failures += 1;
            }
        }
    }
    verdict(
        3,
        "|A_{x,α}| ≤ 2^(n−α+c_literal+1) at n=8",
        failures == 0,
        &format!("max |A|/bound = {worst:.4}, {failures} violations"),
        start,
    );
}

/// The witness-family run at n=10, α=2 under the default hypothesis, plus a
/// supplementary small-slack family.
fn thm1_report(src: &dyn TableSource) -> (bool, Value) {
    let n = 10;
    let alpha = 2;
    let plain = src.table(n, &Bitstring::empty(), T).unwrap();
    let max_c = plain.max_value().unwrap();
    let x = Bitstring::all(n)
        .find(|x| plain.get(x) == Some(max_c))
        .unwrap();
    let slack = thm1_default_slack(n);
    let (ok, outcome) = match thm1_witnesses(src, &x, alpha, T, None) {
        Ok(fam) => {
            let ok = fam.size() as f64 >= fam.counting_bound
                && fam.members.iter().all(|m| m.y.starts_with(&fam.prefix));
            (ok, serde_json::to_value(&fam).unwrap())
        }
        Err(e) => (false, json!({ "error": e.to_string() })),
    };
    let supplement = thm1_witnesses(src, &x, alpha, T, Some(2)).unwrap();
    let report = json!({
        "n": n,
        "alpha": alpha,
        "center": x,
        "c_x": max_c,
        "required": alpha + slack,
        "outcome": outcome,
        "supplement_slack_2": {
            "beta": supplement.beta,
            "size": supplement.size(),
            "counting_bound": supplement.counting_bound,
            "info_median": supplement.info_median,
            "reaching_alpha": supplement.reaching_alpha,
        },
    });
    (ok, report)
}

#[test]
fn criterion_04_witness_family() {
    let start = Instant::now();
    let (ok, report) = thm1_report(lab());
    let detail = format!(
        "center {} has C^t = {} vs required α + 7⌈log₂ n⌉ = {}; outcome {}; slack-2 family size {} (bound {}), info median {}",
        report["center"], report["c_x"], report["required"], report["outcome"],
        report["supplement_slack_2"]["size"], report["supplement_slack_2"]["counting_bound"],
        report["supplement_slack_2"]["info_median"],
    );
    verdict(4, "witness family at n=10, α=2", ok, &detail, start);
}

fn caro_wei_report(src: &dyn TableSource) -> (bool, Value) {
    let probs = [0.01, 0.1, 0.5];
    let mut rows = Vec::new();
    let mut ok = true;
    for i in 0..100u64 {
        let p = probs[i as usize % 3];
        let g = random_graph(256, p, i);
        let r = caro_wei_independent_set(&g);
        let good = g.is_independent(&r.set) && r.set.len() as u64 >= r.bound_ceil;
        ok &= good;
        rows.push(json!({ "graph": format!("G(256,{p})#{i}"), "size": r.set.len(), "bound": r.bound, "ok": good }));
    }
    for beta in [1, 2] {
        let g = build_dep_graph(src, 4, beta, T, None, DEFAULT_MAX_GRAPH_N).unwrap();
        let r = caro_wei_independent_set(&g.graph);
        let good = g.graph.is_independent(&r.set) && r.set.len() as u64 >= r.bound_ceil;
        ok &= good;
        rows.push(json!({ "graph": format!("DepGraph(4,{beta})"), "size": r.set.len(), "bound": r.bound, "ok": good }));
    }
    (ok, Value::Array(rows))
}

#[test]
fn criterion_05_caro_wei() {
    let start = Instant::now();
    let (ok, rows) = caro_wei_report(lab());
    let failed = rows
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["ok"] == false)
        .count();
    verdict(
        5,
        "Caro-Wei set independent and ≥ ⌈Σ 1/(d+1)⌉",
        ok,
        &format!("102 graphs, {failed} failures"),
        start,
    );
}

fn extractor_report(src: &dyn TableSource) -> (bool, Value) {
    let n = 8;
    let alpha = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let centers: Vec<Bitstring> = (0..4)
        .map(|_| Bitstring::from_value(rng.gen_range(0..256), n))
        .collect();
    let floors = [0, 4, alpha + 8 * log_n(n)];
    let mut ok = true;
    let mut rows = Vec::new();
    for m in [2, 3] {
        let mut tables = vec![ExtractorTable::constant(n, m, 0).unwrap()];
        tables.extend((0..20).map(|seed| make_random_extractor(n, m, seed).unwrap()));
        for e in &tables {
            for x in &centers {
                let b = dep_set_b(src, x, DepParams::new(n, alpha, T)).unwrap();
                for &s in &floors {
                    let p = CountParams { s, alpha, t: T };
                    let cert = lower_bound_certificate(src, e, x, p).unwrap();
                    let good = cert.popular_count as f64 >= cert.pigeonhole
                        && cert.bound <= b.size() as i64;
                    ok &= good;
                    rows.push(json!({
                        "m": m, "origin": e.meta.origin, "x": x, "s": s,
                        "popular": cert.popular_count, "bound": cert.bound,
                        "valid": cert.valid, "b_size": b.size(), "ok": good,
                    }));
                }
            }
        }
    }
    (ok, Value::Array(rows))
}

#[test]
fn criterion_06_pigeonhole_and_certificate() {
    let start = Instant::now();
    let (ok, rows) = extractor_report(lab());
    let rows = rows.as_array().unwrap();
    let valid = rows.iter().filter(|r| r["valid"] == true).count();
    verdict(
        6,
        "popular count ≥ 2^(n−m), certificate ≤ |B|",
        ok,
        &format!(
            "{} certificates, {valid} with empty neither-set",
            rows.len()
        ),
        start,
    );
}

fn cover_report(src: &dyn TableSource) -> (bool, Value) {
    let mut ok = true;
    let mut rows = Vec::new();
    for alpha in [2, 3, 4] {
        let c = greedy_covering(src, 8, alpha, T, 8).unwrap();
        let v = verify_covering(src, &c).unwrap();
        let good = v.covers && v.size as f64 >= pigeonhole_cover_bound(8, alpha);
        ok &= good;
        rows.push(json!({ "alpha": alpha, "centers": c.centers, "verdict": v, "ok": good }));
    }
    (ok, Value::Array(rows))
}

#[test]
fn criterion_07_covering() {
    let start = Instant::now();
    lab().prefetch_all_conditions(8, T).unwrap();
    let (ok, rows) = cover_report(lab());
    let sizes: Vec<String> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "α={}: {} centers (≥ {:.2})",
                r["alpha"], r["verdict"]["size"], r["verdict"]["pigeonhole_bound"]
            )
        })
        .collect();
    verdict(
        7,
        "greedy cover verifies and meets pigeonhole bound",
        ok,
        &sizes.join(", "),
        start,
    );
}

#[test]
fn criterion_08_transpose_identity() {
    let start = Instant::now();
    let check = check_transpose(lab(), 4, T, &[0, 1, 2, 3, 4, 5]).unwrap();
    verdict(
        8,
        "x ∈ D_α(u) ⇔ u ∈ A_{x,α} at n=4",
        check.passed,
        &check.detail,
        start,
    );
}

#[test]
fn criterion_09_codec() {
    let start = Instant::now();
    let check = check_codec(6, 12);
    verdict(
        9,
        "codec roundtrip and length formulas",
        check.passed,
        &check.detail,
        start,
    );
}

#[test]
fn criterion_10_soi_measurement() {
    let start = Instant::now();
    let r = soi_report(lab(), 4, T, PairSample::All).unwrap();
    let ok = r.pairs_evaluated == 256
        && r.execution_errors == 0
        && r.slack_a.is_some()
        && r.slack_c.is_some();
    let a = r.slack_a.as_ref().map(|d| d.violations);
    let c = r.slack_c.as_ref().map(|d| d.violations);
    verdict(
        10,
        "SoI slack distribution at n=4",
        ok,
        &format!(
            "{} pairs, {} errors, violations (a) {a:?} (c) {c:?}",
            r.pairs_evaluated, r.execution_errors
        ),
        start,
    );
}

#[test]
fn criterion_11_reproducibility() {
    let start = Instant::now();
    let run = || {
        let fresh = Lab::default();
        let reports = [
            thm1_report(&fresh).1,
            caro_wei_report(&fresh).1,
            extractor_report(&fresh).1,
            cover_report(&fresh).1,
        ];
        reports.map(|r| serde_json::to_vec(&r).unwrap())
    };
    let first = run();
    let second = run();
    let same = first.iter().zip(&second).filter(|(a, b)| a == b).count();
    verdict(
        11,
        "byte-identical reports for criteria 4–7",
        same == 4,
        &format!("{same}/4 reports identical"),
        start,
    );
}
