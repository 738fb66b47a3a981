//! Dependency sets `A_{x,α}`, `B_{x,α}`, `A_{x,α,s}`, transpose degrees
//! `D_α(u)`, and the prefix-of-`x*` witness families.
//!
//! Membership uses the plain inequality (no coincidence clause):
//! `y ∈ A_{x,α} ⇔ C^t(y) − C^t(y|x) ≥ α`. Strings whose values are undefined
//! under the length cap are never members.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::complexity::{diff, log_n, shortest_description, TableSource};
use crate::error::{Error, Result};
use crate::machine::C_LITERAL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepParams {
    pub n: usize,
    pub alpha: i64,
    /// Complexity floor for the restricted set.
    pub s: Option<i64>,
    pub t: u64,
}

impl DepParams {
    pub fn new(n: usize, alpha: i64, t: u64) -> Self {
        Self {
            n,
            alpha,
            s: None,
            t,
        }
    }

    pub fn with_floor(mut self, s: i64) -> Self {
        self.s = Some(s);
        self
    }

    fn validate(&self, center: &Bitstring) -> Result<()> {
        if center.len() != self.n {
            return Err(Error::Precondition(format!(
                "center {center:?} is not {} bits",
                self.n
            )));
        }
        if self.alpha < 0 {
            return Err(Error::Precondition("alpha must be non-negative".into()));
        }
        Ok(())
    }
}

/// `2^(n−α+c_literal+1)`: the counting bound every `|A_{x,α}|` obeys.
pub fn a_size_bound(n: usize, alpha: i64) -> f64 {
    2f64.powf((n as i64 - alpha + C_LITERAL as i64 + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepKind {
    A,
    B,
    ARestricted,
}

impl DepKind {
    pub fn label(self) -> &'static str {
        match self {
            DepKind::A => "A",
            DepKind::B => "B",
            DepKind::ARestricted => "A-restricted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSizes {
    pub size: usize,
    /// `2^(n−α)`.
    pub reference: f64,
    /// `size / 2^(n−α)`.
    pub bound_ratio: f64,
    pub hard_bound: f64,
}

impl MeasuredSizes {
    fn new(size: usize, n: usize, alpha: i64) -> Self {
        let reference = 2f64.powf((n as i64 - alpha) as f64);
        Self {
            size,
            reference,
            bound_ratio: size as f64 / reference,
            hard_bound: a_size_bound(n, alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepSetResult {
    pub center: Bitstring,
    pub kind: DepKind,
    pub params: DepParams,
    pub members: Vec<Bitstring>,
    pub measured: MeasuredSizes,
}

impl DepSetResult {
    fn new(center: &Bitstring, kind: DepKind, params: DepParams, members: Vec<Bitstring>) -> Self {
        let measured = MeasuredSizes::new(members.len(), params.n, params.alpha);
        Self {
            center: center.clone(),
            kind,
            params,
            members,
            measured,
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, y: &Bitstring) -> bool {
        self.members.binary_search(y).is_ok()
    }

    pub fn row(&self) -> DepSetRow {
        DepSetRow {
            center: self.center.clone(),
            kind: self.kind.label().to_string(),
            alpha: self.params.alpha,
            s: self.params.s,
            size: self.size(),
            bound_ratio: self.measured.bound_ratio,
        }
    }
}

/// One CSV line of a dependency-set export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepSetRow {
    pub center: Bitstring,
    pub kind: String,
    pub alpha: i64,
    pub s: Option<i64>,
    pub size: usize,
    pub bound_ratio: f64,
}

/// `{y : C^t(y) − C^t(y|x) ≥ α}`.
pub fn dep_set_a(src: &dyn TableSource, x: &Bitstring, p: DepParams) -> Result<DepSetResult> {
    p.validate(x)?;
    let plain = src.table(p.n, &Bitstring::empty(), p.t)?;
    let cond = src.table(p.n, x, p.t)?;
    let members = Bitstring::all(p.n)
        .enumerate()
        .filter(|(i, _)| diff(plain.at(*i), cond.at(*i)).is_some_and(|d| d >= p.alpha))
        .map(|(_, y)| y)
        .collect();
    Ok(DepSetResult::new(x, DepKind::A, p, members))
}

/// `{y : C^t(y|bin(n)) − C^t(y|x) ≥ α}`.
pub fn dep_set_b(src: &dyn TableSource, x: &Bitstring, p: DepParams) -> Result<DepSetResult> {
    p.validate(x)?;
    let given_len = src.table(p.n, &Bitstring::bin(p.n as u64), p.t)?;
    let cond = src.table(p.n, x, p.t)?;
    let members = Bitstring::all(p.n)
        .enumerate()
        .filter(|(i, _)| diff(given_len.at(*i), cond.at(*i)).is_some_and(|d| d >= p.alpha))
        .map(|(_, y)| y)
        .collect();
    Ok(DepSetResult::new(x, DepKind::B, p, members))
}

/// `A_{x,α}` restricted to `C^t(y) ≥ s`.
pub fn dep_set_a_restricted(
    src: &dyn TableSource,
    x: &Bitstring,
    p: DepParams,
) -> Result<DepSetResult> {
    let s =
        p.s.ok_or_else(|| Error::Precondition("restricted set needs a floor s".into()))?;
    let plain = src.table(p.n, &Bitstring::empty(), p.t)?;
    let base = dep_set_a(src, x, p)?;
    let members = base
        .members
        .into_iter()
        .filter(|y| plain.get(y).is_some_and(|c| c as i64 >= s))
        .collect();
    Ok(DepSetResult::new(x, DepKind::ARestricted, p, members))
}

/// How `D_α(u)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegreeMode {
    /// Every center `x ∈ {0,1}^n`; needs all `2^n` conditional tables.
    Full,
    /// `count` distinct centers drawn with a seeded generator.
    Sampled { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Degree {
    Exact {
        count: usize,
        members: Vec<Bitstring>,
    },
    Estimate {
        sample_size: usize,
        seed: u64,
        hits: usize,
        /// `hits / sample_size · 2^n`.
        estimate: f64,
        members_in_sample: Vec<Bitstring>,
    },
}

impl Degree {
    pub fn value(&self) -> f64 {
        match self {
            Degree::Exact { count, .. } => *count as f64,
            Degree::Estimate { estimate, .. } => *estimate,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Degree::Exact { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub u: Bitstring,
    pub params: DepParams,
    pub degree: Degree,
}

/// `D_α(u) = {x : u ∈ A_{x,α}}` and its size `d_α(u)`.
pub fn dep_degree(
    src: &dyn TableSource,
    u: &Bitstring,
    p: DepParams,
    mode: DegreeMode,
) -> Result<DegreeResult> {
    p.validate(u)?;
    let c_u = src.table(p.n, &Bitstring::empty(), p.t)?.get(u);
    let is_member = |x: &Bitstring| -> Result<bool> {
        let c_u_x = src.table(p.n, x, p.t)?.get(u);
        Ok(diff(c_u, c_u_x).is_some_and(|d| d >= p.alpha))
    };
    let degree = match mode {
        DegreeMode::Full => {
            let mut members = Vec::new();
            for x in Bitstring::all(p.n) {
                if is_member(&x)? {
                    members.push(x);
                }
            }
            Degree::Exact {
                count: members.len(),
                members,
            }
        }
        DegreeMode::Sampled { count, seed } => {
            let size = 1usize << p.n;
            if count == 0 || count > size {
                return Err(Error::Precondition(format!(
                    "sample size {count} outside 1..={size}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = sample(&mut rng, size, count).into_vec();
            idx.sort_unstable();
            let mut members_in_sample = Vec::new();
            for i in idx {
                let x = Bitstring::from_value(i as u64, p.n);
                if is_member(&x)? {
                    members_in_sample.push(x);
                }
            }
            let hits = members_in_sample.len();
            Degree::Estimate {
                sample_size: count,
                seed,
                hits,
                estimate: hits as f64 / count as f64 * size as f64,
                members_in_sample,
            }
        }
    };
    Ok(DegreeResult {
        u: u.clone(),
        params: p,
        degree,
    })
}

/// Normalized degrees `d_α(u) · 2^(α−n)` over strings with `C^t(u) ≥ min_complexity`,
/// next to the asymptotic window `[1/(2n^12), n^5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeBoundsReport {
    pub n: usize,
    pub alpha: i64,
    pub t: u64,
    pub min_complexity: u32,
    pub strings_considered: usize,
    pub min_normalized: Option<f64>,
    pub max_normalized: Option<f64>,
    pub lower_reference: f64,
    pub upper_reference: f64,
    pub below_lower: usize,
    pub above_upper: usize,
}

pub fn degree_bounds_report(
    src: &dyn TableSource,
    n: usize,
    alpha: i64,
    t: u64,
    min_complexity: u32,
) -> Result<DegreeBoundsReport> {
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let scale = 2f64.powf((alpha - n as i64) as f64);
    let nf = n as f64;
    let lower_reference = 1.0 / (2.0 * nf.powi(12));
    let upper_reference = nf.powi(5);
    let mut normalized = Vec::new();
    for u in Bitstring::all(n) {
        if plain.get(&u).is_some_and(|c| c >= min_complexity) {
            let d = dep_degree(src, &u, DepParams::new(n, alpha, t), DegreeMode::Full)?;
            normalized.push(d.degree.value() * scale);
        }
    }
    let min = normalized.iter().copied().reduce(f64::min);
    let max = normalized.iter().copied().reduce(f64::max);
    Ok(DegreeBoundsReport {
        n,
        alpha,
        t,
        min_complexity,
        strings_considered: normalized.len(),
        min_normalized: min,
        max_normalized: max,
        lower_reference,
        upper_reference,
        below_lower: normalized.iter().filter(|&&v| v < lower_reference).count(),
        above_upper: normalized.iter().filter(|&&v| v > upper_reference).count(),
    })
}

/// Pairs `(x, y)` with `y ∈ B_{x,α}` but `y ∉ A_{x,α}`, counted over all centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub n: usize,
    pub alpha: i64,
    pub t: u64,
    pub b_members: usize,
    pub violations: Vec<(Bitstring, Bitstring)>,
}

pub fn containment_report(
    src: &dyn TableSource,
    n: usize,
    alpha: i64,
    t: u64,
) -> Result<ContainmentReport> {
    let p = DepParams::new(n, alpha, t);
    let mut violations = Vec::new();
    let mut b_members = 0;
    for x in Bitstring::all(n) {
        let a = dep_set_a(src, &x, p)?;
        let b = dep_set_b(src, &x, p)?;
        b_members += b.size();
        for y in &b.members {
            if !a.contains(y) {
                violations.push((x.clone(), y.clone()));
            }
        }
    }
    Ok(ContainmentReport {
        n,
        alpha,
        t,
        b_members,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub y: Bitstring,
    pub z: Bitstring,
    pub c_z_given_prefix: u32,
    /// `C^t(y) − C^t(y|x)`.
    pub info: Option<i64>,
}

/// Strings `y = x*_β z` with `C^t(z | x*_β) ≥ n − β − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamily {
    pub x: Bitstring,
    pub alpha: i64,
    pub slack: i64,
    pub beta: i64,
    pub t: u64,
    pub c_x: u32,
    pub x_star: Bitstring,
    pub prefix: Bitstring,
    pub members: Vec<FamilyMember>,
    /// `2^(n−β−1)`.
    pub counting_bound: f64,
    pub info_min: Option<i64>,
    pub info_median: Option<f64>,
    pub info_max: Option<i64>,
    /// Members whose measured information reaches `alpha`.
    pub reaching_alpha: usize,
}

impl WitnessFamily {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// The default slack `7⌈log₂ n⌉` used in the hypothesis `C(x) ≥ α + slack`.
pub fn thm1_default_slack(n: usize) -> i64 {
    7 * log_n(n)
}

/// Builds the witness family for center `x`. With `slack = None` the
/// hypothesis is `C^t(x) ≥ α + 7⌈log₂ n⌉`; a smaller explicit slack runs the
/// same construction at desk scale.
pub fn thm1_witnesses(
    src: &dyn TableSource,
    x: &Bitstring,
    alpha: i64,
    t: u64,
    slack: Option<i64>,
) -> Result<WitnessFamily> {
    let n = x.len();
    if n == 0 || alpha < 0 {
        return Err(Error::Precondition("need |x| ≥ 1 and alpha ≥ 0".into()));
    }
    let slack = slack.unwrap_or_else(|| thm1_default_slack(n));
    let beta = alpha + slack;
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let c_x = plain
        .get(x)
        .ok_or_else(|| Error::Precondition(format!("C^t({x:?}) undefined under the cap")))?;
    if (c_x as i64) < beta {
        return Err(Error::Precondition(format!(
            "C^t(x) = {c_x} < alpha + slack = {beta}"
        )));
    }
    if beta > n as i64 {
        return Err(Error::Precondition(format!(
            "beta = {beta} exceeds n = {n}; no room for the suffix z"
        )));
    }
    let beta_u = beta as usize;
    let x_star = shortest_description(x, t)?.program.code().clone();
    let prefix = x_star.prefix(beta_u);
    let cond = src.table(n, x, t)?;
    let z_len = n - beta_u;
    let threshold = z_len as i64 - 1;

    let zs: Vec<(Bitstring, u32)> = if z_len == 0 {
        vec![(Bitstring::empty(), 0)]
    } else {
        let z_table = src.table(z_len, &prefix, t)?;
        Bitstring::all(z_len)
            .filter_map(|z| {
                let c = z_table.get(&z)?;
                (c as i64 >= threshold).then_some((z, c))
            })
            .collect()
    };

    let members: Vec<FamilyMember> = zs
        .into_iter()
        .map(|(z, c)| {
            let y = prefix.concat(&z);
            FamilyMember {
                info: diff(plain.get(&y), cond.get(&y)),
                y,
                z,
                c_z_given_prefix: c,
            }
        })
        .collect();

    let mut infos: Vec<i64> = members.iter().filter_map(|m| m.info).collect();
    infos.sort_unstable();
    let info_median = (!infos.is_empty()).then(|| {
        let mid = infos.len() / 2;
        if infos.len() % 2 == 1 {
            infos[mid] as f64
        } else {
            (infos[mid - 1] + infos[mid]) as f64 / 2.0
        }
    });
    Ok(WitnessFamily {
        x: x.clone(),
        alpha,
        slack,
        beta,
        t,
        c_x,
        x_star,
        prefix,
        counting_bound: 2f64.powf((n as i64 - beta - 1) as f64),
        info_min: infos.first().copied(),
        info_median,
        info_max: infos.last().copied(),
        reaching_alpha: infos.iter().filter(|&&i| i >= alpha).count(),
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::complexity::{complexity, Lab};

    const T: u64 = 4096;

    #[test]
    fn unreachable_alpha_gives_empty_sets() {
        let lab = Lab::default();
        let x = bs("1010");
        let p = DepParams::new(4, 4 + C_LITERAL as i64 + 1, T);
        assert!(dep_set_a(&lab, &x, p).unwrap().members.is_empty());
        assert!(dep_set_b(&lab, &x, p).unwrap().members.is_empty());
        let r = dep_set_a_restricted(&lab, &x, DepParams::new(4, 1, T).with_floor(6)).unwrap();
        assert!(r.members.is_empty());
    }

    #[test]
    fn zero_floor_restriction_is_identity() {
        let lab = Lab::default();
        for x in Bitstring::all(4) {
            let p = DepParams::new(4, 2, T);
            let a = dep_set_a(&lab, &x, p).unwrap();
            let r = dep_set_a_restricted(&lab, &x, p.with_floor(0)).unwrap();
            assert_eq!(a.members, r.members);
        }
    }

    /// Oracle: membership from direct program searches, no tables.
    fn a_by_search(x: &Bitstring, alpha: i64) -> Vec<Bitstring> {
        Bitstring::all(x.len())
            .filter(|y| {
                let plain = complexity(y, &bs(""), T).unwrap().len() as i64;
                let cond = complexity(y, x, T).unwrap().len() as i64;
                plain - cond >= alpha
            })
            .collect()
    }

    #[test]
    fn n4_center_1010_alpha_2() {
        let lab = Lab::default();
        let x = bs("1010");
        let a = dep_set_a(&lab, &x, DepParams::new(4, 2, T)).unwrap();
        assert_eq!(a.members, a_by_search(&x, 2));
        let shown: Vec<String> = a.members.iter().map(|m| m.to_string()).collect();
        assert_eq!(shown, ["1010"]);
    }

    #[test]
    fn members_reverify() {
        let lab = Lab::default();
        let p = DepParams::new(5, 1, T);
        for x in Bitstring::all(5).step_by(5) {
            let a = dep_set_a(&lab, &x, p).unwrap();
            for y in &a.members {
                let i = crate::complexity::info(&lab, &x, y, T).unwrap().unwrap();
                assert!(i >= 1);
            }
        }
    }

    #[test]
    fn transpose_identity_n4() {
        let lab = Lab::default();
        for alpha in 0..=5 {
            let p = DepParams::new(4, alpha, T);
            let sets: Vec<DepSetResult> = Bitstring::all(4)
                .map(|x| dep_set_a(&lab, &x, p).unwrap())
                .collect();
            for u in Bitstring::all(4) {
                let d = dep_degree(&lab, &u, p, DegreeMode::Full).unwrap();
                let Degree::Exact { members, count } = d.degree else {
                    panic!("full mode must be exact")
                };
                assert_eq!(count, members.len());
                for (xi, set) in sets.iter().enumerate() {
                    let x = Bitstring::from_value(xi as u64, 4);
                    assert_eq!(members.contains(&x), set.contains(&u));
                }
            }
        }
    }

    #[test]
    fn sampled_degree_is_flagged() {
        let lab = Lab::default();
        let d = dep_degree(
            &lab,
            &bs("0110"),
            DepParams::new(4, 1, T),
            DegreeMode::Sampled { count: 8, seed: 1 },
        )
        .unwrap();
        assert!(!d.degree.is_exact());
        let full =
            dep_degree(&lab, &bs("0110"), DepParams::new(4, 1, T), DegreeMode::Full).unwrap();
        if let (
            Degree::Estimate {
                members_in_sample, ..
            },
            Degree::Exact { members, .. },
        ) = (&d.degree, &full.degree)
        {
            assert!(members_in_sample.iter().all(|m| members.contains(m)));
        }
    }

    #[test]
    fn missing_tables_are_reported() {
        let set = crate::complexity::TableSet::new();
        let err = dep_set_a(&set, &bs("01"), DepParams::new(2, 1, T)).unwrap_err();
        assert!(matches!(err, Error::TableRequired { .. }));
    }

    #[test]
    fn witness_family_counting_bound() {
        let lab = Lab::default();
        let x = bs("1101001110");
        let fam = thm1_witnesses(&lab, &x, 2, T, Some(2)).unwrap();
        assert_eq!(fam.beta, 4);
        assert!(fam.size() as f64 >= fam.counting_bound);
        for m in &fam.members {
            assert!(m.y.starts_with(&fam.prefix));
            assert_eq!(m.y.len(), 10);
        }
        assert!(fam.x_star.starts_with(&fam.prefix));
    }

    #[test]
    fn default_slack_rejects_desk_scale_centers() {
        let lab = Lab::default();
        // C^t(x) ≤ n + 1 = 11 < 2 + 7·4
        let err = thm1_witnesses(&lab, &bs("1101001110"), 2, T, None).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
