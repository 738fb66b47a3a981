//! Mutual-dependency graphs, Caro-Wei independent sets, and the pairwise and
//! mutual independence checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::complexity::{diff, ComplexityTable, TableSource};
use crate::depsets::{dep_set_a, DepParams};
use crate::error::{Error, Result};

/// Largest `n` for which [`build_dep_graph`] will request all `2^n` conditional tables.
pub const DEFAULT_MAX_GRAPH_N: usize = 10;
/// `8!`.
pub const DEFAULT_PERM_CAP: usize = 40320;

/// Undirected simple graph on vertices `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<FixedBitSet>,
}

impl Graph {
    pub fn new(vertices: usize) -> Self {
        Self {
            adj: vec![FixedBitSet::with_capacity(vertices); vertices],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "self-loops are not allowed");
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].count_ones(..)
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.len()).map(|u| self.degree(u)).collect()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u].ones()
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|u| {
                self.neighbors(u)
                    .filter(move |&v| v > u)
                    .map(move |v| (u, v))
            })
            .collect()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| u != v && !self.has_edge(u, v)))
    }

    pub fn is_symmetric_irreflexive(&self) -> bool {
        (0..self.len())
            .all(|u| !self.has_edge(u, u) && self.neighbors(u).all(|v| self.has_edge(v, u)))
    }
}

/// `G(v, p)` with a seeded generator; pairs visited in order `(0,1), (0,2), …`.
pub fn random_graph(vertices: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(vertices);
    for u in 0..vertices {
        for v in u + 1..vertices {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaroWeiResult {
    /// Vertex indices in selection order.
    pub set: Vec<usize>,
    /// `Σ 1/(d_v + 1)` as an exact fraction.
    pub bound: String,
    pub bound_ceil: u64,
    pub bound_approx: f64,
}

/// `Σ_v 1/(deg(v)+1)` exactly.
pub fn caro_wei_sum(g: &Graph) -> BigRational {
    g.degrees()
        .into_iter()
        .map(|d| BigRational::new(BigInt::from(1), BigInt::from(d + 1)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Repeatedly takes a vertex of minimum residual degree (lowest index on
/// ties), then deletes it with its neighbours.
pub fn caro_wei_independent_set(g: &Graph) -> CaroWeiResult {
    let v = g.len();
    let mut alive = FixedBitSet::with_capacity(v);
    alive.insert_range(..);
    let mut degree: Vec<usize> = g.degrees();
    let mut set = Vec::new();
    while let Some(pick) = alive.ones().min_by_key(|&u| (degree[u], u)) {
        set.push(pick);
        let mut removed: Vec<usize> = g.neighbors(pick).filter(|&w| alive.contains(w)).collect();
        removed.push(pick);
        for &r in &removed {
            alive.set(r, false);
        }
        for &r in &removed {
            for w in g.neighbors(r) {
                if alive.contains(w) {
                    degree[w] -= 1;
                }
            }
        }
    }
    let sum = caro_wei_sum(g);
    CaroWeiResult {
        set,
        bound: sum.to_string(),
        bound_ceil: sum.ceil().to_integer().to_u64().unwrap_or(u64::MAX),
        bound_approx: sum.to_f64().unwrap_or(f64::NAN),
    }
}

/// Edge `(u, v)` iff both `C^t(u) − C^t(u|v) ≥ β` and `C^t(v) − C^t(v|u) ≥ β`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepGraph {
    pub n: usize,
    pub beta: i64,
    pub t: u64,
    pub vertices: Vec<Bitstring>,
    pub graph: Graph,
}

impl DepGraph {
    pub fn degrees(&self) -> Vec<usize> {
        self.graph.degrees()
    }

    pub fn edge_list(&self) -> Vec<(Bitstring, Bitstring)> {
        self.graph
            .edges()
            .into_iter()
            .map(|(u, v)| (self.vertices[u].clone(), self.vertices[v].clone()))
            .collect()
    }

    pub fn labels(&self, idx: &[usize]) -> Vec<Bitstring> {
        idx.iter().map(|&i| self.vertices[i].clone()).collect()
    }
}

/// Builds the graph over `vertices` (all of `{0,1}^n` when `None`).
pub fn build_dep_graph(
    src: &dyn TableSource,
    n: usize,
    beta: i64,
    t: u64,
    vertices: Option<Vec<Bitstring>>,
    max_n: usize,
) -> Result<DepGraph> {
    if n > max_n {
        return Err(Error::ResourceRefusal {
            estimated: 2f64.powi(n as i32),
            ceiling: 2f64.powi(max_n as i32),
        });
    }
    let vertices = match vertices {
        Some(mut v) => {
            if v.iter().any(|b| b.len() != n) {
                return Err(Error::Precondition(format!(
                    "every vertex must be {n} bits"
                )));
            }
            v.sort();
            v.dedup();
            v
        }
        None => Bitstring::all(n).collect(),
    };
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let conds: Vec<Arc<ComplexityTable>> = vertices
        .par_iter()
        .map(|v| src.table(n, v, t))
        .collect::<Result<_>>()?;
    let idx: Vec<usize> = vertices.iter().map(|v| v.value() as usize).collect();
    let info = |a: usize, b: usize| diff(plain.at(idx[a]), conds[b].at(idx[a]));
    let edges: Vec<(usize, usize)> = (0..vertices.len())
        .into_par_iter()
        .flat_map_iter(|u| {
            let info = &info;
            (u + 1..vertices.len()).filter_map(move |v| {
                let uv = info(u, v).is_some_and(|d| d >= beta);
                let vu = info(v, u).is_some_and(|d| d >= beta);
                (uv && vu).then_some((u, v))
            })
        })
        .collect();
    let mut graph = Graph::new(vertices.len());
    for (u, v) in edges {
        graph.add_edge(u, v);
    }
    Ok(DepGraph {
        n,
        beta,
        t,
        vertices,
        graph,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    /// `C^t(x_i) − C^t(x_i|x_j)`.
    pub info: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub set: Vec<Bitstring>,
    pub alpha: i64,
    pub t: u64,
    pub independent: bool,
    pub violations: Vec<PairViolation>,
    /// Ordered pairs with some value undefined under the length cap.
    pub undefined_pairs: usize,
    pub max_info: Option<i64>,
    /// `2n³·2^α`, the size any pairwise α-independent set stays below.
    pub size_reference: f64,
}

/// Checks `C^t(x_i) − C^t(x_i|x_j) ≤ α` for every ordered pair `i ≠ j`.
pub fn check_pairwise_independent(
    src: &dyn TableSource,
    set: &[Bitstring],
    alpha: i64,
    t: u64,
) -> Result<PairwiseReport> {
    if set.len() < 2 {
        return Err(Error::Precondition("need at least two strings".into()));
    }
    let n = set[0].len();
    if set.iter().any(|x| x.len() != n) {
        return Err(Error::Precondition("strings must share one length".into()));
    }
    let plain = src.table(n, &Bitstring::empty(), t)?;
    let conds: Vec<Arc<ComplexityTable>> = set
        .par_iter()
        .map(|x| src.table(n, x, t))
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    let mut undefined = 0;
    let mut max_info = None;
    for (i, xi) in set.iter().enumerate() {
        for (j, cond) in conds.iter().enumerate() {
            if i == j {
                continue;
            }
            match diff(plain.get(xi), cond.get(xi)) {
                None => undefined += 1,
                Some(info) => {
                    max_info = max_info.max(Some(info));
                    if info > alpha {
                        violations.push(PairViolation { i, j, info });
                    }
                }
            }
        }
    }
    let nf = n as f64;
    Ok(PairwiseReport {
        set: set.to_vec(),
        alpha,
        t,
        independent: violations.is_empty(),
        violations,
        undefined_pairs: undefined,
        max_info,
        size_reference: 2.0 * nf.powi(3) * 2f64.powf(alpha as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationValue {
    pub order: Vec<usize>,
    pub complexity: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PermCoverage {
    Exhaustive,
    Sampled { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleReport {
    pub tuple: Vec<Bitstring>,
    pub alpha: i64,
    pub t: u64,
    pub individual: Vec<u32>,
    pub sum_individual: i64,
    pub coverage: PermCoverage,
    /// `k!` as a float (it overflows integers quickly).
    pub total_permutations: f64,
    pub permutations: Vec<PermutationValue>,
    /// `Σ C^t(x_i) − C^t(x_1…x_k)` in the given order.
    pub deficiency: Option<i64>,
    /// `Σ C^t(x_i) − min_π C^t(x_π)` over evaluated permutations.
    pub max_deficiency: Option<i64>,
    pub independent: bool,
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn factorial_capped(k: usize, cap: usize) -> Option<usize> {
    (1..=k).try_fold(1usize, |acc, i| acc.checked_mul(i).filter(|&v| v <= cap))
}

/// Individual complexities `C^t(x_i)`; errors if any is undefined.
fn individual_complexities(src: &dyn TableSource, xs: &[Bitstring], t: u64) -> Result<Vec<u32>> {
    xs.iter()
        .map(|x| {
            src.table(x.len(), &Bitstring::empty(), t)?
                .get(x)
                .ok_or_else(|| Error::Precondition(format!("C^t({x:?}) undefined under the cap")))
        })
        .collect()
}

/// Evaluates every permutation's concatenation when `k! ≤ perm_cap`, else
/// `perm_cap` seeded random orders.
pub fn check_mutual_independent(
    src: &dyn TableSource,
    tuple: &[Bitstring],
    alpha: i64,
    t: u64,
    perm_cap: usize,
    seed: u64,
) -> Result<TupleReport> {
    if tuple.is_empty() || perm_cap == 0 {
        return Err(Error::Precondition(
            "need a nonempty tuple and perm_cap ≥ 1".into(),
        ));
    }
    let k = tuple.len();
    let individual = individual_complexities(src, tuple, t)?;
    let sum: i64 = individual.iter().map(|&c| c as i64).sum();
    let total_len: usize = tuple.iter().map(Bitstring::len).sum();
    let joint = src.table(total_len, &Bitstring::empty(), t)?;

    let (orders, coverage) = match factorial_capped(k, perm_cap) {
        Some(_) => {
            let mut p: Vec<usize> = (0..k).collect();
            let mut all = vec![p.clone()];
            while next_permutation(&mut p) {
                all.push(p.clone());
            }
            (all, PermCoverage::Exhaustive)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut seen = BTreeSet::new();
            let mut identity: Vec<usize> = (0..k).collect();
            seen.insert(identity.clone());
            for _ in 1..perm_cap {
                identity.shuffle(&mut rng);
                seen.insert(identity.clone());
            }
            (
                seen.into_iter().collect(),
                PermCoverage::Sampled {
                    draws: perm_cap,
                    seed,
                },
            )
        }
    };

    let permutations: Vec<PermutationValue> = orders
        .into_iter()
        .map(|order| {
            let s = Bitstring::concat_all(order.iter().map(|&i| &tuple[i]));
            PermutationValue {
                complexity: joint.get(&s),
                order,
            }
        })
        .collect();
    let identity: Vec<usize> = (0..k).collect();
    let given = permutations
        .iter()
        .find(|p| p.order == identity)
        .and_then(|p| p.complexity);
    let min = permutations.iter().filter_map(|p| p.complexity).min();
    let independent = permutations
        .iter()
        .all(|p| p.complexity.is_some_and(|c| c as i64 >= sum - alpha));
    Ok(TupleReport {
        tuple: tuple.to_vec(),
        alpha,
        t,
        individual,
        sum_individual: sum,
        coverage,
        total_permutations: (1..=k).map(|i| i as f64).product(),
        permutations,
        deficiency: given.map(|c| sum - c as i64),
        max_deficiency: min.map(|c| sum - c as i64),
        independent,
    })
}

/// `Σ C^t(x_i) − C^t(x_1…x_k)` in the given order.
pub fn concat_deficiency(src: &dyn TableSource, xs: &[Bitstring], t: u64) -> Result<Option<i64>> {
    if xs.is_empty() {
        return Err(Error::Precondition("need at least one string".into()));
    }
    let sum: i64 = individual_complexities(src, xs, t)?
        .into_iter()
        .map(i64::from)
        .sum();
    let joined = Bitstring::concat_all(xs.iter());
    let c = src
        .table(joined.len(), &Bitstring::empty(), t)?
        .get(&joined);
    Ok(c.map(|c| sum - c as i64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub xs: Vec<Bitstring>,
    pub alpha: i64,
    pub t: u64,
    pub members: Vec<Bitstring>,
    pub size: usize,
    /// Concatenation deficiency of `xs` (the exponent shift).
    pub deficiency: Option<i64>,
    /// `2^(n − kα + deficiency)`.
    pub reference: Option<f64>,
}

/// `A_{x_1,α} ∩ … ∩ A_{x_k,α}`.
pub fn intersect_dep_sets(
    src: &dyn TableSource,
    xs: &[Bitstring],
    alpha: i64,
    t: u64,
) -> Result<IntersectionReport> {
    let Some(first) = xs.first() else {
        return Err(Error::Precondition("need at least one center".into()));
    };
    let n = first.len();
    let p = DepParams::new(n, alpha, t);
    let mut members = dep_set_a(src, first, p)?.members;
    for x in &xs[1..] {
        let other = dep_set_a(src, x, p)?;
        members.retain(|y| other.contains(y));
    }
    let deficiency = concat_deficiency(src, xs, t)?;
    let k = xs.len() as i64;
    Ok(IntersectionReport {
        xs: xs.to_vec(),
        alpha,
        t,
        size: members.len(),
        members,
        deficiency,
        reference: deficiency.map(|b| 2f64.powf((n as i64 - k * alpha + b) as f64)),
    })
}
