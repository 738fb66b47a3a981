//! Counting lower bounds for `|B_{x,α}|` from an arbitrary two-source
//! function table `E : {0,1}^n × {0,1}^n → {0,1}^m`.
//!
//! The preimages of the most popular image over `{x} × {0,1}^n` split into
//! low-complexity strings, strings dependent on `x`, and the rest. Every
//! dependent string lies in `B_{x,α}`, so `N − |low| − |neither|` is a sound
//! lower bound whatever `E` is.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::complexity::{diff, TableSource};
use crate::error::{Error, Result};

/// Largest input length for an exhaustively stored table (`2^24` entries).
pub const MAX_EXTRACTOR_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableOrigin {
    Seeded(u64),
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorMeta {
    pub n: usize,
    pub m: usize,
    pub origin: TableOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractorTable {
    pub meta: ExtractorMeta,
    /// Row-major in `(x, y)`: entry `x·2^n + y`.
    entries: Vec<u32>,
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > MAX_EXTRACTOR_N || m > n {
        return Err(Error::Precondition(format!(
            "extractor needs 1 ≤ n ≤ {MAX_EXTRACTOR_N} and m ≤ n (got n={n}, m={m})"
        )));
    }
    Ok(())
}

/// Uniform entries from `ChaCha8Rng::seed_from_u64(seed)`, drawn in row-major order.
pub fn make_random_extractor(n: usize, m: usize, seed: u64) -> Result<ExtractorTable> {
    check_dims(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..1usize << (2 * n))
        .map(|_| rng.gen_range(0..1u32 << m))
        .collect();
    Ok(ExtractorTable {
        meta: ExtractorMeta {
            n,
            m,
            origin: TableOrigin::Seeded(seed),
        },
        entries,
    })
}

impl ExtractorTable {
    pub fn from_fn(n: usize, m: usize, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        check_dims(n, m)?;
        let size = 1u64 << n;
        let mut entries = Vec::with_capacity(1 << (2 * n));
        for x in 0..size {
            for y in 0..size {
                let v = f(x, y);
                if v >> m != 0 {
                    return Err(Error::Precondition(format!("entry {v} exceeds {m} bits")));
                }
                entries.push(v as u32);
            }
        }
        Ok(Self {
            meta: ExtractorMeta {
                n,
                m,
                origin: TableOrigin::Explicit,
            },
            entries,
        })
    }

    pub fn constant(n: usize, m: usize, value: u64) -> Result<Self> {
        Self::from_fn(n, m, |_, _| value)
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn m(&self) -> usize {
        self.meta.m
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn eval_raw(&self, x: u64, y: u64) -> u32 {
        self.entries[((x << self.meta.n) | y) as usize]
    }

    pub fn eval(&self, x: &Bitstring, y: &Bitstring) -> Bitstring {
        Bitstring::from_value(self.eval_raw(x.value(), y.value()) as u64, self.meta.m)
    }

    /// Entries as consecutive `m`-bit fields, MSB-first, padded to a byte.
    pub fn to_blob(&self) -> Vec<u8> {
        let m = self.meta.m;
        let bits = Bitstring::concat_all(
            self.entries
                .iter()
                .map(|&e| Bitstring::from_value(e as u64, m))
                .collect::<Vec<_>>()
                .iter(),
        );
        bits.to_packed_bytes()
    }

    pub fn from_blob(meta: ExtractorMeta, blob: &[u8]) -> Result<Self> {
        check_dims(meta.n, meta.m)?;
        let count = 1usize << (2 * meta.n);
        let total = count * meta.m;
        if blob.len() != total.div_ceil(8) {
            return Err(Error::Decode(format!(
                "blob has {} bytes, expected {}",
                blob.len(),
                total.div_ceil(8)
            )));
        }
        let bits = Bitstring::from_packed_bytes(blob, total)
            .ok_or_else(|| Error::Decode("short extractor blob".into()))?;
        let raw = bits.bits();
        let entries = (0..count)
            .map(|i| {
                raw[i * meta.m..(i + 1) * meta.m]
                    .iter()
                    .fold(0u32, |a, &b| (a << 1) | b as u32)
            })
            .collect();
        Ok(Self { meta, entries })
    }

    /// Writes `<stem>.json` and, for explicit tables or on request, `<stem>.bin`.
    pub fn save(&self, stem: &Path, with_blob: bool) -> Result<()> {
        fs::write(
            stem.with_extension("json"),
            serde_json::to_string_pretty(&self.meta)?,
        )?;
        if with_blob || self.meta.origin == TableOrigin::Explicit {
            fs::write(stem.with_extension("bin"), self.to_blob())?;
        }
        Ok(())
    }

    /// Reads the blob when present, else regenerates a seeded table.
    pub fn load(stem: &Path) -> Result<Self> {
        let meta: ExtractorMeta =
            serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
        let blob_path = stem.with_extension("bin");
        if blob_path.exists() {
            return Self::from_blob(meta, &fs::read(blob_path)?);
        }
        match meta.origin {
            TableOrigin::Seeded(seed) => make_random_extractor(meta.n, meta.m, seed),
            TableOrigin::Explicit => Err(Error::Parse("explicit extractor without a blob".into())),
        }
    }

    /// Pearson statistic of the output histogram against uniform, with its
    /// degrees of freedom.
    pub fn chi_square(&self) -> (f64, usize) {
        let buckets = 1usize << self.meta.m;
        let mut hist = vec![0u64; buckets];
        for &e in &self.entries {
            hist[e as usize] += 1;
        }
        let expected = self.entries.len() as f64 / buckets as f64;
        let stat = hist
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        (stat, buckets - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularImage {
    pub x: Bitstring,
    pub z: Bitstring,
    pub count: usize,
    pub preimages: Vec<Bitstring>,
}

/// The `z` with the most preimages in `{x} × {0,1}^n`, smallest `z` on ties.
pub fn most_popular_image(e: &ExtractorTable, x: &Bitstring) -> Result<PopularImage> {
    let n = e.n();
    if x.len() != n {
        return Err(Error::Precondition(format!("x must be {n} bits")));
    }
    let xv = x.value();
    let mut hist = vec![0usize; 1 << e.m()];
    for y in 0..1u64 << n {
        hist[e.eval_raw(xv, y) as usize] += 1;
    }
    let (z, &count) = hist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("at least one bucket");
    let preimages = (0..1u64 << n)
        .filter(|&y| e.eval_raw(xv, y) as usize == z)
        .map(|y| Bitstring::from_value(y, n))
        .collect();
    Ok(PopularImage {
        x: x.clone(),
        z: Bitstring::from_value(z as u64, e.m()),
        count,
        preimages,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountParams {
    /// Complexity floor.
    pub s: i64,
    pub alpha: i64,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPartition {
    pub image: PopularImage,
    /// `C^t(y|bin(n)) < s`.
    pub low: Vec<Bitstring>,
    /// `C^t(y|bin(n)) ≥ s` and `C^t(y|bin(n)) − C^t(y|x) ≥ α`.
    pub dependent: Vec<Bitstring>,
    pub neither: Vec<Bitstring>,
}

pub fn bad_partition(
    src: &dyn TableSource,
    e: &ExtractorTable,
    x: &Bitstring,
    p: CountParams,
) -> Result<BadPartition> {
    let image = most_popular_image(e, x)?;
    let n = e.n();
    let given_len = src.table(n, &Bitstring::bin(n as u64), p.t)?;
    let cond = src.table(n, x, p.t)?;
    let (mut low, mut dependent, mut neither) = (Vec::new(), Vec::new(), Vec::new());
    for y in &image.preimages {
        let c_n = given_len.get(y);
        if c_n.is_some_and(|c| (c as i64) < p.s) {
            low.push(y.clone());
        } else if c_n.is_some() && diff(c_n, cond.get(y)).is_some_and(|d| d >= p.alpha) {
            dependent.push(y.clone());
        } else {
            neither.push(y.clone());
        }
    }
    Ok(BadPartition {
        image,
        low,
        dependent,
        neither,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: usize,
    pub m: usize,
    pub x: Bitstring,
    pub params: CountParams,
    pub z: Bitstring,
    /// Size of the popular preimage set.
    pub popular_count: usize,
    pub low: usize,
    pub dependent: usize,
    pub neither: usize,
    /// `N − L − |neither|`, a lower bound on `|B^t_{x,α}|`.
    pub bound: i64,
    /// Whether every preimage was accounted for as low or dependent.
    pub valid: bool,
    /// `2^(n−m)`.
    pub pigeonhole: f64,
    /// `2^(n−m) − 2^s`.
    pub asymptotic_form: f64,
}

pub fn lower_bound_certificate(
    src: &dyn TableSource,
    e: &ExtractorTable,
    x: &Bitstring,
    p: CountParams,
) -> Result<Certificate> {
    let part = bad_partition(src, e, x, p)?;
    let n = e.n();
    let m = e.m();
    let pigeonhole = 2f64.powi((n - m) as i32);
    Ok(Certificate {
        n,
        m,
        x: x.clone(),
        params: p,
        z: part.image.z.clone(),
        popular_count: part.image.count,
        low: part.low.len(),
        dependent: part.dependent.len(),
        neither: part.neither.len(),
        bound: part.image.count as i64 - part.low.len() as i64 - part.neither.len() as i64,
        valid: part.neither.is_empty(),
        pigeonhole,
        asymptotic_form: pigeonhole - 2f64.powf(p.s as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::complexity::Lab;
    use crate::depsets::{dep_set_b, DepParams};

    const T: u64 = 4096;

    #[test]
    fn constant_table() {
        let e = ExtractorTable::constant(4, 2, 0).unwrap();
        let img = most_popular_image(&e, &bs("0101")).unwrap();
        assert_eq!(img.z, bs("00"));
        assert_eq!(img.count, 16);
        assert_eq!(img.preimages, Bitstring::all(4).collect::<Vec<_>>());
    }

    #[test]
    fn pigeonhole_and_tie_break() {
        // each z ∈ {0,1}^2 gets exactly 4 of the 16 y values
        let e = ExtractorTable::from_fn(4, 2, |_, y| y & 3).unwrap();
        let img = most_popular_image(&e, &bs("1111")).unwrap();
        assert_eq!((img.z.clone(), img.count), (bs("00"), 4));
        for seed in 0..10 {
            let e = make_random_extractor(4, 2, seed).unwrap();
            for x in Bitstring::all(4) {
                assert!(most_popular_image(&e, &x).unwrap().count >= 4);
            }
        }
    }

    #[test]
    fn seeded_tables_reproduce() {
        let a = make_random_extractor(5, 3, 42).unwrap();
        assert_eq!(a, make_random_extractor(5, 3, 42).unwrap());
        assert_ne!(a, make_random_extractor(5, 3, 43).unwrap());
        assert_eq!(a.entry_count(), 1 << 10);
    }

    #[test]
    fn histogram_is_roughly_uniform() {
        let e = make_random_extractor(8, 2, 1).unwrap();
        let (stat, df) = e.chi_square();
        assert_eq!(df, 3);
        assert!(stat < 30.0, "chi-square {stat}");
    }

    #[test]
    fn blob_roundtrip_and_files() {
        let e = make_random_extractor(4, 3, 9).unwrap();
        let back = ExtractorTable::from_blob(e.meta.clone(), &e.to_blob()).unwrap();
        assert_eq!(back.entries, e.entries);
        assert!(ExtractorTable::from_blob(e.meta.clone(), &e.to_blob()[1..]).is_err());

        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("e");
        e.save(&stem, false).unwrap();
        assert!(!stem.with_extension("bin").exists());
        assert_eq!(ExtractorTable::load(&stem).unwrap(), e);

        let explicit = ExtractorTable::from_fn(3, 1, |x, y| (x ^ y) & 1).unwrap();
        explicit.save(&stem, false).unwrap();
        assert_eq!(ExtractorTable::load(&stem).unwrap(), explicit);
    }

    #[test]
    fn partition_is_exact_and_certificate_sound() {
        let lab = Lab::default();
        let e = make_random_extractor(4, 2, 3).unwrap();
        for x in Bitstring::all(4) {
            for (s, alpha) in [(0, 0), (2, 1), (4, 2)] {
                let p = CountParams { s, alpha, t: T };
                let part = bad_partition(&lab, &e, &x, p).unwrap();
                let mut joined: Vec<Bitstring> = part
                    .low
                    .iter()
                    .chain(&part.dependent)
                    .chain(&part.neither)
                    .cloned()
                    .collect();
                joined.sort();
                assert_eq!(joined, part.image.preimages);
                if s == 0 {
                    assert!(part.low.is_empty());
                }
                let b = dep_set_b(&lab, &x, DepParams::new(4, alpha, T)).unwrap();
                assert!(part.dependent.iter().all(|y| b.contains(y)));
                let cert = lower_bound_certificate(&lab, &e, &x, p).unwrap();
                assert!(cert.bound <= b.size() as i64);
                assert_eq!(cert.bound, cert.dependent as i64);
            }
        }
    }

    #[test]
    fn dimensions_checked() {
        assert!(make_random_extractor(4, 5, 0).is_err());
        assert!(ExtractorTable::from_fn(2, 1, |_, _| 2).is_err());
    }
}
