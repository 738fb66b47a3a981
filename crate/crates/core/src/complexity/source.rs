use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{cache_file_name, read_table, write_table};
use super::{build_table, ComplexityTable, DEFAULT_CAP_SLACK, DEFAULT_WORK_CEILING};
use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::machine::program_count;

/// Everything a table's values depend on besides the machine version.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableKey {
    pub n: usize,
    pub condition: Bitstring,
    pub budget: u64,
    pub length_cap: usize,
}

/// Where operations get their complexity tables from.
pub trait TableSource: Sync {
    fn table(&self, n: usize, condition: &Bitstring, budget: u64) -> Result<Arc<ComplexityTable>>;
}

/// A fixed collection of prebuilt tables. Missing tables are an error.
#[derive(Debug, Default, Clone)]
pub struct TableSet {
    tables: HashMap<(usize, Bitstring, u64), Arc<ComplexityTable>>,
}

impl TableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table: ComplexityTable) {
        self.tables.insert(
            (table.n, table.condition.clone(), table.budget),
            Arc::new(table),
        );
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

impl TableSource for TableSet {
    fn table(&self, n: usize, condition: &Bitstring, budget: u64) -> Result<Arc<ComplexityTable>> {
        self.tables
            .get(&(n, condition.clone(), budget))
            .cloned()
            .ok_or_else(|| Error::TableRequired {
                n,
                condition: condition.clone(),
                budget,
            })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabConfig {
    /// `length_cap = n + cap_slack`.
    pub cap_slack: usize,
    pub work_ceiling: f64,
    pub cache_dir: Option<PathBuf>,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            cap_slack: DEFAULT_CAP_SLACK,
            work_ceiling: DEFAULT_WORK_CEILING,
            cache_dir: None,
        }
    }
}

/// Builds tables on demand, memoizes them, and optionally persists them to a
/// cache directory.
#[derive(Debug)]
pub struct Lab {
    config: LabConfig,
    tables: Mutex<HashMap<TableKey, Arc<ComplexityTable>>>,
    programs_run: AtomicU64,
    cache_rejections: AtomicU64,
}

impl Default for Lab {
    fn default() -> Self {
        Self::new(LabConfig::default())
    }
}

impl Lab {
    pub fn new(config: LabConfig) -> Self {
        Self {
            config,
            tables: Mutex::new(HashMap::new()),
            programs_run: AtomicU64::new(0),
            cache_rejections: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &LabConfig {
        &self.config
    }

    pub fn length_cap(&self, n: usize) -> usize {
        n + self.config.cap_slack
    }

    pub fn key(&self, n: usize, condition: &Bitstring, budget: u64) -> TableKey {
        TableKey {
            n,
            condition: condition.clone(),
            budget,
            length_cap: self.length_cap(n),
        }
    }

    /// Programs executed by table builds so far; zero when every request was
    /// served from memory or disk.
    pub fn programs_run(&self) -> u64 {
        self.programs_run.load(Ordering::Relaxed)
    }

    /// Cache files found but not used (corrupt, truncated, or mismatched).
    pub fn cache_rejections(&self) -> u64 {
        self.cache_rejections.load(Ordering::Relaxed)
    }

    /// Keys of all tables currently held, sorted.
    pub fn provenance(&self) -> Vec<TableKey> {
        let mut keys: Vec<TableKey> = self.tables.lock().unwrap().keys().cloned().collect();
        keys.sort_by(|a, b| {
            (a.n, &a.condition, a.budget, a.length_cap).cmp(&(
                b.n,
                &b.condition,
                b.budget,
                b.length_cap,
            ))
        });
        keys
    }

    /// Builds every `(n, w)` table for the given conditions in parallel.
    pub fn prefetch<'a>(
        &self,
        n: usize,
        conditions: impl IntoIterator<Item = &'a Bitstring>,
        budget: u64,
    ) -> Result<()> {
        let conds: Vec<&Bitstring> = conditions.into_iter().collect();
        conds
            .par_iter()
            .try_for_each(|w| self.table(n, w, budget).map(|_| ()))
    }

    pub fn prefetch_all_conditions(&self, n: usize, budget: u64) -> Result<()> {
        let all: Vec<Bitstring> = Bitstring::all(n).collect();
        self.prefetch(n, all.iter(), budget)
    }

    fn load_cached(&self, key: &TableKey) -> Option<ComplexityTable> {
        let dir = self.config.cache_dir.as_ref()?;
        let path = dir.join(cache_file_name(key));
        if !path.exists() {
            return None;
        }
        match read_table(&path) {
            Ok(t) if t.key() == *key => Some(t),
            Ok(t) => {
                log::warn!(
                    "cache file {} holds {:?}, expected {:?}; rebuilding",
                    path.display(),
                    t.key(),
                    key
                );
                self.cache_rejections.fetch_add(1, Ordering::Relaxed);
                None
            }
            Err(e) => {
                log::warn!("cache file {} rejected ({e}); rebuilding", path.display());
                self.cache_rejections.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    fn load_or_build(&self, key: &TableKey) -> Result<ComplexityTable> {
        if let Some(t) = self.load_cached(key) {
            return Ok(t);
        }
        let t = build_table(
            key.n,
            &key.condition,
            key.budget,
            key.length_cap,
            self.config.work_ceiling,
        )?;
        self.programs_run
            .fetch_add(program_count(key.length_cap), Ordering::Relaxed);
        if let Some(dir) = &self.config.cache_dir {
            write_table(&dir.join(cache_file_name(key)), &t)?;
        }
        Ok(t)
    }
}

impl TableSource for Lab {
    fn table(&self, n: usize, condition: &Bitstring, budget: u64) -> Result<Arc<ComplexityTable>> {
        let key = self.key(n, condition, budget);
        if let Some(t) = self.tables.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let built = Arc::new(self.load_or_build(&key)?);
        let mut tables = self.tables.lock().unwrap();
        Ok(tables.entry(key).or_insert(built).clone())
    }
}
