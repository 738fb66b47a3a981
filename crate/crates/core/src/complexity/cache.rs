//! Binary table cache.
//!
//! Layout (little-endian integers):
//!
//! | field            | size                          |
//! |------------------|-------------------------------|
//! | magic `AITLAB01` | 8                             |
//! | machine version  | 16 ASCII                      |
//! | n                | u16                           |
//! | budget           | u64                           |
//! | length_cap       | u8                            |
//! | condition length | u16 (bits)                    |
//! | condition bits   | MSB-first, padded to a byte   |
//! | values           | `2^n` bytes, 255 = undefined  |

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ComplexityTable, TableKey, MAX_TABLE_N};
use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::machine;

pub const MAGIC: &[u8; 8] = b"AITLAB01";

/// File name used for a table inside a cache directory.
pub fn cache_file_name(key: &TableKey) -> String {
    format!(
        "n{}_t{}_cap{}_c{}_{}.tbl",
        key.n,
        key.budget,
        key.length_cap,
        key.condition.len(),
        hex::encode(key.condition.to_packed_bytes())
    )
}

pub fn encode_table(table: &ComplexityTable) -> Result<Vec<u8>> {
    let version = table.machine_version.as_bytes();
    if version.len() != 16 {
        return Err(Error::Cache(format!(
            "machine version {:?} is not 16 bytes",
            table.machine_version
        )));
    }
    let cond_len = u16::try_from(table.condition.len())
        .map_err(|_| Error::Cache("condition longer than 65535 bits".into()))?;
    let mut buf = Vec::with_capacity(64 + table.values().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(version);
    buf.extend_from_slice(&(table.n as u16).to_le_bytes());
    buf.extend_from_slice(&table.budget.to_le_bytes());
    buf.push(table.length_cap);
    buf.extend_from_slice(&cond_len.to_le_bytes());
    buf.extend_from_slice(&table.condition.to_packed_bytes());
    buf.extend_from_slice(table.values());
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + k > self.buf.len() {
            return Err(Error::Cache(format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }
}

/// Parses a cache image and rejects tables from another machine version.
pub fn decode_table(buf: &[u8]) -> Result<ComplexityTable> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = std::str::from_utf8(r.take(16, "machine version")?)
        .map_err(|_| Error::Cache("machine version is not ASCII".into()))?
        .to_string();
    if version != machine::version_id() {
        return Err(Error::Cache(format!(
            "machine version {version} does not match {}",
            machine::version_id()
        )));
    }
    let n = u16::from_le_bytes(r.take(2, "n")?.try_into().unwrap()) as usize;
    if n == 0 || n > MAX_TABLE_N {
        return Err(Error::Cache(format!("implausible n = {n}")));
    }
    let budget = u64::from_le_bytes(r.take(8, "budget")?.try_into().unwrap());
    let length_cap = r.take(1, "length_cap")?[0];
    let cond_len = u16::from_le_bytes(r.take(2, "condition length")?.try_into().unwrap()) as usize;
    let cond_bytes = r.take(cond_len.div_ceil(8), "condition")?;
    let condition = Bitstring::from_packed_bytes(cond_bytes, cond_len)
        .ok_or_else(|| Error::Cache("condition bits truncated".into()))?;
    let values = r.take(1 << n, "values")?.to_vec();
    if r.pos != buf.len() {
        return Err(Error::Cache(format!(
            "{} trailing bytes",
            buf.len() - r.pos
        )));
    }
    Ok(ComplexityTable::from_parts(
        n, condition, budget, length_cap, version, values,
    ))
}

pub fn write_table(path: &Path, table: &ComplexityTable) -> Result<()> {
    let bytes = encode_table(table)?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    // write-then-rename so a crash never leaves a half-written cache file
    let tmp = path.with_extension("tbl.tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<ComplexityTable> {
    decode_table(&fs::read(path)?)
}
