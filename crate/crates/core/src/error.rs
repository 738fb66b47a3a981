use thiserror::Error;

use crate::bits::Bitstring;

#[derive(Error, Debug)]
pub enum Error {
    #[error("no complexity table for n = {n}, condition {condition:?}, budget {budget}")]
    TableRequired {
        n: usize,
        condition: Bitstring,
        budget: u64,
    },
    #[error("refusing job: estimated {estimated} interpreter steps exceeds ceiling {ceiling}")]
    ResourceRefusal { estimated: f64, ceiling: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cache file rejected: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_resource_refusal(&self) -> bool {
        matches!(self, Error::ResourceRefusal { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
