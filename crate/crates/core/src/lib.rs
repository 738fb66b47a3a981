//! A laboratory for counting dependent and independent strings under exact
//! time-bounded Kolmogorov complexity.
//!
//! All complexity values are relative to one fixed machine ([`machine`]) and
//! computed exhaustively ([`complexity`]). The remaining modules build the
//! dependency sets, independence structures, covers and extractor counting
//! certificates on top of those tables.

pub mod bits;
pub mod codec;
pub mod complexity;
pub mod covering;
pub mod depsets;
pub mod error;
pub mod extractor;
pub mod independence;
pub mod machine;
pub mod selftest;

pub use bits::Bitstring;
pub use error::{Error, Result};
