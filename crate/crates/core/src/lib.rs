//! Exact enumeration of flattened k-Stirling permutations.
//!
//! A k-Stirling permutation of order `n` is a word over the multiset
//! `{1^k, ..., n^k}` in which every letter strictly between two consecutive
//! copies of `i` is larger than `i`. It is *flattened* when the leading
//! letters of its weakly increasing runs are themselves weakly increasing.
//!
//! The crate provides:
//!
//! - [`words`]: the word type, validity predicates and per-word statistics.
//! - [`partitions`]: good k-colored set partitions in standard block notation.
//! - [`bijection`]: the map from good k-colored partitions onto flattened
//!   words and its inverse.
//! - [`enumeration`]: lazy exhaustive generators used as ground truth.
//! - [`counting`]: closed forms, recurrences and run-refined counts.
//! - [`series`]: truncated power series over exact rationals and the
//!   generating functions for totals and descents.
//! - [`analysis`]: descent polynomials, unimodality and real-rootedness.
//! - [`oeis`]: b-file client with cache and offline fallback.
//! - [`verify`]: the full cross-validation sweep behind `flatstir verify`.

pub mod analysis;
mod bigser;
pub mod bijection;
pub mod counting;
pub mod enumeration;
mod error;
pub mod oeis;
pub mod partitions;
pub mod poly;
pub mod series;
pub mod verify;
pub mod words;

pub use error::{Error, Result};

pub use analysis::{is_real_rooted, is_unimodal, JointDistribution};
pub use bijection::{phi, phi_inverse};
pub use counting::{CountRow, CountTable, FlattenedCounter};
pub use enumeration::{Budget, DEFAULT_BUDGET};
pub use partitions::{Block, ColoredPartition};
pub use poly::{IntPolynomial, RatPolynomial};
pub use series::{BivariateSeries, RationalSeries, TruncatedSeries};
pub use words::{StirlingWord, WordStats};
