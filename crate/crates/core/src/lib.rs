//! Prime gaps, smooth numbers, admissible tuples and the residue-class
//! constructions behind long gaps.
//!
//! A guide with worked examples lives in `book/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod explorer;
pub mod numeric;
pub mod primes;
pub mod rankin;
pub mod smooth;
pub mod tuples;

mod bigint_serde;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/primes.md")]
    mod primes {}
    #[doc = include_str!("../../../book/src/numeric.md")]
    mod numeric {}
    #[doc = include_str!("../../../book/src/smooth.md")]
    mod smooth {}
    #[doc = include_str!("../../../book/src/tuples.md")]
    mod tuples {}
    #[doc = include_str!("../../../book/src/rankin.md")]
    mod rankin {}
    #[doc = include_str!("../../../book/src/explorer.md")]
    mod explorer {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
