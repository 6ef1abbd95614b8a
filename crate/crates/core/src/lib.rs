//! Numerical discrete potential theory on finitely generated groups.

// `!(p > 1.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cayley;
pub mod dirichlet;
pub mod error;
pub mod experiment;
pub mod function;
pub mod geometry;
pub mod group;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/functions.md")]
    mod functions {}
    #[doc = include_str!("../../../book/src/capacity.md")]
    mod capacity {}
    #[doc = include_str!("../../../book/src/royden.md")]
    mod royden {}
    #[doc = include_str!("../../../book/src/isoperimetry.md")]
    mod isoperimetry {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
}
