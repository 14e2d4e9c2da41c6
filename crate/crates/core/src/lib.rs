//! Numerical semiclassical analysis on the line.

pub mod appendix_wkb;
pub mod bounds;
pub mod error;
pub mod grid;
pub mod numeric;
pub mod pdo;
pub mod selftest;
pub mod states;
pub mod symbols;
pub mod theorem1;
pub mod wavefront;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/coherent_states.md")]
    mod coherent_states {}
    #[doc = include_str!("../../../book/src/quantization.md")]
    mod quantization {}
    #[doc = include_str!("../../../book/src/wavefront.md")]
    mod wavefront {}
    #[doc = include_str!("../../../book/src/centers.md")]
    mod centers {}
    #[doc = include_str!("../../../book/src/wkb.md")]
    mod wkb {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
