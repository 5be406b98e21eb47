//! Compiles the guide's code blocks as doctests, one module per chapter.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/streams.md")]
pub mod streams {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sdd.md")]
pub mod sdd {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cover.md")]
pub mod cover {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/matching.md")]
pub mod matching {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/precision.md")]
pub mod precision {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
