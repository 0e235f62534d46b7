//! The guide in `book/` is written for mdbook, which cannot run listings that
//! depend on an external crate. Each chapter is included here as the docs of
//! an empty module so `cargo test --doc` compiles and runs every listing
//! against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/blocks-and-masks.md")]
pub mod blocks_and_masks {}
#[doc = include_str!("../../../book/src/hashing.md")]
pub mod hashing {}
#[doc = include_str!("../../../book/src/false-positive-model.md")]
pub mod false_positive_model {}
#[doc = include_str!("../../../book/src/sizing.md")]
pub mod sizing {}
#[doc = include_str!("../../../book/src/file-format.md")]
pub mod file_format {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
