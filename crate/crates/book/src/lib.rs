//! The guide in `book/` as doc-tests: each chapter becomes the docs of an
//! empty module, so `cargo test` runs every snippet.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/network.md")]
pub mod network {}
#[doc = include_str!("../../../book/src/feedback.md")]
pub mod feedback {}
#[doc = include_str!("../../../book/src/feasibility.md")]
pub mod feasibility {}
#[doc = include_str!("../../../book/src/profile.md")]
pub mod profile {}
#[doc = include_str!("../../../book/src/transceivers.md")]
pub mod transceivers {}
#[doc = include_str!("../../../book/src/quantization.md")]
pub mod quantization {}
#[doc = include_str!("../../../book/src/throughput.md")]
pub mod throughput {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
