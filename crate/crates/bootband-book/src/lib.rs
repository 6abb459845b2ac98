//! Runnable mirror of the guide in `book/`.
//!
//! Each chapter is included verbatim as the documentation of an empty
//! module, so `cargo test -p bootband-book` compiles and runs every example
//! the guide shows. Editing a chapter without keeping its code working fails
//! the build instead of the reader.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/kernels-and-local-models.md")]
pub mod kernels_and_local_models {}

#[doc = include_str!("../../../book/src/multiplier-bootstrap.md")]
pub mod multiplier_bootstrap {}

#[doc = include_str!("../../../book/src/monte-carlo-oracle.md")]
pub mod monte_carlo_oracle {}

#[doc = include_str!("../../../book/src/modeling-bias.md")]
pub mod modeling_bias {}

#[doc = include_str!("../../../book/src/running-experiments.md")]
pub mod running_experiments {}
