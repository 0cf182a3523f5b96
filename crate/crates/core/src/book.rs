//! Guide chapters compiled as doc-tests so their snippets stay in sync.

#[doc = include_str!("../../../book/src/intro.md")]
mod intro {}
#[doc = include_str!("../../../book/src/cones.md")]
mod cones {}
#[doc = include_str!("../../../book/src/iteration.md")]
mod iteration {}
#[doc = include_str!("../../../book/src/linear_systems.md")]
mod linear_systems {}
#[doc = include_str!("../../../book/src/scaling.md")]
mod scaling {}
#[doc = include_str!("../../../book/src/termination.md")]
mod termination {}
#[doc = include_str!("../../../book/src/generators.md")]
mod generators {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
