pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod quad;
pub mod simulate;
pub mod special;
pub mod msd;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use kernel::{MemoryKernel, RegimeTag};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/msd.md")]
    mod msd {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
