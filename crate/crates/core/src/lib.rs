//! Microwave imaging of scatterers inside a lossy, dispersive cylinder by
//! phase-shift-and-sum, with delay-based baselines and a forward simulator
//! for test data. The guide in `book/` walks through each module.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dielectric;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod metrics;
pub mod raypath;
pub mod reconstruct;
pub mod signal;

pub use error::{Error, Result};
pub use geometry::{Footprint, GridSpec, Point};

// The guide's code blocks run as doctests so they stay in step with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/media.md")]
    mod media {}
    #[doc = include_str!("../../../book/src/ray-paths.md")]
    mod ray_paths {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/signals.md")]
    mod signals {}
    #[doc = include_str!("../../../book/src/forward.md")]
    mod forward {}
    #[doc = include_str!("../../../book/src/imaging.md")]
    mod imaging {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/limitations.md")]
    mod limitations {}
}
