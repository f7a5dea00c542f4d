pub mod combinat;
pub mod error;
pub mod gauss_mc;
pub mod geometry;
pub mod gluskin;
pub mod maurey;
pub mod optim;
pub mod params;
pub mod rng;
pub mod sparse_l1;
pub mod suppression;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cross-polytopes.md")]
    mod cross_polytopes {}
    #[doc = include_str!("../../../book/src/sparse-representations.md")]
    mod sparse_representations {}
    #[doc = include_str!("../../../book/src/gaussian-measure.md")]
    mod gaussian_measure {}
    #[doc = include_str!("../../../book/src/maurey.md")]
    mod maurey {}
    #[doc = include_str!("../../../book/src/suppression.md")]
    mod suppression {}
    #[doc = include_str!("../../../book/src/gluskin.md")]
    mod gluskin {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
