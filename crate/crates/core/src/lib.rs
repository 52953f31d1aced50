//! Exact and certified-numeric machinery for regularity (divergence)
//! experiments with finitely generated subgroups of `SL_d(R)`, `d = 3, 4`.
//!
//! The crate is `no_std` (it needs `alloc`). The optional `parallel`
//! feature pulls in `std` and rayon for sphere statistics and grid checks.
//!
//! Module map:
//!
//! * [`matrix`], [`word`], [`svd`]: exact rational matrices, free-group
//!   words, and certified singular values / Cartan projections.
//! * [`flag`]: projective points, hyperplanes, point-hyperplane flags and
//!   the Fubini-Study metric.
//! * [`scan`]: word balls, `sigma1/sigma2` statistics, contracting
//!   subsequences and limit-set samples.
//! * [`z2`]: the unipotent `Z^2` decision procedure with explicit
//!   non-regularity witnesses.
//! * [`pingpong`]: proximality, set-inclusion checks and free-product
//!   certificates.
#![cfg_attr(not(feature = "parallel"), no_std)]

extern crate alloc;

pub mod error;
pub mod flag;
pub mod matrix;
pub mod pingpong;
pub mod poly;
pub mod rational;
pub mod scan;
pub mod svd;
pub mod word;
pub mod z2;

mod dense;
mod par;

pub use error::{Error, Result};
pub use matrix::RationalMatrix;
pub use rational::Rational;
pub use word::{GroupWord, Generators};
