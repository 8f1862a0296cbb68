//! Gauge integration, product measures on infinite-dimensional box sets and
//! Kuelbs-Steadman `K^p` norms.
//!
//! Modules build on each other bottom-up:
//!
//! - [`gauge`]: Henstock-Kurzweil integration on an interval and nested
//!   quadrature on boxes.
//! - [`box_measure`]: box sets `A x J_n`, the product measure and the
//!   shrinking `j_k` family.
//! - [`tame`]: essentially tame functions and Schauder-basis norms.
//! - [`kp`]: the dyadic duality family and the `K^p` norms and `K^2` inner
//!   product.
//! - [`infinite`]: integrals over the infinite product as limits of tame
//!   approximants.
//! - [`fourier`]: Fourier transform of tame functions with the sinc tail.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod box_measure;
pub mod error;
pub mod fourier;
pub mod gauge;
pub mod infinite;
pub mod interval;
pub mod kp;
mod quadrature;
pub mod summation;
pub mod tame;

pub use box_measure::{BoxSet, ElementaryProduct, MeasureValue, TailFamily};
pub use error::{Error, Result};
pub use fourier::{FourierValue, FrequencyPoint};
pub use gauge::{Gauge, HkOptions, IntegralResult, NdOptions, TaggedCell, TaggedPartition};
pub use infinite::{ConvergenceReport, TailMeasureConfig};
pub use interval::Interval;
pub use kp::{DualityFamily, Exponent, KpConfig, KpIntegrand, NormResult, WeightSequence};
pub use tame::{BasisOracle, CoordinateVector, TameFunction};
