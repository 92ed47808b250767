//! Statistics of zeros of random polynomials on complex projective space.
//!
//! The crate builds the spaces of degree-N polynomial sections of the
//! hyperplane bundle over CP^m with their natural L^2 structure, samples
//! the classical random ensembles, locates all zeros, and packages the
//! measurements of how those zeros distribute: expected distributions
//! against curvature, variance decay in the degree, almost-sure
//! equidistribution along sequences, orthonormal-basis averages and the
//! Cesaro ergodic statistic, Szego-type Toeplitz trace limits and Haar
//! orbit integrals, and Bezout-complete simultaneous zeros on CP^2.
//!
//! Modules follow that decomposition:
//!
//! - [`projective`]: points, charts, uniform sampling and quadrature;
//! - [`sections`]: monomial orthonormal bases, section norms, random
//!   models;
//! - [`bergman`]: perturbed metrics on CP^1 and their numerically
//!   orthonormalized bases and densities;
//! - [`roots`] / [`zeros`]: the Aberth-Ehrlich solver and zero-current
//!   pairings (root-based and through the Poincare-Lelong formula);
//! - [`cp2`]: resultant-based simultaneous zeros of section pairs;
//! - [`toeplitz`]: compressed multiplication operators, spectra, Haar
//!   unitaries, orbit functionals and sphere-correlation scans;
//! - [`experiments`]: the seeded, block-parallel statistical experiments
//!   and density-one subsequence extraction;
//! - [`rng`] / [`stats`]: derived random streams and the small
//!   statistics toolbox.
//!
//! All sampling takes explicit generators derived from `(seed, stream)`,
//! and every experiment reduces its blocks in a fixed order, so results
//! are reproducible bit-for-bit regardless of thread count.

pub mod bergman;
pub mod cp2;
pub mod error;
pub mod experiments;
pub mod projective;
pub mod rng;
pub mod roots;
pub mod sections;
pub mod stats;
pub mod testfn;
pub mod toeplitz;
pub mod zeros;

pub use error::{Error, Result};
