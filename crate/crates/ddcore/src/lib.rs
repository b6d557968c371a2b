//! Data-driven representations of LTI systems built from input-output data
//! matrices.
//!
//! The core object is the one-step predictor obtained by multiplying the
//! future-output block of a Hankel data matrix with the (truncated)
//! Moore-Penrose inverse of the past-data block. Run recursively, that
//! predictor is a dynamic representation of the underlying system whose
//! extra ("latent") poles are guaranteed stable. The crate covers:
//!
//! * [`matpoly`]: dense linear algebra (SVD, truncated pseudoinverses,
//!   eigenvalues, discrete Lyapunov) and real polynomial arithmetic,
//! * [`lti`]: state-space models, ZOH discretization, per-output transfer
//!   rows and the benchmark plants,
//! * [`datagen`]: trajectory simulation, Hankel blocks, excitation and
//!   rank checks, noise injection,
//! * [`ddrep`]: the data-driven representation itself,
//! * [`latentoracle`]: an independent optimization oracle for the latent
//!   polynomial,
//! * [`realization`]: the non-minimal state-space realization over the
//!   stacked past-window state with detectability/stabilizability tests,
//! * [`lqr`]: output-feedback LQR synthesis and H2 evaluation,
//! * [`inversion`]: L-delay data-driven inversion and the disturbance
//!   observer loop.

pub mod datagen;
pub mod ddrep;
pub mod error;
pub mod inversion;
pub mod latentoracle;
pub mod lqr;
pub mod lti;
pub mod matpoly;
pub mod realization;

pub use error::{Error, Result};
