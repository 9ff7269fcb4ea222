//! Genus expansion of perturbed-GUE multi-matrix models, computed three
//! independent ways and cross-validated:
//!
//! * [`mapenum`] — exact enumeration of colored maps built by gluing stars,
//!   genus via Euler's formula, and exact finite-N Gaussian moments from
//!   Wick pairings;
//! * [`sdsolver`] — order-by-order solution of the Schwinger-Dyson
//!   hierarchy: the planar master field, the genus corrections at every
//!   tensor arity, free energies, and derivative expansions, all as exact
//!   truncated power series;
//! * [`matmodel`] — the finite-N side: Metropolis-adjusted Langevin sampling
//!   of the perturbed ensemble, exact small-N quadrature, and regression of
//!   1/N^2 coefficients against the solver.
//!
//! [`ncpoly`] supplies the exact non-commutative polynomial algebra
//! (derivatives, norms, and the Xi operators) underneath all of it.

pub mod error;
pub mod mapenum;
pub mod matmodel;
pub mod ncpoly;
pub mod scalar;
pub mod sdsolver;
pub mod series;

pub use error::{Error, Result};
pub use ncpoly::{Monomial, Polynomial, Potential};
pub use series::{MultiIndex, TruncatedSeries};
