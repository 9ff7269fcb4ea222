//! Finite-N side of the model: exact-gradient Langevin sampling of the
//! perturbed ensemble, convexity validation, batch-means statistics, the
//! N = 1 quadrature oracle, and the 1/N^2 regression against the solver.

pub mod convexity;
pub mod fit;
pub mod matrix;
pub mod pade;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use convexity::{validate_convexity, ConvexityInput, ConvexityReport, StructuredPotential};
pub use fit::{fit_genus_coefficients, GenusFit};
pub use pade::{pade_eval_order, pade_eval_stable};
pub use sampler::{
    check_sd_finite_n, merge_chain_stats, sample_chain, ChainOptions, ChainStats, EnsembleConfig,
    NumPotential, ObservableStats,
};
pub use stats::{autocorrelation_time, batch_means};
