//! Quaternion graph neural networks (QGNN) and a real-valued GCN baseline.
//!
//! The crate is a self-contained CPU engine: quaternion algebra, sparse
//! graph convolutions, a tape-based reverse-mode gradient engine with a
//! finite-difference verifier, dataset loaders (TU graph datasets,
//! citation networks, text-as-graph corpora), and the training protocols
//! for graph, node, and text classification.
//!
//! All arithmetic is `f64`. Values and layers are immutable during a
//! forward/backward pass; parameter updates happen between steps.

pub mod autograd;
pub mod cli;
pub mod config;
pub mod datasets;
pub mod error;
pub mod graphcore;
pub mod layers;
pub mod model;
pub mod qalg;
pub mod trainer;

pub use error::Error;

/// Centralized numeric tolerances.
pub mod tol {
    /// Max absolute error accepted for quaternion algebra identities (f64).
    pub const ALGEBRA: f64 = 1e-12;
    /// Max relative error accepted when checking analytic gradients
    /// against central finite differences.
    pub const GRADIENT: f64 = 1e-4;
    /// Max absolute error for layer-forward equivalence checks against
    /// dense reference computations.
    pub const FORWARD: f64 = 1e-10;
}

/// Dense real matrix used throughout the crate.
pub type Mat = ndarray::Array2<f64>;
