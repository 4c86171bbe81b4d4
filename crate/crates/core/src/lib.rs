//! Clustering of time-series profiles as Quadratic Unconstrained Binary
//! Optimization.
//!
//! Profiles are turned into a distance matrix or a centered Gaussian-kernel
//! similarity matrix ([`profiles`]), encoded as a one-hot QUBO with a penalty
//! for the assignment constraint ([`qubo`]), minimized by an exact,
//! annealing, or simulated coherent-Ising-machine solver ([`solvers`]) and
//! scored with the silhouette coefficient ([`evaluation`]). [`pipeline`]
//! ties the steps together for the command-line tool.

pub mod evaluation;
pub mod pipeline;
pub mod profiles;
pub mod qubo;
pub mod seed;
pub mod solvers;
pub mod synth;
