//! Maximum-weight clique search for molecular docking, seeded by samples from
//! a graph-programmed Gaussian boson sampler.
//!
//! Pipeline: pharmacophore points ([`docking`]) become a vertex-weighted
//! binding-interaction graph ([`graphs`]); the graph is encoded into a
//! Gaussian state ([`gbs`]); click patterns drawn from it ([`samplers`]) seed
//! classical clique heuristics ([`solvers`]). [`harness`] reproduces the
//! benchmark experiments.

pub mod docking;
pub mod error;
pub mod gbs;
pub mod graphs;
pub mod harness;
pub mod samplers;
pub mod solvers;

pub use error::{Error, ErrorClass, Result};
pub use graphs::{VertexSet, WeightedGraph};
