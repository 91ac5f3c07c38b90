//! morsekit: independence complexes of the circulant bipartite graphs
//! `G_m^d`, the sequential element matching on their face posets, and exact
//! integer homology certifying the resulting wedge-of-spheres homotopy types.
//!
//! The pipeline, end to end:
//! 1. [`graphs`] builds `G_m^d`, cycles, complete bipartite graphs, and
//!    categorical products.
//! 2. [`complex`] enumerates the independence complex as a bitmask face set.
//! 3. [`morse`] runs the per-vertex sequential matching, verifies it is an
//!    acyclic partial matching, and extracts critical cells and the gradient
//!    chain complex.
//! 4. [`theory`] predicts the critical cells and homotopy types in closed
//!    form, independently of the engine.
//! 5. [`homology`] computes reduced integer homology by Smith normal form.
//! 6. [`report`] ties the checks together into machine-readable reports.

pub mod complex;
pub mod graphs;
pub mod homology;
pub mod morse;
pub mod report;
pub mod theory;
