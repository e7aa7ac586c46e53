//! Exact computations for edge correlations in the random cluster model.
//!
//! A [`Multigraph`] with two marked edges `e, f` determines the correlation
//! polynomial `M_ef(q)` ([`cluster::m_poly`]). The [`paracel`] module builds
//! the combinatorial expansion of `M_ef(1)`, [`ust`] examines the lowest
//! power of `q`, and [`ansatz`] checks quadratic-form decompositions of
//! `M_ef(q)/q²`.

mod dsu;

pub mod ansatz;
pub mod cluster;
pub mod harness;
pub mod instances;
pub mod multigraph;
pub mod paracel;
pub mod polyring;
pub mod rng;
pub mod ust;

pub use multigraph::{parse_graph, EdgeSet, GraphError, Multigraph, Universe};
pub use polyring::{MPoly, PolyError, QPoly, Rational};
