//! Exterior powers, integer lattices and shortest vectors.

mod intlin;
mod lattice;
mod matrix;
mod multivector;

pub use intlin::{is_primitive, laplace_gram, primitive_dual, saturation_index, IntCollection};
pub use lattice::{
    for_each_short, in_k_eps, lll_gram, minkowski_short, minkowski_short_mapped, shortest_in_span, shortest_vector,
    shortest_vector_exact, shortest_vector_interval, LatticeScalar, ShortVector,
};
pub use matrix::SquareMap;
pub use multivector::{index_sets, MultiVector, MultiVectorRepr, MAX_DIM};
