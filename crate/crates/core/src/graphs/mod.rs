//! Graph substrates built on the pooled sample: k-NN digraph, MST, shortest
//! Hamiltonian path and minimum-weight perfect matching.
//!
//! Every builder takes a label-free dissimilarity matrix and breaks ties by
//! vertex index, so identical inputs always give identical graphs.

mod blossom;
mod knn;
mod matching;
mod mst;
mod shp;

pub use knn::{knn_digraph, KnnDigraph};
pub use matching::{min_weight_matching, Matching};
pub use mst::{mst, Mst};
pub use shp::{shp, HamPath, PathMethod, ShpMode, EXACT_SHP_MAX};

/// Normalized undirected edge `(min, max)`.
#[inline]
pub(crate) fn undirected(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}
