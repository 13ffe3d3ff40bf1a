//! Row and column orderings, community detection and propagation paths.

mod louvain;
mod order;
mod paths;

use thiserror::Error;

pub use louvain::{communities_louvain, modularity, Partition};
pub use order::{order_columns, order_rows, ColumnOrder, ColumnStrategy, RowOrder, RowStrategy};
pub use paths::{
    k_shortest_paths, layered_layout, propagation_path, PathResult, PropagationPath, SignedDigraph,
};

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("manual order is not a permutation of {expected} ids")]
    NotAPermutation { expected: usize },

    #[error("unknown entity {0}")]
    UnknownEntity(usize),

    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),

    #[error("partition covers {got} entities, expected {expected}")]
    PartitionMismatch { got: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, LayoutError>;

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(LayoutError::NotAPermutation { expected: n });
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(LayoutError::NotAPermutation { expected: n });
        }
    }
    Ok(())
}
