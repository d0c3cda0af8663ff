//! Input topology families: uniform random rooted trees pruned to a degree
//! bound, stars, paths and Erdős–Rényi graphs.

mod graph;
mod ranrut;
mod tree;

pub use graph::{gnp, path, shuffled_path, shuffled_star, star, Topology};
pub use ranrut::{
    ranrut, sizes_table, subtree_distribution, RanrutVariant, Split, SubtreeDistribution, TreeCountTable, TreeGenerator,
};
pub use tree::{check_degree_feasible, prune, RootedTree};

pub fn tree_to_topology(tree: &RootedTree) -> Topology {
    tree.to_topology()
}
