//! Discretization, contingency tables and entropy-based association measures.
//!
//! Entropies are in bits. The re-scaled conditional entropy
//! `E(X|Y) = H(X|Y) / H(X)` is 0 when Y determines X and 1 when Y carries no
//! information about X; the mutual version averages both directions.

mod association;
mod contingency;
mod discretize;
mod network;

pub use association::{association_matrices, matrix_csv, AssociationMatrices};
pub use contingency::{
    conditional_entropy, contingency, entropy, entropy_of_counts, joint_entropy, mutual_ce,
    mutual_information, odds_ratio, rescaled_ce, ContingencyTable, Direction, OddsRatio,
};
pub use discretize::{
    apply_edges, discretize, discretize_table, BinWarning, Binned, CategoricalMatrix, NA_CATEGORY,
};
pub use network::{threshold_network, Edge, Network, Which};
