//! K-means fusion of serial feature blocks, Ward.D2 trees, binary leaf codes
//! and the code-similarity heatmap.

mod codes;
mod heatmap;
mod kmeans;
mod ward;

pub use codes::{leaf_codes, LeafCodes};
pub use heatmap::{heatmap_svg, similarity_csv};
pub use kmeans::{
    kmeans, kmeans_fuse, lloyd, standardize, FusedFeature, KMeansFit, KMeansOptions, DEFAULT_K,
    DEFAULT_RESTARTS, MAX_ITERATIONS,
};
pub use ward::{hcluster_ward, ward_d2, HcTree, Merge};
