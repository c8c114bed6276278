//! Detecting strata in point clouds from how neighbourhood counts grow with
//! radius.

mod cloud;
pub mod cluster;
pub mod embed;
pub mod generate;
pub mod neighbors;
pub mod vgt;

use thiserror::Error;

pub use cloud::{euclid, labels_from_csv, labels_to_csv, IndexedTable, LabeledCloud, PointCloud};
pub use cluster::{agglomerative, kmeans, purity, KMeans, Linkage};
pub use embed::{dct_project, isomap_lite, Embedding};
pub use generate::{gen_circle, gen_half_cylinder, gen_hourglass, gen_room_corridor, gen_segment_tube, gen_square};
pub use neighbors::{ball_count, GridIndex};
pub use vgt::{
    dic_feature, informative_start, local_dim_ls, local_dims, two_nn_dim, vgt, vgt_all, vgt_dot, vgt_dot_features,
    vgt_dot_features_trimmed, FeatureMatrix,
    RadiusGrid, TwoNn, VgtCurve,
};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("empty-cloud: need at least one point with at least one coordinate")]
    EmptyCloud,
    #[error("width-mismatch: row {row} has {got} values, expected {expected}")]
    WidthMismatch { row: usize, got: usize, expected: usize },
    #[error("non-finite: row {row}")]
    NonFinite { row: usize },
    #[error("index-out-of-range: {index} not below {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty-grid")]
    EmptyGrid,
    #[error("curve-too-short: {0} samples, need 5")]
    CurveTooShort(usize),
    #[error("degenerate-window: {0}")]
    DegenerateWindow(String),
    #[error("duplicate-points: point {0} coincides with its nearest neighbour")]
    DuplicatePoints(usize),
    #[error("not-enough-points: need {need}, got {got}")]
    NotEnoughPoints { need: usize, got: usize },
    #[error("k-too-large: k = {k} with {n} rows")]
    KTooLarge { k: usize, n: usize },
    #[error("graph-disconnected: {components} components")]
    GraphDisconnected { components: usize },
    #[error("d_out-too-large: {d_out} exceeds {dim}")]
    DOutTooLarge { d_out: usize, dim: usize },
    #[error("bad-parameters: {0}")]
    BadParameters(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}
