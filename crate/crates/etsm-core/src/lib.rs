//! Iterative averaging of similarity matrices.
//!
//! A similarity matrix subjected to repeated per-pair averaging of its
//! column-profile ratios does not homogenize: it splits into exactly two
//! groups, intra-group similarities tending to 1 and inter-group
//! similarities to a common constant Ω. Applied recursively, the split
//! builds an unsupervised binary hierarchy with quantified branch lengths
//! ln(T) and inter-branch angles.
//!
//! The crate provides the dataset layer (CSV ingestion, seeded generators),
//! the R/XR similarity metrics with monomer-matrix hybridization, the
//! iteration engine itself, and hierarchy construction with cophenetic
//! depth tables. All numeric code is generic over the scalar type via
//! [`Real`]; `*64`/`*32` aliases fix the common instantiations.

pub mod dataset;
pub mod error;
pub mod etsm;
pub mod fmt;
pub mod hierarchy;
pub mod matrix;
pub mod scalar;
pub mod similarity;

mod accum;

pub use dataset::{
    benchmark_groups, gen_random, gen_random_with, gen_scatter, load_csv, parse_param_config,
    read_csv, Dataset, MetricKind, ParameterSpec, RandomOptions, ScatterData, ScatterGroup,
};
pub use error::{Error, Result};
pub use etsm::{
    contrast, extract_partition, iterate, iterate_with, transform_step, transform_step_with,
    EtsmConfig, EtsmOutcome, Extraction, IterateOptions, MeanMode, Partition, SelfTerms, Split,
    Trace, TraceRow,
};
pub use hierarchy::{
    build_hierarchy, cophenetic_depth, node_geometry, ClusterInput, CopheneticTable, Hierarchy,
    HierarchyNode, NodeGeometry, TREE_FORMAT_VERSION,
};
pub use matrix::{MatrixKind, SimilarityMatrix};
pub use scalar::Real;
pub use similarity::{
    euclidean_dissimilarity, hybridize, monomer_matrix, pairwise_metric, similarity_matrix,
};

/// Double-precision instantiations.
pub type Dataset64 = Dataset<f64>;
pub type Matrix64 = SimilarityMatrix<f64>;
pub type Config64 = EtsmConfig<f64>;
pub type Outcome64 = EtsmOutcome<f64>;
pub type Hierarchy64 = Hierarchy<f64>;

/// Single-precision instantiations.
pub type Dataset32 = Dataset<f32>;
pub type Matrix32 = SimilarityMatrix<f32>;
pub type Config32 = EtsmConfig<f32>;
pub type Outcome32 = EtsmOutcome<f32>;
pub type Hierarchy32 = Hierarchy<f32>;
