//! Path-sum view of a zero-bias ReLU network: path enumeration, binary path
//! activities, the output and loss gradient as sums over active paths, and
//! the U-terms and coupling constants built from partial path sums.
//!
//! Everything here enumerates or factorizes over paths and is meant as an
//! exact oracle for small networks, not as a fast evaluator.

pub mod activity;
pub mod coupling;
pub mod output;
pub mod paths;

pub use activity::{heaviside, PathActivityTable};
pub use coupling::{
    compute_u, coupling_adjacent, coupling_ratio, coupling_separated, CouplingConstant, CouplingKind, PathSums,
    UTerm,
};
pub use output::{path_gradient, path_output, WeightId};
pub use paths::{enumerate_paths, path_count, PathSet, DEFAULT_PATH_CAP};
