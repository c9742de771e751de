//! Two-sample testing for populations of geometric objects.
//!
//! Each object (a point cloud or a distance matrix) is turned into a
//! persistence barcode by a Vietoris–Rips filtration. Barcodes are then
//! mapped into the ordered cone `{x : x_1 <= ... <= x_d}` by sorting their
//! tropical coordinates, the max-plus polynomials
//! `T^(i,j) = Γ[(0,1)^i, (1,1)^j]` evaluated on `(min(b, mℓ), ℓ)` pairs.
//! Finally an energy statistic with a permutation null decides whether the
//! two populations differ.
//!
//! The stages live in separate modules and can be used on their own:
//!
//! * [`synthgeo`] samples noisy shapes and builds distance matrices.
//! * [`persistence`] builds Rips filtrations, reduces boundary matrices and
//!   computes bottleneck distances.
//! * [`tropical`] evaluates tropical coordinates and sorted embeddings.
//! * [`twosample`] holds the energy statistic and permutation test.
//! * [`pipeline`] wires everything together and handles file formats.

pub mod error;
pub mod io;
mod par;
pub mod persistence;
pub mod pipeline;
pub mod synthgeo;
pub mod tropical;
pub mod twosample;

pub use error::{Error, Result};
pub use persistence::{Bar, Barcode, EssentialPolicy, Filtration, Matching};
pub use synthgeo::{DistanceMatrix, PointCloud, ShapeKind, ShapeSpec};
pub use tropical::{OrbitIndex, RegularizationParam, SortedEmbedding, TropicalEmbedding};
pub use twosample::{Sample, TestResult};

/// Crate version, echoed into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
