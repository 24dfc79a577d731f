//! Line fields (nematic director fields) on triangulated surfaces.
//!
//! The crate stores a line field as one doubled angle per face, measures
//! the projective index of every vertex by walking its star, builds the
//! two-sheeted branched cover on which the line field becomes a vector
//! field, and checks the index identities that tie all of this to the
//! Euler characteristic.
//!
//! Module map:
//! - [`mesh`]: combinatorial surfaces, stars, orientability, doubling, OFF I/O
//! - [`connection`]: corner angles, discrete transport, angle defects
//! - [`fields`]: vector/line fields and the four index engines
//! - [`cover`]: sign cocycle, lifting, branched double cover, quotients
//! - [`catalog`]: named meshes and fields
//! - [`verify`] and [`render`]: the check harness and SVG output

pub mod angle;
pub mod catalog;
pub mod connection;
pub mod cover;
pub mod fields;
pub mod mesh;
pub mod prescribe;
pub mod render;
pub mod verify;

pub use connection::{Connection, CornerAngles, MetricMode};
pub use cover::{BranchedCover, SignCocycle};
pub use fields::{DefectReport, LineField, VectorField};
pub use mesh::{Mesh, MeshError};
pub use verify::VerificationReport;
