//! Lossy geometry codec for triangle meshes.
//!
//! Vertex coordinates are represented as sparse combinations of eigenvectors
//! of `L + mu*V`, where `L` is the combinatorial graph Laplacian of the mesh
//! and `V` is a diagonal ramp potential placed on error-sorted vertices.
//! The mesh is partitioned into blocks of a few hundred vertices which are
//! coded independently; coefficients are selected jointly across the X/Y/Z
//! channels by simultaneous orthogonal matching pursuit.
//!
//! Entry points: [`codec::encode`] / [`codec::decode`] for the container
//! format, [`sweep::run_sweep`] for rate-distortion tables, and the
//! `examples/` directory for one runnable program per capability.

pub mod mesh;
pub mod graph;
pub mod eigen;
pub mod spectral;
pub mod sparse;
pub mod metrics;
pub mod synth;
pub mod codec;
pub mod sweep;
pub mod cli;

pub use mesh::Mesh;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("container format error: {0}")]
    Format(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 usage/config, 2 I/O, 3 format, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io { .. } => 2,
            Error::Parse { .. } | Error::Format(_) => 3,
            Error::Numerical(_) => 4,
        }
    }
}
