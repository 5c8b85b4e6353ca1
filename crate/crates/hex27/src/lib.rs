//! Conforming all-hexahedral meshing of adaptive 27-tree grids.
//!
//! An adaptive 27-tree refines cells 3x3x3. After balancing (neighbour depth
//! difference at most one across faces and edges), every coarse-fine
//! transition is resolved by a transition template: a small all-hex
//! decomposition of the unit cube whose boundary quadrangulation is fixed per
//! face by a shared catalogue of face patterns, so adjacent cells always agree
//! on their common face.
//!
//! Two engines are provided. The vertex engine marks grid vertices incident
//! to deeper neighbours and picks templates per vertex-mark class; the edge
//! engine marks cell edges directly and meshes per edge-mark class, followed
//! by an optional greedy pass that coarsens marks where that reduces the hex
//! count. Both produce conforming meshes with strictly convex, planar-faced
//! elements on an exact integer lattice.

pub mod balance;
pub mod grid;
pub mod hexmesh;
pub mod io;
pub mod scheme;
pub mod stats;
pub mod symmetry;
pub mod tmpl;
pub mod tmpl_edge;
pub mod tmpl_vertex;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("balance violation: {0}")]
    Balance(String),
    #[error("mesh defect: {0}")]
    Mesh(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
