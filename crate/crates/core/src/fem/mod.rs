//! Discrete mixed-dimensional k-form spaces and the operators of the discrete
//! de Rham complex for n = 2.
//!
//! Orientation conventions:
//! * a fracture tangent points from a cell's start vertex to its end vertex,
//!   the fracture normal is the tangent rotated counter-clockwise;
//! * σ = sign(rock outward normal · fracture normal) per rock side;
//! * the 0D jump sign of a fracture endpoint is +1 at its end and −1 at its
//!   start;
//! * RT0 DOFs are facet flux integrals along the stored facet normal (outward
//!   on rock boundaries);
//! * P0 bases are cell indicators, so `B = M_p D` has integer entries.
//!
//! All of these are checked through `D C = 0`.

mod assembly;
mod complex;
mod interp;
mod perm;
mod space;

pub use assembly::{
    assemble_curl, assemble_divergence, assemble_divergence_signed, assemble_mass,
    assemble_regular_laplacian, p1_element_matrices, DivergenceParts, RegularWeights,
    TraceComponent,
};
pub use complex::{complex_report, complex_report_with, polynomial_fields, ComplexReport};
pub use interp::{canonical_interpolation, interpolate_flux, nodal_regular, RegularField};
pub use perm::{PermeabilityField, Tensor2};
pub use space::{DofRecord, Entity, MdSpace, RegularSpace};

use thiserror::Error;

use crate::la::LaError;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid permeability: {0}")]
    Permeability(String),
    #[error("facet {facet} of subdomain {sub} lies inside the domain but is not paired with a fracture")]
    UnpairedFacet { sub: usize, facet: usize },
    #[error("connection {0}: fracture vertices do not coincide with host vertices")]
    Unmatched(usize),
    #[error("space mismatch: {0}")]
    Space(String),
    #[error(transparent)]
    La(#[from] LaError),
}
