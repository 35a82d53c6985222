//! Mixed-dimensional mixed finite elements for Darcy flow in fractured porous
//! media, with nodal auxiliary-space and block preconditioners.

pub mod bench;
pub mod darcy;
pub mod fem;
pub mod geom;
pub mod la;
pub mod mesh;
pub mod precond;
pub mod solvers;

use serde::Serialize;

/// List of invariant violations; empty means the checked object is well-formed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn push(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}
