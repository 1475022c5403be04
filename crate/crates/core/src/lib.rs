//! Lattice workbench for Faddeev-Skyrme type energies on S² and SU(2)
//! targets, the gauge identities relating them, and their topological
//! invariants.

pub mod config;
pub mod constants;
pub mod coset;
pub mod energy;
pub mod error;
pub mod fields;
pub mod forms;
pub mod identities;
pub mod lie;
pub mod minimizer;
pub mod run;
pub mod snapshot;
pub mod topology;

pub use coset::{FieldMap, ReferenceMap, TargetSpace};
pub use energy::EnergyReport;
pub use error::{ConfigError, Error, Result};
pub use forms::{BoundaryMode, GForm, Grid3, ProjectorField, ScalarField};
pub use lie::{AlgebraVec, Quat};
pub use topology::{HopfMethod, InvariantReport, SectorLabel};
