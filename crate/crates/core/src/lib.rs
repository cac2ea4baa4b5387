//! Phase-field cohesive fracture on adaptive quadtree meshes with extended
//! finite elements for elliptical inclusions, driven by surfing boundary
//! conditions.

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod model;
pub mod postproc;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{DesignVector, Domain, Ellipse, InclusionLayout};
pub use model::MaterialParams;
pub use postproc::{effective_toughness, worst_case_objective, JSample, JTrace, ToughnessReport};
pub use solver::{run_surfing_simulation, SimulationConfig, SimulationResult, StepControls, Termination};
