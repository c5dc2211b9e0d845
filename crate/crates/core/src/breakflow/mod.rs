//! BreakFlow obstacle layouts, mesh scripts and flow-solver configurations.

pub mod emit;
pub mod geometry;
pub mod layout;

pub use emit::{emit_geometry, emit_sim_config, mesh_sizes, SimConfigSpec};
pub use geometry::{convex_distance, obstacle_distance, Obstacle, Rect};
pub use layout::{generate_layout, validate_layout, DomainLayout, Violation};
