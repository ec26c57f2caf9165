pub mod error;
pub mod geometry;
pub mod jc_model;
pub mod linalg;
pub mod optimize;
pub mod params;
pub mod phase;
pub mod table;
pub mod spin_model;
pub mod state_transfer;
pub mod transfer_matrix;

pub use error::{Error, Result};
pub use geometry::{ChainGeometry, ChainSystem, Role, Site};
pub use params::{PhaseMode, PhysicalParams};
