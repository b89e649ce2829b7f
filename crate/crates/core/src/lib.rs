//! Column generation for the capacitated vehicle routing problem, with
//! pricing over Local-Area route relaxations inside decremental state space
//! relaxation.

pub mod bench;
pub mod cg;
pub mod custset;
pub mod dssr;
pub mod error;
pub mod instance;
pub mod la_arcs;
pub mod lp;
pub mod neighbors;
pub mod oracle;
pub mod pricing;
pub mod rmp;
pub mod route;

pub use error::{Error, Result};
