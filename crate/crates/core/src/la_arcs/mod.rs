//! Precomputed LA arcs and their dual-dependent index.

mod omega;
mod table;

pub use omega::{Bucket, OmegaEntry, OmegaIndex};
pub use table::{ComponentPathTable, LaArc, SubsetPaths, MAX_LA_NEIGHBORS};
