//! Navigation pipeline over a cognitive memory graph in a 2D occupancy-grid
//! simulator: incremental spatial-semantic memory, anchor compaction by
//! weighted set multicover, prioritized subgraph reasoning against a
//! pluggable semantic oracle, context-aware frontier utility, and
//! weighted-traveling-repairman goal selection, scored by SR/SPL.
//!
//! The `parallel` feature (default on) routes the data-parallel inner loops
//! (frontier scoring, field rasterization, batch runs) through rayon;
//! sequential fallbacks stay available either way.

pub mod geom;
pub mod cover;
pub mod memory;
pub mod oracle;
pub mod planner;
pub mod reasoning;
pub mod sim;
pub mod utility;
pub mod wtrp;
pub mod world;
