//! A dual-process creative painter.
//!
//! Image patches from several domains are memorised in self-organizing
//! maps; a hub map links the domains through coarse features so that regions
//! of a face can be replaced by associated objects (flowers, leaves...). A
//! controller alternates tacit and exploratory generation with analytic
//! checks and reflective replanning, simulates the physical execution, and
//! adapts the artist's urges from internal checks and human ratings.

pub mod agent;
pub mod config;
pub mod creative;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod imagefeat;
pub mod memory;
pub mod raster;
pub mod render;
pub mod segment;
pub mod server;
pub mod som;
pub mod store;

pub use error::{Error, Result};
