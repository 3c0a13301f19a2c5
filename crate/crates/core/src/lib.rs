//! Cantor sets built from generator schedules, their exact covering and
//! packing counts, and the box-counting profiles of the sets and of their
//! products.

pub mod cli;
pub mod counting;
pub mod error;
pub mod geometry;
pub mod profile;
pub mod real;
pub mod schedule;

pub use error::{Error, Result};
