//! Critical two-dimensional site percolation on bounded boxes.
//!
//! The crate is `no_std` (it needs `alloc`) and carries only the
//! algorithmic part of the laboratory:
//!
//! * [`lattice`]: site coordinates, the triangular and square site lattices
//!   with their open/closed adjacencies, boxes, sectors and horseshoes.
//! * [`sampling`]: counter-based reproducible configurations.
//! * [`connectivity`]: cluster labels, crossings, terminal cut vertices and
//!   two-arm (Menger) checks.
//! * [`features`]: lowest and highest crossings, pivotal sites and the
//!   heights derived from them, and the exploration interface walk.
//! * [`armevents`]: multi-arm events in horseshoes and annular sectors.
//! * [`stats`]: Wilson intervals, log-log power-law fits with bootstrap
//!   intervals and ratio band checks.
//!
//! Everything that touches files, threads or the command line lives in the
//! `pivotal-lab` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod armevents;
pub mod connectivity;
mod error;
pub mod features;
pub mod lattice;
pub mod rng;
pub mod sampling;
mod search;
pub mod stats;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;
