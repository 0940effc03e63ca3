//! Regular shock reflection for self-similar potential flow near the sonic arc.
//!
//! The crate is `no_std` with `alloc`. Enable `std` for `std::error::Error`,
//! `parallel` for data-parallel line solves and `serde` for serialization.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod euler_states;
pub mod math;
pub mod barriers;
pub mod degenerate_solver;
pub mod diagnostics;
pub mod rankine_hugoniot;
pub mod reflection_config;

pub use error::{Error, Result};
