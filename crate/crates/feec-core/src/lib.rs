#![no_std]
extern crate alloc;

pub mod conforming;
pub mod derham;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod solvers;
pub mod splines;
pub mod verify;

pub use error::{Error, Result};
