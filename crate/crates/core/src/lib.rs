//! Finite-dimensional KdV vessels, an exact engine for the KdV hierarchy in
//! the differential ring generated by β, and numerical checks tying the two.

pub mod diffring;
pub mod hierarchy;
pub mod linalg;
pub mod vessel;
pub mod verify;
