//! Root data of unramified classical groups with Frobenius, twisted Coxeter
//! elements and their lifts, classes of Coxeter tori, fixed points on the
//! apartment with the resulting valuation bounds, root filtrations, and
//! randomized isocrystal and Lang-lift checks over truncated power series.
//!
//! All arithmetic is exact: integers and rationals are arbitrary precision.

#![allow(clippy::needless_range_loop)]

pub mod affine;
pub mod apartment;
pub mod cross_section;
pub mod gf;
pub mod isocrystal;
pub mod lattice;
pub mod linalg;
pub mod report;
pub mod root_datum;
pub mod tori;
pub mod weyl;
