//! Entropy-based analysis of networks with correlated sources.
//!
//! The crate has three layers:
//!
//! * [`probdist`] and [`setfunc`] hold exact finite joint distributions and
//!   entropy vectors (Shannon, Rényi, Tsallis, all in bits).
//! * [`polycone`] generates the elemental Shannon inequalities over a ground
//!   set and decides feasibility/optimality of rational linear programs with
//!   an exact simplex, returning either a witness set function or a Farkas
//!   certificate.
//! * [`netmodel`] compiles capacity outer bounds for a network with
//!   correlated sources (the plain bound, the auxiliary-variable bound and
//!   the partition-variable bound) into such linear programs, and evaluates
//!   concrete single-symbol network codes.
//!
//! On top of these, [`partitions`] constructs the binary partition random
//! variables of a distribution, checks their structural properties, and
//! recovers a distribution (up to relabelling) from an entropy oracle over
//! those variables, for scalars and for random vectors. [`auxgen`] builds
//! auxiliary random variables: linearly correlated sources over prime
//! fields, exact common information, and a relaxed common-information
//! search.
//!
//! Everything numeric that enters a linear program is an exact rational
//! ([`ratio::Rat`]); entropies themselves are `f64` bits with a fixed
//! zero-test tolerance [`EPS_H`].






pub mod auxgen;
pub mod netmodel;
pub mod partitions;
pub mod polycone;
pub mod probdist;
pub mod ratio;
pub mod setfunc;

/// Tolerance for treating an entropy difference as zero (bits).
pub const EPS_H: f64 = 1e-9;

/// Largest ground set for which full entropy vectors are computed.
pub const ENTROPY_VECTOR_CAP: usize = 20;

/// Largest ground set accepted by the linear-program compiler.
pub const LP_GROUND_CAP: usize = 12;

/// Largest support size accepted by the recovery procedures.
pub const RECOVERY_SUPPORT_CAP: usize = 12;

/// Largest support size for which a complete partition system is built.
pub const PARTITION_SUPPORT_CAP: usize = 20;

pub use ratio::Rat;
pub use setfunc::SetFunction;
