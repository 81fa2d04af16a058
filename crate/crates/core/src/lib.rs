//! Certified bounds on the probability of a set of integers under finitely
//! additive charges that are uniform on residue classes modulo primes.
//!
//! The crate truncates the constraint family to the first `n` primes, decides
//! exactly which classes modulo the primorial meet the target set, solves the
//! resulting covering LP in exact rational arithmetic (upper bounds) and
//! builds integral path-multiset witnesses (lower bounds).
//!
//! Residues are always 0-based: the class `r mod m` has `0 <= r < m`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod bounds;
mod error;
pub mod lp;
pub mod numtheory;
pub mod paths;
pub mod rational;
pub mod setexpr;

pub use bounds::{
    bounds_report, build_lp, lower_sup, upper_sup, BoundsConfig, BoundsReport, ConstraintFamily,
    FamilyKind, LevelBounds, LowerBound, LowerSource, UpperBound,
};
pub use error::Error;
pub use lp::{solve, verify_certificate, LpProblem, LpSolution, LpStatus, Sense, VarSign};
pub use numtheory::{CrtTuple, Level, ResidueClass};
pub use paths::{PathMultiset, ProductSpec};
pub use rational::Rational;
pub use setexpr::{alive_vector, normalize, parse, AliveVector, NormalForm, SetExpr};
