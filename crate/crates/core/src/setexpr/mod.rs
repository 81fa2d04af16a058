//! Set expressions over the integers: syntax, normal form, and the exact
//! alive vector (which classes modulo the primorial meet the set).

mod alive;
mod normal;
mod parser;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

pub use alive::{alive_bit, alive_vector, alive_vector_nf, AliveVector};
pub use normal::{normalize, normalize_with, Atom, Filter, NormalForm, DEFAULT_ATOM_BUDGET};
pub use parser::{parse, parse_with, ParseLimits};

use crate::numtheory::{is_prime, ResidueClass};

/// Expression tree describing a subset of the integers.
///
/// `Primes` is the set of positive primes. `Finite` lists are sorted and
/// duplicate-free; build them with [`SetExpr::finite`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Class(ResidueClass),
    Primes,
    Finite(Vec<i64>),
    All,
    Empty,
    Complement(Box<SetExpr>),
    Union(Vec<SetExpr>),
    Intersection(Vec<SetExpr>),
    Difference(Box<SetExpr>, Box<SetExpr>),
}

impl SetExpr {
    pub fn finite(mut members: Vec<i64>) -> Self {
        members.sort_unstable();
        members.dedup();
        SetExpr::Finite(members)
    }

    pub fn class(shift: i128, modulus: u64) -> Result<Self, crate::Error> {
        Ok(SetExpr::Class(ResidueClass::new(shift, modulus)?))
    }

    pub fn complement(self) -> Self {
        SetExpr::Complement(Box::new(self))
    }

    pub fn difference(self, other: SetExpr) -> Self {
        SetExpr::Difference(Box::new(self), Box::new(other))
    }

    /// Direct membership test.
    pub fn contains(&self, x: i64) -> bool {
        match self {
            SetExpr::Class(c) => c.contains(x as i128),
            SetExpr::Primes => x > 0 && is_prime(x as u64),
            SetExpr::Finite(v) => v.binary_search(&x).is_ok(),
            SetExpr::All => true,
            SetExpr::Empty => false,
            SetExpr::Complement(e) => !e.contains(x),
            SetExpr::Union(es) => es.iter().any(|e| e.contains(x)),
            SetExpr::Intersection(es) => es.iter().all(|e| e.contains(x)),
            SetExpr::Difference(a, b) => a.contains(x) && !b.contains(x),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            SetExpr::Complement(e) => e.node_count(),
            SetExpr::Union(es) | SetExpr::Intersection(es) => {
                es.iter().map(SetExpr::node_count).sum()
            }
            SetExpr::Difference(a, b) => a.node_count() + b.node_count(),
            _ => 0,
        }
    }

    pub fn depth(&self) -> usize {
        1 + match self {
            SetExpr::Complement(e) => e.depth(),
            SetExpr::Union(es) | SetExpr::Intersection(es) => {
                es.iter().map(SetExpr::depth).max().unwrap_or(0)
            }
            SetExpr::Difference(a, b) => a.depth().max(b.depth()),
            _ => 0,
        }
    }
}

/// Prints in the input grammar, fully parenthesised where needed.
impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, es: &[SetExpr], op: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        }
        match self {
            SetExpr::Class(c) => write!(f, "class({},{})", c.shift(), c.modulus()),
            SetExpr::Primes => f.write_str("primes"),
            SetExpr::All => f.write_str("all"),
            SetExpr::Empty => f.write_str("empty"),
            SetExpr::Finite(v) => {
                f.write_str("{")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("}")
            }
            SetExpr::Complement(e) => write!(f, "!{e}"),
            SetExpr::Union(es) if es.is_empty() => f.write_str("empty"),
            SetExpr::Intersection(es) if es.is_empty() => f.write_str("all"),
            SetExpr::Union(es) => join(f, es, "|"),
            SetExpr::Intersection(es) => join(f, es, "&"),
            SetExpr::Difference(a, b) => write!(f, "({a} \\ {b})"),
        }
    }
}
