//! Normal form: `S = ((union of atoms) \ minus) ∪ plus`.
//!
//! Every atom is a residue class, optionally restricted to the primes or to
//! the non-primes. The boolean algebra generated by classes, the primes and
//! finite sets is closed under this representation: a union of atoms
//! differs from the target set only on the finite sets `plus` and `minus`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::SetExpr;
use crate::numtheory::{intersect_classes, is_prime, ResidueClass};
use crate::Error;

/// Default cap on the number of atoms produced during normalisation.
pub const DEFAULT_ATOM_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Filter {
    /// Every member of the class.
    Any,
    /// Members that are positive primes.
    Primes,
    /// Members that are not positive primes.
    NonPrimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub class: ResidueClass,
    pub filter: Filter,
}

impl Atom {
    pub fn new(class: ResidueClass, filter: Filter) -> Self {
        Atom { class, filter }
    }

    pub fn contains(&self, x: i64) -> bool {
        self.class.contains(x as i128)
            && match self.filter {
                Filter::Any => true,
                Filter::Primes => is_prime_i64(x),
                Filter::NonPrimes => !is_prime_i64(x),
            }
    }

    /// `self` is a subset of `other`.
    fn within(&self, other: &Atom) -> bool {
        let class_within = self.class.modulus() % other.class.modulus() == 0
            && self.class.shift() % other.class.modulus() == other.class.shift();
        class_within && (other.filter == Filter::Any || other.filter == self.filter)
    }
}

fn is_prime_i64(x: i64) -> bool {
    x > 0 && is_prime(x as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalForm {
    atoms: Vec<Atom>,
    plus: Vec<i64>,
    minus: Vec<i64>,
}

impl NormalForm {
    /// Atoms in canonical (sorted, irredundant) order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Finite members added outside the atoms.
    pub fn plus(&self) -> &[i64] {
        &self.plus
    }

    /// Finite members of the atoms that are not in the set.
    pub fn minus(&self) -> &[i64] {
        &self.minus
    }

    fn in_atoms(&self, x: i64) -> bool {
        self.atoms.iter().any(|a| a.contains(x))
    }

    pub fn contains(&self, x: i64) -> bool {
        if self.plus.binary_search(&x).is_ok() {
            return true;
        }
        self.minus.binary_search(&x).is_err() && self.in_atoms(x)
    }

    /// Rebuilds an expression with the same meaning.
    pub fn to_expr(&self) -> SetExpr {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let class = if a.class == ResidueClass::all() {
                    SetExpr::All
                } else {
                    SetExpr::Class(a.class)
                };
                match a.filter {
                    Filter::Any => class,
                    Filter::Primes => SetExpr::Intersection(vec![class, SetExpr::Primes]),
                    Filter::NonPrimes => {
                        SetExpr::Intersection(vec![class, SetExpr::Primes.complement()])
                    }
                }
            })
            .collect();
        SetExpr::Union(vec![
            SetExpr::Union(atoms).difference(SetExpr::Finite(self.minus.clone())),
            SetExpr::Finite(self.plus.clone()),
        ])
    }
}

pub fn normalize(expr: &SetExpr) -> Result<NormalForm, Error> {
    normalize_with(expr, DEFAULT_ATOM_BUDGET)
}

pub fn normalize_with(expr: &SetExpr, atom_budget: usize) -> Result<NormalForm, Error> {
    Normalizer {
        budget: atom_budget,
    }
    .run(expr)
}

struct Normalizer {
    budget: usize,
}

impl Normalizer {
    fn run(&self, expr: &SetExpr) -> Result<NormalForm, Error> {
        match expr {
            SetExpr::Class(c) => self.finish(vec![Atom::new(*c, Filter::Any)], &[], |_| false),
            SetExpr::Primes => self.finish(
                vec![Atom::new(ResidueClass::all(), Filter::Primes)],
                &[],
                |_| false,
            ),
            SetExpr::All => self.finish(
                vec![Atom::new(ResidueClass::all(), Filter::Any)],
                &[],
                |_| false,
            ),
            SetExpr::Empty => Ok(NormalForm::default()),
            SetExpr::Finite(v) => {
                let mut plus = v.clone();
                plus.sort_unstable();
                plus.dedup();
                Ok(NormalForm {
                    atoms: Vec::new(),
                    plus,
                    minus: Vec::new(),
                })
            }
            SetExpr::Complement(e) => {
                let inner = self.run(e)?;
                self.complement(&inner)
            }
            SetExpr::Union(es) => {
                let mut acc = NormalForm::default();
                for e in es {
                    let next = self.run(e)?;
                    acc = self.union(&acc, &next)?;
                }
                Ok(acc)
            }
            SetExpr::Intersection(es) => {
                let mut acc = self.run(&SetExpr::All)?;
                for e in es {
                    let next = self.run(e)?;
                    acc = self.intersect(&acc, &next)?;
                }
                Ok(acc)
            }
            SetExpr::Difference(a, b) => {
                let a = self.run(a)?;
                let b = self.run(b)?;
                let not_b = self.complement(&b)?;
                self.intersect(&a, &not_b)
            }
        }
    }

    fn union(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm, Error> {
        let atoms = a.atoms.iter().chain(&b.atoms).copied().collect();
        let cands = candidates(&[a, b]);
        self.finish(atoms, &cands, |x| a.contains(x) || b.contains(x))
    }

    fn intersect(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm, Error> {
        let atoms = self.intersect_atoms(&a.atoms, &b.atoms)?;
        let cands = candidates(&[a, b]);
        self.finish(atoms, &cands, |x| a.contains(x) && b.contains(x))
    }

    fn complement(&self, a: &NormalForm) -> Result<NormalForm, Error> {
        let mut atoms = vec![Atom::new(ResidueClass::all(), Filter::Any)];
        for atom in &a.atoms {
            let outside = self.complement_atom(atom)?;
            atoms = self.intersect_atoms(&atoms, &outside)?;
            atoms = self.canonical(atoms)?;
        }
        let cands = candidates(&[a]);
        self.finish(atoms, &cands, |x| !a.contains(x))
    }

    /// Atoms whose union is the complement of `atom`.
    fn complement_atom(&self, atom: &Atom) -> Result<Vec<Atom>, Error> {
        let m = atom.class.modulus();
        let siblings = (m - 1) as usize;
        if m - 1 > self.budget as u64 {
            return Err(Error::AtomBudget {
                atoms: usize::try_from(m - 1).unwrap_or(usize::MAX),
                budget: self.budget,
            });
        }
        let mut out = Vec::with_capacity(siblings + 1);
        for r in 0..m {
            if r != atom.class.shift() {
                out.push(Atom::new(ResidueClass::new(r as i128, m)?, Filter::Any));
            }
        }
        match atom.filter {
            Filter::Any => {}
            Filter::Primes => out.push(Atom::new(atom.class, Filter::NonPrimes)),
            Filter::NonPrimes => out.push(Atom::new(atom.class, Filter::Primes)),
        }
        Ok(out)
    }

    fn intersect_atoms(&self, a: &[Atom], b: &[Atom]) -> Result<Vec<Atom>, Error> {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                let filter = match (x.filter, y.filter) {
                    (Filter::Any, f) | (f, Filter::Any) => f,
                    (f, g) if f == g => f,
                    _ => continue,
                };
                if let Some(class) = intersect_classes(&[x.class, y.class])? {
                    out.insert(Atom::new(class, filter));
                    if out.len() > self.budget {
                        return Err(Error::AtomBudget {
                            atoms: out.len(),
                            budget: self.budget,
                        });
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Sorted, duplicate-free, no atom inside another, complementary filters
    /// merged and complete sibling families collapsed to their parent class.
    fn canonical(&self, atoms: Vec<Atom>) -> Result<Vec<Atom>, Error> {
        let mut set: BTreeSet<Atom> = atoms.into_iter().collect();
        loop {
            let mut changed = false;

            // Primes + NonPrimes on the same class -> Any.
            let pairs: Vec<ResidueClass> = set
                .iter()
                .filter(|a| a.filter == Filter::Primes)
                .filter(|a| set.contains(&Atom::new(a.class, Filter::NonPrimes)))
                .map(|a| a.class)
                .collect();
            for c in pairs {
                set.remove(&Atom::new(c, Filter::Primes));
                set.remove(&Atom::new(c, Filter::NonPrimes));
                set.insert(Atom::new(c, Filter::Any));
                changed = true;
            }

            // Collapse q sibling classes mod m into one class mod m/q.
            if let Some((children, parent)) = find_sibling_family(&set) {
                for c in children {
                    set.remove(&c);
                }
                set.insert(parent);
                changed = true;
            }

            // Drop atoms contained in another atom.
            let list: Vec<Atom> = set.iter().copied().collect();
            for (i, a) in list.iter().enumerate() {
                if list
                    .iter()
                    .enumerate()
                    .any(|(j, b)| i != j && a.within(b) && !(b.within(a) && j > i))
                {
                    set.remove(a);
                    changed = true;
                }
            }

            if !changed {
                break;
            }
        }
        if set.len() > self.budget {
            return Err(Error::AtomBudget {
                atoms: set.len(),
                budget: self.budget,
            });
        }
        Ok(set.into_iter().collect())
    }

    fn finish(
        &self,
        atoms: Vec<Atom>,
        candidates: &[i64],
        member: impl Fn(i64) -> bool,
    ) -> Result<NormalForm, Error> {
        let atoms = self.canonical(atoms)?;
        let mut nf = NormalForm {
            atoms,
            plus: Vec::new(),
            minus: Vec::new(),
        };
        for &x in candidates {
            let in_atoms = nf.in_atoms(x);
            let in_set = member(x);
            if in_atoms && !in_set {
                nf.minus.push(x);
            } else if !in_atoms && in_set {
                nf.plus.push(x);
            }
        }
        Ok(nf)
    }
}

fn candidates(forms: &[&NormalForm]) -> Vec<i64> {
    let mut out: Vec<i64> = forms
        .iter()
        .flat_map(|f| f.plus.iter().chain(&f.minus).copied())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Distinct prime factors of `m` not exceeding `limit`.
fn prime_factors_up_to(mut m: u64, limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= limit && d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    out
}

/// A full family `{r + k*(m/q) mod m : k < q}` with one filter, if present.
fn find_sibling_family(set: &BTreeSet<Atom>) -> Option<(Vec<Atom>, Atom)> {
    for a in set {
        let m = a.class.modulus();
        if m == 1 {
            continue;
        }
        // A family of q siblings needs q atoms, so larger factors cannot occur.
        for q in prime_factors_up_to(m, set.len() as u64) {
            let parent_mod = m / q;
            let base = a.class.shift() % parent_mod;
            let children: Vec<Atom> = (0..q)
                .map(|k| {
                    Atom::new(
                        ResidueClass::new((base + k * parent_mod) as i128, m)
                            .expect("positive modulus"),
                        a.filter,
                    )
                })
                .collect();
            if children.iter().all(|c| set.contains(c)) {
                let parent = Atom::new(
                    ResidueClass::new(base as i128, parent_mod).expect("positive modulus"),
                    a.filter,
                );
                return Some((children, parent));
            }
        }
    }
    None
}
