//! Exact decision of which classes modulo the primorial meet a set.

use alloc::vec::Vec;

use super::{normalize, Atom, Filter, NormalForm, SetExpr};
use crate::numtheory::{classes_intersect, gcd, is_prime, smallest_prime_factor, Level, ResidueClass};
use crate::Error;

/// One bit per shift `s` in `[0, N!_p)`: whether `s mod N!_p` meets the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliveVector {
    level: Level,
    bits: Vec<bool>,
    count: u64,
}

impl AliveVector {
    /// Builds a vector from explicit bits, one per shift.
    pub fn from_bits(level: Level, bits: Vec<bool>) -> Result<Self, Error> {
        if bits.len() as u64 != level.primorial() {
            return Err(Error::InvalidInput(alloc::format!(
                "alive vector has {} bits, level {} needs {}",
                bits.len(),
                level.n(),
                level.primorial()
            )));
        }
        let count = bits.iter().filter(|b| **b).count() as u64;
        Ok(AliveVector { level, bits, count })
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, s: u64) -> bool {
        self.bits[s as usize]
    }

    /// Number of alive shifts.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The alive vector of the complement set.
    ///
    /// Only valid when every class mod `N!_p` lies entirely inside or
    /// entirely outside the set, as for unions of classes whose moduli divide
    /// the primorial. In general a class can meet both a set and its
    /// complement, so complements are recomputed from the expression.
    pub fn negate_exact(&self) -> Self {
        let bits: Vec<bool> = self.bits.iter().map(|b| !b).collect();
        AliveVector {
            level: self.level.clone(),
            count: self.level.primorial() - self.count,
            bits,
        }
    }
}

/// Whether the class `s mod N!_p` meets the set described by `nf`.
pub fn alive_bit(nf: &NormalForm, s: u64, level: &Level) -> bool {
    let big = level.primorial();
    let here = ResidueClass::new(s as i128, big).expect("primorial is positive");
    if nf.plus().iter().any(|&x| here.contains(x as i128)) {
        return true;
    }
    nf.atoms().iter().any(|atom| atom_meets(atom, here, nf.minus()))
}

fn atom_meets(atom: &Atom, here: ResidueClass, minus: &[i64]) -> bool {
    if !classes_intersect(atom.class, here) {
        return false;
    }
    match atom.filter {
        // A nonempty intersection of two classes is infinite, and infinitely
        // many of its members are composite; a finite `minus` cannot empty it.
        Filter::Any | Filter::NonPrimes => true,
        Filter::Primes => {
            let g_here = gcd(here.shift(), here.modulus());
            let g_atom = gcd(atom.class.shift(), atom.class.modulus());
            if g_here == 1 && g_atom == 1 {
                // Every member is coprime to the combined modulus: Dirichlet.
                return true;
            }
            // Some prime divides every member; only that prime can qualify.
            let candidate = if g_atom > 1 {
                atom.class.least_positive()
            } else {
                smallest_prime_factor(g_here)
            };
            is_prime(candidate)
                && here.contains(candidate as i128)
                && atom.class.contains(candidate as i128)
                && i64::try_from(candidate).map_or(true, |c| minus.binary_search(&c).is_err())
        }
    }
}

pub fn alive_vector(expr: &SetExpr, level: &Level) -> Result<AliveVector, Error> {
    let nf = normalize(expr)?;
    Ok(alive_vector_nf(&nf, level))
}

pub fn alive_vector_nf(nf: &NormalForm, level: &Level) -> AliveVector {
    let bits: Vec<bool> = (0..level.primorial())
        .map(|s| alive_bit(nf, s, level))
        .collect();
    let count = bits.iter().filter(|b| **b).count() as u64;
    AliveVector {
        level: level.clone(),
        bits,
        count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setexpr::parse;

    fn alive(text: &str, n: usize) -> AliveVector {
        alive_vector(&parse(text).unwrap(), &Level::new(n).unwrap()).unwrap()
    }

    fn shifts(v: &AliveVector) -> Vec<u64> {
        (0..v.len() as u64).filter(|&s| v.get(s)).collect()
    }

    #[test]
    fn primes_bits() {
        let l2 = Level::new(2).unwrap();
        let nf = normalize(&SetExpr::Primes).unwrap();
        assert!(!alive_bit(&nf, 4, &l2));
        assert!(alive_bit(&nf, 2, &l2));
        let nf = normalize(&parse("primes \\ {2}").unwrap()).unwrap();
        assert!(!alive_bit(&nf, 2, &l2));
        assert!(alive_bit(&nf, 3, &l2));
    }

    #[test]
    fn vectors() {
        assert_eq!(shifts(&alive("primes", 2)), [1, 2, 3, 5]);
        let all = alive("all", 1);
        assert_eq!(all.count(), 2);
        assert_eq!(shifts(&alive("class(1,6)", 2)), [1]);
        assert_eq!(shifts(&alive("class(3,4)", 2)), [1, 3, 5]);
        assert_eq!(shifts(&alive("{5}", 3)), [5]);
        assert_eq!(alive("empty", 3).count(), 0);
    }

    #[test]
    fn primes_in_composite_classes() {
        // 3 mod 9 contains the prime 3; 0 mod 9 does not.
        assert_eq!(shifts(&alive("primes & class(3,9)", 1)), [1]);
        assert_eq!(alive("primes & class(0,9)", 2).count(), 0);
        // 2 mod 4 holds the single prime 2, which lies in 2 mod 6.
        assert_eq!(shifts(&alive("primes & class(2,4)", 2)), [2]);
        assert_eq!(alive("primes & class(2,4) \\ {2}", 2).count(), 0);
    }

    #[test]
    fn complement_of_primes_meets_every_class() {
        assert_eq!(alive("!primes", 3).count(), 30);
    }

    #[test]
    fn negate_exact_on_class_unions() {
        let v = alive("class(1,6)", 3);
        assert_eq!(v.negate_exact(), alive("!class(1,6)", 3));
    }
}
