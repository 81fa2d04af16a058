//! Primes, primorials, and residue-class arithmetic.
//!
//! Residues are 0-based. A class written `j mod p` with `j` in `1..=p`
//! elsewhere corresponds to `j % p` here, so `p` itself becomes `0`.

use alloc::vec::Vec;
use core::fmt;

use crate::Error;

/// Default cap on the truncation level (primorial 9,699,690).
pub const DEFAULT_LEVEL_CAP: usize = 8;

/// A truncation level: the first `n` primes and their product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    primes: Vec<u64>,
    primorial: u64,
    // CRT basis: basis[i] = 1 mod p_i and 0 mod every other prime.
    basis: Vec<u64>,
}

impl Level {
    /// Level `n` under the default cap.
    pub fn new(n: usize) -> Result<Self, Error> {
        Self::with_cap(n, DEFAULT_LEVEL_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidInput("level must be at least 1".into()));
        }
        if n > cap {
            return Err(Error::LevelTooLarge { requested: n, cap });
        }
        let primes = first_primes(n);
        let mut primorial: u64 = 1;
        for &p in &primes {
            primorial = primorial.checked_mul(p).ok_or(Error::ModulusOverflow)?;
        }
        let basis = primes
            .iter()
            .map(|&p| {
                let rest = primorial / p;
                let inv = mod_inverse((rest % p) as i128, p as i128)
                    .expect("distinct primes are coprime");
                ((rest as u128 * inv as u128) % primorial as u128) as u64
            })
            .collect();
        Ok(Level {
            primes,
            primorial,
            basis,
        })
    }

    /// Number of primes `n`.
    pub fn n(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// The `i`-th prime, 0-based (`prime(0) == 2`).
    pub fn prime(&self, i: usize) -> u64 {
        self.primes[i]
    }

    pub fn primorial(&self) -> u64 {
        self.primorial
    }

    /// Residue of `s` at every coordinate.
    pub fn crt_invert(&self, s: i128) -> CrtTuple {
        let s = s.rem_euclid(self.primorial as i128) as u64;
        CrtTuple(self.primes.iter().map(|&p| (s % p) as u32).collect())
    }

    /// The unique shift in `[0, primorial)` congruent to `j[i]` mod `p_i`.
    pub fn crt_shift(&self, j: &CrtTuple) -> u64 {
        debug_assert!(self.is_valid_tuple(j));
        let m = self.primorial as u128;
        j.0.iter()
            .zip(&self.basis)
            .fold(0u128, |acc, (&c, &e)| (acc + c as u128 * e as u128) % m) as u64
    }

    /// The shift whose tuple equals that of `s` except at coordinate `i`,
    /// where it is `v`.
    pub fn replace_coord(&self, s: u64, i: usize, v: u32) -> u64 {
        let p = self.primes[i];
        let m = self.primorial as u128;
        let old = s % p;
        let delta = (v as u64 + p - old) % p;
        if self.primorial < 1 << 32 {
            return (s + delta * self.basis[i]) % self.primorial;
        }
        ((s as u128 + delta as u128 * self.basis[i] as u128) % m) as u64
    }

    /// Coordinate `i` of the tuple of shift `s`.
    pub fn coord(&self, s: u64, i: usize) -> u32 {
        (s % self.primes[i]) as u32
    }

    pub fn is_valid_tuple(&self, j: &CrtTuple) -> bool {
        j.0.len() == self.n() && j.0.iter().zip(&self.primes).all(|(&c, &p)| (c as u64) < p)
    }
}

/// A tuple of residues, one per prime of a level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrtTuple(pub Vec<u32>);

impl CrtTuple {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u32>> for CrtTuple {
    fn from(v: Vec<u32>) -> Self {
        CrtTuple(v)
    }
}

impl fmt::Display for CrtTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// The class `shift mod modulus` with `0 <= shift < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidueClass {
    shift: u64,
    modulus: u64,
}

impl ResidueClass {
    /// Reduces `shift` into `[0, modulus)`.
    pub fn new(shift: i128, modulus: u64) -> Result<Self, Error> {
        if modulus == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        Ok(ResidueClass {
            shift: shift.rem_euclid(modulus as i128) as u64,
            modulus,
        })
    }

    /// The whole of the integers, `0 mod 1`.
    pub const fn all() -> Self {
        ResidueClass {
            shift: 0,
            modulus: 1,
        }
    }

    pub fn shift(&self) -> u64 {
        self.shift
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, x: i128) -> bool {
        x.rem_euclid(self.modulus as i128) as u64 == self.shift
    }

    /// Least positive member.
    pub fn least_positive(&self) -> u64 {
        if self.shift > 0 {
            self.shift
        } else {
            self.modulus
        }
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.shift, self.modulus)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// Exact primality: trial division below `10^12`, otherwise Miller-Rabin
/// with the first twelve primes as bases, which is deterministic on `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    if n >= 1_000_000_000_000 {
        return miller_rabin(n);
    }
    let mut d = 5u64;
    while d * d <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

fn miller_rabin(n: u64) -> bool {
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % a == 0 {
            return n == a;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime factor of `n >= 2`.
pub fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n >= 2);
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

/// The first `n` primes.
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if is_prime(c) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Whether two classes share an element.
pub fn classes_intersect(a: ResidueClass, b: ResidueClass) -> bool {
    let g = gcd(a.modulus, b.modulus);
    a.shift % g == b.shift % g
}

fn intersect_pair(a: ResidueClass, b: ResidueClass) -> Result<Option<ResidueClass>, Error> {
    let g = gcd(a.modulus, b.modulus);
    if a.shift % g != b.shift % g {
        return Ok(None);
    }
    let lcm = (a.modulus / g)
        .checked_mul(b.modulus)
        .ok_or(Error::ModulusOverflow)?;
    // x = a.shift + a.modulus * t, with a.modulus * t = b.shift - a.shift (mod b.modulus)
    let ma = (a.modulus / g) as i128;
    let mb = (b.modulus / g) as i128;
    let diff = (b.shift as i128 - a.shift as i128) / g as i128;
    let inv = mod_inverse(ma, mb).expect("reduced moduli are coprime");
    let t = (diff.rem_euclid(mb) * inv).rem_euclid(mb);
    let x = a.shift as i128 + a.modulus as i128 * t;
    Ok(Some(ResidueClass::new(x, lcm)?))
}

/// Exact intersection of a finite list of classes; `None` when empty.
///
/// The moduli need not be coprime. An empty list yields the integers.
pub fn intersect_classes(classes: &[ResidueClass]) -> Result<Option<ResidueClass>, Error> {
    let mut acc = ResidueClass::all();
    for &c in classes {
        match intersect_pair(acc, c)? {
            Some(next) => acc = next,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

/// Whether the class contains at least one (positive) prime.
///
/// With `s0` the least positive member: a coprime `s0` gives infinitely many
/// primes (Dirichlet); otherwise every member shares the factor
/// `gcd(s0, m) > 1`, so the only candidate is `s0` itself.
pub fn class_contains_prime(c: ResidueClass) -> bool {
    let s0 = c.least_positive();
    gcd(s0, c.modulus) == 1 || is_prime(s0)
}

/// Whether the class contains a composite number: always true.
///
/// If `gcd(s0, m) > 1` every member past `s0` has a proper factor. If
/// `gcd(s0, m) = 1`, pick a prime `q` not dividing `m`; the class then meets
/// `0 mod q` in infinitely many members larger than `q`.
pub fn class_contains_composite(_c: ResidueClass) -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn class(r: i128, m: u64) -> ResidueClass {
        ResidueClass::new(r, m).unwrap()
    }

    #[test]
    fn levels() {
        let l1 = Level::new(1).unwrap();
        assert_eq!(l1.primes(), &[2]);
        assert_eq!(l1.primorial(), 2);
        let l3 = Level::new(3).unwrap();
        assert_eq!(l3.primes(), &[2, 3, 5]);
        assert_eq!(l3.primorial(), 30);
        assert_eq!(Level::new(6).unwrap().primorial(), 2 * 3 * 5 * 7 * 11 * 13);
        assert_eq!(Level::new(8).unwrap().primorial(), 9_699_690);
    }

    #[test]
    fn level_cap() {
        assert_eq!(
            Level::new(9),
            Err(Error::LevelTooLarge {
                requested: 9,
                cap: 8
            })
        );
        assert!(Level::with_cap(9, 9).is_ok());
        assert!(Level::new(0).is_err());
    }

    #[test]
    fn crt_examples() {
        let l2 = Level::new(2).unwrap();
        assert_eq!(l2.crt_shift(&CrtTuple(vec![1, 2])), 5);
        assert_eq!(l2.crt_shift(&CrtTuple(vec![0, 0])), 0);
        assert_eq!(l2.crt_invert(5), CrtTuple(vec![1, 2]));
        assert_eq!(l2.crt_invert(6), CrtTuple(vec![0, 0]));
        let l3 = Level::new(3).unwrap();
        assert_eq!(l3.crt_shift(&CrtTuple(vec![1, 1, 1])), 1);
        assert_eq!(l3.crt_invert(29), CrtTuple(vec![1, 2, 4]));
        assert_eq!(l3.crt_invert(-1), CrtTuple(vec![1, 2, 4]));
    }

    #[test]
    fn crt_shift_matches_scan() {
        let l2 = Level::new(2).unwrap();
        let scanned = (0..6).find(|x| x % 2 == 1 && x % 3 == 2).unwrap();
        assert_eq!(l2.crt_shift(&CrtTuple(vec![1, 2])), scanned);
    }

    #[test]
    fn intersect_examples() {
        assert!(classes_intersect(class(1, 2), class(3, 4)));
        assert!(!classes_intersect(class(0, 2), class(1, 4)));
        // gcd(6, 15) = 3 divides 5 - 2, and 20 lies in both.
        assert!(classes_intersect(class(2, 6), class(5, 15)));
        assert_eq!((0..30).find(|x| x % 6 == 2 && x % 15 == 5), Some(20));
        assert!(!classes_intersect(class(2, 6), class(4, 15)));

        assert_eq!(
            intersect_classes(&[class(1, 2), class(2, 3)]).unwrap(),
            Some(class(5, 6))
        );
        assert_eq!(intersect_classes(&[class(1, 4), class(3, 4)]).unwrap(), None);
        assert_eq!(intersect_classes(&[class(1, 2)]).unwrap(), Some(class(1, 2)));
        assert_eq!(
            intersect_classes(&[class(3, 4), class(1, 6)]).unwrap(),
            Some(class(7, 12))
        );
    }

    #[test]
    fn intersect_overflow_is_resource_error() {
        let big = class(1, u64::MAX);
        let other = class(0, u64::MAX - 1);
        assert_eq!(
            intersect_classes(&[big, other]),
            Err(Error::ModulusOverflow)
        );
    }

    #[test]
    fn prime_membership_examples() {
        assert!(class_contains_prime(class(1, 6)));
        assert!(class_contains_prime(class(2, 6)));
        assert!(!class_contains_prime(class(4, 6)));
        assert!(class_contains_prime(class(0, 1)));
        assert!(class_contains_prime(class(0, 7)));
        assert!(!class_contains_prime(class(0, 9)));
        assert!(!class_contains_prime(class(0, 6)));
    }

    #[test]
    fn composite_membership_examples() {
        assert!(class_contains_composite(class(1, 2)));
        assert!(class_contains_composite(class(0, 4)));
        assert!(class_contains_composite(class(1, 6)));
        assert_eq!(25 % 6, 1);
        assert!(!is_prime(25));
    }

    #[test]
    fn large_primality() {
        assert!(is_prime(1_000_000_000_039));
        assert!(!is_prime(1_000_000_000_037));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751 * 5));
        assert!(!is_prime(4_294_967_291 * 4_294_967_279));
        assert_eq!(smallest_prime_factor(91), 7);
        assert_eq!(smallest_prime_factor(97), 97);
    }

    #[test]
    fn replace_coord_matches_tuples() {
        let l3 = Level::new(3).unwrap();
        for s in 0..30u64 {
            for i in 0..3 {
                for v in 0..l3.prime(i) as u32 {
                    let mut t = l3.crt_invert(s as i128);
                    t.0[i] = v;
                    assert_eq!(l3.replace_coord(s, i, v), l3.crt_shift(&t));
                }
            }
        }
    }

    #[test]
    fn primes_list() {
        assert_eq!(first_primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(!is_prime(0) && !is_prime(1) && is_prime(2) && !is_prime(91));
    }
}
