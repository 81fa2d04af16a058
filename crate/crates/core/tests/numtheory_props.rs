mod common;

use charge_core::numtheory::{
    class_contains_prime, classes_intersect, gcd, intersect_classes, CrtTuple, Level, ResidueClass,
};
use common::Sieve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tuples(level: &Level) -> Vec<CrtTuple> {
    let mut out = vec![Vec::new()];
    for &p in level.primes() {
        out = out
            .into_iter()
            .flat_map(|t: Vec<u32>| {
                (0..p as u32).map(move |v| {
                    let mut u = t.clone();
                    u.push(v);
                    u
                })
            })
            .collect();
    }
    out.into_iter().map(CrtTuple).collect()
}

#[test]
fn crt_round_trip() {
    for n in 1..=5 {
        let level = Level::new(n).unwrap();
        for s in 0..level.primorial() {
            assert_eq!(level.crt_shift(&level.crt_invert(s as i128)), s);
        }
        for t in tuples(&level) {
            assert_eq!(level.crt_invert(level.crt_shift(&t) as i128), t);
        }
    }
}

#[test]
fn crt_invert_reduces_negative_shifts() {
    let level = Level::new(3).unwrap();
    assert_eq!(level.crt_invert(-1), level.crt_invert(29));
}

#[test]
fn tuples_without_zero_give_coprime_shifts() {
    for n in 1..=4 {
        let level = Level::new(n).unwrap();
        for t in tuples(&level) {
            if t.coords().iter().all(|&c| c != 0) {
                assert_eq!(gcd(level.crt_shift(&t), level.primorial()), 1, "{t:?}");
            }
        }
    }
}

#[test]
fn class_contains_prime_matches_scan() {
    // Every class with modulus at most 210, scanned over its first 10^6
    // nonnegative members.
    const MAX_M: u64 = 210;
    const SPAN: u64 = 1_000_000;
    let limit = MAX_M - 1 + (SPAN - 1) * MAX_M;
    let sieve = Sieve::new(limit);
    let mut seen: Vec<Vec<bool>> = (0..=MAX_M).map(|m| vec![false; m as usize]).collect();
    for p in sieve.primes() {
        for m in 1..=MAX_M {
            let s = p % m;
            if p <= s + (SPAN - 1) * m {
                seen[m as usize][s as usize] = true;
            }
        }
    }
    for m in 1..=MAX_M {
        for s in 0..m {
            let class = ResidueClass::new(s as i128, m).unwrap();
            assert_eq!(class_contains_prime(class), seen[m as usize][s as usize], "{s} mod {m}");
        }
    }
}

#[test]
fn classes_intersect_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1a55);
    for _ in 0..400 {
        let (ma, mb) = (rng.gen_range(1..=1000u64), rng.gen_range(1..=1000u64));
        let a = ResidueClass::new(rng.gen_range(-5000i128..5000), ma).unwrap();
        let b = ResidueClass::new(rng.gen_range(-5000i128..5000), mb).unwrap();
        let lcm = ma / gcd(ma, mb) * mb;
        let common = (0..lcm as i128).find(|&x| a.contains(x) && b.contains(x));
        assert_eq!(classes_intersect(a, b), common.is_some(), "{a:?} {b:?}");
        let meet = intersect_classes(&[a, b]).unwrap();
        match (meet, common) {
            (Some(c), Some(x)) => {
                assert_eq!(c.modulus(), lcm);
                assert_eq!(c.shift() as i128, x);
            }
            (None, None) => {}
            other => panic!("{a:?} {b:?}: {other:?}"),
        }
    }
}

#[test]
fn sieve_agrees_with_library_primality() {
    let sieve = Sieve::new(200_000);
    for x in 0..=200_000 {
        assert_eq!(charge_core::numtheory::is_prime(x), sieve.is_prime(x), "{x}");
    }
}
