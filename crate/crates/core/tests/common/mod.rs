//! Independent oracles shared by the integration tests and the acceptance
//! run. Nothing here calls the solver, the alive-vector code or the path
//! engine of the crate.

#![allow(dead_code)]

use charge_core::lp::{LpProblem, LpStatus, Sense, VarSign};
use charge_core::Rational;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_rational(x: &Q) -> Rational {
    Rational::new(x.numer().clone(), x.denom().clone())
}

// ---------------------------------------------------------------------------
// Linear programming by vertex and extreme-ray enumeration.

/// `minimize c.x` subject to `a.x >= b` or `a.x = b` rows and sign rules.
#[derive(Debug, Clone)]
pub struct RawLp {
    pub c: Vec<Q>,
    pub rows: Vec<(Vec<Q>, bool, Q)>,
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Optimal(Q),
    Infeasible,
    Unbounded,
}

impl RawLp {
    pub fn to_problem(&self) -> LpProblem {
        let signs = self
            .nonneg
            .iter()
            .map(|&nn| if nn { VarSign::NonNeg } else { VarSign::Free })
            .collect();
        let mut lp = LpProblem::new(self.c.iter().map(to_rational).collect(), signs).unwrap();
        for (a, eq, b) in &self.rows {
            let entries = a
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| (j, to_rational(v)))
                .collect();
            let sense = if *eq { Sense::Eq } else { Sense::Ge };
            lp.add_row(entries, sense, to_rational(b)).unwrap();
        }
        lp
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Reduced row echelon form; returns pivot columns.
fn rref(m: &mut [Vec<Q>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..m[r].len() {
                    let v = &f * &m[r][k];
                    m[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A basis of `{x : a.x = 0 for every row a}`.
fn null_space(rows: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let pivots = rref(&mut m, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Unique solution of a square system, if nonsingular.
fn solve_square(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m, n);
    (pivots.len() == n).then(|| m.iter().map(|r| r[n].clone()).collect())
}

fn subsets(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), &mut f);
}

/// Exact optimum by enumeration.
///
/// The lineality space of the constraint normals is cut away first (it
/// either makes the problem unbounded or leaves the objective unchanged),
/// so the remaining polyhedron is pointed: it is empty iff it has no vertex,
/// and unbounded below iff some extreme ray of its recession cone has
/// negative cost.
pub fn vertex_oracle(lp: &RawLp) -> Oracle {
    let n = lp.c.len();
    // (normal, is_equality, rhs)
    let mut cons: Vec<(Vec<Q>, bool, Q)> = lp.rows.clone();
    for (j, &nn) in lp.nonneg.iter().enumerate() {
        if nn {
            let mut e = vec![Q::zero(); n];
            e[j] = Q::one();
            cons.push((e, false, Q::zero()));
        }
    }
    let normals: Vec<Vec<Q>> = cons.iter().map(|c| c.0.clone()).collect();
    let lineality = null_space(&normals, n);
    let cost_on_lineality = lineality.iter().any(|l| !dot(&lp.c, l).is_zero());
    for l in &lineality {
        cons.push((l.clone(), true, Q::zero()));
    }

    let feasible = |x: &[Q]| {
        cons.iter().all(|(a, eq, b)| {
            let v = dot(a, x);
            if *eq {
                v == *b
            } else {
                v >= *b
            }
        })
    };
    let mut best: Option<Q> = None;
    subsets(cons.len(), n, |idx| {
        let a: Vec<Vec<Q>> = idx.iter().map(|&i| cons[i].0.clone()).collect();
        let b: Vec<Q> = idx.iter().map(|&i| cons[i].2.clone()).collect();
        if let Some(x) = solve_square(&a, &b) {
            if feasible(&x) {
                let v = dot(&lp.c, &x);
                if best.as_ref().map_or(true, |bv| v < *bv) {
                    best = Some(v);
                }
            }
        }
    });
    let Some(best) = best else {
        return Oracle::Infeasible;
    };
    if cost_on_lineality {
        return Oracle::Unbounded;
    }
    let in_cone = |d: &[Q]| {
        cons.iter().all(|(a, eq, _)| {
            let v = dot(a, d);
            if *eq {
                v.is_zero()
            } else {
                !v.is_negative()
            }
        })
    };
    let mut unbounded = false;
    if n >= 1 {
        subsets(cons.len(), n - 1, |idx| {
            if unbounded {
                return;
            }
            let rows: Vec<Vec<Q>> = idx.iter().map(|&i| cons[i].0.clone()).collect();
            let ns = null_space(&rows, n);
            if ns.len() != 1 {
                return;
            }
            for sign in [1i64, -1] {
                let d: Vec<Q> = ns[0].iter().map(|v| v * q(sign, 1)).collect();
                if in_cone(&d) && dot(&lp.c, &d).is_negative() {
                    unbounded = true;
                }
            }
        });
    }
    if unbounded {
        Oracle::Unbounded
    } else {
        Oracle::Optimal(best)
    }
}

pub fn status_of(o: &Oracle) -> LpStatus {
    match o {
        Oracle::Optimal(_) => LpStatus::Optimal,
        Oracle::Infeasible => LpStatus::Infeasible,
        Oracle::Unbounded => LpStatus::Unbounded,
    }
}

fn small_rational(rng: &mut impl Rng) -> Q {
    let num = rng.gen_range(-9i64..=9);
    let den = rng.gen_range(1i64..=9);
    q(num, den)
}

/// Up to 6 variables and 8 rows; numerators and denominators at most 9.
pub fn random_lp(rng: &mut impl Rng) -> RawLp {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=8);
    let c = (0..n).map(|_| small_rational(rng)).collect();
    let rows = (0..m)
        .map(|_| {
            let a = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        Q::zero()
                    } else {
                        small_rational(rng)
                    }
                })
                .collect();
            (a, rng.gen_bool(0.25), small_rational(rng))
        })
        .collect();
    let nonneg = (0..n).map(|_| rng.gen_bool(0.6)).collect();
    RawLp { c, rows, nonneg }
}

// ---------------------------------------------------------------------------
// Primes by sieve.

/// Odd-only sieve of Eratosthenes up to `limit` inclusive.
pub struct Sieve {
    limit: u64,
    composite_odd: Vec<bool>,
}

impl Sieve {
    pub fn new(limit: u64) -> Self {
        let size = (limit / 2 + 1) as usize;
        let mut composite_odd = vec![false; size];
        let mut i = 3u64;
        while i * i <= limit {
            if !composite_odd[(i / 2) as usize] {
                let mut k = i * i;
                while k <= limit {
                    composite_odd[(k / 2) as usize] = true;
                    k += 2 * i;
                }
            }
            i += 2;
        }
        Sieve {
            limit,
            composite_odd,
        }
    }

    pub fn is_prime(&self, x: u64) -> bool {
        assert!(x <= self.limit, "{x} beyond sieve limit");
        match x {
            0 | 1 => false,
            2 => true,
            _ if x % 2 == 0 => false,
            _ => !self.composite_odd[(x / 2) as usize],
        }
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        core::iter::once(2)
            .chain((3..=self.limit).step_by(2).filter(|&x| self.is_prime(x)))
            .filter(move |&x| x <= self.limit)
    }
}

// ---------------------------------------------------------------------------
// Integral maximum over path multisets with uniform marginals.

fn primes_of_level(n: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 2u64;
    while out.len() < n {
        if (2..c).all(|d| c % d != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Shift of a tuple, found by scanning.
fn shift_of(primes: &[u64], tuple: &[u64]) -> u64 {
    let total: u64 = primes.iter().product();
    (0..total)
        .find(|s| primes.iter().zip(tuple).all(|(p, t)| s % p == *t))
        .unwrap()
}

/// Maximum number of alive paths in a multiset of `N!_p` paths whose every
/// coordinate is uniform.
///
/// Enumerates every joint table of the first `n - 1` coordinates with the
/// required marginals; for each table the last coordinate is an assignment
/// problem (cells to residues, each residue used `N!_p / p_n` times) whose
/// integral optimum is a maximum flow.
pub fn integral_max(n: usize, alive: &[bool]) -> u64 {
    let primes = primes_of_level(n);
    let total: u64 = primes.iter().product();
    assert_eq!(alive.len() as u64, total);
    let head = &primes[..n - 1];
    let last = primes[n - 1];
    let cells: Vec<Vec<u64>> = product_tuples(head);

    // alive_by_cell[c][v]
    let alive_by_cell: Vec<Vec<bool>> = cells
        .iter()
        .map(|cell| {
            (0..last)
                .map(|v| {
                    let mut t = cell.clone();
                    t.push(v);
                    alive[shift_of(&primes, &t) as usize]
                })
                .collect()
        })
        .collect();

    let mut best = 0u64;
    let mut table = vec![0u64; cells.len()];
    let mut remaining: Vec<Vec<u64>> = head.iter().map(|&p| vec![total / p; p as usize]).collect();
    enumerate_tables(&cells, 0, total, &mut table, &mut remaining, &mut |table| {
        let f = assignment_flow(table, &alive_by_cell, last, total / last);
        best = best.max(f);
    });
    best
}

fn product_tuples(primes: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &p in primes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..p).map(move |v| {
                    let mut u = t.clone();
                    u.push(v);
                    u
                })
            })
            .collect();
    }
    out
}

fn enumerate_tables(
    cells: &[Vec<u64>],
    i: usize,
    left: u64,
    table: &mut Vec<u64>,
    remaining: &mut Vec<Vec<u64>>,
    f: &mut dyn FnMut(&[u64]),
) {
    if i == cells.len() {
        if left == 0 && remaining.iter().all(|r| r.iter().all(|&c| c == 0)) {
            f(table);
        }
        return;
    }
    let cap = cells[i]
        .iter()
        .enumerate()
        .map(|(k, &v)| remaining[k][v as usize])
        .min()
        .unwrap_or(left)
        .min(left);
    for x in 0..=cap {
        table[i] = x;
        for (k, &v) in cells[i].iter().enumerate() {
            remaining[k][v as usize] -= x;
        }
        enumerate_tables(cells, i + 1, left - x, table, remaining, f);
        for (k, &v) in cells[i].iter().enumerate() {
            remaining[k][v as usize] += x;
        }
    }
}

/// Max flow source -> cells (capacity = table count) -> residues (if alive)
/// -> sink (capacity `per_value`), by repeated DFS augmentation.
fn assignment_flow(table: &[u64], alive_by_cell: &[Vec<bool>], last: u64, per_value: u64) -> u64 {
    let nc = table.len();
    let nv = last as usize;
    let size = nc + nv + 2;
    let (src, sink) = (nc + nv, nc + nv + 1);
    let mut cap = vec![vec![0u64; size]; size];
    for c in 0..nc {
        cap[src][c] = table[c];
        for v in 0..nv {
            if alive_by_cell[c][v] {
                cap[c][nc + v] = u64::MAX / 4;
            }
        }
    }
    for v in 0..nv {
        cap[nc + v][sink] = per_value;
    }
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[src] = src;
        let mut stack = vec![src];
        while let Some(u) = stack.pop() {
            for w in 0..size {
                if prev[w] == usize::MAX && cap[u][w] > 0 {
                    prev[w] = u;
                    stack.push(w);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return flow;
        }
        let mut push = u64::MAX;
        let mut w = sink;
        while w != src {
            push = push.min(cap[prev[w]][w]);
            w = prev[w];
        }
        let mut w = sink;
        while w != src {
            cap[prev[w]][w] -= push;
            cap[w][prev[w]] += push;
            w = prev[w];
        }
        flow += push;
    }
}

/// Literal brute force at level 2: every multiset of 6 paths.
pub fn integral_max_level2_brute(alive: &[bool]) -> u64 {
    assert_eq!(alive.len(), 6);
    let mut best = 0;
    let mut counts = [0u64; 6];
    fn go(i: usize, left: u64, counts: &mut [u64; 6], alive: &[bool], best: &mut u64) {
        if i == 5 {
            counts[5] = left;
            let ok2 = (0..2).all(|r| (0..6).filter(|s| s % 2 == r).map(|s| counts[s]).sum::<u64>() == 3);
            let ok3 = (0..3).all(|r| (0..6).filter(|s| s % 3 == r).map(|s| counts[s]).sum::<u64>() == 2);
            if ok2 && ok3 {
                let v = (0..6).filter(|&s| alive[s]).map(|s| counts[s]).sum();
                *best = (*best).max(v);
            }
            return;
        }
        for x in 0..=left {
            counts[i] = x;
            go(i + 1, left - x, counts, alive, best);
        }
    }
    go(0, 6, &mut counts, alive, &mut best);
    best
}

/// Alive bits by scanning: shift `s` is alive iff some `x = s + k N!_p`
/// with `0 <= x < 2 N!_p` is a member. Exact for sets whose membership is
/// constant on classes modulo `N!_p`.
pub fn scan_alive(total: u64, member: impl Fn(i64) -> bool) -> Vec<bool> {
    (0..total)
        .map(|s| (0..2).any(|k| member((s + k * total) as i64)))
        .collect()
}

/// Strong-duality check written from scratch: `x` satisfies every row and
/// sign rule, `y` is nonnegative on `>=` rows, `A^T y` equals the objective
/// on free variables and is at most it on nonnegative ones, and `c.x = b.y`
/// equals the reported value.
pub fn certificate_holds(lp: &LpProblem, sol: &charge_core::LpSolution) -> bool {
    use charge_core::lp::Sense;
    let n = lp.num_vars();
    if sol.primal.len() != n || sol.dual.len() != lp.num_rows() {
        return false;
    }
    let zero = Rational::zero();
    let mut aty = vec![Rational::zero(); n];
    let mut by = Rational::zero();
    for (row, y) in lp.rows().iter().zip(&sol.dual) {
        let ax: Rational = row.entries.iter().map(|(j, a)| a * &sol.primal[*j]).sum();
        let ok = match row.sense {
            Sense::Ge => ax >= row.rhs && *y >= zero,
            Sense::Eq => ax == row.rhs,
        };
        if !ok {
            return false;
        }
        for (j, a) in &row.entries {
            aty[*j] = &aty[*j] + &(a * y);
        }
        by = &by + &(&row.rhs * y);
    }
    let cx: Rational = lp.objective().iter().zip(&sol.primal).map(|(c, x)| c * x).sum();
    let signs_ok = lp.signs().iter().enumerate().all(|(j, s)| match s {
        VarSign::Free => aty[j] == lp.objective()[j],
        VarSign::NonNeg => sol.primal[j] >= zero && aty[j] <= lp.objective()[j],
    });
    signs_ok && cx == by && cx == sol.value
}
