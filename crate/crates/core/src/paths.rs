//! Path multisets: integral witnesses with uniform marginals.
//!
//! A path is a tuple of residues, one per prime of a level, identified here
//! with its CRT shift. A multiset of `N!_p` paths in which every residue of
//! every coordinate occurs `N!_p / p` times scales to a measure feasible for
//! the dual of the covering LP, so the number of its paths inside the alive
//! set divided by `N!_p` is a lower bound on the supremum.
//!
//! Coordinates are 0-based: coordinate `0` is the prime 2.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::numtheory::{CrtTuple, Level};
use crate::setexpr::AliveVector;
use crate::Error;

/// Default cap on candidate checks in [`donate_greedy`].
pub const DEFAULT_GREEDY_BUDGET: u64 = 50_000_000;

/// Levels whose primorial is at most this use arbitrary donor partners;
/// larger ones only try partners differing from the recipient in two
/// coordinates.
const GENERAL_DONOR_LIMIT: u64 = 2310;

/// Levels whose primorial is at most this also try a neutral exchange
/// followed by a donation when single donations stall.
const LOOKAHEAD_LIMIT: u64 = 210;

/// A multiset of paths stored as one multiplicity per shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMultiset {
    level: Level,
    counts: Vec<u32>,
}

impl PathMultiset {
    /// Every path exactly once.
    pub fn full_product(level: &Level) -> Self {
        PathMultiset {
            level: level.clone(),
            counts: vec![1; level.primorial() as usize],
        }
    }

    pub fn empty(level: &Level) -> Self {
        PathMultiset {
            level: level.clone(),
            counts: vec![0; level.primorial() as usize],
        }
    }

    /// Builds a multiset from `(tuple, multiplicity)` pairs; repeated tuples add up.
    pub fn from_pairs(
        level: &Level,
        pairs: impl IntoIterator<Item = (CrtTuple, u32)>,
    ) -> Result<Self, Error> {
        let mut out = PathMultiset::empty(level);
        for (t, m) in pairs {
            if !level.is_valid_tuple(&t) {
                return Err(Error::InvalidInput(format!(
                    "tuple {t} is not valid at level {}",
                    level.n()
                )));
            }
            let s = level.crt_shift(&t) as usize;
            out.counts[s] = out.counts[s]
                .checked_add(m)
                .ok_or_else(|| Error::InvalidInput("multiplicity overflow".into()))?;
        }
        Ok(out)
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn multiplicity(&self, t: &CrtTuple) -> u32 {
        if !self.level.is_valid_tuple(t) {
            return 0;
        }
        self.counts[self.level.crt_shift(t) as usize]
    }

    /// Multiplicity of the path with the given shift.
    pub fn multiplicity_at(&self, s: u64) -> u32 {
        self.counts[s as usize]
    }

    /// Multiplicities indexed by shift.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Total number of paths, with multiplicity.
    pub fn cardinality(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// `(tuple, multiplicity)` pairs with positive multiplicity, in
    /// lexicographic tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (CrtTuple, u32)> + '_ {
        LexShifts::new(&self.level).filter_map(move |s| {
            let c = self.counts[s as usize];
            (c > 0).then(|| (self.level.crt_invert(s as i128), c))
        })
    }

    /// How often each residue of coordinate `i` occurs.
    pub fn projection(&self, i: usize) -> Vec<u64> {
        let p = self.level.prime(i);
        let mut out = vec![0u64; p as usize];
        for (s, &c) in self.counts.iter().enumerate() {
            out[(s as u64 % p) as usize] += c as u64;
        }
        out
    }

    /// How often each residue modulo `m` occurs; `m` must divide `N!_p`.
    pub fn projection_mod(&self, m: u64) -> Vec<u64> {
        let mut out = vec![0u64; m as usize];
        for (s, &c) in self.counts.iter().enumerate() {
            out[(s as u64 % m) as usize] += c as u64;
        }
        out
    }

    /// Every residue of every coordinate occurs exactly `N!_p / p` times.
    pub fn has_uniform_marginals(&self) -> bool {
        let total = self.level.primorial();
        (0..self.level.n()).all(|i| {
            let want = total / self.level.prime(i);
            self.projection(i).iter().all(|&c| c == want)
        })
    }

    /// Number of paths (with multiplicity) whose shift is alive.
    pub fn count_alive(&self, alive: &AliveVector) -> u64 {
        self.counts
            .iter()
            .zip(alive.bits())
            .filter(|(_, a)| **a)
            .map(|(&c, _)| c as u64)
            .sum()
    }

    fn check_tuple(&self, t: &CrtTuple) -> Result<u64, Error> {
        if !self.level.is_valid_tuple(t) {
            return Err(Error::InvalidInput(format!(
                "tuple {t} is not valid at level {}",
                self.level.n()
            )));
        }
        Ok(self.level.crt_shift(t))
    }

    /// Swaps coordinate `n` between one copy of `j` and one copy of `k`.
    pub fn exchange(&self, j: &CrtTuple, k: &CrtTuple, n: usize) -> Result<PathMultiset, Error> {
        if n >= self.level.n() {
            return Err(Error::InvalidInput(format!("coordinate {n} out of range")));
        }
        let a = self.check_tuple(j)?;
        let b = self.check_tuple(k)?;
        let need_same = if a == b { 2 } else { 1 };
        if self.counts[a as usize] < need_same || self.counts[b as usize] < 1 {
            return Err(Error::PathNotPresent);
        }
        let mut out = self.clone();
        out.swap_coord(a, b, n);
        Ok(out)
    }

    fn swap_coord(&mut self, a: u64, b: u64, n: usize) {
        let va = self.level.coord(a, n);
        let vb = self.level.coord(b, n);
        let a2 = self.level.replace_coord(a, n, vb);
        let b2 = self.level.replace_coord(b, n, va);
        self.counts[a as usize] -= 1;
        self.counts[b as usize] -= 1;
        self.counts[a2 as usize] += 1;
        self.counts[b2 as usize] += 1;
    }

    /// Rearranges coordinate `j` so that every path whose coordinate `i` lies
    /// in `a_i` has coordinate `j` in `a_j`, keeping all projections.
    ///
    /// Requires at most as many paths through `a_i` at `i` as through `a_j`
    /// at `j`.
    pub fn redirect(&self, i: usize, j: usize, a_i: &[u32], a_j: &[u32]) -> Result<PathMultiset, Error> {
        let n = self.level.n();
        if i >= n || j >= n {
            return Err(Error::InvalidInput("coordinate out of range".into()));
        }
        let in_i = membership(a_i, self.level.prime(i))?;
        let in_j = membership(a_j, self.level.prime(j))?;
        let through_i: u64 = in_i
            .iter()
            .zip(self.projection(i))
            .filter(|(m, _)| **m)
            .map(|(_, c)| c)
            .sum();
        let through_j: u64 = in_j
            .iter()
            .zip(self.projection(j))
            .filter(|(m, _)| **m)
            .map(|(_, c)| c)
            .sum();
        if through_i > through_j {
            return Err(Error::DonorShortage {
                source: through_i,
                target: through_j,
            });
        }
        let level = &self.level;
        let passes_i = |s: u64| in_i[level.coord(s, i) as usize];
        let passes_j = |s: u64| in_j[level.coord(s, j) as usize];
        if i == j {
            let holds = (0..level.primorial())
                .all(|s| self.counts[s as usize] == 0 || !passes_i(s) || passes_j(s));
            return if holds {
                Ok(self.clone())
            } else {
                Err(Error::InvalidInput(
                    "with i = j the sets must already nest on the multiset".into(),
                ))
            };
        }
        let counts = &self.counts;
        let mut donors = LexShifts::new(level)
            .filter(|&s| passes_j(s) && !passes_i(s))
            .flat_map(|s| core::iter::repeat(s).take(counts[s as usize] as usize));
        let recipients = LexShifts::new(level)
            .filter(|&s| passes_i(s) && !passes_j(s))
            .flat_map(|s| core::iter::repeat(s).take(counts[s as usize] as usize));
        let mut out = self.clone();
        for r in recipients {
            let d = donors
                .next()
                .ok_or(Error::Internal("donor count below recipient count".into()))?;
            out.swap_coord(r, d, j);
        }
        Ok(out)
    }
}

fn membership(set: &[u32], p: u64) -> Result<Vec<bool>, Error> {
    let mut out = vec![false; p as usize];
    for &v in set {
        if v as u64 >= p {
            return Err(Error::InvalidInput(format!("residue {v} out of range for {p}")));
        }
        out[v as usize] = true;
    }
    Ok(out)
}

/// Shifts of a level in lexicographic order of their tuples.
pub struct LexShifts<'a> {
    level: &'a Level,
    coords: Vec<u32>,
    shift: u64,
    done: bool,
}

impl<'a> LexShifts<'a> {
    pub fn new(level: &'a Level) -> Self {
        LexShifts {
            level,
            coords: vec![0; level.n()],
            shift: 0,
            done: false,
        }
    }
}

impl Iterator for LexShifts<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let out = self.shift;
        let mut i = self.coords.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let p = self.level.prime(i) as u32;
            if self.coords[i] + 1 < p {
                self.coords[i] += 1;
                self.shift = self.level.replace_coord(self.shift, i, self.coords[i]);
                break;
            }
            self.coords[i] = 0;
            self.shift = self.level.replace_coord(self.shift, i, 0);
        }
        Some(out)
    }
}

/// Number of paths of `j` whose shift is alive.
pub fn witness_count(j: &PathMultiset, alive: &AliveVector) -> Result<u64, Error> {
    if j.level != *alive.level() {
        return Err(Error::InvalidInput("multiset and alive vector levels differ".into()));
    }
    Ok(j.count_alive(alive))
}

/// Per-coordinate partition `(A_n, B_n)` of the residues.
pub type Partition = (Vec<u32>, Vec<u32>);

/// The coordinate maximising `|A_n| / |B_n|` (an empty `B_n` counts as
/// infinite; ties go to the smallest index). It minimises `|B_n| / p_n`.
pub fn best_coordinate(partitions: &[Partition]) -> usize {
    let mut best = 0;
    for (n, (a, b)) in partitions.iter().enumerate().skip(1) {
        let (ba, bb) = (&partitions[best].0, &partitions[best].1);
        let better = match (b.is_empty(), bb.is_empty()) {
            (_, true) => false,
            (true, false) => true,
            _ => a.len() * bb.len() > ba.len() * b.len(),
        };
        if better {
            best = n;
        }
    }
    best
}

/// A multiset with uniform marginals in which `(N!_p / p_{n*}) |B_{n*}|`
/// paths lie in `×B_n`, with `n*` from [`best_coordinate`].
///
/// Starts from the full product and, for every other coordinate `n`,
/// redirects coordinate `n` so that paths through `B_{n*}` at `n*` pass
/// through `B_n` at `n`. Each step only rewrites coordinate `n`, so earlier
/// steps stay in force.
pub fn intersect_products_witness(level: &Level, partitions: &[Partition]) -> Result<PathMultiset, Error> {
    if partitions.len() != level.n() {
        return Err(Error::InvalidInput(format!(
            "{} partitions given for level {}",
            partitions.len(),
            level.n()
        )));
    }
    for (n, (a, b)) in partitions.iter().enumerate() {
        let p = level.prime(n);
        let in_a = membership(a, p)?;
        let in_b = membership(b, p)?;
        let partitions_residues = a.len() + b.len() == p as usize
            && in_a.iter().zip(&in_b).all(|(x, y)| x ^ y);
        if !partitions_residues {
            return Err(Error::InvalidInput(format!(
                "sets at coordinate {n} do not partition the residues mod {p}"
            )));
        }
    }
    let star = best_coordinate(partitions);
    let mut j = PathMultiset::full_product(level);
    if partitions[star].1.is_empty() {
        return Ok(j);
    }
    for (n, part) in partitions.iter().enumerate() {
        if n != star {
            j = j.redirect(star, n, &partitions[star].1, &part.1)?;
        }
    }
    Ok(j)
}

/// Paths of `j` inside the product `×sets[n]`.
pub fn product_count(j: &PathMultiset, sets: &[Vec<u32>]) -> Result<u64, Error> {
    let level = j.level();
    let masks = sets
        .iter()
        .enumerate()
        .map(|(n, s)| membership(s, level.prime(n)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..level.primorial())
        .filter(|&s| masks.iter().enumerate().all(|(n, m)| m[level.coord(s, n) as usize]))
        .map(|s| j.multiplicity_at(s) as u64)
        .sum())
}

/// Per-coordinate sets `I_n` and `K_n` describing `×I_n \ ×K_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpec {
    pub i_sets: Vec<Vec<u32>>,
    /// Empty at every coordinate when absent.
    pub k_sets: Option<Vec<Vec<u32>>>,
}

impl ProductSpec {
    pub fn product(i_sets: Vec<Vec<u32>>) -> Self {
        ProductSpec { i_sets, k_sets: None }
    }

    pub fn difference(i_sets: Vec<Vec<u32>>, k_sets: Vec<Vec<u32>>) -> Self {
        ProductSpec {
            i_sets,
            k_sets: Some(k_sets),
        }
    }

    /// Checks that every set lies in its coordinate's range.
    pub fn validate(&self, level: &Level) -> Result<(), Error> {
        if self.i_sets.len() != level.n()
            || self.k_sets.as_ref().is_some_and(|k| k.len() != level.n())
        {
            return Err(Error::InvalidInput("product spec length differs from level".into()));
        }
        for (n, set) in self.i_sets.iter().enumerate() {
            membership(set, level.prime(n))?;
        }
        if let Some(k) = &self.k_sets {
            for (n, set) in k.iter().enumerate() {
                membership(set, level.prime(n))?;
            }
        }
        Ok(())
    }

    fn k_len(&self, n: usize) -> u64 {
        self.k_sets.as_ref().map_or(0, |k| dedup_len(&k[n]))
    }

    /// `|H_n| = |I_n \ K_n|`.
    fn h_len(&self, n: usize) -> u64 {
        match &self.k_sets {
            None => dedup_len(&self.i_sets[n]),
            Some(k) => {
                let mut h: Vec<u32> = self.i_sets[n]
                    .iter()
                    .copied()
                    .filter(|v| !k[n].contains(v))
                    .collect();
                h.sort_unstable();
                h.dedup();
                h.len() as u64
            }
        }
    }
}

fn dedup_len(set: &[u32]) -> u64 {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len() as u64
}

/// The counting inequality that lets donations refill `×K_n` inside
/// `×I_n`: with `N*` the coordinates where `H_n` is nonempty,
///
/// ```text
/// sum_{m=0}^{max(N*-2,0)} (N*-1-m) sum_{M ⊆ N*, |M|=m} prod_{M} K_n prod_{N*\M} H_n prod_{rest} I_n
///   >= prod_n K_n
/// ```
///
/// evaluated exactly.
pub fn check_thin_count(spec: &ProductSpec) -> bool {
    let n = spec.i_sets.len();
    let star: Vec<usize> = (0..n).filter(|&i| spec.h_len(i) > 0).collect();
    let rest: BigInt = (0..n)
        .filter(|i| !star.contains(i))
        .map(|i| BigInt::from(dedup_len(&spec.i_sets[i])))
        .product();
    let n_star = star.len() as i64;
    let top = (n_star - 2).max(0) as usize;

    // e[m] = sum over m-subsets M of star of prod_M K * prod_{star \ M} H.
    let mut e: Vec<BigInt> = vec![BigInt::from(1)];
    for &i in &star {
        let k = BigInt::from(spec.k_len(i));
        let h = BigInt::from(spec.h_len(i));
        let mut next = vec![BigInt::zero(); e.len() + 1];
        for (m, v) in e.iter().enumerate() {
            next[m] += v * &h;
            next[m + 1] += v * &k;
        }
        e = next;
    }
    let mut lhs = BigInt::zero();
    for m in 0..=top {
        let coeff = BigInt::from(n_star - 1 - m as i64);
        let term = e.get(m).cloned().unwrap_or_default();
        lhs += coeff * term;
    }
    lhs *= rest;
    let rhs: BigInt = (0..n).map(|i| BigInt::from(spec.k_len(i))).product();
    lhs >= rhs
}

/// Outcome of a greedy donation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOutcome {
    pub multiset: PathMultiset,
    /// Number of exchanges applied.
    pub donations: u64,
    /// False when the work budget ran out before a local optimum or the
    /// target count.
    pub complete: bool,
}

/// [`donate_greedy_with`] under the default budget, returning the multiset.
pub fn donate_greedy(level: &Level, alive: &AliveVector) -> PathMultiset {
    donate_greedy_with(level, alive, DEFAULT_GREEDY_BUDGET).multiset
}

/// Starting from the full product, repeatedly applies exchanges that make a
/// dead path alive without killing a live one, until none applies.
///
/// Dead paths are visited in lexicographic order. For each one the
/// candidates are: coordinate `n`, target residue `v` (both ascending) such
/// that the dead path with residue `v` at `n` is alive, then a partner path
/// holding `v` at `n`, in lexicographic order, that stays alive (or was
/// dead) after taking the dead path's residue. On small levels every
/// partner is tried; on larger ones only partners that differ from the
/// revived path in one further coordinate. On the smallest levels a stalled
/// run also tries every exchange that keeps the alive count, in
/// lexicographic order, and keeps it when an improving exchange through one
/// of the two rewritten paths follows.
///
/// Every intermediate multiset keeps uniform marginals, so stopping early
/// when `budget` candidate checks are spent still yields a valid witness.
pub fn donate_greedy_with(level: &Level, alive: &AliveVector, budget: u64) -> GreedyOutcome {
    donate_greedy_until(level, alive, budget, level.primorial())
}

/// As [`donate_greedy_with`], also stopping once `target` paths are alive
/// (for instance when an upper bound shows no better count exists).
pub fn donate_greedy_until(level: &Level, alive: &AliveVector, budget: u64, target: u64) -> GreedyOutcome {
    let mut j = PathMultiset::full_product(level);
    let mut work = 0u64;
    let mut donations = 0u64;
    let mut count = alive.count();
    if count == 0 || count >= target {
        return GreedyOutcome {
            multiset: j,
            donations,
            complete: true,
        };
    }
    let general = level.primorial() <= GENERAL_DONOR_LIMIT;
    let order: Vec<u64> = if general {
        LexShifts::new(level).collect()
    } else {
        Vec::new()
    };
    let stopped = |j: PathMultiset, donations| GreedyOutcome {
        multiset: j,
        donations,
        complete: false,
    };
    loop {
        let mut changed = false;
        for d in LexShifts::new(level) {
            while j.counts[d as usize] > 0 && !alive.get(d) {
                let found = if general {
                    find_general(&j, alive, &order, d, &mut work, budget)
                } else {
                    find_rectangle(&j, alive, d, &mut work, budget)
                };
                match found {
                    Some((k, n)) => {
                        count += swap_gain(&j, alive, d, k, n) as u64;
                        j.swap_coord(d, k, n);
                        donations += 1;
                        changed = true;
                    }
                    None => break,
                }
                if count >= target {
                    return GreedyOutcome {
                        multiset: j,
                        donations,
                        complete: true,
                    };
                }
                if work >= budget {
                    return stopped(j, donations);
                }
            }
            if work >= budget {
                return stopped(j, donations);
            }
        }
        if !changed && level.primorial() <= LOOKAHEAD_LIMIT {
            let gain = lookahead(&mut j, alive, &order, &mut work, budget);
            changed = gain > 0;
            count += gain;
            donations += 2 * changed as u64;
            if work >= budget {
                return stopped(j, donations);
            }
        }
        if !changed {
            return GreedyOutcome {
                multiset: j,
                donations,
                complete: true,
            };
        }
    }
}

/// Alive paths among `a` and `b` after swapping coordinate `n`, minus before.
fn swap_gain(j: &PathMultiset, alive: &AliveVector, a: u64, b: u64, n: usize) -> i32 {
    let level = j.level();
    let (va, vb) = (level.coord(a, n), level.coord(b, n));
    let after = alive.get(level.replace_coord(a, n, vb)) as i32 + alive.get(level.replace_coord(b, n, va)) as i32;
    after - alive.get(a) as i32 - alive.get(b) as i32
}

/// Applies one neutral exchange and one improving exchange through a path it
/// rewrote, if such a pair exists, returning the gain. Any improving
/// exchange avoiding both rewritten paths was already available, so only
/// those two are tried.
fn lookahead(j: &mut PathMultiset, alive: &AliveVector, order: &[u64], work: &mut u64, budget: u64) -> u64 {
    let level = j.level().clone();
    for (ia, &a) in order.iter().enumerate() {
        for &b in &order[ia + 1..] {
            for n in 0..level.n() {
                if j.counts[a as usize] == 0 || j.counts[b as usize] == 0 {
                    continue;
                }
                let (va, vb) = (level.coord(a, n), level.coord(b, n));
                if va == vb || swap_gain(j, alive, a, b, n) != 0 {
                    continue;
                }
                let (a2, b2) = (level.replace_coord(a, n, vb), level.replace_coord(b, n, va));
                j.swap_coord(a, b, n);
                for x in [a2, b2] {
                    for m in 0..level.n() {
                        for &y in order {
                            let present = if y == x { 2 } else { 1 };
                            if j.counts[y as usize] < present {
                                continue;
                            }
                            *work += 1;
                            let gain = swap_gain(j, alive, x, y, m);
                            if gain > 0 {
                                j.swap_coord(x, y, m);
                                return gain as u64;
                            }
                        }
                    }
                }
                j.swap_coord(a2, b2, n);
                if *work >= budget {
                    return 0;
                }
            }
        }
    }
    0
}

/// Partner `k` and coordinate `n` for a donation to dead path `d`, trying
/// every present path.
fn find_general(
    j: &PathMultiset,
    alive: &AliveVector,
    order: &[u64],
    d: u64,
    work: &mut u64,
    budget: u64,
) -> Option<(u64, usize)> {
    let level = j.level();
    for n in 0..level.n() {
        let dn = level.coord(d, n);
        for v in 0..level.prime(n) as u32 {
            if v == dn || !alive.get(level.replace_coord(d, n, v)) {
                continue;
            }
            for &k in order {
                if level.coord(k, n) != v || j.counts[k as usize] == 0 {
                    continue;
                }
                *work += 1;
                if !alive.get(k) || alive.get(level.replace_coord(k, n, dn)) {
                    return Some((k, n));
                }
                if *work >= budget {
                    return None;
                }
            }
        }
    }
    None
}

/// As [`find_general`], restricted to partners `d` with residue `v` at `n`
/// and residue `w` at one other coordinate `m`.
fn find_rectangle(
    j: &PathMultiset,
    alive: &AliveVector,
    d: u64,
    work: &mut u64,
    budget: u64,
) -> Option<(u64, usize)> {
    let level = j.level();
    for n in 0..level.n() {
        let dn = level.coord(d, n);
        for v in 0..level.prime(n) as u32 {
            if v == dn {
                continue;
            }
            let revived = level.replace_coord(d, n, v);
            if !alive.get(revived) {
                continue;
            }
            for m in (0..level.n()).filter(|&m| m != n) {
                let dm = level.coord(d, m);
                for w in 0..level.prime(m) as u32 {
                    if w == dm {
                        continue;
                    }
                    let k = level.replace_coord(revived, m, w);
                    if j.counts[k as usize] == 0 {
                        continue;
                    }
                    *work += 1;
                    // The partner becomes `d` with `w` at `m`.
                    if !alive.get(k) || alive.get(level.replace_coord(d, m, w)) {
                        return Some((k, n));
                    }
                    if *work >= budget {
                        return None;
                    }
                }
            }
        }
    }
    None
}
