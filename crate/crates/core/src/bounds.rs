//! Per-level certified bounds.
//!
//! At level `n` the charge is constrained to give `1/m` to every class
//! modulo each family modulus `m` dividing `N!_p` (for PR: `1` and the first
//! `n` primes). Writing `a_s` for the alive bit of `s mod N!_p`,
//!
//! ```text
//! upper_sup = min  sum_{m,j} alpha_{m,j} / m
//!             s.t. sum_m alpha_{m, s mod m} >= a_s   for every s,  alpha free
//! ```
//!
//! is the exact supremum over the truncated class. Its dual is a measure on
//! the classes mod `N!_p` with uniform marginals; path multisets are the
//! integral points of that polytope and give `lower_sup`. The infimum is
//! bracketed through the complement.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use crate::lp::{solve_with, LpProblem, LpSolution, LpStatus, Sense, SolveOptions, VarSign};
use crate::numtheory::{gcd, Level, DEFAULT_LEVEL_CAP};
use crate::paths::{
    check_thin_count, donate_greedy_until, intersect_products_witness, Partition, PathMultiset,
    ProductSpec, DEFAULT_GREEDY_BUDGET,
};
use crate::setexpr::{
    alive_vector_nf, normalize_with, AliveVector, Filter, NormalForm, SetExpr,
    DEFAULT_ATOM_BUDGET,
};
use crate::{Error, Rational};

/// Default row cap for the exact LP: the primorial of level 6.
pub const DEFAULT_MAX_LP_ROWS: u64 = 30_030;

/// Which moduli constrain the charge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FamilyKind {
    /// `1` and the first `n` primes at level `n`.
    #[default]
    Pr,
    /// The listed moduli that divide `N!_p`, plus `1`.
    Custom(Vec<u64>),
}

/// The moduli constraining the charge at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintFamily {
    moduli: Vec<u64>,
}

impl ConstraintFamily {
    pub fn pr(level: &Level) -> Self {
        let mut moduli = vec![1];
        moduli.extend_from_slice(level.primes());
        ConstraintFamily { moduli }
    }

    /// Sorted distinct moduli including `1`; every modulus must divide `N!_p`.
    pub fn custom(moduli: &[u64], level: &Level) -> Result<Self, Error> {
        let mut out = vec![1];
        for &m in moduli {
            if m == 0 {
                return Err(Error::InvalidInput("family modulus must be positive".into()));
            }
            if level.primorial() % m != 0 {
                return Err(Error::ModulusNotDividing {
                    modulus: m,
                    primorial: level.primorial(),
                });
            }
            out.push(m);
        }
        out.sort_unstable();
        out.dedup();
        Ok(ConstraintFamily { moduli: out })
    }

    /// The family at `level` for `kind`; custom moduli not dividing `N!_p`
    /// are left out.
    pub fn for_level(kind: &FamilyKind, level: &Level) -> Result<Self, Error> {
        match kind {
            FamilyKind::Pr => Ok(Self::pr(level)),
            FamilyKind::Custom(ms) => {
                let dividing: Vec<u64> = ms
                    .iter()
                    .copied()
                    .filter(|&m| m != 0 && level.primorial() % m == 0)
                    .collect();
                if let Some(&m) = ms.iter().find(|&&m| m == 0) {
                    return Err(Error::InvalidInput(format!("family modulus {m} must be positive")));
                }
                Self::custom(&dividing, level)
            }
        }
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// Whether `j` puts `N!_p / m` paths on every class of every modulus.
    pub fn admits(&self, j: &PathMultiset) -> bool {
        let total = j.level().primorial();
        self.moduli.iter().all(|&m| {
            let want = total / m;
            j.projection_mod(m).iter().all(|&c| c == want)
        })
    }
}

/// The covering LP: one free variable per (modulus, residue) and one `>=`
/// row per shift.
pub fn build_lp(alive: &AliveVector, family: &ConstraintFamily) -> Result<LpProblem, Error> {
    let level = alive.level();
    let total = level.primorial();
    let mut objective = Vec::new();
    let mut offsets = Vec::with_capacity(family.moduli.len());
    for &m in &family.moduli {
        if total % m != 0 {
            return Err(Error::ModulusNotDividing {
                modulus: m,
                primorial: total,
            });
        }
        offsets.push(objective.len());
        let weight = Rational::new(1, m);
        objective.extend(core::iter::repeat(weight).take(m as usize));
    }
    let signs = vec![VarSign::Free; objective.len()];
    let mut lp = LpProblem::new(objective, signs)?;
    for s in 0..total {
        let entries = family
            .moduli
            .iter()
            .zip(&offsets)
            .map(|(&m, &off)| (off + (s % m) as usize, Rational::one()))
            .collect();
        let rhs = if alive.get(s) {
            Rational::one()
        } else {
            Rational::zero()
        };
        lp.add_row(entries, Sense::Ge, rhs)?;
    }
    Ok(lp)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsConfig {
    pub family: FamilyKind,
    pub level_cap: usize,
    /// Levels with more shifts than this skip the LP (witness-only mode).
    pub max_lp_rows: u64,
    pub max_lp_nonzeros: usize,
    pub atom_budget: usize,
    pub greedy_budget: u64,
    /// Keep the LP solutions in the report.
    pub keep_certificates: bool,
    /// Keep the path multisets in the report.
    pub keep_witnesses: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            family: FamilyKind::Pr,
            level_cap: DEFAULT_LEVEL_CAP,
            max_lp_rows: DEFAULT_MAX_LP_ROWS,
            max_lp_nonzeros: crate::lp::DEFAULT_MAX_NONZEROS,
            atom_budget: DEFAULT_ATOM_BUDGET,
            greedy_budget: DEFAULT_GREEDY_BUDGET,
            keep_certificates: false,
            keep_witnesses: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperBound {
    pub value: Rational,
    pub certificate_ok: bool,
    /// Present when certificates were requested.
    pub solution: Option<LpSolution>,
}

/// Where a lower bound's witness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerSource {
    /// The full product itself.
    FullProduct,
    /// Redirected paths inside a product of residue sets contained in the
    /// alive set.
    Product,
    /// Greedy donations from the full product.
    Donation,
    /// An optimal LP dual vertex that is integral after scaling by `N!_p`.
    LpVertex,
}

impl LowerSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            LowerSource::FullProduct => "full-product",
            LowerSource::Product => "product",
            LowerSource::Donation => "donation",
            LowerSource::LpVertex => "lp-vertex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBound {
    pub value: Rational,
    /// Alive paths of the witness.
    pub count: u64,
    pub source: LowerSource,
    /// Whether the alive set's dead shifts form a product `×K_n` and the
    /// thin-count inequality holds for `×I_n \ ×K_n` with full `I_n`;
    /// `None` when the dead shifts are not a product.
    pub thin_count: Option<bool>,
    /// False when greedy donation stopped on its work budget.
    pub donation_complete: bool,
    /// Present when witnesses were requested.
    pub witness: Option<PathMultiset>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelBounds {
    pub level: usize,
    pub primorial: u64,
    pub moduli: Vec<u64>,
    pub alive: u64,
    pub complement_alive: u64,
    /// Absent in witness-only mode.
    pub upper_sup: Option<UpperBound>,
    pub lower_sup: LowerBound,
    pub complement_upper: Option<UpperBound>,
    pub complement_lower: LowerBound,
    /// `1 - complement_upper`; absent in witness-only mode.
    pub lower_inf: Option<Rational>,
    /// `1 - complement_lower`.
    pub upper_inf: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsReport {
    pub expression: String,
    pub levels: Vec<LevelBounds>,
}

/// Exact upper bound on the supremum at one level; `None` when the level
/// exceeds the LP row cap.
pub fn upper_sup(expr: &SetExpr, level: &Level, config: &BoundsConfig) -> Result<Option<UpperBound>, Error> {
    let nf = normalize_with(expr, config.atom_budget)?;
    let alive = alive_vector_nf(&nf, level);
    let family = ConstraintFamily::for_level(&config.family, level)?;
    upper_from_alive(&alive, &family, config).map(|r| r.map(|(u, _)| u))
}

/// Best witnessed lower bound on the supremum at one level.
pub fn lower_sup(expr: &SetExpr, level: &Level, config: &BoundsConfig) -> Result<LowerBound, Error> {
    let nf = normalize_with(expr, config.atom_budget)?;
    let alive = alive_vector_nf(&nf, level);
    let family = ConstraintFamily::for_level(&config.family, level)?;
    let lp = upper_from_alive(&alive, &family, config)?;
    lower_from_alive(&nf, &alive, &family, lp.as_ref().map(|(_, s)| s), config)
}

fn upper_from_alive(
    alive: &AliveVector,
    family: &ConstraintFamily,
    config: &BoundsConfig,
) -> Result<Option<(UpperBound, LpSolution)>, Error> {
    if alive.level().primorial() > config.max_lp_rows {
        return Ok(None);
    }
    let lp = build_lp(alive, family)?;
    let opts = SolveOptions {
        max_nonzeros: config.max_lp_nonzeros,
        ..SolveOptions::default()
    };
    let solution = solve_with(&lp, &opts)?;
    if solution.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "covering LP reported {:?}; a uniform measure is always feasible",
            solution.status
        )));
    }
    let upper = UpperBound {
        value: solution.value.clone(),
        certificate_ok: solution.certificate_ok,
        solution: config.keep_certificates.then(|| solution.clone()),
    };
    Ok(Some((upper, solution)))
}

struct Candidate {
    multiset: PathMultiset,
    count: u64,
    source: LowerSource,
}

/// `floor(value * total)` for a nonnegative `value`.
fn floor_times(value: &Rational, total: u64) -> u64 {
    let scaled = value.numer() * BigInt::from(total) / value.denom();
    u64::try_from(scaled).unwrap_or(total).min(total)
}

fn lower_from_alive(
    nf: &NormalForm,
    alive: &AliveVector,
    family: &ConstraintFamily,
    lp: Option<&LpSolution>,
    config: &BoundsConfig,
) -> Result<LowerBound, Error> {
    let level = alive.level();
    let total = level.primorial();
    let mut candidates = Vec::new();

    let full = PathMultiset::full_product(level);
    candidates.push(Candidate {
        count: full.count_alive(alive),
        multiset: full,
        source: LowerSource::FullProduct,
    });

    for sets in product_candidates(nf, alive) {
        let partitions: Vec<Partition> = sets
            .iter()
            .enumerate()
            .map(|(n, b)| {
                let a = (0..level.prime(n) as u32).filter(|v| !b.contains(v)).collect();
                (a, b.clone())
            })
            .collect();
        let j = intersect_products_witness(level, &partitions)?;
        candidates.push(Candidate {
            count: j.count_alive(alive),
            multiset: j,
            source: LowerSource::Product,
        });
    }

    // No multiset beats the LP optimum, so donation can stop there.
    let target = lp.map_or(total, |s| floor_times(&s.value, total));
    let reached = candidates
        .iter()
        .any(|c| c.count >= target && family.admits(&c.multiset));
    let mut donation_complete = true;
    if !reached {
        let greedy = donate_greedy_until(level, alive, config.greedy_budget, target);
        donation_complete = greedy.complete;
        candidates.push(Candidate {
            count: greedy.multiset.count_alive(alive),
            multiset: greedy.multiset,
            source: LowerSource::Donation,
        });
    }

    if let Some(j) = lp.and_then(|s| integral_dual(level, s)) {
        candidates.push(Candidate {
            count: j.count_alive(alive),
            multiset: j,
            source: LowerSource::LpVertex,
        });
    }

    // Only multisets that are feasible dual points of this family count.
    let mut best: Option<Candidate> = None;
    for c in candidates {
        if c.multiset.cardinality() != total || !c.multiset.has_uniform_marginals() {
            return Err(Error::Internal(format!(
                "{} witness lost uniform marginals",
                c.source.as_str()
            )));
        }
        if !family.admits(&c.multiset) {
            continue;
        }
        if best.as_ref().map_or(true, |b| c.count > b.count) {
            best = Some(c);
        }
    }
    let thin_count = dead_product(alive).map(|k_sets| {
        let i_sets = (0..level.n())
            .map(|n| (0..level.prime(n) as u32).collect())
            .collect();
        check_thin_count(&ProductSpec::difference(i_sets, k_sets))
    });
    Ok(match best {
        Some(c) => LowerBound {
            value: Rational::new(c.count, total),
            count: c.count,
            source: c.source,
            thin_count,
            donation_complete,
            witness: config.keep_witnesses.then_some(c.multiset),
        },
        // Composite family moduli can reject every path witness.
        None => LowerBound {
            value: Rational::zero(),
            count: 0,
            source: LowerSource::FullProduct,
            thin_count,
            donation_complete,
            witness: None,
        },
    })
}

/// The LP dual scaled by `N!_p`, when every entry is a nonnegative integer.
fn integral_dual(level: &Level, solution: &LpSolution) -> Option<PathMultiset> {
    let total = Rational::from(level.primorial());
    let mut counts = Vec::with_capacity(solution.dual.len());
    for y in &solution.dual {
        let scaled = y * &total;
        if !scaled.is_integer() || scaled.is_negative() {
            return None;
        }
        counts.push(u32::try_from(scaled.numer()).ok()?);
    }
    let pairs = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(s, &c)| (level.crt_invert(s as i128), c));
    PathMultiset::from_pairs(level, pairs).ok()
}

/// Residue sets `I_n` with `×I_n` inside the alive set: one guess per atom
/// of the normal form and the projections of the alive set itself. Guesses
/// that are not contained in the alive set are dropped.
fn product_candidates(nf: &NormalForm, alive: &AliveVector) -> Vec<Vec<Vec<u32>>> {
    let level = alive.level();
    let mut out: Vec<Vec<Vec<u32>>> = Vec::new();
    for atom in nf.atoms() {
        let m = atom.class.modulus();
        let r = atom.class.shift();
        let sets = (0..level.n())
            .map(|n| {
                let p = level.prime(n);
                if gcd(m, p) == p {
                    vec![(r % p) as u32]
                } else if atom.filter == Filter::Primes {
                    (1..p as u32).collect()
                } else {
                    (0..p as u32).collect()
                }
            })
            .collect();
        out.push(sets);
    }
    out.push(
        (0..level.n())
            .map(|n| residues_present(alive.bits(), level, n, true))
            .collect(),
    );
    out.sort();
    out.dedup();
    out.retain(|sets| product_within(sets, alive));
    out
}

fn residues_present(bits: &[bool], level: &Level, n: usize, value: bool) -> Vec<u32> {
    let p = level.prime(n);
    let mut seen = vec![false; p as usize];
    for (s, &b) in bits.iter().enumerate() {
        if b == value {
            seen[(s as u64 % p) as usize] = true;
        }
    }
    (0..p as u32).filter(|&v| seen[v as usize]).collect()
}

fn product_size(sets: &[Vec<u32>]) -> u64 {
    sets.iter().map(|s| s.len() as u64).product()
}

fn product_within(sets: &[Vec<u32>], alive: &AliveVector) -> bool {
    let level = alive.level();
    if sets.iter().any(|s| s.is_empty()) {
        return false;
    }
    let masks: Vec<Vec<bool>> = sets
        .iter()
        .enumerate()
        .map(|(n, set)| {
            let mut m = vec![false; level.prime(n) as usize];
            for &v in set {
                m[v as usize] = true;
            }
            m
        })
        .collect();
    let mut inside = 0u64;
    for s in 0..level.primorial() {
        if masks.iter().enumerate().all(|(n, m)| m[level.coord(s, n) as usize]) {
            if !alive.get(s) {
                return false;
            }
            inside += 1;
        }
    }
    inside == product_size(sets)
}

/// The sets `K_n` when the dead shifts are exactly `×K_n` (and nonempty).
fn dead_product(alive: &AliveVector) -> Option<Vec<Vec<u32>>> {
    let level = alive.level();
    let dead = level.primorial() - alive.count();
    if dead == 0 {
        return None;
    }
    let sets: Vec<Vec<u32>> = (0..level.n())
        .map(|n| residues_present(alive.bits(), level, n, false))
        .collect();
    (product_size(&sets) == dead).then_some(sets)
}

/// Bounds at one level for `expr` and its complement.
pub fn level_bounds(expr: &SetExpr, level: &Level, config: &BoundsConfig) -> Result<LevelBounds, Error> {
    let family = ConstraintFamily::for_level(&config.family, level)?;
    let nf = normalize_with(expr, config.atom_budget)?;
    let complement = SetExpr::Complement(alloc::boxed::Box::new(expr.clone()));
    let nf_c = normalize_with(&complement, config.atom_budget)?;
    let alive = alive_vector_nf(&nf, level);
    let alive_c = alive_vector_nf(&nf_c, level);

    let up = upper_from_alive(&alive, &family, config)?;
    let up_c = upper_from_alive(&alive_c, &family, config)?;
    let low = lower_from_alive(&nf, &alive, &family, up.as_ref().map(|(_, s)| s), config)?;
    let low_c = lower_from_alive(&nf_c, &alive_c, &family, up_c.as_ref().map(|(_, s)| s), config)?;

    let one = Rational::one();
    let lower_inf = up_c.as_ref().map(|(u, _)| &one - &u.value);
    let upper_inf = &one - &low_c.value;
    Ok(LevelBounds {
        level: level.n(),
        primorial: level.primorial(),
        moduli: family.moduli().to_vec(),
        alive: alive.count(),
        complement_alive: alive_c.count(),
        upper_sup: up.map(|(u, _)| u),
        lower_sup: low,
        complement_upper: up_c.map(|(u, _)| u),
        complement_lower: low_c,
        lower_inf,
        upper_inf,
    })
}

/// Bounds at levels `1..=max_level`, with the report invariants checked.
pub fn bounds_report(
    expr: &SetExpr,
    max_level: usize,
    config: &BoundsConfig,
) -> Result<BoundsReport, Error> {
    if max_level == 0 {
        return Err(Error::InvalidInput("max level must be at least 1".into()));
    }
    if max_level > config.level_cap {
        return Err(Error::LevelTooLarge {
            requested: max_level,
            cap: config.level_cap,
        });
    }
    if let FamilyKind::Custom(ms) = &config.family {
        let top = Level::with_cap(max_level, config.level_cap)?;
        if let Some(&m) = ms.iter().find(|&&m| m == 0 || top.primorial() % m != 0) {
            return Err(Error::ModulusNotDividing {
                modulus: m,
                primorial: top.primorial(),
            });
        }
    }
    let mut levels = Vec::with_capacity(max_level);
    for n in 1..=max_level {
        let level = Level::with_cap(n, config.level_cap)?;
        levels.push(level_bounds(expr, &level, config)?);
    }
    let report = BoundsReport {
        expression: alloc::string::ToString::to_string(expr),
        levels,
    };
    check_invariants(&report)?;
    Ok(report)
}

fn check_invariants(report: &BoundsReport) -> Result<(), Error> {
    let fail = |level: usize, what: &str| Err(Error::Internal(format!("level {level}: {what}")));
    let mut previous: Option<&Rational> = None;
    for lb in &report.levels {
        let n = lb.level;
        for u in [&lb.upper_sup, &lb.complement_upper].into_iter().flatten() {
            if !u.certificate_ok {
                return fail(n, "LP certificate rejected");
            }
        }
        if let Some(u) = &lb.upper_sup {
            if lb.lower_sup.value > u.value {
                return fail(n, "lower_sup exceeds upper_sup");
            }
            if previous.is_some_and(|p| u.value > *p) {
                return fail(n, "upper_sup increased with the level");
            }
            previous = Some(&u.value);
        }
        if let Some(u) = &lb.complement_upper {
            if lb.complement_lower.value > u.value {
                return fail(n, "complement lower bound exceeds its upper bound");
            }
        }
        if let Some(li) = &lb.lower_inf {
            if *li > lb.upper_inf {
                return fail(n, "lower_inf exceeds upper_inf");
            }
            if let Some(u) = &lb.upper_sup {
                if *li > u.value {
                    return fail(n, "lower_inf exceeds upper_sup");
                }
            }
        }
    }
    Ok(())
}
