//! Exact rational linear programming.
//!
//! Problems are minimisations with `>=` or `=` rows over free or
//! nonnegative variables. [`solve`] runs a two-phase revised simplex with
//! Bland's rule on whichever standard form (primal or dual) has the smaller
//! basis, then recovers both the primal and the dual vector and checks the
//! strong-duality certificate with [`verify_certificate`].

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Rational};

/// Default nonzero budget for [`solve`].
pub const DEFAULT_MAX_NONZEROS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `a . x >= b`
    Ge,
    /// `a . x = b`
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSign {
    Free,
    NonNeg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub entries: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `minimize objective . x` subject to the rows and variable signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    objective: Vec<Rational>,
    signs: Vec<VarSign>,
    rows: Vec<Row>,
}

impl LpProblem {
    pub fn new(objective: Vec<Rational>, signs: Vec<VarSign>) -> Result<Self, Error> {
        if objective.len() != signs.len() {
            return Err(Error::InvalidInput(
                "objective and sign vectors differ in length".into(),
            ));
        }
        Ok(LpProblem {
            objective,
            signs,
            rows: Vec::new(),
        })
    }

    /// Adds a sparse row. Repeated indices are summed; zero entries dropped.
    pub fn add_row(
        &mut self,
        entries: Vec<(usize, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) -> Result<usize, Error> {
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(entries.len());
        let mut entries = entries;
        entries.sort_by_key(|e| e.0);
        for (j, v) in entries {
            if j >= self.objective.len() {
                return Err(Error::InvalidInput("row entry index out of range".into()));
            }
            match merged.last_mut() {
                Some((k, acc)) if *k == j => *acc += &v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|(_, v)| !v.is_zero());
        self.rows.push(Row {
            entries: merged,
            sense,
            rhs,
        });
        Ok(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.entries.len()).sum()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn signs(&self) -> &[VarSign] {
        &self.signs
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal objective; zero unless `status` is optimal.
    pub value: Rational,
    pub primal: Vec<Rational>,
    /// One multiplier per row; nonnegative on `>=` rows.
    pub dual: Vec<Rational>,
    pub certificate_ok: bool,
}

impl LpSolution {
    fn without_optimum(status: LpStatus) -> Self {
        LpSolution {
            status,
            value: Rational::zero(),
            primal: Vec::new(),
            dual: Vec::new(),
            certificate_ok: false,
        }
    }
}

/// Which standard form the simplex runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// The one with fewer rows (ties go to the primal).
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub orientation: Orientation,
    pub max_nonzeros: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            orientation: Orientation::Auto,
            max_nonzeros: DEFAULT_MAX_NONZEROS,
        }
    }
}

pub fn solve(problem: &LpProblem) -> Result<LpSolution, Error> {
    solve_with(problem, &SolveOptions::default())
}

pub fn solve_with(problem: &LpProblem, opts: &SolveOptions) -> Result<LpSolution, Error> {
    let nnz = problem.nonzeros();
    if nnz > opts.max_nonzeros {
        return Err(Error::LpBudget {
            what: "nonzeros",
            size: nnz,
            limit: opts.max_nonzeros,
        });
    }
    let use_dual = match opts.orientation {
        Orientation::Primal => false,
        Orientation::Dual => true,
        Orientation::Auto => problem.num_vars() < problem.num_rows(),
    };
    let (primal, dual) = if use_dual {
        let form = dual_form(problem);
        match form.solve() {
            StdOutcome::Optimal { x, pi } => {
                let dual = collapse_split(problem.rows.iter().map(|r| r.sense == Sense::Eq), &x);
                let primal = pi.into_iter().map(|v| -v).collect();
                (primal, dual)
            }
            StdOutcome::Unbounded => return Ok(LpSolution::without_optimum(LpStatus::Infeasible)),
            StdOutcome::Infeasible => {
                // Dual infeasible: the primal is infeasible or unbounded.
                let status = if primal_form(problem).feasible() {
                    LpStatus::Unbounded
                } else {
                    LpStatus::Infeasible
                };
                return Ok(LpSolution::without_optimum(status));
            }
        }
    } else {
        let form = primal_form(problem);
        match form.solve() {
            StdOutcome::Optimal { x, pi } => {
                let primal =
                    collapse_split(problem.signs.iter().map(|s| *s == VarSign::Free), &x);
                (primal, pi)
            }
            StdOutcome::Unbounded => return Ok(LpSolution::without_optimum(LpStatus::Unbounded)),
            StdOutcome::Infeasible => {
                return Ok(LpSolution::without_optimum(LpStatus::Infeasible))
            }
        }
    };
    let value = dot_dense(&problem.objective, &primal);
    let mut solution = LpSolution {
        status: LpStatus::Optimal,
        value,
        primal,
        dual,
        certificate_ok: false,
    };
    solution.certificate_ok = verify_certificate(problem, &solution);
    if !solution.certificate_ok {
        return Err(Error::Internal(
            "simplex returned a pair that fails the duality certificate".into(),
        ));
    }
    Ok(solution)
}

/// Re-checks an optimal pair from scratch: primal feasibility, dual
/// feasibility with the signs implied by row senses and variable signs, and
/// equality of both objectives with the reported value.
pub fn verify_certificate(problem: &LpProblem, solution: &LpSolution) -> bool {
    if solution.status != LpStatus::Optimal
        || solution.primal.len() != problem.num_vars()
        || solution.dual.len() != problem.num_rows()
    {
        return false;
    }
    let x = &solution.primal;
    let y = &solution.dual;
    for (xj, sign) in x.iter().zip(&problem.signs) {
        if *sign == VarSign::NonNeg && xj.is_negative() {
            return false;
        }
    }
    let mut reduced: Vec<Rational> = problem.objective.clone();
    let mut dual_value = Rational::zero();
    for (row, yi) in problem.rows.iter().zip(y) {
        let lhs: Rational = row.entries.iter().map(|(j, a)| a * &x[*j]).sum();
        let ok = match row.sense {
            Sense::Ge => lhs >= row.rhs && !yi.is_negative(),
            Sense::Eq => lhs == row.rhs,
        };
        if !ok {
            return false;
        }
        if !yi.is_zero() {
            for (j, a) in &row.entries {
                reduced[*j] -= &(a * yi);
            }
            dual_value += &(&row.rhs * yi);
        }
    }
    for (r, sign) in reduced.iter().zip(&problem.signs) {
        let ok = match sign {
            VarSign::Free => r.is_zero(),
            VarSign::NonNeg => !r.is_negative(),
        };
        if !ok {
            return false;
        }
    }
    let primal_value = dot_dense(&problem.objective, x);
    primal_value == dual_value && primal_value == solution.value
}

fn dot_dense(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Undo the `v = v+ - v-` split: `split[k]` says whether item `k` owns two
/// consecutive columns.
fn collapse_split(split: impl Iterator<Item = bool>, z: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut col = 0;
    for is_split in split {
        if is_split {
            out.push(&z[col] - &z[col + 1]);
            col += 2;
        } else {
            out.push(z[col].clone());
            col += 1;
        }
    }
    out
}

type SparseCol = Vec<(usize, Rational)>;

/// `minimize cost . z` subject to `G z = rhs`, `z >= 0`.
struct StdForm {
    rows: usize,
    cols: Vec<SparseCol>,
    cost: Vec<Rational>,
    rhs: Vec<Rational>,
}

enum StdOutcome {
    Optimal { x: Vec<Rational>, pi: Vec<Rational> },
    Infeasible,
    Unbounded,
}

fn primal_form(p: &LpProblem) -> StdForm {
    let mut by_var: Vec<SparseCol> = vec![Vec::new(); p.num_vars()];
    for (i, row) in p.rows.iter().enumerate() {
        for (j, a) in &row.entries {
            by_var[*j].push((i, a.clone()));
        }
    }
    let mut cols = Vec::new();
    let mut cost = Vec::new();
    for (j, col) in by_var.into_iter().enumerate() {
        if p.signs[j] == VarSign::Free {
            cols.push(col.iter().map(|(i, a)| (*i, -a)).collect());
            cols.insert(cols.len() - 1, col);
            cost.push(p.objective[j].clone());
            cost.push(-&p.objective[j]);
        } else {
            cols.push(col);
            cost.push(p.objective[j].clone());
        }
    }
    for (i, row) in p.rows.iter().enumerate() {
        if row.sense == Sense::Ge {
            cols.push(vec![(i, -Rational::one())]);
            cost.push(Rational::zero());
        }
    }
    StdForm {
        rows: p.num_rows(),
        cols,
        cost,
        rhs: p.rows.iter().map(|r| r.rhs.clone()).collect(),
    }
}

fn dual_form(p: &LpProblem) -> StdForm {
    let mut cols = Vec::new();
    let mut cost = Vec::new();
    for row in &p.rows {
        let col: SparseCol = row.entries.clone();
        if row.sense == Sense::Eq {
            let neg = col.iter().map(|(j, a)| (*j, -a)).collect();
            cols.push(col);
            cols.push(neg);
            cost.push(-&row.rhs);
            cost.push(row.rhs.clone());
        } else {
            cols.push(col);
            cost.push(-&row.rhs);
        }
    }
    for (j, sign) in p.signs.iter().enumerate() {
        if *sign == VarSign::NonNeg {
            cols.push(vec![(j, Rational::one())]);
            cost.push(Rational::zero());
        }
    }
    StdForm {
        rows: p.num_vars(),
        cols,
        cost,
        rhs: p.objective.clone(),
    }
}

struct Tableau<'a> {
    form: &'a StdForm,
    // Row signs applied so that the (flipped) right-hand side is nonnegative.
    flip: Vec<bool>,
    // Column index of the basic variable in each row; indices >= ncols are
    // artificials.
    basis: Vec<usize>,
    binv: Vec<Vec<Rational>>,
    xb: Vec<Rational>,
    in_basis: Vec<bool>,
}

impl StdForm {
    fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn feasible(&self) -> bool {
        let mut t = Tableau::new(self);
        t.phase_one()
    }

    fn solve(&self) -> StdOutcome {
        let mut t = Tableau::new(self);
        if !t.phase_one() {
            return StdOutcome::Infeasible;
        }
        t.drive_out_artificials();
        if !t.optimise(&self.cost, false) {
            return StdOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.ncols()];
        for (r, &b) in t.basis.iter().enumerate() {
            if b < self.ncols() {
                x[b] = t.xb[r].clone();
            }
        }
        let pi = t.multipliers(&self.cost);
        StdOutcome::Optimal { x, pi }
    }
}

impl<'a> Tableau<'a> {
    fn new(form: &'a StdForm) -> Self {
        let m = form.rows;
        let flip: Vec<bool> = form.rhs.iter().map(|b| b.is_negative()).collect();
        let xb = form
            .rhs
            .iter()
            .zip(&flip)
            .map(|(b, &f)| if f { -b } else { b.clone() })
            .collect();
        let binv = (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| if i == k { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Tableau {
            form,
            flip,
            basis: (form.ncols()..form.ncols() + m).collect(),
            binv,
            xb,
            in_basis: vec![false; form.ncols()],
        }
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.form.ncols()
    }

    /// `B^{-1} a` for structural column `j` (rows already sign-flipped).
    fn ftran(&self, j: usize) -> Vec<Rational> {
        let m = self.form.rows;
        let mut out = vec![Rational::zero(); m];
        for (i, a) in &self.form.cols[j] {
            let a = if self.flip[*i] { -a } else { a.clone() };
            for (r, o) in out.iter_mut().enumerate() {
                let b = &self.binv[r][*i];
                if !b.is_zero() {
                    *o += &(b * &a);
                }
            }
        }
        out
    }

    /// Entry `r` of `B^{-1} a_j`.
    fn row_entry(&self, r: usize, j: usize) -> Rational {
        let mut acc = Rational::zero();
        for (i, a) in &self.form.cols[j] {
            let b = &self.binv[r][*i];
            if !b.is_zero() {
                let term = b * a;
                if self.flip[*i] {
                    acc -= &term;
                } else {
                    acc += &term;
                }
            }
        }
        acc
    }

    fn basic_cost(&self, cost: &[Rational], col: usize, phase_one: bool) -> Rational {
        if phase_one {
            if self.is_artificial(col) {
                Rational::one()
            } else {
                Rational::zero()
            }
        } else if self.is_artificial(col) {
            Rational::zero()
        } else {
            cost[col].clone()
        }
    }

    /// Simplex multipliers for the flipped system.
    fn flipped_multipliers(&self, cost: &[Rational], phase_one: bool) -> Vec<Rational> {
        let m = self.form.rows;
        let mut pi = vec![Rational::zero(); m];
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = self.basic_cost(cost, b, phase_one);
            if cb.is_zero() {
                continue;
            }
            for (k, p) in pi.iter_mut().enumerate() {
                let v = &self.binv[r][k];
                if !v.is_zero() {
                    *p += &(&cb * v);
                }
            }
        }
        pi
    }

    /// Multipliers for the original (unflipped) rows.
    fn multipliers(&self, cost: &[Rational]) -> Vec<Rational> {
        self.flipped_multipliers(cost, false)
            .into_iter()
            .zip(&self.flip)
            .map(|(p, &f)| if f { -p } else { p })
            .collect()
    }

    fn reduced_cost(&self, j: usize, cost: &[Rational], pi: &[Rational], phase_one: bool) -> Rational {
        let mut d = if phase_one {
            Rational::zero()
        } else {
            cost[j].clone()
        };
        for (i, a) in &self.form.cols[j] {
            let p = &pi[*i];
            if !p.is_zero() {
                let term = p * a;
                if self.flip[*i] {
                    d += &term;
                } else {
                    d -= &term;
                }
            }
        }
        d
    }

    /// Runs Bland's-rule simplex; false if unbounded.
    fn optimise(&mut self, cost: &[Rational], phase_one: bool) -> bool {
        loop {
            let pi = self.flipped_multipliers(cost, phase_one);
            let entering = (0..self.form.ncols()).find(|&j| {
                !self.in_basis[j] && self.reduced_cost(j, cost, &pi, phase_one).is_negative()
            });
            let Some(j) = entering else {
                return true;
            };
            let u = self.ftran(j);
            let mut leave: Option<(usize, Rational)> = None;
            for (r, ur) in u.iter().enumerate() {
                if !ur.is_positive() {
                    continue;
                }
                let ratio = &self.xb[r] / ur;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, j, &u);
        }
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[Rational]) {
        let piv = u[r].clone();
        for v in self.binv[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v / &piv;
            }
        }
        self.xb[r] = &self.xb[r] / &piv;
        let pivot_row = self.binv[r].clone();
        let pivot_x = self.xb[r].clone();
        for (i, f) in u.iter().enumerate().take(self.form.rows) {
            if i == r || f.is_zero() {
                continue;
            }
            for (v, pr) in self.binv[i].iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *v -= &(f * pr);
                }
            }
            self.xb[i] -= &(f * &pivot_x);
        }
        let old = self.basis[r];
        if !self.is_artificial(old) {
            self.in_basis[old] = false;
        }
        self.basis[r] = j;
        self.in_basis[j] = true;
    }

    fn phase_one(&mut self) -> bool {
        let empty: Vec<Rational> = Vec::new();
        self.optimise(&empty, true);
        self.basis
            .iter()
            .zip(&self.xb)
            .all(|(&b, x)| !self.is_artificial(b) || x.is_zero())
    }

    /// Pivots zero-valued artificials out where a structural column allows;
    /// rows where none does are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.form.rows {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let candidate =
                (0..self.form.ncols()).find(|&j| !self.in_basis[j] && !self.row_entry(r, j).is_zero());
            if let Some(j) = candidate {
                let u = self.ftran(j);
                self.pivot(r, j, &u);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn int(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn single_bound() {
        let mut p = LpProblem::new(vec![int(1)], vec![VarSign::Free]).unwrap();
        p.add_row(vec![(0, int(1))], Sense::Ge, int(1)).unwrap();
        for orientation in [Orientation::Primal, Orientation::Dual] {
            let s = solve_with(&p, &SolveOptions { orientation, ..Default::default() }).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert_eq!(s.value, int(1));
            assert!(s.certificate_ok);
        }
    }

    #[test]
    fn cheaper_variable() {
        let mut p = LpProblem::new(vec![int(1), r(1, 2)], vec![VarSign::Free; 2]).unwrap();
        p.add_row(vec![(0, int(1)), (1, int(1))], Sense::Ge, int(1)).unwrap();
        p.add_row(vec![(0, int(1))], Sense::Ge, int(0)).unwrap();
        p.add_row(vec![(1, int(1))], Sense::Ge, int(0)).unwrap();
        for orientation in [Orientation::Primal, Orientation::Dual] {
            let s = solve_with(&p, &SolveOptions { orientation, ..Default::default() }).unwrap();
            assert_eq!(s.value, r(1, 2));
            assert_eq!(s.primal, vec![int(0), int(1)]);
        }
    }

    #[test]
    fn statuses() {
        // x >= 1, -x >= 0: infeasible.
        let mut p = LpProblem::new(vec![int(1)], vec![VarSign::Free]).unwrap();
        p.add_row(vec![(0, int(1))], Sense::Ge, int(1)).unwrap();
        p.add_row(vec![(0, int(-1))], Sense::Ge, int(0)).unwrap();
        for orientation in [Orientation::Primal, Orientation::Dual] {
            let opts = SolveOptions { orientation, ..Default::default() };
            assert_eq!(solve_with(&p, &opts).unwrap().status, LpStatus::Infeasible);
        }
        // minimize -x, x >= 1: unbounded.
        let mut q = LpProblem::new(vec![int(-1)], vec![VarSign::Free]).unwrap();
        q.add_row(vec![(0, int(1))], Sense::Ge, int(1)).unwrap();
        for orientation in [Orientation::Primal, Orientation::Dual] {
            let opts = SolveOptions { orientation, ..Default::default() };
            assert_eq!(solve_with(&q, &opts).unwrap().status, LpStatus::Unbounded);
        }
    }

    #[test]
    fn equality_rows_and_redundancy() {
        // x + y = 1 twice (redundant), x - y = 0, nonneg; minimize x.
        let mut p = LpProblem::new(vec![int(1), int(0)], vec![VarSign::NonNeg; 2]).unwrap();
        p.add_row(vec![(0, int(1)), (1, int(1))], Sense::Eq, int(1)).unwrap();
        p.add_row(vec![(0, int(2)), (1, int(2))], Sense::Eq, int(2)).unwrap();
        p.add_row(vec![(0, int(1)), (1, int(-1))], Sense::Eq, int(0)).unwrap();
        for orientation in [Orientation::Primal, Orientation::Dual] {
            let s = solve_with(&p, &SolveOptions { orientation, ..Default::default() }).unwrap();
            assert_eq!(s.value, r(1, 2));
            assert!(verify_certificate(&p, &s));
        }
    }

    #[test]
    fn certificate_rejects_tampering() {
        let mut p = LpProblem::new(vec![int(1), r(1, 2)], vec![VarSign::Free; 2]).unwrap();
        p.add_row(vec![(0, int(1)), (1, int(1))], Sense::Ge, int(1)).unwrap();
        p.add_row(vec![(0, int(1))], Sense::Ge, int(0)).unwrap();
        p.add_row(vec![(1, int(1))], Sense::Ge, int(0)).unwrap();
        let s = solve(&p).unwrap();
        assert!(verify_certificate(&p, &s));

        let mut bad = s.clone();
        bad.primal[1] = &bad.primal[1] - &r(1, 1_000_000_000);
        assert!(!verify_certificate(&p, &bad));

        let mut flipped = s.clone();
        let k = flipped.dual.iter().position(|y| !y.is_zero()).unwrap();
        flipped.dual[k] = -&flipped.dual[k];
        assert!(!verify_certificate(&p, &flipped));

        let mut wrong_value = s;
        wrong_value.value = int(7);
        assert!(!verify_certificate(&p, &wrong_value));
    }

    #[test]
    fn nonzero_budget() {
        let mut p = LpProblem::new(vec![int(1), int(1)], vec![VarSign::Free; 2]).unwrap();
        p.add_row(vec![(0, int(1)), (1, int(1))], Sense::Ge, int(1)).unwrap();
        let opts = SolveOptions {
            max_nonzeros: 1,
            ..Default::default()
        };
        assert!(matches!(solve_with(&p, &opts), Err(Error::LpBudget { .. })));
    }

    #[test]
    fn deterministic() {
        let mut p = LpProblem::new(vec![int(1), int(1), int(1)], vec![VarSign::NonNeg; 3]).unwrap();
        p.add_row(vec![(0, int(1)), (1, int(1))], Sense::Ge, int(1)).unwrap();
        p.add_row(vec![(1, int(1)), (2, int(1))], Sense::Ge, int(1)).unwrap();
        p.add_row(vec![(0, int(1)), (2, int(1))], Sense::Ge, int(1)).unwrap();
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.value, r(3, 2));
    }
}
