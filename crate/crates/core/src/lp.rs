//! Dense two-phase primal simplex and the max-min schedule programs built on it.
//!
//! Every schedule program here has the form
//!
//! ```text
//! maximize tau  s.t.  tau <= sum_s F[k][s] lambda_s  (every row k),
//!                     sum_s lambda_s = 1,  lambda >= 0,  tau >= 0
//! ```
//!
//! with one row per cut. Restricting the rows to the prefix chain of a
//! permutation gives the chain program whose basic solutions have at most
//! `N + 1` active states.

use crate::error::{Error, Result};
use crate::model::{CutSet, CutValueTable, Schedule};
use crate::num::Scalar;
use crate::submodular::ChainPermutation;

/// Entries at or below this never qualify in a ratio test.
pub const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-9;
const DUALITY_TOL: f64 = 1e-8;
const MAX_PIVOTS: usize = 200_000;

/// Default refusal limit for the all-cuts program.
pub const FULL_LP_LIMIT: usize = 10;

/// `maximize c.x  s.t.  a_ub x <= b_ub,  a_eq x = b_eq,  x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem<T> {
    pub c: Vec<T>,
    pub a_ub: Vec<Vec<T>>,
    pub b_ub: Vec<T>,
    pub a_eq: Vec<Vec<T>>,
    pub b_eq: Vec<T>,
}

impl<T: Scalar> LpProblem<T> {
    pub fn new(c: Vec<T>) -> Self {
        Self {
            c,
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
        }
    }

    pub fn le(mut self, row: Vec<T>, b: T) -> Self {
        self.a_ub.push(row);
        self.b_ub.push(b);
        self
    }

    pub fn eq(mut self, row: Vec<T>, b: T) -> Self {
        self.a_eq.push(row);
        self.b_eq.push(b);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b_ub.len() + self.b_eq.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if self.a_ub.len() != self.b_ub.len() || self.a_eq.len() != self.b_eq.len() {
            return Err(Error::InvalidInput("constraint row and bound counts differ".into()));
        }
        let rows_ok = self.a_ub.iter().chain(&self.a_eq).all(|r| r.len() == n);
        if !rows_ok {
            return Err(Error::InvalidInput("constraint row length differs from objective".into()));
        }
        let finite = self
            .c
            .iter()
            .chain(self.b_ub.iter())
            .chain(self.b_eq.iter())
            .chain(self.a_ub.iter().flatten())
            .chain(self.a_eq.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite LP data".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub value: T,
    /// Structural variables in the final basis, ascending.
    pub basis: Vec<usize>,
    /// Multipliers of the inequality rows (nonnegative at an optimum).
    pub dual_ub: Vec<T>,
    /// Multipliers of the equality rows.
    pub dual_eq: Vec<T>,
    pub pivots: usize,
}

impl<T: Scalar> LpSolution<T> {
    fn without_optimum(status: LpStatus, n: usize, pivots: usize) -> Self {
        Self {
            status,
            x: vec![T::zero(); n],
            value: T::nan(),
            basis: Vec::new(),
            dual_ub: Vec::new(),
            dual_eq: Vec::new(),
            pivots,
        }
    }

    /// `b_ub . y + b_eq . z`.
    pub fn dual_value(&self, p: &LpProblem<T>) -> T {
        let a: T = p.b_ub.iter().zip(&self.dual_ub).map(|(&b, &y)| b * y).sum();
        let b: T = p.b_eq.iter().zip(&self.dual_eq).map(|(&b, &y)| b * y).sum();
        a + b
    }

    pub fn support(&self) -> Vec<usize> {
        let eps = T::tol(FEASIBILITY_TOL);
        (0..self.x.len()).filter(|&j| self.x[j] > eps).collect()
    }
}

struct Tableau<T> {
    a: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    obj: Vec<T>,
    obj_val: T,
    pivots: usize,
}

enum Phase {
    Done,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = T::one() / self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v *= inv;
        }
        self.rhs[r] *= inv;
        self.a[r][c] = T::one();
        let prow = self.a[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.a.len() {
            if i == r {
                continue;
            }
            let f = self.a[i][c];
            if f == T::zero() {
                continue;
            }
            for (v, &p) in self.a[i].iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.a[i][c] = T::zero();
            self.rhs[i] -= f * prhs;
            if self.rhs[i] < T::zero() && self.rhs[i] > -T::tol(FEASIBILITY_TOL) {
                self.rhs[i] = T::zero();
            }
        }
        let f = self.obj[c];
        if f != T::zero() {
            for (v, &p) in self.obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.obj[c] = T::zero();
            self.obj_val -= f * prhs;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule: lowest eligible improving column, lowest basic index on
    /// ratio ties.
    fn run(&mut self, eligible: impl Fn(usize) -> bool) -> Result<Phase> {
        let rc_tol = T::tol(REDUCED_COST_TOL);
        let piv_tol = T::tol(PIVOT_TOL);
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numerical("simplex pivot limit reached".into()));
            }
            let Some(c) = (0..self.obj.len()).find(|&j| eligible(j) && self.obj[j] < -rc_tol) else {
                return Ok(Phase::Done);
            };
            let mut best: Option<(T, usize)> = None;
            let mut tiny_positive = false;
            for i in 0..self.a.len() {
                let v = self.a[i][c];
                if v > piv_tol {
                    let ratio = self.rhs[i].max(T::zero()) / v;
                    let better = match best {
                        None => true,
                        Some((br, bi)) => {
                            let tie = T::tol(1e-12) * (T::one() + br.abs());
                            ratio < br - tie || (ratio <= br + tie && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                } else if v > T::zero() {
                    tiny_positive = true;
                }
            }
            match best {
                Some((_, r)) => self.pivot(r, c),
                None if tiny_positive => {
                    return Err(Error::Numerical(format!(
                        "column {c} has only pivots below {PIVOT_TOL:e}"
                    )))
                }
                None => return Ok(Phase::Unbounded),
            }
        }
    }
}

/// Two-phase dense primal simplex with Bland's rule.
///
/// Structural variables come first, then one slack per inequality row, then
/// one artificial per row that needs it. Duals are read off the reduced costs
/// of the slack and artificial columns.
pub fn simplex_solve<T: Scalar>(p: &LpProblem<T>) -> Result<LpSolution<T>> {
    p.validate()?;
    let n = p.num_vars();
    let m_ub = p.b_ub.len();
    let m = p.num_rows();
    // Row sign so that every right-hand side is nonnegative.
    let sign: Vec<T> = p
        .b_ub
        .iter()
        .chain(&p.b_eq)
        .map(|&b| if b < T::zero() { -T::one() } else { T::one() })
        .collect();
    let needs_art: Vec<bool> = (0..m).map(|i| i >= m_ub || sign[i] < T::zero()).collect();
    let art_col: Vec<Option<usize>> = {
        let mut next = n + m_ub;
        needs_art
            .iter()
            .map(|&need| {
                need.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let ncols = n + m_ub + needs_art.iter().filter(|&&b| b).count();
    let mut a = vec![vec![T::zero(); ncols]; m];
    let mut rhs = vec![T::zero(); m];
    let mut basis = vec![0; m];
    for i in 0..m {
        let (row, b) = if i < m_ub {
            (&p.a_ub[i], p.b_ub[i])
        } else {
            (&p.a_eq[i - m_ub], p.b_eq[i - m_ub])
        };
        for j in 0..n {
            a[i][j] = sign[i] * row[j];
        }
        rhs[i] = sign[i] * b;
        if i < m_ub {
            a[i][n + i] = sign[i];
        }
        match art_col[i] {
            Some(c) => {
                a[i][c] = T::one();
                basis[i] = c;
            }
            None => basis[i] = n + i,
        }
    }
    let is_art = |j: usize| j >= n + m_ub;

    // Phase 1: maximize minus the sum of artificials.
    let mut obj = vec![T::zero(); ncols];
    let mut obj_val = T::zero();
    for i in (0..m).filter(|&i| needs_art[i]) {
        for j in (0..ncols).filter(|&j| !is_art(j)) {
            obj[j] -= a[i][j];
        }
        obj_val -= rhs[i];
    }
    let mut tab = Tableau {
        a,
        rhs,
        basis,
        obj,
        obj_val,
        pivots: 0,
    };
    if needs_art.iter().any(|&b| b) {
        tab.run(|_| true)?;
        let scale = T::one() + p.b_ub.iter().chain(&p.b_eq).fold(T::zero(), |acc, b| acc.max(b.abs()));
        if tab.obj_val < -T::tol(FEASIBILITY_TOL) * scale {
            return Ok(LpSolution::without_optimum(LpStatus::Infeasible, n, tab.pivots));
        }
        // Drive zero-level artificials out of the basis where possible; the
        // rest sit on redundant rows and stay at zero.
        for r in 0..m {
            if is_art(tab.basis[r]) {
                let piv_tol = T::tol(FEASIBILITY_TOL);
                if let Some(c) = (0..n + m_ub).find(|&j| tab.a[r][j].abs() > piv_tol) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase 2.
    let mut cost = vec![T::zero(); ncols];
    cost[..n].copy_from_slice(&p.c);
    tab.obj = vec![T::zero(); ncols];
    tab.obj_val = T::zero();
    for j in 0..ncols {
        let mut d = -cost[j];
        for i in 0..m {
            d += cost[tab.basis[i]] * tab.a[i][j];
        }
        tab.obj[j] = d;
    }
    for i in 0..m {
        tab.obj_val += cost[tab.basis[i]] * tab.rhs[i];
    }
    if let Phase::Unbounded = tab.run(|j| !is_art(j))? {
        return Ok(LpSolution::without_optimum(LpStatus::Unbounded, n, tab.pivots));
    }

    let mut x = vec![T::zero(); n];
    let mut basic: Vec<usize> = Vec::new();
    for i in 0..m {
        let b = tab.basis[i];
        if b < n {
            x[b] = tab.rhs[i].max(T::zero());
            basic.push(b);
        }
    }
    basic.sort_unstable();
    let value: T = p.c.iter().zip(&x).map(|(&c, &v)| c * v).sum();
    // A flipped inequality has surplus column -e_i, which cancels the flip.
    let dual_ub: Vec<T> = (0..m_ub).map(|i| tab.obj[n + i]).collect();
    let dual_eq: Vec<T> = (m_ub..m)
        .map(|i| sign[i] * tab.obj[art_col[i].expect("equality rows carry artificials")])
        .collect();
    let sol = LpSolution {
        status: LpStatus::Optimal,
        x,
        value,
        basis: basic,
        dual_ub,
        dual_eq,
        pivots: tab.pivots,
    };
    let dv = sol.dual_value(p);
    if (dv - value).abs() > T::tol(DUALITY_TOL) * value.abs().max(T::one()) {
        return Err(Error::Numerical(format!(
            "strong duality violated: primal {value}, dual {dv}"
        )));
    }
    Ok(sol)
}

/// Optimum of a max-min schedule program.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxMin<T> {
    pub tau: T,
    pub schedule: Schedule<T>,
    /// Dual weight of every row; a probability vector over the rows when
    /// `tau > 0`.
    pub row_weights: Vec<T>,
    pub solution: LpSolution<T>,
}

/// `max tau  s.t.  tau <= rows[k] . lambda,  sum lambda = 1,  lambda, tau >= 0`.
pub fn solve_max_min<T: Scalar>(rows: &[Vec<T>]) -> Result<MaxMin<T>> {
    let s = rows.first().map_or(0, Vec::len);
    if s == 0 {
        return Err(Error::InvalidInput("max-min program without states".into()));
    }
    let mut c = vec![T::zero(); s + 1];
    c[s] = T::one();
    let mut p = LpProblem::new(c);
    for r in rows {
        let mut row: Vec<T> = r.iter().map(|&v| -v).collect();
        row.push(T::one());
        p = p.le(row, T::zero());
    }
    let mut simplex = vec![T::one(); s];
    simplex.push(T::zero());
    p = p.eq(simplex, T::one());
    let sol = simplex_solve(&p)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::LpStatus("infeasible")),
        LpStatus::Unbounded => return Err(Error::LpStatus("unbounded")),
    }
    let tau = sol.x[s];
    let schedule = Schedule::from_weights(sol.x[..s].to_vec())?;
    Ok(MaxMin {
        tau,
        schedule,
        row_weights: sol.dual_ub.clone(),
        solution: sol,
    })
}

/// Rows `f_s(prefix_k)` over all states, along the prefix chain of `pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct FPiMatrix<T> {
    pub pi: ChainPermutation,
    pub rows: Vec<Vec<T>>,
}

impl<T: Scalar> FPiMatrix<T> {
    /// Row `k` dotted with `lambda`.
    pub fn row_value(&self, k: usize, lambda: &Schedule<T>) -> T {
        lambda.support().iter().map(|&s| self.rows[k][s] * lambda.prob(s)).sum()
    }
}

pub fn build_f_pi<T: Scalar>(table: &CutValueTable<T>, pi: &ChainPermutation) -> Result<FPiMatrix<T>> {
    if pi.len() != table.n_relays() {
        return Err(Error::InvalidInput(format!(
            "permutation of {} elements for {} relays",
            pi.len(),
            table.n_relays()
        )));
    }
    let rows = pi
        .prefix_sets()
        .into_iter()
        .map(|a| (0..table.num_states()).map(|s| table.value(s, a)).collect())
        .collect();
    Ok(FPiMatrix { pi: pi.clone(), rows })
}

/// Row 0 is the empty-cut row of `F`; row `1 + pi_k` is `F[k] - F[k-1]`, so
/// `[1, w] . H` telescopes to `F[k]` at the indicator of the `k`-th prefix.
pub fn build_h_pi_f<T: Scalar>(f: &FPiMatrix<T>) -> Vec<Vec<T>> {
    let mut h = vec![Vec::new(); f.rows.len()];
    h[0] = f.rows[0].clone();
    for (k, &p) in f.pi.as_slice().iter().enumerate() {
        h[p + 1] = f.rows[k + 1].iter().zip(&f.rows[k]).map(|(&a, &b)| a - b).collect();
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct P2Solution<T> {
    pub tau: T,
    pub schedule: Schedule<T>,
    pub solution: LpSolution<T>,
}

/// The chain program for `F`: at most `N + 1` active states.
pub fn solve_p2<T: Scalar>(f: &FPiMatrix<T>) -> Result<P2Solution<T>> {
    let mm = solve_max_min(&f.rows)?;
    let n = f.pi.len();
    let mut schedule = mm.schedule;
    if !schedule.is_simple(n) {
        // Only reachable with tau nonbasic at zero; every schedule meets 0.
        let first = schedule.support()[0];
        schedule = Schedule::point_mass(schedule.num_states(), first);
    }
    Ok(P2Solution {
        tau: mm.tau,
        schedule,
        solution: mm.solution,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FullLp<T> {
    pub c_prime: T,
    pub schedule: Schedule<T>,
    /// Dual weight of every cut, indexed by mask.
    pub cut_weights: Vec<T>,
    pub solution: LpSolution<T>,
}

/// The program over all `2^N` cuts: the exact value of `C'`.
pub fn solve_full_lp<T: Scalar>(table: &CutValueTable<T>) -> Result<FullLp<T>> {
    solve_full_lp_with_limit(table, FULL_LP_LIMIT)
}

pub fn solve_full_lp_with_limit<T: Scalar>(table: &CutValueTable<T>, limit: usize) -> Result<FullLp<T>> {
    let n = table.n_relays();
    if n > limit {
        return Err(Error::TooLarge {
            what: "all-cuts linear program",
            size: n,
            limit,
        });
    }
    let rows: Vec<Vec<T>> = (0..table.num_cuts())
        .map(|a| (0..table.num_states()).map(|s| table.value(s, CutSet(a as u32))).collect())
        .collect();
    let mm = solve_max_min(&rows)?;
    Ok(FullLp {
        c_prime: mm.tau,
        schedule: mm.schedule,
        cut_weights: mm.row_weights,
        solution: mm.solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_feasible(p: &LpProblem<f64>, s: &LpSolution<f64>) {
        assert!(s.x.iter().all(|&v| v >= 0.0));
        for (row, &b) in p.a_ub.iter().zip(&p.b_ub) {
            let lhs: f64 = row.iter().zip(&s.x).map(|(a, x)| a * x).sum();
            assert!(lhs <= b + 1e-9, "{lhs} > {b}");
        }
        for (row, &b) in p.a_eq.iter().zip(&p.b_eq) {
            let lhs: f64 = row.iter().zip(&s.x).map(|(a, x)| a * x).sum();
            assert!((lhs - b).abs() <= 1e-9);
        }
        assert!(s.support().len() <= p.num_rows());
        assert!(s.dual_ub.iter().all(|&y| y >= -1e-9));
        assert!((s.dual_value(p) - s.value).abs() <= 1e-8 * s.value.abs().max(1.0));
    }

    #[test]
    fn two_state_max_min_by_hand() {
        // max tau: tau <= 2 l1, tau <= 3 l2, l1 + l2 = 1.
        let p = LpProblem::new(vec![0.0f64, 0.0, 1.0])
            .le(vec![-2.0, 0.0, 1.0], 0.0)
            .le(vec![0.0, -3.0, 1.0], 0.0)
            .eq(vec![1.0, 1.0, 0.0], 1.0);
        let s = simplex_solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 1.2).abs() < 1e-12);
        assert!((s.x[0] - 0.6).abs() < 1e-12 && (s.x[1] - 0.4).abs() < 1e-12);
        check_feasible(&p, &s);
    }

    #[test]
    fn single_bound() {
        let p = LpProblem::new(vec![1.0f64]).le(vec![1.0], 1.0);
        let s = simplex_solve(&p).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.basis, vec![0]);
        assert_eq!(s.dual_ub, vec![1.0]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = LpProblem::new(vec![1.0f64]).le(vec![1.0], -1.0);
        assert_eq!(simplex_solve(&p).unwrap().status, LpStatus::Infeasible);
        let p = LpProblem::new(vec![1.0f64, 0.0]).le(vec![0.0, 1.0], 1.0);
        assert_eq!(simplex_solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn greater_equal_rows_and_negative_duals_of_equalities() {
        // max -x1 - x2 s.t. x1 + x2 >= 2, x1 - x2 = 0.
        let p = LpProblem::new(vec![-1.0f64, -1.0])
            .le(vec![-1.0, -1.0], -2.0)
            .eq(vec![1.0, -1.0], 0.0);
        let s = simplex_solve(&p).unwrap();
        assert!((s.value + 2.0).abs() < 1e-12);
        check_feasible(&p, &s);
    }

    #[test]
    fn redundant_equality_rows_are_tolerated() {
        let p = LpProblem::new(vec![1.0f64, 2.0])
            .eq(vec![1.0, 1.0], 1.0)
            .eq(vec![2.0, 2.0], 2.0);
        let s = simplex_solve(&p).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        check_feasible(&p, &s);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // A classic cycling example under the textbook rule.
        let p = LpProblem::new(vec![10.0f64, -57.0, -9.0, -24.0])
            .le(vec![0.5, -5.5, -2.5, 9.0], 0.0)
            .le(vec![0.5, -1.5, -0.5, 1.0], 0.0)
            .le(vec![1.0, 0.0, 0.0, 0.0], 1.0);
        let s = simplex_solve(&p).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        check_feasible(&p, &s);
    }

    fn table_2x4() -> CutValueTable<f64> {
        CutValueTable::explicit(
            2,
            vec![
                vec![0.0, 2.0, 1.0, 3.0],
                vec![1.0, 0.5, 2.0, 1.0],
                vec![2.0, 1.0, 0.0, 0.5],
                vec![1.0, 1.0, 1.0, 1.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn f_pi_rows_follow_the_chain() {
        let t = table_2x4();
        let f = build_f_pi(&t, &ChainPermutation::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(f.rows[0], vec![0.0, 1.0, 2.0, 1.0]);
        assert_eq!(f.rows[1], vec![1.0, 2.0, 0.0, 1.0]);
        assert_eq!(f.rows[2], vec![3.0, 1.0, 0.5, 1.0]);
    }

    #[test]
    fn h_pi_f_telescopes() {
        let t = table_2x4();
        for pi in ChainPermutation::all(2) {
            let f = build_f_pi(&t, &pi).unwrap();
            let h = build_h_pi_f(&f);
            for (k, pre) in pi.prefix_sets().iter().enumerate() {
                for s in 0..4 {
                    let v: f64 = h[0][s] + (0..2).filter(|&i| pre.contains(i)).map(|i| h[i + 1][s]).sum::<f64>();
                    assert!((v - f.rows[k][s]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn h_pi_f_reproduces_sorted_weights() {
        let t = table_2x4();
        let pi = ChainPermutation::identity(2);
        let f = build_f_pi(&t, &pi).unwrap();
        let h = build_h_pi_f(&f);
        let (w1, w2) = (0.7, 0.2);
        for s in 0..4 {
            let lhs = h[0][s] + w1 * h[1][s] + w2 * h[2][s];
            let rhs = (1.0 - w1) * f.rows[0][s] + (w1 - w2) * f.rows[1][s] + w2 * f.rows[2][s];
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_zero_row_gives_zero_rate() {
        let f = FPiMatrix {
            pi: ChainPermutation::identity(1),
            rows: vec![vec![0.0, 0.0], vec![1.0, 2.0]],
        };
        let s = solve_p2(&f).unwrap();
        assert_eq!(s.tau, 0.0);
        assert!(s.schedule.is_simple(1));
    }

    #[test]
    fn p2_on_two_relays_has_at_most_three_states() {
        let t = table_2x4();
        for pi in ChainPermutation::all(2) {
            let f = build_f_pi(&t, &pi).unwrap();
            let s = solve_p2(&f).unwrap();
            assert!(s.schedule.support().len() <= 3);
            assert!(s.solution.support().len() <= 4);
            let m = (0..3).map(|k| f.row_value(k, &s.schedule)).fold(f64::INFINITY, f64::min);
            assert!((m - s.tau).abs() < 1e-9);
        }
    }

    #[test]
    fn full_lp_weights_certify_the_value() {
        let t = table_2x4();
        let r = solve_full_lp(&t).unwrap();
        let total: f64 = r.cut_weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        // Under the dual mixture every state is worth at most C'.
        for s in 0..4 {
            let v: f64 = (0..4).map(|a| r.cut_weights[a] * t.value(s, CutSet(a as u32))).sum();
            assert!(v <= r.c_prime + 1e-9);
        }
    }

    #[test]
    fn simplex_in_f32() {
        let p = LpProblem::new(vec![0.0f32, 0.0, 1.0])
            .le(vec![-2.0, 0.0, 1.0], 0.0)
            .le(vec![0.0, -3.0, 1.0], 0.0)
            .eq(vec![1.0, 1.0, 0.0], 1.0);
        let s = simplex_solve(&p).unwrap();
        assert!((s.value - 1.2).abs() < 1e-5);
    }

    fn random_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..8, 2usize..12)
            .prop_flat_map(|(r, s)| prop::collection::vec(prop::collection::vec(0.0..5.0f64, s), r))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn max_min_solutions_are_basic_and_dual_feasible(rows in random_rows()) {
            let mm = solve_max_min(&rows).unwrap();
            prop_assert!(mm.solution.support().len() <= rows.len() + 1);
            let worst = rows
                .iter()
                .map(|r| r.iter().zip(mm.schedule.probs()).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(worst >= mm.tau - 1e-9);
            // Weak duality from the row weights.
            let total: f64 = mm.row_weights.iter().sum();
            if mm.tau > 1e-9 {
                prop_assert!((total - 1.0).abs() < 1e-8);
            }
            for s in 0..rows[0].len() {
                let v: f64 = rows.iter().zip(&mm.row_weights).map(|(r, w)| r[s] * w).sum();
                prop_assert!(v <= mm.tau + 1e-8);
            }
        }

        #[test]
        fn scaling_keeps_support(rows in random_rows()) {
            let a = solve_max_min(&rows).unwrap();
            let doubled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| 2.0 * v).collect()).collect();
            let b = solve_max_min(&doubled).unwrap();
            prop_assert!((b.tau - 2.0 * a.tau).abs() <= 1e-9 * (1.0 + a.tau));
            prop_assert_eq!(a.schedule.support(), b.schedule.support());
        }
    }
}
