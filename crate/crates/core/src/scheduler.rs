//! The max-min schedule solver: constraint generation over cuts, extraction of
//! a schedule with at most `N + 1` active states, and certificate replay.
//!
//! The master problem is the max-min program over a working set of cuts; the
//! separation step minimizes the submodular function `A -> I_A` at the master
//! schedule and adds the minimizing cut while it undercuts the master value.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::null_space;
use crate::lp::{build_f_pi, solve_max_min, solve_p2};
use crate::model::{i_fix, CutSet, CutValueTable, Schedule};
use crate::num::Scalar;
use crate::submodular::{
    minimize_min_norm, tight_sets, ChainPermutation, FnSet, MinNormOptions, TightLattice, EXHAUSTIVE_LIMIT,
};

/// Permutation enumeration in the extraction fallback stops above this size.
pub const CHAIN_ENUMERATION_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Relative convergence tolerance.
    pub tol: f64,
    /// Separation is exhaustive up to this many relays, min-norm above.
    pub exhaustive_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            exhaustive_limit: EXHAUSTIVE_LIMIT,
        }
    }
}

impl SolveOptions {
    fn abs_tol<T: Scalar>(&self, scale: T) -> T {
        T::tol(self.tol) * scale.abs().max(T::one())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep<T> {
    pub master_value: T,
    /// Cut added after this step; `None` on the last one.
    pub violated_cut: Option<CutSet>,
    /// `master_value - min_A I_A` at the master schedule.
    pub violation: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verification<T> {
    pub achieved_rate: T,
    pub worst_cut: CutSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    pub min_cut_value_at_schedule: T,
    pub worst_cut: CutSet,
    /// `rate - min_cut_value_at_schedule`.
    pub gap_to_master: T,
    pub passed: bool,
}

/// How the returned schedule was obtained from the master solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractionRoute {
    /// The master schedule was already simple.
    Direct,
    /// Chain program on a maximal chain of tight cuts.
    LatticeChain,
    /// Chain program on an enumerated permutation.
    PermutationSearch,
    /// Support reduction along directions that keep the tight cuts fixed.
    SupportReduction,
    /// No simple schedule found; the master schedule is returned.
    NonSimple,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extraction<T> {
    pub schedule: Schedule<T>,
    pub permutation: ChainPermutation,
    pub route: ExtractionRoute,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<T> {
    pub rate: T,
    pub schedule: Schedule<T>,
    pub tight_cuts: Vec<CutSet>,
    pub permutation: ChainPermutation,
    pub iterations: usize,
    pub trace: Vec<TraceStep<T>>,
    pub certificate: Certificate<T>,
    pub route: ExtractionRoute,
    pub diagnostic: Option<String>,
}

fn cut_values<T: Scalar>(table: &CutValueTable<T>, schedule: &Schedule<T>) -> Vec<T> {
    let n_cuts = table.num_cuts();
    let eval = |a: usize| i_fix(table, schedule, CutSet(a as u32));
    if n_cuts >= 1 << 12 {
        (0..n_cuts).into_par_iter().map(eval).collect()
    } else {
        (0..n_cuts).map(eval).collect()
    }
}

fn argmin<T: Scalar>(vals: &[T]) -> (T, CutSet) {
    let mut best = (vals[0], CutSet(0));
    for (a, &v) in vals.iter().enumerate().skip(1) {
        let c = CutSet(a as u32);
        if v < best.0 || (v == best.0 && (c.len(), c.0) < (best.1.len(), best.1 .0)) {
            best = (v, c);
        }
    }
    best
}

fn verify_with<T: Scalar>(table: &CutValueTable<T>, schedule: &Schedule<T>, limit: usize) -> Result<Verification<T>> {
    let n = table.n_relays();
    let (achieved_rate, worst_cut) = if n <= limit {
        argmin(&cut_values(table, schedule))
    } else {
        let g = FnSet::new(n, |a: CutSet| i_fix(table, schedule, a));
        let r = minimize_min_norm(&g, MinNormOptions::default())?;
        (i_fix(table, schedule, r.minimizer), r.minimizer)
    };
    Ok(Verification {
        achieved_rate,
        worst_cut,
    })
}

/// `min_A I_A` at the schedule and a minimizing cut.
pub fn verify_schedule<T: Scalar>(table: &CutValueTable<T>, schedule: &Schedule<T>) -> Result<Verification<T>> {
    if schedule.num_states() != table.num_states() {
        return Err(Error::InvalidInput(format!(
            "schedule over {} states for a table with {}",
            schedule.num_states(),
            table.num_states()
        )));
    }
    verify_with(table, schedule, EXHAUSTIVE_LIMIT)
}

fn cut_row<T: Scalar>(table: &CutValueTable<T>, a: CutSet) -> Vec<T> {
    (0..table.num_states()).map(|s| table.value(s, a)).collect()
}

/// Constraint generation for `max_lambda min_A I_A`, followed by extraction of
/// a simple optimal schedule and a certificate replay.
pub fn solve_saddle<T: Scalar>(table: &CutValueTable<T>, opts: &SolveOptions) -> Result<SolveResult<T>> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let n = table.n_relays();
    let mut working: Vec<CutSet> = vec![CutSet::EMPTY, CutSet::full(n)];
    for k in 0..n {
        let c = CutSet(1 << k);
        if !working.contains(&c) {
            working.push(c);
        }
    }
    let mut rows: Vec<Vec<T>> = working.iter().map(|&a| cut_row(table, a)).collect();
    let mut trace = Vec::new();
    let mut prev_master: Option<T> = None;
    let (tau, master_schedule) = loop {
        let mm = solve_max_min(&rows)?;
        let master = mm.tau;
        if let Some(p) = prev_master {
            if master > p + T::tol(1e-9) * p.abs().max(T::one()) {
                return Err(Error::Diagnostic(format!("master value rose from {p} to {master}")));
            }
        }
        prev_master = Some(master);
        let sep = verify_with(table, &mm.schedule, opts.exhaustive_limit)?;
        let violation = master - sep.achieved_rate;
        if sep.achieved_rate >= master - opts.abs_tol(master) {
            trace.push(TraceStep {
                master_value: master,
                violated_cut: None,
                violation,
            });
            break (master, mm.schedule);
        }
        if working.contains(&sep.worst_cut) {
            return Err(Error::Diagnostic(format!("cut {} generated twice", sep.worst_cut)));
        }
        trace.push(TraceStep {
            master_value: master,
            violated_cut: Some(sep.worst_cut),
            violation,
        });
        working.push(sep.worst_cut);
        rows.push(cut_row(table, sep.worst_cut));
    };

    let ext = extract_simple_schedule(table, &master_schedule, tau, opts.tol)?;
    let check = verify_schedule(table, &ext.schedule)?;
    let tol_abs = opts.abs_tol(tau);
    let certificate = Certificate {
        min_cut_value_at_schedule: check.achieved_rate,
        worst_cut: check.worst_cut,
        gap_to_master: tau - check.achieved_rate,
        passed: check.achieved_rate >= tau - tol_abs,
    };
    let tight_cuts = if n <= EXHAUSTIVE_LIMIT {
        let vals = cut_values(table, &ext.schedule);
        let tight = T::of(10.0) * tol_abs;
        let mut cuts: Vec<CutSet> = (0..vals.len())
            .filter(|&a| vals[a] <= tau + tight)
            .map(|a| CutSet(a as u32))
            .collect();
        cuts.sort_by_key(|c| (c.len(), c.0));
        cuts
    } else {
        working
            .iter()
            .copied()
            .filter(|&a| i_fix(table, &ext.schedule, a) <= tau + T::of(10.0) * tol_abs)
            .collect()
    };
    Ok(SolveResult {
        rate: tau,
        schedule: ext.schedule,
        tight_cuts,
        permutation: ext.permutation,
        iterations: trace.len(),
        trace,
        certificate,
        route: ext.route,
        diagnostic: ext.diagnostic,
    })
}

/// Greedy maximal chain from the lattice's minimal to its maximal member:
/// each step moves to the smallest member strictly above the current one.
fn maximal_chain(lat: &TightLattice) -> Vec<CutSet> {
    let mut chain = vec![lat.minimal];
    let mut cur = lat.minimal;
    while cur != lat.maximal {
        let next = lat
            .members
            .iter()
            .copied()
            .filter(|&m| m != cur && cur.is_subset(m) && m.is_subset(lat.maximal))
            .min_by_key(|m| (m.len(), m.0));
        match next {
            Some(m) => {
                chain.push(m);
                cur = m;
            }
            None => break,
        }
    }
    chain
}

fn tight_lattice<T: Scalar>(table: &CutValueTable<T>, schedule: &Schedule<T>, level: T, tol: T) -> Result<TightLattice> {
    let g = FnSet::new(table.n_relays(), |a: CutSet| i_fix(table, schedule, a));
    tight_sets(&g, level, tol)
}

/// Turns an optimal schedule into one with at most `N + 1` active states.
///
/// Tries, in order: the pruned input; the chain program on a maximal chain of
/// tight cuts; the chain program on permutations through the lattice
/// extremes (small `N`); support reduction keeping the tight cuts fixed.
/// Falls back to the pruned input flagged as non-simple.
pub fn extract_simple_schedule<T: Scalar>(
    table: &CutValueTable<T>,
    raw: &Schedule<T>,
    c_prime: T,
    tol: f64,
) -> Result<Extraction<T>> {
    let n = table.n_relays();
    let tol_abs = T::tol(tol) * c_prime.abs().max(T::one());
    let target = c_prime - tol_abs;
    let pruned = raw.pruned();
    let raw_check = verify_schedule(table, &pruned)?;
    let raw_ok = raw_check.achieved_rate >= target;

    if n > EXHAUSTIVE_LIMIT {
        return if raw_ok {
            let simple = pruned.is_simple(n);
            Ok(Extraction {
                schedule: pruned,
                permutation: ChainPermutation::identity(n),
                route: if simple { ExtractionRoute::Direct } else { ExtractionRoute::NonSimple },
                diagnostic: (!simple).then(|| "too many relays for lattice extraction".to_string()),
            })
        } else {
            Err(Error::ExtractionExhausted {
                best_tau: raw_check.achieved_rate.as_f64(),
            })
        };
    }

    let tol_tight = T::of(10.0) * tol_abs;
    let lattice = tight_lattice(table, &pruned, c_prime, tol_tight)?;
    let chain = maximal_chain(&lattice);
    let chain_pi = ChainPermutation::extending_chain(n, &chain)?;

    if raw_ok && pruned.is_simple(n) {
        return Ok(Extraction {
            schedule: pruned,
            permutation: chain_pi,
            route: ExtractionRoute::Direct,
            diagnostic: None,
        });
    }

    let mut best_tau = raw_check.achieved_rate;
    let mut try_pi = |pi: &ChainPermutation| -> Result<Option<Schedule<T>>> {
        let f = build_f_pi(table, pi)?;
        let p2 = solve_p2(&f)?;
        let check = verify_schedule(table, &p2.schedule)?;
        if check.achieved_rate > best_tau {
            best_tau = check.achieved_rate;
        }
        Ok((check.achieved_rate >= target && p2.schedule.is_simple(n)).then_some(p2.schedule))
    };

    if let Some(s) = try_pi(&chain_pi)? {
        return Ok(Extraction {
            schedule: s,
            permutation: chain_pi,
            route: ExtractionRoute::LatticeChain,
            diagnostic: None,
        });
    }

    if n <= CHAIN_ENUMERATION_LIMIT {
        let mut candidates: Vec<(usize, ChainPermutation)> = ChainPermutation::all(n)
            .into_iter()
            .filter(|p| *p != chain_pi)
            .filter_map(|p| {
                let pre = p.prefix_sets();
                if !pre.contains(&lattice.minimal) || !pre.contains(&lattice.maximal) {
                    return None;
                }
                let hits = pre.iter().filter(|c| lattice.members.contains(c)).count();
                Some((hits, p))
            })
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0));
        for (_, pi) in candidates {
            if let Some(s) = try_pi(&pi)? {
                return Ok(Extraction {
                    schedule: s,
                    permutation: pi,
                    route: ExtractionRoute::PermutationSearch,
                    diagnostic: Some("maximal tight chain failed; found by permutation search".into()),
                });
            }
        }
    }

    if raw_ok {
        if let Some(s) = reduce_support(table, &pruned, c_prime, tol_abs)? {
            let lat = tight_lattice(table, &s, c_prime, tol_tight)?;
            let pi = ChainPermutation::extending_chain(n, &maximal_chain(&lat))?;
            return Ok(Extraction {
                schedule: s,
                permutation: pi,
                route: ExtractionRoute::SupportReduction,
                diagnostic: Some("chain programs failed; support reduced directly".into()),
            });
        }
        return Ok(Extraction {
            schedule: pruned,
            permutation: chain_pi,
            route: ExtractionRoute::NonSimple,
            diagnostic: Some(format!(
                "no schedule with at most {} active states verified",
                n + 1
            )),
        });
    }
    Err(Error::ExtractionExhausted {
        best_tau: best_tau.as_f64(),
    })
}

/// Moves along directions in the null space of the tight cut rows (and the
/// unit-mass row) until a probability hits zero, keeping every cut at or above
/// `c_prime - tol_abs`.
fn reduce_support<T: Scalar>(
    table: &CutValueTable<T>,
    start: &Schedule<T>,
    c_prime: T,
    tol_abs: T,
) -> Result<Option<Schedule<T>>> {
    let n = table.n_relays();
    let floor = c_prime - tol_abs;
    let mut probs = start.probs().to_vec();
    let mut tight: Vec<CutSet> = Vec::new();
    for _ in 0..(4 * table.num_states() + table.num_cuts()) {
        let sched = Schedule::from_weights(probs.clone())?;
        let support = sched.support().to_vec();
        if support.len() <= n + 1 {
            return Ok((verify_schedule(table, &sched)?.achieved_rate >= floor).then_some(sched));
        }
        let vals = cut_values(table, &sched);
        for (a, &v) in vals.iter().enumerate() {
            let c = CutSet(a as u32);
            if v <= c_prime + T::of(10.0) * tol_abs && !tight.contains(&c) {
                tight.push(c);
            }
        }
        let mut rows: Vec<Vec<T>> = tight
            .iter()
            .map(|&c| support.iter().map(|&s| table.value(s, c)).collect())
            .collect();
        let scale = rows.iter().flatten().fold(T::one(), |m, v| m.max(v.abs()));
        rows.push(vec![T::one(); support.len()]);
        let ns = null_space(&rows, support.len(), T::tol(1e-9) * scale);
        let Some(dir) = ns.into_iter().next() else {
            return Ok(None);
        };
        // Step so that the first probability reaches zero.
        let mut theta = T::infinity();
        let mut hit = None;
        for (k, &s) in support.iter().enumerate() {
            if dir[k] < T::zero() {
                let t = probs[s] / -dir[k];
                if t < theta {
                    theta = t;
                    hit = Some(s);
                }
            }
        }
        // Non-tight cuts that would drop below the floor stop the step early.
        let mut blocking = None;
        for (a, &v) in vals.iter().enumerate() {
            let c = CutSet(a as u32);
            if tight.contains(&c) {
                continue;
            }
            let slope: T = support.iter().zip(&dir).map(|(&s, &d)| d * table.value(s, c)).sum();
            if slope < T::zero() {
                let t = (v - c_prime).max(T::zero()) / -slope;
                if t < theta {
                    theta = t;
                    blocking = Some(c);
                }
            }
        }
        for (k, &s) in support.iter().enumerate() {
            probs[s] = (probs[s] + theta * dir[k]).max(T::zero());
        }
        match (blocking, hit) {
            (Some(c), _) => tight.push(c),
            (None, Some(s)) => probs[s] = T::zero(),
            (None, None) => return Ok(None),
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_full_lp;

    fn example_line_table(gamma: f64) -> CutValueTable<f64> {
        // Two-antenna relay, symmetric gains, coherent all-transmit entry.
        let l2 = (1.0 + 2.0 * gamma).log2();
        let l1 = (1.0 + gamma).log2();
        let l4 = (1.0 + 4.0 * gamma).log2();
        CutValueTable::explicit(1, vec![vec![0.0, l2], vec![l1, l1], vec![l1, l1], vec![l4, 0.0]]).unwrap()
    }

    #[test]
    fn single_state_table_rate_is_its_min_cut() {
        let t = CutValueTable::explicit(2, vec![vec![3.0, 1.5, 2.0, 4.0]]).unwrap();
        let r = solve_saddle(&t, &SolveOptions::default()).unwrap();
        assert_eq!(r.rate, 1.5);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.schedule.support(), &[0]);
    }

    #[test]
    fn two_state_schedule_below_the_crossover() {
        let t = example_line_table(0.5);
        let r = solve_saddle(&t, &SolveOptions::default()).unwrap();
        let (l2, l3) = (2f64.log2(), 3f64.log2());
        assert!((r.rate - l2 * l3 / (l2 + l3)).abs() < 1e-9);
        assert_eq!(r.schedule.support(), &[0, 3]);
        assert!((r.schedule.prob(0) - l3 / (l2 + l3)).abs() < 1e-9);
        assert!(r.certificate.passed);
    }

    #[test]
    fn uniform_schedule_verification_by_hand() {
        let t = example_line_table(1.0);
        let v = verify_schedule(&t, &Schedule::uniform(4)).unwrap();
        // Empty cut: (0 + 1 + 1 + log2 5) / 4; relay cut: (log2 3 + 1 + 1 + 0) / 4.
        let empty = (2.0 + 5f64.log2()) / 4.0;
        let relay = (3f64.log2() + 2.0) / 4.0;
        assert!((v.achieved_rate - relay.min(empty)).abs() < 1e-12);
        assert_eq!(v.worst_cut, CutSet(1));
    }

    #[test]
    fn all_listen_point_mass_has_zero_rate() {
        let t = example_line_table(1.0);
        let v = verify_schedule(&t, &Schedule::point_mass(4, 0)).unwrap();
        assert_eq!((v.achieved_rate, v.worst_cut), (0.0, CutSet::EMPTY));
    }

    #[test]
    fn master_values_never_increase() {
        let t = CutValueTable::<f64>::explicit(
            3,
            vec![
                vec![0.0, 1.0, 2.0, 2.5, 1.0, 1.8, 2.7, 3.0],
                vec![1.0, 1.2, 0.3, 0.9, 2.0, 2.1, 1.5, 0.0],
                vec![2.0, 0.5, 1.0, 0.2, 0.4, 0.1, 0.3, 1.0],
                vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
            ],
        )
        .unwrap();
        let r = solve_saddle(&t, &SolveOptions::default()).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].master_value <= w[0].master_value + 1e-12);
        }
        let exact = solve_full_lp(&t).unwrap();
        assert!((r.rate - exact.c_prime).abs() < 1e-7);
    }

    #[test]
    fn extraction_keeps_an_already_simple_schedule() {
        let t = example_line_table(0.5);
        let exact = solve_full_lp(&t).unwrap();
        let e = extract_simple_schedule(&t, &exact.schedule, exact.c_prime, 1e-7).unwrap();
        assert_eq!(e.route, ExtractionRoute::Direct);
        assert_eq!(e.schedule.support(), exact.schedule.support());
    }

    #[test]
    fn non_simple_optimum_is_reduced() {
        // Every state is worth exactly 1 on every cut: any mixture is optimal.
        let t = CutValueTable::explicit(1, vec![vec![1.0, 1.0]; 4]).unwrap();
        let e = extract_simple_schedule(&t, &Schedule::uniform(4), 1.0, 1e-7).unwrap();
        assert!(e.schedule.is_simple(1));
        assert!(verify_schedule(&t, &e.schedule).unwrap().achieved_rate >= 1.0 - 1e-9);
    }

    #[test]
    fn support_reduction_alone_reaches_a_simple_schedule() {
        let t = CutValueTable::explicit(
            1,
            vec![vec![0.0, 2.0], vec![2.0, 0.0], vec![1.0, 1.0], vec![0.5, 1.5], vec![1.5, 0.5]],
        )
        .unwrap();
        let start = Schedule::uniform(5);
        let s = reduce_support(&t, &start, 1.0, 1e-9).unwrap().unwrap();
        assert!(s.support().len() <= 2);
        assert!(verify_schedule(&t, &s).unwrap().achieved_rate >= 1.0 - 1e-9);
    }

    #[test]
    fn chain_program_rescues_a_suboptimal_input() {
        let t = example_line_table(0.5);
        let err = extract_simple_schedule(&t, &Schedule::point_mass(4, 0), 0.6, 1e-7);
        // The chain program rescues it: extraction does not rely on the input's value.
        let e = err.unwrap();
        assert!(e.schedule.is_simple(1));
    }
}
