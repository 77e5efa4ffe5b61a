//! Set-function oracles, the greedy vertex, the Lovász extension and
//! submodular minimization (exhaustive and minimum-norm-point).

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::model::CutSet;
use crate::num::Scalar;

/// Ground sets above this size are refused by the exhaustive routines.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Tie window when collecting minimizers.
pub const TIE_TOL: f64 = 1e-9;

/// Deterministic set-function oracle on the ground set `{0, .., n-1}`.
pub trait SetFunction<T>: Sync {
    fn n(&self) -> usize;
    fn eval(&self, a: CutSet) -> T;
}

impl<T, S: SetFunction<T> + ?Sized> SetFunction<T> for &S {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn eval(&self, a: CutSet) -> T {
        (**self).eval(a)
    }
}

/// Set function backed by a closure.
pub struct FnSet<F> {
    n: usize,
    f: F,
}

impl<F> FnSet<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<T, F: Fn(CutSet) -> T + Sync> SetFunction<T> for FnSet<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, a: CutSet) -> T {
        (self.f)(a)
    }
}

/// Set function given by its full value table, indexed by mask.
#[derive(Clone, Debug)]
pub struct TableSet<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> TableSet<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != 1 << n {
            return Err(Error::InvalidInput(format!("{} values for a ground set of {n}", values.len())));
        }
        Ok(Self { n, values })
    }
}

impl<T: Scalar> SetFunction<T> for TableSet<T> {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, a: CutSet) -> T {
        self.values[a.0 as usize]
    }
}

/// `g(A) = f(A) - f(empty)`.
pub struct Normalized<F, T> {
    inner: F,
    offset: T,
}

impl<T: Scalar, F: SetFunction<T>> Normalized<F, T> {
    pub fn new(inner: F) -> Self {
        let offset = inner.eval(CutSet::EMPTY);
        Self { inner, offset }
    }

    pub fn offset(&self) -> T {
        self.offset
    }
}

impl<T: Scalar, F: SetFunction<T>> SetFunction<T> for Normalized<F, T> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn eval(&self, a: CutSet) -> T {
        self.inner.eval(a) - self.offset
    }
}

/// Permutation of the ground set (0-based) and its prefix chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainPermutation {
    pi: Vec<usize>,
}

impl ChainPermutation {
    pub fn new(pi: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; pi.len()];
        for &p in &pi {
            if p >= pi.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput(format!("{pi:?} is not a permutation")));
            }
        }
        Ok(Self { pi })
    }

    pub fn identity(n: usize) -> Self {
        Self { pi: (0..n).collect() }
    }

    /// Orders indices by descending weight, equal weights by ascending index.
    pub fn sorting_descending<T: Scalar>(w: &[T]) -> Self {
        let mut pi: Vec<usize> = (0..w.len()).collect();
        pi.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        Self { pi }
    }

    /// Orders indices by ascending weight, equal weights by ascending index.
    pub fn sorting_ascending<T: Scalar>(w: &[T]) -> Self {
        let mut pi: Vec<usize> = (0..w.len()).collect();
        pi.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        Self { pi }
    }

    /// Smallest permutation whose prefix chain passes through every set of
    /// `chain`, which must be nested. Free positions are filled in ascending
    /// index order.
    pub fn extending_chain(n: usize, chain: &[CutSet]) -> Result<Self> {
        let mut sets = chain.to_vec();
        sets.sort_by_key(|c| c.len());
        let mut pi = Vec::with_capacity(n);
        let mut prev = CutSet::EMPTY;
        for s in sets.into_iter().chain(std::iter::once(CutSet::full(n))) {
            if !prev.is_subset(s) {
                return Err(Error::InvalidInput(format!("{prev} and {s} are not nested")));
            }
            pi.extend((0..n).filter(|&k| s.contains(k) && !prev.contains(k)));
            prev = s;
        }
        Ok(Self { pi })
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.pi
    }

    /// `empty, {pi_1}, {pi_1, pi_2}, .., full`: `n + 1` nested sets.
    pub fn prefix_sets(&self) -> Vec<CutSet> {
        let mut out = Vec::with_capacity(self.pi.len() + 1);
        let mut cur = CutSet::EMPTY;
        out.push(cur);
        for &p in &self.pi {
            cur = CutSet(cur.0 | 1 << p);
            out.push(cur);
        }
        out
    }

    /// Every permutation of `n` elements in lexicographic order.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self { pi: cur.clone() });
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                return out;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
    }
}

impl fmt::Display for ChainPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.pi.iter().map(|k| (k + 1).to_string()).collect();
        write!(f, "({})", p.join(","))
    }
}

/// Chain differences `x[pi_i] = g(prefix_i) - g(prefix_{i-1})`.
pub fn greedy_vertex<T: Scalar>(g: &impl SetFunction<T>, pi: &ChainPermutation) -> Vec<T> {
    let mut x = vec![T::zero(); g.n()];
    let prefixes = pi.prefix_sets();
    let mut prev = g.eval(prefixes[0]);
    for (k, &p) in pi.as_slice().iter().enumerate() {
        let cur = g.eval(prefixes[k + 1]);
        x[p] = cur - prev;
        prev = cur;
    }
    x
}

/// Lovász extension of the normalized function `A -> g(A) - g(empty)` at `w`.
pub fn lovasz_extension<T: Scalar>(g: &impl SetFunction<T>, w: &[T]) -> T {
    assert_eq!(w.len(), g.n(), "weight vector length");
    let pi = ChainPermutation::sorting_descending(w);
    let x = greedy_vertex(g, &pi);
    w.iter().zip(&x).map(|(&a, &b)| a * b).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustiveMin<T> {
    pub value: T,
    /// Every set within the tie window of the minimum, by cardinality then mask.
    pub minimizers: Vec<CutSet>,
}

pub fn minimize_exhaustive<T: Scalar>(g: &impl SetFunction<T>) -> Result<ExhaustiveMin<T>> {
    minimize_exhaustive_with_limit(g, EXHAUSTIVE_LIMIT)
}

pub fn minimize_exhaustive_with_limit<T: Scalar>(g: &impl SetFunction<T>, limit: usize) -> Result<ExhaustiveMin<T>> {
    let n = g.n();
    if n > limit {
        return Err(Error::TooLarge {
            what: "exhaustive minimization",
            size: n,
            limit,
        });
    }
    let vals: Vec<T> = (0..1u32 << n).map(|m| g.eval(CutSet(m))).collect();
    let value = vals.iter().copied().fold(T::infinity(), T::min);
    let tie = T::tol(TIE_TOL);
    let mut minimizers: Vec<CutSet> = (0..vals.len())
        .filter(|&m| vals[m] <= value + tie)
        .map(|m| CutSet(m as u32))
        .collect();
    minimizers.sort_by_key(|c| (c.len(), c.0));
    Ok(ExhaustiveMin { value, minimizers })
}

#[derive(Clone, Copy, Debug)]
pub struct MinNormOptions {
    /// Stop once `upper - lower <= gap_tol * (|upper| + 1)`.
    pub gap_tol: f64,
    /// Major cycles; `None` means `10 n^2`.
    pub max_iter: Option<usize>,
}

impl Default for MinNormOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinNormResult<T> {
    /// Minimum of `A -> g(A) - g(empty)`.
    pub value: T,
    pub minimizer: CutSet,
    /// Coordinates `< -1e-9` of the base point.
    pub minimal: CutSet,
    /// Coordinates `<= 1e-9` of the base point.
    pub maximal: CutSet,
    pub base_point: Vec<T>,
    pub iterations: usize,
}

const AFFINE_PIVOT_TOL: f64 = 1e-12;
const THRESHOLD: f64 = 1e-9;

/// Affine minimizer of the corral: weights `alpha` with `sum alpha = 1`
/// minimizing `|Q alpha|`.
fn affine_minimizer<T: Scalar>(pts: &[Vec<T>]) -> Option<Vec<T>> {
    let m = pts.len();
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
    let mut a = vec![vec![T::zero(); m + 1]; m + 1];
    for i in 0..m {
        for j in 0..=i {
            let d = dot(&pts[i], &pts[j]);
            a[i][j] = d;
            a[j][i] = d;
        }
        a[i][m] = T::one();
        a[m][i] = T::one();
    }
    let mut b = vec![T::zero(); m + 1];
    b[m] = T::one();
    let sol = solve_dense(a, b, T::tol(AFFINE_PIVOT_TOL))?;
    Some(sol[..m].to_vec())
}

fn combine<T: Scalar>(pts: &[Vec<T>], w: &[T]) -> Vec<T> {
    let n = pts[0].len();
    let mut x = vec![T::zero(); n];
    for (p, &wi) in pts.iter().zip(w) {
        for (xi, &pi) in x.iter_mut().zip(p) {
            *xi += wi * pi;
        }
    }
    x
}

/// Fujishige–Wolfe minimum-norm-point minimization of the normalized function
/// `A -> g(A) - g(empty)`. `g` must be submodular.
pub fn minimize_min_norm<T: Scalar>(g: &impl SetFunction<T>, opts: MinNormOptions) -> Result<MinNormResult<T>> {
    let n = g.n();
    let ng = Normalized::new(g);
    if n == 0 {
        return Ok(MinNormResult {
            value: T::zero(),
            minimizer: CutSet::EMPTY,
            minimal: CutSet::EMPTY,
            maximal: CutSet::EMPTY,
            base_point: Vec::new(),
            iterations: 0,
        });
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n * n).max(1);
    let gap_tol = T::tol(opts.gap_tol);
    let alpha_tol = T::tol(AFFINE_PIVOT_TOL);

    let mut corral = vec![greedy_vertex(&ng, &ChainPermutation::identity(n))];
    let mut lambda = vec![T::one()];
    let mut x = corral[0].clone();
    let mut best = (T::zero(), CutSet::EMPTY);
    let mut lower;
    let mut iterations = 0;

    loop {
        // Linear oracle and duality bounds at the current point.
        let order = ChainPermutation::sorting_ascending(&x);
        let prefixes = order.prefix_sets();
        let q = greedy_vertex(&ng, &order);
        let mut acc = T::zero();
        for (k, &p) in order.as_slice().iter().enumerate() {
            acc += q[p];
            if acc < best.0 {
                best = (acc, prefixes[k + 1]);
            }
        }
        lower = x.iter().map(|&v| v.min(T::zero())).sum::<T>();
        if best.0 - lower <= gap_tol * (best.0.abs() + T::one()) {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                iterations,
                lower: lower.as_f64(),
                upper: best.0.as_f64(),
            });
        }
        iterations += 1;
        let xx: T = x.iter().map(|&v| v * v).sum();
        let xq: T = x.iter().zip(&q).map(|(&a, &b)| a * b).sum();
        let qq: T = q.iter().map(|&v| v * v).sum();
        if xx - xq <= T::tol(1e-14) * qq.max(T::one()) || corral.contains(&q) {
            // Wolfe's stopping rule: x is (numerically) the min-norm point.
            break;
        }
        corral.push(q);
        lambda.push(T::zero());

        // Minor cycles.
        loop {
            let Some(alpha) = affine_minimizer(&corral) else {
                // Degenerate corral: drop the oldest zero-weight-capable point.
                let drop = (0..lambda.len() - 1)
                    .min_by(|&a, &b| lambda[a].partial_cmp(&lambda[b]).unwrap())
                    .unwrap_or(0);
                corral.remove(drop);
                lambda.remove(drop);
                let total: T = lambda.iter().copied().sum();
                lambda.iter_mut().for_each(|l| *l /= total);
                continue;
            };
            if alpha.iter().all(|&a| a > alpha_tol) {
                lambda = alpha;
                break;
            }
            let mut theta = T::one();
            for (&l, &a) in lambda.iter().zip(&alpha) {
                if a <= alpha_tol && l - a > T::zero() {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, &a) in lambda.iter_mut().zip(&alpha) {
                *l = (T::one() - theta) * *l + theta * a;
            }
            let mut k = 0;
            while k < lambda.len() {
                if lambda[k] <= alpha_tol {
                    lambda.remove(k);
                    corral.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: T = lambda.iter().copied().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            if corral.len() == 1 {
                break;
            }
        }
        x = combine(&corral, &lambda);
    }

    let th = T::of(THRESHOLD);
    let minimal = CutSet((0..n).filter(|&i| x[i] < -th).fold(0, |m, i| m | 1 << i));
    let maximal = CutSet((0..n).filter(|&i| x[i] <= th).fold(0, |m, i| m | 1 << i));
    let vmin = ng.eval(minimal);
    let (value, minimizer) = if vmin <= best.0 + gap_tol * (best.0.abs() + T::one()) {
        (vmin.min(best.0), minimal)
    } else {
        best
    };
    Ok(MinNormResult {
        value,
        minimizer,
        minimal,
        maximal,
        base_point: x,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightLattice {
    /// All sets at or below the level, by cardinality then mask.
    pub members: Vec<CutSet>,
    /// Intersection of all members.
    pub minimal: CutSet,
    /// Union of all members.
    pub maximal: CutSet,
    pub closed: bool,
    pub diagnostic: Option<String>,
}

/// All `A` with `g(A) <= level + tol`, with a union/intersection closure check.
pub fn tight_sets<T: Scalar>(g: &impl SetFunction<T>, level: T, tol: T) -> Result<TightLattice> {
    let n = g.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "tight set enumeration",
            size: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut members: Vec<CutSet> = (0..1u32 << n)
        .map(CutSet)
        .filter(|&a| g.eval(a) <= level + tol)
        .collect();
    members.sort_by_key(|c| (c.len(), c.0));
    let minimal = members.iter().fold(CutSet::full(n), |m, &c| m.intersection(c));
    let maximal = members.iter().fold(CutSet::EMPTY, |m, &c| m.union(c));
    let set: HashSet<CutSet> = members.iter().copied().collect();
    let mut diagnostic = None;
    'outer: for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            for c in [a.union(b), a.intersection(b)] {
                if !set.contains(&c) {
                    diagnostic = Some(format!(
                        "tight family not closed: {a} and {b} give {c} with value {}",
                        g.eval(c)
                    ));
                    break 'outer;
                }
            }
        }
    }
    Ok(TightLattice {
        closed: diagnostic.is_none(),
        members,
        minimal,
        maximal,
        diagnostic,
    })
}
