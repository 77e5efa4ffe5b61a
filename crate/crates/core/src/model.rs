//! Relay states, cuts, schedules and the per-state cut functions `f_s(A)`.
//!
//! A state is a listen/transmit pattern over relays (lockstep switching) or
//! over individual relay antennas (independent switching). Bit `j` of the
//! state index is relay (or relay antenna) `j + 1`; a set bit means transmit.
//! Cuts always index relays: `A` is the set of relays grouped with the
//! destination.
//!
//! For Gaussian networks `f_s(A) = log2 det(I + G G^H)` where `G` is the
//! effective channel from the source side of the cut to the destination side,
//! with unit power on every transmitting antenna.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{log2_det_i_plus_gram, CMatrix};
use crate::num::Scalar;

/// Probabilities at or below this are outside a schedule's support.
pub const SUPPORT_EPSILON: f64 = 1e-9;

/// Relays above this count get a lazily evaluated cut table.
pub const EAGER_RELAY_LIMIT: usize = 10;
/// State-vector lengths above this get a lazily evaluated cut table.
pub const EAGER_STATE_BITS_LIMIT: usize = 14;

/// Default ground-set limit for the exhaustive submodularity check.
pub const SUBMODULAR_CHECK_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switching {
    /// All antennas of a relay share one listen/transmit bit.
    Lockstep,
    /// Every relay antenna has its own bit.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLayout {
    n_relays: usize,
    m_source: usize,
    m_relay: Vec<usize>,
    m_dest: usize,
    switching: Switching,
    /// First global antenna index of each relay.
    offsets: Vec<usize>,
}

impl NodeLayout {
    pub fn new(m_source: usize, m_relay: Vec<usize>, m_dest: usize, switching: Switching) -> Result<Self> {
        if m_relay.is_empty() {
            return Err(Error::InvalidInput("a network needs at least one relay".into()));
        }
        if m_relay.len() > 31 {
            return Err(Error::InvalidInput("at most 31 relays are supported".into()));
        }
        if m_source == 0 || m_dest == 0 || m_relay.contains(&0) {
            return Err(Error::InvalidInput("antenna counts must be at least 1".into()));
        }
        let offsets = m_relay
            .iter()
            .scan(0, |acc, &m| {
                let start = *acc;
                *acc += m;
                Some(start)
            })
            .collect();
        let layout = Self {
            n_relays: m_relay.len(),
            m_source,
            m_relay,
            m_dest,
            switching,
            offsets,
        };
        if layout.state_bits() > 30 {
            return Err(Error::InvalidInput("state space larger than 2^30".into()));
        }
        Ok(layout)
    }

    /// Single-antenna nodes everywhere, lockstep switching.
    pub fn single_antenna(n_relays: usize) -> Result<Self> {
        Self::new(1, vec![1; n_relays], 1, Switching::Lockstep)
    }

    pub fn n_relays(&self) -> usize {
        self.n_relays
    }

    pub fn m_source(&self) -> usize {
        self.m_source
    }

    pub fn m_relay(&self) -> &[usize] {
        &self.m_relay
    }

    pub fn m_dest(&self) -> usize {
        self.m_dest
    }

    pub fn switching(&self) -> Switching {
        self.switching
    }

    pub fn m_tot(&self) -> usize {
        self.m_relay.iter().sum()
    }

    /// Every antenna in the network, source and destination included.
    pub fn total_antennas(&self) -> usize {
        self.m_source + self.m_tot() + self.m_dest
    }

    pub fn state_bits(&self) -> usize {
        match self.switching {
            Switching::Lockstep => self.n_relays,
            Switching::Independent => self.m_tot(),
        }
    }

    pub fn num_states(&self) -> usize {
        1 << self.state_bits()
    }

    pub fn num_cuts(&self) -> usize {
        1 << self.n_relays
    }

    /// Global antenna indices `[start, end)` of relay `k` (0-based).
    pub fn relay_antennas(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k] + self.m_relay[k]
    }

    fn relay_of_antenna(&self, j: usize) -> usize {
        self.offsets.partition_point(|&o| o <= j) - 1
    }

    /// Whether relay antenna `j` transmits in state `s`.
    pub fn antenna_transmits(&self, s: RelayState, j: usize) -> bool {
        match self.switching {
            Switching::Lockstep => s.bit(self.relay_of_antenna(j)),
            Switching::Independent => s.bit(j),
        }
    }
}

/// A complete Gaussian half-duplex relay network.
///
/// `h` has `m_tot + m_dest` rows (relay antennas in relay order, then the
/// destination) and `m_tot + m_source` columns (relay antennas, then the
/// source). Relay-to-itself blocks are never read.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec<T> {
    layout: NodeLayout,
    h: CMatrix<T>,
}

impl<T: Scalar> NetworkSpec<T> {
    pub fn new(layout: NodeLayout, h: CMatrix<T>) -> Result<Self> {
        let rows = layout.m_tot() + layout.m_dest();
        let cols = layout.m_tot() + layout.m_source();
        if h.rows() != rows || h.cols() != cols {
            return Err(Error::InvalidInput(format!(
                "channel matrix is {}x{}, layout needs {rows}x{cols}",
                h.rows(),
                h.cols()
            )));
        }
        if !h.is_finite() {
            return Err(Error::InvalidInput("non-finite channel entry".into()));
        }
        Ok(Self { layout, h })
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn channel(&self) -> &CMatrix<T> {
        &self.h
    }

    pub fn num_states(&self) -> usize {
        self.layout.num_states()
    }

    pub fn n_relays(&self) -> usize {
        self.layout.n_relays()
    }

    /// Same network with relays relabelled: new relay `i` is old relay `perm[i]`.
    pub fn permute_relays(&self, perm: &[usize]) -> Result<Self> {
        let l = &self.layout;
        if perm.len() != l.n_relays() {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let m_relay: Vec<usize> = perm.iter().map(|&k| l.m_relay()[k]).collect();
        let layout = NodeLayout::new(l.m_source(), m_relay, l.m_dest(), l.switching())?;
        let mut antenna_order: Vec<usize> = perm.iter().flat_map(|&k| l.relay_antennas(k)).collect();
        let m_tot = l.m_tot();
        let rows: Vec<usize> = antenna_order
            .iter()
            .copied()
            .chain(m_tot..m_tot + l.m_dest())
            .collect();
        antenna_order.extend(m_tot..m_tot + l.m_source());
        Self::new(layout, self.h.select(&rows, &antenna_order))
    }
}

/// Listen/transmit pattern; bit `j` is relay (or relay antenna) `j + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelayState {
    index: usize,
    len: usize,
}

impl RelayState {
    pub fn new(index: usize, len: usize) -> Result<Self> {
        if len >= usize::BITS as usize || index >> len != 0 {
            return Err(Error::InvalidState(format!("index {index} does not fit {len} bits")));
        }
        Ok(Self { index, len })
    }

    /// Parses a bit string written in relay order, e.g. `"01"`.
    pub fn from_bit_str(bits: &str) -> Result<Self> {
        let mut index = 0;
        for (j, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << j,
                _ => return Err(Error::InvalidState(format!("bad state character {ch:?}"))),
            }
        }
        Self::new(index, bits.len())
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bit(self, j: usize) -> bool {
        (self.index >> j) & 1 == 1
    }
}

impl fmt::Display for RelayState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.bit(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Subset of relays (bit `k` is relay `k + 1`) on the destination side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutSet(pub u32);

impl CutSet {
    pub const EMPTY: CutSet = CutSet(0);

    pub fn full(n: usize) -> Self {
        CutSet(((1u64 << n) - 1) as u32)
    }

    /// Builds a cut from 1-based relay labels.
    pub fn from_relays(relays: &[usize]) -> Self {
        CutSet(relays.iter().fold(0, |m, &r| m | 1 << (r - 1)))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn contains(self, k: usize) -> bool {
        (self.0 >> k) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: Self) -> Self {
        CutSet(self.0 | o.0)
    }

    pub fn intersection(self, o: Self) -> Self {
        CutSet(self.0 & o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    /// 1-based relay labels in ascending order.
    pub fn relays(self) -> Vec<usize> {
        (0..32).filter(|&k| self.contains(k)).map(|k| k + 1).collect()
    }
}

impl fmt::Display for CutSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.relays().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", r.join(","))
    }
}

/// Probability vector over all relay states.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule<T> {
    probs: Vec<T>,
    support: Vec<usize>,
}

impl<T: Scalar> Schedule<T> {
    /// Validates nonnegativity and unit mass (to 1e-12, widened for coarse
    /// scalar types). Entries in `[-1e-12, 0)` are clamped to zero.
    pub fn new(mut probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("empty schedule".into()));
        }
        let neg = T::tol(1e-12);
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -neg {
                return Err(Error::InvalidInput(format!("invalid probability {p}")));
            }
            if *p < T::zero() {
                *p = T::zero();
            }
        }
        let total: T = probs.iter().copied().sum();
        let sum_tol = T::tol(1e-12) * T::of(probs.len().max(1) as f64).sqrt();
        if (total - T::one()).abs() > sum_tol {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        let eps = T::of(SUPPORT_EPSILON);
        let support = (0..probs.len()).filter(|&s| probs[s] > eps).collect();
        Ok(Self { probs, support })
    }

    /// Clamps tiny negatives and rescales to unit mass.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        let clamped: Vec<T> = weights.into_iter().map(|w| w.max(T::zero())).collect();
        let total: T = clamped.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::InvalidInput("schedule weights have no mass".into()));
        }
        Self::new(clamped.into_iter().map(|w| w / total).collect())
    }

    pub fn point_mass(n_states: usize, s: usize) -> Self {
        let mut probs = vec![T::zero(); n_states];
        probs[s] = T::one();
        Self { probs, support: vec![s] }
    }

    pub fn uniform(n_states: usize) -> Self {
        let p = T::one() / T::of(n_states as f64);
        Self {
            probs: vec![p; n_states],
            support: (0..n_states).collect(),
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, s: usize) -> T {
        self.probs[s]
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    /// At most `N + 1` active states.
    pub fn is_simple(&self, n_relays: usize) -> bool {
        self.support.len() <= n_relays + 1
    }

    /// Zeroes entries outside the support and renormalizes.
    pub fn pruned(&self) -> Self {
        let mut probs = vec![T::zero(); self.probs.len()];
        let mut total = T::zero();
        for &s in &self.support {
            probs[s] = self.probs[s];
            total += self.probs[s];
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Self {
            probs,
            support: self.support.clone(),
        }
    }
}

/// Where a cut table's values come from.
#[derive(Clone, Debug)]
pub enum Provenance<T> {
    Gaussian(Arc<NetworkSpec<T>>),
    Explicit,
}

#[derive(Debug)]
enum Storage<T> {
    /// `values[s * n_cuts + mask]`.
    Eager(Vec<T>),
    Lazy(Mutex<HashMap<(usize, u32), T>>),
}

/// `f_s(A)` in bits per channel use for every state `s` and relay cut `A`.
#[derive(Debug)]
pub struct CutValueTable<T> {
    n_relays: usize,
    n_states: usize,
    provenance: Provenance<T>,
    storage: Storage<T>,
}

impl<T: Scalar> CutValueTable<T> {
    /// Table from explicit values, `rows[s][mask]`.
    pub fn explicit(n_relays: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        let n_cuts = 1usize << n_relays;
        if rows.is_empty() {
            return Err(Error::InvalidInput("cut table without states".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * n_cuts);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n_cuts {
                return Err(Error::InvalidInput(format!(
                    "state {s} has {} cut values, expected {n_cuts}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite() || *v < T::zero()) {
                return Err(Error::InvalidInput(format!("state {s} has a negative or non-finite value")));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            n_relays,
            n_states: rows.len(),
            provenance: Provenance::Explicit,
            storage: Storage::Eager(values),
        })
    }

    /// Gaussian table; eager for small networks and memoized otherwise.
    pub fn from_network(net: &NetworkSpec<T>) -> Result<Self> {
        let layout = net.layout();
        let eager = layout.n_relays() <= EAGER_RELAY_LIMIT && layout.state_bits() <= EAGER_STATE_BITS_LIMIT;
        Self::build(net, eager)
    }

    pub fn lazy_from_network(net: &NetworkSpec<T>) -> Result<Self> {
        Self::build(net, false)
    }

    fn build(net: &NetworkSpec<T>, eager: bool) -> Result<Self> {
        let layout = net.layout();
        let n_cuts = layout.num_cuts();
        let n_states = layout.num_states();
        let storage = if eager {
            let values = (0..n_states * n_cuts)
                .into_par_iter()
                .map(|i| {
                    let s = RelayState::new(i / n_cuts, layout.state_bits())?;
                    cut_value(net, s, CutSet((i % n_cuts) as u32))
                })
                .collect::<Result<Vec<T>>>()?;
            Storage::Eager(values)
        } else {
            Storage::Lazy(Mutex::new(HashMap::new()))
        };
        Ok(Self {
            n_relays: layout.n_relays(),
            n_states,
            provenance: Provenance::Gaussian(Arc::new(net.clone())),
            storage,
        })
    }

    pub fn n_relays(&self) -> usize {
        self.n_relays
    }

    pub fn num_states(&self) -> usize {
        self.n_states
    }

    pub fn num_cuts(&self) -> usize {
        1 << self.n_relays
    }

    pub fn provenance(&self) -> &Provenance<T> {
        &self.provenance
    }

    pub fn is_eager(&self) -> bool {
        matches!(self.storage, Storage::Eager(_))
    }

    /// `f_s(A)`.
    pub fn value(&self, s: usize, cut: CutSet) -> T {
        match &self.storage {
            Storage::Eager(v) => v[s * self.num_cuts() + cut.0 as usize],
            Storage::Lazy(cache) => {
                if let Some(v) = cache.lock().unwrap().get(&(s, cut.0)) {
                    return *v;
                }
                let Provenance::Gaussian(net) = &self.provenance else {
                    unreachable!("lazy tables are Gaussian")
                };
                let state = RelayState::new(s, net.layout().state_bits()).expect("state in range");
                let v = cut_value(net, state, cut).expect("network validated on construction");
                cache.lock().unwrap().insert((s, cut.0), v);
                v
            }
        }
    }

    /// Explicit copy with every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: T) -> Result<Self> {
        let rows = (0..self.n_states)
            .map(|s| (0..self.num_cuts()).map(|a| self.value(s, CutSet(a as u32)) * alpha).collect())
            .collect();
        Self::explicit(self.n_relays, rows)
    }

    /// Explicit table over a subset of the states, in the order given.
    pub fn restrict_states(&self, states: &[usize]) -> Result<Self> {
        let rows = states
            .iter()
            .map(|&s| (0..self.num_cuts()).map(|a| self.value(s, CutSet(a as u32))).collect())
            .collect();
        Self::explicit(self.n_relays, rows)
    }
}

/// Channel from the source side of cut `cut` to its destination side in state `s`.
///
/// Rows: listening antennas of relays in `cut` (global antenna order), then
/// the destination antennas. Columns: transmitting antennas of relays outside
/// `cut`, then the source antennas.
pub fn effective_channel<T: Scalar>(net: &NetworkSpec<T>, s: RelayState, cut: CutSet) -> Result<CMatrix<T>> {
    let l = net.layout();
    if s.len() != l.state_bits() {
        return Err(Error::InvalidState(format!(
            "state has {} bits, layout needs {}",
            s.len(),
            l.state_bits()
        )));
    }
    if cut.0 >> l.n_relays() != 0 {
        return Err(Error::InvalidState(format!("cut {cut} names relays beyond {}", l.n_relays())));
    }
    let m_tot = l.m_tot();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for k in 0..l.n_relays() {
        for j in l.relay_antennas(k) {
            let tx = l.antenna_transmits(s, j);
            if cut.contains(k) && !tx {
                rows.push(j);
            } else if !cut.contains(k) && tx {
                cols.push(j);
            }
        }
    }
    rows.extend(m_tot..m_tot + l.m_dest());
    cols.extend(m_tot..m_tot + l.m_source());
    Ok(net.channel().select(&rows, &cols))
}

/// `f_s(A) = log2 det(I + G G^H)` with unit-power independent inputs.
pub fn cut_value<T: Scalar>(net: &NetworkSpec<T>, s: RelayState, cut: CutSet) -> Result<T> {
    let g = effective_channel(net, s, cut)?;
    log2_det_i_plus_gram(&g, T::one())
}

/// `I_A = sum_s lambda_s f_s(A)` over the schedule's support.
pub fn i_fix<T: Scalar>(table: &CutValueTable<T>, schedule: &Schedule<T>, cut: CutSet) -> T {
    debug_assert_eq!(schedule.num_states(), table.num_states());
    schedule
        .support()
        .iter()
        .map(|&s| schedule.prob(s) * table.value(s, cut))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubmodularityReport<T> {
    pub is_submodular: bool,
    /// Largest amount by which `f(A1) + f(A2) - f(A1 u A2) - f(A1 n A2)` drops
    /// below zero; zero when the inequality always holds.
    pub worst_violation: T,
    pub witness: Option<(CutSet, CutSet)>,
}

/// Checks the submodular inequality over all pairs of subsets of an `n`-set.
pub fn check_submodular_fn<T: Scalar>(
    n: usize,
    limit: usize,
    f: impl Fn(CutSet) -> T,
) -> Result<SubmodularityReport<T>> {
    if n > limit {
        return Err(Error::TooLarge {
            what: "submodularity check",
            size: n,
            limit,
        });
    }
    let vals: Vec<T> = (0..1u32 << n).map(|m| f(CutSet(m))).collect();
    let tol = T::tol(1e-9);
    let mut worst = T::zero();
    let mut witness = None;
    for a in 0..vals.len() {
        for b in (a + 1)..vals.len() {
            let slack = vals[a] + vals[b] - vals[a | b] - vals[a & b];
            if -slack > worst {
                worst = -slack;
                witness = Some((CutSet(a as u32), CutSet(b as u32)));
            }
        }
    }
    Ok(SubmodularityReport {
        is_submodular: worst <= tol,
        worst_violation: worst,
        witness: if worst > tol { witness } else { None },
    })
}

/// Submodularity of `A -> f_s(A)` for one state.
pub fn check_submodular<T: Scalar>(table: &CutValueTable<T>, s: usize) -> Result<SubmodularityReport<T>> {
    check_submodular_fn(table.n_relays(), SUBMODULAR_CHECK_LIMIT, |a| table.value(s, a))
}

/// Convenience constructor for complex entries.
pub fn cplx<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}
