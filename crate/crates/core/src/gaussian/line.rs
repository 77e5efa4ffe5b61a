//! Source, one two-antenna relay, destination, no direct link.
//!
//! State indices follow the crate convention: bit 0 is relay antenna 1, so
//! index 1 is "10" (antenna 1 transmits) and index 2 is "01".
//!
//! With fixed unit powers the all-transmit state uses the coherent
//! beamforming gain `(|h_dr1| + |h_dr2|)^2`. With a unit power budget spread
//! across the states (water-filling) the rate stays within `[C' - 1, C' + 2]`
//! bits of the fixed-power value.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{CutValueTable, NetworkSpec, NodeLayout, Schedule, Switching};
use crate::scheduler::{solve_saddle, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineNetworkGains {
    /// Source to relay antennas 1 and 2.
    pub h_rs: [Complex64; 2],
    /// Relay antennas 1 and 2 to destination.
    pub h_dr: [Complex64; 2],
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

impl LineNetworkGains {
    pub fn new(h_rs: [Complex64; 2], h_dr: [Complex64; 2]) -> Result<Self> {
        if h_rs.iter().chain(&h_dr).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite line network gain".into()));
        }
        Ok(Self { h_rs, h_dr })
    }

    /// All four links with power gain `gamma`.
    pub fn symmetric(gamma: f64) -> Self {
        let g = Complex64::new(gamma.sqrt(), 0.0);
        Self {
            h_rs: [g; 2],
            h_dr: [g; 2],
        }
    }

    /// Source reaches only antenna 1; only antenna 2 reaches the destination.
    pub fn crossed(gamma: f64) -> Self {
        let g = Complex64::new(gamma.sqrt(), 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self {
            h_rs: [g, z],
            h_dr: [z, g],
        }
    }

    fn rs(&self) -> [f64; 2] {
        [self.h_rs[0].norm_sqr(), self.h_rs[1].norm_sqr()]
    }

    fn dr(&self) -> [f64; 2] {
        [self.h_dr[0].norm_sqr(), self.h_dr[1].norm_sqr()]
    }

    fn is_symmetric(&self) -> bool {
        let [a, b] = self.rs();
        let [c, d] = self.dr();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
        close(a, b) && close(a, c) && close(a, d)
    }

    /// The same channel as a general network file (`N = 1`, two relay antennas).
    pub fn to_network(&self, switching: Switching) -> NetworkSpec<f64> {
        let z = Complex64::new(0.0, 0.0);
        let layout = NodeLayout::new(1, vec![2], 1, switching).expect("fixed layout");
        let h = CMatrix::from_rows(vec![
            vec![z, z, self.h_rs[0]],
            vec![z, z, self.h_rs[1]],
            vec![self.h_dr[0], self.h_dr[1], z],
        ])
        .expect("rectangular");
        NetworkSpec::new(layout, h).expect("validated gains")
    }
}

/// Four-state fixed-power table; the all-transmit state combines coherently.
pub fn line_table(g: &LineNetworkGains) -> CutValueTable<f64> {
    let [rs1, rs2] = g.rs();
    let [dr1, dr2] = g.dr();
    let coherent = (dr1.sqrt() + dr2.sqrt()).powi(2);
    CutValueTable::explicit(
        1,
        vec![
            vec![0.0, log2_1p(rs1 + rs2)],
            vec![log2_1p(dr1), log2_1p(rs2)],
            vec![log2_1p(dr2), log2_1p(rs1)],
            vec![log2_1p(coherent), 0.0],
        ],
    )
    .expect("nonnegative entries")
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPower {
    /// Antennas switched independently.
    pub c_case_i: f64,
    pub schedule_i: Schedule<f64>,
    /// Both antennas listen or both transmit.
    pub c_case_ii: f64,
    /// Fraction of time both antennas listen.
    pub lambda_ii: f64,
}

pub fn line_fixed_power(g: &LineNetworkGains) -> Result<FixedPower> {
    let table = line_table(g);
    let solved = solve_saddle(&table, &SolveOptions::default())?;
    let l_rs = table.value(0, crate::model::CutSet(1));
    let l_dr = table.value(3, crate::model::CutSet::EMPTY);
    let (c_case_ii, lambda_ii) = if l_rs + l_dr > 0.0 {
        (l_rs * l_dr / (l_rs + l_dr), l_dr / (l_rs + l_dr))
    } else {
        (0.0, 1.0)
    };
    Ok(FixedPower {
        c_case_i: solved.rate,
        schedule_i: solved.schedule,
        c_case_ii,
        lambda_ii,
    })
}

/// Water level `nu` with `sum_k w_k (nu - 1/a_k)^+ = 1`; terms with zero
/// weight or gain are ignored. `None` when no term is active.
pub fn water_level(terms: &[(f64, f64)]) -> Option<f64> {
    let active: Vec<(f64, f64)> = terms.iter().copied().filter(|&(w, a)| w > 0.0 && a > 0.0).collect();
    if active.is_empty() {
        return None;
    }
    let total: f64 = active.iter().map(|t| t.0).sum();
    let fill = |nu: f64| active.iter().map(|&(w, a)| w * (nu - 1.0 / a).max(0.0)).sum::<f64>();
    let mut lo = 0.0;
    let mut hi = active.iter().map(|t| 1.0 / t.1).fold(0.0, f64::max) + 1.0 / total;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let v = fill(mid);
        if (v - 1.0).abs() <= 1e-12 {
            return Some(mid);
        }
        if v < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn waterfilled_rate(terms: &[(f64, f64)]) -> f64 {
    match water_level(terms) {
        None => 0.0,
        Some(nu) => terms
            .iter()
            .filter(|&&(w, a)| w > 0.0 && a > 0.0)
            .map(|&(w, a)| w * (nu * a).log2().max(0.0))
            .sum(),
    }
}

/// `min(I_empty, I_relay)` at schedule `lam` with powers water-filled across
/// the states on each side.
pub fn waterfilled_min(g: &LineNetworkGains, lam: [f64; 4]) -> f64 {
    let [rs1, rs2] = g.rs();
    let [dr1, dr2] = g.dr();
    let i_empty = waterfilled_rate(&[(lam[1], dr1), (lam[2], dr2), (lam[3], dr1 + dr2)]);
    let i_relay = waterfilled_rate(&[(lam[0], rs1 + rs2), (lam[1], rs2), (lam[2], rs1)]);
    i_empty.min(i_relay)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Waterfill {
    pub c_wf_case_i: f64,
    /// Maximizing schedule over (00, 10, 01, 11).
    pub lambda_i: [f64; 4],
    pub c_wf_case_ii: f64,
    /// Fraction of time both antennas transmit.
    pub lambda_ii: f64,
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn symmetric_schedule(lam: f64) -> [f64; 4] {
    [(1.0 - lam) / 2.0, lam / 2.0, lam / 2.0, (1.0 - lam) / 2.0]
}

/// Both-antennas-together rate with water-filled powers: equalizes
/// `l log(1 + |h_dr|^2 / l)` and `(1 - l) log(1 + |h_rs|^2 / (1 - l))`.
fn waterfill_case_ii(g: &LineNetworkGains) -> (f64, f64) {
    let d: f64 = g.dr().iter().sum();
    let r: f64 = g.rs().iter().sum();
    if d <= 0.0 || r <= 0.0 {
        return (0.0, 0.5);
    }
    let tx = |l: f64| if l > 0.0 { l * log2_1p(d / l) } else { 0.0 };
    let rx = |l: f64| if l < 1.0 { (1.0 - l) * log2_1p(r / (1.0 - l)) } else { 0.0 };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if tx(mid) < rx(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l = 0.5 * (lo + hi);
    (tx(l).min(rx(l)), l)
}

/// Rates with power optimized across the states.
///
/// Symmetric gains use the one-parameter family
/// `lambda_10 + lambda_01 = l`, `lambda_00 = lambda_11 = (1 - l) / 2`; other
/// gains search the whole simplex. The objective is concave in the schedule,
/// so a grid of `resolution` steps followed by local refinement finds the
/// maximum.
pub fn line_waterfill(g: &LineNetworkGains, resolution: usize) -> Result<Waterfill> {
    if resolution < 100 {
        return Err(Error::InvalidInput("water-filling grid needs at least 100 steps".into()));
    }
    let (c_wf_case_ii, lambda_ii) = waterfill_case_ii(g);
    let (c_wf_case_i, lambda_i) = if g.is_symmetric() {
        let f = |l: f64| waterfilled_min(g, symmetric_schedule(l));
        let step = 1.0 / resolution as f64;
        let best = (0..=resolution)
            .map(|k| k as f64 * step)
            .map(|l| (l, f(l)))
            .fold((0.0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
        let (l, v) = golden_max(f, (best.0 - step).max(0.0), (best.0 + step).min(1.0), 1e-9);
        if v >= best.1 {
            (v, symmetric_schedule(l))
        } else {
            (best.1, symmetric_schedule(best.0))
        }
    } else {
        simplex_search(g, resolution)
    };
    Ok(Waterfill {
        c_wf_case_i: c_wf_case_i.max(c_wf_case_ii),
        lambda_i,
        c_wf_case_ii,
        lambda_ii,
    })
}

fn simplex_search(g: &LineNetworkGains, resolution: usize) -> (f64, [f64; 4]) {
    let r = resolution;
    let step = 1.0 / r as f64;
    let mut best = (f64::NEG_INFINITY, [0.25; 4]);
    for a in 0..=r {
        for b in 0..=r - a {
            for c in 0..=r - a - b {
                let d = r - a - b - c;
                let lam = [a as f64 * step, b as f64 * step, c as f64 * step, d as f64 * step];
                let v = waterfilled_min(g, lam);
                if v > best.0 {
                    best = (v, lam);
                }
            }
        }
    }
    // Pattern search along mass transfers between pairs of states.
    let mut h = step;
    while h > 1e-10 {
        let mut improved = false;
        for i in 0..4 {
            for j in 0..4 {
                if i == j || best.1[j] < h {
                    continue;
                }
                let mut lam = best.1;
                lam[i] += h;
                lam[j] -= h;
                let v = waterfilled_min(g, lam);
                if v > best.0 {
                    best = (v, lam);
                    improved = true;
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sandwich {
    pub c_prime: f64,
    pub c_doubleprime: f64,
    /// `c_doubleprime - (c_prime - 1)`.
    pub lower_slack: f64,
    /// `(c_prime + 2) - c_doubleprime`.
    pub upper_slack: f64,
}

/// Checks `C' - 1 <= C'' <= C' + 2` bits for the independently switched relay.
pub fn sandwich_check(g: &LineNetworkGains) -> Result<Sandwich> {
    let c_prime = line_fixed_power(g)?.c_case_i;
    let c_doubleprime = line_waterfill(g, 200)?.c_wf_case_i;
    let s = Sandwich {
        c_prime,
        c_doubleprime,
        lower_slack: c_doubleprime - (c_prime - 1.0),
        upper_slack: (c_prime + 2.0) - c_doubleprime,
    };
    if s.lower_slack < -1e-9 || s.upper_slack < -1e-9 {
        return Err(Error::Certificate {
            message: format!("water-filled rate {c_doubleprime} outside [{c_prime} - 1, {c_prime} + 2]"),
            witness: format!("{g:?}"),
        });
    }
    Ok(s)
}

/// Gain `gamma` at which the single-state schedule (rate `log2(1 + gamma)`)
/// and the two-state schedule over 00 and 11 trade places for symmetric gains.
pub fn symmetric_branch_point(tol: f64) -> f64 {
    let diff = |g: f64| {
        let l2 = log2_1p(2.0 * g);
        let l4 = log2_1p(4.0 * g);
        log2_1p(g) - l2 * l4 / (l2 + l4)
    };
    let (mut lo, mut hi) = (1e-3, 10.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if diff(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossed_gains_at_three() {
        let r = line_fixed_power(&LineNetworkGains::crossed(3.0)).unwrap();
        assert!((r.c_case_i - 2.0).abs() < 1e-9);
        assert_eq!(r.schedule_i.support(), &[2]);
        assert!((r.c_case_ii - 1.0).abs() < 1e-9);
        assert!((r.lambda_ii - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_gains_above_and_below_the_branch_point() {
        let r = line_fixed_power(&LineNetworkGains::symmetric(1.0)).unwrap();
        assert!((r.c_case_i - 1.0).abs() < 1e-9);
        assert_eq!(r.schedule_i.support().len(), 1);
        let r = line_fixed_power(&LineNetworkGains::symmetric(0.5)).unwrap();
        let (l2, l3) = (2f64.log2(), 3f64.log2());
        assert!((r.c_case_i - l2 * l3 / (l2 + l3)).abs() < 1e-9);
        assert_eq!(r.schedule_i.support(), &[0, 3]);
    }

    #[test]
    fn branch_point_location() {
        let g = symmetric_branch_point(1e-10);
        assert!((g - 0.684011467).abs() < 1e-6, "{g}");
        // The rate at the branch point is where the two curves meet.
        assert!((log2_1p(g) - 0.7519).abs() < 1e-3);
    }

    #[test]
    fn generic_log_det_agrees_away_from_the_coherent_state() {
        let g = LineNetworkGains::new(
            [Complex64::new(0.3, -1.1), Complex64::new(0.8, 0.4)],
            [Complex64::new(-0.5, 0.2), Complex64::new(1.3, 0.0)],
        )
        .unwrap();
        let special = line_table(&g);
        let generic = CutValueTable::from_network(&g.to_network(Switching::Independent)).unwrap();
        for s in 0..3 {
            for a in 0..2 {
                let c = crate::model::CutSet(a);
                assert!((special.value(s, c) - generic.value(s, c)).abs() < 1e-12, "state {s} cut {a}");
            }
        }
        assert_eq!(generic.value(3, crate::model::CutSet(1)), 0.0);
        assert!(generic.value(3, crate::model::CutSet::EMPTY) <= special.value(3, crate::model::CutSet::EMPTY));
    }

    #[test]
    fn water_level_meets_its_constraint() {
        let terms = [(0.3, 2.0), (0.2, 0.5), (0.5, 7.0), (0.0, 3.0)];
        let nu = water_level(&terms).unwrap();
        let fill: f64 = terms.iter().filter(|t| t.0 > 0.0).map(|&(w, a)| w * (nu - 1.0 / a).max(0.0)).sum();
        assert!((fill - 1.0).abs() < 1e-10);
        assert!(water_level(&[(0.0, 1.0), (1.0, 0.0)]).is_none());
    }

    #[test]
    fn symmetric_case_ii_closed_form() {
        for gamma in [0.1, 1.0, 7.3] {
            let w = line_waterfill(&LineNetworkGains::symmetric(gamma), 100).unwrap();
            assert!((w.c_wf_case_ii - 0.5 * log2_1p(4.0 * gamma)).abs() < 1e-10);
            assert!(w.c_wf_case_i >= w.c_wf_case_ii - 1e-12);
        }
    }

    #[test]
    fn symmetric_family_matches_its_closed_form() {
        // C'' at a fixed l in the symmetric family.
        let gamma: f64 = 2.0;
        for l in [0.1f64, 0.4, 0.8] {
            let direct = waterfilled_min(&LineNetworkGains::symmetric(gamma), symmetric_schedule(l));
            let closed = l * ((3.0 * l + 1.0) / (2.0 * (l + 1.0)) + 2.0 / (l + 1.0) * gamma).log2()
                + (1.0 - l) / 2.0 * ((3.0 * l + 1.0) / (l + 1.0) + 4.0 / (l + 1.0) * gamma).log2();
            assert!((direct - closed).abs() < 1e-9, "{direct} vs {closed}");
        }
    }

    #[test]
    fn general_search_agrees_with_the_symmetric_family() {
        // Slightly perturbed gains fall back to the full simplex search.
        let g = LineNetworkGains::new(
            [Complex64::new(1.0, 0.0), Complex64::new(1.0 + 1e-9, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        let sym = line_waterfill(&LineNetworkGains::symmetric(1.0), 200).unwrap();
        let gen = line_waterfill(&g, 100).unwrap();
        assert!((sym.c_wf_case_i - gen.c_wf_case_i).abs() < 1e-6);
    }

    #[test]
    fn sandwich_at_unit_gain() {
        let s = sandwich_check(&LineNetworkGains::symmetric(1.0)).unwrap();
        assert!(s.lower_slack >= 0.0 && s.upper_slack >= 0.0);
        assert!((s.c_doubleprime - s.c_prime).abs() < 0.3);
    }

    #[test]
    fn independent_switching_never_loses() {
        for gamma in [0.05, 0.7, 3.0, 40.0] {
            for g in [LineNetworkGains::symmetric(gamma), LineNetworkGains::crossed(gamma)] {
                let r = line_fixed_power(&g).unwrap();
                assert!(r.c_case_i >= r.c_case_ii - 1e-9);
            }
        }
    }
}
