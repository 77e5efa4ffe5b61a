//! Seeded random networks with i.i.d. CN(0, 1) gains.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::linalg::CMatrix;
use crate::model::{NetworkSpec, NodeLayout, Switching};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub m_source: usize,
    pub m_relay: Vec<usize>,
    pub m_dest: usize,
    pub switching: Switching,
}

impl RandomSpec {
    pub fn single_antenna(n_relays: usize, switching: Switching) -> Self {
        Self {
            m_source: 1,
            m_relay: vec![1; n_relays],
            m_dest: 1,
            switching,
        }
    }
}

/// Antenna counts drawn uniformly from `1..=max_antennas` per node.
pub fn random_layout(n_relays: usize, max_antennas: usize, switching: Switching, seed: u64) -> RandomSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let max = max_antennas.max(1);
    let mut draw = || rng.random_range(1..=max);
    RandomSpec {
        m_source: draw(),
        m_relay: (0..n_relays).map(|_| draw()).collect(),
        m_dest: draw(),
        switching,
    }
}

/// Every link gets an independent CN(0, 1) gain except the links from a
/// relay to itself, which are zero. The same seed gives the same network.
pub fn random_network(spec: &RandomSpec, seed: u64) -> Result<NetworkSpec<f64>> {
    let layout = NodeLayout::new(spec.m_source, spec.m_relay.clone(), spec.m_dest, spec.switching)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid deviation");
    let m_tot = layout.m_tot();
    let owner: Vec<usize> = (0..layout.n_relays())
        .flat_map(|k| layout.relay_antennas(k).map(move |_| k))
        .collect();
    let rows = (0..m_tot + spec.m_dest)
        .map(|i| {
            (0..m_tot + spec.m_source)
                .map(|j| {
                    let z = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
                    let own = i < m_tot && j < m_tot && owner[i] == owner[j];
                    if own {
                        Complex64::new(0.0, 0.0)
                    } else {
                        z
                    }
                })
                .collect()
        })
        .collect();
    NetworkSpec::new(layout, CMatrix::from_rows(rows)?)
}
