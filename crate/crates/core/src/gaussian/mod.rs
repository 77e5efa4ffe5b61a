//! Gaussian front end: network files, the two-antenna line network, the
//! noisy network coding lower bound and random instances.

pub mod gap;
pub mod json;
pub mod line;
pub mod random;
pub mod sweep;

pub use gap::{gap_certificate, nnc_rate, GapCertificate, GAP_PER_ANTENNA};
pub use json::{parse_network, to_json};
pub use line::{line_fixed_power, line_table, line_waterfill, sandwich_check, LineNetworkGains};
pub use random::{random_layout, random_network, RandomSpec};
pub use sweep::{sweep_line, to_csv, SweepRow};
