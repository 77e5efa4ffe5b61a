//! Schedules for half-duplex relay networks.
//!
//! A half-duplex relay either listens or transmits. Averaging over random
//! listen/transmit states with a schedule `lambda`, the cut-set bound with
//! fixed inputs is
//!
//! ```text
//! C' = max_lambda min_A sum_s lambda_s f_s(A)
//! ```
//!
//! where every `f_s` is submodular in the cut `A`. The crate computes `C'`
//! with an LP saddle-point solver, extracts an optimal schedule with at most
//! `N + 1` active states, and evaluates the Gaussian MIMO cut functions, the
//! noisy network coding lower bound and the water-filling upper bound used to
//! certify constant-gap optimality.
//!
//! The kernels are generic over [`num::Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod num;
pub mod scheduler;
pub mod submodular;

pub use error::{Error, Result};
pub use model::{CutSet, NodeLayout, RelayState, Switching};

pub type CMatrix = linalg::CMatrix<f64>;
pub type NetworkSpec = model::NetworkSpec<f64>;
pub type Schedule = model::Schedule<f64>;
pub type CutValueTable = model::CutValueTable<f64>;
pub type SubmodularityReport = model::SubmodularityReport<f64>;
pub type LpSolution = lp::LpSolution<f64>;
pub type SolveResult = scheduler::SolveResult<f64>;
pub type Certificate = scheduler::Certificate<f64>;
