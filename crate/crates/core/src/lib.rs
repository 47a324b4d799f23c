//! Impairment-aware routing and spectrum allocation (RSA) for CO-OFDM
//! elastic optical networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`net`]: topology, demands, K-shortest candidate paths.
//! - [`phys`]: crosstalk, GN-model nonlinear interference, coherent
//!   receiver SINR and 4-QAM symbol error probability.
//! - [`spectrum`]: the per-link slot grid plus fragmentation, ψ objective
//!   and the other plan metrics.
//! - [`order`]: MSF and MCDF demand orderings.
//! - [`planner`]: the sequential heuristic with SINR admission and the
//!   shortest-path and load-balancing baselines.
//! - [`exact`]: branch-and-bound solver used as the optimality oracle on
//!   small instances.
//! - [`experiment`] and [`validate`]: demand generation, replicated
//!   experiments, CSV/JSON reports and the independent plan checker.

pub mod error;
pub mod exact;
pub mod experiment;
pub mod net;
pub mod order;
pub mod par;
pub mod phys;
pub mod planner;
pub mod spectrum;
pub mod validate;

pub use error::{Error, Result, SpectrumError};
pub use exact::{exact_solve, optimality_gap, ExactLimits, ExactResult, Gap};
pub use experiment::{generate_demands, run_experiment, ExperimentReport, ExperimentSpec, Mode, RhoSpec};
pub use net::{CandidatePath, Demand, DemandId, LinkId, NodeId, Topology};
pub use order::DemandOrder;
pub use phys::{BeatVarianceMode, ImpairmentParams, SinrBreakdown};
pub use planner::{run_plan, PlanResult, PlanSettings, Policy};
pub use spectrum::{Assignment, Metrics, SpectrumState};
pub use validate::{validate_plan, StateDump, ValidationReport};
