//! Discrete-time predictable relative forward performance processes for
//! competing CARA agents in binomial markets with a common-noise regime.
//!
//! Each agent specializes in one binomial stock whose up-probability depends
//! on a shared bull/bear regime variable, cares about her wealth relative to
//! the population average, and updates her utility function forward in time
//! period by period. The crate computes the resulting equilibria and forward
//! processes:
//!
//! * [`market`] - domain types, validation, and derived market quantities
//!   (risk-neutral probability, regime drifts, moments, return covariance);
//! * [`nash`] - best responses and finite-population equilibria (homogeneous
//!   N-agent, heterogeneous 2-agent, experimental N-agent iteration);
//! * [`mfg`] - population sampling, the mean-field fixed point and
//!   equilibrium strategy, utility-update factors, average-wealth dynamics;
//! * [`closedform`] - shared-stock and independent-stocks closed forms used
//!   as fast paths and solver oracles;
//! * [`forward`] - multi-period forward-process construction, exact-tree
//!   martingale verification, the brute-force grid oracle, wealth simulation;
//! * [`scenario`] / [`runner`] - scenario files, bundled experiment
//!   definitions, solve/sweep/verify entry points and CSV emission.
//!
//! The `examples/` directory demonstrates each capability end to end; the
//! `prfpp` binary exposes the same entry points as `solve`, `sweep`,
//! `verify`, and `report` subcommands.

// validation deliberately writes `!(x > 0.0)` so NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod error;
pub mod forward;
pub mod market;
pub mod mfg;
pub mod nash;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result, Violations};
pub use market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
pub use mfg::{MfgSolution, ParamDistribution, PopulationSpec, SampledPopulation};
pub use nash::{BestResponseInputs, NashSolution};
