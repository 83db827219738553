//! Juggler's exclusion process toolkit.
//!
//! `n` particles sit on distinct non-negative heights. Each step they all fall
//! by one; when one reaches zero it is thrown to a free height drawn from a
//! jump family indexed by the positions of the others. This crate provides
//!
//! * set combinatorics: the avoiding shift and noncolliding union ([`sets`]),
//! * jump families and their structural diagnostics ([`jump`]),
//! * simulation and the exact transient sampler ([`process`]),
//! * exact solvers on truncated state spaces ([`exact`]),
//! * the closed-form Gibbs equilibrium of the memoryless family ([`gibbs`]),
//! * the bounded uniform model and the reflecting exclusion process ([`related`]),
//! * Monte-Carlo bookkeeping, convergence profiles and run configs ([`harness`]),
//! * the invariant suite run by `jep verify` ([`verify`]).

pub mod error;
pub mod exact;
pub mod gibbs;
pub mod harness;
pub mod jump;
pub mod process;
pub mod related;
pub mod sets;
pub mod stream;
pub mod verify;

pub use error::{JepError, Result};
pub use exact::{
    balance_residual, build_matrix, distribution_at_time, drift_statistic, enumerate_states,
    renewal_equilibrium, stationary_distribution, tv_distance, DistVector, StochasticMatrix,
    TruncatedStateSpace,
};
pub use gibbs::{
    equilibrium_stats, gibbs_pmf, gibbs_super_pmf, partition_function, sample_gibbs,
    EquilibriumStats, GibbsParams,
};
pub use harness::{
    convergence_profile, empirical_distribution, monte_carlo, EmpiricalSetDistribution, RunConfig,
};
pub use jump::{
    bounded_uniform_pmf, check_aperiodicity, check_noncolliding, memoryless_pmf, sample_memoryless,
    tail_first_moment, BoundedUniformFamily, CheckReport, JumpFamily, MemorylessFamily,
    TableFamily,
};
pub use process::{jump_times, simulate, step, transient_law_sample, Trajectory};
pub use related::{asep_simulate, asep_stationary_exact, stirling2, warrington_pmf, AsepParams};
pub use sets::ParticleConfig;
pub use stream::{GeometricStream, StreamSeed};
