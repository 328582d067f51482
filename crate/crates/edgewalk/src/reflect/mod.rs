//! Skorohod reflection in discrete and continuous time, Brownian paths
//! reflected on a barrier and then absorbed, the `Z` statistic and the
//! limiting environment process.

mod absorb;
mod brownian;
mod env_process;
mod limit_env;
mod skorohod;
mod zstat;

pub use absorb::{absorbed_once, reflect_absorb, sample_absorbed, AbsorptionResult, Direction};
pub use brownian::{sample_brownian_grid, Anchor};
pub use env_process::{
    env_partial_sums, env_process_from_snapshot, env_process_from_walk, increment_variance_rate,
};
pub use limit_env::{
    limit_env_sequence, limit_env_step, LimitEnvConfig, LimitEnvironment, LimitSequence, LimitStep,
};
pub use skorohod::{partial_sums, reflect_max_formula, reflect_recursion, skorohod_reflect, StartMode};
pub use zstat::{
    absorption_frequency, absorption_prob_mc, binomial_se, z_statistic, AbsorptionEstimate,
};

/// `f(s) = -sign(s) |s|^(1/4)`: a barrier whose absorption probabilities
/// sum to more than one.
pub fn quartic_root_barrier(s: f64) -> f64 {
    -s.signum() * s.abs().powf(0.25)
}
