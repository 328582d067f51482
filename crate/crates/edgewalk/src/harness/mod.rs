//! Monte Carlo experiments and the acceptance suites.
//!
//! Every experiment owns a stream namespace (see [`streams`]); replication
//! `r` of block `b` draws from stream `(namespace << 32) | (b << 20) | r` of
//! the master seed. Replications run in parallel, results are gathered in
//! replication order, so reports do not depend on the thread count.

mod exact;
mod limit;
mod report;
pub mod stats;
mod suite;
mod walk;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

pub use exact::{
    coupling_sandwich, ledger_identities, meso_combinatorics, reflection_equivalence, rho_structure,
    LedgerParams, ReflectionParams, SandwichParams,
};
pub use limit::{
    absorption_duality, atom_check, coupling_optimality, limit_atoms, window_floor, AbsorptionParams,
    AtomParams, BarrierKind, CouplingParams, WindowFloorParams,
};
pub use report::{reports_to_csv, CriterionOutcome, ExperimentReport, Measured, SCHEMA_VERSION};
pub use suite::{run_suite, Suite};
pub use walk::{
    anchored_trajectory, env_variance, estimate_hitting_constant, meso_increment_table, superdiffusive_exponent, sym_closeness,
    t_lowerbound_trend, triangle_profile_error, uniform_limit_ks, EnvVarianceParams, ExponentParams,
    HittingParams, MesoParams, ProfileParams, SymParams, TLowerParams, UniformParams,
};

/// Stream namespaces, one per experiment.
pub mod streams {
    pub const HITTING: u32 = 1;
    pub const PROFILE: u32 = 2;
    pub const UNIFORM: u32 = 3;
    pub const EXPONENT: u32 = 4;
    pub const MESO_WALK: u32 = 5;
    pub const MESO_LIMIT: u32 = 6;
    pub const SYMMETRIC: u32 = 7;
    pub const T_LOWER: u32 = 8;
    pub const ATOMS: u32 = 9;
    pub const ABSORPTION: u32 = 10;
    pub const WINDOW: u32 = 11;
    pub const COUPLING: u32 = 12;
    pub const LEDGER: u32 = 13;
    pub const REFLECTION: u32 = 14;
    pub const SANDWICH: u32 = 15;
    pub const ENV_VARIANCE: u32 = 16;
    pub const TRAJECTORY: u32 = 17;

    pub const ALL: [u32; 17] = [
        HITTING, PROFILE, UNIFORM, EXPONENT, MESO_WALK, MESO_LIMIT, SYMMETRIC, T_LOWER, ATOMS, ABSORPTION,
        WINDOW, COUPLING, LEDGER, REFLECTION, SANDWICH, ENV_VARIANCE, TRAJECTORY,
    ];
}

const BLOCK_SHIFT: u32 = 20;

/// Largest replication count per block.
pub const MAX_REPS: u32 = 1 << BLOCK_SHIFT;

/// Stream id of replication `rep` in block `block` of `namespace`.
pub fn stream_id(namespace: u32, block: u32, rep: u32) -> u64 {
    (u64::from(namespace) << 32) | (u64::from(block) << BLOCK_SHIFT) | u64::from(rep)
}

fn check_reps(reps: u32) -> Result<()> {
    if reps == 0 || reps > MAX_REPS {
        return Err(Error::config("reps", format!("must lie in 1..={MAX_REPS}")));
    }
    Ok(())
}

/// Runs `f` on replications `0..reps` of one block in parallel. Errors are
/// tagged with the failing stream.
fn replicate<T, F>(seed: u64, namespace: u32, block: u32, reps: u32, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut SimRng) -> Result<T> + Sync,
{
    replicate_indexed(seed, namespace, block, reps, |_, g| f(g))
}

/// As [`replicate`], also passing the replication index.
fn replicate_indexed<T, F>(seed: u64, namespace: u32, block: u32, reps: u32, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> Result<T> + Sync,
{
    check_reps(reps)?;
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let id = stream_id(namespace, block, r);
            let mut g = rng::stream(seed, id);
            f(r as usize, &mut g).map_err(|e| Error::Replication {
                stream: id,
                source: Box::new(e),
            })
        })
        .collect()
}

fn stream_ids(namespace: u32, block: u32, reps: u32) -> impl Iterator<Item = u64> {
    (0..reps).map(move |r| stream_id(namespace, block, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn namespaces_are_distinct() {
        let mut v = streams::ALL.to_vec();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), streams::ALL.len());
    }

    #[test]
    fn replication_order_is_thread_independent() {
        use rand::Rng;
        let a = replicate(9, 1, 0, 64, |g| Ok(g.random::<u64>())).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| replicate(9, 1, 0, 64, |g| Ok(g.random::<u64>())).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn failures_name_the_stream() {
        let e = replicate(0, 2, 1, 4, |_| Err::<(), _>(Error::Numeric("x".into()))).unwrap_err();
        assert!(matches!(e, Error::Replication { stream, .. } if stream >> 32 == 2));
    }
}
