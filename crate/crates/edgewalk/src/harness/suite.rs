use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::exact::{
    coupling_sandwich, ledger_identities, meso_combinatorics, reflection_equivalence, rho_structure,
};
use crate::harness::limit::{absorption_duality, coupling_optimality, limit_atoms, window_floor};
use crate::harness::report::ExperimentReport;
use crate::harness::walk::{
    env_variance, estimate_hitting_constant, meso_increment_table, superdiffusive_exponent, sym_closeness,
    t_lowerbound_trend, triangle_profile_error, uniform_limit_ks,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    /// Pathwise identities; deterministic pass.
    Exact,
    /// Distributional checks at default tolerances.
    Statistical,
}

/// Runs every experiment of a suite with default parameters.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<ExperimentReport>> {
    match suite {
        Suite::Exact => Ok(vec![
            ledger_identities(&Default::default(), seed)?,
            reflection_equivalence(&Default::default(), seed)?,
            coupling_sandwich(&Default::default(), seed)?,
            meso_combinatorics(12)?,
            rho_structure()?,
        ]),
        Suite::Statistical => Ok(vec![
            estimate_hitting_constant(&Default::default(), seed)?,
            triangle_profile_error(&Default::default(), seed)?,
            uniform_limit_ks(&Default::default(), seed)?,
            superdiffusive_exponent(&Default::default(), seed)?,
            absorption_duality(&Default::default(), seed)?,
            window_floor(&Default::default(), seed)?,
            limit_atoms(&Default::default(), seed)?,
            meso_increment_table(&Default::default(), seed)?,
            coupling_optimality(&Default::default(), seed)?,
            sym_closeness(&Default::default(), seed)?,
            t_lowerbound_trend(&Default::default(), seed)?,
            env_variance(&Default::default(), seed)?,
        ]),
    }
}
