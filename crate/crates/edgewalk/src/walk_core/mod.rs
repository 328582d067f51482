//! The directed-edge self-repelling walk: transition weights, the local-time
//! ledger, stopping times, mesoscopic schedules and environment records.

mod config;
mod ledger;
mod schedule;
mod snapshot;
mod stationary;
mod trajectory;
mod weight;

pub use config::{phi, SimConfig};
pub use ledger::{EdgeDir, Move, PositionLog, WalkLedger};
pub use schedule::{mesoscopic_schedule, TrajectoryRecord};
pub use snapshot::{capture_leg, snapshot_begin, LegRecord, Side, SnapshotKind, ZetaRecord};
pub use stationary::{stationary_env_walk, EnvSnapshot};
pub use trajectory::build_y;
pub use weight::{TransitionTable, WeightFunction, WeightKind};

/// Builds a weight from a family name and its parameters; see
/// [`WeightFunction::from_params`].
pub fn make_weight(kind: &str, params: &[f64]) -> crate::Result<WeightFunction> {
    WeightFunction::from_params(kind, params)
}
