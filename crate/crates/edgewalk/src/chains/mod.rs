//! Auxiliary chains of the imbalance process, their invariant laws, total
//! variation, couplings, and the independent environment stream.

pub mod chain;
pub mod coupling;
pub mod law;
pub mod zeta_i;

pub use chain::{
    chain_step, eta_one_step_law, eta_step, eta_survival, h_step_law, push_forward, run_eta, xi_step,
    ChainKind, ChainState,
};
pub use coupling::{monotone_pair_step, optimal_coupling, quantile_step};
pub use law::{
    sample_law, stationary_law, tv_distance, DiscreteLaw, InvariantLaws, LawMode, TvReport, DEFAULT_TAIL_EPS,
};
pub use zeta_i::{zeta_i_stream, ZetaIBuilder, ZetaIOrigin, ZetaIStream};
