//! Holevo capacity of a general two-qubit noisy channel with memory,
//! asymmetry and state-bias, and effective channel parameters derived from
//! temporally shaped qubit pulses.
//!
//! - [`state`]: two-qubit states, the parametrized transmission basis,
//!   Von Neumann entropy and the Holevo quantity χ.
//! - [`channel`]: decoherence parameters (ν¹, α, ζ, μ), sector rate
//!   matrices, the dissipative generator and state propagation.
//! - [`capacity`]: χ maximization over probabilities and basis
//!   entanglement, the closed form f(νt), extreme-limit relations and
//!   parameter sweeps.
//! - [`pulse`]: pulse-controlled time-dependent rates, effective channel
//!   parameters and trajectory propagation.
//! - [`cli`]: the `qchan` command-line front end with CSV output.

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod pulse;
pub mod state;

mod optim;
mod quad;

pub use capacity::{
    chi_for_basis, f_closed_form, limit_relation_residual, optimize_capacity, sweep_capacity,
    CapacityResult, ChiMax, LimitCase, LimitResidual, SweepAxis, SweepParam, SweepPoint,
};
pub use channel::{
    apply_channel, build_liouvillian, params_from_rates, propagate, rates_from_params,
    ChannelParams, Liouvillian, RateMatrices,
};
pub use error::{Error, Result};
pub use pulse::{
    compute_rate, effective_params, propagate_with_trajectory, rate_trajectory, CorrelationFn,
    CorrelationKind, PulseSpec, RateTrajectory, TrajectoryPropagation,
};
pub use state::{
    holevo_chi, make_basis, pure_to_density, von_neumann_entropy, BasisParams, DensityMatrix,
    Ensemble, PureState,
};
