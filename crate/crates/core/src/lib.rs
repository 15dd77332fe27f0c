//! Continuous-variable teleportation with Gaussian post-selection.
//!
//! * [`gaussian`] covariance-matrix primitives and the conditional state
//!   left on Bob's side after Alice's measurement.
//! * [`effective`] the closed-form effective channel: transmission, excess
//!   noise, effective NLA gain and success probability.
//! * [`fock`] truncated Fock-space operators and the brute-force oracle.
//! * [`bell`] CHSH values and concurrences of a distilled dual-rail Bell state.
//!
//! Quadratures are in shot-noise units, `X = a + a†`, `P = i(a† − a)`.

pub mod bell;
pub mod effective;
pub mod error;
pub mod fock;
pub mod gaussian;

pub use bell::{
    chsh_loss, chsh_tele, concurrence_tele, noisy_bell_oracle, wootters_concurrence, BellOracleResult,
    BellScenarioParams, BellTestResult, Scenario,
};
pub use effective::{
    delta_at_gopt, delta_no_postselection, effective_params, geff_at_gopt, optimal_gain, success_probability,
    EffectiveChannelParams, TeleporterConfig,
};
pub use error::{Error, Result};
pub use fock::oracle::{
    apply_effective_system, sigma_ps_closed_form, sigma_ps_numeric, teleport_arbitrary_state, OracleOutput,
};
pub use fock::{FockOperator, QuadratureGrid};
pub use gaussian::{ChannelParams, ConditionalState, TwoModeGaussianState};
