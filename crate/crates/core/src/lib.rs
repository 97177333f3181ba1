//! Simulation and model-selection harness for noisy GHZ-state experiments.
//!
//! The library simulates collective single-qubit measurements on N-qubit
//! permutationally invariant (PI) states, fits two candidate error models by
//! maximum likelihood, and ranks them with the Akaike Information Criterion:
//!
//! - a 3-parameter noisy-GHZ model (population imbalance, systematic phase,
//!   dephasing), and
//! - the full PI model, block-diagonal over total-spin sectors.
//!
//! ΔAIC = AIC(3-parameter) − AIC(PI): negative values favor the 3-parameter
//! model, positive values signal errors outside it. Sweep harnesses scan the
//! measurement budget M, the qubit number N, and the perturbation strength q
//! to locate the budget at which mean ΔAIC crosses zero.
//!
//! Start with the runnable examples (`cargo run --example collective_counts`,
//! `model_fits`, `aic_crossing`, ...); the `ghz-aic` binary wraps the same
//! entry points behind a small CLI.

pub mod cli;
pub mod error;
pub mod estimation;
pub mod measurement;
pub mod nelder_mead;
pub mod oracle;
pub mod pi_state;
pub mod seed;
pub mod selection;
pub mod spin;

pub use error::{Error, Result};
pub use estimation::{fit_pi, fit_three_param, log_likelihood, FitResult};
pub use measurement::{
    generate_plan, outcome_distribution, sample_dataset, setting_count, CountsDataset,
    MeasurementPlan, Setting,
};
pub use pi_state::{
    ghz_state, mix_true_state, multiplicities, orthogonalize_to_3p, pi_param_count,
    random_pi_state, three_param_state, MultiplicityTable, PIState, ThreeParamState,
};
pub use selection::{aic, delta_aic, scaling_in_n, scaling_in_q, sweep, AicReport, SweepResult};
pub use spin::{ladder_operators, rotation_to_axis, CMatrix, RotationMatrix, SpinLabel};
