//! Nonlinear least squares: a damped Gauss-Newton engine and the fit models
//! used to extract C-QED parameters from measured traces.

mod engine;
mod models;

pub use engine::{least_squares, FitResult};
pub use models::{
    fit_exponential_decay, fit_lifetime_vs_detuning, fit_linewidth_vs_detuning, fit_lorentzian_linear,
    fit_reflection, fit_transmission_spectrum, LinewidthFit, LorentzianFit, ReflectionFit,
    TransmissionFixed, TransmissionFit,
};
