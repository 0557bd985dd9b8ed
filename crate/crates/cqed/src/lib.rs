//! Cavity QED toolkit for color centers coupled to photonic crystal
//! cavities: response functions, optical Bloch dynamics, trace fitting,
//! resonator design helpers and derived-quantity reporting.

pub mod bloch;
pub mod design;
pub mod error;
pub mod fit;
pub mod params;
pub mod plotdata;
pub mod report;
pub mod stats;
pub mod response;
pub mod search;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use params::{CqedParams, Detuning};
