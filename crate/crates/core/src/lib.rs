//! Superadditive decoding of BPSK coherent-state codewords in the
//! low-photon-number regime.
//!
//! Codewords are rows of a Hadamard matrix. A linear-optics circuit built from
//! beam splitters maps them onto pulse-position modulation, which photon
//! counters then read out; the hybrid scheme keeps one output port for a
//! Dolinar receiver so the all-plus and all-minus words stay usable.

pub mod circuit;
pub mod cli;
pub mod config;
pub mod detection;
pub mod gf;
pub mod hadamard;
pub mod infotheory;
pub mod simulation;

pub use circuit::{AmplitudeVector, BeamSplitterOp, CircuitError, CircuitPlan, Element};
pub use detection::{DetectionRecord, DetectorModel, DolinarConfig, FeedbackLaw, Outcome, Sign};
pub use hadamard::{Codeword, HadamardError, HadamardMatrix};
pub use infotheory::{ChannelParams, RateError};
