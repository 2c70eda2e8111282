//! Device evaluation: the MOSFET model, its lumped capacitances, and
//! independent source waveforms. Everything here is a pure function.

mod mosfet;
mod params;
mod source;

pub use mosfet::{
    effective_vth, mosfet_caps, mosfet_eval, terminal_eval, MosBias, MosCaps, MosEval,
    TerminalEval, VT,
};
pub use params::{ModelDefaults, MosParams, Polarity, MODEL_KEYS};
pub use source::{source_value, Pulse, SourceWave};
