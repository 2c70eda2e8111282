//! Transistor-level simulation and characterization of level-shifter
//! circuits.
//!
//! The pipeline is: build or parse a netlist ([`netlist`], [`topologies`]),
//! elaborate it into a [`netlist::Circuit`], simulate it ([`engine`]) with the
//! subthreshold-continuous MOSFET model ([`devmodel`]), and extract power and
//! delay figures ([`measure`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod devmodel;
pub mod engine;
pub mod error;
pub mod measure;
pub mod netlist;
pub mod topologies;

pub use error::{Error, Result};
