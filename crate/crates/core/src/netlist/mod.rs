//! SPICE-subset netlists: parsing, serialization, and elaboration into a
//! simulatable [`Circuit`].
//!
//! ```text
//! <title line>
//! * comment
//! M<name> <d> <g> <s> <b> <model> W=<val> L=<val>
//! V<name> <n+> <n-> DC <val>
//! V<name> <n+> <n-> PULSE(<v1> <v2> <td> <tr> <tf> <pw> <per>)
//! C<name> <n+> <n-> <val>
//! R<name> <n+> <n-> <val>
//! + continuation of the previous card
//! .model <name> NMOS|PMOS (<key>=<val> ...)
//! .tran <tstep> <tstop>
//! .end
//! ```
//!
//! Names and keywords are case-insensitive and stored lower-cased. Node `0`
//! (alias `gnd`) is ground.

mod elaborate;
mod parse;
mod value;
mod write;

pub use elaborate::{
    elaborate, elaborate_with, Capacitor, Circuit, MosInstance, Node, Resistor, VSource,
};
pub use parse::parse_netlist;
pub use value::{format_value, parse_value, EngValue, ValueError};

use crate::devmodel::{Polarity, SourceWave};

/// Parsed netlist document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetlistDoc {
    pub title: String,
    pub devices: Vec<DeviceCard>,
    pub models: Vec<ModelCard>,
    pub directives: Vec<Directive>,
}

/// One device line. `line` is the 1-based source line (0 for generated cards).
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceCard {
    pub name: String,
    pub line: usize,
    pub spec: DeviceSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceSpec {
    Mosfet {
        drain: String,
        gate: String,
        source: String,
        body: String,
        model: String,
        w: f64,
        l: f64,
    },
    VSource {
        pos: String,
        neg: String,
        wave: SourceWave,
    },
    Capacitor {
        pos: String,
        neg: String,
        value: f64,
    },
    Resistor {
        pos: String,
        neg: String,
        value: f64,
    },
}

/// Card letter of a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    M,
    V,
    C,
    R,
}

impl DeviceSpec {
    pub fn kind(&self) -> DeviceKind {
        match self {
            DeviceSpec::Mosfet { .. } => DeviceKind::M,
            DeviceSpec::VSource { .. } => DeviceKind::V,
            DeviceSpec::Capacitor { .. } => DeviceKind::C,
            DeviceSpec::Resistor { .. } => DeviceKind::R,
        }
    }

    /// Terminal nets in card order.
    pub fn nodes(&self) -> Vec<&str> {
        match self {
            DeviceSpec::Mosfet {
                drain,
                gate,
                source,
                body,
                ..
            } => vec![drain, gate, source, body],
            DeviceSpec::VSource { pos, neg, .. }
            | DeviceSpec::Capacitor { pos, neg, .. }
            | DeviceSpec::Resistor { pos, neg, .. } => vec![pos, neg],
        }
    }
}

/// `.model` card. Only explicitly given keys are stored; the rest resolve
/// against [`crate::devmodel::ModelDefaults`] at elaboration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCard {
    pub name: String,
    pub polarity: Polarity,
    pub params: Vec<(String, f64)>,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directive {
    Tran { tstep: f64, tstop: f64 },
}

/// Parse error with the 1-based line of the offending card.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

/// Elaboration failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ElaborateError {
    #[error("line {line}: device `{name}` has both terminals on node `{node}`")]
    ShortedTerminals {
        name: String,
        node: String,
        line: usize,
    },
    #[error("line {line}: device `{name}` references undeclared model `{model}`")]
    UndeclaredModel {
        name: String,
        model: String,
        line: usize,
    },
    #[error("model `{model}`: {msg}")]
    BadModel { model: String, msg: String },
}

pub(crate) fn is_ground(node: &str) -> bool {
    node == "0" || node.eq_ignore_ascii_case("gnd")
}

impl NetlistDoc {
    pub fn device(&self, name: &str) -> Option<&DeviceCard> {
        self.devices
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
    }

    pub fn mosfet_count(&self) -> usize {
        self.devices
            .iter()
            .filter(|d| d.spec.kind() == DeviceKind::M)
            .count()
    }

    #[allow(clippy::unnecessary_find_map)]
    pub fn tran(&self) -> Option<(f64, f64)> {
        self.directives.iter().find_map(|d| match *d {
            Directive::Tran { tstep, tstop } => Some((tstep, tstop)),
        })
    }

    pub fn model(&self, name: &str) -> Option<&ModelCard> {
        self.models
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
    }
}
