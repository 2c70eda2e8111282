use std::fmt;

use super::value::format_value;
use super::{DeviceSpec, Directive, NetlistDoc};
use crate::devmodel::SourceWave;

fn v(x: f64) -> String {
    format_value(x)
}

impl fmt::Display for NetlistDoc {
    /// Serialize in the grammar accepted by [`super::parse_netlist`].
    /// Values are written so that parsing them back is bit-exact.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for m in &self.models {
            write!(f, ".model {} {}", m.name, m.polarity.model_kind())?;
            if !m.params.is_empty() {
                let kv: Vec<String> = m
                    .params
                    .iter()
                    .map(|(k, x)| format!("{k}={}", v(*x)))
                    .collect();
                write!(f, " ({})", kv.join(" "))?;
            }
            writeln!(f)?;
        }
        for d in &self.devices {
            match &d.spec {
                DeviceSpec::Mosfet {
                    drain,
                    gate,
                    source,
                    body,
                    model,
                    w,
                    l,
                } => writeln!(
                    f,
                    "{} {drain} {gate} {source} {body} {model} W={} L={}",
                    d.name,
                    v(*w),
                    v(*l)
                )?,
                DeviceSpec::VSource { pos, neg, wave } => match wave {
                    SourceWave::Dc(x) => writeln!(f, "{} {pos} {neg} DC {}", d.name, v(*x))?,
                    SourceWave::Pulse(p) => writeln!(
                        f,
                        "{} {pos} {neg} PULSE({} {} {} {} {} {} {})",
                        d.name,
                        v(p.v1),
                        v(p.v2),
                        v(p.td),
                        v(p.tr),
                        v(p.tf),
                        v(p.pw),
                        v(p.per)
                    )?,
                },
                DeviceSpec::Capacitor { pos, neg, value } => {
                    writeln!(f, "{} {pos} {neg} {}", d.name, v(*value))?
                }
                DeviceSpec::Resistor { pos, neg, value } => {
                    writeln!(f, "{} {pos} {neg} {}", d.name, v(*value))?
                }
            }
        }
        for dir in &self.directives {
            match dir {
                Directive::Tran { tstep, tstop } => {
                    writeln!(f, ".tran {} {}", v(*tstep), v(*tstop))?
                }
            }
        }
        writeln!(f, ".end")
    }
}
