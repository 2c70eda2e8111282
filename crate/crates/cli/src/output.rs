//! Waveform CSV, report JSON, and engineering-unit formatting.

use std::io::Write;

use levelsim::devmodel::SourceWave;
use levelsim::engine::Waveforms;
use levelsim::measure::Report;
use levelsim::netlist::Circuit;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Scientific notation with 9 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

/// Nodes held by a DC source to ground. Their waveforms are constant, so
/// the CSV leaves them out.
pub fn dc_rails(circuit: &Circuit) -> Vec<usize> {
    circuit
        .sources
        .iter()
        .filter(|s| matches!(s.wave, SourceWave::Dc(_)))
        .filter_map(|s| match (s.pos, s.neg) {
            (Some(n), None) | (None, Some(n)) => Some(n),
            _ => None,
        })
        .collect()
}

/// `time,<node>...,i(<source>)...`, one row per grid point.
pub fn write_waveforms<W: Write>(
    out: W,
    circuit: &Circuit,
    waves: &Waveforms,
) -> Result<(), CliError> {
    let rails = dc_rails(circuit);
    let nodes: Vec<usize> = (0..waves.node_names.len())
        .filter(|k| !rails.contains(k))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("time".to_string())
        .chain(nodes.iter().map(|&k| waves.node_names[k].clone()))
        .chain(waves.source_names.iter().map(|s| format!("i({s})")));
    w.write_record(header)?;
    for (k, t) in waves.t.iter().enumerate() {
        let row = std::iter::once(sci(*t))
            .chain(nodes.iter().map(|&n| sci(waves.node_v[n][k])))
            .chain(waves.supply_i.iter().map(|i| sci(i[k])));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Report as serialized by `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub circuit: String,
    pub power_avg_w: f64,
    pub power_static_lo_w: f64,
    pub power_static_hi_w: f64,
    pub delay_rise_s: f64,
    pub delay_fall_s: f64,
    pub delay_max_s: f64,
    pub swing_hi_v: f64,
    pub swing_lo_v: f64,
}

impl From<&Report> for ReportJson {
    fn from(r: &Report) -> Self {
        ReportJson {
            circuit: r.circuit_name.clone(),
            power_avg_w: r.power_avg,
            power_static_lo_w: r.power_static_lo,
            power_static_hi_w: r.power_static_hi,
            delay_rise_s: r.delay_rise,
            delay_fall_s: r.delay_fall,
            delay_max_s: r.delay_max,
            swing_hi_v: r.swing_hi,
            swing_lo_v: r.swing_lo,
        }
    }
}

const PREFIXES: [(f64, &str); 7] = [
    (1e3, "k"),
    (1.0, ""),
    (1e-3, "m"),
    (1e-6, "u"),
    (1e-9, "n"),
    (1e-12, "p"),
    (1e-15, "f"),
];

/// `x` scaled to the largest prefix not exceeding it, e.g. `402.23 pW`.
pub fn eng(x: f64, unit: &str) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x} {unit}");
    }
    let (scale, prefix) = PREFIXES
        .iter()
        .copied()
        .find(|(s, _)| x.abs() >= *s)
        .unwrap_or(PREFIXES[PREFIXES.len() - 1]);
    format!("{:.4} {prefix}{unit}", x / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engineering_units() {
        assert_eq!(eng(402.2264e-12, "W"), "402.2264 pW");
        assert_eq!(eng(2.3376e-9, "s"), "2.3376 ns");
        assert_eq!(eng(-0.18e-9, "s"), "-180.0000 ps");
        assert_eq!(eng(3.3, "V"), "3.3000 V");
        assert_eq!(eng(0.0, "V"), "0 V");
        assert_eq!(eng(1e-18, "W"), "0.0010 fW");
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sci(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(sci(0.0), "0.00000000e0");
    }
}
