//! Figures of merit extracted from simulation results: propagation delay,
//! average and static power, and settled output levels.
//!
//! Delays use 50% crossings of each signal's own swing, located by linear
//! interpolation between grid points. Power is the total delivered by the
//! listed sources minus the dissipation in the solver's gmin shunts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::devmodel::SourceWave;
use crate::engine::{
    dc_operating_point, transient, DcOptions, Scheme, SolveError, TranOptions, Waveforms,
};
use crate::netlist::Circuit;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("no output transition after input edge {edge} at t = {time:.4e} s")]
    NoTransition { edge: usize, time: f64 },
    #[error("no {direction} output transitions measured")]
    MissingDirection { direction: &'static str },
    #[error("no settled window of at least {MIN_WINDOW} samples for the {state} state")]
    NoSettledWindow { state: &'static str },
    #[error("window [{t0:e}, {t1:e}] s lies outside the simulated range")]
    WindowOutOfRange { t0: f64, t1: f64 },
    #[error("unknown source `{0}`")]
    UnknownSource(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("circuit has no PULSE stimulus source")]
    NoStimulus,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// Minimum samples in a settled window.
pub const MIN_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Levels {
    pub lo: f64,
    pub hi: f64,
}

impl Levels {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A threshold crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub rising: bool,
}

/// All crossings of `level`, interpolated linearly between samples.
pub fn crossings(wave: &[f64], t: &[f64], level: f64) -> Vec<Crossing> {
    let mut out = Vec::new();
    for k in 0..wave.len().saturating_sub(1) {
        let (a, b) = (wave[k], wave[k + 1]);
        let rising = a < level && b >= level;
        let falling = a > level && b <= level;
        if rising || falling {
            let frac = (level - a) / (b - a);
            out.push(Crossing {
                time: t[k] + frac * (t[k + 1] - t[k]),
                rising,
            });
        }
    }
    out
}

/// Mean delay per output direction; `None` when no edge of that direction
/// was measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delays {
    /// Output rising.
    pub rise: Option<f64>,
    /// Output falling.
    pub fall: Option<f64>,
}

/// 50%-to-50% propagation delay. Input edges are paired in order with the
/// output transitions they cause: the response to an edge is the first
/// output crossing (of either polarity) after the previous edge's response
/// and before the next input edge. A circuit whose output starts moving
/// before the input reaches mid-swing therefore yields a negative delay
/// rather than a skipped edge. Edges before `t_start` are paired but not
/// reported; delays are grouped by output direction and averaged.
pub fn propagation_delay(
    in_wave: &[f64],
    out_wave: &[f64],
    t: &[f64],
    in_levels: Levels,
    out_levels: Levels,
    t_start: f64,
) -> Result<Delays> {
    let ins = crossings(in_wave, t, in_levels.mid());
    let outs = crossings(out_wave, t, out_levels.mid());

    let (mut rise, mut fall) = (Vec::new(), Vec::new());
    let mut next_out = 0;
    let mut measured = 0;
    for (j, c) in ins.iter().enumerate() {
        let next_in = ins.get(j + 1).map_or(f64::INFINITY, |n| n.time);
        let hit = outs[next_out..].iter().position(|o| o.time < next_in);
        let reported = c.time >= t_start;
        match hit {
            Some(off) => {
                let o = outs[next_out + off];
                next_out += off + 1;
                if reported {
                    let d = o.time - c.time;
                    if o.rising {
                        rise.push(d);
                    } else {
                        fall.push(d);
                    }
                }
            }
            None if reported => {
                return Err(MeasureError::NoTransition {
                    edge: measured,
                    time: c.time,
                })
            }
            None => {}
        }
        if reported {
            measured += 1;
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Ok(Delays {
        rise: mean(&rise),
        fall: mean(&fall),
    })
}

fn window_indices(t: &[f64], t0: f64, t1: f64) -> Result<(usize, usize)> {
    let out = MeasureError::WindowOutOfRange { t0, t1 };
    if t.len() < 2 || !(t1 > t0) {
        return Err(out);
    }
    let dt = t[1] - t[0];
    let eps = 1e-6 * dt;
    if t0 < t[0] - eps || t1 > t[t.len() - 1] + eps {
        return Err(out);
    }
    let i0 = t.partition_point(|&x| x < t0 - eps);
    let i1 = t.partition_point(|&x| x <= t1 + eps) - 1;
    if i1 <= i0 {
        return Err(out);
    }
    Ok((i0, i1))
}

/// Average power delivered by `supplies` over `[t0, t1]` (trapezoidal
/// quadrature on the grid). When `supplies` covers every source in the run,
/// the gmin shunt dissipation is subtracted so only device power remains.
pub fn average_power(waves: &Waveforms, supplies: &[&str], window: (f64, f64)) -> Result<f64> {
    let (i0, i1) = window_indices(&waves.t, window.0, window.1)?;
    let mut idx = Vec::with_capacity(supplies.len());
    for s in supplies {
        let k = waves
            .source_index(s)
            .ok_or_else(|| MeasureError::UnknownSource(s.to_string()))?;
        if !idx.contains(&k) {
            idx.push(k);
        }
    }
    let all = idx.len() == waves.source_names.len();
    let p = |k: usize| {
        let delivered: f64 = idx
            .iter()
            .map(|&s| -waves.source_v[s][k] * waves.supply_i[s][k])
            .sum();
        if all {
            delivered - waves.gmin_power(k)
        } else {
            delivered
        }
    };
    let mut energy = 0.0;
    for k in i0..i1 {
        energy += 0.5 * (p(k) + p(k + 1)) * (waves.t[k + 1] - waves.t[k]);
    }
    Ok(energy / (waves.t[i1] - waves.t[i0]))
}

/// Stimulus state for static power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputState {
    Lo,
    Hi,
}

/// Tolerances tight enough for pW-level supply currents. gmin is zero: a
/// shunt on a floating stack node would carry current comparable to the
/// leakage being measured.
pub fn static_dc_options() -> DcOptions {
    DcOptions {
        abstol: 1e-15,
        vntol: 1e-9,
        gmin: 0.0,
        ..DcOptions::default()
    }
}

/// Power drawn from all sources with the stimulus pinned at its low (`v1`)
/// or high (`v2`) level, gmin dissipation excluded.
pub fn static_power(circuit: &Circuit, input_state: InputState) -> Result<f64> {
    let stim = circuit.stimulus().ok_or(MeasureError::NoStimulus)?;
    let level = match (stim.wave, input_state) {
        (SourceWave::Pulse(p), InputState::Lo) => p.v1,
        (SourceWave::Pulse(p), InputState::Hi) => p.v2,
        (SourceWave::Dc(v), _) => v,
    };
    let pinned = circuit
        .with_source_wave(&stim.name.clone(), SourceWave::Dc(level))
        .expect("stimulus exists");
    let opts = static_dc_options();
    let op = dc_operating_point(&pinned, &opts)?;
    Ok(dc_power(&pinned, &op.state, opts.gmin))
}

/// Device power at a DC state: sum of `V_s * I_s` delivered, minus gmin.
pub fn dc_power(circuit: &Circuit, state: &crate::engine::SysState, gmin: f64) -> f64 {
    let delivered: f64 = circuit
        .sources
        .iter()
        .map(|s| -s.wave.value(0.0) * state.i_branch[s.branch])
        .sum();
    delivered - gmin * state.v.iter().map(|v| v * v).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Swing {
    pub lo: f64,
    pub hi: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Settled output levels: the median of all samples lying at least `settle`
/// after a 50% crossing (or after the start of the record) and before the
/// next crossing, split by state.
pub fn output_swing(out_wave: &[f64], t: &[f64], settle: f64) -> Result<Swing> {
    let (min, max) = out_wave
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let mid = 0.5 * (min + max);
    let mut bounds: Vec<f64> = vec![t[0]];
    bounds.extend(crossings(out_wave, t, mid).iter().map(|c| c.time));
    bounds.push(f64::INFINITY);

    let (mut hi, mut lo) = (Vec::new(), Vec::new());
    for w in bounds.windows(2) {
        let (start, end) = (w[0] + settle, w[1]);
        let samples: Vec<f64> = t
            .iter()
            .zip(out_wave)
            .filter(|(&tk, _)| tk >= start && tk < end)
            .map(|(_, &v)| v)
            .collect();
        if samples.len() < MIN_WINDOW {
            continue;
        }
        if samples[samples.len() / 2] >= mid {
            hi.extend(samples);
        } else {
            lo.extend(samples);
        }
    }
    if hi.is_empty() {
        return Err(MeasureError::NoSettledWindow { state: "high" });
    }
    if lo.is_empty() {
        return Err(MeasureError::NoSettledWindow { state: "low" });
    }
    Ok(Swing {
        lo: median(&mut lo),
        hi: median(&mut hi),
    })
}

/// Measurement record for one circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub circuit_name: String,
    pub power_avg: f64,
    pub power_static_lo: f64,
    pub power_static_hi: f64,
    pub delay_rise: f64,
    pub delay_fall: f64,
    pub delay_max: f64,
    pub swing_lo: f64,
    pub swing_hi: f64,
}

impl Report {
    pub fn power_static_avg(&self) -> f64 {
        0.5 * (self.power_static_lo + self.power_static_hi)
    }
}

/// How to characterize a circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub tstep: f64,
    pub tstop: f64,
    pub scheme: Scheme,
    pub in_node: String,
    pub out_node: String,
    /// Settling time excluded after each output edge for swing.
    pub settle: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            tstep: 10e-12,
            tstop: 300e-9,
            scheme: Scheme::Tr,
            in_node: "in".into(),
            out_node: "out".into(),
            settle: 10e-9,
        }
    }
}

/// Simulate and measure. Average power and delays cover whole stimulus
/// periods after the first; static power is solved directly at DC.
pub fn characterize(circuit: &Circuit, cfg: &BenchConfig) -> Result<Report> {
    let opts = TranOptions {
        scheme: cfg.scheme,
        ..TranOptions::default()
    };
    let waves = transient(circuit, cfg.tstep, cfg.tstop, &opts)?;
    characterize_waves(circuit, &waves, cfg)
}

/// Measurement half of [`characterize`] on an existing run.
pub fn characterize_waves(
    circuit: &Circuit,
    waves: &Waveforms,
    cfg: &BenchConfig,
) -> Result<Report> {
    let stim = circuit.stimulus().ok_or(MeasureError::NoStimulus)?;
    let SourceWave::Pulse(pulse) = stim.wave else {
        return Err(MeasureError::NoStimulus);
    };
    let t_end = *waves.t.last().unwrap_or(&0.0);
    let periods = ((t_end + 1e-6 * cfg.tstep) / pulse.per).floor();
    if periods < 2.0 {
        return Err(MeasureError::WindowOutOfRange {
            t0: pulse.per,
            t1: t_end,
        });
    }
    let window = (pulse.per, periods * pulse.per);

    let node = |n: &str| {
        waves
            .node(n)
            .ok_or_else(|| MeasureError::UnknownNode(n.to_string()))
    };
    let vin = node(&cfg.in_node)?;
    let vout = node(&cfg.out_node)?;

    let (i0, _) = window_indices(&waves.t, window.0, window.1)?;
    let swing = output_swing(&vout[i0..], &waves.t[i0..], cfg.settle)?;
    let delays = propagation_delay(
        vin,
        vout,
        &waves.t,
        Levels {
            lo: pulse.v1.min(pulse.v2),
            hi: pulse.v1.max(pulse.v2),
        },
        Levels {
            lo: swing.lo,
            hi: swing.hi,
        },
        window.0,
    )?;
    let delay_rise = delays.rise.ok_or(MeasureError::MissingDirection {
        direction: "rising",
    })?;
    let delay_fall = delays.fall.ok_or(MeasureError::MissingDirection {
        direction: "falling",
    })?;

    let names: Vec<&str> = waves.source_names.iter().map(String::as_str).collect();
    let power_avg = average_power(waves, &names, window)?;

    Ok(Report {
        circuit_name: circuit.title.clone(),
        power_avg,
        power_static_lo: static_power(circuit, InputState::Lo)?,
        power_static_hi: static_power(circuit, InputState::Hi)?,
        delay_rise,
        delay_fall,
        delay_max: delay_rise.max(delay_fall),
        swing_lo: swing.lo,
        swing_hi: swing.hi,
    })
}
