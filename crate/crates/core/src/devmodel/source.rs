use serde::{Deserialize, Serialize};

/// Independent voltage-source waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SourceWave {
    Dc(f64),
    Pulse(Pulse),
}

/// SPICE `PULSE(v1 v2 td tr tf pw per)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub v1: f64,
    pub v2: f64,
    pub td: f64,
    pub tr: f64,
    pub tf: f64,
    pub pw: f64,
    pub per: f64,
}

impl Pulse {
    pub fn validate(&self) -> Result<(), String> {
        let p = self;
        if !(p.tr > 0.0 && p.tf > 0.0) {
            return Err("PULSE rise and fall times must be > 0".into());
        }
        if p.td < 0.0 || p.pw < 0.0 {
            return Err("PULSE delay and width must be >= 0".into());
        }
        if !(p.per > 0.0) || p.per < p.tr + p.pw + p.tf {
            return Err("PULSE period must cover tr + pw + tf".into());
        }
        Ok(())
    }
}

impl SourceWave {
    /// Value at time `t` (seconds). Negative `t` is treated as 0.
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            SourceWave::Dc(v) => v,
            SourceWave::Pulse(p) => {
                if t < p.td {
                    return p.v1;
                }
                let tt = (t - p.td) % p.per;
                if tt < p.tr {
                    p.v1 + (p.v2 - p.v1) * tt / p.tr
                } else if tt < p.tr + p.pw {
                    p.v2
                } else if tt < p.tr + p.pw + p.tf {
                    p.v2 + (p.v1 - p.v2) * (tt - p.tr - p.pw) / p.tf
                } else {
                    p.v1
                }
            }
        }
    }

    /// Value used for the DC operating point.
    pub fn initial(&self) -> f64 {
        match *self {
            SourceWave::Dc(v) => v,
            SourceWave::Pulse(p) => p.v1,
        }
    }

    pub fn is_pulse(&self) -> bool {
        matches!(self, SourceWave::Pulse(_))
    }

    /// Same waveform with every level multiplied by `k` (source stepping).
    pub fn scaled(&self, k: f64) -> SourceWave {
        match *self {
            SourceWave::Dc(v) => SourceWave::Dc(k * v),
            SourceWave::Pulse(p) => SourceWave::Pulse(Pulse {
                v1: k * p.v1,
                v2: k * p.v2,
                ..p
            }),
        }
    }
}

/// Free-function form of [`SourceWave::value`].
pub fn source_value(w: &SourceWave, t: f64) -> f64 {
    w.value(t)
}
