use serde::{Deserialize, Serialize};

/// Channel polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Nmos,
    Pmos,
}

impl Polarity {
    /// +1 for NMOS, -1 for PMOS.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Nmos => 1.0,
            Polarity::Pmos => -1.0,
        }
    }
}

/// Compact-model parameters for one device flavor.
///
/// PMOS thresholds are stored as positive magnitudes; polarity is applied by
/// reflecting terminal voltages in [`super::terminal_eval`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MosParams {
    pub polarity: Polarity,
    /// Zero-bias threshold magnitude (V).
    pub vth0: f64,
    /// Subthreshold slope factor.
    pub n_slope: f64,
    /// Mobility times oxide capacitance (A/V^2).
    pub kp: f64,
    /// Channel-length modulation (1/V).
    pub lambda: f64,
    /// DIBL coefficient (V/V).
    pub eta_dibl: f64,
    /// Body-effect coefficient (sqrt(V)).
    pub gamma_body: f64,
    /// Surface potential 2*phi_F (V).
    pub phi_s: f64,
    /// Gate oxide capacitance per area (F/m^2).
    pub cox_a: f64,
    /// Gate overlap capacitance per width (F/m).
    pub cov_w: f64,
    /// Junction capacitance per width (F/m).
    pub cj_w: f64,
}

/// Keys accepted on a `.model` card, in canonical order.
pub const MODEL_KEYS: [&str; 10] = [
    "vth0", "kp", "n", "lambda", "eta", "gamma", "phi", "coxa", "covw", "cjw",
];

impl MosParams {
    /// Typical 0.35 um-class NMOS.
    pub fn default_nmos() -> Self {
        MosParams {
            polarity: Polarity::Nmos,
            vth0: 0.55,
            n_slope: 1.4,
            kp: 170e-6,
            lambda: 0.06,
            eta_dibl: 0.03,
            gamma_body: 0.58,
            phi_s: 0.8,
            cox_a: 4.6e-3,
            cov_w: 1.2e-10,
            cj_w: 9e-10,
        }
    }

    /// Typical 0.35 um-class PMOS.
    pub fn default_pmos() -> Self {
        MosParams {
            polarity: Polarity::Pmos,
            vth0: 0.75,
            n_slope: 1.5,
            kp: 58e-6,
            lambda: 0.08,
            eta_dibl: 0.03,
            gamma_body: 0.45,
            phi_s: 0.8,
            cox_a: 4.6e-3,
            cov_w: 1.2e-10,
            cj_w: 9e-10,
        }
    }

    pub fn default_for(polarity: Polarity) -> Self {
        match polarity {
            Polarity::Nmos => Self::default_nmos(),
            Polarity::Pmos => Self::default_pmos(),
        }
    }

    /// Set a parameter by its (case-insensitive) `.model` key.
    /// Returns `false` for an unknown key.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key.to_ascii_lowercase().as_str() {
            "vth0" => &mut self.vth0,
            "kp" => &mut self.kp,
            "n" => &mut self.n_slope,
            "lambda" => &mut self.lambda,
            "eta" => &mut self.eta_dibl,
            "gamma" => &mut self.gamma_body,
            "phi" => &mut self.phi_s,
            "coxa" => &mut self.cox_a,
            "covw" => &mut self.cov_w,
            "cjw" => &mut self.cj_w,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key.to_ascii_lowercase().as_str() {
            "vth0" => self.vth0,
            "kp" => self.kp,
            "n" => self.n_slope,
            "lambda" => self.lambda,
            "eta" => self.eta_dibl,
            "gamma" => self.gamma_body,
            "phi" => self.phi_s,
            "coxa" => self.cox_a,
            "covw" => self.cov_w,
            "cjw" => self.cj_w,
            _ => return None,
        })
    }

    /// Check the parameter-range invariants, naming the first violation.
    pub fn validate(&self) -> Result<(), String> {
        let checks: [(bool, &str); 9] = [
            (self.vth0 > 0.0, "vth0 must be > 0"),
            (self.n_slope >= 1.0, "n must be >= 1"),
            (self.kp > 0.0, "kp must be > 0"),
            (self.lambda >= 0.0, "lambda must be >= 0"),
            (self.eta_dibl >= 0.0, "eta must be >= 0"),
            (self.gamma_body >= 0.0, "gamma must be >= 0"),
            (self.phi_s > 0.0, "phi must be > 0"),
            (
                self.cox_a >= 0.0 && self.cov_w >= 0.0 && self.cj_w >= 0.0,
                "capacitance coefficients must be >= 0",
            ),
            (
                [self.vth0, self.n_slope, self.kp, self.lambda, self.eta_dibl]
                    .iter()
                    .all(|v| v.is_finite()),
                "parameters must be finite",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err((*msg).to_string()),
            None => Ok(()),
        }
    }
}

/// Per-polarity defaults used when a `.model` card leaves keys unspecified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDefaults {
    pub nmos: MosParams,
    pub pmos: MosParams,
}

impl Default for ModelDefaults {
    fn default() -> Self {
        ModelDefaults {
            nmos: MosParams::default_nmos(),
            pmos: MosParams::default_pmos(),
        }
    }
}

impl ModelDefaults {
    pub fn for_polarity(&self, polarity: Polarity) -> MosParams {
        match polarity {
            Polarity::Nmos => self.nmos,
            Polarity::Pmos => self.pmos,
        }
    }
}
