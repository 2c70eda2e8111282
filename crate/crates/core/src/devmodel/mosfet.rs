//! Single-expression MOSFET model, continuous from weak to strong inversion.
//!
//! ```text
//! ispec = 2 n kp (W/L) VT^2
//! vte   = vth0 + gamma (sqrt(phi + vsb) - sqrt(phi)) - eta vds
//! q(u)  = ln(1 + exp(u / (2 n VT)))
//! id    = ispec [q(vgs - vte)^2 - q(vgs - vte - n vds)^2] (1 + lambda vds)
//! ```
//!
//! Below threshold `id` decays as `exp((vgs - vte) / (n VT))`; above it
//! approaches `kp/(2n) (W/L) (vgs - vte)^2`. DIBL and body effect enter only
//! through `vte`, which is what makes series stacks of off devices leak less
//! than a single device of the same total width.

use super::params::{MosParams, Polarity};

/// Thermal voltage kT/q at 300 K.
pub const VT: f64 = 0.025852;

/// Scaled exponent argument beyond which `q(u)` is replaced by `u`.
const SOFTPLUS_CLAMP: f64 = 40.0;

/// Bias in the source-referenced NMOS frame (after polarity reflection).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosBias {
    pub vgs: f64,
    pub vds: f64,
    pub vsb: f64,
}

/// Drain current and its partials in the normalized frame.
///
/// `gmb` is the partial with respect to `-vsb` (i.e. `vbs`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosEval {
    pub id: f64,
    pub gm: f64,
    pub gds: f64,
    pub gmb: f64,
}

/// Bias-independent lumped capacitances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosCaps {
    pub cgs: f64,
    pub cgd: f64,
    pub cdb: f64,
    pub csb: f64,
}

/// Current into the drain terminal and its partials with respect to each
/// terminal voltage. The four partials sum to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalEval {
    pub id: f64,
    pub d_vd: f64,
    pub d_vg: f64,
    pub d_vs: f64,
    pub d_vb: f64,
}

fn clamped_vsb(p: &MosParams, vsb: f64) -> (f64, bool) {
    let floor = -0.5 * p.phi_s;
    if vsb < floor {
        (floor, true)
    } else {
        (vsb, false)
    }
}

/// Threshold including body effect and DIBL.
pub fn effective_vth(p: &MosParams, vds: f64, vsb: f64) -> f64 {
    let (vsb, _) = clamped_vsb(p, vsb);
    p.vth0 + p.gamma_body * ((p.phi_s + vsb).sqrt() - p.phi_s.sqrt()) - p.eta_dibl * vds
}

/// `ln(1 + e^u)` and its derivative (the logistic function).
fn softplus(u: f64) -> (f64, f64) {
    if u > SOFTPLUS_CLAMP {
        (u, 1.0)
    } else {
        let e = u.exp();
        (e.ln_1p(), e / (1.0 + e))
    }
}

/// Evaluate the drain current in the normalized frame.
pub fn mosfet_eval(p: &MosParams, bias: MosBias, w: f64, l: f64) -> MosEval {
    let MosBias { vgs, vds, vsb } = bias;
    let n = p.n_slope;
    let scale = 1.0 / (2.0 * n * VT);
    let ispec = 2.0 * n * p.kp * (w / l) * VT * VT;

    let (vsb_c, clamped) = clamped_vsb(p, vsb);
    let vte =
        p.vth0 + p.gamma_body * ((p.phi_s + vsb_c).sqrt() - p.phi_s.sqrt()) - p.eta_dibl * vds;
    let dvte_dvsb = if clamped {
        0.0
    } else {
        0.5 * p.gamma_body / (p.phi_s + vsb_c).sqrt()
    };
    let dvte_dvds = -p.eta_dibl;

    let (qf, sf) = softplus((vgs - vte) * scale);
    let (qr, sr) = softplus((vgs - vte - n * vds) * scale);
    let f = qf * qf - qr * qr;

    // Partials of the bracket F through the scaled arguments.
    let kf = 2.0 * qf * sf * scale;
    let kr = 2.0 * qr * sr * scale;
    let df_dvgs = kf - kr;
    let df_dvds = kf * (-dvte_dvds) - kr * (-dvte_dvds - n);
    let df_dvsb = -(kf - kr) * dvte_dvsb;

    let clm = 1.0 + p.lambda * vds;
    MosEval {
        id: ispec * f * clm,
        gm: ispec * df_dvgs * clm,
        gds: ispec * (df_dvds * clm + f * p.lambda),
        gmb: -ispec * df_dvsb * clm,
    }
}

/// Evaluate at raw terminal voltages, handling polarity reflection and
/// source/drain swap. `id` is the current flowing into the drain terminal.
pub fn terminal_eval(
    p: &MosParams,
    vd: f64,
    vg: f64,
    vs: f64,
    vb: f64,
    w: f64,
    l: f64,
) -> TerminalEval {
    let sgn = p.polarity.sign();
    let (vd, vg, vs, vb) = (sgn * vd, sgn * vg, sgn * vs, sgn * vb);

    let t = if vd >= vs {
        let e = mosfet_eval(
            p,
            MosBias {
                vgs: vg - vs,
                vds: vd - vs,
                vsb: vs - vb,
            },
            w,
            l,
        );
        TerminalEval {
            id: e.id,
            d_vd: e.gds,
            d_vg: e.gm,
            d_vs: -(e.gm + e.gds + e.gmb),
            d_vb: e.gmb,
        }
    } else {
        // Physical source is the drain terminal; current flows out of the drain.
        let e = mosfet_eval(
            p,
            MosBias {
                vgs: vg - vd,
                vds: vs - vd,
                vsb: vd - vb,
            },
            w,
            l,
        );
        TerminalEval {
            id: -e.id,
            d_vd: e.gm + e.gds + e.gmb,
            d_vg: -e.gm,
            d_vs: -e.gds,
            d_vb: -e.gmb,
        }
    };
    // d/dv [s f(s v)] = f'(s v) since s^2 = 1.
    TerminalEval {
        id: sgn * t.id,
        ..t
    }
}

/// Lumped capacitances for a device of the given geometry.
pub fn mosfet_caps(p: &MosParams, w: f64, l: f64) -> MosCaps {
    let cg = 0.5 * p.cox_a * w * l + p.cov_w * w;
    let cj = p.cj_w * w;
    MosCaps {
        cgs: cg,
        cgd: cg,
        cdb: cj,
        csb: cj,
    }
}

impl Polarity {
    pub fn model_kind(self) -> &'static str {
        match self {
            Polarity::Nmos => "NMOS",
            Polarity::Pmos => "PMOS",
        }
    }
}
