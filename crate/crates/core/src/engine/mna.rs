//! Modified nodal analysis: KCL residual and its exact Jacobian.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source (current entering the source's `+` terminal).

use super::lu::DenseMatrix;
use super::SysState;
use crate::devmodel::{mosfet_caps, terminal_eval};
use crate::netlist::{Circuit, Node};

/// Integration scheme for capacitor companions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Backward Euler.
    Be,
    /// Trapezoidal.
    #[default]
    Tr,
}

/// A linear capacitor between two nodes: explicit C cards plus the lumped
/// MOSFET capacitances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapBranch {
    pub pos: Node,
    pub neg: Node,
    pub value: f64,
}

/// Every capacitor the integrator has to track, in a fixed order.
pub fn cap_branches(circuit: &Circuit) -> Vec<CapBranch> {
    let mut caps: Vec<CapBranch> = circuit
        .capacitors
        .iter()
        .map(|c| CapBranch {
            pos: c.pos,
            neg: c.neg,
            value: c.value,
        })
        .collect();
    for m in &circuit.mosfets {
        let c = mosfet_caps(&m.params, m.w, m.l);
        for (pos, neg, value) in [
            (m.gate, m.source, c.cgs),
            (m.gate, m.drain, c.cgd),
            (m.drain, m.body, c.cdb),
            (m.source, m.body, c.csb),
        ] {
            if pos != neg && value > 0.0 {
                caps.push(CapBranch { pos, neg, value });
            }
        }
    }
    caps
}

/// Previous accepted point for the capacitor companions.
#[derive(Debug, Clone, Copy)]
pub struct Companion<'a> {
    pub h: f64,
    pub scheme: Scheme,
    pub prev: &'a SysState,
    /// Capacitor currents at `prev`, aligned with [`cap_branches`].
    pub prev_cap_i: &'a [f64],
}

/// Everything besides the state that the residual depends on.
#[derive(Debug, Clone, Copy)]
pub struct AssembleCtx<'a> {
    pub t: f64,
    pub gmin: f64,
    /// Multiplier applied to every source value (source stepping).
    pub source_scale: f64,
    pub companion: Option<Companion<'a>>,
}

impl<'a> AssembleCtx<'a> {
    pub fn dc(gmin: f64) -> Self {
        AssembleCtx {
            t: 0.0,
            gmin,
            source_scale: 1.0,
            companion: None,
        }
    }
}

#[inline]
fn volt(v: &[f64], n: Node) -> f64 {
    n.map_or(0.0, |k| v[k])
}

/// Companion conductance and history current: `i = geq * v_now - ihist`.
pub fn companion_terms(cap: &CapBranch, comp: &Companion<'_>, prev_i: f64) -> (f64, f64) {
    let v_prev = volt(&comp.prev.v, cap.pos) - volt(&comp.prev.v, cap.neg);
    match comp.scheme {
        Scheme::Be => {
            let geq = cap.value / comp.h;
            (geq, geq * v_prev)
        }
        Scheme::Tr => {
            let geq = 2.0 * cap.value / comp.h;
            (geq, geq * v_prev + prev_i)
        }
    }
}

/// Reusable MNA system buffers.
#[derive(Debug, Clone)]
pub struct Mna {
    pub jac: DenseMatrix,
    pub f: Vec<f64>,
    caps: Vec<CapBranch>,
}

impl Mna {
    pub fn new(circuit: &Circuit) -> Self {
        let n = circuit.n_unknowns();
        Mna {
            jac: DenseMatrix::zeros(n),
            f: vec![0.0; n],
            caps: cap_branches(circuit),
        }
    }

    /// Like [`Mna::new`], plus a capacitor `c` from every node to ground.
    pub fn with_node_caps(circuit: &Circuit, c: f64) -> Self {
        let mut mna = Mna::new(circuit);
        mna.caps.extend((0..circuit.n_nodes()).map(|k| CapBranch {
            pos: Some(k),
            neg: None,
            value: c,
        }));
        mna
    }

    pub fn caps(&self) -> &[CapBranch] {
        &self.caps
    }

    /// Fill `jac` and `f` for the given state.
    pub fn assemble(&mut self, circuit: &Circuit, state: &SysState, ctx: &AssembleCtx<'_>) {
        let nn = circuit.n_nodes();
        debug_assert_eq!(state.v.len(), nn);
        debug_assert_eq!(state.i_branch.len(), circuit.n_branches());
        self.jac.clear();
        self.f.iter_mut().for_each(|x| *x = 0.0);
        let v = &state.v;
        let jac = &mut self.jac;
        let f = &mut self.f;

        // Current `i` leaving node `a` and entering node `b`, with partials
        // `di/dv_c` for each listed controlling node.
        let mut stamp = |a: Node, b: Node, i: f64, partials: &[(Node, f64)]| {
            if let Some(a) = a {
                f[a] += i;
                for &(c, g) in partials {
                    if let Some(c) = c {
                        jac.add(a, c, g);
                    }
                }
            }
            if let Some(b) = b {
                f[b] -= i;
                for &(c, g) in partials {
                    if let Some(c) = c {
                        jac.add(b, c, -g);
                    }
                }
            }
        };

        for r in &circuit.resistors {
            let g = 1.0 / r.value;
            let i = g * (volt(v, r.pos) - volt(v, r.neg));
            stamp(r.pos, r.neg, i, &[(r.pos, g), (r.neg, -g)]);
        }

        for m in &circuit.mosfets {
            let e = terminal_eval(
                &m.params,
                volt(v, m.drain),
                volt(v, m.gate),
                volt(v, m.source),
                volt(v, m.body),
                m.w,
                m.l,
            );
            stamp(
                m.drain,
                m.source,
                e.id,
                &[
                    (m.drain, e.d_vd),
                    (m.gate, e.d_vg),
                    (m.source, e.d_vs),
                    (m.body, e.d_vb),
                ],
            );
        }

        if let Some(comp) = &ctx.companion {
            for (k, cap) in self.caps.iter().enumerate() {
                let (geq, hist) = companion_terms(cap, comp, comp.prev_cap_i[k]);
                let i = geq * (volt(v, cap.pos) - volt(v, cap.neg)) - hist;
                stamp(cap.pos, cap.neg, i, &[(cap.pos, geq), (cap.neg, -geq)]);
            }
        }

        for (k, vk) in v.iter().enumerate() {
            f[k] += ctx.gmin * vk;
            jac.add(k, k, ctx.gmin);
        }

        for s in &circuit.sources {
            let row = nn + s.branch;
            let ib = state.i_branch[s.branch];
            if let Some(p) = s.pos {
                f[p] += ib;
                jac.add(p, row, 1.0);
                jac.add(row, p, 1.0);
            }
            if let Some(n) = s.neg {
                f[n] -= ib;
                jac.add(n, row, -1.0);
                jac.add(row, n, -1.0);
            }
            f[row] = volt(v, s.pos) - volt(v, s.neg) - ctx.source_scale * s.wave.value(ctx.t);
        }
    }

    /// Capacitor currents at an accepted point (used as the next step's history).
    pub fn cap_currents(&self, state: &SysState, comp: &Companion<'_>) -> Vec<f64> {
        self.caps
            .iter()
            .enumerate()
            .map(|(k, cap)| {
                let (geq, hist) = companion_terms(cap, comp, comp.prev_cap_i[k]);
                geq * (volt(&state.v, cap.pos) - volt(&state.v, cap.neg)) - hist
            })
            .collect()
    }
}

/// One-shot assembly returning `(J, f)`.
pub fn assemble(
    circuit: &Circuit,
    state: &SysState,
    ctx: &AssembleCtx<'_>,
) -> (DenseMatrix, Vec<f64>) {
    let mut mna = Mna::new(circuit);
    mna.assemble(circuit, state, ctx);
    (mna.jac, mna.f)
}
