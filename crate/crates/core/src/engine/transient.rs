use super::dc::{dc_operating_point, DcOptions, OpPoint};
use super::mna::{AssembleCtx, Companion, Mna, Scheme};
use super::newton::{newton, NewtonFailure, NewtonOpts};
use super::{SolveError, SysState};
use crate::netlist::Circuit;

const MAX_HALVINGS: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TranOptions {
    pub scheme: Scheme,
    /// Initial condition; `None` solves the DC operating point.
    pub ic: Option<OpPoint>,
    /// Tolerances for both the initial DC solve and every timestep.
    pub dc: DcOptions,
    /// Newton budget per timestep before the step is halved.
    pub step_max_iter: usize,
}

impl Default for TranOptions {
    fn default() -> Self {
        TranOptions {
            scheme: Scheme::Tr,
            ic: None,
            dc: DcOptions::default(),
            step_max_iter: 50,
        }
    }
}

/// Sampled transient result on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveforms {
    pub tstep: f64,
    pub t: Vec<f64>,
    pub node_names: Vec<String>,
    /// One series per node, aligned with `t`.
    pub node_v: Vec<Vec<f64>>,
    pub source_names: Vec<String>,
    /// Branch current per source, positive into the `+` terminal.
    pub supply_i: Vec<Vec<f64>>,
    /// Source voltage `v(+) - v(-)` per source.
    pub source_v: Vec<Vec<f64>>,
    /// gmin present in every solve (its current is numerical, not physical).
    pub gmin: f64,
    /// Largest KCL residual over all accepted points.
    pub max_residual: f64,
}

impl Waveforms {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn node(&self, name: &str) -> Option<&[f64]> {
        let k = self
            .node_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))?;
        Some(&self.node_v[k])
    }

    pub fn source_index(&self, name: &str) -> Option<usize> {
        self.source_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
    }

    pub fn supply_current(&self, name: &str) -> Option<&[f64]> {
        self.source_index(name).map(|k| self.supply_i[k].as_slice())
    }

    /// Dissipation in the gmin shunts at sample `k`.
    pub fn gmin_power(&self, k: usize) -> f64 {
        self.gmin * self.node_v.iter().map(|s| s[k] * s[k]).sum::<f64>()
    }
}

struct Stepper<'c> {
    circuit: &'c Circuit,
    mna: Mna,
    nopts: NewtonOpts,
    max_residual: f64,
    gmin: f64,
}

/// Accepted point: state plus capacitor currents for the next companion.
#[derive(Clone)]
struct Point {
    state: SysState,
    cap_i: Vec<f64>,
}

impl Stepper<'_> {
    fn try_step(
        &mut self,
        from: &Point,
        t_new: f64,
        h: f64,
        scheme: Scheme,
    ) -> Result<Point, NewtonFailure> {
        let comp = Companion {
            h,
            scheme,
            prev: &from.state,
            prev_cap_i: &from.cap_i,
        };
        let ctx = AssembleCtx {
            t: t_new,
            gmin: self.gmin,
            source_scale: 1.0,
            companion: Some(comp),
        };
        let mut x = from.state.clone();
        let stats = newton(self.circuit, &mut self.mna, &mut x, &ctx, &self.nopts)?;
        if !x.is_finite() {
            return Err(NewtonFailure::NonFinite);
        }
        self.max_residual = self.max_residual.max(stats.residual);
        let cap_i = self.mna.cap_currents(&x, &comp);
        Ok(Point { state: x, cap_i })
    }

    /// Advance from `t0` by `h`, splitting into halves on failure.
    fn advance(
        &mut self,
        from: &Point,
        t0: f64,
        h: f64,
        scheme: Scheme,
        depth: u32,
    ) -> Result<Point, SolveError> {
        match self.try_step(from, t0 + h, h, scheme) {
            Ok(p) => Ok(p),
            Err(NewtonFailure::Singular(k)) => Err(SolveError::Singular {
                unknown: self.circuit.unknown_name(k),
            }),
            Err(_) if depth < MAX_HALVINGS => {
                let half = 0.5 * h;
                let mid = self.advance(from, t0, half, scheme, depth + 1)?;
                self.advance(&mid, t0 + half, half, scheme, depth + 1)
            }
            Err(NewtonFailure::NonFinite) => Err(SolveError::NonFinite { time: t0 + h }),
            Err(_) => Err(SolveError::StepUnderflow { time: t0 }),
        }
    }
}

/// Fixed-step implicit transient analysis on the grid `k * tstep`,
/// `k = 0..=round(tstop / tstep)`.
///
/// Trapezoidal runs take their first step with backward Euler. A step that
/// fails to converge is split in two, recursively, up to 8 times; the output
/// grid is unaffected.
pub fn transient(
    circuit: &Circuit,
    tstep: f64,
    tstop: f64,
    opts: &TranOptions,
) -> Result<Waveforms, SolveError> {
    if !(tstep > 0.0) || !(tstop >= 10.0 * tstep) {
        return Err(SolveError::InvalidRequest(format!(
            "need tstep > 0 and tstop >= 10 * tstep (tstep = {tstep:e}, tstop = {tstop:e})"
        )));
    }
    let op = match &opts.ic {
        Some(op) => op.clone(),
        None => dc_operating_point(circuit, &opts.dc)?,
    };
    let n_steps = (tstop / tstep).round() as usize;
    let nn = circuit.n_nodes();
    let nb = circuit.n_branches();

    let mut stepper = Stepper {
        circuit,
        mna: Mna::new(circuit),
        nopts: NewtonOpts {
            max_iter: opts.step_max_iter,
            ..opts.dc.newton()
        },
        max_residual: op.residual_max,
        gmin: opts.dc.gmin,
    };
    let n_caps = stepper.mna.caps().len();

    let mut waves = Waveforms {
        tstep,
        t: Vec::with_capacity(n_steps + 1),
        node_names: circuit.node_names.clone(),
        node_v: vec![Vec::with_capacity(n_steps + 1); nn],
        source_names: circuit.sources.iter().map(|s| s.name.clone()).collect(),
        supply_i: vec![Vec::with_capacity(n_steps + 1); nb],
        source_v: vec![Vec::with_capacity(n_steps + 1); nb],
        gmin: opts.dc.gmin,
        max_residual: 0.0,
    };
    let record = |w: &mut Waveforms, t: f64, s: &SysState| {
        w.t.push(t);
        for (series, v) in w.node_v.iter_mut().zip(&s.v) {
            series.push(*v);
        }
        for (series, i) in w.supply_i.iter_mut().zip(&s.i_branch) {
            series.push(*i);
        }
        for (series, src) in w.source_v.iter_mut().zip(&circuit.sources) {
            series.push(src.wave.value(t));
        }
    };

    let mut point = Point {
        state: op.state,
        cap_i: vec![0.0; n_caps],
    };
    record(&mut waves, 0.0, &point.state);
    for k in 1..=n_steps {
        let t0 = (k - 1) as f64 * tstep;
        let scheme = if k == 1 { Scheme::Be } else { opts.scheme };
        point = stepper.advance(&point, t0, tstep, scheme, 0)?;
        record(&mut waves, k as f64 * tstep, &point.state);
    }
    waves.max_residual = stepper.max_residual;
    Ok(waves)
}
