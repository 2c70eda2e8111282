use super::mna::{AssembleCtx, Companion, Mna, Scheme};
use super::newton::{newton, NewtonFailure, NewtonOpts};
use super::{SolveError, SysState};
use crate::netlist::Circuit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcOptions {
    pub abstol: f64,
    pub reltol: f64,
    pub vntol: f64,
    pub max_iter: usize,
    /// Conductance from every node to ground kept in the final solve.
    pub gmin: f64,
}

impl Default for DcOptions {
    fn default() -> Self {
        DcOptions {
            abstol: 1e-9,
            reltol: 1e-3,
            vntol: 1e-6,
            max_iter: 200,
            gmin: 1e-12,
        }
    }
}

impl DcOptions {
    pub(crate) fn newton(&self) -> NewtonOpts {
        NewtonOpts {
            abstol: self.abstol,
            reltol: self.reltol,
            vntol: self.vntol,
            max_iter: self.max_iter,
        }
    }
}

/// Which continuation method produced the operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homotopy {
    None,
    Gmin,
    Source,
    PseudoTransient,
}

/// Below this, gmin stepping jumps straight to the requested gmin.
const GMIN_FLOOR: f64 = 1e-15;

/// Node shunt capacitance for pseudo-transient continuation.
const PTRAN_CAP: f64 = 1e-15;
const PTRAN_MAX_STEPS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct OpPoint {
    pub state: SysState,
    pub residual_max: f64,
    pub iterations: usize,
    pub homotopy_used: Homotopy,
    /// gmin present in the converged solve.
    pub gmin: f64,
}

impl OpPoint {
    pub fn voltage(&self, circuit: &Circuit, node: &str) -> Option<f64> {
        circuit.node(node).map(|k| self.state.v[k])
    }
}

pub(crate) fn failure_to_error(circuit: &Circuit, f: NewtonFailure, time: f64) -> SolveError {
    match f {
        NewtonFailure::Singular(k) => SolveError::Singular {
            unknown: circuit.unknown_name(k),
        },
        NewtonFailure::MaxIter { worst, residual } => SolveError::NoConvergence {
            node: circuit.unknown_name(worst),
            residual,
        },
        NewtonFailure::NonFinite => SolveError::NonFinite { time },
    }
}

/// DC operating point with every source at its initial value
/// (PULSE sources at `v1`), capacitors open.
///
/// Plain Newton from zero is tried first; on failure gmin is stepped from
/// 1e-3 S down to `opts.gmin` a decade at a time, and if that fails too all
/// sources are ramped from 0 to full value in 20 increments. The last resort
/// is pseudo-transient continuation: backward-Euler steps of growing length
/// from zero, with every node shunted to ground by 1 fF, until plain Newton
/// converges from the reached state.
pub fn dc_operating_point(circuit: &Circuit, opts: &DcOptions) -> Result<OpPoint, SolveError> {
    let mut mna = Mna::new(circuit);
    let nopts = opts.newton();
    let zero = SysState::zeros(circuit.n_nodes(), circuit.n_branches());
    let done =
        |state: SysState, stats: super::newton::NewtonStats, total: usize, h: Homotopy| OpPoint {
            state,
            residual_max: stats.residual,
            iterations: total,
            homotopy_used: h,
            gmin: opts.gmin,
        };

    let mut x = zero.clone();
    let first_failure = match newton(
        circuit,
        &mut mna,
        &mut x,
        &AssembleCtx::dc(opts.gmin),
        &nopts,
    ) {
        Ok(stats) => return Ok(done(x, stats, stats.iterations, Homotopy::None)),
        Err(f) => f,
    };
    if let NewtonFailure::Singular(_) = first_failure {
        return Err(failure_to_error(circuit, first_failure, 0.0));
    }

    // gmin stepping
    let mut x = zero.clone();
    let mut total = 0;
    let mut gmin: f64 = 1e-3;
    let mut last;
    loop {
        let g = if gmin < GMIN_FLOOR {
            opts.gmin
        } else {
            gmin.max(opts.gmin)
        };
        match newton(circuit, &mut mna, &mut x, &AssembleCtx::dc(g), &nopts) {
            Ok(stats) => {
                total += stats.iterations;
                if g <= opts.gmin {
                    return Ok(done(x, stats, total, Homotopy::Gmin));
                }
            }
            Err(f) => {
                last = f;
                break;
            }
        }
        gmin /= 10.0;
    }

    // source stepping
    let mut x = zero;
    let mut total = 0;
    for k in 1..=20 {
        let ctx = AssembleCtx {
            source_scale: k as f64 / 20.0,
            ..AssembleCtx::dc(opts.gmin)
        };
        match newton(circuit, &mut mna, &mut x, &ctx, &nopts) {
            Ok(stats) => {
                total += stats.iterations;
                if k == 20 {
                    return Ok(done(x, stats, total, Homotopy::Source));
                }
            }
            Err(f) => {
                last = f;
                break;
            }
        }
    }
    match pseudo_transient(circuit, opts) {
        Ok((state, stats, total)) => Ok(done(state, stats, total, Homotopy::PseudoTransient)),
        Err(NewtonFailure::Singular(k)) => {
            Err(failure_to_error(circuit, NewtonFailure::Singular(k), 0.0))
        }
        Err(_) => Err(failure_to_error(circuit, last, 0.0)),
    }
}

fn pseudo_transient(
    circuit: &Circuit,
    opts: &DcOptions,
) -> Result<(SysState, super::newton::NewtonStats, usize), NewtonFailure> {
    let nopts = opts.newton();
    let mut ptran = Mna::with_node_caps(circuit, PTRAN_CAP);
    let mut plain = Mna::new(circuit);
    let no_history = vec![0.0; ptran.caps().len()];
    let mut x = SysState::zeros(circuit.n_nodes(), circuit.n_branches());
    let mut h = 1e-12;
    let mut total = 0;
    let mut last = NewtonFailure::NonFinite;
    for _ in 0..PTRAN_MAX_STEPS {
        let prev = x.clone();
        let ctx = AssembleCtx {
            companion: Some(Companion {
                h,
                scheme: Scheme::Be,
                prev: &prev,
                prev_cap_i: &no_history,
            }),
            ..AssembleCtx::dc(opts.gmin)
        };
        match newton(circuit, &mut ptran, &mut x, &ctx, &nopts) {
            Ok(stats) => {
                total += stats.iterations;
                let mut y = x.clone();
                match newton(
                    circuit,
                    &mut plain,
                    &mut y,
                    &AssembleCtx::dc(opts.gmin),
                    &nopts,
                ) {
                    Ok(stats) => return Ok((y, stats, total + stats.iterations)),
                    Err(f @ NewtonFailure::Singular(_)) => return Err(f),
                    Err(f) => last = f,
                }
                h *= 2.0;
            }
            Err(f @ NewtonFailure::Singular(_)) => return Err(f),
            Err(f) => {
                last = f;
                x = prev;
                h *= 0.25;
                if h < 1e-18 {
                    break;
                }
            }
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{elaborate, parse_netlist};

    fn circuit(text: &str) -> Circuit {
        elaborate(&parse_netlist(text).unwrap()).unwrap()
    }

    #[test]
    fn divider() {
        let c = circuit("t\nV1 top 0 DC 5\nR1 top mid 1k\nR2 mid 0 1k\n.end");
        let op = dc_operating_point(&c, &DcOptions::default()).unwrap();
        assert!((op.voltage(&c, "mid").unwrap() - 2.5).abs() < 1e-6);
        assert!((op.state.i_branch[0] + 2.5e-3).abs() < 1e-9);
        assert_eq!(op.homotopy_used, Homotopy::None);
        assert!(op.residual_max < 1e-9);
    }

    #[test]
    fn empty_circuit() {
        let c = circuit("t\n.end");
        let op = dc_operating_point(&c, &DcOptions::default()).unwrap();
        assert!(op.state.is_empty());
    }

    #[test]
    fn parallel_sources_are_singular() {
        let c = circuit("t\nV1 a 0 DC 1\nV2 a 0 DC 1\n.end");
        match dc_operating_point(&c, &DcOptions::default()) {
            Err(SolveError::Singular { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn homotopy_fallback_reaches_same_point() {
        // One iteration short of what plain Newton needs forces the fallbacks.
        let text = "t\n.model n nmos\n.model p pmos\nVDD vdd 0 DC 3.3\nVIN in 0 DC 1.6\n\
            MP x in vdd vdd p W=2.5u L=0.35u\nMN x in 0 0 n W=1u L=0.35u\n\
            MP2 out x vdd vdd p W=2.5u L=0.35u\nMN2 out x 0 0 n W=1u L=0.35u\n.end";
        let c = circuit(text);
        let full = dc_operating_point(&c, &DcOptions::default()).unwrap();
        let tight = DcOptions {
            max_iter: full.iterations - 1,
            ..DcOptions::default()
        };
        let op = dc_operating_point(&c, &tight).unwrap();
        assert_ne!(op.homotopy_used, Homotopy::None);
        for (a, b) in op.state.v.iter().zip(&full.state.v) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
