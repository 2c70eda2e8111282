use super::lu::lu_solve;
use super::mna::{AssembleCtx, Mna};
use super::SysState;
use crate::netlist::Circuit;

/// Largest per-iteration change allowed on any node voltage.
pub(crate) const VSTEP_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOpts {
    pub abstol: f64,
    pub reltol: f64,
    pub vntol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum NewtonFailure {
    Singular(usize),
    MaxIter { worst: usize, residual: f64 },
    NonFinite,
}

/// Largest KCL residual (amps) and its node; constraint rows excluded.
pub(crate) fn kcl_residual(f: &[f64], n_nodes: usize) -> (usize, f64) {
    f[..n_nodes]
        .iter()
        .enumerate()
        .map(|(k, r)| (k, r.abs()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a })
}

/// Largest number of step halvings in the residual line search.
const MAX_BACKTRACK: u32 = 10;

/// Squared 2-norm of the residual (KCL rows in amps, constraint rows in volts).
fn merit(f: &[f64]) -> f64 {
    f.iter().map(|r| r * r).sum()
}

/// Damped Newton iteration from `x`, updated in place. Each update is
/// clamped per node and then shortened by halving until the residual norm
/// drops; if no fraction helps, the full step is taken. Converged when the
/// last update moved no node by more than `vntol`, no branch current by more
/// than `abstol + reltol |i|`, the KCL residual is below `abstol`, and every
/// source constraint is met to `vntol`.
pub(crate) fn newton(
    circuit: &Circuit,
    mna: &mut Mna,
    x: &mut SysState,
    ctx: &AssembleCtx<'_>,
    opts: &NewtonOpts,
) -> Result<NewtonStats, NewtonFailure> {
    let nn = circuit.n_nodes();
    let n = circuit.n_unknowns();
    let mut step_ok = false;
    let mut dx = vec![0.0; n];
    let mut worst = (0, f64::INFINITY);
    mna.assemble(circuit, x, ctx);
    for iter in 0..=opts.max_iter {
        worst = kcl_residual(&mna.f, nn);
        let constraint = mna.f[nn..].iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if !worst.1.is_finite() || !constraint.is_finite() {
            return Err(NewtonFailure::NonFinite);
        }
        if step_ok && worst.1 < opts.abstol && constraint < opts.vntol {
            return Ok(NewtonStats {
                iterations: iter,
                residual: worst.1,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        for (d, r) in dx.iter_mut().zip(&mna.f) {
            *d = -r;
        }
        lu_solve(&mut mna.jac, &mut dx).map_err(|s| NewtonFailure::Singular(s.0))?;
        for d in &mut dx[..nn] {
            *d = d.clamp(-VSTEP_LIMIT, VSTEP_LIMIT);
        }

        let m0 = merit(&mna.f);
        let base = x.clone();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_BACKTRACK {
            take_step(x, &base, &dx, alpha);
            mna.assemble(circuit, x, ctx);
            if merit(&mna.f) < m0 {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            alpha = 1.0;
            take_step(x, &base, &dx, alpha);
            mna.assemble(circuit, x, ctx);
        }

        step_ok = dx.iter().enumerate().all(|(k, d)| {
            let d = (alpha * d).abs();
            if k < nn {
                d < opts.vntol
            } else {
                d < opts.abstol + opts.reltol * x.i_branch[k - nn].abs()
            }
        });
    }
    Err(NewtonFailure::MaxIter {
        worst: worst.0,
        residual: worst.1,
    })
}

fn take_step(x: &mut SysState, base: &SysState, dx: &[f64], alpha: f64) {
    x.clone_from(base);
    for (k, d) in dx.iter().enumerate() {
        x.add_to(k, alpha * d);
    }
}
