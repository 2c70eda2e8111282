//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use levelsim::devmodel::{mosfet_eval, MosBias, MosParams};
use levelsim::engine::DcOptions;
use levelsim::netlist::{elaborate, parse_netlist, Circuit};

pub const L: f64 = 0.35e-6;

pub fn circuit(text: &str) -> Circuit {
    elaborate(&parse_netlist(text).expect("parse")).expect("elaborate")
}

/// DC options with gmin removed, so solutions can be compared to oracles
/// that model the physical circuit only.
pub fn exact_dc() -> DcOptions {
    DcOptions {
        abstol: 1e-16,
        vntol: 1e-10,
        gmin: 0.0,
        ..DcOptions::default()
    }
}

/// Root of a function that is negative at `lo` and positive at `hi`
/// (or vice versa), to machine resolution.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "root not bracketed in [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Drain current of an NMOS with terminals at absolute potentials, body at 0,
/// `vd >= vs`.
pub fn nmos_id(p: &MosParams, w: f64, vd: f64, vg: f64, vs: f64) -> f64 {
    mosfet_eval(
        p,
        MosBias {
            vgs: vg - vs,
            vds: vd - vs,
            vsb: vs,
        },
        w,
        L,
    )
    .id
}

/// Off-state stack of `k` NMOS of width `w_total / k`, gates and body
/// grounded, across `vdd`: returns the internal node voltages (bottom up)
/// and the stack current. Solved by nested bisection on current continuity.
pub fn stack_oracle(p: &MosParams, k: usize, w_total: f64, vdd: f64) -> (Vec<f64>, f64) {
    let w = w_total / k as f64;
    // Given the bottom internal node, walk up the stack setting each node so
    // its device carries the bottom current. `None` when some node would have
    // to exceed the supply, i.e. the bottom node was guessed too high.
    let walk = |v_bottom: f64| -> Option<(Vec<f64>, f64)> {
        let i = nmos_id(p, w, v_bottom, 0.0, 0.0);
        let mut nodes = vec![v_bottom];
        for _ in 2..k {
            let vs = *nodes.last().unwrap();
            if nmos_id(p, w, vdd, 0.0, vs) < i {
                return None;
            }
            nodes.push(bisect(|vd| nmos_id(p, w, vd, 0.0, vs) - i, vs, vdd));
        }
        Some((nodes, i))
    };
    if k == 1 {
        return (Vec::new(), nmos_id(p, w, vdd, 0.0, 0.0));
    }
    let v1 = bisect(
        |v| match walk(v) {
            Some((nodes, i)) => nmos_id(p, w, vdd, 0.0, *nodes.last().unwrap()) - i,
            None => -1.0,
        },
        0.0,
        vdd,
    );
    walk(v1).expect("converged bottom node is feasible")
}
