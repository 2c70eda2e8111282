use levelsim::devmodel::{mosfet_eval, terminal_eval, MosBias, MosParams, VT};
use proptest::prelude::*;

const W: f64 = 1e-6;
const L: f64 = 0.35e-6;

fn id_at(p: &MosParams, vgs: f64, vds: f64, vsb: f64) -> f64 {
    mosfet_eval(p, MosBias { vgs, vds, vsb }, W, L).id
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-15)
}

fn params() -> impl Strategy<Value = MosParams> {
    prop_oneof![
        Just(MosParams::default_nmos()),
        Just(MosParams::default_pmos())
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn partials_match_central_differences(
        p in params(),
        vgs in -0.5f64..3.5,
        vds in 0.0f64..3.5,
        vsb in 0.0f64..3.3,
    ) {
        let e = mosfet_eval(&p, MosBias { vgs, vds, vsb }, W, L);
        let h = 1e-6;
        let gm = (id_at(&p, vgs + h, vds, vsb) - id_at(&p, vgs - h, vds, vsb)) / (2.0 * h);
        let gds = (id_at(&p, vgs, vds + h, vsb) - id_at(&p, vgs, vds - h, vsb)) / (2.0 * h);
        let gmb = -(id_at(&p, vgs, vds, vsb + h) - id_at(&p, vgs, vds, vsb - h)) / (2.0 * h);
        prop_assert!(rel_err(e.gm, gm) < 1e-4, "gm {} vs {}", e.gm, gm);
        prop_assert!(rel_err(e.gds, gds) < 1e-4, "gds {} vs {}", e.gds, gds);
        prop_assert!(rel_err(e.gmb, gmb) < 1e-4, "gmb {} vs {}", e.gmb, gmb);
    }

    #[test]
    fn current_monotone_in_vgs(vgs in -0.5f64..3.3, dv in 1e-3f64..0.5, vds in 1e-3f64..3.3) {
        let p = MosParams::default_nmos();
        prop_assert!(id_at(&p, vgs + dv, vds, 0.0) > id_at(&p, vgs, vds, 0.0));
    }

    #[test]
    fn current_monotone_in_vds(vgs in -0.5f64..3.3, vds in 0.0f64..3.3, dv in 1e-3f64..0.5) {
        let p = MosParams::default_nmos();
        prop_assert!(id_at(&p, vgs, vds + dv, 0.0) > id_at(&p, vgs, vds, 0.0));
    }

    #[test]
    fn body_bias_reduces_current(vgs in 0.0f64..3.3, vds in 1e-2f64..3.3, vsb in 0.05f64..2.0) {
        let p = MosParams::default_nmos();
        prop_assert!(id_at(&p, vgs, vds, vsb) < id_at(&p, vgs, vds, 0.0));
    }

    #[test]
    fn terminal_current_continuous_across_swap(v in 0.0f64..3.3, vg in 0.0f64..3.3) {
        // Approaching vd == vs from either side gives the same (zero) current.
        let p = MosParams::default_nmos();
        let eps = 1e-9;
        let a = terminal_eval(&p, v + eps, vg, v, 0.0, W, L);
        let b = terminal_eval(&p, v - eps, vg, v, 0.0, W, L);
        prop_assert!((a.id - b.id).abs() <= 2.0 * eps * a.d_vd.abs().max(b.d_vd.abs()) * 1.01 + 1e-30);
        prop_assert!(rel_err(a.d_vd, b.d_vd) < 1e-6);
    }

    #[test]
    fn terminal_partials_sum_to_zero(
        vd in 0.0f64..3.3, vg in 0.0f64..3.3, vs in 0.0f64..3.3, vb in -0.2f64..0.0,
    ) {
        for p in [MosParams::default_nmos(), MosParams::default_pmos()] {
            let e = terminal_eval(&p, vd, vg, vs, vb, W, L);
            let sum = e.d_vd + e.d_vg + e.d_vs + e.d_vb;
            let scale = e.d_vd.abs() + e.d_vg.abs() + e.d_vs.abs() + e.d_vb.abs();
            prop_assert!(sum.abs() <= 1e-12 * scale + 1e-30);
        }
    }
}

#[test]
fn subthreshold_slope() {
    for p in [MosParams::default_nmos(), MosParams::default_pmos()] {
        let expected = 1.0 / (p.n_slope * VT * std::f64::consts::LN_10);
        let (v0, v1) = (0.0, 0.2);
        let slope = (id_at(&p, v1, 1.0, 0.0) / id_at(&p, v0, 1.0, 0.0)).log10() / (v1 - v0);
        assert!(
            (slope / expected - 1.0).abs() < 0.05,
            "slope {slope} dec/V vs {expected}"
        );
    }
}

#[test]
fn dibl_raises_off_current() {
    let p = MosParams::default_nmos();
    let low = id_at(&p, 0.0, 1.0, 0.0);
    let high = id_at(&p, 0.0, 3.3, 0.0);
    // Deep below threshold the drain dependence is DIBL plus channel-length
    // modulation; the softplus correction is a few 1e-4 here.
    let expected = (p.eta_dibl * 2.3 / (p.n_slope * VT)).exp() * (1.0 + p.lambda * 3.3)
        / (1.0 + p.lambda * 1.0);
    assert!((high / low / expected - 1.0).abs() < 2e-3);
}
