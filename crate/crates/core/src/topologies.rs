//! Netlist generators for the six level-shifter circuits and the series
//! stacking transform.
//!
//! Every generated netlist has its supplies first (`vddh`, then `vddl` for
//! dual-supply circuits), the stimulus `vin` on node `in`, the load `cload`
//! on node `out`, NMOS bodies on ground and PMOS bodies on their local rail.
//! Device models are `nch` and `pch`, declared without parameters so the
//! elaboration defaults apply.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::devmodel::{MosParams, Pulse, SourceWave};
use crate::netlist::{DeviceCard, DeviceKind, DeviceSpec, Directive, ModelCard, NetlistDoc};

pub const NMOS_MODEL: &str = "nch";
pub const PMOS_MODEL: &str = "pch";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error(
        "unknown topology `{0}` (valid: cls, cls_stacked, ssls, ssls_stacked, cmls, cmls_stacked)"
    )]
    UnknownTopology(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("stack target `{0}` not found")]
    TargetNotFound(String),
    #[error("stack target `{0}` is not a MOSFET")]
    NotAMosfet(String),
    #[error("stack count must be at least 1")]
    BadCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyId {
    Cls,
    ClsStacked,
    Ssls,
    SslsStacked,
    Cmls,
    CmlsStacked,
}

impl TopologyId {
    pub const ALL: [TopologyId; 6] = [
        TopologyId::Cls,
        TopologyId::ClsStacked,
        TopologyId::Ssls,
        TopologyId::SslsStacked,
        TopologyId::Cmls,
        TopologyId::CmlsStacked,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyId::Cls => "cls",
            TopologyId::ClsStacked => "cls_stacked",
            TopologyId::Ssls => "ssls",
            TopologyId::SslsStacked => "ssls_stacked",
            TopologyId::Cmls => "cmls",
            TopologyId::CmlsStacked => "cmls_stacked",
        }
    }

    pub fn is_stacked(self) -> bool {
        matches!(
            self,
            TopologyId::ClsStacked | TopologyId::SslsStacked | TopologyId::CmlsStacked
        )
    }

    /// The unstacked circuit this one derives from (itself for baselines).
    pub fn baseline(self) -> TopologyId {
        match self {
            TopologyId::ClsStacked => TopologyId::Cls,
            TopologyId::SslsStacked => TopologyId::Ssls,
            TopologyId::CmlsStacked => TopologyId::Cmls,
            other => other,
        }
    }

    /// The stacked variant of a baseline (itself for stacked ids).
    pub fn stacked(self) -> TopologyId {
        match self {
            TopologyId::Cls => TopologyId::ClsStacked,
            TopologyId::Ssls => TopologyId::SslsStacked,
            TopologyId::Cmls => TopologyId::CmlsStacked,
            other => other,
        }
    }

    pub fn has_vddl(self) -> bool {
        !matches!(self, TopologyId::Ssls | TopologyId::SslsStacked)
    }

    pub fn mosfet_count(self) -> usize {
        match self {
            TopologyId::Cls => 10,
            TopologyId::ClsStacked => 13,
            TopologyId::Ssls => 6,
            TopologyId::SslsStacked => 8,
            TopologyId::Cmls => 12,
            TopologyId::CmlsStacked => 15,
        }
    }

    /// Devices replaced by two-high stacks in the stacked variant.
    pub fn stack_targets(self) -> &'static [&'static str] {
        match self.baseline() {
            TopologyId::Cls => &["mna", "mnb", "mn3"],
            TopologyId::Ssls => &["mn2", "mn3"],
            _ => &["mn3", "mn4", "mn5"],
        }
    }
}

impl fmt::Display for TopologyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyId {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TopologyId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TopologyError::UnknownTopology(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoParams {
    pub vddh: f64,
    pub vddl: f64,
    pub vin_hi: f64,
    pub l: f64,
    pub w_p: f64,
    pub w_n: f64,
    pub w_n_stacked: f64,
    pub cload: f64,
    pub stimulus: SourceWave,
}

impl Default for TopoParams {
    fn default() -> Self {
        TopoParams {
            vddh: 3.3,
            vddl: 2.2,
            vin_hi: 1.6,
            l: 0.35e-6,
            w_p: 2.5e-6,
            w_n: 1.0e-6,
            w_n_stacked: 0.5e-6,
            cload: 10e-15,
            stimulus: SourceWave::Pulse(default_pulse(1.6)),
        }
    }
}

/// The bench stimulus: 10 MHz, 1 ns edges, 48 ns high time.
pub fn default_pulse(vin_hi: f64) -> Pulse {
    Pulse {
        v1: 0.0,
        v2: vin_hi,
        td: 1e-9,
        tr: 1e-9,
        tf: 1e-9,
        pw: 48e-9,
        per: 100e-9,
    }
}

impl TopoParams {
    /// Set `vin_hi` and the pulse high level together.
    pub fn with_vin_hi(mut self, vin_hi: f64) -> Self {
        self.vin_hi = vin_hi;
        if let SourceWave::Pulse(p) = &mut self.stimulus {
            p.v2 = vin_hi;
        }
        self
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let bad = |m: String| Err(TopologyError::InvalidParams(m));
        if !(0.0 < self.vin_hi && self.vin_hi <= self.vddl && self.vddl <= self.vddh) {
            return bad(format!(
                "need 0 < vin_hi <= vddl <= vddh (vin_hi = {}, vddl = {}, vddh = {})",
                self.vin_hi, self.vddl, self.vddh
            ));
        }
        for (name, v) in [
            ("l", self.l),
            ("w_p", self.w_p),
            ("w_n", self.w_n),
            ("w_n_stacked", self.w_n_stacked),
            ("cload", self.cload),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive (got {v})"));
            }
        }
        if let SourceWave::Pulse(p) = &self.stimulus {
            p.validate().map_err(TopologyError::InvalidParams)?;
        }
        Ok(())
    }
}

struct Builder<'p> {
    p: &'p TopoParams,
    doc: NetlistDoc,
}

impl<'p> Builder<'p> {
    fn new(p: &'p TopoParams, title: &str) -> Self {
        let models = [
            (NMOS_MODEL, crate::devmodel::Polarity::Nmos),
            (PMOS_MODEL, crate::devmodel::Polarity::Pmos),
        ]
        .into_iter()
        .map(|(name, polarity)| ModelCard {
            name: name.into(),
            polarity,
            params: Vec::new(),
            line: 0,
        })
        .collect();
        Builder {
            p,
            doc: NetlistDoc {
                title: title.into(),
                devices: Vec::new(),
                models,
                directives: vec![Directive::Tran {
                    tstep: 10e-12,
                    tstop: 300e-9,
                }],
            },
        }
    }

    fn card(&mut self, name: &str, spec: DeviceSpec) -> &mut Self {
        self.doc.devices.push(DeviceCard {
            name: name.into(),
            line: 0,
            spec,
        });
        self
    }

    fn supplies(&mut self, dual: bool) -> &mut Self {
        self.card("vddh", vsrc("vddh", SourceWave::Dc(self.p.vddh)));
        if dual {
            self.card("vddl", vsrc("vddl", SourceWave::Dc(self.p.vddl)));
        }
        let stim = self.p.stimulus;
        self.card("vin", vsrc("in", stim))
    }

    fn nmos(&mut self, name: &str, d: &str, g: &str, s: &str, w: f64) -> &mut Self {
        let l = self.p.l;
        self.card(name, mos(d, g, s, "0", NMOS_MODEL, w, l))
    }

    fn pmos(&mut self, name: &str, d: &str, g: &str, s: &str, rail: &str) -> &mut Self {
        let (w, l) = (self.p.w_p, self.p.l);
        self.card(name, mos(d, g, s, rail, PMOS_MODEL, w, l))
    }

    fn load(&mut self) -> NetlistDoc {
        let c = self.p.cload;
        self.card(
            "cload",
            DeviceSpec::Capacitor {
                pos: "out".into(),
                neg: "0".into(),
                value: c,
            },
        );
        std::mem::take(&mut self.doc)
    }
}

fn vsrc(pos: &str, wave: SourceWave) -> DeviceSpec {
    DeviceSpec::VSource {
        pos: pos.into(),
        neg: "0".into(),
        wave,
    }
}

fn mos(d: &str, g: &str, s: &str, b: &str, model: &str, w: f64, l: f64) -> DeviceSpec {
    DeviceSpec::Mosfet {
        drain: d.into(),
        gate: g.into(),
        source: s.into(),
        body: b.into(),
        model: model.into(),
        w,
        l,
    }
}

/// Generate the netlist of a built-in topology.
pub fn gen(id: TopologyId, p: &TopoParams) -> Result<NetlistDoc, TopologyError> {
    p.validate()?;
    let doc = match id {
        TopologyId::Cls => cls(p),
        TopologyId::ClsStacked => cls_stacked(p),
        TopologyId::Ssls => ssls(p),
        TopologyId::SslsStacked => ssls_stacked(p),
        TopologyId::Cmls => cmls(p),
        TopologyId::CmlsStacked => cmls_stacked(p),
    };
    debug_assert_eq!(doc.mosfet_count(), id.mosfet_count());
    Ok(doc)
}

fn cls(p: &TopoParams) -> NetlistDoc {
    let wn = p.w_n;
    Builder::new(
        p,
        "cls: conventional level shifter, 10T dual supply (inverting)",
    )
    .supplies(true)
    .pmos("mpa", "inb", "in", "vddl", "vddl")
    .nmos("mna", "inb", "in", "0", wn)
    .pmos("mpb", "in2", "inb", "vddl", "vddl")
    .nmos("mnb", "in2", "inb", "0", wn)
    .nmos("mn1", "x1", "in2", "0", wn)
    .nmos("mn2", "x2", "inb", "0", wn)
    .pmos("mp1", "x1", "x2", "vddh", "vddh")
    .pmos("mp2", "x2", "x1", "vddh", "vddh")
    .pmos("mp3", "out", "x2", "vddh", "vddh")
    .nmos("mn3", "out", "x2", "0", wn)
    .load()
}

fn cls_stacked(p: &TopoParams) -> NetlistDoc {
    let (wn, ws) = (p.w_n, p.w_n_stacked);
    Builder::new(
        p,
        "cls_stacked: conventional level shifter, 13T stacked (inverting)",
    )
    .supplies(true)
    .pmos("mpa", "inb", "in", "vddl", "vddl")
    .nmos("mna_s1", "inb", "in", "mna_n1", ws)
    .nmos("mna_s2", "mna_n1", "in", "0", ws)
    .pmos("mpb", "in2", "inb", "vddl", "vddl")
    .nmos("mnb_s1", "in2", "inb", "mnb_n1", ws)
    .nmos("mnb_s2", "mnb_n1", "inb", "0", ws)
    .nmos("mn1", "x1", "in2", "0", wn)
    .nmos("mn2", "x2", "inb", "0", wn)
    .pmos("mp1", "x1", "x2", "vddh", "vddh")
    .pmos("mp2", "x2", "x1", "vddh", "vddh")
    .pmos("mp3", "out", "x2", "vddh", "vddh")
    .nmos("mn3_s1", "out", "x2", "mn3_n1", ws)
    .nmos("mn3_s2", "mn3_n1", "x2", "0", ws)
    .load()
}

fn ssls(p: &TopoParams) -> NetlistDoc {
    let wn = p.w_n;
    Builder::new(p, "ssls: single-supply level shifter, 6T (inverting)")
        .supplies(false)
        .pmos("mp1", "x", "in", "vddh", "vddh")
        .nmos("mn1", "x", "in", "0", wn)
        .pmos("mp2", "y", "x", "vddh", "vddh")
        .nmos("mn2", "y", "x", "0", wn)
        .pmos("mp3", "out", "y", "vddh", "vddh")
        .nmos("mn3", "out", "y", "0", wn)
        .load()
}

fn ssls_stacked(p: &TopoParams) -> NetlistDoc {
    let (wn, ws) = (p.w_n, p.w_n_stacked);
    Builder::new(
        p,
        "ssls_stacked: single-supply level shifter, 8T stacked (inverting)",
    )
    .supplies(false)
    .pmos("mp1", "x", "in", "vddh", "vddh")
    .nmos("mn1", "x", "in", "0", wn)
    .pmos("mp2", "y", "x", "vddh", "vddh")
    .nmos("mn2", "y", "x", "n23", ws)
    .nmos("mn3", "n23", "x", "0", ws)
    .pmos("mp3", "out", "y", "vddh", "vddh")
    .nmos("mn4", "out", "y", "n45", ws)
    .nmos("mn5", "n45", "y", "0", ws)
    .load()
}

fn cmls(p: &TopoParams) -> NetlistDoc {
    let wn = p.w_n;
    Builder::new(
        p,
        "cmls: contention-mitigated level shifter, 12T dual supply (inverting)",
    )
    .supplies(true)
    .pmos("mp6", "inb", "in", "vddl", "vddl")
    .nmos("mn1", "inb", "in", "0", wn)
    .pmos("mp7", "in2", "inb", "vddl", "vddl")
    .nmos("mn2", "in2", "inb", "0", wn)
    .pmos("mp3", "sp1", "in2", "vddh", "vddh")
    .pmos("mp1", "x1", "x2", "sp1", "vddh")
    .pmos("mp4", "sp2", "inb", "vddh", "vddh")
    .pmos("mp2", "x2", "x1", "sp2", "vddh")
    .nmos("mn3", "x1", "in2", "0", wn)
    .nmos("mn4", "x2", "inb", "0", wn)
    .pmos("mp5", "out", "x2", "vddh", "vddh")
    .nmos("mn5", "out", "x2", "0", wn)
    .load()
}

fn cmls_stacked(p: &TopoParams) -> NetlistDoc {
    let (wn, ws) = (p.w_n, p.w_n_stacked);
    Builder::new(
        p,
        "cmls_stacked: contention-mitigated level shifter, 15T stacked (inverting)",
    )
    .supplies(true)
    .pmos("mp6", "inb", "in", "vddl", "vddl")
    .nmos("mn1", "inb", "in", "0", wn)
    .pmos("mp7", "in2", "inb", "vddl", "vddl")
    .nmos("mn2", "in2", "inb", "0", wn)
    .pmos("mp3", "sp1", "in2", "vddh", "vddh")
    .pmos("mp1", "x1", "x2", "sp1", "vddh")
    .pmos("mp4", "sp2", "inb", "vddh", "vddh")
    .pmos("mp2", "x2", "x1", "sp2", "vddh")
    .nmos("mn3", "x1", "in2", "n34", ws)
    .nmos("mn4", "n34", "in2", "0", ws)
    .nmos("mn5", "x2", "inb", "n56", ws)
    .nmos("mn6", "n56", "inb", "0", ws)
    .pmos("mp5", "out", "x2", "vddh", "vddh")
    .nmos("mn7", "out", "x2", "n78", ws)
    .nmos("mn8", "n78", "x2", "0", ws)
    .load()
}

/// Which devices to replace by series stacks, and how deep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackSpec {
    pub targets: Vec<String>,
    pub k: usize,
}

impl StackSpec {
    pub fn new<S: AsRef<str>>(targets: &[S], k: usize) -> Self {
        StackSpec {
            targets: targets
                .iter()
                .map(|s| s.as_ref().to_ascii_lowercase())
                .collect(),
            k,
        }
    }
}

fn fresh_node(doc: &NetlistDoc, base: String) -> String {
    let used = |n: &str| doc.devices.iter().any(|d| d.spec.nodes().contains(&n));
    if !used(&base) {
        return base;
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !used(n))
        .expect("unbounded search")
}

/// Replace each target MOSFET by `k` series devices of width `W / k` sharing
/// its gate and body. `name_s1` keeps the original drain, `name_sk` the
/// original source; the chain runs through fresh nodes `name_n1..`.
pub fn apply_stack(doc: &NetlistDoc, spec: &StackSpec) -> Result<NetlistDoc, TopologyError> {
    if spec.k == 0 {
        return Err(TopologyError::BadCount);
    }
    for t in &spec.targets {
        match doc.device(t) {
            None => return Err(TopologyError::TargetNotFound(t.clone())),
            Some(d) if d.spec.kind() != DeviceKind::M => {
                return Err(TopologyError::NotAMosfet(t.clone()))
            }
            _ => {}
        }
    }
    if spec.k == 1 {
        return Ok(doc.clone());
    }
    let mut out = NetlistDoc {
        devices: Vec::with_capacity(doc.devices.len() + spec.targets.len() * (spec.k - 1)),
        ..doc.clone()
    };
    for card in &doc.devices {
        let DeviceSpec::Mosfet {
            drain,
            gate,
            source,
            body,
            model,
            w,
            l,
        } = &card.spec
        else {
            out.devices.push(card.clone());
            continue;
        };
        if !spec
            .targets
            .iter()
            .any(|t| t.eq_ignore_ascii_case(&card.name))
        {
            out.devices.push(card.clone());
            continue;
        }
        let mut chain = vec![drain.clone()];
        for j in 1..spec.k {
            chain.push(fresh_node(doc, format!("{}_n{j}", card.name)));
        }
        chain.push(source.clone());
        for j in 0..spec.k {
            out.devices.push(DeviceCard {
                name: format!("{}_s{}", card.name, j + 1),
                line: card.line,
                spec: mos(
                    &chain[j],
                    gate,
                    &chain[j + 1],
                    body,
                    model,
                    w / spec.k as f64,
                    *l,
                ),
            });
        }
    }
    Ok(out)
}

/// Off-state leakage test bench: supply `vdd` across a `k`-high NMOS stack
/// of total width `w_total`, all gates grounded.
pub fn stack_leakage_fixture(k: usize, w_total: f64, p: &MosParams, vdd: f64) -> NetlistDoc {
    let k = k.max(1);
    let params = crate::devmodel::MODEL_KEYS
        .iter()
        .filter_map(|key| p.get(key).map(|v| (key.to_string(), v)))
        .collect();
    let mut devices = vec![DeviceCard {
        name: "vdd".into(),
        line: 0,
        spec: vsrc("top", SourceWave::Dc(vdd)),
    }];
    for j in 1..=k {
        let d = if j == 1 {
            "top".to_string()
        } else {
            format!("n{}", j - 1)
        };
        let s = if j == k {
            "0".to_string()
        } else {
            format!("n{j}")
        };
        devices.push(DeviceCard {
            name: format!("m{j}"),
            line: 0,
            spec: mos(&d, "0", &s, "0", "dev", w_total / k as f64, 0.35e-6),
        });
    }
    NetlistDoc {
        title: format!("{k}-high off-state stack"),
        devices,
        models: vec![ModelCard {
            name: "dev".into(),
            polarity: p.polarity,
            params,
            line: 0,
        }],
        directives: Vec::new(),
    }
}
