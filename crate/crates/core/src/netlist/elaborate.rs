use std::collections::HashMap;

use super::{is_ground, DeviceSpec, ElaborateError, NetlistDoc};
use crate::devmodel::{ModelDefaults, MosParams, SourceWave};

/// Dense node index; `None` is ground.
pub type Node = Option<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct MosInstance {
    pub name: String,
    pub params: MosParams,
    pub w: f64,
    pub l: f64,
    pub drain: Node,
    pub gate: Node,
    pub source: Node,
    pub body: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capacitor {
    pub name: String,
    pub pos: Node,
    pub neg: Node,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resistor {
    pub name: String,
    pub pos: Node,
    pub neg: Node,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VSource {
    pub name: String,
    pub pos: Node,
    pub neg: Node,
    pub wave: SourceWave,
    /// Index of this source's branch current among the MNA branch unknowns.
    pub branch: usize,
}

/// Elaborated network, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub title: String,
    pub node_names: Vec<String>,
    pub node_index: HashMap<String, usize>,
    pub mosfets: Vec<MosInstance>,
    pub capacitors: Vec<Capacitor>,
    pub resistors: Vec<Resistor>,
    pub sources: Vec<VSource>,
    /// Non-fatal diagnostics (e.g. nodes touched by a single terminal).
    pub warnings: Vec<String>,
}

impl Circuit {
    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn n_branches(&self) -> usize {
        self.sources.len()
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_nodes() + self.n_branches()
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.node_index.get(&name.to_ascii_lowercase()).copied()
    }

    pub fn source(&self, name: &str) -> Option<&VSource> {
        self.sources
            .iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
    }

    /// The first PULSE source, taken as the stimulus.
    pub fn stimulus(&self) -> Option<&VSource> {
        self.sources.iter().find(|s| s.wave.is_pulse())
    }

    /// Copy of this circuit with one source's waveform replaced.
    pub fn with_source_wave(&self, name: &str, wave: SourceWave) -> Option<Circuit> {
        let mut c = self.clone();
        c.sources
            .iter_mut()
            .find(|s| s.name.eq_ignore_ascii_case(name))?
            .wave = wave;
        Some(c)
    }

    /// Human-readable name of MNA unknown `k` (node voltage or branch current).
    pub fn unknown_name(&self, k: usize) -> String {
        if k < self.n_nodes() {
            self.node_names[k].clone()
        } else {
            format!("i({})", self.sources[k - self.n_nodes()].name)
        }
    }
}

struct NodeTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
    degree: Vec<usize>,
}

impl NodeTable {
    fn bind(&mut self, name: &str) -> Node {
        if is_ground(name) {
            return None;
        }
        let key = name.to_ascii_lowercase();
        let next = self.names.len();
        let k = *self.index.entry(key.clone()).or_insert_with(|| {
            self.names.push(key);
            self.degree.push(0);
            next
        });
        self.degree[k] += 1;
        Some(k)
    }
}

/// Elaborate with the built-in default model parameters.
pub fn elaborate(doc: &NetlistDoc) -> Result<Circuit, ElaborateError> {
    elaborate_with(doc, &ModelDefaults::default())
}

/// Elaborate a parsed document. Node indices follow first appearance in
/// card order, terminals left to right.
pub fn elaborate_with(
    doc: &NetlistDoc,
    defaults: &ModelDefaults,
) -> Result<Circuit, ElaborateError> {
    let mut models: HashMap<String, MosParams> = HashMap::new();
    for m in &doc.models {
        let mut p = defaults.for_polarity(m.polarity);
        for (k, v) in &m.params {
            p.set(k, *v);
        }
        p.validate().map_err(|msg| ElaborateError::BadModel {
            model: m.name.clone(),
            msg,
        })?;
        models.insert(m.name.to_ascii_lowercase(), p);
    }

    let mut nodes = NodeTable {
        names: Vec::new(),
        index: HashMap::new(),
        degree: Vec::new(),
    };
    let mut mosfets = Vec::new();
    let mut capacitors = Vec::new();
    let mut resistors = Vec::new();
    let mut sources = Vec::new();

    for card in &doc.devices {
        let shorted = |a: &str, b: &str| {
            let same = a.eq_ignore_ascii_case(b) || (is_ground(a) && is_ground(b));
            if same {
                Err(ElaborateError::ShortedTerminals {
                    name: card.name.clone(),
                    node: a.to_string(),
                    line: card.line,
                })
            } else {
                Ok(())
            }
        };
        match &card.spec {
            DeviceSpec::Mosfet {
                drain,
                gate,
                source,
                body,
                model,
                w,
                l,
            } => {
                let params = *models.get(&model.to_ascii_lowercase()).ok_or_else(|| {
                    ElaborateError::UndeclaredModel {
                        name: card.name.clone(),
                        model: model.clone(),
                        line: card.line,
                    }
                })?;
                mosfets.push(MosInstance {
                    name: card.name.clone(),
                    params,
                    w: *w,
                    l: *l,
                    drain: nodes.bind(drain),
                    gate: nodes.bind(gate),
                    source: nodes.bind(source),
                    body: nodes.bind(body),
                });
            }
            DeviceSpec::VSource { pos, neg, wave } => {
                shorted(pos, neg)?;
                sources.push(VSource {
                    name: card.name.clone(),
                    pos: nodes.bind(pos),
                    neg: nodes.bind(neg),
                    wave: *wave,
                    branch: sources.len(),
                });
            }
            DeviceSpec::Capacitor { pos, neg, value } => {
                shorted(pos, neg)?;
                capacitors.push(Capacitor {
                    name: card.name.clone(),
                    pos: nodes.bind(pos),
                    neg: nodes.bind(neg),
                    value: *value,
                });
            }
            DeviceSpec::Resistor { pos, neg, value } => {
                shorted(pos, neg)?;
                resistors.push(Resistor {
                    name: card.name.clone(),
                    pos: nodes.bind(pos),
                    neg: nodes.bind(neg),
                    value: *value,
                });
            }
        }
    }

    let warnings = nodes
        .names
        .iter()
        .zip(&nodes.degree)
        .filter(|(_, &d)| d < 2)
        .map(|(n, _)| format!("node `{n}` is connected to a single terminal (floating)"))
        .collect();

    Ok(Circuit {
        title: doc.title.clone(),
        node_names: nodes.names,
        node_index: nodes.index,
        mosfets,
        capacitors,
        resistors,
        sources,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    #[test]
    fn first_appearance_order() {
        let doc =
            parse_netlist("t\nR1 in x 1k\nR2 x out 1k\nR3 out 0 1k\nV1 in gnd DC 1\n.end").unwrap();
        let c = elaborate(&doc).unwrap();
        assert_eq!(c.node("in"), Some(0));
        assert_eq!(c.node("x"), Some(1));
        assert_eq!(c.node("out"), Some(2));
        assert_eq!(c.n_nodes(), 3);
        assert_eq!(c.n_branches(), 1);
        assert!(c.warnings.is_empty());
        assert_eq!(c.unknown_name(3), "i(v1)");
    }

    #[test]
    fn shorted_two_terminal_rejected() {
        let doc = parse_netlist("t\nR1 a 0 1k\nC1 a A 1p\n.end").unwrap();
        match elaborate(&doc).unwrap_err() {
            ElaborateError::ShortedTerminals { name, line, .. } => {
                assert_eq!(name, "c1");
                assert_eq!(line, 3);
            }
            e => panic!("{e}"),
        }
        let doc = parse_netlist("t\nR1 0 gnd 1k\n.end").unwrap();
        assert!(elaborate(&doc).is_err());
    }

    #[test]
    fn floating_node_warns() {
        let doc = parse_netlist("t\nV1 a 0 DC 1\nR1 a b 1k\n.end").unwrap();
        let c = elaborate(&doc).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert!(c.warnings[0].contains("`b`"));
    }

    #[test]
    fn model_params_resolve_over_defaults() {
        let doc = parse_netlist(
            "t\n.model n1 nmos (vth0=0.4)\nV1 d 0 DC 1\nM1 d d 0 0 n1 W=1u L=1u\n.end",
        )
        .unwrap();
        let c = elaborate(&doc).unwrap();
        let p = c.mosfets[0].params;
        assert_eq!(p.vth0, 0.4);
        assert_eq!(p.kp, MosParams::default_nmos().kp);

        let mut defaults = ModelDefaults::default();
        defaults.nmos.kp = 1e-4;
        let c = elaborate_with(&doc, &defaults).unwrap();
        assert_eq!(c.mosfets[0].params.kp, 1e-4);
        assert_eq!(c.mosfets[0].params.vth0, 0.4);
    }

    #[test]
    fn invalid_model_rejected() {
        let doc = parse_netlist("t\n.model n1 nmos (n=0.5)\n.end").unwrap();
        assert!(matches!(
            elaborate(&doc),
            Err(ElaborateError::BadModel { .. })
        ));
    }
}
