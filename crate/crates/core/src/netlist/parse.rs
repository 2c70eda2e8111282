use std::collections::HashSet;

use super::value::parse_value;
use super::{DeviceCard, DeviceSpec, Directive, ModelCard, NetlistDoc, ParseError};
use crate::devmodel::{MosParams, Polarity, Pulse, SourceWave};

type Result<T> = std::result::Result<T, ParseError>;

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

/// Split a logical line into tokens. Parentheses and commas are separators;
/// `key = value` collapses into a single `key=value` token.
fn tokenize(line: &str) -> Vec<String> {
    let spaced: String = line
        .chars()
        .flat_map(|c| match c {
            '(' | ')' | ',' => vec![' '],
            '=' => vec![' ', '=', ' '],
            c => vec![c],
        })
        .collect();
    let raw: Vec<&str> = spaced.split_whitespace().collect();
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        if raw.get(i + 1) == Some(&"=") {
            let v = raw.get(i + 2).copied().unwrap_or("");
            out.push(format!("{}={}", raw[i], v));
            i += 3;
        } else {
            out.push(raw[i].to_string());
            i += 1;
        }
    }
    out
}

fn value(tok: &str, line: usize) -> Result<f64> {
    parse_value(tok).map_err(|e| ParseError {
        line,
        msg: e.to_string(),
    })
}

/// Positional tokens and `key=value` pairs.
fn split_params(toks: &[String]) -> (Vec<&str>, Vec<(String, &str)>) {
    let mut pos = Vec::new();
    let mut kv = Vec::new();
    for t in toks {
        match t.split_once('=') {
            Some((k, v)) => kv.push((k.to_ascii_lowercase(), v)),
            None => pos.push(t.as_str()),
        }
    }
    (pos, kv)
}

fn lower(s: &str) -> String {
    s.to_ascii_lowercase()
}

fn parse_mosfet(toks: &[String], line: usize) -> Result<DeviceSpec> {
    let (pos, kv) = split_params(&toks[1..]);
    if pos.len() != 5 {
        return err(
            line,
            format!(
                "MOSFET `{}` needs 4 terminals and a model, found {} fields",
                toks[0],
                pos.len()
            ),
        );
    }
    let mut w = None;
    let mut l = None;
    for (k, v) in kv {
        match k.as_str() {
            "w" => w = Some(value(v, line)?),
            "l" => l = Some(value(v, line)?),
            _ => return err(line, format!("unknown MOSFET parameter `{k}`")),
        }
    }
    let (Some(w), Some(l)) = (w, l) else {
        return err(line, format!("MOSFET `{}` requires W= and L=", toks[0]));
    };
    if !(w > 0.0 && l > 0.0) {
        return err(line, format!("MOSFET `{}` needs W > 0 and L > 0", toks[0]));
    }
    Ok(DeviceSpec::Mosfet {
        drain: lower(pos[0]),
        gate: lower(pos[1]),
        source: lower(pos[2]),
        body: lower(pos[3]),
        model: lower(pos[4]),
        w,
        l,
    })
}

fn parse_vsource(toks: &[String], line: usize) -> Result<DeviceSpec> {
    if toks.len() < 4 {
        return err(
            line,
            format!("source `{}` needs 2 terminals and a value", toks[0]),
        );
    }
    let (p, n) = (lower(&toks[1]), lower(&toks[2]));
    let rest = &toks[3..];
    let wave = match rest[0].to_ascii_lowercase().as_str() {
        "dc" => {
            if rest.len() != 2 {
                return err(line, "DC source takes exactly one value");
            }
            SourceWave::Dc(value(&rest[1], line)?)
        }
        "pulse" => {
            if rest.len() != 8 {
                return err(line, "PULSE takes 7 values (v1 v2 td tr tf pw per)");
            }
            let v: Vec<f64> = rest[1..]
                .iter()
                .map(|t| value(t, line))
                .collect::<Result<_>>()?;
            let pulse = Pulse {
                v1: v[0],
                v2: v[1],
                td: v[2],
                tr: v[3],
                tf: v[4],
                pw: v[5],
                per: v[6],
            };
            if let Err(msg) = pulse.validate() {
                return err(line, msg);
            }
            SourceWave::Pulse(pulse)
        }
        _ if rest.len() == 1 => SourceWave::Dc(value(&rest[0], line)?),
        other => return err(line, format!("unsupported source specification `{other}`")),
    };
    Ok(DeviceSpec::VSource {
        pos: p,
        neg: n,
        wave,
    })
}

fn parse_two_terminal(toks: &[String], line: usize, kind: char) -> Result<DeviceSpec> {
    if toks.len() != 4 {
        return err(
            line,
            format!(
                "`{}` needs 2 terminals and a value, found {} fields",
                toks[0],
                toks.len() - 1
            ),
        );
    }
    let v = value(&toks[3], line)?;
    if !(v > 0.0) {
        return err(line, format!("`{}` value must be > 0", toks[0]));
    }
    let (pos, neg) = (lower(&toks[1]), lower(&toks[2]));
    Ok(match kind {
        'c' => DeviceSpec::Capacitor { pos, neg, value: v },
        _ => DeviceSpec::Resistor { pos, neg, value: v },
    })
}

fn parse_model(toks: &[String], line: usize) -> Result<ModelCard> {
    if toks.len() < 3 {
        return err(line, ".model needs a name and a type");
    }
    let polarity = match toks[2].to_ascii_lowercase().as_str() {
        "nmos" => Polarity::Nmos,
        "pmos" => Polarity::Pmos,
        other => return err(line, format!("unsupported model type `{other}`")),
    };
    let mut probe = MosParams::default_for(polarity);
    let mut params = Vec::new();
    for t in &toks[3..] {
        let Some((k, v)) = t.split_once('=') else {
            return err(line, format!("expected key=value in .model, found `{t}`"));
        };
        let k = k.to_ascii_lowercase();
        let v = value(v, line)?;
        if !probe.set(&k, v) {
            return err(line, format!("unknown model parameter `{k}`"));
        }
        params.push((k, v));
    }
    Ok(ModelCard {
        name: lower(&toks[1]),
        polarity,
        params,
        line,
    })
}

/// Parse netlist text. The first line is always the title.
pub fn parse_netlist(text: &str) -> Result<NetlistDoc> {
    let mut lines = text.lines().enumerate();
    let title = lines
        .next()
        .map(|(_, l)| l.trim().to_string())
        .unwrap_or_default();

    // Merge continuation lines into logical cards.
    let mut cards: Vec<(usize, String)> = Vec::new();
    let mut saw_end = false;
    let mut last_line = 1;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        if let Some(cont) = line.strip_prefix('+') {
            match cards.last_mut() {
                Some((_, card)) => {
                    card.push(' ');
                    card.push_str(cont);
                }
                None => return err(line_no, "continuation line without a preceding card"),
            }
            continue;
        }
        if line.eq_ignore_ascii_case(".end") {
            saw_end = true;
            break;
        }
        cards.push((line_no, line.to_string()));
    }
    if !saw_end {
        return err(last_line + 1, "missing .end");
    }

    let mut doc = NetlistDoc {
        title,
        ..Default::default()
    };
    let mut names = HashSet::new();
    for (line, card) in cards {
        let toks = tokenize(&card);
        let head = toks[0].to_ascii_lowercase();
        if let Some(directive) = head.strip_prefix('.') {
            match directive {
                "model" => {
                    let m = parse_model(&toks, line)?;
                    if doc.model(&m.name).is_some() {
                        return err(line, format!("duplicate model `{}`", m.name));
                    }
                    doc.models.push(m);
                }
                "tran" => {
                    if toks.len() != 3 {
                        return err(line, ".tran takes <tstep> <tstop>");
                    }
                    let tstep = value(&toks[1], line)?;
                    let tstop = value(&toks[2], line)?;
                    if !(tstep > 0.0 && tstop > tstep) {
                        return err(line, ".tran needs 0 < tstep < tstop");
                    }
                    doc.directives.push(Directive::Tran { tstep, tstop });
                }
                other => return err(line, format!("unsupported directive `.{other}`")),
            }
            continue;
        }
        let letter = head.chars().next().expect("non-empty token");
        let spec = match letter {
            'm' => parse_mosfet(&toks, line)?,
            'v' => parse_vsource(&toks, line)?,
            'c' | 'r' => parse_two_terminal(&toks, line, letter)?,
            other => return err(line, format!("unknown card type `{other}`")),
        };
        if !names.insert(head.clone()) {
            return err(line, format!("duplicate device name `{head}`"));
        }
        doc.devices.push(DeviceCard {
            name: head,
            line,
            spec,
        });
    }

    for d in &doc.devices {
        if let DeviceSpec::Mosfet { model, .. } = &d.spec {
            if doc.model(model).is_none() {
                return err(
                    d.line,
                    format!("`{}` references undeclared model `{model}`", d.name),
                );
            }
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::DeviceKind;

    #[test]
    fn empty_document() {
        let doc = parse_netlist("* comment\n.end").unwrap();
        assert!(doc.devices.is_empty());
        assert!(doc.models.is_empty());
    }

    #[test]
    fn undeclared_model() {
        let e = parse_netlist("t\nM1 d g s b NMOS W=1u L=0.35u\n.end\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("undeclared model"));
    }

    #[test]
    fn cards_and_continuations() {
        let text = "inv\n\
            * a comment\n\
            .model nch NMOS (VTH0=0.5 KP = 200u)\n\
            .model PCH pmos\n\
            VDD vdd 0 DC 3.3\n\
            VIN in 0 PULSE(0 1.6 1n 1n 1n\n\
            + 48n 100n)\n\
            MP out in vdd vdd pch W=2.5u L=0.35u\n\
            MN out in 0 0 NCH\n\
            + W=1u L=0.35u\n\
            C1 out 0 10fF\n\
            R1 out gnd 1meg\n\
            .tran 10p 300n\n\
            .end\n\
            garbage after end";
        let doc = parse_netlist(text).unwrap();
        assert_eq!(doc.title, "inv");
        assert_eq!(doc.devices.len(), 6);
        assert_eq!(doc.models.len(), 2);
        assert_eq!(
            doc.models[0].params,
            vec![("vth0".into(), 0.5), ("kp".into(), 200e-6)]
        );
        assert_eq!(doc.tran(), Some((10e-12, 300e-9)));
        let mn = doc.device("mn").unwrap();
        assert_eq!(mn.line, 9);
        match &mn.spec {
            DeviceSpec::Mosfet { w, model, .. } => {
                assert_eq!(*w, 1e-6);
                assert_eq!(model, "nch");
            }
            _ => panic!("expected MOSFET"),
        }
        match &doc.device("vin").unwrap().spec {
            DeviceSpec::VSource {
                wave: SourceWave::Pulse(p),
                ..
            } => {
                assert_eq!(p.per, 100e-9);
                assert_eq!(p.v2, 1.6);
            }
            _ => panic!("expected PULSE"),
        }
        assert_eq!(doc.device("c1").unwrap().spec.kind(), DeviceKind::C);
    }

    #[test]
    fn error_lines() {
        let cases = [
            ("t\nX1 a b c\n.end", 2, "unknown card"),
            (
                "t\n\nM1 a b c nch W=1u L=1u\n.model nch nmos\n.end",
                3,
                "4 terminals",
            ),
            ("t\nR1 a 0 1k\nr1 b 0 1k\n.end", 3, "duplicate device"),
            ("t\nR1 a 0 1k\nC1 a 0\n.end", 3, "2 terminals"),
            ("t\nR1 a 0 1x.5\n.end", 2, "malformed"),
            ("t\nR1 a 0 -1k\n.end", 2, "> 0"),
            (
                "t\nV1 a 0 PULSE(0 1 0 0 1n 1n 10n)\n.end",
                2,
                "rise and fall",
            ),
            (
                "t\n.model m nmos (FOO=1)\n.end",
                2,
                "unknown model parameter",
            ),
            ("t\n.option x\n.end", 2, "unsupported directive"),
            ("t\nR1 a 0 1k\n", 3, "missing .end"),
            ("t\n+ R1 a 0 1k\n.end", 2, "continuation"),
        ];
        for (text, line, needle) in cases {
            let e = parse_netlist(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
            assert!(e.msg.contains(needle), "{text:?}: {e}");
        }
    }

    #[test]
    fn tokenizer_merges_key_value() {
        assert_eq!(
            tokenize("M1 a b W = 1u L=2u"),
            vec!["M1", "a", "b", "W=1u", "L=2u"]
        );
        assert_eq!(
            tokenize("V1 a 0 PULSE(0,1 2)"),
            vec!["V1", "a", "0", "PULSE", "0", "1", "2"]
        );
    }
}
