//! Device parameter overrides from the file named by `LS_SEED_MODEL`.

use levelsim::devmodel::{ModelDefaults, Polarity};
use levelsim::netlist::{parse_netlist, ParseError};
use levelsim::Error as CoreError;

use crate::error::CliError;

pub const SEED_VAR: &str = "LS_SEED_MODEL";

/// Built-in defaults, overridden by `LS_SEED_MODEL` when set. Later cards
/// win; keys not mentioned keep their defaults.
pub fn load_defaults() -> Result<ModelDefaults, CliError> {
    match std::env::var_os(SEED_VAR) {
        None => Ok(ModelDefaults::default()),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            defaults_from_text(&text).map_err(CliError::Core)
        }
    }
}

pub fn defaults_from_text(text: &str) -> Result<ModelDefaults, CoreError> {
    // The netlist grammar wants a title line and `.end`; supply them so the
    // seed file can be bare cards.
    let has_end = text.lines().any(|l| l.trim().eq_ignore_ascii_case(".end"));
    let end = if has_end { "" } else { "\n.end\n" };
    let doc = parse_netlist(&format!("seed\n{text}{end}")).map_err(|e| ParseError {
        line: e.line.saturating_sub(1),
        msg: format!("{SEED_VAR}: {}", e.msg),
    })?;
    if let Some(d) = doc.devices.first() {
        return Err(ParseError {
            line: d.line.saturating_sub(1),
            msg: format!(
                "{SEED_VAR}: only .model cards are allowed, found device `{}`",
                d.name
            ),
        }
        .into());
    }
    let mut defaults = ModelDefaults::default();
    for card in &doc.models {
        let target = match card.polarity {
            Polarity::Nmos => &mut defaults.nmos,
            Polarity::Pmos => &mut defaults.pmos,
        };
        for (k, v) in &card.params {
            target.set(k, *v);
        }
    }
    for p in [&defaults.nmos, &defaults.pmos] {
        p.validate()
            .map_err(|m| CoreError::Invalid(format!("{SEED_VAR}: {m}")))?;
    }
    Ok(defaults)
}
