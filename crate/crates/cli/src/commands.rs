use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use levelsim::devmodel::ModelDefaults;
use levelsim::engine::{transient, TranOptions};
use levelsim::measure::{characterize_waves, BenchConfig};
use levelsim::netlist::{elaborate_with, parse_netlist, Circuit};
use levelsim::topologies::{gen, TopoParams, TopologyId};
use levelsim::Error as CoreError;

use crate::bench::{self, characterize_row, par_map, reduction_ratio, BenchRow, RowStatus};
use crate::error::CliError;
use crate::output::{sci, write_waveforms, ReportJson};
use crate::seed::load_defaults;
use crate::{Cli, Command, Format, ParamFlags, SchemeArg, SweepParam};

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            netlist,
            tstep,
            tstop,
            scheme,
            out_csv,
            report_json,
            in_node,
            out_node,
        } => run(RunArgs {
            netlist,
            tstep,
            tstop,
            scheme,
            out_csv,
            report_json,
            in_node,
            out_node,
        }),
        Command::Gen {
            topology,
            params,
            out,
        } => cmd_gen(&topology, &params, out.as_deref()),
        Command::Bench { topologies, format } => cmd_bench(&topologies, format),
        Command::Sweep {
            topology,
            param,
            from,
            to,
            steps,
            out_csv,
        } => cmd_sweep(&topology, param, from, to, steps, out_csv.as_deref()),
    }
}

/// Buffered writer on `path`, or stdout.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn topology(s: &str) -> Result<TopologyId, CliError> {
    s.parse()
        .map_err(|e: levelsim::topologies::TopologyError| CliError::Usage(e.to_string()))
}

struct RunArgs {
    netlist: PathBuf,
    tstep: Option<f64>,
    tstop: Option<f64>,
    scheme: SchemeArg,
    out_csv: Option<PathBuf>,
    report_json: Option<PathBuf>,
    in_node: Option<String>,
    out_node: Option<String>,
}

/// Nodes to measure between: explicit flags, else `in`/`out` when both
/// exist and the circuit has a PULSE stimulus.
fn probe_nodes(c: &Circuit, a: &RunArgs) -> Option<(String, String)> {
    if a.in_node.is_some() || a.out_node.is_some() {
        let i = a.in_node.clone().unwrap_or_else(|| "in".into());
        let o = a.out_node.clone().unwrap_or_else(|| "out".into());
        return Some((i, o));
    }
    (c.node("in").is_some() && c.node("out").is_some() && c.stimulus().is_some())
        .then(|| ("in".into(), "out".into()))
}

fn run(a: RunArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.netlist).map_err(|e| CliError::io(&a.netlist, e))?;
    let defaults = load_defaults()?;
    let doc = parse_netlist(&text).map_err(CoreError::from)?;
    let circuit = elaborate_with(&doc, &defaults).map_err(CoreError::from)?;
    for w in &circuit.warnings {
        eprintln!("warning: {w}");
    }
    let tran = doc.tran();
    let tstep = a.tstep.or(tran.map(|t| t.0));
    let tstop = a.tstop.or(tran.map(|t| t.1));
    let (Some(tstep), Some(tstop)) = (tstep, tstop) else {
        return Err(CliError::Usage(
            "no .tran directive; pass --tstep and --tstop".into(),
        ));
    };
    if !(tstep > 0.0 && tstop >= 10.0 * tstep) {
        return Err(CliError::Usage(format!(
            "need tstep > 0 and tstop >= 10 * tstep (tstep = {tstep:e}, tstop = {tstop:e})"
        )));
    }

    let opts = TranOptions {
        scheme: a.scheme.into(),
        ..TranOptions::default()
    };
    let waves = transient(&circuit, tstep, tstop, &opts).map_err(CoreError::from)?;
    write_waveforms(sink(a.out_csv.as_deref())?, &circuit, &waves)?;

    let Some((in_node, out_node)) = probe_nodes(&circuit, &a) else {
        return Ok(());
    };
    let cfg = BenchConfig {
        tstep,
        tstop,
        scheme: a.scheme.into(),
        in_node,
        out_node,
        ..BenchConfig::default()
    };
    let report = characterize_waves(&circuit, &waves, &cfg).map_err(CoreError::from)?;
    let json = serde_json::to_string_pretty(&ReportJson::from(&report))?;
    match (&a.report_json, &a.out_csv) {
        (Some(p), _) => std::fs::write(p, json + "\n").map_err(|e| CliError::io(p, e))?,
        (None, Some(_)) => println!("{json}"),
        (None, None) => eprintln!("{json}"),
    }
    Ok(())
}

fn apply_flags(id: TopologyId, f: &ParamFlags) -> TopoParams {
    let mut p = TopoParams::default();
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut p.vddh, f.vddh);
    if id.has_vddl() {
        set(&mut p.vddl, f.vddl);
    }
    set(&mut p.cload, f.cload);
    set(&mut p.w_p, f.w_p);
    set(&mut p.w_n, f.w_n);
    set(&mut p.w_n_stacked, f.w_n_stacked);
    set(&mut p.l, f.l);
    if let Some(v) = f.vin_hi {
        p = p.with_vin_hi(v);
    }
    p
}

fn cmd_gen(name: &str, flags: &ParamFlags, out: Option<&Path>) -> Result<(), CliError> {
    let id = topology(name)?;
    if flags.vddl.is_some() && !id.has_vddl() {
        eprintln!("warning: {id} has no VddL rail; --vddl ignored");
    }
    let p = apply_flags(id, flags);
    let doc = gen(id, &p).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut w = sink(out)?;
    write!(w, "{doc}")?;
    w.flush()?;
    Ok(())
}

fn bench_ids(args: &[String]) -> Result<Vec<TopologyId>, CliError> {
    let mut ids = Vec::new();
    for tok in args
        .iter()
        .flat_map(|a| a.split(','))
        .map(str::trim)
        .filter(|t| !t.is_empty())
    {
        if tok.eq_ignore_ascii_case("all") {
            ids.extend(TopologyId::ALL);
        } else {
            ids.push(topology(tok)?);
        }
    }
    if ids.is_empty() {
        ids.extend(TopologyId::ALL);
    }
    Ok(ids)
}

fn cmd_bench(args: &[String], format: Format) -> Result<(), CliError> {
    let ids = bench_ids(args)?;
    let defaults = load_defaults()?;
    let rows = bench::run_bench(&ids, &defaults);
    let mut out = sink(None)?;
    match format {
        Format::Table => bench::write_table(&mut out, &rows)?,
        Format::Json => bench::write_json(&mut out, &rows)?,
        Format::Csv => {
            bench::write_csv(&mut out, &rows)?;
            out.flush()?;
            let mut err = io::stderr().lock();
            for s in bench::pair_summaries(&rows) {
                writeln!(
                    err,
                    "{} vs {}: power reduced {} ({:.3}x), delay increased {}",
                    s.stacked, s.baseline, s.power_reduced, s.reduction_ratio, s.delay_increased
                )?;
            }
        }
    }
    out.flush()?;
    bench::rows_outcome(&rows, |r| r.status != RowStatus::Ok)
}

fn set_param(p: TopoParams, param: SweepParam, v: f64) -> TopoParams {
    match param {
        SweepParam::Vddh => TopoParams { vddh: v, ..p },
        SweepParam::Vddl => TopoParams { vddl: v, ..p },
        SweepParam::VinHi => p.with_vin_hi(v),
        SweepParam::Cload => TopoParams { cload: v, ..p },
        SweepParam::WNStacked => TopoParams {
            w_n_stacked: v,
            ..p
        },
    }
}

fn param_name(param: SweepParam) -> &'static str {
    match param {
        SweepParam::Vddh => "vddh",
        SweepParam::Vddl => "vddl",
        SweepParam::VinHi => "vin_hi",
        SweepParam::Cload => "cload",
        SweepParam::WNStacked => "w_n_stacked",
    }
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn sweep_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn cmd_sweep(
    name: &str,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let id = topology(name)?;
    if !(from < to) {
        return Err(CliError::Usage(format!(
            "need --from < --to (got {from:e}, {to:e})"
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("need --steps >= 2 (got {steps})")));
    }
    if param == SweepParam::Vddl && !id.has_vddl() {
        return Err(CliError::Usage(format!(
            "{id} has no VddL rail; vddl cannot be swept"
        )));
    }
    if param == SweepParam::WNStacked && !id.is_stacked() {
        return Err(CliError::Usage(format!(
            "{id} has no stacked devices; w_n_stacked cannot be swept"
        )));
    }
    let defaults = load_defaults()?;
    let points = sweep_grid(from, to, steps);
    let rows: Vec<BenchRow> = par_map(&points, |&v| {
        sweep_point(id, set_param(TopoParams::default(), param, v), &defaults)
    });

    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(std::iter::once(param_name(param)).chain(bench::CSV_FIELDS))?;
    for (v, r) in points.iter().zip(&rows) {
        w.write_record(std::iter::once(sci(*v)).chain(bench::csv_cells(r)))?;
    }
    w.flush()?;
    bench::rows_outcome(&rows, |r| r.status == RowStatus::Failed)
}

fn sweep_point(id: TopologyId, p: TopoParams, defaults: &ModelDefaults) -> BenchRow {
    if !id.is_stacked() {
        return characterize_row(id, &p, defaults);
    }
    let pair = [id.baseline(), id];
    let [base, mut row]: [BenchRow; 2] = par_map(&pair, |&t| characterize_row(t, &p, defaults))
        .try_into()
        .expect("two rows");
    row.reduction_ratio = reduction_ratio(&base, &row);
    row
}
