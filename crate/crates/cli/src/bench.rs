//! Characterization rows shared by `bench` and `sweep`.

use std::io::Write;

use levelsim::devmodel::ModelDefaults;
use levelsim::measure::{characterize, BenchConfig, Report};
use levelsim::netlist::elaborate_with;
use levelsim::topologies::{gen, TopoParams, TopologyId};
use levelsim::Error as CoreError;
use serde::{Serialize, Serializer};

use crate::error::{code, core_code, is_non_functional, CliError};
use crate::output::{eng, sci};

/// Settled levels must reach within 1% of the rails.
const SWING_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NonFunctional,
    Invalid,
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NonFunctional => "non_functional",
            RowStatus::Invalid => "invalid",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub power_avg: f64,
    pub power_static_avg: f64,
    pub delay_max: f64,
    pub swing_hi: f64,
    pub swing_lo: f64,
}

impl From<&Report> for Metrics {
    fn from(r: &Report) -> Self {
        Metrics {
            power_avg: r.power_avg,
            power_static_avg: r.power_static_avg(),
            delay_max: r.delay_max,
            swing_hi: r.swing_hi,
            swing_lo: r.swing_lo,
        }
    }
}

fn ser_topology<S: Serializer>(t: &TopologyId, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(t.as_str())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    #[serde(serialize_with = "ser_topology")]
    pub topology: TopologyId,
    pub status: RowStatus,
    #[serde(flatten)]
    pub metrics: Option<Metrics>,
    /// Baseline power over this row's power; stacked rows only.
    pub reduction_ratio: Option<f64>,
    pub error: Option<String>,
    /// Exit code this row's failure maps to.
    #[serde(skip)]
    pub code: Option<u8>,
}

impl BenchRow {
    fn failed(topology: TopologyId, status: RowStatus, msg: String, code: Option<u8>) -> Self {
        BenchRow {
            topology,
            status,
            metrics: None,
            reduction_ratio: None,
            error: Some(msg),
            code,
        }
    }
}

/// Generate, simulate, and measure one topology.
pub fn characterize_row(id: TopologyId, p: &TopoParams, defaults: &ModelDefaults) -> BenchRow {
    if let Err(e) = p.validate() {
        return BenchRow::failed(id, RowStatus::Invalid, e.to_string(), None);
    }
    let report = gen(id, p)
        .map_err(|e| CoreError::Invalid(e.to_string()))
        .and_then(|doc| Ok(elaborate_with(&doc, defaults)?))
        .and_then(|c| Ok(characterize(&c, &BenchConfig::default())?));
    match report {
        Ok(r) => {
            let m = Metrics::from(&r);
            let ok =
                m.swing_hi >= (1.0 - SWING_MARGIN) * p.vddh && m.swing_lo <= SWING_MARGIN * p.vddh;
            BenchRow {
                topology: id,
                status: if ok {
                    RowStatus::Ok
                } else {
                    RowStatus::NonFunctional
                },
                metrics: Some(m),
                reduction_ratio: None,
                error: (!ok)
                    .then(|| format!("swing [{}, {}] V misses the rails", m.swing_lo, m.swing_hi)),
                code: (!ok).then_some(code::MEASURE),
            }
        }
        Err(e) if is_non_functional(&e) => BenchRow::failed(
            id,
            RowStatus::NonFunctional,
            e.to_string(),
            Some(code::MEASURE),
        ),
        Err(e) => BenchRow::failed(id, RowStatus::Failed, e.to_string(), Some(core_code(&e))),
    }
}

/// Map `f` over `items` on one thread each; results keep input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    std::thread::scope(|s| {
        let handles: Vec<_> = items.iter().map(|x| s.spawn(|| f(x))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Stacked-over-baseline power ratio when both rows have metrics.
pub fn reduction_ratio(baseline: &BenchRow, stacked: &BenchRow) -> Option<f64> {
    let (b, s) = (baseline.metrics?, stacked.metrics?);
    (s.power_avg > 0.0).then(|| b.power_avg / s.power_avg)
}

/// One row per requested topology, in enumeration order.
pub fn run_bench(ids: &[TopologyId], defaults: &ModelDefaults) -> Vec<BenchRow> {
    let mut ids: Vec<TopologyId> = TopologyId::ALL
        .into_iter()
        .filter(|t| ids.contains(t))
        .collect();
    ids.dedup();
    let p = TopoParams::default();
    let mut rows = par_map(&ids, |&id| characterize_row(id, &p, defaults));
    for k in 0..rows.len() {
        let id = rows[k].topology;
        if !id.is_stacked() {
            continue;
        }
        if let Some(base) = rows.iter().find(|r| r.topology == id.baseline()) {
            rows[k].reduction_ratio = reduction_ratio(base, &rows[k]);
        }
    }
    rows
}

/// Ordering checks for one baseline/stacked pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    #[serde(serialize_with = "ser_topology")]
    pub baseline: TopologyId,
    #[serde(serialize_with = "ser_topology")]
    pub stacked: TopologyId,
    pub reduction_ratio: f64,
    pub power_reduced: bool,
    pub static_power_reduced: bool,
    pub delay_increased: bool,
}

pub fn pair_summaries(rows: &[BenchRow]) -> Vec<PairSummary> {
    rows.iter()
        .filter(|r| r.topology.is_stacked())
        .filter_map(|s| {
            let b = rows.iter().find(|r| r.topology == s.topology.baseline())?;
            let (bm, sm) = (b.metrics?, s.metrics?);
            Some(PairSummary {
                baseline: b.topology,
                stacked: s.topology,
                reduction_ratio: reduction_ratio(b, s)?,
                power_reduced: sm.power_avg < bm.power_avg,
                static_power_reduced: sm.power_static_avg < bm.power_static_avg,
                delay_increased: sm.delay_max >= bm.delay_max,
            })
        })
        .collect()
}

pub const CSV_FIELDS: [&str; 9] = [
    "topology",
    "status",
    "power_avg_w",
    "power_static_avg_w",
    "delay_max_s",
    "swing_hi_v",
    "swing_lo_v",
    "reduction_ratio",
    "error",
];

/// CSV cells for a row, matching `CSV_FIELDS`.
pub fn csv_cells(r: &BenchRow) -> Vec<String> {
    let num = |x: Option<f64>| x.map(sci).unwrap_or_default();
    let m = r.metrics;
    vec![
        r.topology.to_string(),
        r.status.as_str().to_string(),
        num(m.map(|m| m.power_avg)),
        num(m.map(|m| m.power_static_avg)),
        num(m.map(|m| m.delay_max)),
        num(m.map(|m| m.swing_hi)),
        num(m.map(|m| m.swing_lo)),
        num(r.reduction_ratio),
        r.error.clone().unwrap_or_default(),
    ]
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_FIELDS)?;
    for r in rows {
        w.write_record(csv_cells(r))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BenchJson<'a> {
    rows: &'a [BenchRow],
    pairs: Vec<PairSummary>,
}

pub fn write_json<W: Write>(mut out: W, rows: &[BenchRow]) -> Result<(), CliError> {
    let doc = BenchJson {
        rows,
        pairs: pair_summaries(rows),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_table<W: Write>(mut out: W, rows: &[BenchRow]) -> Result<(), CliError> {
    writeln!(
        out,
        "{:<14} {:<15} {:>16} {:>16} {:>14} {:>10} {:>10} {:>9}",
        "topology", "status", "power", "static power", "delay", "swing hi", "swing lo", "ratio"
    )?;
    for r in rows {
        let cell = |f: fn(&Metrics) -> f64, unit: &str| {
            r.metrics
                .as_ref()
                .map(|m| eng(f(m), unit))
                .unwrap_or_else(|| "-".into())
        };
        let ratio = r
            .reduction_ratio
            .map(|x| format!("{x:.3}x"))
            .unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<14} {:<15} {:>16} {:>16} {:>14} {:>10} {:>10} {:>9}",
            r.topology.as_str(),
            r.status.as_str(),
            cell(|m| m.power_avg, "W"),
            cell(|m| m.power_static_avg, "W"),
            cell(|m| m.delay_max, "s"),
            r.metrics
                .map(|m| format!("{:.4}", m.swing_hi))
                .unwrap_or_else(|| "-".into()),
            r.metrics
                .map(|m| format!("{:.4}", m.swing_lo))
                .unwrap_or_else(|| "-".into()),
            ratio
        )?;
        if let Some(e) = &r.error {
            writeln!(out, "  {}: {e}", r.topology)?;
        }
    }
    let pairs = pair_summaries(rows);
    if !pairs.is_empty() {
        writeln!(out)?;
    }
    let yn = |b: bool| if b { "yes" } else { "no" };
    for s in pairs {
        writeln!(
            out,
            "{} vs {}: power reduced {} ({:.3}x), static power reduced {}, delay increased {}",
            s.stacked,
            s.baseline,
            yn(s.power_reduced),
            s.reduction_ratio,
            yn(s.static_power_reduced),
            yn(s.delay_increased)
        )?;
    }
    Ok(())
}

/// Error for a finished run whose rows did not all succeed.
pub fn rows_outcome(rows: &[BenchRow], count: impl Fn(&BenchRow) -> bool) -> Result<(), CliError> {
    let bad: Vec<&BenchRow> = rows.iter().filter(|r| count(r)).collect();
    match bad.first() {
        None => Ok(()),
        Some(first) => Err(CliError::Rows {
            failed: bad.len(),
            total: rows.len(),
            code: first.code.unwrap_or(code::USAGE),
        }),
    }
}
