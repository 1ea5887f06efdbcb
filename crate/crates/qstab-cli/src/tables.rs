//! Table emission.  Every run writes a self-contained directory keyed by
//! the config hash:
//!
//! ```text
//! <output>/<scenario>-<hash16>/
//!   report.csv     quantity,param_1,param_2,value,witness_id
//!   plot.csv       quantity,x,y,series      (long format, ready to plot)
//!   witnesses.csv  id,kind,detail
//!   summary.json   verdicts + run accounting
//!   report.json    the full RunReport (lets `report <dir>` re-emit tables)
//! ```
//!
//! Emission is deterministic: rows are written in report order and floats
//! are formatted with a fixed precision, so repeated runs of the same
//! config produce byte-identical CSV files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::scenarios::RunReport;

const REPORT_HEADER: &str = "quantity,param_1,param_2,value,witness_id";
const PLOT_HEADER: &str = "quantity,x,y,series";
const WITNESS_HEADER: &str = "id,kind,detail";

/// Marker line appended after a header when a table has no data rows, so
/// an empty grid is distinguishable from a truncated file.
const ZERO_ROWS: &str = "# rows=0";

/// Directory name for a report: `<scenario>-<first 16 hash hex chars>`.
pub fn report_dir(report: &RunReport) -> PathBuf {
    let short = &report.config_hash[..16.min(report.config_hash.len())];
    report.output.join(format!("{}-{short}", report.scenario))
}

fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x:.6}")
    }
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> io::Result<()> {
    let mut text = String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 16);
    text.push_str(header);
    text.push('\n');
    if rows.is_empty() {
        text.push_str(ZERO_ROWS);
        text.push('\n');
    } else {
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
    }
    fs::write(path, text)
}

/// Write all tables for `report`, returning the directory they landed in.
pub fn emit_tables(report: &RunReport) -> io::Result<PathBuf> {
    let dir = report_dir(report);
    fs::create_dir_all(&dir)?;

    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{},{},{},{},{}", r.quantity, r.param_1, r.param_2, r.value, r.witness_id))
        .collect();
    write_csv(&dir.join("report.csv"), REPORT_HEADER, &rows)?;

    let plot: Vec<String> = report
        .plot
        .iter()
        .map(|p| format!("{},{},{},{}", p.quantity, fmt_f64(p.x), fmt_f64(p.y), p.series))
        .collect();
    write_csv(&dir.join("plot.csv"), PLOT_HEADER, &plot)?;

    let wits: Vec<String> = report
        .witnesses
        .iter()
        .map(|w| format!("{},{},{}", w.id, w.kind, w.detail))
        .collect();
    write_csv(&dir.join("witnesses.csv"), WITNESS_HEADER, &wits)?;

    let summary = serde_json::json!({
        "scenario": report.scenario,
        "config_hash": report.config_hash,
        "rows": report.rows.len(),
        "verdicts": report.verdicts,
        "budget_exceeded": report.budget_exceeded,
        "incomplete": report.incomplete,
        "wall_ms": report.wall_ms,
        "cache_hits": report.cache_hits,
        "cache_rebuilds": report.cache_rebuilds,
    });
    fs::write(dir.join("summary.json"), format!("{:#}\n", summary))?;
    fs::write(
        dir.join("report.json"),
        format!("{:#}\n", serde_json::to_value(report).expect("report serializes")),
    )?;
    Ok(dir)
}

/// Load the full report back from a directory written by [`emit_tables`].
pub fn load_report(dir: &Path) -> io::Result<RunReport> {
    let text = fs::read_to_string(dir.join("report.json"))?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::Cache;
    use crate::config::parse_config;
    use crate::scenarios::{run_scenario, RunOptions};

    fn tmpdir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("qstab-tables-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn emitted_tables_are_byte_identical_across_runs() {
        let cfg = parse_config(
            "scenario = recurrence\ngroup = free_abelian(2)\nlengths = 6,8\nt = 1/3\nc = 2,3\n",
        )
        .unwrap();
        let out = tmpdir("det");
        let opts = RunOptions {
            cache: Some(Cache::disabled()),
            output: Some(out.clone()),
            ..Default::default()
        };
        let d1 = emit_tables(&run_scenario(&cfg, &opts).unwrap()).unwrap();
        let first: Vec<String> = ["report.csv", "plot.csv", "witnesses.csv"]
            .iter()
            .map(|f| fs::read_to_string(d1.join(f)).unwrap())
            .collect();
        let d2 = emit_tables(&run_scenario(&cfg, &opts).unwrap()).unwrap();
        assert_eq!(d1, d2, "same config must land in the same directory");
        for (f, want) in ["report.csv", "plot.csv", "witnesses.csv"].iter().zip(&first) {
            assert_eq!(&fs::read_to_string(d2.join(f)).unwrap(), want, "{f} changed");
        }
        let _ = fs::remove_dir_all(&out);
    }

    #[test]
    fn empty_grid_writes_zero_row_marker() {
        let cfg = parse_config(
            "scenario = recurrence\ngroup = free(2)\nlengths = 6\nt = 1/3\nc = 2\n",
        )
        .unwrap();
        let out = tmpdir("empty");
        let opts = RunOptions {
            budget_seconds: Some(0),
            cache: Some(Cache::disabled()),
            output: Some(out.clone()),
            ..Default::default()
        };
        let dir = emit_tables(&run_scenario(&cfg, &opts).unwrap()).unwrap();
        let text = fs::read_to_string(dir.join("report.csv")).unwrap();
        assert_eq!(text, format!("{REPORT_HEADER}\n{ZERO_ROWS}\n"));
        let _ = fs::remove_dir_all(&out);
    }

    #[test]
    fn report_round_trips_through_json() {
        let cfg = parse_config(
            "scenario = property5\ngroup = free_abelian(2)\nlengths = 6\nc = 3\n",
        )
        .unwrap();
        let out = tmpdir("roundtrip");
        let opts = RunOptions {
            cache: Some(Cache::disabled()),
            output: Some(out.clone()),
            ..Default::default()
        };
        let report = run_scenario(&cfg, &opts).unwrap();
        let dir = emit_tables(&report).unwrap();
        let loaded = load_report(&dir).unwrap();
        assert_eq!(loaded.config_hash, report.config_hash);
        assert_eq!(loaded.rows.len(), report.rows.len());
        // Re-emitting the loaded report reproduces the CSVs.
        let before = fs::read_to_string(dir.join("report.csv")).unwrap();
        emit_tables(&loaded).unwrap();
        assert_eq!(fs::read_to_string(dir.join("report.csv")).unwrap(), before);
        let _ = fs::remove_dir_all(&out);
    }
}
