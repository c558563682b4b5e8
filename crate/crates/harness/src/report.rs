//! CSV persistence of sweep rows, summary tables and plot-data files.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::experiment::EstimateReport;

pub const CSV_SCHEMA: u32 = 1;

pub const COLUMNS: [&str; 25] = [
    "fixture_id",
    "energy",
    "tau",
    "m",
    "n_linf",
    "n_hm",
    "n_wm",
    "delta",
    "rho",
    "r",
    "err_l2",
    "err_linf",
    "rhs_theorem1",
    "rhs_theorem2",
    "intermediate_l2",
    "intermediate_linf",
    "identity_mismatch",
    "lemma32_residual",
    "implied_c1",
    "implied_c5",
    "implied_c6",
    "pass_theorem1",
    "pass_theorem2",
    "flags",
    "timing_s",
];

pub fn schema_line() -> String {
    format!("# gelfand-sweep schema={CSV_SCHEMA} columns={}", COLUMNS.join("|"))
}

pub fn write_rows(rows: &[EstimateReport], out: impl Write) -> Result<()> {
    let mut out = out;
    writeln!(out, "{}", schema_line())?;
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows_file(rows: &[EstimateReport], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_rows(rows, std::io::BufWriter::new(file))
}

pub fn read_rows(input: impl Read) -> Result<Vec<EstimateReport>> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != schema_line() {
        return Err(HarnessError::Config(format!("unexpected CSV schema line {:?}", first.trim_end())));
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != COLUMNS {
        return Err(HarnessError::Config("CSV header does not match the schema".into()));
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec.map_err(|e| HarnessError::Config(format!("bad CSV row: {e}")))?);
    }
    Ok(rows)
}

pub fn read_rows_file(path: &Path) -> Result<Vec<EstimateReport>> {
    let file = std::fs::File::open(path)
        .map_err(|e| HarnessError::Config(format!("cannot open {}: {e}", path.display())))?;
    read_rows(file)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixtureSummary {
    pub rows: usize,
    pub skipped: usize,
    pub theorem1: (usize, usize),
    pub theorem2: (usize, usize),
    /// Largest `measured / rhs` over evaluated rows.
    pub worst_ratio: f64,
}

pub fn summarise(rows: &[EstimateReport]) -> BTreeMap<String, FixtureSummary> {
    let mut out: BTreeMap<String, FixtureSummary> = BTreeMap::new();
    for r in rows {
        let s = out.entry(r.fixture_id.clone()).or_default();
        s.rows += 1;
        if r.skipped() {
            s.skipped += 1;
        }
        for (pass, err, rhs, tally) in [
            (r.pass_theorem1, r.err_l2, r.rhs_theorem1, &mut s.theorem1),
            (r.pass_theorem2, r.err_linf, r.rhs_theorem2, &mut s.theorem2),
        ] {
            if let Some(p) = pass {
                tally.1 += 1;
                if p {
                    tally.0 += 1;
                }
                if let Some(rhs) = rhs {
                    if rhs > 0.0 {
                        s.worst_ratio = s.worst_ratio.max(err / rhs);
                    }
                }
            }
        }
    }
    out
}

pub fn format_summary(summary: &BTreeMap<String, FixtureSummary>) -> String {
    let mut s = format!(
        "{:<24} {:>6} {:>8} {:>12} {:>12} {:>12}\n",
        "fixture", "rows", "skipped", "theorem1", "theorem2", "worst ratio"
    );
    for (id, f) in summary {
        s.push_str(&format!(
            "{:<24} {:>6} {:>8} {:>12} {:>12} {:>12.4e}\n",
            id,
            f.rows,
            f.skipped,
            format!("{}/{}", f.theorem1.0, f.theorem1.1),
            format!("{}/{}", f.theorem2.0, f.theorem2.1),
            f.worst_ratio
        ));
    }
    s
}

fn write_pairs(path: &Path, header: [&str; 2], mut pairs: Vec<(f64, f64)>) -> Result<()> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs.dedup();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for (x, y) in pairs {
        w.serialize((x, y))?;
    }
    w.flush()?;
    Ok(())
}

/// `error_vs_energy.csv` and `error_vs_delta.csv`: one point per evaluated
/// `(fixture, E)` group, measured L² error against E and against δ.
pub fn write_plot_data(rows: &[EstimateReport], dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let live: Vec<&EstimateReport> = rows.iter().filter(|r| !r.skipped()).collect();
    let by_energy = live.iter().map(|r| (r.energy, r.err_l2)).collect();
    let by_delta = live.iter().filter_map(|r| r.delta.map(|d| (d, r.err_l2))).collect();
    let a = dir.join("error_vs_energy.csv");
    let b = dir.join("error_vs_delta.csv");
    write_pairs(&a, ["energy", "err_l2"], by_energy)?;
    write_pairs(&b, ["delta", "err_l2"], by_delta)?;
    Ok(vec![a, b])
}
