//! Cross-seed statistics of per-run learning curves.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::plot;
use super::runner::{csv_error, RunRecord};
use crate::error::{Error, Result};
use crate::surrogate::SurrogateKind;

pub const AGGREGATE_HEADER: [&str; 5] = ["surrogate", "env_step", "mean_return", "std_return", "n_seeds"];

/// Mean and population standard deviation of `mean_return` across seeds at
/// one evaluation step.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub surrogate: SurrogateKind,
    pub env_step: usize,
    pub mean_return: f64,
    pub std_return: f64,
    pub n_seeds: usize,
}

pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(Error::contract("aggregate: no run records"));
    }
    let mut by_kind: BTreeMap<SurrogateKind, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_kind.entry(r.surrogate).or_default().push(r);
    }
    let mut out = Vec::new();
    for (kind, runs) in by_kind {
        let grid: Vec<usize> = runs[0].rows.iter().map(|r| r.env_step).collect();
        for run in &runs[1..] {
            let other: Vec<usize> = run.rows.iter().map(|r| r.env_step).collect();
            if other != grid {
                return Err(Error::GridMismatch(format!(
                    "{kind}: seed {} evaluates at {} steps, seed {} at {}",
                    runs[0].seed,
                    grid.len(),
                    run.seed,
                    other.len()
                )));
            }
        }
        let mut seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::contract(format!("aggregate: {kind} has a seed twice")));
        }
        let n = runs.len() as f64;
        for (i, &env_step) in grid.iter().enumerate() {
            let mean = runs.iter().map(|r| r.rows[i].mean_return).sum::<f64>() / n;
            let var = runs
                .iter()
                .map(|r| (r.rows[i].mean_return - mean).powi(2))
                .sum::<f64>()
                / n;
            out.push(AggregateRow {
                surrogate: kind,
                env_step,
                mean_return: mean,
                std_return: var.sqrt(),
                n_seeds: runs.len(),
            });
        }
    }
    Ok(out)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(AGGREGATE_HEADER).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.surrogate.tag().to_string(),
            r.env_step.to_string(),
            r.mean_return.to_string(),
            r.std_return.to_string(),
            r.n_seeds.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rd.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(AGGREGATE_HEADER) {
        return Err(Error::format(path.display().to_string(), "not an aggregate CSV"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = || Error::format(path.display().to_string(), format!("line {}", rows.len() + 2));
        let f = |i: usize| rec.get(i).unwrap_or("");
        rows.push(AggregateRow {
            surrogate: f(0).parse().map_err(|_| bad())?,
            env_step: f(1).parse().map_err(|_| bad())?,
            mean_return: f(2).parse().map_err(|_| bad())?,
            std_return: f(3).parse().map_err(|_| bad())?,
            n_seeds: f(4).parse().map_err(|_| bad())?,
        });
    }
    if rows.is_empty() {
        return Err(Error::format(path.display().to_string(), "no rows"));
    }
    Ok(rows)
}

/// `run_*.csv` files directly inside `dir`, sorted by name.
pub fn find_run_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("run_"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Read run files, write the aggregate CSV and the SVG plot. Nothing is
/// written unless every input parses and the grids agree.
pub fn aggregate_and_plot(run_files: &[PathBuf], csv_out: &Path, svg_out: &Path) -> Result<Vec<AggregateRow>> {
    if run_files.is_empty() {
        return Err(Error::contract("aggregate: no run files given"));
    }
    let records = run_files
        .iter()
        .map(|p| RunRecord::read_csv(p))
        .collect::<Result<Vec<_>>>()?;
    let rows = aggregate(&records)?;
    let svg = plot::render_svg(&rows);
    write_aggregate_csv(csv_out, &rows)?;
    fs::write(svg_out, svg).map_err(|e| Error::io(svg_out, e))?;
    Ok(rows)
}
