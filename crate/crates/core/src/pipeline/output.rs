//! CSV tables of the figure families.
//!
//! Every table starts with the cell columns `strategy,protocol,init,<axis>` where
//! `<axis>` is the name of the swept parameter:
//!
//! | file                | further columns            | rows                         |
//! |---------------------|----------------------------|------------------------------|
//! | `throughput.csv`    | `throughput,rounds,best_init` | one per cell              |
//! | `power_profile.csv` | `slot,power`               | `N` per cell                 |
//! | `ratio_profile.csv` | `slot,rho`                 | `N` per cell                 |
//! | `trajectory.csv`    | `slot,x,y`                 | `N` per cell                 |
//! | `iterations.csv`    | `iteration,throughput`     | one per outer-trace entry    |
//!
//! Numbers carry 12 significant digits. `best_init` is 1 on the initialization
//! with the highest throughput among cells that differ only in it.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::Trajectory;

use super::run::{check_record, CellRecord, ExperimentOutcome};

/// Formats with 12 significant digits, dropping trailing zeros.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // rounding may have carried into a new leading digit
        let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
        if digits > 12 && decimals > 0 {
            format!("{v:.prec$}", prec = decimals - 1)
        } else {
            s
        }
    } else {
        format!("{v:.11e}")
    };
    trim_zeros(&s)
}

fn trim_zeros(s: &str) -> String {
    let (mantissa, exp) = match s.find('e') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
    format!("{mantissa}{exp}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io { path: path.display().to_string(), source },
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

fn cell_columns(r: &CellRecord) -> [String; 4] {
    [
        r.run.strategy.as_str().to_string(),
        r.run.protocol.as_str().to_string(),
        r.run.init.clone(),
        format_sig(r.cell.sweep_value),
    ]
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Marks the best initialization among otherwise identical cells.
fn best_init_flags(records: &[CellRecord]) -> Vec<bool> {
    records
        .iter()
        .map(|r| {
            !records.iter().any(|o| {
                o.run.strategy == r.run.strategy
                    && o.run.protocol == r.run.protocol
                    && o.cell.sweep_value == r.cell.sweep_value
                    && (o.run.throughput > r.run.throughput
                        || o.run.throughput == r.run.throughput && o.run.init < r.run.init)
            })
        })
        .collect()
}

/// Writes every table into `dir` (created if missing) after re-checking every
/// record's feasibility. Returns the written paths.
pub fn emit_csv(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    for r in &outcome.records {
        check_record(&r.scenario, &r.run)?;
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let axis = outcome.axis.as_str();
    let recs = &outcome.records;
    let with_cell = |extra: &[&'static str]| {
        let mut h = vec!["strategy", "protocol", "init", axis];
        h.extend_from_slice(extra);
        h
    };
    let mut written = Vec::new();

    let path = dir.join("throughput.csv");
    let best = best_init_flags(recs);
    write_table(
        &path,
        &with_cell(&["throughput", "rounds", "best_init"]),
        recs.iter().zip(&best).map(|(r, &b)| {
            let mut row = cell_columns(r).to_vec();
            row.push(format_sig(r.run.throughput));
            row.push(r.run.trace.len().saturating_sub(1).to_string());
            row.push(u8::from(b).to_string());
            row
        }),
    )?;
    written.push(path);

    let per_slot = |name: &str, extra: &[&'static str], values: &dyn Fn(&CellRecord, usize) -> Vec<String>| {
        let path = dir.join(name);
        write_table(
            &path,
            &with_cell(extra),
            recs.iter().flat_map(|r| {
                (0..r.run.profile.len()).map(move |i| {
                    let mut row = cell_columns(r).to_vec();
                    row.push((i + 1).to_string());
                    row.extend(values(r, i));
                    row
                })
            }),
        )
        .map(|_| path)
    };
    written.push(per_slot("power_profile.csv", &["slot", "power"], &|r, i| vec![format_sig(r.run.profile.power[i])])?);
    written.push(per_slot("ratio_profile.csv", &["slot", "rho"], &|r, i| vec![format_sig(r.run.profile.rho[i])])?);
    written.push(per_slot("trajectory.csv", &["slot", "x", "y"], &|r, i| {
        let p = r.run.trajectory.points[i];
        vec![format_sig(p[0]), format_sig(p[1])]
    })?);

    let path = dir.join("iterations.csv");
    write_table(
        &path,
        &with_cell(&["iteration", "throughput"]),
        recs.iter().flat_map(|r| {
            r.run.trace.iter().enumerate().map(move |(k, &v)| {
                let mut row = cell_columns(r).to_vec();
                row.push(k.to_string());
                row.push(format_sig(v));
                row
            })
        }),
    )?;
    written.push(path);
    Ok(written)
}

/// Trajectory of one cell read back from `trajectory.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub strategy: String,
    pub protocol: String,
    pub init: String,
    pub sweep_value: f64,
    pub trajectory: Trajectory<f64>,
}

/// Reads `trajectory.csv`, grouping consecutive rows of the same cell.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryTable>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut out: Vec<TrajectoryTable> = Vec::new();
    let num = |s: &str, line: usize| {
        s.parse::<f64>().map_err(|e| Error::Config(format!("{}: line {line}: `{s}`: {e}", path.display())))
    };
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = k + 2;
        if rec.len() != 7 {
            return Err(Error::Config(format!("{}: line {line}: expected 7 fields", path.display())));
        }
        let sweep_value = num(&rec[3], line)?;
        let point = [num(&rec[5], line)?, num(&rec[6], line)?];
        let same = out.last().map_or(false, |t| {
            t.strategy == rec[0] && t.protocol == rec[1] && t.init == rec[2] && t.sweep_value == sweep_value
        });
        if same {
            out.last_mut().expect("checked").trajectory.points.push(point);
        } else {
            out.push(TrajectoryTable {
                strategy: rec[0].to_string(),
                protocol: rec[1].to_string(),
                init: rec[2].to_string(),
                sweep_value,
                trajectory: Trajectory::new(vec![point]),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.1 + 0.2), "0.3");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_sig(123456.7890123456), "123456.789012");
        assert_eq!(format_sig(9.9999999999999e-3), "0.01");
        assert_eq!(format_sig(1.5e-9), "1.5e-9");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn formatting_is_idempotent() {
        for k in 1..2000 {
            let v = (k as f64 * 0.7323).sin() * 10f64.powi(k % 9 - 4);
            let s = format_sig(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(format_sig(back), s);
            assert!((back - v).abs() <= 5e-12 * v.abs(), "{v} -> {s}");
        }
    }
}
