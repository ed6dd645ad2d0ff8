//! Coverage tables as CSV and per-panel plot data.
//!
//! The CSV has one row per `(scheme, method, p, h)`. Floats are written in
//! shortest round-trip form, so [`read_coverage_csv`] recovers the table
//! exactly. Plot files are tab-separated with columns `h`, one coverage
//! column per scheme, and `nominal`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::bootstrap::{CiMethod, Scheme};
use crate::error::{Error, Result};

use super::config::parse_method;
use super::coverage::{CoverageCell, CoverageTable};

const HEADER: [&str; 17] = [
    "scheme",
    "method",
    "p",
    "h",
    "level",
    "sim_count",
    "covered",
    "undefined_base",
    "no_interval",
    "nonzero_base",
    "covered_nonzero",
    "width_sum",
    "width_count",
    "coverage",
    "se",
    "conditional_coverage",
    "mean_width",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn write_coverage_csv<W: Write>(table: &CoverageTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for c in &table.cells {
        w.write_record([
            c.scheme.to_string(),
            c.method.to_string(),
            c.p.to_string(),
            c.h.to_string(),
            table.level.to_string(),
            c.sim_count.to_string(),
            c.covered.to_string(),
            c.undefined_base.to_string(),
            c.no_interval.to_string(),
            c.nonzero_base.to_string(),
            c.covered_nonzero.to_string(),
            c.width_sum.to_string(),
            c.width_count.to_string(),
            c.coverage().to_string(),
            c.standard_error().to_string(),
            opt(c.conditional_coverage()),
            opt(c.mean_width()),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {} `{raw}`", HEADER[i]),
    })
}

/// Parses a table written by [`write_coverage_csv`]. Derived columns are ignored.
pub fn read_coverage_csv<R: Read>(reader: R) -> Result<CoverageTable> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected coverage header".into(),
        });
    }
    let mut cells = Vec::new();
    let mut level = None;
    let mut sim_count = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let scheme: Scheme = field(&rec, 0, line)?;
        let method: CiMethod = parse_method(&rec[1]).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let row_level: f64 = field(&rec, 4, line)?;
        if *level.get_or_insert(row_level) != row_level {
            return Err(Error::Parse {
                line,
                message: "mixed confidence levels".into(),
            });
        }
        let cell = CoverageCell {
            scheme,
            method,
            p: field(&rec, 2, line)?,
            h: field(&rec, 3, line)?,
            sim_count: field(&rec, 5, line)?,
            covered: field(&rec, 6, line)?,
            undefined_base: field(&rec, 7, line)?,
            no_interval: field(&rec, 8, line)?,
            nonzero_base: field(&rec, 9, line)?,
            covered_nonzero: field(&rec, 10, line)?,
            width_sum: field(&rec, 11, line)?,
            width_count: field(&rec, 12, line)?,
        };
        sim_count = cell.sim_count;
        cells.push(cell);
    }
    let level = level.ok_or(Error::Parse {
        line: 1,
        message: "coverage table has no rows".into(),
    })?;
    Ok(CoverageTable {
        level,
        sim_count,
        cells,
    })
}

pub fn plot_file_name(method: CiMethod, p: f64) -> String {
    let m = method.to_string().replace(':', "_");
    format!("coverage_{m}_p{p}.tsv")
}

/// One panel: coverage by lag for each scheme, plus the nominal level.
pub fn write_plot_data<W: Write>(
    table: &CoverageTable,
    method: CiMethod,
    p: f64,
    mut w: W,
) -> Result<()> {
    let schemes = table.schemes();
    if schemes.is_empty() {
        return Err(Error::invalid("coverage table has no schemes"));
    }
    let io = |e| Error::io("<plot data>", e);
    let cols: Vec<Vec<&CoverageCell>> = schemes
        .iter()
        .map(|&s| table.series(s, method, p))
        .collect();
    let mut header = vec!["h".to_string()];
    header.extend(schemes.iter().map(Scheme::to_string));
    header.push("nominal".into());
    writeln!(w, "{}", header.join("\t")).map_err(io)?;
    let lags = cols.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..lags {
        let h = cols.iter().find_map(|c| c.get(i)).expect("lag present").h;
        let mut row = vec![h.to_string()];
        for c in &cols {
            row.push(
                c.get(i)
                    .map_or_else(|| "NA".to_string(), |c| c.coverage().to_string()),
            );
        }
        row.push(table.level.to_string());
        writeln!(w, "{}", row.join("\t")).map_err(io)?;
    }
    Ok(())
}

/// Writes one plot file per `(method, p)` panel into `dir`.
pub fn write_plot_files(table: &CoverageTable, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for (method, p) in table.panels() {
        let path = dir.join(plot_file_name(method, p));
        let mut buf = Vec::new();
        write_plot_data(table, method, p, &mut buf)?;
        std::fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CoverageTable {
        let mut cells = Vec::new();
        for (k, scheme) in [Scheme::Multiplier, Scheme::StationaryModified]
            .into_iter()
            .enumerate()
        {
            for method in [CiMethod::Direct, CiMethod::Transfer { p1: 0.01, p2: 0.05 }] {
                for h in 1..=2 {
                    cells.push(CoverageCell {
                        scheme,
                        method,
                        p: 0.01,
                        h,
                        sim_count: 7,
                        covered: 3 + k + h,
                        undefined_base: 1,
                        no_interval: 0,
                        nonzero_base: 4,
                        covered_nonzero: 2,
                        width_sum: 0.1 + 0.2 * h as f64,
                        width_count: 6,
                    });
                }
            }
        }
        CoverageTable {
            level: 0.95,
            sim_count: 7,
            cells,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = table();
        let mut buf = Vec::new();
        write_coverage_csv(&t, &mut buf).unwrap();
        let back = read_coverage_csv(&buf[..]).unwrap();
        assert_eq!(back, t);
        let mut again = Vec::new();
        write_coverage_csv(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(read_coverage_csv(&b"a,b\n1,2\n"[..]).is_err());
        let mut buf = Vec::new();
        write_coverage_csv(&table(), &mut buf).unwrap();
        let text = String::from_utf8(buf)
            .unwrap()
            .replacen("multiplier", "bogus", 1);
        assert!(matches!(
            read_coverage_csv(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn plot_panel_layout() {
        let mut buf = Vec::new();
        write_plot_data(&table(), CiMethod::Direct, 0.01, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expect = format!(
            "h\tmultiplier\tmodified\tnominal\n1\t{}\t{}\t0.95\n2\t{}\t{}\t0.95\n",
            4.0 / 7.0,
            5.0 / 7.0,
            5.0 / 7.0,
            6.0 / 7.0
        );
        assert_eq!(text, expect);
    }

    #[test]
    fn empty_table_is_an_error() {
        let t = CoverageTable {
            level: 0.95,
            sim_count: 0,
            cells: vec![],
        };
        assert!(write_plot_data(&t, CiMethod::Direct, 0.05, Vec::new()).is_err());
    }

    #[test]
    fn plot_files_per_panel() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_plot_files(&table(), dir.path()).unwrap();
        let names: Vec<_> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(
            names,
            [
                "coverage_direct_p0.01.tsv",
                "coverage_transfer_0.01_0.05_p0.01.tsv"
            ]
        );
    }

    #[test]
    fn unwritable_dir_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("blocker");
        std::fs::write(&file, "x").unwrap();
        let err = write_plot_files(&table(), &file.join("sub")).unwrap_err();
        assert!(err.to_string().contains("blocker"), "{err}");
    }
}
