//! File formats.
//!
//! * snapshot CSV (in/out): `ticker,market_cap`
//! * trajectory CSV: `step,phase,stock,count,weight`, stocks numbered from 0
//! * curve CSV: `rank,weight,log10_rank,log10_weight`
//! * reports: JSON lines
//!
//! Floats are written in Rust's shortest round-trip form. Every writer goes
//! through a temporary file in the destination directory that is renamed
//! into place, so a failed write leaves nothing behind.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::analysis::curve::{CapitalCurve, CurvePoint, MarketSnapshot};
use crate::error::{Error, Result};
use crate::simulate::Trajectory;

pub const SNAPSHOT_HEADER: &str = "ticker,market_cap";
pub const TRAJECTORY_HEADER: &str = "step,phase,stock,count,weight";
pub const CURVE_HEADER: &str = "rank,weight,log10_rank,log10_weight";

/// Writes `path` via a sibling temporary file and an atomic rename.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_snapshot(path: &Path, snapshot: &MarketSnapshot) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{SNAPSHOT_HEADER}")?;
        for (ticker, cap) in &snapshot.entries {
            writeln!(w, "{},{}", csv_field(ticker), cap)?;
        }
        Ok(())
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn check_header(path: &Path, reader: &mut csv::Reader<File>, expected: &str) -> Result<()> {
    let header = reader
        .headers()
        .map_err(|e| malformed(path, 1, e.to_string()))?;
    if header.is_empty() {
        return Err(Error::EmptyInput { path: path.into() });
    }
    let found = header.iter().map(str::trim).collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(malformed(
            path,
            1,
            format!("expected header `{expected}`, found `{found}`"),
        ));
    }
    Ok(())
}

fn malformed(path: &Path, line: u64, message: String) -> Error {
    Error::Malformed {
        path: path.into(),
        line,
        message,
    }
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads a `ticker,market_cap` CSV. The date label is the file stem.
pub fn read_snapshot(path: &Path) -> Result<MarketSnapshot> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(open(path)?);
    check_header(path, &mut reader, SNAPSHOT_HEADER)?;
    let mut entries: Vec<(String, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, e.to_string())
        })?;
        let line = line_of(&row);
        if row.len() != 2 {
            return Err(malformed(
                path,
                line,
                format!("expected 2 fields, found {}", row.len()),
            ));
        }
        let ticker = row[0].trim().to_string();
        if ticker.is_empty() {
            return Err(malformed(path, line, "empty ticker".into()));
        }
        let cap: f64 = row[1].trim().parse().map_err(|_| {
            malformed(
                path,
                line,
                format!("market_cap `{}` is not a number", &row[1]),
            )
        })?;
        if !(cap.is_finite() && cap > 0.0) {
            return Err(malformed(
                path,
                line,
                format!("market_cap must be positive, got {cap}"),
            ));
        }
        if !seen.insert(ticker.clone()) {
            return Err(malformed(path, line, format!("duplicate ticker {ticker}")));
        }
        entries.push((ticker, cap));
    }
    if entries.is_empty() {
        return Err(Error::EmptyInput { path: path.into() });
    }
    let date = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    MarketSnapshot::new(date, entries)
}

pub fn write_curve(path: &Path, curve: &CapitalCurve) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{CURVE_HEADER}")?;
        for p in &curve.points {
            writeln!(
                w,
                "{},{},{},{}",
                p.rank, p.weight, p.log10_rank, p.log10_weight
            )?;
        }
        Ok(())
    })
}

pub fn read_curve(path: &Path) -> Result<CapitalCurve> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(open(path)?);
    check_header(path, &mut reader, CURVE_HEADER)?;
    let mut points = Vec::new();
    for row in reader.deserialize::<CurvePoint>() {
        points.push(row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, e.to_string())
        })?);
    }
    Ok(CapitalCurve { points })
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{TRAJECTORY_HEADER}")?;
        for r in &traj.records {
            let weights = r.composition.weights();
            for (stock, (&count, weight)) in r.composition.counts().iter().zip(weights).enumerate()
            {
                writeln!(w, "{},{},{},{},{}", r.step, r.phase, stock, count, weight)?;
            }
        }
        Ok(())
    })
}

/// One JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let lines = items
        .iter()
        .map(serde_json::to_string)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    write_atomic(path, |w| {
        for line in &lines {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polya::ModelParams;
    use crate::simulate::{run, ScenarioConfig};
    use crate::verify::check_stationarity;

    fn snapshot() -> MarketSnapshot {
        MarketSnapshot::new(
            "2014-03-01",
            vec![
                ("AAPL".into(), 4.6e11),
                ("GOOG, Inc".into(), 3.8e11),
                ("MSFT".into(), 3.1e11),
            ],
        )
        .unwrap()
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("2014-03-01.csv");
        write_snapshot(&path, &snapshot()).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), snapshot());
    }

    #[test]
    fn snapshot_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(read_snapshot(&p), Err(Error::EmptyInput { .. })));

        std::fs::write(&p, "ticker,market_cap\n").unwrap();
        assert!(matches!(read_snapshot(&p), Err(Error::EmptyInput { .. })));

        std::fs::write(&p, "ticker,market_cap\nA,10\nB,-4\n").unwrap();
        match read_snapshot(&p) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }

        std::fs::write(&p, "ticker,market_cap\nA,10\nB,ten\n").unwrap();
        assert!(matches!(
            read_snapshot(&p),
            Err(Error::Malformed { line: 3, .. })
        ));

        std::fs::write(&p, "ticker,market_cap\nA,10,3\n").unwrap();
        assert!(matches!(
            read_snapshot(&p),
            Err(Error::Malformed { line: 2, .. })
        ));

        std::fs::write(&p, "symbol,cap\nA,10\n").unwrap();
        assert!(matches!(
            read_snapshot(&p),
            Err(Error::Malformed { line: 1, .. })
        ));

        std::fs::write(&p, "ticker,market_cap\nA,10\nA,11\n").unwrap();
        assert!(matches!(
            read_snapshot(&p),
            Err(Error::Malformed { line: 3, .. })
        ));

        assert!(matches!(
            read_snapshot(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn curve_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        let curve = CapitalCurve::from_snapshot(&snapshot(), None).unwrap();
        write_curve(&path, &curve).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("rank,weight,log10_rank,log10_weight\n1,"));
        assert_eq!(read_curve(&path).unwrap(), curve);
    }

    #[test]
    fn trajectory_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let cfg = ScenarioConfig::two_phase(ModelParams::new(1.0, 2).unwrap(), 2, 3, 9);
        let t = run(&cfg).unwrap();
        write_trajectory(&path, &t).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(lines.len(), 1 + 4 * 2);
        assert_eq!(lines[1], "0,growth,0,0,0");
        assert!(lines[5].starts_with("2,growth,0,"));
        assert!(lines[7].starts_with("3,equilibrium,0,"));
    }

    #[test]
    fn jsonl_reports() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let p = ModelParams::new(1.0, 2).unwrap();
        let reports = vec![
            check_stationarity(&p, 3).unwrap(),
            check_stationarity(&p, 4).unwrap(),
        ];
        write_jsonl(&path, &reports).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("{\"check\":\"stationarity\",\"params\":{\"alpha\":1.0,\"stocks\":2,\"theta\":2.0,\"level\":3},\"residual\":"));
    }

    #[test]
    fn failed_write_leaves_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let err = write_atomic(&path, |w| {
            writeln!(w, "partial")?;
            Err(std::io::Error::other("boom"))
        });
        assert!(err.is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
