//! Headered CSV tables of floats. Column orders are fixed here and listed in
//! `schema.md`.

use std::path::{Path, PathBuf};

use crate::error::{input, CliError, Result};

pub const IMU_FILE: &str = "imu.csv";
pub const GNSS_FILE: &str = "gnss.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const META_FILE: &str = "meta.txt";
pub const ESTIMATE_FILE: &str = "estimate.csv";
pub const METRICS_FILE: &str = "metrics.csv";

pub const IMU_COLUMNS: [&str; 7] = ["t", "wx", "wy", "wz", "fx", "fy", "fz"];
pub const GNSS_COLUMNS: [&str; 7] = ["t", "lat", "lon", "h", "vn", "ve", "vd"];
pub const TRUTH_COLUMNS: [&str; 10] = ["t", "lat", "lon", "h", "vn", "ve", "vd", "roll", "pitch", "heading"];
pub const ESTIMATE_COLUMNS: [&str; 27] = [
    "t", "lat", "lon", "h", "vn", "ve", "vd", "roll", "pitch", "heading", "bgx", "bgy", "bgz", "baz", "p_bgx", "p_bgy",
    "p_bgz", "p_baz", "p_tn", "p_te", "p_td", "p_vn", "p_ve", "p_vd", "p_lat", "p_lon", "p_h",
];

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv { path: path.to_path_buf(), source }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

/// Writes rows with shortest round-trip float formatting, so identical inputs
/// give byte-identical files.
pub fn write_table<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    let mut buf = Vec::with_capacity(header.len());
    for row in rows {
        buf.clear();
        buf.extend(row.as_ref().iter().map(|v| v.to_string()));
        w.write_record(&buf).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let found: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    if found != header {
        return Err(input(format!("{}: expected columns {}, found {}", path.display(), header.join(","), found.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| input(format!("{}: row {}: non-numeric field", path.display(), i + 2)))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Two-column `metric,value` file.
pub fn write_metrics(path: &Path, metrics: &[(&str, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["metric", "value"]).map_err(csv_err(path))?;
    for (name, v) in metrics {
        w.write_record([name.to_string(), v.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn read_metrics(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    if r.headers().map_err(csv_err(path))?.iter().collect::<Vec<_>>() != ["metric", "value"] {
        return Err(input(format!("{}: expected columns metric,value", path.display())));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(path))?;
            let v = rec[1].parse().map_err(|_| input(format!("{}: bad value {:?}", path.display(), &rec[1])))?;
            Ok((rec[0].to_string(), v))
        })
        .collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn in_dir(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let rows = vec![vec![0.1, f64::NAN, -1e-300], vec![1.0 / 3.0, 2.0, f64::MAX]];
        write_table(&p, &["a", "b", "c"], &rows).unwrap();
        let back = read_table(&p, &["a", "b", "c"]).unwrap();
        assert_eq!(back[1], rows[1]);
        assert_eq!(back[0][0], 0.1);
        assert!(back[0][1].is_nan());
        assert!(read_table(&p, &["a", "b"]).is_err());
    }
}
