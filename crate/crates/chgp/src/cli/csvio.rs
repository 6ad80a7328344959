//! Fixed-schema numeric CSV reading and writing.
//!
//! Data files carry a header `x1[,x2[,x3]],z` (or `lon,lat,z` under a
//! spherical metric); target files the same without the `z` column.
//! Prediction output appends `mean,sd,lo95,hi95` to the target coordinates.
//! Parse errors report the offending line number.

use std::path::Path;

use crate::design::{Locations, Metric};
use crate::error::{Error, Result};
use crate::gp::{Dataset, PredictionResult};
use crate::serialize::fmt_f64;

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {path:?}: {e}")))?;
    Ok(text.lines().map(|s| s.to_string()).collect())
}

fn parse_header(header: &str, want_z: bool, metric: &Metric) -> Result<usize> {
    let cols: Vec<&str> = header.split(',').map(|s| s.trim()).collect();
    let spherical = !matches!(metric, Metric::Euclidean);
    let coord_cols = if want_z { cols.len() - 1 } else { cols.len() };
    if want_z && cols.last().map(|s| s.to_lowercase()) != Some("z".into()) {
        return Err(Error::invalid(format!(
            "line 1: last column must be `z`, got header {header:?}"
        )));
    }
    if spherical {
        if coord_cols != 2 || cols[0].to_lowercase() != "lon" || cols[1].to_lowercase() != "lat" {
            return Err(Error::invalid(format!(
                "line 1: spherical data needs `lon,lat` coordinates, got header {header:?}"
            )));
        }
        return Ok(2);
    }
    if !(1..=3).contains(&coord_cols) {
        return Err(Error::invalid(format!(
            "line 1: expected 1 to 3 coordinate columns, got header {header:?}"
        )));
    }
    for (k, c) in cols.iter().take(coord_cols).enumerate() {
        let expect = format!("x{}", k + 1);
        if c.to_lowercase() != expect {
            return Err(Error::invalid(format!(
                "line 1: coordinate column {} must be `{expect}`, got {c:?}",
                k + 1
            )));
        }
    }
    Ok(coord_cols)
}

fn parse_numeric_row(line: &str, line_no: usize, want: usize) -> Result<Vec<f64>> {
    let cells: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
    if cells.len() != want {
        return Err(Error::invalid(format!(
            "line {line_no}: expected {want} columns, found {}",
            cells.len()
        )));
    }
    cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.parse::<f64>().map_err(|_| {
                Error::invalid(format!(
                    "line {line_no}: column {} is not numeric: {c:?}",
                    k + 1
                ))
            })
        })
        .collect()
}

/// Read observations (`x…,z` rows) under the given metric.
pub fn read_data_csv(path: &Path, metric: Metric) -> Result<Dataset> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(Error::invalid(format!("{path:?} is empty")));
    }
    let d = parse_header(&lines[0], true, &metric)?;
    let mut coords = Vec::new();
    let mut z = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_numeric_row(line, i + 1, d + 1)?;
        coords.push(row[..d].to_vec());
        z.push(row[d]);
    }
    Dataset::new(Locations::new(coords, metric)?, z)
}

/// Read prediction targets (coordinate rows only).
pub fn read_targets_csv(path: &Path, metric: Metric) -> Result<Locations> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(Error::invalid(format!("{path:?} is empty")));
    }
    let d = parse_header(&lines[0], false, &metric)?;
    let mut coords = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        coords.push(parse_numeric_row(line, i + 1, d)?);
    }
    Locations::new(coords, metric)
}

fn coord_header(locs: &Locations) -> String {
    if matches!(locs.metric(), Metric::Euclidean) {
        (1..=locs.dim())
            .map(|k| format!("x{k}"))
            .collect::<Vec<_>>()
            .join(",")
    } else {
        "lon,lat".to_string()
    }
}

/// Data CSV as a string (coordinates plus `z`).
pub fn data_to_csv(data: &Dataset) -> String {
    let mut out = coord_header(&data.locs);
    out.push_str(",z\n");
    for i in 0..data.n() {
        for (k, v) in data.locs.point(i).iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push(',');
        out.push_str(&fmt_f64(data.z[i]));
        out.push('\n');
    }
    out
}

/// Predictions CSV as a string: target coordinates plus `mean,sd,lo95,hi95`.
pub fn predictions_to_csv(targets: &Locations, pred: &PredictionResult) -> String {
    let mut out = coord_header(targets);
    out.push_str(",mean,sd,lo95,hi95\n");
    for i in 0..targets.n() {
        for (k, v) in targets.point(i).iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            fmt_f64(pred.mean[i]),
            fmt_f64(pred.sd[i]),
            fmt_f64(pred.lower95[i]),
            fmt_f64(pred.upper95[i])
        ));
    }
    out
}

/// Realization CSV: coordinates then one column per replicate.
pub fn simulations_to_csv(locs: &Locations, reps: &ndarray::Array2<f64>) -> String {
    let mut out = coord_header(locs);
    for r in 0..reps.nrows() {
        out.push_str(&format!(",rep{r}"));
    }
    out.push('\n');
    for i in 0..locs.n() {
        for (k, v) in locs.point(i).iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        for r in 0..reps.nrows() {
            out.push(',');
            out.push_str(&fmt_f64(reps[[r, i]]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("chgp-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("t{}.csv", rand::random::<u64>()));
        std::fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn roundtrip_data() {
        let p = write_tmp("x1,x2,z\n0.0,0.5,1.25\n1.0,2.0,-0.5\n");
        let d = read_data_csv(&p, Metric::Euclidean).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.locs.point(1), &[1.0, 2.0]);
        assert_eq!(d.z[1], -0.5);
    }

    #[test]
    fn line_numbered_errors() {
        let p = write_tmp("x1,z\n0.0,1.0\n0.5\n");
        let err = read_data_csv(&p, Metric::Euclidean).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("2 columns"), "{err}");

        let p = write_tmp("x1,z\n0.0,abc\n");
        let err = read_data_csv(&p, Metric::Euclidean).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("not numeric"), "{err}");

        let p = write_tmp("a,b,z\n0,0,1\n");
        let err = read_data_csv(&p, Metric::Euclidean).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn spherical_header() {
        let p = write_tmp("lon,lat,z\n10.0,45.0,1.0\n");
        let d = read_data_csv(&p, Metric::chordal_earth()).unwrap();
        assert_eq!(d.locs.dim(), 2);
        let p2 = write_tmp("x1,x2,z\n10.0,45.0,1.0\n");
        assert!(read_data_csv(&p2, Metric::chordal_earth()).is_err());
    }
}
