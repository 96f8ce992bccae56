//! UCR-archive style TSV files: one instance per line, label first, then
//! the values. Trailing empty cells or `NaN` tokens mark a shorter series.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{TimeSeries, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

struct RawRow {
    label: f64,
    values: Vec<f64>,
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').collect()
    } else if line.contains(',') {
        line.split(',').collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_rows(text: &str, has_header: bool) -> Result<Vec<RawRow>> {
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let row = line_no + 1;
        if has_header && line_no == 0 {
            continue;
        }
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if fields.len() < 2 {
            return Err(Error::Format(format!("row {row}: expected a label and values, found {} field(s)", fields.len())));
        }
        let label: f64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { row, message: format!("invalid label '{}'", fields[0].trim()) })?;
        if !label.is_finite() {
            return Err(Error::Parse { row, message: "label is not a finite number".into() });
        }

        let mut values: Vec<Option<f64>> = Vec::with_capacity(fields.len() - 1);
        for tok in &fields[1..] {
            let tok = tok.trim();
            if tok.is_empty() || tok.eq_ignore_ascii_case("nan") {
                values.push(None);
            } else {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Parse { row, message: format!("invalid value '{tok}'") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { row, message: format!("non-finite value '{tok}'") });
                }
                values.push(Some(v));
            }
        }
        while values.last() == Some(&None) {
            values.pop();
        }
        if values.iter().any(Option::is_none) {
            return Err(Error::Format(format!("row {row}: missing value inside the series")));
        }
        let values: Vec<f64> = values.into_iter().flatten().collect();
        if values.len() < 2 {
            return Err(Error::Format(format!(
                "row {row}: series has {} valid value(s), at least 2 are required",
                values.len()
            )));
        }
        rows.push(RawRow { label, values });
    }
    Ok(rows)
}

fn label_name(v: f64) -> String {
    format!("{v}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Loads a univariate UCR-style file. Labels are renumbered to `0..k` in
/// ascending order of their numeric value.
pub fn load_ucr_tsv<T: Scalar>(path: impl AsRef<Path>, has_header: bool) -> Result<TimeSeriesDataset<T>> {
    load_ucr_channels(&[path.as_ref()], has_header)
}

/// Loads a multivariate dataset stored as one file per channel with
/// identical row order.
pub fn load_ucr_channels<T: Scalar, P: AsRef<Path>>(paths: &[P], has_header: bool) -> Result<TimeSeriesDataset<T>> {
    let first = paths.first().ok_or_else(|| Error::Config("no input files given".into()))?.as_ref();
    let channels: Vec<Vec<RawRow>> = paths
        .iter()
        .map(|p| read(p.as_ref()).and_then(|text| parse_rows(&text, has_header)))
        .collect::<Result<_>>()?;

    let n = channels[0].len();
    for (c, rows) in channels.iter().enumerate().skip(1) {
        if rows.len() != n {
            return Err(Error::Format(format!(
                "channel file {} has {} rows, expected {n}",
                paths[c].as_ref().display(),
                rows.len()
            )));
        }
    }

    let d = channels.len();
    let mut instances = Vec::with_capacity(n);
    let mut raw_labels = Vec::with_capacity(n);
    for i in 0..n {
        let row0 = &channels[0][i];
        let t = row0.values.len();
        for (c, rows) in channels.iter().enumerate().skip(1) {
            if rows[i].label != row0.label {
                return Err(Error::Format(format!("row {}: channel {c} label disagrees with channel 0", i + 1)));
            }
            if rows[i].values.len() != t {
                return Err(Error::Format(format!("row {}: channel {c} length disagrees with channel 0", i + 1)));
            }
        }
        let mut data = Vec::with_capacity(t * d);
        for step in 0..t {
            for rows in &channels {
                data.push(T::lit(rows[i].values[step]));
            }
        }
        instances.push(TimeSeries::new(Matrix::from_vec(t, d, data)?)?);
        raw_labels.push(row0.label);
    }

    let mut distinct = raw_labels.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    distinct.dedup();
    let labels = raw_labels
        .iter()
        .map(|v| distinct.iter().position(|d| d == v).expect("label present"))
        .collect();
    let names = distinct.into_iter().map(label_name).collect();
    let mut name = dataset_name(first);
    if d > 1 {
        if let Some(stripped) = name.strip_suffix("_dim0").or_else(|| name.strip_suffix("_dim1")) {
            name = stripped.to_string();
        }
    }
    TimeSeriesDataset::labeled(name, instances, labels, names)
}

/// Loads `<dir>/<name>_dim<i>.tsv` for every channel index present, in
/// increasing channel order.
pub fn load_ucr_dir<T: Scalar>(dir: impl AsRef<Path>, name: &str, has_header: bool) -> Result<TimeSeriesDataset<T>> {
    let dir = dir.as_ref();
    let prefix = format!("{name}_dim");
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let Some(file) = path.file_name().and_then(|f| f.to_str()) else { continue };
        if let Some(idx) = file.strip_prefix(&prefix).and_then(|rest| rest.strip_suffix(".tsv")) {
            if let Ok(i) = idx.parse::<usize>() {
                found.push((i, path));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::Format(format!("no files matching {prefix}<i>.tsv in {}", dir.display())));
    }
    found.sort();
    let paths: Vec<PathBuf> = found.into_iter().map(|(_, p)| p).collect();
    let mut ds = load_ucr_channels(&paths, has_header)?;
    ds.name = name.to_string();
    Ok(ds)
}

/// Writes a labeled univariate dataset in UCR TSV layout.
pub fn write_ucr_tsv<T: Scalar>(ds: &TimeSeriesDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if ds.channels() != 1 {
        return Err(Error::Shape(format!("UCR TSV holds one channel, dataset has {}", ds.channels())));
    }
    let labels = ds
        .labels()
        .ok_or_else(|| Error::Contract("only labeled datasets can be written as UCR TSV".into()))?;
    let mut out = String::new();
    for (s, &l) in ds.instances().iter().zip(labels) {
        out.push_str(&ds.class_names()[l]);
        for v in s.values().as_slice() {
            out.push('\t');
            out.push_str(&format!("{v:e}"));
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
