//! Labelled delimited text files (UCR archive layout: class id first, then
//! the series values) and class-proportional subsampling.

use std::cmp::Ordering;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernels::{Observation, PooledSample};
use crate::rng::Stream;
use crate::stats::LabelVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Rows of the first class followed by rows of the second, each in file order.
    pub pooled: PooledSample,
    pub labels: LabelVector,
    pub source: PathBuf,
    /// Original class ids, index 0 mapped to sample 1 and index 1 to sample 2.
    pub class_map: [String; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelimitedFormat {
    pub delimiter: u8,
    pub label_column: usize,
}

impl Default for DelimitedFormat {
    fn default() -> Self {
        Self { delimiter: b',', label_column: 0 }
    }
}

fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Reads a file with one observation per row. The two class ids are mapped to
/// samples 1 and 2 in ascending order (numeric when both ids parse as numbers).
pub fn load_delimited(path: &Path, format: DelimitedFormat) -> Result<Dataset> {
    let shown = path.display().to_string();
    let parse_err = |line: usize, msg: String| Error::Parse { path: shown.clone(), line, msg };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(format.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(0, format!("{other:?}")),
        })?;

    let mut rows: Vec<(String, Vec<f64>, usize)> = Vec::new();
    let mut width: Option<usize> = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if format.label_column >= record.len() {
            return Err(parse_err(line, format!("no label column {}", format.label_column)));
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(line, format!("expected {w} fields, found {}", record.len())))
            }
            _ => {}
        }
        let mut values = Vec::with_capacity(record.len() - 1);
        let mut label = String::new();
        for (col, field) in record.iter().enumerate() {
            if col == format.label_column {
                if field.is_empty() {
                    return Err(parse_err(line, "missing label".into()));
                }
                label = field.to_string();
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("field {} = {field:?} is not a number", col + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("field {} is not finite", col + 1)));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(parse_err(line, "row has no values".into()));
        }
        rows.push((label, values, line));
    }
    if rows.is_empty() {
        return Err(parse_err(0, "file contains no observations".into()));
    }

    let mut classes: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
    classes.sort_by(|a, b| compare_ids(a, b));
    classes.dedup();
    if classes.len() != 2 {
        return Err(parse_err(
            0,
            format!("expected exactly 2 classes, found {}: {}", classes.len(), classes.join(", ")),
        ));
    }
    let class_map = [classes[0].clone(), classes[1].clone()];
    let (first, second): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.0 == class_map[0]);
    build(first.into_iter().chain(second).map(|r| (r.0, r.1)).collect(), class_map, path)
}

fn build(rows: Vec<(String, Vec<f64>)>, class_map: [String; 2], source: &Path) -> Result<Dataset> {
    let m = rows.iter().filter(|r| r.0 == class_map[0]).count();
    let n = rows.len() - m;
    let points = rows
        .into_iter()
        .map(|r| Observation::new(r.1))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        pooled: PooledSample::new(points, m)?,
        labels: LabelVector::from_counts(m, n)?,
        source: source.to_path_buf(),
        class_map,
    })
}

impl Dataset {
    pub fn m(&self) -> usize {
        self.labels.m()
    }

    pub fn n(&self) -> usize {
        self.labels.n()
    }

    /// Writes the dataset with the original class ids in `format.label_column`.
    pub fn write_delimited<W: Write>(&self, out: W, format: DelimitedFormat) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(format.delimiter)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        for (idx, p) in self.pooled.points().iter().enumerate() {
            let id = &self.class_map[usize::from(idx >= self.m())];
            let mut fields: Vec<String> = p.coords().iter().map(|v| v.to_string()).collect();
            fields.insert(format.label_column.min(fields.len()), id.clone());
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsampleSpec {
    pub total_size: usize,
    pub seed: u64,
}

/// Largest-remainder apportionment of `total` to two classes of sizes
/// `(a, b)`, with each class receiving at least one slot.
pub fn apportion(total: usize, a: usize, b: usize) -> (usize, usize) {
    let size = (a + b) as u128;
    let qa = total as u128 * a as u128;
    let (mut ka, mut kb) = ((qa / size) as usize, (total as u128 * b as u128 / size) as usize);
    if ka + kb < total {
        // Compare fractional parts exactly as residues over a common denominator.
        let ra = qa % size;
        let rb = (total as u128 * b as u128) % size;
        if ra >= rb {
            ka += 1;
        } else {
            kb += 1;
        }
    }
    if ka == 0 {
        ka += 1;
        kb -= 1;
    } else if kb == 0 {
        kb += 1;
        ka -= 1;
    }
    (ka, kb)
}

const SUBSAMPLE_TAG: u64 = 0x5355_4253;

/// Class-proportional subsample drawn without replacement within each class.
/// Selected rows keep their original order.
pub fn subsample(ds: &Dataset, spec: SubsampleSpec) -> Result<Dataset> {
    let total = ds.pooled.len();
    if spec.total_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "subsample size {} must be at least 2",
            spec.total_size
        )));
    }
    if spec.total_size > total {
        return Err(Error::InvalidArgument(format!(
            "subsample size {} exceeds dataset size {total}",
            spec.total_size
        )));
    }
    let (ka, kb) = apportion(spec.total_size, ds.m(), ds.n());
    let pick = |offset: usize, size: usize, k: usize, class: u64| {
        let mut idx: Vec<usize> = (offset..offset + size).collect();
        Stream::new(spec.seed, &[SUBSAMPLE_TAG, class]).shuffle(&mut idx);
        idx.truncate(k);
        idx.sort_unstable();
        idx
    };
    let chosen = pick(0, ds.m(), ka, 0).into_iter().chain(pick(ds.m(), ds.n(), kb, 1));
    let rows = chosen
        .map(|i| {
            let id = ds.class_map[usize::from(i >= ds.m())].clone();
            (id, ds.pooled.points()[i].coords().to_vec())
        })
        .collect();
    build(rows, ds.class_map.clone(), &ds.source)
}
