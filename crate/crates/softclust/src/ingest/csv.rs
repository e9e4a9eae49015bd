use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// How to find the label column in a delimited file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

/// Parsing options for tabular input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub has_header: bool,
    pub label_column: Option<LabelColumn>,
    pub delimiter: u8,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            has_header: true,
            label_column: None,
            delimiter: b',',
        }
    }
}

fn csv_error(err: csv::Error) -> Error {
    match err.kind() {
        csv::ErrorKind::Io(_) => match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => {
            let row = err
                .position()
                .map(|p| p.record() as usize)
                .unwrap_or(0);
            Error::Parse {
                row,
                column: 0,
                message: err.to_string(),
            }
        }
    }
}

/// Loads a delimited text file into a [`Dataset`], peeling off the label
/// column when the schema names one and min-max normalizing on request.
pub fn load_csv(path: &Path, schema: &CsvSchema, normalize: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .delimiter(schema.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;

    let headers: Option<Vec<String>> = if schema.has_header {
        Some(
            reader
                .headers()
                .map_err(csv_error)?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let mut records: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let mut label_idx: Option<usize> = None;

    for (row, result) in reader.records().enumerate() {
        let record = result.map_err(csv_error)?;
        if width.is_none() {
            let w = record.len();
            label_idx = match &schema.label_column {
                None => None,
                Some(LabelColumn::Index(i)) => {
                    if *i >= w {
                        return Err(Error::Schema(format!(
                            "label column index {i} out of range for {w} columns"
                        )));
                    }
                    Some(*i)
                }
                Some(LabelColumn::Name(name)) => {
                    let hs = headers.as_ref().ok_or_else(|| {
                        Error::Schema(format!(
                            "label column \"{name}\" requested but the file has no header"
                        ))
                    })?;
                    Some(hs.iter().position(|h| h == name).ok_or_else(|| {
                        Error::Schema(format!("label column \"{name}\" not found in header"))
                    })?)
                }
            };
            width = Some(w);
        }
        let mut features = Vec::with_capacity(record.len());
        for (column, cell) in record.iter().enumerate() {
            if Some(column) == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column,
                message: format!("expected a number, found {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            features.push(value);
        }
        records.push(features);
    }

    if records.is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "file contains no data rows".into(),
        });
    }

    let n = records[0].len();
    let feature_names: Vec<String> = match &headers {
        Some(hs) => hs
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, h)| h.clone())
            .collect(),
        None => (0..n).map(|j| format!("f{j}")).collect(),
    };

    let mut data = Dataset::new(records, feature_names)?;
    if label_idx.is_some() {
        data = data.with_labels(labels)?;
    }
    if normalize {
        data.normalize();
    }
    Ok(data)
}

/// Writes a dataset as comma-separated text with a header row; a trailing
/// `label` column is appended when labels are present. Values print in
/// shortest round-trip form, so write∘load is exact.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header: Vec<String> = dataset.feature_names().to_vec();
    if dataset.labels().is_some() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(csv_error)?;
    for k in 0..dataset.n_records() {
        let mut cells: Vec<String> = dataset.record(k).iter().map(|v| format!("{v}")).collect();
        if let Some(labels) = dataset.labels() {
            cells.push(labels[k].clone());
        }
        w.write_record(&cells).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
