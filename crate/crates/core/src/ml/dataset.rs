use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use super::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),
    #[error("dataset has no rows")]
    Empty,
    #[error("dataset has a single class; at least two are required")]
    SingleClass,
    #[error("row {row} has a missing label")]
    MissingLabel { row: usize },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Numeric feature matrix with index-encoded class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if features.rows() != labels.len() {
            return Err(DatasetError::Invalid(format!("{} feature rows but {} labels", features.rows(), labels.len())));
        }
        if feature_names.len() != features.cols() {
            return Err(DatasetError::Invalid(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(DatasetError::Invalid(format!("label index {bad} without a class name")));
        }
        Ok(Self { features, labels, class_names, feature_names })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn has_missing(&self) -> bool {
        self.features.has_missing()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, keeping the full class list.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Writes the dataset as CSV with the label in the last column.
    pub fn write_csv(&self, path: &Path, label_column: &str) -> Result<(), DatasetError> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(label_column);
        writer.write_record(&header)?;
        for (row, &label) in self.features.iter_rows().zip(&self.labels) {
            let mut record: Vec<String> =
                row.iter().map(|v| if v.is_nan() { "?".into() } else { format!("{v:?}") }).collect();
            record.push(self.class_names[label].clone());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Loads a CSV with a header row.
///
/// Columns whose non-missing cells all parse as numbers stay numeric; other
/// columns are one-hot encoded with categories in lexicographic order (named
/// `column=value`). Cells equal to `missing_token` become `NaN` (all one-hot
/// columns of a categorical cell). Labels are index-encoded in lexicographic
/// order of their text.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str, missing_token: &str) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    read_csv(file, label_column, missing_token)
}

pub fn read_csv<R: Read>(reader: R, label_column: &str, missing_token: &str) -> Result<Dataset, DatasetError> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn(label_column.to_string()))?;

    let mut cells: Vec<Vec<String>> = Vec::new();
    for record in csv.records() {
        let record = record?;
        cells.push(record.iter().map(str::to_string).collect());
    }
    if cells.is_empty() {
        return Err(DatasetError::Empty);
    }

    let mut raw_labels = Vec::with_capacity(cells.len());
    for (row, record) in cells.iter().enumerate() {
        let label = &record[label_idx];
        if label.is_empty() || label == missing_token {
            return Err(DatasetError::MissingLabel { row });
        }
        raw_labels.push(label.as_str());
    }
    let class_names: Vec<String> =
        raw_labels.iter().copied().collect::<BTreeSet<_>>().into_iter().map(str::to_string).collect();
    if class_names.len() < 2 {
        return Err(DatasetError::SingleClass);
    }
    let class_index: BTreeMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|l| class_index[l]).collect();

    enum Column {
        Numeric(usize),
        Categorical(usize, Vec<String>),
    }
    let mut columns = Vec::new();
    let mut feature_names = Vec::new();
    for (j, name) in header.iter().enumerate() {
        if j == label_idx {
            continue;
        }
        let present = cells.iter().map(|r| r[j].as_str()).filter(|c| *c != missing_token);
        let numeric = present.clone().all(|c| c.parse::<f64>().is_ok());
        if numeric {
            columns.push(Column::Numeric(j));
            feature_names.push(name.clone());
        } else {
            let categories: Vec<String> = present.collect::<BTreeSet<_>>().into_iter().map(str::to_string).collect();
            feature_names.extend(categories.iter().map(|c| format!("{name}={c}")));
            columns.push(Column::Categorical(j, categories));
        }
    }

    let mut data = Vec::with_capacity(cells.len() * feature_names.len());
    for record in &cells {
        for column in &columns {
            match column {
                Column::Numeric(j) => {
                    let cell = &record[*j];
                    data.push(if cell == missing_token { f64::NAN } else { cell.parse().expect("checked numeric") });
                }
                Column::Categorical(j, categories) => {
                    let cell = &record[*j];
                    if cell == missing_token {
                        data.extend(std::iter::repeat_n(f64::NAN, categories.len()));
                    } else {
                        data.extend(categories.iter().map(|c| if c == cell { 1.0 } else { 0.0 }));
                    }
                }
            }
        }
    }
    let features = Matrix::new(cells.len(), feature_names.len(), data);
    Dataset::new(features, labels, class_names, feature_names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categorical_one_hot_is_lexicographic() {
        let csv = "colour,size,class\nred,1,b\nblue,2,a\nred,3,b\n";
        let ds = read_csv(csv.as_bytes(), "class", "?").unwrap();
        assert_eq!(ds.feature_names(), &["colour=blue", "colour=red", "size"]);
        assert_eq!(ds.features().row(0), &[0.0, 1.0, 1.0]);
        assert_eq!(ds.features().row(1), &[1.0, 0.0, 2.0]);
        assert_eq!(ds.class_names(), &["a", "b"]);
        assert_eq!(ds.labels(), &[1, 0, 1]);
    }

    #[test]
    fn missing_token_becomes_nan() {
        let csv = "x,y,label\n1,?,a\n2,3,b\n";
        let ds = read_csv(csv.as_bytes(), "label", "?").unwrap();
        assert!(ds.features().get(0, 1).is_nan());
        assert_eq!(ds.features().get(1, 1), 3.0);
        assert!(ds.has_missing());
    }

    #[test]
    fn errors() {
        assert!(matches!(read_csv("x,y\n1,2\n".as_bytes(), "label", "?"), Err(DatasetError::MissingLabelColumn(_))));
        assert!(matches!(read_csv("x,label\n".as_bytes(), "label", "?"), Err(DatasetError::Empty)));
        assert!(matches!(read_csv("x,label\n1,a\n2,a\n".as_bytes(), "label", "?"), Err(DatasetError::SingleClass)));
        assert!(matches!(
            read_csv("x,label\n1,a\n2,?\n".as_bytes(), "label", "?"),
            Err(DatasetError::MissingLabel { row: 1 })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let csv = "f0,f1,label\n0.5,?,no\n-1.25,3.0,yes\n";
        let ds = read_csv(csv.as_bytes(), "label", "?").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        ds.write_csv(&path, "label").unwrap();
        let back = load_csv(&path, "label", "?").unwrap();
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.features().get(1, 0), -1.25);
        assert!(back.features().get(0, 1).is_nan());
    }
}
