use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// The three supported UCI distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    /// `id, M|B, 30 reals`
    Wdbc,
    /// `4 reals, species`
    Iris,
    /// `4 reals, 0|1`
    Banknote,
}

const WDBC_MEASURES: [&str; 10] = [
    "radius",
    "texture",
    "perimeter",
    "area",
    "smoothness",
    "compactness",
    "concavity",
    "concave_points",
    "symmetry",
    "fractal_dimension",
];

impl DatasetKind {
    pub const ALL: [DatasetKind; 3] = [DatasetKind::Wdbc, DatasetKind::Iris, DatasetKind::Banknote];

    /// File name of the UCI distribution.
    pub fn file_name(&self) -> &'static str {
        match self {
            DatasetKind::Wdbc => "wdbc.data",
            DatasetKind::Iris => "iris.data",
            DatasetKind::Banknote => "data_banknote_authentication.txt",
        }
    }

    pub fn default_path(&self, data_dir: &Path) -> PathBuf {
        data_dir.join(self.file_name())
    }

    pub fn feature_names(&self) -> Vec<String> {
        match self {
            DatasetKind::Wdbc => ["mean", "se", "worst"]
                .iter()
                .flat_map(|stat| WDBC_MEASURES.iter().map(move |m| format!("{m}_{stat}")))
                .collect(),
            DatasetKind::Iris => ["sepal_length", "sepal_width", "petal_length", "petal_width"]
                .map(String::from)
                .to_vec(),
            DatasetKind::Banknote => ["variance", "skewness", "curtosis", "entropy"]
                .map(String::from)
                .to_vec(),
        }
    }

    pub fn class_names(&self) -> Vec<String> {
        match self {
            DatasetKind::Wdbc => vec!["B".into(), "M".into()],
            DatasetKind::Iris => vec!["Iris-setosa".into(), "Iris-versicolor".into(), "Iris-virginica".into()],
            DatasetKind::Banknote => vec!["0".into(), "1".into()],
        }
    }

    fn columns(&self) -> usize {
        match self {
            DatasetKind::Wdbc => 32,
            DatasetKind::Iris | DatasetKind::Banknote => 5,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Wdbc => "wdbc",
            DatasetKind::Iris => "iris",
            DatasetKind::Banknote => "banknote",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wdbc" | "breast-cancer" => Ok(DatasetKind::Wdbc),
            "iris" => Ok(DatasetKind::Iris),
            "banknote" | "bank-note" => Ok(DatasetKind::Banknote),
            other => Err(DataError::UnknownDataset(other.to_string())),
        }
    }
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a UCI file. Blank lines are skipped; any other deviation is an
/// error naming the 1-based line number.
pub fn load_dataset(path: &Path, kind: DatasetKind) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);

    let class_names = kind.class_names();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let bad = |message: String| DataError::Malformed {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() != kind.columns() {
            return Err(bad(format!("expected {} columns, found {}", kind.columns(), record.len())));
        }
        let (class_field, value_fields): (&str, Vec<&str>) = match kind {
            DatasetKind::Wdbc => (&record[1], record.iter().skip(2).collect()),
            DatasetKind::Iris | DatasetKind::Banknote => (&record[4], record.iter().take(4).collect()),
        };
        let row = value_fields
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| bad(format!("'{v}' is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let label = class_names
            .iter()
            .position(|c| c == class_field)
            .ok_or_else(|| bad(format!("unknown class '{class_field}'")))?;
        features.push(row);
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    Dataset::new(kind.to_string(), features, labels, kind.feature_names(), class_names)
}

/// Writes the internal CSV format: header of feature names plus `label`,
/// then one row per instance with the label as a class index.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<(), DataError> {
    let file = File::create(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = dataset.feature_names.clone();
    header.push("label".into());
    w.write_record(&header)?;
    for (row, label) in dataset.features.iter().zip(&dataset.labels) {
        let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        fields.push(label.to_string());
        w.write_record(&fields)?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Reads a file written by [`write_csv`].
pub fn read_csv(path: &Path, name: &str, class_names: Vec<String>) -> Result<Dataset, DataError> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let header = reader.headers()?.clone();
    if header.iter().next_back() != Some("label") {
        return Err(DataError::Malformed {
            path: path.to_path_buf(),
            line: 1,
            message: "last column must be 'label'".into(),
        });
    }
    let width = header.len() - 1;
    let feature_names = header.iter().take(width).map(String::from).collect();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| DataError::Malformed {
            path: path.to_path_buf(),
            line,
            message,
        };
        let row = record
            .iter()
            .take(width)
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("'{v}' is not a number"))))
            .collect::<Result<Vec<_>, _>>()?;
        let label = record[width]
            .parse::<usize>()
            .map_err(|_| bad(format!("'{}' is not a class index", &record[width])))?;
        features.push(row);
        labels.push(label);
    }
    Dataset::new(name, features, labels, feature_names, class_names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_iris_rows() {
        let f = write_tmp("5.1,3.5,1.4,0.2,Iris-setosa\n\n6.3,3.3,6.0,2.5,Iris-virginica\n");
        let d = load_dataset(f.path(), DatasetKind::Iris).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.labels, vec![0, 2]);
        assert_eq!(d.features[1], vec![6.3, 3.3, 6.0, 2.5]);
    }

    #[test]
    fn parses_wdbc_rows() {
        let values: Vec<String> = (0..30).map(|i| format!("{}.5", i)).collect();
        let f = write_tmp(&format!("842302,M,{}\n", values.join(",")));
        let d = load_dataset(f.path(), DatasetKind::Wdbc).unwrap();
        assert_eq!(d.num_features(), 30);
        assert_eq!(d.labels, vec![1]);
        assert_eq!(d.features[0][29], 29.5);
        assert_eq!(d.feature_names[0], "radius_mean");
        assert_eq!(d.feature_names[29], "fractal_dimension_worst");
    }

    #[test]
    fn reports_line_of_bad_row() {
        let f = write_tmp("3.6,8.6,-2.8,-0.4,0\n1.0,2.0,x,4.0,1\n");
        match load_dataset(f.path(), DatasetKind::Banknote) {
            Err(DataError::Malformed { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("'x'"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_columns_and_classes() {
        let f = write_tmp("3.6,8.6,-2.8,0\n");
        assert!(matches!(
            load_dataset(f.path(), DatasetKind::Banknote),
            Err(DataError::Malformed { line: 1, .. })
        ));
        let f = write_tmp("5.1,3.5,1.4,0.2,Iris-unknown\n");
        let err = load_dataset(f.path(), DatasetKind::Iris).unwrap_err();
        assert!(err.to_string().contains("unknown class"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_dataset(Path::new("/nonexistent/iris.data"), DatasetKind::Iris).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("IRIS".parse::<DatasetKind>().unwrap(), DatasetKind::Iris);
        assert!("mnist".parse::<DatasetKind>().is_err());
    }
}
