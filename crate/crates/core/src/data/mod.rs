//! Tabular datasets: schema-checked CSV ingestion, z-score standardization,
//! a synthetic generator with planted (group, resource) effects, and a
//! group-stratified train/eval split.
//!
//! Files are UTF-8 CSV with a header row, comma separators and '.' decimals.
//! Features are written in `{:.8e}` form (nine significant digits), which is
//! what the round-trip guarantee refers to.

mod split;
mod synth;

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{GroupId, ResourceId};

pub use split::{split, SplitReport};
pub use synth::{generate_synthetic, SyntheticData, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Continuous,
    Binary,
}

/// Column layout of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    pub id_column: String,
    pub group_column: String,
    pub outcome_column: String,
    pub feature_columns: Vec<String>,
    /// Integer resource id of the historical allocation; absent means
    /// every row received resource 0.
    #[serde(default)]
    pub resource_column: Option<String>,
    pub outcome_kind: OutcomeKind,
}

impl DatasetSchema {
    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(Error::Schema("at least one feature column is required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        let named = [&self.id_column, &self.group_column, &self.outcome_column]
            .into_iter()
            .chain(self.resource_column.as_ref())
            .chain(&self.feature_columns);
        for c in named {
            if !seen.insert(c.as_str()) {
                return Err(Error::Schema(format!("column {c:?} is used twice")));
            }
        }
        Ok(())
    }

    /// Header written by [`write_csv`].
    pub fn header(&self) -> Vec<&str> {
        let mut h = vec![self.id_column.as_str(), self.group_column.as_str()];
        h.extend(self.resource_column.as_deref());
        h.push(&self.outcome_column);
        h.extend(self.feature_columns.iter().map(String::as_str));
        h
    }
}

/// One historical observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub id: String,
    pub group: GroupId,
    pub resource: ResourceId,
    pub features: Vec<f64>,
    pub outcome: f64,
}

/// Dense ids for opaque group labels, assigned in sorted label order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupMap {
    labels: Vec<String>,
}

impl GroupMap {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut labels: Vec<String> = labels.into_iter().map(str::to_owned).collect();
        labels.sort();
        labels.dedup();
        Self { labels }
    }

    pub fn lookup(&self, label: &str) -> Result<GroupId> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).map_err(|_| Error::Mapping(label.to_owned()))
    }

    pub fn label(&self, k: GroupId) -> &str {
        &self.labels[k]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: DatasetSchema,
    pub groups: GroupMap,
    pub rows: Vec<DataRow>,
}

impl Dataset {
    pub fn n_features(&self) -> usize {
        self.schema.feature_columns.len()
    }

    pub fn n_resources(&self) -> usize {
        self.rows.iter().map(|r| r.resource + 1).max().unwrap_or(0)
    }
}

/// Per-column z-score parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Columns whose sd was zero and replaced by 1.
    pub constant: Vec<usize>,
}

impl Standardization {
    /// Population mean and sd of each feature over `rows`.
    pub fn fit(rows: &[DataRow]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Domain("cannot standardize an empty set".into()))?;
        let d = first.features.len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, x) in means.iter_mut().zip(&r.features) {
                *m += x / n;
            }
        }
        let mut sds = vec![0.0; d];
        for r in rows {
            for ((s, x), m) in sds.iter_mut().zip(&r.features).zip(&means) {
                *s += (x - m).powi(2) / n;
            }
        }
        let mut constant = Vec::new();
        for (j, s) in sds.iter_mut().enumerate() {
            *s = s.sqrt();
            if *s < 1e-12 {
                *s = 1.0;
                constant.push(j);
            }
        }
        Ok(Self { means, sds, constant })
    }

    pub fn apply(&self, rows: &mut [DataRow]) {
        for r in rows {
            for ((x, m), s) in r.features.iter_mut().zip(&self.means).zip(&self.sds) {
                *x = (*x - m) / s;
            }
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.means).zip(&self.sds).map(|((x, m), s)| (x - m) / s).collect()
    }
}

/// What happened while loading a file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadReport {
    pub rows: usize,
    /// One-based data row numbers skipped for empty cells.
    pub rejected_rows: Vec<usize>,
    /// Feature columns with zero variance (sd replaced by 1).
    pub constant_columns: Vec<String>,
}

fn parse_outcome(cell: &str, kind: OutcomeKind, row: usize) -> Result<f64> {
    let bad = |detail: String| Error::Parse { row, detail };
    match kind {
        OutcomeKind::Continuous => {
            let y: f64 = cell.parse().map_err(|_| bad(format!("outcome {cell:?} is not numeric")))?;
            if y.is_finite() { Ok(y) } else { Err(bad(format!("outcome {cell:?} is not finite"))) }
        }
        OutcomeKind::Binary => match cell.to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" => Ok(1.0),
            "0" | "false" | "no" => Ok(0.0),
            other => match other.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(if v > 0.5 { 1.0 } else { 0.0 }),
                _ => Err(bad(format!("outcome {cell:?} is not binary"))),
            },
        },
    }
}

/// Parse a dataset without standardizing. With `groups` given, labels
/// outside it are a mapping error; otherwise the map is built from the file.
pub fn read_csv_from<R: Read>(
    reader: R,
    schema: &DatasetSchema,
    groups: Option<&GroupMap>,
) -> Result<(Dataset, LoadReport)> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let id_c = col(&schema.id_column)?;
    let group_c = col(&schema.group_column)?;
    let outcome_c = col(&schema.outcome_column)?;
    let resource_c = schema.resource_column.as_deref().map(col).transpose()?;
    let feature_c: Vec<usize> = schema.feature_columns.iter().map(|c| col(c)).collect::<Result<_>>()?;

    let mut report = LoadReport::default();
    let mut raw = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec?;
        let cell = |c: usize| rec.get(c).map(str::trim).unwrap_or("");
        let used = [id_c, group_c, outcome_c].into_iter().chain(resource_c).chain(feature_c.iter().copied());
        if used.clone().any(|c| cell(c).is_empty()) {
            report.rejected_rows.push(row);
            continue;
        }
        let features = feature_c
            .iter()
            .map(|&c| {
                cell(c)
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse { row, detail: format!("feature {:?} is not numeric", cell(c)) })
            })
            .collect::<Result<Vec<f64>>>()?;
        let resource = match resource_c {
            Some(c) => cell(c)
                .parse::<usize>()
                .map_err(|_| Error::Parse { row, detail: format!("resource {:?} is not an integer", cell(c)) })?,
            None => 0,
        };
        let outcome = parse_outcome(cell(outcome_c), schema.outcome_kind, row)?;
        raw.push((cell(id_c).to_owned(), cell(group_c).to_owned(), resource, features, outcome));
    }
    let groups = match groups {
        Some(g) => g.clone(),
        None => GroupMap::from_labels(raw.iter().map(|r| r.1.as_str())),
    };
    let rows = raw
        .into_iter()
        .map(|(id, g, resource, features, outcome)| {
            Ok(DataRow { id, group: groups.lookup(&g)?, resource, features, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    report.rows = rows.len();
    Ok((Dataset { schema: schema.clone(), groups, rows }, report))
}

pub fn read_csv(path: &Path, schema: &DatasetSchema) -> Result<(Dataset, LoadReport)> {
    read_csv_from(std::fs::File::open(path)?, schema, None)
}

/// Load and z-score every feature with statistics of the whole file.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<(Dataset, Standardization, LoadReport)> {
    let (mut data, mut report) = read_csv(path, schema)?;
    let stats = Standardization::fit(&data.rows)?;
    stats.apply(&mut data.rows);
    report.constant_columns = stats.constant.iter().map(|&j| schema.feature_columns[j].clone()).collect();
    Ok((data, stats, report))
}

pub fn write_csv_to<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(data.schema.header())?;
    for r in &data.rows {
        let mut rec = vec![r.id.clone(), data.groups.label(r.group).to_owned()];
        if data.schema.resource_column.is_some() {
            rec.push(r.resource.to_string());
        }
        rec.push(match data.schema.outcome_kind {
            OutcomeKind::Binary => format!("{}", r.outcome as u8),
            OutcomeKind::Continuous => format!("{:.8e}", r.outcome),
        });
        rec.extend(r.features.iter().map(|x| format!("{x:.8e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, data: &Dataset) -> Result<()> {
    write_csv_to(std::fs::File::create(path)?, data)
}

/// Rows grouped by dense group id, preserving order.
pub(crate) fn rows_by_group(rows: &[DataRow]) -> BTreeMap<GroupId, Vec<usize>> {
    let mut out: BTreeMap<GroupId, Vec<usize>> = BTreeMap::new();
    for (j, r) in rows.iter().enumerate() {
        out.entry(r.group).or_default().push(j);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(features: &[&str], kind: OutcomeKind) -> DatasetSchema {
        DatasetSchema {
            id_column: "id".into(),
            group_column: "group".into(),
            outcome_column: "y".into(),
            feature_columns: features.iter().map(|s| s.to_string()).collect(),
            resource_column: None,
            outcome_kind: kind,
        }
    }

    fn load(text: &str, s: &DatasetSchema) -> Result<(Dataset, Standardization, LoadReport)> {
        let (mut d, mut rep) = read_csv_from(text.as_bytes(), s, None)?;
        let st = Standardization::fit(&d.rows)?;
        st.apply(&mut d.rows);
        rep.constant_columns = st.constant.iter().map(|&j| s.feature_columns[j].clone()).collect();
        Ok((d, st, rep))
    }

    #[test]
    fn three_rows_are_standardized() {
        let s = schema(&["a", "b"], OutcomeKind::Continuous);
        let (d, _, rep) = load("id,group,y,a,b\n1,x,0.5,1,10\n2,y,0.1,2,20\n3,x,0.2,3,60\n", &s).unwrap();
        assert_eq!(d.rows.len(), 3);
        assert!(rep.constant_columns.is_empty());
        for j in 0..2 {
            let col: Vec<f64> = d.rows.iter().map(|r| r.features[j]).collect();
            let m = col.iter().sum::<f64>() / 3.0;
            let v = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 3.0;
            assert!(m.abs() < 1e-12 && (v.sqrt() - 1.0).abs() < 1e-12);
        }
        assert_eq!(d.rows[1].group, 1);
        assert_eq!(d.groups.label(0), "x");
    }

    #[test]
    fn jobs_shaped_binary_file() {
        let names: Vec<String> = (0..8).map(|j| format!("x{j}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let s = schema(&refs, OutcomeKind::Binary);
        let mut text = format!("id,group,y,{}\n", names.join(","));
        for i in 0..5 {
            let feats: Vec<String> = (0..8).map(|j| format!("{}", i * j)).collect();
            text += &format!("{i},g{},{},{}\n", i % 2, if i % 2 == 0 { "yes" } else { "0" }, feats.join(","));
        }
        let (d, _, rep) = load(&text, &s).unwrap();
        assert_eq!(d.schema.outcome_kind, OutcomeKind::Binary);
        assert_eq!(d.n_features(), 8);
        assert_eq!(d.rows.iter().map(|r| r.outcome).collect::<Vec<_>>(), vec![1.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(rep.constant_columns, vec!["x0".to_string()]);
    }

    #[test]
    fn constant_column_keeps_unit_sd() {
        let s = schema(&["a"], OutcomeKind::Continuous);
        let (d, st, rep) = load("id,group,y,a\n1,g,0,4\n2,g,1,4\n", &s).unwrap();
        assert_eq!(st.sds, vec![1.0]);
        assert_eq!(rep.constant_columns, vec!["a".to_string()]);
        assert!(d.rows.iter().all(|r| r.features == vec![0.0]));
    }

    #[test]
    fn schema_and_parse_errors() {
        let s = schema(&["a"], OutcomeKind::Continuous);
        assert!(matches!(read_csv_from("id,group,y\n1,g,0\n".as_bytes(), &s, None), Err(Error::Schema(_))));
        match read_csv_from("id,group,y,a\n1,g,0,1\n2,g,0,abc\n".as_bytes(), &s, None) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let mut dup = s.clone();
        dup.feature_columns.push("y".into());
        assert!(matches!(dup.validate(), Err(Error::Schema(_))));
        assert!(matches!(schema(&[], OutcomeKind::Binary).validate(), Err(Error::Schema(_))));
    }

    #[test]
    fn unseen_group_is_a_mapping_error() {
        let s = schema(&["a"], OutcomeKind::Continuous);
        let known = GroupMap::from_labels(["g"]);
        let r = read_csv_from("id,group,y,a\n1,h,0,1\n".as_bytes(), &s, Some(&known));
        assert!(matches!(r, Err(Error::Mapping(l)) if l == "h"));
    }

    #[test]
    fn rows_with_empty_cells_are_rejected() {
        let s = schema(&["a"], OutcomeKind::Continuous);
        let (d, rep) = read_csv_from("id,group,y,a\n1,g,0,1\n2,g,,1\n3,g,1,2\n".as_bytes(), &s, None).unwrap();
        assert_eq!(d.rows.len(), 2);
        assert_eq!(rep.rejected_rows, vec![2]);
    }

    #[test]
    fn resource_column_is_read() {
        let mut s = schema(&["a"], OutcomeKind::Continuous);
        s.resource_column = Some("r".into());
        let (d, _) = read_csv_from("id,group,r,y,a\n1,g,1,0,1\n2,g,0,0,1\n".as_bytes(), &s, None).unwrap();
        assert_eq!(d.rows.iter().map(|r| r.resource).collect::<Vec<_>>(), vec![1, 0]);
        assert_eq!(d.n_resources(), 2);
    }
}
