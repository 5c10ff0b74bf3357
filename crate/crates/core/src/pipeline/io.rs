//! Monitor-table CSV ingestion and emission.
//!
//! Schema (exact header):
//! `monitor_id,x_log_sat,y_log_pm25,region_who,region_cluster,country`
//!
//! A table carries both super-region labelings; a [`Dataset`] is a view of
//! the table under one grouping. Rows with a missing y value are dropped and
//! reported by line number; malformed rows are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::real::Real;

pub const MONITOR_CSV_HEADER: [&str; 6] =
    ["monitor_id", "x_log_sat", "y_log_pm25", "region_who", "region_cluster", "country"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupBy {
    Who,
    Cluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorTable<R: Real> {
    pub monitor_id: Vec<String>,
    pub x: Vec<R>,
    pub y: Vec<R>,
    pub region_who: Vec<String>,
    pub region_cluster: Vec<String>,
    pub country: Vec<String>,
}

impl<R: Real> MonitorTable<R> {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// View the table as a dataset grouped by one of the region labelings,
    /// group indices assigned in order of first appearance.
    pub fn dataset(&self, by: GroupBy) -> Result<Dataset<R>> {
        self.dataset_with_groups(by, None)
    }

    /// Like [`dataset`](Self::dataset) but with a fixed group-name universe;
    /// labels outside it are an error (used when data must align with an
    /// existing fit or template).
    pub fn dataset_with_groups(
        &self,
        by: GroupBy,
        known: Option<&[String]>,
    ) -> Result<Dataset<R>> {
        let labels = match by {
            GroupBy::Who => &self.region_who,
            GroupBy::Cluster => &self.region_cluster,
        };
        let mut names: Vec<String> = known.map(|k| k.to_vec()).unwrap_or_default();
        let mut group = Vec::with_capacity(labels.len());
        for label in labels {
            match names.iter().position(|n| n == label) {
                Some(idx) => group.push(idx),
                None if known.is_none() => {
                    names.push(label.clone());
                    group.push(names.len() - 1);
                }
                None => {
                    return Err(Error::invalid(format!("unknown group label {label:?}")));
                }
            }
        }
        let country = if self.country.iter().all(|c| c.is_empty()) {
            None
        } else {
            Some(self.country.clone())
        };
        Dataset::new(self.x.clone(), self.y.clone(), group, names, country)
    }

    /// Rebuild a table from a dataset; both region columns carry the
    /// dataset's group names.
    pub fn from_dataset(ds: &Dataset<R>) -> Self {
        let n = ds.n();
        MonitorTable {
            monitor_id: (1..=n).map(|i| format!("m{i}")).collect(),
            x: ds.x.clone(),
            y: ds.y.clone(),
            region_who: ds.group.iter().map(|&g| ds.group_names[g].clone()).collect(),
            region_cluster: ds.group.iter().map(|&g| ds.group_names[g].clone()).collect(),
            country: match &ds.country {
                Some(c) => c.clone(),
                None => vec![String::new(); n],
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvLoad<R: Real> {
    pub table: MonitorTable<R>,
    /// WHO-grouped view (the default grouping).
    pub dataset: Dataset<R>,
    /// 1-based file line numbers of rows dropped for missing y.
    pub skipped_rows: Vec<usize>,
}

/// Read a monitor CSV. Rows with an empty y field are dropped and their line
/// numbers returned; anything else malformed is an error.
pub fn read_monitor_csv<R: Real>(path: impl AsRef<Path>) -> Result<(MonitorTable<R>, Vec<usize>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path.as_ref())?;
    {
        let header = reader.headers()?;
        let expected: Vec<&str> = MONITOR_CSV_HEADER.to_vec();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(Error::parse(1, format!("expected header {}", expected.join(","))));
        }
    }
    let mut table = MonitorTable {
        monitor_id: vec![],
        x: vec![],
        y: vec![],
        region_who: vec![],
        region_cluster: vec![],
        country: vec![],
    };
    let mut skipped = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 6 {
            return Err(Error::parse(line, format!("expected 6 fields, got {}", record.len())));
        }
        if record[2].trim().is_empty() {
            skipped.push(line);
            continue;
        }
        let x: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("bad x_log_sat {:?}", &record[1])))?;
        let y: f64 = record[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("bad y_log_pm25 {:?}", &record[2])))?;
        if record[3].trim().is_empty() || record[4].trim().is_empty() {
            return Err(Error::parse(line, "empty region label"));
        }
        table.monitor_id.push(record[0].to_string());
        table.x.push(R::of(x));
        table.y.push(R::of(y));
        table.region_who.push(record[3].to_string());
        table.region_cluster.push(record[4].to_string());
        table.country.push(record[5].to_string());
    }
    if table.n() == 0 {
        return Err(Error::invalid("no observations"));
    }
    Ok((table, skipped))
}

/// Load a monitor CSV as a WHO-grouped dataset.
pub fn load_csv<R: Real>(path: impl AsRef<Path>) -> Result<CsvLoad<R>> {
    let (table, skipped_rows) = read_monitor_csv(path)?;
    let dataset = table.dataset(GroupBy::Who)?;
    Ok(CsvLoad { table, dataset, skipped_rows })
}

pub fn write_csv<R: Real>(path: impl AsRef<Path>, table: &MonitorTable<R>) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(MONITOR_CSV_HEADER)?;
    for i in 0..table.n() {
        writer.write_record([
            table.monitor_id[i].as_str(),
            &table.x[i].to_string(),
            &table.y[i].to_string(),
            table.region_who[i].as_str(),
            table.region_cluster[i].as_str(),
            table.country[i].as_str(),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv flush failed: {e}")))?;
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("bayeskit_io_tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    const HEADER: &str = "monitor_id,x_log_sat,y_log_pm25,region_who,region_cluster,country\n";

    #[test]
    fn parses_example_row() {
        let path = tmp("example.csv");
        std::fs::write(&path, format!("{HEADER}m1,1.95,4.32,super_region_2,cluster_4,Mongolia\n"))
            .unwrap();
        let load = load_csv::<f64>(&path).unwrap();
        assert_eq!(load.dataset.x, vec![1.95]);
        assert_eq!(load.dataset.y, vec![4.32]);
        assert_eq!(load.dataset.group_names, vec!["super_region_2".to_string()]);
        assert_eq!(load.table.region_cluster[0], "cluster_4");
        assert_eq!(load.dataset.country.as_ref().unwrap()[0], "Mongolia");
        assert!(load.skipped_rows.is_empty());
    }

    #[test]
    fn empty_file_is_an_error() {
        let path = tmp("empty.csv");
        std::fs::write(&path, HEADER).unwrap();
        let err = load_csv::<f64>(&path).unwrap_err().to_string();
        assert!(err.contains("no observations"), "{err}");
    }

    #[test]
    fn missing_y_rows_are_skipped_with_line_numbers() {
        let path = tmp("missing_y.csv");
        std::fs::write(
            &path,
            format!(
                "{HEADER}m1,1.0,2.0,r1,c1,A\nm2,1.1,,r1,c1,A\nm3,1.2,2.2,r2,c1,B\nm4,1.3,,r2,c2,B\n"
            ),
        )
        .unwrap();
        let load = load_csv::<f64>(&path).unwrap();
        assert_eq!(load.dataset.n(), 2);
        assert_eq!(load.skipped_rows, vec![3, 5]);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let path = tmp("malformed.csv");
        std::fs::write(&path, format!("{HEADER}m1,1.0,2.0,r1,c1,A\nm2,oops,2.0,r1,c1,A\n")).unwrap();
        let err = load_csv::<f64>(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("x_log_sat"), "{err}");
    }

    #[test]
    fn unknown_group_label_is_an_error() {
        let path = tmp("unknown_group.csv");
        std::fs::write(&path, format!("{HEADER}m1,1.0,2.0,r1,c1,A\nm2,1.5,2.5,r9,c1,A\n")).unwrap();
        let (table, _) = read_monitor_csv::<f64>(&path).unwrap();
        let known = vec!["r1".to_string()];
        let err = table.dataset_with_groups(GroupBy::Who, Some(&known)).unwrap_err().to_string();
        assert!(err.contains("r9"), "{err}");
    }

    #[test]
    fn write_then_load_is_identity_on_datasets() {
        let ds = Dataset::new(
            vec![1.0, 2.5, 0.30000000000000004],
            vec![0.9, 2.6, 0.4],
            vec![0, 1, 0],
            vec!["super_region_0".into(), "super_region_1".into()],
            Some(vec!["A".into(), "B, The".into(), "C".into()]),
        )
        .unwrap();
        let path = tmp("round_trip.csv");
        write_csv(&path, &MonitorTable::from_dataset(&ds)).unwrap();
        let load = load_csv::<f64>(&path).unwrap();
        assert_eq!(load.dataset, ds);
    }

    #[test]
    fn cluster_grouping_differs_from_who() {
        let path = tmp("two_groupings.csv");
        std::fs::write(
            &path,
            format!("{HEADER}m1,1.0,2.0,r1,cA,X\nm2,1.1,2.1,r1,cB,Y\nm3,1.2,2.2,r2,cA,Z\n"),
        )
        .unwrap();
        let (table, _) = read_monitor_csv::<f64>(&path).unwrap();
        let who = table.dataset(GroupBy::Who).unwrap();
        let cluster = table.dataset(GroupBy::Cluster).unwrap();
        assert_eq!(who.group, vec![0, 0, 1]);
        assert_eq!(cluster.group, vec![0, 1, 0]);
    }
}
