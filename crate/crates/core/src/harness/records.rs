//! CSV schemas for per-trial results and per-group summaries.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const TRIAL_HEADER: &str = "algorithm,n,r,param1,param2,seed,evaluations,success,wall_time_s";
pub const SUMMARY_HEADER: &str =
    "algorithm,n,r,count,mean,q1,median,q3,whisker_low,whisker_high,outliers,failure_rate";

/// Outcome of one trial. `wall_time_s` is diagnostic and excluded from
/// equality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub algorithm: String,
    pub n: usize,
    pub r: u64,
    pub param1: Option<f64>,
    pub param2: Option<f64>,
    pub seed: u64,
    pub evaluations: u64,
    pub success: bool,
    pub wall_time_s: f64,
}

impl PartialEq for TrialResult {
    fn eq(&self, other: &Self) -> bool {
        self.algorithm == other.algorithm
            && self.n == other.n
            && self.r == other.r
            && self.param1 == other.param1
            && self.param2 == other.param2
            && self.seed == other.seed
            && self.evaluations == other.evaluations
            && self.success == other.success
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub n: usize,
    pub r: u64,
    pub count: usize,
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
    pub failure_rate: f64,
}

fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(reader: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Writes header and rows. An empty slice writes the header only.
pub fn write_trials<W: Write>(mut writer: W, rows: &[TrialResult]) -> Result<()> {
    if rows.is_empty() {
        writeln!(writer, "{TRIAL_HEADER}")?;
        return Ok(());
    }
    write_rows(writer, rows)
}

pub fn read_trials<R: Read>(reader: R) -> Result<Vec<TrialResult>> {
    read_rows(reader)
}

pub fn write_summary<W: Write>(mut writer: W, rows: &[SummaryRow]) -> Result<()> {
    if rows.is_empty() {
        writeln!(writer, "{SUMMARY_HEADER}")?;
        return Ok(());
    }
    write_rows(writer, rows)
}

pub fn read_summary<R: Read>(reader: R) -> Result<Vec<SummaryRow>> {
    read_rows(reader)
}

/// Incremental trial writer: header on creation, then one row per call.
pub struct TrialWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TrialWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        inner.write_record(TRIAL_HEADER.split(','))?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &TrialResult) -> Result<()> {
        self.inner.serialize(row)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> TrialResult {
        TrialResult {
            algorithm: "ea_heavy".into(),
            n: 10,
            r: 1000,
            param1: Some(0.001),
            param2: Some(2.0),
            seed: 42,
            evaluations: 12345,
            success: true,
            wall_time_s: 0.25,
        }
    }

    #[test]
    fn exact_header_and_formatting() {
        let mut buf = Vec::new();
        let mut pm1 = sample();
        pm1.algorithm = "ea_pm1".into();
        pm1.param1 = None;
        pm1.param2 = None;
        pm1.success = false;
        write_trials(&mut buf, &[sample(), pm1]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRIAL_HEADER);
        assert_eq!(lines[1], "ea_heavy,10,1000,0.001,2.0,42,12345,true,0.25");
        assert_eq!(lines[2], "ea_pm1,10,1000,,,42,12345,false,0.25");

        let mut buf = Vec::new();
        write_trials(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), TRIAL_HEADER);

        let mut buf = Vec::new();
        let mut w = TrialWriter::new(&mut buf).unwrap();
        w.write(&sample()).unwrap();
        w.flush().unwrap();
        drop(w);
        assert!(String::from_utf8(buf).unwrap().starts_with(TRIAL_HEADER));
    }

    #[test]
    fn summary_header() {
        let mut buf = Vec::new();
        write_summary(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), SUMMARY_HEADER);
    }

    proptest! {
        #[test]
        fn trial_csv_round_trip(
            rows in prop::collection::vec(
                (
                    prop::sample::select(vec!["ea_pm1", "ea_heavy", "rls"]),
                    1usize..1000,
                    1u64..u64::MAX / 2,
                    prop::option::of(1e-6f64..10.0),
                    prop::option::of(1e-6f64..10.0),
                    any::<u64>(),
                    any::<u64>(),
                    any::<bool>(),
                    0.0f64..1e4,
                ),
                0..20,
            )
        ) {
            let rows: Vec<TrialResult> = rows
                .into_iter()
                .map(|(a, n, r, p1, p2, seed, evaluations, success, wall)| TrialResult {
                    algorithm: a.to_string(), n, r, param1: p1, param2: p2, seed,
                    evaluations, success, wall_time_s: wall,
                })
                .collect();
            let mut buf = Vec::new();
            write_trials(&mut buf, &rows).unwrap();
            let back = read_trials(buf.as_slice()).unwrap();
            prop_assert_eq!(back, rows);
        }
    }
}
