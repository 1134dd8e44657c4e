//! Coincidence records and their on-disk format.
//!
//! A record is a CSV file with header
//! `bin_a_lo_deg,bin_a_hi_deg,bin_b_lo_deg,bin_b_hi_deg,count` and one row
//! per (Alice bin, Bob bin) cell, plus an optional JSON sidecar carrying
//! `{n, seed, r_A, r_B, state}`. Angles are written in degrees with 12
//! significant digits.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::povm::{AngleBin, AnglePartition};
use crate::states::ProbabilityTable;

pub const RECORD_HEADER: [&str; 5] = ["bin_a_lo_deg", "bin_a_hi_deg", "bin_b_lo_deg", "bin_b_hi_deg", "count"];

/// Joint bin counts for Alice × Bob.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    partition_a: AnglePartition,
    partition_b: AnglePartition,
    counts: Vec<u64>,
    total: u64,
}

impl MeasurementRecord {
    /// `counts` is row-major with Alice's bins as rows.
    pub fn new(partition_a: AnglePartition, partition_b: AnglePartition, counts: Vec<u64>) -> Result<Self> {
        let expected = partition_a.len() * partition_b.len();
        if counts.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: counts.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidParameter("record contains no events".into()));
        }
        Ok(Self {
            partition_a,
            partition_b,
            counts,
            total,
        })
    }

    pub fn partition_a(&self) -> &AnglePartition {
        &self.partition_a
    }

    pub fn partition_b(&self) -> &AnglePartition {
        &self.partition_b
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.partition_b.len() + j]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// p_ij = counts_ij / n.
    pub fn frequencies(&self) -> ProbabilityTable {
        let n = self.total as f64;
        ProbabilityTable::new(
            self.partition_a.len(),
            self.partition_b.len(),
            self.counts.iter().map(|&c| c as f64 / n).collect(),
        )
        .expect("shape checked at construction")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RECORD_HEADER)?;
        for (i, a) in self.partition_a.bins().iter().enumerate() {
            for (j, b) in self.partition_b.bins().iter().enumerate() {
                w.write_record([
                    fmt_sig(a.lo().to_degrees()),
                    fmt_sig(a.hi().to_degrees()),
                    fmt_sig(b.lo().to_degrees()),
                    fmt_sig(b.hi().to_degrees()),
                    self.count(i, j).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != RECORD_HEADER {
            return Err(Error::Parse {
                row: 1,
                message: format!("expected header `{}`", RECORD_HEADER.join(",")),
            });
        }
        let mut bins_a: Vec<(f64, f64)> = Vec::new();
        let mut bins_b: Vec<(f64, f64)> = Vec::new();
        let mut cells: Vec<(usize, usize, u64)> = Vec::new();
        for (k, row) in rdr.records().enumerate() {
            let line = k + 2;
            let row = row.map_err(|e| Error::Parse {
                row: line,
                message: e.to_string(),
            })?;
            if row.len() != 5 {
                return Err(Error::Parse {
                    row: line,
                    message: format!("expected 5 fields, found {}", row.len()),
                });
            }
            let num = |idx: usize| -> Result<f64> {
                let v: f64 = row[idx].parse().map_err(|_| Error::Parse {
                    row: line,
                    message: format!("non-numeric value `{}` in column {}", &row[idx], RECORD_HEADER[idx]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: line,
                        message: format!("non-finite value in column {}", RECORD_HEADER[idx]),
                    });
                }
                Ok(v)
            };
            let a = (num(0)?, num(1)?);
            let b = (num(2)?, num(3)?);
            let count: u64 = row[4].parse().map_err(|_| Error::Parse {
                row: line,
                message: format!("count `{}` is not a nonnegative integer", &row[4]),
            })?;
            let ia = index_of(&mut bins_a, a);
            let ib = index_of(&mut bins_b, b);
            cells.push((ia, ib, count));
        }
        if cells.is_empty() {
            return Err(Error::Parse {
                row: 2,
                message: "record has no rows".into(),
            });
        }
        let to_partition = |bins: &[(f64, f64)]| -> Result<AnglePartition> {
            let bins = bins
                .iter()
                .map(|&(lo, hi)| AngleBin::new(lo.to_radians(), hi.to_radians()))
                .collect::<Result<Vec<_>>>()?;
            AnglePartition::new(bins)
        };
        let pa = to_partition(&bins_a)?;
        let pb = to_partition(&bins_b)?;
        let mut counts = vec![None; pa.len() * pb.len()];
        for (k, &(i, j, c)) in cells.iter().enumerate() {
            let slot = &mut counts[i * pb.len() + j];
            if slot.is_some() {
                return Err(Error::Parse {
                    row: k + 2,
                    message: "duplicate cell".into(),
                });
            }
            *slot = Some(c);
        }
        let counts = counts
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse {
                row: cells.len() + 1,
                message: "record does not list every (Alice bin, Bob bin) cell".into(),
            })?;
        Self::new(pa, pb, counts)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn index_of(bins: &mut Vec<(f64, f64)>, bin: (f64, f64)) -> usize {
    match bins.iter().position(|&b| b == bin) {
        Some(i) => i,
        None => {
            bins.push(bin);
            bins.len() - 1
        }
    }
}

/// JSON sidecar describing how a record was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordMetadata {
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(rename = "r_A")]
    pub r_a: f64,
    #[serde(rename = "r_B")]
    pub r_b: f64,
    pub state: String,
}

impl RecordMetadata {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
