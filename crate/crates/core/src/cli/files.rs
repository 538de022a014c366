//! JSON world files, sample CSV files and the report envelope.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estim::{ObservedSample, Record};
use crate::model::{DiscreteWorld, LatentAtom, ObservedAtom, WorldAtoms};
use crate::props::AssumptionReport;

pub const REPORT_SCHEMA: &str = "censoring.report/1";
pub const CONSTRUCT_SCHEMA: &str = "censoring.construct/1";

/// A probability written as a decimal or as `{"num": 1, "den": 16}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probability {
    Decimal(f64),
    Rational { num: u64, den: u64 },
}

impl Probability {
    fn value(self, atom: usize) -> Result<f64> {
        match self {
            Probability::Decimal(p) => Ok(p),
            Probability::Rational { den: 0, .. } => {
                Err(Error::InvalidWorld(format!("atom {atom}: rational probability with zero denominator")))
            }
            Probability::Rational { num, den } => Ok(num as f64 / den as f64),
        }
    }
}

/// A censoring time: a grid value or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CensorTime {
    Finite(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub t: f64,
    pub d: usize,
    /// Absent or `null` for an observed-only world.
    #[serde(default)]
    pub c: Option<CensorTime>,
    pub p: Probability,
}

/// `{d, grid, atoms: [{t, d, c, p}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpecFile {
    pub d: usize,
    pub grid: Vec<f64>,
    pub atoms: Vec<AtomSpec>,
}

impl WorldSpecFile {
    /// Parses JSON text; errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn to_world(&self) -> Result<DiscreteWorld> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidWorld("no atoms".into()));
        }
        let observed = self.atoms[0].c.is_none();
        if self.atoms.iter().any(|a| a.c.is_none() != observed) {
            return Err(Error::InvalidWorld(
                "either every atom gives a censoring time or none does".into(),
            ));
        }
        if observed {
            let atoms = self
                .atoms
                .iter()
                .enumerate()
                .map(|(k, a)| Ok(ObservedAtom { t: a.t, status: a.d, p: a.p.value(k)? }))
                .collect::<Result<Vec<_>>>()?;
            DiscreteWorld::observed(self.d, self.grid.clone(), atoms)
        } else {
            let atoms = self
                .atoms
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let c = match a.c.as_ref().expect("checked above") {
                        CensorTime::Finite(c) => *c,
                        CensorTime::Named(s) if s == "inf" => f64::INFINITY,
                        CensorTime::Named(s) => {
                            return Err(Error::InvalidWorld(format!("atom {k}: censoring time {s:?} is not \"inf\"")))
                        }
                    };
                    Ok(LatentAtom { t: a.t, cause: a.d, c, p: a.p.value(k)? })
                })
                .collect::<Result<Vec<_>>>()?;
            DiscreteWorld::full(self.d, self.grid.clone(), atoms)
        }
    }

    /// The canonical file of a world: sorted, fused atoms with decimal probabilities.
    pub fn from_world(world: &DiscreteWorld) -> Self {
        let atoms = match world.atoms() {
            WorldAtoms::Full(atoms) => atoms
                .iter()
                .map(|a| AtomSpec {
                    t: a.t,
                    d: a.cause,
                    c: Some(if a.c == f64::INFINITY {
                        CensorTime::Named("inf".into())
                    } else {
                        CensorTime::Finite(a.c)
                    }),
                    p: Probability::Decimal(a.p),
                })
                .collect(),
            WorldAtoms::Observed(atoms) => atoms
                .iter()
                .map(|a| AtomSpec { t: a.t, d: a.status, c: None, p: Probability::Decimal(a.p) })
                .collect(),
        };
        Self { d: world.d(), grid: world.grid().to_vec(), atoms }
    }
}

/// Canonical JSON text of a world, newline-terminated.
pub fn canonical_json(world: &DiscreteWorld) -> String {
    let mut s = serde_json::to_string_pretty(&WorldSpecFile::from_world(world)).expect("world files serialize");
    s.push('\n');
    s
}

/// Hex SHA-256 of the canonical JSON text.
pub fn world_hash(world: &DiscreteWorld) -> String {
    hex::encode(Sha256::digest(canonical_json(world).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFile<'a> {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub world_sha256: String,
    pub tolerance: f64,
    pub report: &'a AssumptionReport,
}

impl<'a> ReportFile<'a> {
    pub fn new(world: &DiscreteWorld, report: &'a AssumptionReport) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION"),
            world_sha256: world_hash(world),
            tolerance: report.tolerance,
            report,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructFile {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub input_sha256: String,
    pub existence_defect: f64,
    pub improper_c: bool,
    pub defective_tail: Option<f64>,
    pub world: WorldSpecFile,
}

/// Parses `time,status` CSV. Rows are numbered from 1 after the header.
pub fn parse_sample_csv(text: &str, d: Option<usize>) -> Result<ObservedSample> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["time", "status"] {
        return Err(Error::Parse(format!("header must be \"time,status\", found {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let bad = |reason: String| Error::InvalidRecord { row: row_no, reason };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let time: f64 = row[0].parse().map_err(|_| bad(format!("time {:?} is not a number", &row[0])))?;
        let status: usize = row[1].parse().map_err(|_| bad(format!("status {:?} is not a non-negative integer", &row[1])))?;
        records.push(Record { time, status });
    }
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let d = d.unwrap_or_else(|| records.iter().map(|r| r.status).max().unwrap_or(1).max(1));
    ObservedSample::new(d, records)
}
