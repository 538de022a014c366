//! Nelson–Aalen, Kaplan–Meier and Aalen–Johansen estimators from i.i.d.
//! observed samples, plus a sampler for discrete worlds.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::WorldFunctionals;
use crate::prodint::{prodint_matrix, prodint_scalar, HazardMatrix, TransitionMatrix};
use crate::stepfn::{AtomicMeasure, StepFunction};

/// One observed pair `(T̃, D̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub time: f64,
    pub status: usize,
}

/// An i.i.d. sample of observed pairs with `d` event types.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSample {
    d: usize,
    records: Vec<Record>,
}

impl ObservedSample {
    /// Validates `time > 0` (finite) and `status ∈ 0..=d`; rows are numbered from 1.
    pub fn new(d: usize, records: Vec<Record>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        for (i, r) in records.iter().enumerate() {
            if !(r.time.is_finite() && r.time > 0.0) {
                return Err(Error::InvalidRecord {
                    row: i + 1,
                    reason: format!("time {} is not a positive finite number", r.time),
                });
            }
            if r.status > d {
                return Err(Error::InvalidRecord {
                    row: i + 1,
                    reason: format!("status {} outside 0..={d}", r.status),
                });
            }
        }
        Ok(Self { d, records })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct times with the risk set and the counts per status `0..=d`.
    fn tallies(&self) -> Vec<(f64, usize, Vec<usize>)> {
        let mut sorted = self.records.clone();
        sorted.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut out: Vec<(f64, usize, Vec<usize>)> = Vec::new();
        let mut at_risk = sorted.len();
        let mut i = 0;
        while i < sorted.len() {
            let t = sorted[i].time;
            let mut counts = vec![0; self.d + 1];
            while i < sorted.len() && sorted[i].time == t {
                counts[sorted[i].status] += 1;
                i += 1;
            }
            let here: usize = counts.iter().sum();
            out.push((t, at_risk, counts));
            at_risk -= here;
        }
        out
    }
}

fn non_empty(sample: &ObservedSample) -> Result<()> {
    if sample.is_empty() {
        Err(Error::EmptySample)
    } else {
        Ok(())
    }
}

/// Nelson–Aalen increments `ΔĤ_j(t) = #{t̃ᵢ = t, d̃ᵢ = j} / #{t̃ᵢ ≥ t}` for
/// `j = 1..=d`, one measure per type, on every distinct sample time.
pub fn nelson_aalen(sample: &ObservedSample) -> Result<Vec<AtomicMeasure>> {
    non_empty(sample)?;
    let tallies = sample.tallies();
    let times: Vec<f64> = tallies.iter().map(|t| t.0).collect();
    Ok((1..=sample.d)
        .map(|j| {
            let masses: Vec<f64> = tallies.iter().map(|(_, r, c)| c[j] as f64 / *r as f64).collect();
            AtomicMeasure::on_grid(&times, &masses)
        })
        .collect())
}

/// The estimated hazard matrix built from [`nelson_aalen`].
pub fn nelson_aalen_matrix(sample: &ObservedSample) -> Result<HazardMatrix> {
    HazardMatrix::from_measures(&nelson_aalen(sample)?)
}

/// `Ŝ(t) = ∏_{(0,t]} (1 − Ĥ(ds))` as a step function.
pub fn kaplan_meier(sample: &ObservedSample) -> Result<StepFunction> {
    let total = nelson_aalen_matrix(sample)?.total();
    let mut jumps = Vec::with_capacity(total.len());
    for t in total.times() {
        jumps.push((t, prodint_scalar(&total, 0.0, t)?));
    }
    StepFunction::new(1.0, jumps)
}

/// One row of an estimator path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub time: f64,
    pub at_risk: usize,
    /// Counts per status `0..=d`.
    pub counts: Vec<usize>,
    /// `ΔĤ_j` for `j = 1..=d`.
    pub increments: Vec<f64>,
    pub km: f64,
    pub aj: TransitionMatrix,
}

/// Estimators evaluated at every distinct sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorPath {
    pub d: usize,
    pub points: Vec<PathPoint>,
}

impl EstimatorPath {
    /// First row of `P̂(t)`: `(Ŝ, F̂_1, …, F̂_d)`; the identity row before the first time.
    pub fn first_row_at(&self, t: f64) -> Vec<f64> {
        let k = self.points.partition_point(|p| p.time <= t);
        if k == 0 {
            TransitionMatrix::identity(self.d + 1).first_row().to_vec()
        } else {
            self.points[k - 1].aj.first_row().to_vec()
        }
    }

    pub fn km_at(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|p| p.time <= t);
        if k == 0 {
            1.0
        } else {
            self.points[k - 1].km
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["time".to_string(), "at_risk".to_string(), "n_0".to_string()];
        h.extend((1..=self.d).map(|j| format!("n_{j}")));
        h.extend((1..=self.d).map(|j| format!("dH_{j}")));
        h.push("S_km".to_string());
        h.push("P_S".to_string());
        h.extend((1..=self.d).map(|j| format!("P_F{j}")));
        h
    }

    /// CSV with columns `time, at_risk, n_0..n_d, dH_1..dH_d, S_km, P_S, P_F1..P_Fd`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(self.header()).map_err(io)?;
        for p in &self.points {
            let mut row = vec![p.time.to_string(), p.at_risk.to_string()];
            row.extend(p.counts.iter().map(|c| c.to_string()));
            row.extend(p.increments.iter().map(|x| x.to_string()));
            row.push(p.km.to_string());
            row.extend(p.aj.first_row().iter().map(|x| x.to_string()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `P̂(t) = ∏_{(0,t]} (I + Ĥ(ds))` along every sample time, with Kaplan–Meier
/// and the raw counts alongside.
pub fn aalen_johansen(sample: &ObservedSample) -> Result<EstimatorPath> {
    non_empty(sample)?;
    let h = nelson_aalen_matrix(sample)?;
    let km = kaplan_meier(sample)?;
    let mut points = Vec::new();
    let mut prev = 0.0;
    let mut aj = TransitionMatrix::identity(sample.d + 1);
    for ((time, at_risk, counts), (_, inc)) in sample.tallies().into_iter().zip(h.atoms()) {
        aj = aj.mul(&prodint_matrix(&h, prev, time)?);
        prev = time;
        points.push(PathPoint {
            time,
            at_risk,
            counts,
            increments: inc.clone(),
            km: km.eval(time),
            aj: aj.clone(),
        });
    }
    Ok(EstimatorPath { d: sample.d, points })
}

/// `n` i.i.d. draws of `(T̃, D̃)` from the observed law by inverse transform
/// with ChaCha8 seeded from `seed`.
pub fn sample_world(f: &WorldFunctionals, n: usize, seed: u64) -> ObservedSample {
    let o = f.observed();
    let mut atoms = Vec::new();
    for k in 1..=f.m() {
        for (status, row) in o.exit_mass.iter().enumerate() {
            if row[k] > 0.0 {
                atoms.push((f.times()[k], status, row[k]));
            }
        }
    }
    let mut cum = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for a in &atoms {
        acc += a.2;
        cum.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|_| {
            let u = 1.0 - rng.gen::<f64>();
            let i = cum.partition_point(|&c| c < u).min(atoms.len() - 1);
            Record { time: atoms[i].0, status: atoms[i].1 }
        })
        .collect();
    ObservedSample { d: f.d(), records }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize, rows: &[(f64, usize)]) -> ObservedSample {
        ObservedSample::new(d, rows.iter().map(|&(time, status)| Record { time, status }).collect()).unwrap()
    }

    #[test]
    fn nelson_aalen_by_hand() {
        let h = nelson_aalen(&sample(1, &[(1.0, 1)])).unwrap();
        assert_eq!(h[0].mass_at(1.0), 1.0);
        let h = nelson_aalen(&sample(1, &[(1.0, 1), (2.0, 0), (3.0, 1)])).unwrap();
        assert_eq!(h[0].mass_at(1.0), 1.0 / 3.0);
        assert_eq!(h[0].mass_at(2.0), 0.0);
        assert_eq!(h[0].mass_at(3.0), 1.0);
        let h = nelson_aalen(&sample(2, &[(1.0, 1), (1.0, 2)])).unwrap();
        assert_eq!(h[0].mass_at(1.0), 0.5);
        assert_eq!(h[1].mass_at(1.0), 0.5);
        assert_eq!(nelson_aalen(&sample(1, &[])), Err(Error::EmptySample));
    }

    #[test]
    fn kaplan_meier_by_hand() {
        let s = kaplan_meier(&sample(1, &[(1.0, 1), (2.0, 0), (3.0, 1)])).unwrap();
        assert!((s.eval(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.eval(3.0), 0.0);
        assert_eq!(kaplan_meier(&sample(1, &[(1.0, 1)])).unwrap().eval(1.0), 0.0);
        let s = kaplan_meier(&sample(2, &[(1.0, 0), (2.0, 0)])).unwrap();
        assert_eq!(s.eval(5.0), 1.0);
    }

    #[test]
    fn aalen_johansen_by_hand() {
        let p = aalen_johansen(&sample(2, &[(1.0, 1), (2.0, 2), (3.0, 0)])).unwrap();
        let row = p.first_row_at(2.0);
        for x in row {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = aalen_johansen(&sample(2, &[(1.0, 0), (2.0, 0)])).unwrap();
        for pt in &p.points {
            assert_eq!(pt.aj, TransitionMatrix::identity(3));
        }
    }

    #[test]
    fn two_state_identity() {
        let p = aalen_johansen(&sample(1, &[(1.0, 1), (1.5, 0), (2.0, 1), (2.0, 0), (4.0, 1)])).unwrap();
        for pt in &p.points {
            assert!((pt.aj.get(0, 1) - (1.0 - pt.km)).abs() < 1e-15);
            assert_eq!(pt.aj.get(0, 0), pt.km);
        }
    }

    #[test]
    fn bad_records_are_numbered() {
        let err = ObservedSample::new(1, vec![Record { time: 1.0, status: 0 }, Record { time: 1.0, status: 2 }]);
        assert!(matches!(err, Err(Error::InvalidRecord { row: 2, .. })));
        let err = ObservedSample::new(1, vec![Record { time: -1.0, status: 0 }]);
        assert!(matches!(err, Err(Error::InvalidRecord { row: 1, .. })));
    }
}
