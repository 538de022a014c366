//! Decision procedures for the censoring assumptions.
//!
//! Every check returns a [`Defect`]: the worst violation of its defining
//! equation over the relevant grid points, with a witness. A property holds
//! when the defect is within tolerance. Each form of each family is computed
//! from its own formula, so agreement between forms is a genuine check rather
//! than a tautology.
//!
//! Martingale properties are checked exactly over generating events of the
//! relevant filtration; expectations against a generating π-system determine
//! the conditional expectations.

mod censoring;
mod identifiability;
mod identities;
mod report;
mod representativity;

pub use censoring::{
    censoring_martingale_defect, check_cens_conditional, check_cens_constant_sum, check_cens_hazards,
    check_cens_identifiability, check_cens_martingale, check_cens_representativity, check_full_independence,
    check_pointwise_independence, CensIdentifiability, PointwiseIndependence,
};
pub use identifiability::{
    check_constant_sum, check_identity_of_forces, check_status_independent_observation, check_weak_martingale,
    martingale_defect_weak,
};
pub use identities::{cond_fixed_vs_constant_sum2_upper_t, validate_appendix_identities, IDENTITY_NAMES};
pub use report::{
    AssumptionReport, CrossCheck, ExistenceSummary, FamilyRecord, PropertyRecord, DEFAULT_TOLERANCE, FAMILIES,
};
pub use representativity::{
    check_independent_c_exists, check_non_prognostic_censoring, check_non_prognostic_observation,
    check_strong_martingale, martingale_defect_strong,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WorldFunctionals;

/// Location of the worst violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub times: Vec<f64>,
    pub cause: Option<usize>,
    pub defect: f64,
    pub note: String,
}

/// Worst-case violation of a property, `0` when nothing is violated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defect {
    pub value: f64,
    pub witness: Option<Witness>,
}

impl Defect {
    pub fn zero() -> Self {
        Self { value: 0.0, witness: None }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.value <= tol
    }

    /// The larger of two defects.
    pub fn max(self, other: Defect) -> Defect {
        if other.value > self.value {
            other
        } else {
            self
        }
    }
}

/// Running maximum of `|defect|`.
#[derive(Debug)]
pub(crate) struct Worst(Defect);

impl Worst {
    pub(crate) fn new() -> Self {
        Self(Defect::zero())
    }

    pub(crate) fn see(&mut self, defect: f64, times: &[f64], cause: Option<usize>, note: &str) {
        let v = if defect.is_nan() { f64::INFINITY } else { defect.abs() };
        if v > self.0.value {
            self.0 = Defect {
                value: v,
                witness: Some(Witness {
                    times: times.to_vec(),
                    cause,
                    defect: v,
                    note: note.to_string(),
                }),
            };
        }
    }

    pub(crate) fn finish(self) -> Defect {
        self.0
    }
}

/// Generators of the observed filtration `F̃_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservedEvent {
    /// The whole sample space.
    Whole,
    /// `{T̃ > u}`.
    Survived(f64),
    /// `{T̃ ≤ u, D̃ = k}`.
    Exited { by: f64, status: usize },
}

/// Generators of the enlarged filtration `G_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistoryEvent {
    Whole,
    /// `{T > t', T̃ > s'}` with `s' ≤ t'`.
    AliveAndObserved { alive_past: f64, observed_past: f64 },
    /// `{T ≤ s', D = k, T̃ > u'}`.
    Failed { by: f64, cause: usize, observed_past: f64 },
}

pub(crate) fn check_window(s: f64, t: f64) -> Result<()> {
    if s.is_nan() || t.is_nan() || s > t || s < 0.0 {
        Err(Error::InvalidWindow { a: s, b: t })
    } else {
        Ok(())
    }
}

pub(crate) fn check_cause(f: &WorldFunctionals, j: usize) -> Result<()> {
    if j == 0 || j > f.d() {
        Err(Error::Dimension { expected: f.d(), found: j })
    } else {
        Ok(())
    }
}

/// Prefix sums with `out[0] = v[0]`.
pub(crate) fn prefix(v: &[f64]) -> Vec<f64> {
    crate::model::cumsum(v)
}

/// `max |P(T ≤ t, D = j, C > s) − P(T ≤ t, D = j) P(C > s)|` over all grid
/// slots, for cells `(t slot, cause, c slot, p)` with `c = m + 1` meaning `∞`.
pub(crate) fn independence_defect(cells: &[(usize, usize, usize, f64)], d: usize, times: &[f64]) -> Defect {
    let m = times.len() - 1;
    // mass[j][t][c]
    let mut mass = vec![vec![vec![0.0; m + 2]; m + 1]; d + 1];
    for &(t, j, c, p) in cells {
        mass[j][t][c] += p;
    }
    let mut cens_after = vec![0.0; m + 2];
    for c in (0..=m).rev() {
        let here: f64 = (1..=d).map(|j| (0..=m).map(|t| mass[j][t][c + 1]).sum::<f64>()).sum();
        cens_after[c] = cens_after[c + 1] + here;
    }
    let mut worst = Worst::new();
    for j in 1..=d {
        // joint[t][s] = P(T ≤ t, D = j, C > s)
        let mut incidence = 0.0;
        let mut joint_prev = vec![0.0; m + 1];
        for t in 0..=m {
            incidence += mass[j][t].iter().sum::<f64>();
            let mut tail = 0.0;
            let mut row = vec![0.0; m + 1];
            for s in (0..=m).rev() {
                tail += mass[j][t][s + 1];
                row[s] = joint_prev[s] + tail;
            }
            for s in 0..=m {
                let gap = row[s] - incidence * cens_after[s];
                worst.see(gap, &[times[t], times[s]], Some(j), "P(T ≤ t, D = j, C > s) vs product");
            }
            joint_prev = row;
        }
    }
    worst.finish()
}
