//! Finite atomic measures on (0, ∞), cadlag step functions, and
//! Lebesgue–Stieltjes integration of step functions against atomic measures.
//!
//! Everything here is a finite sum. Times are compared exactly: callers that
//! want two measures to share atoms must place them on the same grid.

use crate::error::{Error, Result};

/// A nonnegative measure with finitely many atoms on (0, ∞).
///
/// Atoms are kept sorted by time with duplicate times fused (masses summed).
/// Zero-mass atoms are retained, which lets several measures share a grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    pub fn new<I: IntoIterator<Item = (f64, f64)>>(atoms: I) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(time, mass) in &atoms {
            if !time.is_finite() || time <= 0.0 {
                return Err(Error::InvalidAtom {
                    time,
                    reason: "atom times must be finite and positive".into(),
                });
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidAtom {
                    time,
                    reason: format!("mass {mass} is not a finite nonnegative number"),
                });
            }
        }
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut fused: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (time, mass) in atoms {
            match fused.last_mut() {
                Some(last) if last.0 == time => last.1 += mass,
                _ => fused.push((time, mass)),
            }
        }
        Ok(Self { atoms: fused })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a measure on `times` (already strictly increasing and positive)
    /// with the given masses. Used internally where the grid is trusted.
    pub(crate) fn on_grid(times: &[f64], masses: &[f64]) -> Self {
        debug_assert_eq!(times.len(), masses.len());
        Self {
            atoms: times.iter().copied().zip(masses.iter().copied()).collect(),
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Mass of the atom at exactly `t`, or zero.
    pub fn mass_at(&self, t: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.0.total_cmp(&t)) {
            Ok(i) => self.atoms[i].1,
            Err(_) => 0.0,
        }
    }

    /// Atoms lying in the left-open window (a, b].
    pub fn window(&self, a: f64, b: f64) -> &[(f64, f64)] {
        let lo = self.atoms.partition_point(|x| x.0 <= a);
        let hi = self.atoms.partition_point(|x| x.0 <= b);
        if lo >= hi {
            &[]
        } else {
            &self.atoms[lo..hi]
        }
    }

    pub fn largest_mass(&self) -> Option<(f64, f64)> {
        self.atoms
            .iter()
            .copied()
            .max_by(|x, y| x.1.total_cmp(&y.1))
    }

    pub fn cumulative(&self) -> StepFunction {
        cumulative(self)
    }
}

/// A right-continuous step function with left limits.
///
/// The value is `initial` before the first jump time; at each jump time the
/// function takes the new value, which holds until the next jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    initial: f64,
    jumps: Vec<(f64, f64)>,
}

impl StepFunction {
    pub fn new<I: IntoIterator<Item = (f64, f64)>>(initial: f64, jumps: I) -> Result<Self> {
        let mut jumps: Vec<(f64, f64)> = jumps.into_iter().collect();
        if jumps.iter().any(|j| j.0.is_nan()) {
            return Err(Error::InvalidAtom {
                time: f64::NAN,
                reason: "jump time is NaN".into(),
            });
        }
        jumps.sort_by(|x, y| x.0.total_cmp(&y.0));
        if let Some(w) = jumps.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidAtom {
                time: w[0].0,
                reason: "duplicate jump time".into(),
            });
        }
        Ok(Self { initial, jumps })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            initial: value,
            jumps: Vec::new(),
        }
    }

    /// Trusted constructor: `jumps` sorted by strictly increasing time.
    pub(crate) fn from_sorted(initial: f64, jumps: Vec<(f64, f64)>) -> Self {
        debug_assert!(jumps.windows(2).all(|w| w[0].0 < w[1].0));
        Self { initial, jumps }
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    /// Value at `t`: the value set by the last jump at or before `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.0 <= t);
        if k == 0 {
            self.initial
        } else {
            self.jumps[k - 1].1
        }
    }

    /// Left limit at `t`: the value set by the last jump strictly before `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.0 < t);
        if k == 0 {
            self.initial
        } else {
            self.jumps[k - 1].1
        }
    }

    pub fn eval_side(&self, t: f64, side: Side) -> f64 {
        match side {
            Side::At => self.eval(t),
            Side::Left => self.left_limit(t),
        }
    }
}

/// `t ↦ Σ_{s ≤ t} m({s})`, starting from zero.
pub fn cumulative(m: &AtomicMeasure) -> StepFunction {
    let mut running = 0.0;
    let jumps = m
        .atoms
        .iter()
        .map(|&(t, mass)| {
            running += mass;
            (t, running)
        })
        .collect();
    StepFunction::from_sorted(0.0, jumps)
}

/// Whether an integrand is read at the atom itself or just before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    At,
    Left,
}

/// Integrands understood by [`ls_integrate`].
#[derive(Debug, Clone, Copy)]
pub enum Integrand<'a> {
    One,
    Step(&'a StepFunction, Side),
    /// `1 / g`, with `0 / 0 := 0` when the integrator has no mass there.
    Reciprocal(&'a StepFunction, Side),
}

/// `∫_{(a, b]} g dm` for an atomic `m`.
pub fn ls_integrate(g: Integrand<'_>, m: &AtomicMeasure, a: f64, b: f64) -> Result<f64> {
    if a > b {
        return Err(Error::InvalidWindow { a, b });
    }
    let mut total = 0.0;
    for &(s, mass) in m.window(a, b) {
        let term = match g {
            Integrand::One => mass,
            Integrand::Step(f, side) => f.eval_side(s, side) * mass,
            Integrand::Reciprocal(f, side) => {
                let v = f.eval_side(s, side);
                if v == 0.0 {
                    if mass > 0.0 {
                        return Err(Error::NonzeroMassAtSingularity { time: s, mass });
                    }
                    0.0
                } else {
                    mass / v
                }
            }
        };
        total += term;
    }
    Ok(total)
}
