//! Latent-time constructions from an observed law.
//!
//! Given only the law of `(T̃, D̃)`, build a censoring time `C` and a latent
//! pair `(T, D)` such that `T̃ = T ∧ C`, `D̃ = D·1{T ≤ C}` and `C ⫫ (T, D)`.
//! Everything is computed as an exact joint law; inverse-transform sampling
//! is available as a secondary path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{DiscreteWorld, LatentAtom, WorldFunctionals};
use crate::props;
use crate::stepfn::StepFunction;

/// `f←(u) = inf{x ∈ domain : f(x) ≥ u}`, or `+∞` when no point qualifies.
///
/// `domain` must be sorted ascending. For `x` in the domain the Galois
/// property `u ≤ f(x) ⟺ f←(u) ≤ x` holds exactly.
pub fn generalized_inverse(f: &StepFunction, domain: &[f64], u: f64) -> f64 {
    // f is nondecreasing, so the qualifying points form a suffix
    let k = domain.partition_point(|&x| f.eval(x) < u);
    domain.get(k).copied().unwrap_or(f64::INFINITY)
}

/// Conditional CDF of a constructed time given an observed atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCdf {
    pub exit: f64,
    pub status: usize,
    /// `(c, F(c))` at each grid point `c ≥ exit`.
    pub points: Vec<(f64, f64)>,
    /// Mass left for the `∞` sentinel, `1 − F(max grid)`.
    pub at_infinity: f64,
}

impl ConditionalCdf {
    pub fn step(&self) -> StepFunction {
        StepFunction::from_sorted(0.0, self.points.clone())
    }

    /// Inverse-transform draw for a uniform `u`.
    pub fn invert(&self, u: f64) -> f64 {
        let domain: Vec<f64> = self.points.iter().map(|p| p.0).collect();
        generalized_inverse(&self.step(), &domain, u)
    }
}

/// `P(C = c | T̃ = g_k, D̃ = status)` over slots `0..=m+1` (slot `m+1` is `∞`).
pub(crate) fn conditional_censoring_masses(f: &WorldFunctionals, k: usize, status: usize) -> Vec<f64> {
    let m = f.m();
    let mut out = vec![0.0; m + 2];
    if status == 0 {
        out[k] = 1.0;
        return out;
    }
    let dh = &f.observed().check_hazard0;
    let mut alive = 1.0;
    for c in k..=m {
        out[c] = alive * dh[c];
        alive *= 1.0 - dh[c];
    }
    out[m + 1] = alive;
    out
}

/// `P(T = g_u, D = j | T̃ = g_k, D̃ = 0)` over slots `0..=m`, plus the residual
/// that the observed hazards leave unassigned.
fn event_masses(f: &WorldFunctionals, k: usize) -> (Vec<Vec<f64>>, f64) {
    let m = f.m();
    let d = f.d();
    let o = f.observed();
    let mut out = vec![vec![0.0; m + 1]; d + 1];
    let mut alive = 1.0;
    for u in k + 1..=m {
        for (j, row) in out.iter_mut().enumerate().skip(1) {
            row[u] = alive * o.hazard[j][u];
        }
        alive *= 1.0 - o.hazard_total[u];
    }
    (out, alive.max(0.0))
}

/// Atoms `(exit slot, status, p)` of the observed law with positive mass.
fn observed_atoms(f: &WorldFunctionals) -> Vec<(usize, usize, f64)> {
    let o = f.observed();
    let mut out = Vec::new();
    for k in 1..=f.m() {
        for (j, row) in o.exit_mass.iter().enumerate() {
            if row[k] > 0.0 {
                out.push((k, j, row[k]));
            }
        }
    }
    out
}

/// Conditional CDF of the constructed `C` given `(T̃, D̃) = (exit, status)`.
pub fn conditional_censoring_cdf(f: &WorldFunctionals, exit: f64, status: usize) -> Result<ConditionalCdf> {
    let k = f.slot_of(exit);
    if k == 0 || f.times()[k] != exit {
        return Err(Error::InvalidAtom {
            time: exit,
            reason: "exit time is not a grid point".into(),
        });
    }
    if status > f.d() {
        return Err(Error::Dimension { expected: f.d(), found: status });
    }
    let masses = conditional_censoring_masses(f, k, status);
    let mut acc = 0.0;
    let points = (k..=f.m())
        .map(|c| {
            acc += masses[c];
            (f.times()[c], acc)
        })
        .collect();
    Ok(ConditionalCdf {
        exit,
        status,
        points,
        at_infinity: masses[f.m() + 1],
    })
}

/// One cell of the constructed joint law of `(T̃, D̃, C)`, in slot coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensorCell {
    pub exit: usize,
    pub status: usize,
    /// `m + 1` encodes `∞`.
    pub c: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensoringConstruction {
    m: usize,
    times: Vec<f64>,
    cells: Vec<CensorCell>,
}

impl CensoringConstruction {
    pub fn cells(&self) -> &[CensorCell] {
        &self.cells
    }

    /// `P(C > g_s)` for slot `s`.
    pub fn survival_at(&self, s: usize) -> f64 {
        self.cells.iter().filter(|c| c.c > s).map(|c| c.p).sum()
    }

    pub fn survival(&self) -> StepFunction {
        let jumps = (1..=self.m).map(|s| (self.times[s], self.survival_at(s))).collect();
        StepFunction::from_sorted(1.0, jumps)
    }

    pub fn mass_at_infinity(&self) -> f64 {
        self.survival_at(self.m)
    }

    /// Proper exactly when `∏(1 − dȞ₀)` vanishes over the grid.
    pub fn is_proper(&self) -> bool {
        self.mass_at_infinity() == 0.0
    }
}

/// Constructs `C` from the observed law: `C = T̃` on censored atoms, and
/// `P(C > c | T̃ = t̃, D̃ ≠ 0) = ∏_{[t̃, c]}(1 − ΔȞ₀)` otherwise.
pub fn construct_c(f: &WorldFunctionals) -> CensoringConstruction {
    let m = f.m();
    let mut cells = Vec::new();
    for (k, status, p) in observed_atoms(f) {
        for (c, q) in conditional_censoring_masses(f, k, status).into_iter().enumerate() {
            if q > 0.0 {
                cells.push(CensorCell { exit: k, status, c, p: p * q });
            }
        }
    }
    CensoringConstruction {
        m,
        times: f.times().to_vec(),
        cells,
    }
}

/// One cell of the constructed joint law of `(T̃, D̃, T, D)`; `t = m + 1`
/// encodes the tail atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventCell {
    pub exit: usize,
    pub status: usize,
    pub t: usize,
    pub cause: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventConstruction {
    cells: Vec<EventCell>,
    tail: Option<f64>,
}

impl EventConstruction {
    pub fn cells(&self) -> &[EventCell] {
        &self.cells
    }

    /// Time of the tail atom when the observed hazards leave mass unassigned.
    pub fn tail(&self) -> Option<f64> {
        self.tail
    }
}

/// Where residual event mass goes: strictly beyond every grid point.
pub fn tail_time(grid: &[f64]) -> f64 {
    2.0 * grid.last().copied().unwrap_or(1.0)
}

/// Constructs `(T, D)`: equal to `(T̃, D̃)` on observed events, and on an atom
/// censored at `s`, `P(T = u, D = j) = ∏_{(s,u)}(1 − ΔH̃)·ΔH̃_j(u)` for `u > s`.
/// Residual mass is placed at [`tail_time`] with type `d`.
pub fn construct_td(f: &WorldFunctionals) -> EventConstruction {
    let m = f.m();
    let d = f.d();
    let mut cells = Vec::new();
    let mut tail = None;
    for (k, status, p) in observed_atoms(f) {
        if status != 0 {
            cells.push(EventCell { exit: k, status, t: k, cause: status, p });
            continue;
        }
        let (masses, residual) = event_masses(f, k);
        for (j, row) in masses.iter().enumerate().skip(1) {
            for (u, &q) in row.iter().enumerate() {
                if q > 0.0 {
                    cells.push(EventCell { exit: k, status, t: u, cause: j, p: p * q });
                }
            }
        }
        if residual > 0.0 {
            tail = Some(tail_time(f.grid()));
            cells.push(EventCell { exit: k, status, t: m + 1, cause: d, p: p * residual });
        }
    }
    EventConstruction { cells, tail }
}

/// A full world built from an observed law.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedWorld {
    pub world: DiscreteWorld,
    /// The constructed `C` puts mass on `∞`.
    pub improper_c: bool,
    /// Residual event mass was moved to this time.
    pub defective_tail: Option<f64>,
}

/// Couples [`construct_c`] and [`construct_td`], conditionally independent
/// given `(T̃, D̃)`.
pub fn construct_world(f: &WorldFunctionals) -> Result<ConstructedWorld> {
    let m = f.m();
    let cens = construct_c(f);
    let events = construct_td(f);
    let mut grid = f.grid().to_vec();
    if let Some(t) = events.tail {
        grid.push(t);
    }
    let time_of_c = |c: usize| if c == m + 1 { f64::INFINITY } else { f.times()[c] };
    let time_of_t = |t: usize| if t == m + 1 { tail_time(f.grid()) } else { f.times()[t] };

    let mut atoms = Vec::new();
    for (k, status, p) in observed_atoms(f) {
        let cs: Vec<&CensorCell> = cens.cells.iter().filter(|c| c.exit == k && c.status == status).collect();
        let ts: Vec<&EventCell> = events.cells.iter().filter(|e| e.exit == k && e.status == status).collect();
        for c in &cs {
            for e in &ts {
                atoms.push(LatentAtom {
                    t: time_of_t(e.t),
                    cause: e.cause,
                    c: time_of_c(c.c),
                    p: c.p * e.p / p,
                });
            }
        }
    }
    let world = DiscreteWorld::full(f.d(), grid, atoms)?;
    Ok(ConstructedWorld {
        world,
        improper_c: !cens.is_proper(),
        defective_tail: events.tail,
    })
}

/// Result of the existence check.
#[derive(Debug, Clone, PartialEq)]
pub struct Existence {
    /// `max |P(T ≤ t, D = j, C > s) − P(T ≤ t, D = j) P(C > s)|`.
    pub defect: f64,
    pub constructed: ConstructedWorld,
}

/// Builds the coupled world and measures how far `C` is from independent of
/// `(T, D)`.
pub fn verify_existence(f: &WorldFunctionals) -> Result<Existence> {
    let constructed = construct_world(f)?;
    let g = constructed.world.derive()?;
    let defect = props::check_full_independence(&g)?.value;
    Ok(Existence { defect, constructed })
}

/// Draws `n` constructed censoring times by inverse transform: `(T̃, D̃)` from
/// the observed law, then `C = F←(U | T̃, D̃)` with an independent uniform `U`.
/// Uses ChaCha8 seeded from `seed`.
pub fn sample_constructed_c(f: &WorldFunctionals, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exits = observed_atoms(f);
    let mut cdfs = Vec::with_capacity(exits.len());
    for &(k, status, _) in &exits {
        cdfs.push(conditional_censoring_cdf(f, f.times()[k], status)?);
    }
    let mut cum = Vec::with_capacity(exits.len());
    let mut acc = 0.0;
    for e in &exits {
        acc += e.2;
        cum.push(acc);
    }
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let v: f64 = 1.0 - rng.gen::<f64>();
        let i = cum.partition_point(|&c| c < v).min(exits.len() - 1);
        let u: f64 = 1.0 - rng.gen::<f64>();
        out.push(cdfs[i].invert(u));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObservedAtom;
    use proptest::prelude::*;

    fn obs(t: f64, status: usize, p: f64) -> ObservedAtom {
        ObservedAtom { t, status, p }
    }

    #[test]
    fn inverse_examples() {
        let f = StepFunction::new(0.0, [(2.0, 1.0)]).unwrap();
        assert_eq!(generalized_inverse(&f, &[1.0, 2.0, 3.0], 0.5), 2.0);
        let g = StepFunction::new(0.0, [(1.0, 0.3), (2.0, 1.0)]).unwrap();
        assert_eq!(generalized_inverse(&g, &[1.0, 2.0], 0.3), 1.0);
        assert_eq!(generalized_inverse(&g, &[1.0, 2.0], 0.31), 2.0);
        assert_eq!(generalized_inverse(&g, &[1.0, 2.0], 0.0), 1.0);
        let h = StepFunction::new(0.0, [(1.0, 0.5)]).unwrap();
        assert_eq!(generalized_inverse(&h, &[1.0, 2.0], 0.9), f64::INFINITY);
    }

    #[test]
    fn all_censored_gives_c_equal_exit() {
        let w = DiscreteWorld::observed(1, vec![1.0, 2.0], vec![obs(1.0, 0, 0.4), obs(2.0, 0, 0.6)]).unwrap();
        let f = w.derive().unwrap();
        let c = construct_c(&f);
        for cell in c.cells() {
            assert_eq!(cell.c, cell.exit);
        }
        assert!(c.is_proper());
        let e = construct_td(&f);
        assert_eq!(e.tail(), Some(4.0));
    }

    #[test]
    fn no_censoring_keeps_events_and_never_censors() {
        let w = DiscreteWorld::observed(2, vec![1.0, 2.0], vec![obs(1.0, 1, 0.4), obs(2.0, 2, 0.6)]).unwrap();
        let f = w.derive().unwrap();
        let built = construct_world(&f).unwrap();
        assert!(built.improper_c);
        assert_eq!(built.defective_tail, None);
        let crate::model::WorldAtoms::Full(atoms) = built.world.atoms() else { panic!() };
        assert!(atoms.iter().all(|a| a.c == f64::INFINITY));
        let (got, want) = (built.world.observed_law(), w.observed_law());
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!(a.t == b.t && a.status == b.status && (a.p - b.p).abs() < 1e-15);
        }
    }

    #[test]
    fn three_atom_construction_by_hand() {
        // censored at 1 w.p. 0.2, type 1 at 2 w.p. 0.5, censored at 3 w.p. 0.3
        let w = DiscreteWorld::observed(
            1,
            vec![1.0, 2.0, 3.0],
            vec![obs(1.0, 0, 0.2), obs(2.0, 1, 0.5), obs(3.0, 0, 0.3)],
        )
        .unwrap();
        let f = w.derive().unwrap();
        // observed hazards: ΔH̃_1(2) = 0.5/0.8, ΔH̃_1(3) = 0
        let e = construct_td(&f);
        let from_one: Vec<&EventCell> = e.cells().iter().filter(|c| c.exit == 1).collect();
        assert_eq!(from_one.len(), 2);
        assert!((from_one[0].p - 0.2 * 0.625).abs() < 1e-15);
        assert_eq!(from_one[0].t, 2);
        // the rest of the mass finds no hazard and goes to the tail
        assert!((from_one[1].p - 0.2 * 0.375).abs() < 1e-15);
        assert_eq!(from_one[1].t, 4);
        // ΔȞ₀(1) = 0.2 / 1, ΔȞ₀(3) = 0.3 / 0.3, so the type-1 exit at 2 gets C = 3
        let c = construct_c(&f);
        let from_two: Vec<&CensorCell> = c.cells().iter().filter(|c| c.exit == 2).collect();
        assert_eq!(from_two.len(), 1);
        assert_eq!(from_two[0].c, 3);
        assert!((c.survival_at(1) - 0.8).abs() < 1e-15);
        assert!(c.is_proper());
    }

    #[test]
    fn zero_conditional_mass_contributes_nothing() {
        // censored at the last point: no later hazard at all
        let w = DiscreteWorld::observed(2, vec![1.0, 2.0], vec![obs(1.0, 1, 0.5), obs(2.0, 0, 0.5)]).unwrap();
        let f = w.derive().unwrap();
        let e = construct_td(&f);
        let cells: Vec<&EventCell> = e.cells().iter().filter(|c| c.exit == 2).collect();
        assert_eq!(cells.len(), 1);
        assert_eq!((cells[0].t, cells[0].cause), (3, 2));
    }

    #[test]
    fn conditional_cdf_of_censored_atom_is_a_point_mass() {
        let w = DiscreteWorld::observed(1, vec![1.0, 2.0], vec![obs(1.0, 0, 0.5), obs(2.0, 1, 0.5)]).unwrap();
        let f = w.derive().unwrap();
        let cdf = conditional_censoring_cdf(&f, 1.0, 0).unwrap();
        assert_eq!(cdf.points, vec![(1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(cdf.invert(0.7), 1.0);
        assert!(conditional_censoring_cdf(&f, 1.5, 0).is_err());
    }

    proptest! {
        #[test]
        fn galois_property(
            jumps in prop::collection::vec(0.0f64..1.0, 1..8),
            u in 0.0f64..=1.0,
            x in 0usize..8,
        ) {
            let mut acc = 0.0;
            let total: f64 = jumps.iter().sum::<f64>().max(1e-12);
            let domain: Vec<f64> = (1..=jumps.len()).map(|k| k as f64).collect();
            let pts: Vec<(f64, f64)> = jumps.iter().enumerate().map(|(k, j)| {
                acc += j / total;
                ((k + 1) as f64, acc.min(1.0))
            }).collect();
            let f = StepFunction::new(0.0, pts).unwrap();
            let x = domain[x.min(domain.len() - 1)];
            prop_assert_eq!(u <= f.eval(x), generalized_inverse(&f, &domain, u) <= x);
        }
    }
}
