//! Exact discrete competing-risks worlds.
//!
//! A [`DiscreteWorld`] is a finite joint law of the event time `T`, event type
//! `D ∈ {1..d}` and censoring time `C` (possibly `∞`), or just the law of the
//! observed pair `(T̃, D̃)`. All times live on a shared grid. [`derive`]
//! computes every survival, incidence and hazard functional by exact
//! summation.
//!
//! Derived arrays are indexed by *slot*: slot `0` is time `0`, slot `k` is the
//! `k`-th grid point (1-based), and in censoring arrays slot `m + 1` holds the
//! never-censored sentinel `C = ∞`.

use crate::error::{Error, Result};
use crate::prodint::{prodint_matrix, HazardMatrix, TransitionMatrix};
use crate::stepfn::{AtomicMeasure, StepFunction};

/// Tolerance on `Σ p = 1`.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// One atom of a full world: `P(T = t, D = cause, C = c) = p`.
/// `c = f64::INFINITY` means the event is never censored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentAtom {
    pub t: f64,
    pub cause: usize,
    pub c: f64,
    pub p: f64,
}

/// One atom of an observed law: `P(T̃ = t, D̃ = status) = p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedAtom {
    pub t: f64,
    pub status: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorldAtoms {
    Full(Vec<LatentAtom>),
    Observed(Vec<ObservedAtom>),
}

/// A finite joint law on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteWorld {
    d: usize,
    grid: Vec<f64>,
    atoms: WorldAtoms,
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidWorld("grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::InvalidWorld("grid times must be finite and positive".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidWorld("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn on_grid(grid: &[f64], t: f64, what: &str, k: usize) -> Result<usize> {
    grid.binary_search_by(|g| g.total_cmp(&t))
        .map(|i| i + 1)
        .map_err(|_| Error::InvalidWorld(format!("atom {k}: {what} {t} is not a grid point")))
}

fn check_probability(p: f64, k: usize) -> Result<()> {
    if !p.is_finite() || p < 0.0 {
        Err(Error::InvalidWorld(format!("atom {k}: probability {p} is not a finite nonnegative number")))
    } else {
        Ok(())
    }
}

fn check_total(total: f64) -> Result<()> {
    if (total - 1.0).abs() > MASS_TOLERANCE {
        Err(Error::InvalidWorld(format!("probabilities sum to {total}, not 1")))
    } else {
        Ok(())
    }
}

impl DiscreteWorld {
    /// A world with given `(T, D, C)`; atoms are sorted and duplicates fused.
    pub fn full(d: usize, grid: Vec<f64>, atoms: Vec<LatentAtom>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidWorld("need at least one event type".into()));
        }
        validate_grid(&grid)?;
        for (k, a) in atoms.iter().enumerate() {
            check_probability(a.p, k)?;
            on_grid(&grid, a.t, "event time", k)?;
            if a.cause == 0 || a.cause > d {
                return Err(Error::InvalidWorld(format!("atom {k}: event type {} outside 1..={d}", a.cause)));
            }
            if a.c != f64::INFINITY {
                on_grid(&grid, a.c, "censoring time", k)?;
            }
        }
        check_total(atoms.iter().map(|a| a.p).sum())?;
        let mut atoms = atoms;
        atoms.sort_by(|x, y| {
            x.t.total_cmp(&y.t)
                .then(x.cause.cmp(&y.cause))
                .then(x.c.total_cmp(&y.c))
        });
        let mut fused: Vec<LatentAtom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match fused.last_mut() {
                Some(l) if l.t == a.t && l.cause == a.cause && l.c == a.c => l.p += a.p,
                _ => fused.push(a),
            }
        }
        Ok(Self {
            d,
            grid,
            atoms: WorldAtoms::Full(fused),
        })
    }

    /// A world that only specifies the law of the observed pair.
    pub fn observed(d: usize, grid: Vec<f64>, atoms: Vec<ObservedAtom>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidWorld("need at least one event type".into()));
        }
        validate_grid(&grid)?;
        for (k, a) in atoms.iter().enumerate() {
            check_probability(a.p, k)?;
            on_grid(&grid, a.t, "exit time", k)?;
            if a.status > d {
                return Err(Error::InvalidWorld(format!("atom {k}: exit type {} outside 0..={d}", a.status)));
            }
        }
        check_total(atoms.iter().map(|a| a.p).sum())?;
        let mut atoms = atoms;
        atoms.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.status.cmp(&y.status)));
        let mut fused: Vec<ObservedAtom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match fused.last_mut() {
                Some(l) if l.t == a.t && l.status == a.status => l.p += a.p,
                _ => fused.push(a),
            }
        }
        Ok(Self {
            d,
            grid,
            atoms: WorldAtoms::Observed(fused),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn atoms(&self) -> &WorldAtoms {
        &self.atoms
    }

    pub fn is_observed_only(&self) -> bool {
        matches!(self.atoms, WorldAtoms::Observed(_))
    }

    /// Law of `(T̃, D̃) = (T ∧ C, D·1{T ≤ C})`, fused and sorted.
    pub fn observed_law(&self) -> Vec<ObservedAtom> {
        match &self.atoms {
            WorldAtoms::Observed(a) => a.clone(),
            WorldAtoms::Full(atoms) => {
                let mut obs: Vec<ObservedAtom> = atoms
                    .iter()
                    .map(|a| {
                        if a.t <= a.c {
                            ObservedAtom { t: a.t, status: a.cause, p: a.p }
                        } else {
                            ObservedAtom { t: a.c, status: 0, p: a.p }
                        }
                    })
                    .collect();
                obs.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.status.cmp(&y.status)));
                let mut fused: Vec<ObservedAtom> = Vec::with_capacity(obs.len());
                for a in obs {
                    match fused.last_mut() {
                        Some(l) if l.t == a.t && l.status == a.status => l.p += a.p,
                        _ => fused.push(a),
                    }
                }
                fused
            }
        }
    }

    /// The observed-only world induced by this one.
    pub fn observed_world(&self) -> DiscreteWorld {
        DiscreteWorld {
            d: self.d,
            grid: self.grid.clone(),
            atoms: WorldAtoms::Observed(self.observed_law()),
        }
    }

    pub fn derive(&self) -> Result<WorldFunctionals> {
        derive(self)
    }
}

/// A world atom with all times translated to slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAtom {
    /// Event time slot (`1..=m`).
    pub t: usize,
    pub cause: usize,
    /// Censoring slot; `m + 1` means never censored.
    pub c: usize,
    /// Observed exit slot `min(t, c)`.
    pub exit: usize,
    /// Observed exit type `cause · 1{t ≤ c}`.
    pub status: usize,
    pub p: f64,
}

/// Functionals of the observed pair `(T̃, D̃)`; every array is slot-indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedFunctionals {
    /// `exit_mass[j][k] = P(T̃ = g_k, D̃ = j)` for `j = 0..=d`.
    pub exit_mass: Vec<Vec<f64>>,
    /// `S̃(g_k) = P(T̃ > g_k)`.
    pub surv: Vec<f64>,
    /// `S̃(g_k−) = P(T̃ ≥ g_k)`.
    pub surv_left: Vec<f64>,
    /// `ΔH̃_j(g_k) = ΔF̃_j / S̃(g_k−)` for `j = 0..=d`.
    pub hazard: Vec<Vec<f64>>,
    /// `ΔH̃ = Σ_{j ≥ 1} ΔH̃_j`.
    pub hazard_total: Vec<f64>,
    /// `Š(g_k) = S̃(g_k−)(1 − ΔH̃(g_k)) = S̃(g_k) + ΔF̃_0(g_k)`.
    pub check_surv: Vec<f64>,
    /// `ΔȞ_0 = ΔF̃_0 / Š`.
    pub check_hazard0: Vec<f64>,
    /// Slot of `τ`, the largest exit time with positive mass.
    pub tau_slot: usize,
    /// Whether `𝒥 = [0, τ]` (as opposed to `[0, τ)`).
    pub j_closed: bool,
}

/// Functionals of the latent `(T, D)` and the given censoring time `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentFunctionals {
    /// `event_mass[j][k] = P(T = g_k, D = j)`; row `0` is identically zero.
    pub event_mass: Vec<Vec<f64>>,
    /// `S(g_k) = P(T > g_k)`.
    pub surv: Vec<f64>,
    /// `S(g_k−)`.
    pub surv_left: Vec<f64>,
    /// `ΔH_j(g_k) = ΔF_j / S(g_k−)`; row `0` is zero.
    pub hazard: Vec<Vec<f64>>,
    pub hazard_total: Vec<f64>,
    /// `B(g_k) = Σ_{s < g_k} ΔF̃_0(s) / S(s)`.
    pub b: Vec<f64>,
    /// `a_j(g_k) = P(T̃ = g_k, D̃ = j | T = g_k, D = j)`, undefined on null atoms.
    pub a: Vec<Vec<Option<f64>>>,
    /// `P(C = g_k)`, with slot `m + 1` holding `P(C = ∞)`.
    pub cens_mass: Vec<f64>,
    /// `K(g_k) = P(C > g_k)`.
    pub cens_surv: Vec<f64>,
    /// `K(g_k−)`.
    pub cens_surv_left: Vec<f64>,
    /// `ΔH_0(g_k) = ΔG / K(g_k−)`.
    pub cens_hazard: Vec<f64>,
    /// `P(T > g_k, C ≥ g_k)` by direct enumeration.
    pub check_surv_enumerated: Vec<f64>,
}

/// Every functional of a world, computed eagerly.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldFunctionals {
    d: usize,
    /// `times[0] = 0`, `times[k]` the `k`-th grid point.
    times: Vec<f64>,
    observed: ObservedFunctionals,
    latent: Option<LatentFunctionals>,
    joint: Vec<JointAtom>,
    exits: Vec<(usize, usize, f64)>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `tail[k] = Σ_{l > k} v[l]` and `tail_incl[k] = Σ_{l ≥ k} v[l]`, summed from
/// the right so an empty tail is exactly zero.
fn tails(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut after = vec![0.0; n];
    let mut from = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n).rev() {
        after[k] = acc;
        acc += v[k];
        from[k] = acc;
    }
    (after, from)
}

pub(crate) fn cumsum(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    v.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// Derives all functionals of `world` by exact summation.
pub fn derive(world: &DiscreteWorld) -> Result<WorldFunctionals> {
    let d = world.d;
    let m = world.grid.len();
    let mut times = Vec::with_capacity(m + 1);
    times.push(0.0);
    times.extend_from_slice(&world.grid);
    let slot = |t: f64| -> usize {
        if t == f64::INFINITY {
            m + 1
        } else {
            world.grid.binary_search_by(|g| g.total_cmp(&t)).expect("validated on construction") + 1
        }
    };

    let joint: Vec<JointAtom> = match &world.atoms {
        WorldAtoms::Full(atoms) => atoms
            .iter()
            .map(|a| {
                let t = slot(a.t);
                let c = slot(a.c);
                JointAtom {
                    t,
                    cause: a.cause,
                    c,
                    exit: t.min(c),
                    status: if t <= c { a.cause } else { 0 },
                    p: a.p,
                }
            })
            .collect(),
        WorldAtoms::Observed(_) => Vec::new(),
    };
    let exits: Vec<(usize, usize, f64)> = match &world.atoms {
        WorldAtoms::Full(_) => joint.iter().map(|a| (a.exit, a.status, a.p)).collect(),
        WorldAtoms::Observed(atoms) => atoms.iter().map(|a| (slot(a.t), a.status, a.p)).collect(),
    };

    // observed pair
    let mut exit_mass = vec![vec![0.0; m + 1]; d + 1];
    for &(k, j, p) in &exits {
        exit_mass[j][k] += p;
    }
    let exit_all: Vec<f64> = (0..=m).map(|k| (0..=d).map(|j| exit_mass[j][k]).sum()).collect();
    let (surv, surv_left) = tails(&exit_all);
    let hazard: Vec<Vec<f64>> = (0..=d)
        .map(|j| (0..=m).map(|k| ratio(exit_mass[j][k], surv_left[k])).collect())
        .collect();
    let hazard_total: Vec<f64> = (0..=m).map(|k| (1..=d).map(|j| hazard[j][k]).sum()).collect();
    let check_surv: Vec<f64> = (0..=m).map(|k| surv[k] + exit_mass[0][k]).collect();
    let check_hazard0: Vec<f64> = (0..=m).map(|k| ratio(exit_mass[0][k], check_surv[k])).collect();
    let tau_slot = (1..=m)
        .rev()
        .find(|&k| exit_all[k] > 0.0)
        .ok_or_else(|| Error::InvalidWorld("observed law has no positive mass".into()))?;
    let j_closed = surv_left[tau_slot] > 0.0;
    let observed = ObservedFunctionals {
        exit_mass,
        surv,
        surv_left,
        hazard,
        hazard_total,
        check_surv,
        check_hazard0,
        tau_slot,
        j_closed,
    };

    let latent = if world.is_observed_only() {
        None
    } else {
        Some(derive_latent(d, m, &joint, &observed))
    };

    Ok(WorldFunctionals {
        d,
        times,
        observed,
        latent,
        joint,
        exits,
    })
}

fn derive_latent(d: usize, m: usize, joint: &[JointAtom], obs: &ObservedFunctionals) -> LatentFunctionals {
    let mut event_mass = vec![vec![0.0; m + 1]; d + 1];
    let mut cens_mass = vec![0.0; m + 2];
    for a in joint {
        event_mass[a.cause][a.t] += a.p;
        cens_mass[a.c] += a.p;
    }
    let event_all: Vec<f64> = (0..=m).map(|k| (1..=d).map(|j| event_mass[j][k]).sum()).collect();
    let (surv, surv_left) = tails(&event_all);
    let hazard: Vec<Vec<f64>> = (0..=d)
        .map(|j| {
            if j == 0 {
                vec![0.0; m + 1]
            } else {
                (0..=m).map(|k| ratio(event_mass[j][k], surv_left[k])).collect()
            }
        })
        .collect();
    let hazard_total: Vec<f64> = (0..=m).map(|k| (1..=d).map(|j| hazard[j][k]).sum()).collect();

    let mut b = vec![0.0; m + 1];
    let mut acc = 0.0;
    for k in 1..=m {
        b[k] = acc;
        acc += ratio(obs.exit_mass[0][k], surv[k]);
    }

    let mut a = vec![vec![None; m + 1]; d + 1];
    for (j, row) in a.iter_mut().enumerate().skip(1) {
        for (k, cell) in row.iter_mut().enumerate().skip(1) {
            if event_mass[j][k] > 0.0 {
                let seen: f64 = joint
                    .iter()
                    .filter(|x| x.t == k && x.cause == j && x.c >= k)
                    .map(|x| x.p)
                    .sum();
                *cell = Some(seen / event_mass[j][k]);
            }
        }
    }

    let (cens_after, cens_from) = tails(&cens_mass);
    let cens_surv = cens_after[..=m].to_vec();
    let cens_surv_left = cens_from[..=m].to_vec();
    let cens_hazard: Vec<f64> = (0..=m).map(|k| ratio(cens_mass[k], cens_surv_left[k])).collect();
    let check_surv_enumerated: Vec<f64> = (0..=m)
        .map(|k| joint.iter().filter(|x| x.t > k && x.c >= k).map(|x| x.p).sum())
        .collect();

    LatentFunctionals {
        event_mass,
        surv,
        surv_left,
        hazard,
        hazard_total,
        b,
        a,
        cens_mass,
        cens_surv,
        cens_surv_left,
        cens_hazard,
        check_surv_enumerated,
    }
}

impl WorldFunctionals {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of grid points `m`.
    pub fn m(&self) -> usize {
        self.times.len() - 1
    }

    /// Slot times: `times()[0] = 0` followed by the grid.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid(&self) -> &[f64] {
        &self.times[1..]
    }

    pub fn observed(&self) -> &ObservedFunctionals {
        &self.observed
    }

    pub fn latent(&self) -> Result<&LatentFunctionals> {
        self.latent.as_ref().ok_or(Error::ObservedOnly)
    }

    pub fn is_observed_only(&self) -> bool {
        self.latent.is_none()
    }

    /// Full-world atoms in slot coordinates (empty for observed-only worlds).
    pub fn joint(&self) -> &[JointAtom] {
        &self.joint
    }

    /// Observed atoms `(exit slot, status, p)`.
    pub fn exits(&self) -> &[(usize, usize, f64)] {
        &self.exits
    }

    pub fn tau(&self) -> f64 {
        self.times[self.observed.tau_slot]
    }

    pub fn tau_slot(&self) -> usize {
        self.observed.tau_slot
    }

    /// Slots `1..=τ` of grid points inside `𝒥`.
    pub fn j_slots(&self) -> std::ops::RangeInclusive<usize> {
        let last = if self.observed.j_closed {
            self.observed.tau_slot
        } else {
            self.observed.tau_slot - 1
        };
        1..=last
    }

    pub fn in_j(&self, t: f64) -> bool {
        t >= 0.0
            && (t < self.tau() || (self.observed.j_closed && t == self.tau()))
    }

    /// Slot of the last grid point `≤ t` (0 when `t` is before the grid).
    pub fn slot_of(&self, t: f64) -> usize {
        self.times.partition_point(|g| *g <= t).saturating_sub(1)
    }

    /// Sum of `p` over full-world atoms satisfying `pred`.
    pub fn prob(&self, pred: impl Fn(&JointAtom) -> bool) -> f64 {
        self.joint.iter().filter(|a| pred(a)).map(|a| a.p).sum()
    }

    pub fn observed_survival(&self) -> StepFunction {
        self.slot_step(&self.observed.surv)
    }

    pub fn observed_hazard(&self, j: usize) -> AtomicMeasure {
        AtomicMeasure::on_grid(self.grid(), &self.observed.hazard[j][1..])
    }

    pub fn observed_incidence(&self, j: usize) -> StepFunction {
        self.slot_step(&cumsum(&self.observed.exit_mass[j]))
    }

    pub fn check_hazard0(&self) -> AtomicMeasure {
        AtomicMeasure::on_grid(self.grid(), &self.observed.check_hazard0[1..])
    }

    pub fn check_survival(&self) -> StepFunction {
        self.slot_step(&self.observed.check_surv)
    }

    pub fn event_survival(&self) -> Result<StepFunction> {
        Ok(self.slot_step(&self.latent()?.surv))
    }

    pub fn incidence(&self, j: usize) -> Result<StepFunction> {
        Ok(self.slot_step(&cumsum(&self.latent()?.event_mass[j])))
    }

    pub fn hazard(&self, j: usize) -> Result<AtomicMeasure> {
        Ok(AtomicMeasure::on_grid(self.grid(), &self.latent()?.hazard[j][1..]))
    }

    pub fn censoring_survival(&self) -> Result<StepFunction> {
        Ok(self.slot_step(&self.latent()?.cens_surv))
    }

    pub fn censoring_hazard(&self) -> Result<AtomicMeasure> {
        Ok(AtomicMeasure::on_grid(self.grid(), &self.latent()?.cens_hazard[1..]))
    }

    pub fn b_function(&self) -> Result<StepFunction> {
        Ok(self.slot_step(&self.latent()?.b))
    }

    fn slot_step(&self, values: &[f64]) -> StepFunction {
        let jumps = self.grid().iter().copied().zip(values[1..].iter().copied()).collect();
        StepFunction::from_sorted(values[0], jumps)
    }

    /// Hazard matrix built from the observed cause-specific hazards `H̃_j`.
    pub fn observed_hazard_matrix(&self) -> HazardMatrix {
        let atoms = (1..=self.m())
            .map(|k| (self.times[k], (1..=self.d).map(|j| self.observed.hazard[j][k]).collect()))
            .collect();
        HazardMatrix::new(self.d, atoms).expect("observed hazards are valid increments")
    }

    /// Hazard matrix built from the latent cause-specific hazards `H_j`.
    pub fn hazard_matrix(&self) -> Result<HazardMatrix> {
        let lat = self.latent()?;
        let atoms = (1..=self.m())
            .map(|k| (self.times[k], (1..=self.d).map(|j| lat.hazard[j][k]).collect()))
            .collect();
        HazardMatrix::new(self.d, atoms)
    }

    /// `P(t) = (S(t), F_1(t), …, F_d(t))` over identity rows.
    pub fn truth_matrix(&self, t: f64) -> Result<TransitionMatrix> {
        let lat = self.latent()?;
        let k = self.slot_of(t);
        let mut row = vec![lat.surv[k]];
        for j in 1..=self.d {
            row.push(lat.event_mass[j][..=k].iter().sum());
        }
        Ok(TransitionMatrix::from_first_row(&row))
    }

    /// Invariant defects of the derived functionals; each should be ~0.
    pub fn invariant_defects(&self) -> Vec<(&'static str, f64)> {
        let m = self.m();
        let o = &self.observed;
        let mut out = Vec::new();
        let mut worst: f64 = 0.0;
        for k in 0..=m {
            let f: f64 = (0..=self.d).map(|j| o.exit_mass[j][..=k].iter().sum::<f64>()).sum();
            worst = worst.max((f + o.surv[k] - 1.0).abs());
        }
        out.push(("observed_total", worst));
        let mut mono: f64 = 0.0;
        for k in 1..=m {
            mono = mono.max(o.surv[k] - o.surv[k - 1]);
        }
        out.push(("observed_monotone", mono.max((o.surv[0] - 1.0).abs())));
        let mut prod: f64 = 0.0;
        for k in 1..=m {
            let lhs = (1.0 - o.check_hazard0[k]) * (1.0 - o.hazard_total[k]);
            let rhs = 1.0 - o.hazard[0][k] - o.hazard_total[k];
            prod = prod.max((lhs - rhs).abs());
        }
        out.push(("check_hazard_product", prod));
        let mut diff: f64 = 0.0;
        for k in 1..=m {
            diff = diff.max((o.check_surv[k] - o.surv[k] - o.exit_mass[0][k]).abs());
        }
        out.push(("check_survival_jump", diff));
        if let Some(l) = &self.latent {
            let mut worst: f64 = 0.0;
            let mut mono: f64 = (l.surv[0] - 1.0).abs().max((l.cens_surv[0] - 1.0).abs());
            for k in 0..=m {
                let f: f64 = (1..=self.d).map(|j| l.event_mass[j][..=k].iter().sum::<f64>()).sum();
                worst = worst.max((f + l.surv[k] - 1.0).abs());
                if k > 0 {
                    mono = mono.max(l.surv[k] - l.surv[k - 1]).max(l.cens_surv[k] - l.cens_surv[k - 1]);
                }
            }
            out.push(("latent_total", worst));
            out.push(("latent_monotone", mono));
            let enumerated = (1..=m)
                .map(|k| (l.check_surv_enumerated[k] - o.check_surv[k]).abs())
                .fold(0.0, f64::max);
            out.push(("check_survival_enumerated", enumerated));
        }
        out
    }
}

/// `∏_0^t (I + H̃(ds))`, the limit of the Aalen–Johansen estimator.
pub fn prodint_reconstruct(f: &WorldFunctionals, t: f64) -> Result<TransitionMatrix> {
    if !f.in_j(t) {
        return Err(Error::OutsideJ { time: t, tau: f.tau() });
    }
    prodint_matrix(&f.observed_hazard_matrix(), 0.0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prodint::prodint_scalar;

    fn latent(t: f64, cause: usize, c: f64, p: f64) -> LatentAtom {
        LatentAtom { t, cause, c, p }
    }

    #[test]
    fn no_censoring_point_mass() {
        let w = DiscreteWorld::full(1, vec![1.0], vec![latent(1.0, 1, f64::INFINITY, 1.0)]).unwrap();
        let f = w.derive().unwrap();
        let l = f.latent().unwrap();
        assert_eq!(l.surv[1], 0.0);
        assert_eq!(f.incidence(1).unwrap().eval(1.0), 1.0);
        assert_eq!(f.hazard(1).unwrap().atoms(), &[(1.0, 1.0)]);
        assert!(l.b.iter().all(|&x| x == 0.0));
        assert_eq!(l.a[1][1], Some(1.0));
    }

    #[test]
    fn certain_censoring() {
        let w = DiscreteWorld::full(1, vec![1.0, 2.0], vec![latent(2.0, 1, 1.0, 1.0)]).unwrap();
        let f = w.derive().unwrap();
        let o = f.observed();
        assert_eq!(o.surv[1], 0.0);
        assert_eq!(f.observed_incidence(0).eval(1.0), 1.0);
        assert_eq!(o.hazard[0][1], 1.0);
        assert_eq!(f.tau(), 1.0);
        assert!(o.j_closed);
        assert!(f.in_j(1.0) && !f.in_j(1.5));
    }

    #[test]
    fn grid_enumeration_of_uniform_square() {
        // T = t, C = c on a 4×4 grid of equiprobable cells.
        let grid = vec![0.25, 0.5, 0.75, 1.0];
        let mut atoms = Vec::new();
        for &t in &grid {
            for &c in &grid {
                atoms.push(latent(t, 1, c, 1.0 / 16.0));
            }
        }
        let w = DiscreteWorld::full(1, grid.clone(), atoms).unwrap();
        let f = w.derive().unwrap();
        // cells with min(t, c) > 0.5: 2 × 2 of 16
        assert_eq!(f.observed_survival().eval(0.5), 0.25);
        for (name, v) in f.invariant_defects() {
            assert!(v < 1e-12, "{name}: {v}");
        }
    }

    #[test]
    fn rejects_bad_worlds() {
        assert!(DiscreteWorld::full(1, vec![1.0], vec![latent(1.0, 1, 1.0, 0.5)]).is_err());
        assert!(DiscreteWorld::full(1, vec![1.0], vec![latent(2.0, 1, 1.0, 1.0)]).is_err());
        assert!(DiscreteWorld::full(1, vec![1.0], vec![latent(1.0, 2, 1.0, 1.0)]).is_err());
        assert!(DiscreteWorld::full(1, vec![2.0, 1.0], vec![latent(1.0, 1, 1.0, 1.0)]).is_err());
        assert!(DiscreteWorld::observed(1, vec![1.0], vec![ObservedAtom { t: 1.0, status: 2, p: 1.0 }]).is_err());
    }

    #[test]
    fn observed_only_lacks_latent_parts() {
        let w = DiscreteWorld::observed(
            1,
            vec![1.0, 2.0],
            vec![ObservedAtom { t: 1.0, status: 0, p: 0.5 }, ObservedAtom { t: 2.0, status: 1, p: 0.5 }],
        )
        .unwrap();
        let f = w.derive().unwrap();
        assert!(matches!(f.latent(), Err(Error::ObservedOnly)));
        assert!(matches!(f.censoring_survival(), Err(Error::ObservedOnly)));
        assert_eq!(f.observed().hazard[0][1], 0.5);
        assert_eq!(f.check_survival().eval(1.0), 1.0);
    }

    fn dependent_world() -> DiscreteWorld {
        DiscreteWorld::full(
            1,
            vec![1.0, 2.0, 3.0],
            vec![
                latent(1.0, 1, f64::INFINITY, 0.3),
                latent(3.0, 1, 1.0, 0.4),
                latent(2.0, 1, f64::INFINITY, 0.3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn reconstruction_without_censoring_is_truth() {
        let w = DiscreteWorld::full(
            2,
            vec![1.0, 2.0],
            vec![latent(1.0, 1, f64::INFINITY, 0.3), latent(2.0, 2, f64::INFINITY, 0.7)],
        )
        .unwrap();
        let f = w.derive().unwrap();
        for t in [0.5, 1.0, 2.0] {
            let p = prodint_reconstruct(&f, t).unwrap();
            assert!(p.max_abs_diff(&f.truth_matrix(t).unwrap()) < 1e-12);
        }
        assert!(matches!(prodint_reconstruct(&f, 3.0), Err(Error::OutsideJ { .. })));
    }

    #[test]
    fn reconstruction_misses_under_dependent_censoring() {
        let f = dependent_world().derive().unwrap();
        // brute force: S(2) = P(T > 2) = 0.4 while the observed hazards kill everyone by 2
        let truth_s2: f64 = 0.4;
        let p = prodint_reconstruct(&f, 2.0).unwrap();
        assert!((p.get(0, 0) - 0.0).abs() < 1e-12);
        assert!((p.get(0, 0) - truth_s2).abs() > 0.05);
    }

    #[test]
    fn product_structure_of_observed_survival() {
        let f = dependent_world().derive().unwrap();
        let tot = f.observed_hazard_matrix().total();
        let chk = f.check_hazard0();
        for &t in f.grid() {
            let lhs = f.observed_survival().eval(t);
            let rhs = prodint_scalar(&tot, 0.0, t).unwrap() * prodint_scalar(&chk, 0.0, t).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn incidence_and_survival_decompositions() {
        let f = dependent_world().derive().unwrap();
        let l = f.latent().unwrap();
        let o = f.observed();
        for k in 1..=f.m() {
            // F̃_j(t) = Σ a_j ΔF_j
            let lhs: f64 = o.exit_mass[1][..=k].iter().sum();
            let rhs: f64 = (1..=k).map(|s| l.a[1][s].unwrap_or(0.0) * l.event_mass[1][s]).sum();
            assert!((lhs - rhs).abs() < 1e-12);
            // S̃(s−) = P(T̃ ≥ s | T ≥ s) S(s−)
            let cond = f.prob(|a| a.exit >= k && a.t >= k) / f.prob(|a| a.t >= k);
            assert!((o.surv_left[k] - cond * l.surv_left[k]).abs() < 1e-12);
        }
    }
}
