//! Random finite worlds for property-based tests and experiments.
//!
//! Families differ in which assumptions they satisfy by construction, so a
//! sweep over all of them exercises both sides of every equivalence.

use rand::Rng;

use crate::latent;
use crate::model::{DiscreteWorld, LatentAtom, ObservedAtom, WorldFunctionals};
use crate::prodint::HazardMatrix;
use crate::stepfn::AtomicMeasure;

/// How a random full world couples `(T, D)` with `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Unstructured joint law.
    Generic,
    /// `C` independent of `(T, D)`.
    Independent,
    /// `(T, D)` representative, `C` arbitrary beyond `C = T̃` on censored atoms.
    RepresentativeOnly,
    /// `C` representative, `(T, D)` arbitrary beyond `T = T̃` on observed events.
    CensRepresentativeOnly,
    /// Independent, then event mass exchanged between two censoring times
    /// without changing the law of `(T, D)`.
    EventSwap,
    /// Independent, then censoring mass exchanged between two event times
    /// without changing the law of `C`.
    CensorSwap,
    /// Both exchanges.
    BothSwap,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Generic,
        Family::Independent,
        Family::RepresentativeOnly,
        Family::CensRepresentativeOnly,
        Family::EventSwap,
        Family::CensorSwap,
        Family::BothSwap,
    ];
}

/// Grid `1, 2, …, m` scaled by a random positive factor.
pub fn random_grid<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let scale = [0.25, 0.5, 1.0, 2.0][rng.gen_range(0..4)];
    (1..=m).map(|k| k as f64 * scale).collect()
}

/// Non-negative weights normalised to one, with roughly `sparsity` of them zero.
fn weights<R: Rng>(rng: &mut R, n: usize, sparsity: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(sparsity) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        let i = rng.gen_range(0..n);
        w[i] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Random observed law on an `m`-point grid. The last grid point carries
/// event mass only, so every constructed `T` stays on the grid.
pub fn random_observed_world<R: Rng>(rng: &mut R, d: usize, m: usize) -> DiscreteWorld {
    let grid = random_grid(rng, m);
    let cells: Vec<(usize, usize)> = (0..m)
        .flat_map(|k| (0..=d).map(move |j| (k, j)))
        .filter(|&(k, j)| k + 1 < m || j > 0)
        .collect();
    let w = weights(rng, cells.len(), 0.3);
    let mut atoms: Vec<ObservedAtom> = cells
        .iter()
        .zip(&w)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&(k, j), &p)| ObservedAtom { t: grid[k], status: j, p })
        .collect();
    if !atoms.iter().any(|a| a.t == grid[m - 1]) {
        // keep the last point reachable
        let last = atoms.len() - 1;
        atoms[last].p /= 2.0;
        let p = atoms[last].p;
        atoms.push(ObservedAtom { t: grid[m - 1], status: rng.gen_range(1..=d), p });
    }
    DiscreteWorld::observed(d, grid, atoms).expect("random observed law is valid")
}

fn random_event_law<R: Rng>(rng: &mut R, d: usize, m: usize) -> Vec<(usize, usize, f64)> {
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|k| (1..=d).map(move |j| (k, j))).collect();
    let w = weights(rng, cells.len(), 0.3);
    cells.into_iter().zip(w).filter(|c| c.1 > 0.0).map(|((k, j), p)| (k, j, p)).collect()
}

/// Censoring law over slots `0..m` plus `m` for `∞`.
fn random_censoring_law<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    weights(rng, m + 1, 0.3)
}

/// Random full world from the given family on an `m`-point grid.
pub fn random_world<R: Rng>(rng: &mut R, family: Family, d: usize, m: usize) -> DiscreteWorld {
    let grid = random_grid(rng, m);
    let time_of_c = |c: usize| if c == m { f64::INFINITY } else { grid[c] };
    match family {
        Family::Generic => {
            let n = rng.gen_range(1..=2 * m * d + 2);
            let w = weights(rng, n, 0.0);
            let atoms = w
                .into_iter()
                .map(|p| LatentAtom {
                    t: grid[rng.gen_range(0..m)],
                    cause: rng.gen_range(1..=d),
                    c: time_of_c(rng.gen_range(0..=m)),
                    p,
                })
                .collect();
            DiscreteWorld::full(d, grid.clone(), atoms).expect("random world is valid")
        }
        Family::Independent => {
            let events = random_event_law(rng, d, m);
            let cens = random_censoring_law(rng, m);
            let mut atoms = Vec::new();
            for &(k, j, p) in &events {
                for (c, &q) in cens.iter().enumerate() {
                    if q > 0.0 {
                        atoms.push(LatentAtom { t: grid[k], cause: j, c: time_of_c(c), p: p * q });
                    }
                }
            }
            DiscreteWorld::full(d, grid.clone(), atoms).expect("random world is valid")
        }
        _ => {
            let observed = random_observed_world(rng, d, m);
            coupled_world(rng, &observed.derive().expect("valid"), family)
        }
    }
}

/// Conditional laws given one observed atom, in slots of the observed world.
struct Conditional {
    exit: usize,
    status: usize,
    p: f64,
    /// `(t slot, cause, q)`.
    events: Vec<(usize, usize, f64)>,
    /// Index `m + 1` is `∞`.
    cens: Vec<f64>,
}

fn conditionals(f: &WorldFunctionals) -> Vec<Conditional> {
    let o = f.observed();
    let events = latent::construct_td(f);
    let mut out = Vec::new();
    for k in 1..=f.m() {
        for status in 0..=f.d() {
            let p = o.exit_mass[status][k];
            if p == 0.0 {
                continue;
            }
            out.push(Conditional {
                exit: k,
                status,
                p,
                events: events
                    .cells()
                    .iter()
                    .filter(|c| c.exit == k && c.status == status)
                    .map(|c| (c.t, c.cause, c.p / p))
                    .collect(),
                cens: latent::conditional_censoring_masses(f, k, status),
            });
        }
    }
    out
}

/// Moves conditional mass between two entries of two atoms so that the
/// mixture over atoms is unchanged.
fn exchange(a: &mut [f64], pa: f64, b: &mut [f64], pb: f64, x: usize, y: usize, frac: f64) {
    // atom a gains at x and loses at y, atom b the opposite
    let eps = frac * (a[y] * pa).min(b[x] * pb);
    a[x] += eps / pa;
    a[y] -= eps / pa;
    b[x] -= eps / pb;
    b[y] += eps / pb;
}

fn pick_pair<R: Rng>(rng: &mut R, n: usize) -> Option<(usize, usize)> {
    if n < 2 {
        return None;
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    Some((a.min(b), a.max(b)))
}

fn swap_events<R: Rng>(rng: &mut R, conds: &mut [Conditional], m: usize, d: usize) {
    let censored: Vec<usize> = (0..conds.len()).filter(|&i| conds[i].status == 0).collect();
    let Some((i1, i2)) = pick_pair(rng, censored.len()) else { return };
    let (i1, i2) = (censored[i1], censored[i2]);
    let dense = |c: &Conditional| {
        let mut v = vec![0.0; (m + 2) * (d + 1)];
        for &(t, j, q) in &c.events {
            v[t * (d + 1) + j] += q;
        }
        v
    };
    let (mut a, mut b) = (dense(&conds[i1]), dense(&conds[i2]));
    // entries both atoms can reach: strictly after the later censoring time
    let later = conds[i2].exit;
    let shared: Vec<usize> = (0..a.len()).filter(|&x| x / (d + 1) > later && a[x] > 0.0 && b[x] > 0.0).collect();
    let Some((x, y)) = pick_pair(rng, shared.len()) else { return };
    let frac = rng.gen_range(0.3..1.0);
    exchange(&mut a, conds[i1].p, &mut b, conds[i2].p, shared[x], shared[y], frac);
    let sparse = |v: Vec<f64>| -> Vec<(usize, usize, f64)> {
        v.into_iter()
            .enumerate()
            .filter(|e| e.1 > 0.0)
            .map(|(x, q)| (x / (d + 1), x % (d + 1), q))
            .collect()
    };
    conds[i1].events = sparse(a);
    conds[i2].events = sparse(b);
}

fn swap_censoring<R: Rng>(rng: &mut R, conds: &mut [Conditional]) {
    let observed: Vec<usize> = (0..conds.len()).filter(|&i| conds[i].status != 0).collect();
    let Some((i1, i2)) = pick_pair(rng, observed.len()) else { return };
    let (i1, i2) = (observed[i1], observed[i2]);
    let later = conds[i1].exit.max(conds[i2].exit);
    let (a, b) = (&conds[i1].cens, &conds[i2].cens);
    let shared: Vec<usize> = (later..a.len()).filter(|&c| a[c] > 0.0 && b[c] > 0.0).collect();
    let Some((x, y)) = pick_pair(rng, shared.len()) else { return };
    let frac = rng.gen_range(0.3..1.0);
    let (p1, p2) = (conds[i1].p, conds[i2].p);
    let mut a = conds[i1].cens.clone();
    let mut b = conds[i2].cens.clone();
    exchange(&mut a, p1, &mut b, p2, shared[x], shared[y], frac);
    conds[i1].cens = a;
    conds[i2].cens = b;
}

/// Replaces one side of each conditional law with an arbitrary law that is
/// still consistent with the observed atom.
fn scramble<R: Rng>(rng: &mut R, conds: &mut [Conditional], m: usize, d: usize, censoring_side: bool) {
    for c in conds.iter_mut() {
        if censoring_side && c.status != 0 {
            // C ≥ T̃ with ties counted as events
            let w = weights(rng, m + 2 - c.exit, 0.3);
            c.cens = vec![0.0; c.exit].into_iter().chain(w).collect();
        }
        if !censoring_side && c.status == 0 && c.exit < m {
            let cells: Vec<(usize, usize)> = (c.exit + 1..=m).flat_map(|t| (1..=d).map(move |j| (t, j))).collect();
            let w = weights(rng, cells.len(), 0.3);
            c.events = cells.into_iter().zip(w).filter(|e| e.1 > 0.0).map(|((t, j), q)| (t, j, q)).collect();
        }
    }
}

fn coupled_world<R: Rng>(rng: &mut R, f: &WorldFunctionals, family: Family) -> DiscreteWorld {
    let (m, d) = (f.m(), f.d());
    let mut conds = conditionals(f);
    match family {
        Family::RepresentativeOnly => scramble(rng, &mut conds, m, d, true),
        Family::CensRepresentativeOnly => scramble(rng, &mut conds, m, d, false),
        Family::EventSwap => swap_events(rng, &mut conds, m, d),
        Family::CensorSwap => swap_censoring(rng, &mut conds),
        Family::BothSwap => {
            swap_events(rng, &mut conds, m, d);
            swap_censoring(rng, &mut conds);
        }
        Family::Generic | Family::Independent => {}
    }
    let mut grid = f.grid().to_vec();
    let tail = latent::tail_time(f.grid());
    let time_of_t = |t: usize| if t == m + 1 { tail } else { f.times()[t] };
    let time_of_c = |c: usize| if c == m + 1 { f64::INFINITY } else { f.times()[c] };
    let mut atoms = Vec::new();
    for c in &conds {
        for &(t, j, q) in &c.events {
            for (cs, &r) in c.cens.iter().enumerate() {
                if r > 0.0 {
                    atoms.push(LatentAtom { t: time_of_t(t), cause: j, c: time_of_c(cs), p: c.p * q * r });
                }
            }
        }
    }
    if atoms.iter().any(|a| a.t == tail) {
        grid.push(tail);
    }
    DiscreteWorld::full(d, grid, atoms).expect("coupled world is valid")
}

/// Random atomic measure on `n` distinct times in `(0, 10]` with masses in `[0, 1)`.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize) -> AtomicMeasure {
    let mut times: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=1000) as f64 / 100.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    AtomicMeasure::new(times.into_iter().map(|t| (t, rng.gen_range(0.0..1.0)))).expect("valid measure")
}

/// Random `d`-type hazard matrix on `n` atoms whose increments sum to at most one.
pub fn random_hazard_matrix<R: Rng>(rng: &mut R, d: usize, n: usize) -> HazardMatrix {
    let atoms = (1..=n)
        .map(|k| {
            let total = if rng.gen_bool(0.1) { 1.0 } else { rng.gen_range(0.0..1.0) };
            let w = weights(rng, d, 0.0);
            (k as f64 / 2.0, w.into_iter().map(|x| x * total).collect())
        })
        .collect();
    HazardMatrix::new(d, atoms).expect("valid hazard matrix")
}
