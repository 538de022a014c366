//! Non-prognostic observation and its equivalent forms.

use super::{check_cause, check_window, independence_defect, prefix, Defect, HistoryEvent, Worst};
use crate::error::{Error, Result};
use crate::latent;
use crate::model::WorldFunctionals;

/// Per full atom, the increment of `N_j − ∫ Y dH_j` over `(s, t]` in slots.
fn strong_increments(f: &WorldFunctionals, cum_h: &[f64], j: usize, s: usize, t: usize) -> Vec<f64> {
    f.joint()
        .iter()
        .map(|a| {
            if a.t <= s {
                return 0.0;
            }
            let jump = if a.t <= t && a.cause == j { 1.0 } else { 0.0 };
            jump - (cum_h[t.min(a.t)] - cum_h[s])
        })
        .collect()
}

/// `E[(M_j(t) − M_j(s)) 1_A]` for the underlying `M_j = N_j − ∫ Y dH_j`.
pub fn martingale_defect_strong(f: &WorldFunctionals, j: usize, s: f64, t: f64, event: HistoryEvent) -> Result<f64> {
    check_cause(f, j)?;
    check_window(s, t)?;
    let l = f.latent()?;
    let cum_h = prefix(&l.hazard[j]);
    let inc = strong_increments(f, &cum_h, j, f.slot_of(s), f.slot_of(t));
    let member: Box<dyn Fn(&crate::model::JointAtom) -> bool> = match event {
        HistoryEvent::Whole => Box::new(|_| true),
        HistoryEvent::AliveAndObserved { alive_past, observed_past } => {
            if alive_past > s || observed_past > alive_past {
                return Err(Error::BadEvent(format!(
                    "{{T > {alive_past}, T̃ > {observed_past}}} needs observed ≤ alive ≤ {s}"
                )));
            }
            let (ta, so) = (f.slot_of(alive_past), f.slot_of(observed_past));
            Box::new(move |a| a.t > ta && a.exit > so)
        }
        HistoryEvent::Failed { by, cause, observed_past } => {
            if by > s || observed_past > s || cause == 0 || cause > f.d() {
                return Err(Error::BadEvent(format!(
                    "{{T ≤ {by}, D = {cause}, T̃ > {observed_past}}} is not known at time {s}"
                )));
            }
            let (tb, so) = (f.slot_of(by), f.slot_of(observed_past));
            Box::new(move |a| a.t <= tb && a.cause == cause && a.exit > so)
        }
    };
    Ok(f.joint().iter().zip(&inc).filter(|(a, _)| member(a)).map(|(a, x)| a.p * x).sum())
}

/// Worst strong-martingale defect over all generators of `G_s` and windows.
pub fn check_strong_martingale(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let m = f.m();
    let d = f.d();
    let times = f.times();
    let mut worst = Worst::new();
    for j in 1..=d {
        let cum_h = prefix(&l.hazard[j]);
        for s in 0..m {
            for t in s + 1..=m {
                let inc = strong_increments(f, &cum_h, j, s, t);
                // alive[t0][e] and failed[k][t0][e] hold Σ p·increment
                let mut alive = vec![vec![0.0; m + 2]; m + 2];
                let mut failed = vec![vec![vec![0.0; m + 2]; m + 2]; d + 1];
                for (a, x) in f.joint().iter().zip(&inc) {
                    alive[a.t][a.exit] += a.p * x;
                    failed[a.cause][a.t][a.exit] += a.p * x;
                }
                // suffix sums: alive_tail[t'][s'] = Σ_{t0 > t', e > s'}
                let mut tail = vec![vec![0.0; m + 2]; m + 2];
                for t0 in (0..=m).rev() {
                    for e in (0..=m).rev() {
                        tail[t0][e] = alive[t0 + 1][e + 1] + tail[t0 + 1][e] + tail[t0][e + 1] - tail[t0 + 1][e + 1];
                    }
                }
                worst.see(tail[0][0], &[times[s], times[t]], Some(j), "strong martingale: whole space");
                for tp in 0..=s {
                    for sp in 0..=tp {
                        worst.see(
                            tail[tp][sp],
                            &[times[s], times[t], times[tp], times[sp]],
                            Some(j),
                            "strong martingale: {T > t', T̃ > s'}",
                        );
                    }
                }
                for (k, fk) in failed.iter().enumerate().skip(1) {
                    // head[s'][u'] = Σ_{t0 ≤ s', e > u'}
                    let mut head = vec![vec![0.0; m + 2]; m + 1];
                    for sp in 1..=s {
                        for up in (0..=m).rev() {
                            head[sp][up] = head[sp - 1][up] + fk[sp][up + 1] + head[sp][up + 1] - head[sp - 1][up + 1];
                        }
                        for up in 0..=s {
                            worst.see(
                                head[sp][up],
                                &[times[s], times[t], times[sp], times[up]],
                                Some(j),
                                &format!("strong martingale: {{T ≤ s', D = {k}, T̃ > u'}}"),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(worst.finish())
}

/// `max |P(T ≤ t, D = j | T̃ > s) − P(T ≤ t, D = j | T > s)|` over `s ∈ 𝒥`
/// with `P(T̃ > s) > 0` and grid `t > s`.
pub fn check_non_prognostic_observation(f: &WorldFunctionals) -> Result<Defect> {
    f.latent()?;
    let m = f.m();
    let times = f.times();
    let mut worst = Worst::new();
    for s in 0..=f.tau_slot() {
        let observed = f.prob(|a| a.exit > s);
        if observed == 0.0 {
            continue;
        }
        let alive = f.prob(|a| a.t > s);
        for t in s + 1..=m {
            for j in 1..=f.d() {
                let lhs = f.prob(|a| a.t <= t && a.cause == j && a.exit > s) / observed;
                let rhs = f.prob(|a| a.t > s && a.t <= t && a.cause == j) / alive;
                worst.see(lhs - rhs, &[times[s], times[t]], Some(j), "given T̃ > s vs given T > s");
            }
        }
    }
    Ok(worst.finish())
}

/// `max |P(T ≤ t, D = j | T̃ = s, D̃ = 0) − P(T ≤ t, D = j | T > s)|` over
/// censoring atoms `s ∈ 𝒥` and grid `t > s`.
pub fn check_non_prognostic_censoring(f: &WorldFunctionals) -> Result<Defect> {
    f.latent()?;
    let m = f.m();
    let times = f.times();
    let o = f.observed();
    let mut worst = Worst::new();
    for s in f.j_slots() {
        let censored = o.exit_mass[0][s];
        if censored == 0.0 {
            continue;
        }
        let alive = f.prob(|a| a.t > s);
        for t in s + 1..=m {
            for j in 1..=f.d() {
                let lhs = f.prob(|a| a.exit == s && a.status == 0 && a.t <= t && a.cause == j) / censored;
                let rhs = f.prob(|a| a.t > s && a.t <= t && a.cause == j) / alive;
                worst.see(lhs - rhs, &[times[s], times[t]], Some(j), "given censored at s vs given T > s");
            }
        }
    }
    Ok(worst.finish())
}

/// Couples the censoring time constructed from the observed law with the
/// world's `(T, D)` and measures its dependence on `(T, D)`.
pub fn check_independent_c_exists(f: &WorldFunctionals) -> Result<Defect> {
    f.latent()?;
    let m = f.m();
    let mut cells = Vec::new();
    for a in f.joint() {
        if a.p == 0.0 {
            continue;
        }
        for (c, q) in latent::conditional_censoring_masses(f, a.exit, a.status).into_iter().enumerate() {
            if q > 0.0 {
                cells.push((a.t, a.cause, c, a.p * q));
            }
        }
    }
    debug_assert!(cells.iter().all(|c| c.2 <= m + 1));
    Ok(independence_defect(&cells, f.d(), f.times()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiscreteWorld, LatentAtom};

    fn world(d: usize, grid: Vec<f64>, atoms: &[(f64, usize, f64, f64)]) -> WorldFunctionals {
        let atoms = atoms.iter().map(|&(t, cause, c, p)| LatentAtom { t, cause, c, p }).collect();
        DiscreteWorld::full(d, grid, atoms).unwrap().derive().unwrap()
    }

    fn product(d: usize, events: &[(f64, usize, f64)], cens: &[(f64, f64)], grid: Vec<f64>) -> WorldFunctionals {
        let mut atoms = Vec::new();
        for &(t, j, p) in events {
            for &(c, q) in cens {
                atoms.push((t, j, c, p * q));
            }
        }
        world(d, grid, &atoms)
    }

    #[test]
    fn independent_world_is_representative() {
        let f = product(
            2,
            &[(1.0, 1, 0.3), (2.0, 2, 0.3), (3.0, 1, 0.4)],
            &[(1.0, 0.2), (2.0, 0.5), (f64::INFINITY, 0.3)],
            vec![1.0, 2.0, 3.0],
        );
        assert!(check_strong_martingale(&f).unwrap().value < 1e-15);
        assert!(check_non_prognostic_observation(&f).unwrap().value < 1e-15);
        assert!(check_non_prognostic_censoring(&f).unwrap().value < 1e-15);
        assert!(check_independent_c_exists(&f).unwrap().value < 1e-15);
    }

    #[test]
    fn informative_censoring_by_hand() {
        // censoring at 1 only hits those who would have died at 3
        let inf = f64::INFINITY;
        let f = world(1, vec![1.0, 2.0, 3.0], &[(2.0, 1, inf, 0.5), (3.0, 1, 1.0, 0.25), (3.0, 1, inf, 0.25)]);
        // given censored at 1: T ≤ 2 w.p. 0; given T > 1: T ≤ 2 w.p. 0.5
        let c = check_non_prognostic_censoring(&f).unwrap();
        assert!((c.value - 0.5).abs() < 1e-12);
        assert_eq!(c.witness.unwrap().times, vec![1.0, 2.0]);
        // given T̃ > 1: T ≤ 2 w.p. 0.5 / 0.75
        let o = check_non_prognostic_observation(&f).unwrap();
        assert!((o.value - (0.5 / 0.75 - 0.5)).abs() < 1e-12);
        // E[M(2) − M(1); T > 1, T̃ > 1] = 0.5 − (0.5 / 1)·0.75
        let v = martingale_defect_strong(
            &f,
            1,
            1.0,
            2.0,
            HistoryEvent::AliveAndObserved { alive_past: 1.0, observed_past: 1.0 },
        )
        .unwrap();
        assert!((v - 0.125).abs() < 1e-12);
        assert!(check_strong_martingale(&f).unwrap().value >= 0.125 - 1e-12);
        assert!(check_independent_c_exists(&f).unwrap().value > 1e-3);
    }

    #[test]
    fn failed_generators_are_compensated() {
        let inf = f64::INFINITY;
        let f = world(1, vec![1.0, 2.0, 3.0], &[(1.0, 1, inf, 0.5), (3.0, 1, 1.0, 0.5)]);
        let v = martingale_defect_strong(
            &f,
            1,
            2.0,
            3.0,
            HistoryEvent::Failed { by: 1.0, cause: 1, observed_past: 0.0 },
        )
        .unwrap();
        assert_eq!(v, 0.0);
        assert!(matches!(
            martingale_defect_strong(&f, 1, 1.0, 3.0, HistoryEvent::Failed { by: 2.0, cause: 1, observed_past: 0.0 }),
            Err(Error::BadEvent(_))
        ));
    }
}
