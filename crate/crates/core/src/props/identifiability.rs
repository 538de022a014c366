//! Identity of forces of mortality and its three equivalent forms.

use super::{check_cause, check_window, prefix, Defect, ObservedEvent, Worst};
use crate::error::{Error, Result};
use crate::model::WorldFunctionals;

/// `max |H̃_j(t) − H_j(t)|` over `j` and grid points of `𝒥`.
pub fn check_identity_of_forces(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let o = f.observed();
    let mut worst = Worst::new();
    for j in 1..=f.d() {
        let obs = prefix(&o.hazard[j]);
        let lat = prefix(&l.hazard[j]);
        for k in f.j_slots() {
            worst.see(obs[k] - lat[k], &[f.times()[k]], Some(j), "H̃_j vs H_j");
        }
    }
    Ok(worst.finish())
}

/// `max |a_j(t) − P(T̃ ≥ t | T ≥ t)|` over `F_j`-atoms in `𝒥`.
pub fn check_status_independent_observation(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let mut worst = Worst::new();
    for k in f.j_slots() {
        let at_risk = f.prob(|a| a.t >= k);
        if at_risk == 0.0 {
            continue;
        }
        let seen = f.prob(|a| a.t >= k && a.exit >= k) / at_risk;
        for j in 1..=f.d() {
            if let Some(a) = l.a[j][k] {
                worst.see(a - seen, &[f.times()[k]], Some(j), "a_j(t) vs P(T̃ ≥ t | T ≥ t)");
            }
        }
    }
    Ok(worst.finish())
}

/// `max |a_j(t) + B(t) − 1|` over `F_j`-atoms in `𝒥`.
pub fn check_constant_sum(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let mut worst = Worst::new();
    for k in f.j_slots() {
        for j in 1..=f.d() {
            if let Some(a) = l.a[j][k] {
                worst.see(a + l.b[k] - 1.0, &[f.times()[k]], Some(j), "a_j(t) + B(t) − 1");
            }
        }
    }
    Ok(worst.finish())
}

/// Per observed atom, the increment of `Ñ_j − ∫ Ỹ dH_j` over `(s, t]` in slots.
fn weak_increments(f: &WorldFunctionals, cum_h: &[f64], j: usize, s: usize, t: usize) -> Vec<f64> {
    f.exits()
        .iter()
        .map(|&(e, status, _)| {
            if e <= s {
                return 0.0;
            }
            let jump = if e <= t && status == j { 1.0 } else { 0.0 };
            jump - (cum_h[t.min(e)] - cum_h[s])
        })
        .collect()
}

/// `E[(M_j(t) − M_j(s)) 1_A]` for `M_j = Ñ_j − ∫ Ỹ dH_j`, by enumeration.
pub fn martingale_defect_weak(f: &WorldFunctionals, j: usize, s: f64, t: f64, event: ObservedEvent) -> Result<f64> {
    check_cause(f, j)?;
    check_window(s, t)?;
    let l = f.latent()?;
    let cum_h = prefix(&l.hazard[j]);
    let (ss, ts) = (f.slot_of(s), f.slot_of(t));
    let inc = weak_increments(f, &cum_h, j, ss, ts);
    let member: Box<dyn Fn(usize, usize) -> bool> = match event {
        ObservedEvent::Whole => Box::new(|_, _| true),
        ObservedEvent::Survived(u) => {
            if u > s {
                return Err(Error::BadEvent(format!("{{T̃ > {u}}} is not known at time {s}")));
            }
            let us = f.slot_of(u);
            Box::new(move |e, _| e > us)
        }
        ObservedEvent::Exited { by, status } => {
            if by > s || status > f.d() {
                return Err(Error::BadEvent(format!("{{T̃ ≤ {by}, D̃ = {status}}} is not known at time {s}")));
            }
            let us = f.slot_of(by);
            Box::new(move |e, k| e <= us && k == status)
        }
    };
    Ok(f.exits()
        .iter()
        .zip(&inc)
        .filter(|((e, k, _), _)| member(*e, *k))
        .map(|((_, _, p), x)| p * x)
        .sum())
}

/// Sweeps every generator of `F̃_s` for every grid pair `s < t` and type `j`,
/// given increments computed per observed atom.
pub(crate) fn sweep_observed_generators(
    f: &WorldFunctionals,
    worst: &mut Worst,
    label: &str,
    cause: Option<usize>,
    increments: impl Fn(usize, usize) -> Vec<f64>,
) {
    let m = f.m();
    let d = f.d();
    let times = f.times();
    for s in 0..m {
        for t in s + 1..=m {
            let inc = increments(s, t);
            // bucket[e][k] = Σ p·increment over atoms exiting at e with status k
            let mut bucket = vec![vec![0.0; d + 1]; m + 1];
            for (&(e, k, p), x) in f.exits().iter().zip(&inc) {
                bucket[e][k] += p * x;
            }
            let whole: f64 = bucket.iter().flatten().sum();
            worst.see(whole, &[times[s], times[t]], cause, &format!("{label}: whole space"));
            // {T̃ > u}
            let mut above: f64 = whole;
            for u in 0..=s {
                above -= bucket[u].iter().sum::<f64>();
                worst.see(above, &[times[s], times[t], times[u]], cause, &format!("{label}: {{T̃ > u}}"));
            }
            // {T̃ ≤ u, D̃ = k}
            let mut below = vec![0.0; d + 1];
            for u in 1..=s {
                for k in 0..=d {
                    below[k] += bucket[u][k];
                    worst.see(
                        below[k],
                        &[times[s], times[t], times[u]],
                        cause,
                        &format!("{label}: {{T̃ ≤ u, D̃ = {k}}}"),
                    );
                }
            }
        }
    }
}

/// Worst weak-martingale defect over all generator events and grid windows.
pub fn check_weak_martingale(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let mut worst = Worst::new();
    for j in 1..=f.d() {
        let cum_h = prefix(&l.hazard[j]);
        sweep_observed_generators(f, &mut worst, "weak martingale", Some(j), |s, t| {
            weak_increments(f, &cum_h, j, s, t)
        });
    }
    Ok(worst.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiscreteWorld, LatentAtom};

    fn world(d: usize, grid: Vec<f64>, atoms: &[(f64, usize, f64, f64)]) -> WorldFunctionals {
        let atoms = atoms.iter().map(|&(t, cause, c, p)| LatentAtom { t, cause, c, p }).collect();
        DiscreteWorld::full(d, grid, atoms).unwrap().derive().unwrap()
    }

    fn dependent() -> WorldFunctionals {
        let inf = f64::INFINITY;
        world(1, vec![1.0, 2.0, 3.0], &[(1.0, 1, inf, 0.3), (3.0, 1, 1.0, 0.4), (2.0, 1, inf, 0.3)])
    }

    #[test]
    fn no_censoring_has_no_defect() {
        let inf = f64::INFINITY;
        let f = world(2, vec![1.0, 2.0, 3.0], &[(1.0, 1, inf, 0.2), (2.0, 2, inf, 0.5), (3.0, 1, inf, 0.3)]);
        assert_eq!(check_identity_of_forces(&f).unwrap().value, 0.0);
        assert_eq!(check_status_independent_observation(&f).unwrap().value, 0.0);
        assert_eq!(check_constant_sum(&f).unwrap().value, 0.0);
        assert!(check_weak_martingale(&f).unwrap().value < 1e-15);
        assert!(martingale_defect_weak(&f, 1, 0.0, 3.0, ObservedEvent::Whole).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dependent_world_by_hand() {
        let f = dependent();
        // H_1 jumps: 0.3 at 1, 0.3/0.7 at 2, 1 at 3; observed: 0.3 at 1, 1 at 2
        let d = check_identity_of_forces(&f).unwrap();
        let expected = 1.0 - 0.3 / 0.7;
        assert!((d.value - expected).abs() < 1e-12, "{}", d.value);
        assert_eq!(d.witness.unwrap().times, vec![2.0]);
        // a_1(2) = 1 while P(T̃ ≥ 2 | T ≥ 2) = 0.3 / 0.7
        let s = check_status_independent_observation(&f).unwrap();
        assert!((s.value - (1.0 - 0.3 / 0.7)).abs() < 1e-12);
        // B(2) = P(T̃ = 1, D̃ = 0) / S(1) = 0.4 / 0.7
        let c = check_constant_sum(&f).unwrap();
        assert!((c.value - 0.4 / 0.7).abs() < 1e-12);
        assert!(check_weak_martingale(&f).unwrap().value > 0.1);
    }

    #[test]
    fn weak_martingale_on_a_single_event() {
        let f = dependent();
        // E[M(2) − M(1); T̃ > 1] = P(T̃ = 2, D̃ = 1) − ΔH_1(2)·P(T̃ ≥ 2) = 0.3 − 0.3·0.3/0.7
        let v = martingale_defect_weak(&f, 1, 1.0, 2.0, ObservedEvent::Survived(1.0)).unwrap();
        assert!((v - (0.3 - 0.09 / 0.7)).abs() < 1e-12);
        assert!(matches!(
            martingale_defect_weak(&f, 1, 1.0, 2.0, ObservedEvent::Survived(1.5)),
            Err(Error::BadEvent(_))
        ));
        assert!(martingale_defect_weak(&f, 2, 1.0, 2.0, ObservedEvent::Whole).is_err());
    }
}
