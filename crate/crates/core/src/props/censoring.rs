//! Properties of a given censoring time: censoring identifiability, censoring
//! representativity, pointwise and full independence.

use serde::Serialize;

use super::identifiability::sweep_observed_generators;
use super::{check_window, independence_defect, prefix, Defect, ObservedEvent, Worst};
use crate::error::{Error, Result};
use crate::model::WorldFunctionals;

/// `max |Ȟ₀(t) − H₀(t)|` over grid points of `𝒥` where `Š(t) > 0`.
///
/// Where `Š(t) = 0` nobody can be censored at `t` and `Ȟ₀` has no content.
pub fn check_cens_hazards(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let o = f.observed();
    let obs = prefix(&o.check_hazard0);
    let lat = prefix(&l.cens_hazard);
    let mut worst = Worst::new();
    for k in f.j_slots() {
        if o.check_surv[k] > 0.0 {
            worst.see(obs[k] - lat[k], &[f.times()[k]], Some(0), "Ȟ₀ vs H₀");
        }
    }
    Ok(worst.finish())
}

fn censoring_increments(f: &WorldFunctionals, cum_h0: &[f64], dh0: &[f64], s: usize, t: usize) -> Vec<f64> {
    f.exits()
        .iter()
        .map(|&(e, status, _)| {
            // Y̌(u) = 1{T̃ > u} + 1{T̃ = u, D̃ = 0}
            let last_strict = t.min(e.saturating_sub(1));
            let mut comp = if last_strict > s { cum_h0[last_strict] - cum_h0[s] } else { 0.0 };
            let mut jump = 0.0;
            if status == 0 && s < e && e <= t {
                comp += dh0[e];
                jump = 1.0;
            }
            jump - comp
        })
        .collect()
}

/// `E[(M₀(t) − M₀(s)) 1_A]` for `M₀ = Ñ₀ − ∫ Y̌ dH₀`.
pub fn censoring_martingale_defect(f: &WorldFunctionals, s: f64, t: f64, event: ObservedEvent) -> Result<f64> {
    check_window(s, t)?;
    let l = f.latent()?;
    let cum = prefix(&l.cens_hazard);
    let inc = censoring_increments(f, &cum, &l.cens_hazard, f.slot_of(s), f.slot_of(t));
    let (us, status) = match event {
        ObservedEvent::Whole => (None, None),
        ObservedEvent::Survived(u) if u <= s => (Some(f.slot_of(u)), None),
        ObservedEvent::Exited { by, status } if by <= s && status <= f.d() => (Some(f.slot_of(by)), Some(status)),
        _ => return Err(Error::BadEvent(format!("{event:?} is not known at time {s}"))),
    };
    Ok(f.exits()
        .iter()
        .zip(&inc)
        .filter(|((e, k, _), _)| match (us, status) {
            (None, _) => true,
            (Some(u), None) => *e > u,
            (Some(u), Some(st)) => *e <= u && *k == st,
        })
        .map(|((_, _, p), x)| p * x)
        .sum())
}

/// Worst defect of the censoring martingale over all generators of `F̃_s`.
pub fn check_cens_martingale(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let cum = prefix(&l.cens_hazard);
    let mut worst = Worst::new();
    sweep_observed_generators(f, &mut worst, "censoring martingale", Some(0), |s, t| {
        censoring_increments(f, &cum, &l.cens_hazard, s, t)
    });
    Ok(worst.finish())
}

/// `P(T̃ = t, D̃ = 0 | C = t)` by enumeration.
fn censored_given_c(f: &WorldFunctionals, k: usize) -> f64 {
    f.prob(|a| a.c == k && a.exit == k && a.status == 0) / f.prob(|a| a.c == k)
}

/// `Σ_j Σ_{u ≤ t} ΔF̃_j(u) / K(u−)` at every slot.
fn weighted_exits(f: &WorldFunctionals) -> Result<Vec<f64>> {
    let l = f.latent()?;
    let o = f.observed();
    let per: Vec<f64> = (0..=f.m())
        .map(|u| {
            let mass: f64 = (1..=f.d()).map(|j| o.exit_mass[j][u]).sum();
            if mass == 0.0 {
                0.0
            } else {
                mass / l.cens_surv_left[u]
            }
        })
        .collect();
    Ok(prefix(&per))
}

/// `max |P(T̃ = t, D̃ = 0 | C = t) − P(T > t | C ≥ t)|` over `G`-atoms in `𝒥`.
pub fn check_cens_conditional(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let mut worst = Worst::new();
    for k in f.j_slots() {
        if l.cens_mass[k] == 0.0 {
            continue;
        }
        let lhs = censored_given_c(f, k);
        let rhs = f.prob(|a| a.t > k && a.c >= k) / f.prob(|a| a.c >= k);
        worst.see(lhs - rhs, &[f.times()[k]], Some(0), "P(censored | C = t) vs P(T > t | C ≥ t)");
    }
    Ok(worst.finish())
}

/// `max |P(T̃ = t, D̃ = 0 | C = t) + Σ_j ∫₀ᵗ K(s−)⁻¹ dF̃_j − 1|` over `G`-atoms in `𝒥`.
pub fn check_cens_constant_sum(f: &WorldFunctionals) -> Result<Defect> {
    let l = f.latent()?;
    let w = weighted_exits(f)?;
    let mut worst = Worst::new();
    for k in f.j_slots() {
        if l.cens_mass[k] == 0.0 {
            continue;
        }
        let v = censored_given_c(f, k) + w[k] - 1.0;
        worst.see(v, &[f.times()[k]], Some(0), "censoring constant sum");
    }
    Ok(worst.finish())
}

/// The four forms of censoring identifiability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensIdentifiability {
    pub hazard: Defect,
    pub martingale: Defect,
    pub conditional: Defect,
    pub constant_sum: Defect,
}

pub fn check_cens_identifiability(f: &WorldFunctionals) -> Result<CensIdentifiability> {
    Ok(CensIdentifiability {
        hazard: check_cens_hazards(f)?,
        martingale: check_cens_martingale(f)?,
        conditional: check_cens_conditional(f)?,
        constant_sum: check_cens_constant_sum(f)?,
    })
}

/// `max |P(C ≤ t | T̃ = s, D̃ = j) − P(C ≤ t | C ≥ s)|` over `F̃_j`-atoms
/// `s ∈ 𝒥`, `j ≥ 1`, and grid `t`.
pub fn check_cens_representativity(f: &WorldFunctionals) -> Result<Defect> {
    f.latent()?;
    let o = f.observed();
    let times = f.times();
    let mut worst = Worst::new();
    for s in f.j_slots() {
        let at_risk = f.prob(|a| a.c >= s);
        for j in 1..=f.d() {
            let exits = o.exit_mass[j][s];
            if exits == 0.0 {
                continue;
            }
            for t in s..=f.m() {
                let lhs = f.prob(|a| a.exit == s && a.status == j && a.c <= t) / exits;
                let rhs = f.prob(|a| a.c >= s && a.c <= t) / at_risk;
                worst.see(lhs - rhs, &[times[s], times[t]], Some(j), "P(C ≤ t | exit s, type j) vs P(C ≤ t | C ≥ s)");
            }
        }
    }
    Ok(worst.finish())
}

/// The three forms of pointwise independence, plus the consequence
/// `S̃ = S·K` and `Š = S·K(t−)` they imply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseIndependence {
    pub hazards: Defect,
    pub incidences: Defect,
    pub conditional: Defect,
    pub product_consequence: Defect,
}

pub fn check_pointwise_independence(f: &WorldFunctionals) -> Result<PointwiseIndependence> {
    let l = f.latent()?;
    let o = f.observed();
    let times = f.times();
    let m = f.m();

    let mut hazards = Worst::new();
    let cum_check = prefix(&o.check_hazard0);
    let cum_h0 = prefix(&l.cens_hazard);
    for j in 1..=f.d() {
        let a = prefix(&o.hazard[j]);
        let b = prefix(&l.hazard[j]);
        for k in f.j_slots() {
            hazards.see(a[k] - b[k], &[times[k]], Some(j), "H̃_j vs H_j");
        }
    }
    for k in f.j_slots() {
        if o.check_surv[k] > 0.0 {
            hazards.see(cum_check[k] - cum_h0[k], &[times[k]], Some(0), "Ȟ₀ vs H₀");
        }
    }

    let mut incidences = Worst::new();
    for j in 0..=f.d() {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for k in 0..=m {
            lhs += o.exit_mass[j][k];
            rhs += if j == 0 {
                l.surv[k] * l.cens_mass[k]
            } else {
                l.cens_surv_left[k] * l.event_mass[j][k]
            };
            if f.j_slots().contains(&k) {
                incidences.see(lhs - rhs, &[times[k]], Some(j), "F̃_j vs its product form");
            }
        }
    }

    let mut conditional = Worst::new();
    for k in f.j_slots() {
        let c_at_risk = f.prob(|a| a.c >= k);
        for j in 1..=f.d() {
            if l.event_mass[j][k] > 0.0 {
                let lhs = f.prob(|a| a.t == k && a.cause == j && a.c >= k) / l.event_mass[j][k];
                conditional.see(lhs - c_at_risk, &[times[k]], Some(j), "P(C ≥ t | T = t, D = j) vs P(C ≥ t)");
            }
        }
        if l.cens_mass[k] > 0.0 {
            let lhs = f.prob(|a| a.c == k && a.t > k) / l.cens_mass[k];
            let rhs = f.prob(|a| a.t > k);
            conditional.see(lhs - rhs, &[times[k]], Some(0), "P(T > t | C = t) vs P(T > t)");
        }
    }

    let mut consequence = Worst::new();
    for k in 0..=m {
        consequence.see(o.surv[k] - l.surv[k] * l.cens_surv[k], &[times[k]], None, "S̃ vs S·K");
        consequence.see(o.check_surv[k] - l.surv[k] * l.cens_surv_left[k], &[times[k]], None, "Š vs S·K(t−)");
    }

    Ok(PointwiseIndependence {
        hazards: hazards.finish(),
        incidences: incidences.finish(),
        conditional: conditional.finish(),
        product_consequence: consequence.finish(),
    })
}

/// `max |P(T ≤ t, D = j, C > s) − P(T ≤ t, D = j) P(C > s)|` over the grid.
pub fn check_full_independence(f: &WorldFunctionals) -> Result<Defect> {
    f.latent()?;
    let cells: Vec<(usize, usize, usize, f64)> = f.joint().iter().map(|a| (a.t, a.cause, a.c, a.p)).collect();
    Ok(independence_defect(&cells, f.d(), f.times()))
}
