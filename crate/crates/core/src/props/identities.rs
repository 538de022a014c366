//! Unconditional identities linking the observed and latent functionals.
//!
//! Each identity is evaluated on both sides at every grid point of `𝒥`. One
//! side is taken from the derived functionals and the other is enumerated from
//! the joint atoms wherever a conditional probability appears, so a
//! disagreement points at a bug in one of the two routes.

use super::{prefix, Defect, Worst};
use crate::error::Result;
use crate::model::WorldFunctionals;

pub const IDENTITY_NAMES: [&str; 7] = [
    "prob_vs_B",
    "prob_vs_B2",
    "B_vs_prob",
    "B_vs_prob2",
    "general_vs_cond_fixed",
    "cond_fixed_vs_constant_sum",
    "cond_fixed_vs_constant_sum2",
];

/// Returns `(name, defect)` for each identity in [`IDENTITY_NAMES`] order.
pub fn validate_appendix_identities(f: &WorldFunctionals) -> Result<Vec<(&'static str, Defect)>> {
    let v = Values::new(f)?;
    Ok(vec![
        (IDENTITY_NAMES[0], v.prob_vs_b()),
        (IDENTITY_NAMES[1], v.prob_vs_b2()),
        (IDENTITY_NAMES[2], v.b_vs_prob()),
        (IDENTITY_NAMES[3], v.b_vs_prob2()),
        (IDENTITY_NAMES[4], v.general_vs_cond_fixed()),
        (IDENTITY_NAMES[5], v.cond_fixed_vs_constant_sum()),
        (IDENTITY_NAMES[6], v.cond_fixed_vs_constant_sum2(false)),
    ])
}

/// The censoring constant-sum identity with the inner integral running to `t`
/// rather than `s`. Not an identity in general; kept to show why.
pub fn cond_fixed_vs_constant_sum2_upper_t(f: &WorldFunctionals) -> Result<Defect> {
    Ok(Values::new(f)?.cond_fixed_vs_constant_sum2(true))
}

struct Values<'a> {
    f: &'a WorldFunctionals,
    /// `F_j(t)` per slot.
    incidence: Vec<Vec<f64>>,
    /// `G(t)` per slot.
    cens_cdf: Vec<f64>,
    /// `Σ_j Σ_{u ≤ t} ΔF̃_j(u) / K(u−)`.
    weighted: Vec<f64>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl<'a> Values<'a> {
    fn new(f: &'a WorldFunctionals) -> Result<Self> {
        let l = f.latent()?;
        let o = f.observed();
        let incidence = l.event_mass.iter().map(|row| prefix(row)).collect();
        let cens_cdf = prefix(&l.cens_mass[..=f.m()]);
        let per: Vec<f64> = (0..=f.m())
            .map(|u| ratio((1..=f.d()).map(|j| o.exit_mass[j][u]).sum(), l.cens_surv_left[u]))
            .collect();
        Ok(Self {
            f,
            incidence,
            cens_cdf,
            weighted: prefix(&per),
        })
    }

    fn t(&self, k: usize) -> f64 {
        self.f.times()[k]
    }

    /// `P(T̃ < t | T ≥ t)` by enumeration.
    fn early_exit_given_alive(&self, k: usize) -> f64 {
        self.f.prob(|a| a.exit < k && a.t >= k) / self.f.prob(|a| a.t >= k)
    }

    /// `P(T ≤ t | C ≥ t)` by enumeration.
    fn dead_given_uncensored(&self, k: usize) -> f64 {
        self.f.prob(|a| a.t <= k && a.c >= k) / self.f.prob(|a| a.c >= k)
    }

    /// `P(T̃ = s, D̃ = 0 | C = s)` by enumeration.
    fn censored_given_c(&self, s: usize) -> f64 {
        ratio(self.f.prob(|a| a.c == s && a.exit == s && a.status == 0), self.f.prob(|a| a.c == s))
    }

    /// `P(T ≤ t, D = j | T̃ = s, D̃ = 0)` by enumeration.
    fn event_given_censored(&self, j: usize, t: usize, s: usize) -> f64 {
        let f = self.f;
        ratio(
            f.prob(|a| a.exit == s && a.status == 0 && a.t <= t && a.cause == j),
            f.observed().exit_mass[0][s],
        )
    }

    /// `F_j(t | u) = (F_j(t) − F_j(u)) / S(u)`.
    fn conditional_incidence(&self, j: usize, t: usize, u: usize) -> f64 {
        let l = self.f.latent().expect("checked in new");
        ratio(self.incidence[j][t] - self.incidence[j][u], l.surv[u])
    }

    fn prob_vs_b(&self) -> Defect {
        let f = self.f;
        let l = f.latent().expect("checked in new");
        let o = f.observed();
        let mut worst = Worst::new();
        for k in f.j_slots() {
            if l.surv_left[k] == 0.0 {
                continue;
            }
            let lhs = self.early_exit_given_alive(k);
            let mut rhs = l.b[k];
            for s in 1..k {
                rhs += o.surv_left[s] / l.surv[s] * (o.hazard_total[s] - l.hazard_total[s]);
            }
            worst.see(lhs - rhs, &[self.t(k)], None, "prob_vs_B");
        }
        worst.finish()
    }

    fn prob_vs_b2(&self) -> Defect {
        let f = self.f;
        let l = f.latent().expect("checked in new");
        let o = f.observed();
        let mut worst = Worst::new();
        for k in f.j_slots() {
            if l.cens_surv_left[k] == 0.0 {
                continue;
            }
            let lhs = self.dead_given_uncensored(k);
            let mut rhs = self.weighted[k];
            for s in 1..k {
                rhs += ratio(o.check_surv[s], l.cens_surv[s]) * (o.check_hazard0[s] - l.cens_hazard[s]);
            }
            worst.see(lhs - rhs, &[self.t(k)], None, "prob_vs_B2");
        }
        worst.finish()
    }

    fn b_vs_prob(&self) -> Defect {
        let f = self.f;
        let l = f.latent().expect("checked in new");
        let mut worst = Worst::new();
        for k in f.j_slots() {
            if l.surv_left[k] == 0.0 {
                continue;
            }
            let mut sum = 0.0;
            for s in 1..k {
                for j in 1..=f.d() {
                    if let Some(a) = l.a[j][s] {
                        sum += (1.0 - a - l.b[s]) * l.event_mass[j][s];
                    }
                }
            }
            let rhs = self.early_exit_given_alive(k) + sum / l.surv_left[k];
            worst.see(l.b[k] - rhs, &[self.t(k)], None, "B_vs_prob");
        }
        worst.finish()
    }

    fn b_vs_prob2(&self) -> Defect {
        let f = self.f;
        let l = f.latent().expect("checked in new");
        let mut worst = Worst::new();
        for k in f.j_slots() {
            if l.cens_surv_left[k] == 0.0 {
                continue;
            }
            let mut sum = 0.0;
            for s in 1..k {
                if l.cens_mass[s] > 0.0 {
                    sum += (1.0 - self.censored_given_c(s) - self.weighted[s]) * l.cens_mass[s];
                }
            }
            let rhs = self.dead_given_uncensored(k) + sum / l.cens_surv_left[k];
            worst.see(self.weighted[k] - rhs, &[self.t(k)], None, "B_vs_prob2");
        }
        worst.finish()
    }

    fn general_vs_cond_fixed(&self) -> Defect {
        let f = self.f;
        let l = f.latent().expect("checked in new");
        let o = f.observed();
        let mut worst = Worst::new();
        for s in 0..=f.tau_slot() {
            if o.surv[s] == 0.0 {
                continue;
            }
            let alive = f.prob(|a| a.t > s);
            let observed = f.prob(|a| a.exit > s);
            for t in s + 1..=f.m() {
                for j in 1..=f.d() {
                    let lhs = f.prob(|a| a.t > s && a.t <= t && a.cause == j) / alive
                        - f.prob(|a| a.exit > s && a.t <= t && a.cause == j) / observed;
                    let mut rhs = 0.0;
                    for u in s + 1..=t {
                        let w = o.surv_left[u] / o.surv[s];
                        let fj = self.conditional_incidence(j, t, u);
                        rhs += fj * w * (o.hazard_total[u] - l.hazard_total[u]);
                        rhs += w * (l.hazard[j][u] - o.hazard[j][u]);
                        if o.exit_mass[0][u] > 0.0 {
                            rhs += (fj - self.event_given_censored(j, t, u)) * o.exit_mass[0][u] / o.surv[s];
                        }
                    }
                    worst.see(lhs - rhs, &[self.t(s), self.t(t)], Some(j), "general_vs_cond_fixed");
                }
            }
        }
        worst.finish()
    }

    fn cond_fixed_vs_constant_sum(&self) -> Defect {
        let f = self.f;
        let l = f.latent().expect("checked in new");
        let o = f.observed();
        let mut worst = Worst::new();
        for t in f.j_slots() {
            for j in 1..=f.d() {
                let mut lhs = 0.0;
                let mut rhs = 0.0;
                for s in 1..=t {
                    if o.exit_mass[0][s] > 0.0 {
                        lhs += (self.conditional_incidence(j, t, s) - self.event_given_censored(j, t, s))
                            * o.exit_mass[0][s];
                    }
                    if let Some(a) = l.a[j][s] {
                        rhs += (a + l.b[s] - 1.0) * l.event_mass[j][s];
                    }
                }
                worst.see(lhs - rhs, &[self.t(t)], Some(j), "cond_fixed_vs_constant_sum");
            }
        }
        worst.finish()
    }

    fn cond_fixed_vs_constant_sum2(&self, inner_to_t: bool) -> Defect {
        let f = self.f;
        let l = f.latent().expect("checked in new");
        let o = f.observed();
        let mut worst = Worst::new();
        for t in f.j_slots() {
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for s in 1..=t {
                for j in 1..=f.d() {
                    let exits = o.exit_mass[j][s];
                    if exits > 0.0 {
                        let c_risk = ratio(self.cens_cdf[t] - self.cens_cdf[s - 1], l.cens_surv_left[s]);
                        let given = f.prob(|a| a.exit == s && a.status == j && a.c <= t) / exits;
                        lhs += (c_risk - given) * exits;
                    }
                }
                if l.cens_mass[s] > 0.0 {
                    let inner = if inner_to_t { self.weighted[t] } else { self.weighted[s] };
                    rhs += (self.censored_given_c(s) + inner - 1.0) * l.cens_mass[s];
                }
            }
            worst.see(lhs - rhs, &[self.t(t)], None, "cond_fixed_vs_constant_sum2");
        }
        worst.finish()
    }
}
