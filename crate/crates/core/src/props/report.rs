//! Machine-readable summary of every assumption check on one world.

use serde::Serialize;

use super::*;
use crate::latent;
use crate::model::WorldFunctionals;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRecord {
    pub name: String,
    pub family: String,
    pub applicable: bool,
    pub holds: Option<bool>,
    pub defect: Option<f64>,
    pub witness: Option<Witness>,
    pub reason: Option<String>,
}

impl PropertyRecord {
    fn from_defect(name: &str, family: &str, d: Defect, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            family: family.to_string(),
            applicable: true,
            holds: Some(d.holds(tol)),
            defect: Some(d.value),
            witness: d.witness,
            reason: None,
        }
    }

    fn not_applicable(name: &str, family: &str) -> Self {
        Self {
            name: name.to_string(),
            family: family.to_string(),
            applicable: false,
            holds: None,
            defect: None,
            witness: None,
            reason: Some("not applicable: the world has no latent (T, D, C) law".to_string()),
        }
    }
}

/// One row of the assumption table: an equivalence class of properties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRecord {
    pub name: String,
    pub members: Vec<String>,
    pub holds: Option<bool>,
    /// Largest defect among the members.
    pub defect: Option<f64>,
    /// Whether every member reached the same verdict.
    pub members_agree: Option<bool>,
}

/// A logical relation between families that must hold in every world.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub name: String,
    pub holds: Option<bool>,
}

/// Facts about the latent world constructed from the observed law alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceSummary {
    pub tau: f64,
    pub j_closed: bool,
    pub improper_c: bool,
    pub defective_tail: Option<f64>,
    pub existence_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub tolerance: f64,
    pub observed_only: bool,
    pub properties: Vec<PropertyRecord>,
    pub families: Vec<FamilyRecord>,
    pub cross_checks: Vec<CrossCheck>,
    pub identities: Vec<PropertyRecord>,
    pub existence: ExistenceSummary,
    pub martingale_method: String,
}

pub const FAMILIES: [(&str, &[&str]); 6] = [
    (
        "identifiability",
        &["identity_of_forces", "weak_martingale", "status_independent_observation", "constant_sum"],
    ),
    (
        "representativity",
        &["strong_martingale", "non_prognostic_observation", "non_prognostic_censoring", "independent_C_exists"],
    ),
    (
        "cens_identifiability",
        &[
            "cens_identifiability.hazard",
            "cens_identifiability.martingale",
            "cens_identifiability.conditional",
            "cens_identifiability.constant_sum",
        ],
    ),
    ("cens_representativity", &["cens_representativity"]),
    (
        "pointwise_independence",
        &[
            "pointwise_independence.hazards",
            "pointwise_independence.incidences",
            "pointwise_independence.conditional",
        ],
    ),
    ("full_independence", &["full_independence"]),
];

type Checker = fn(&WorldFunctionals) -> crate::Result<Defect>;

fn checkers() -> Vec<(&'static str, Checker)> {
    vec![
        ("identity_of_forces", check_identity_of_forces),
        ("weak_martingale", check_weak_martingale),
        ("status_independent_observation", check_status_independent_observation),
        ("constant_sum", check_constant_sum),
        ("strong_martingale", check_strong_martingale),
        ("non_prognostic_observation", check_non_prognostic_observation),
        ("non_prognostic_censoring", check_non_prognostic_censoring),
        ("independent_C_exists", check_independent_c_exists),
        ("cens_identifiability.hazard", check_cens_hazards),
        ("cens_identifiability.martingale", check_cens_martingale),
        ("cens_identifiability.conditional", check_cens_conditional),
        ("cens_identifiability.constant_sum", check_cens_constant_sum),
        ("cens_representativity", check_cens_representativity),
        ("pointwise_independence.hazards", |f| Ok(check_pointwise_independence(f)?.hazards)),
        ("pointwise_independence.incidences", |f| Ok(check_pointwise_independence(f)?.incidences)),
        ("pointwise_independence.conditional", |f| Ok(check_pointwise_independence(f)?.conditional)),
        ("full_independence", check_full_independence),
    ]
}

fn family_of(name: &str) -> &'static str {
    FAMILIES
        .iter()
        .find(|(_, members)| members.contains(&name))
        .map(|(family, _)| *family)
        .expect("every property belongs to a family")
}

fn implies(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    Some(!a? || b?)
}

fn iff(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    Some(a? == b?)
}

fn and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    Some(a? && b?)
}

impl AssumptionReport {
    pub fn build(f: &WorldFunctionals, tol: f64) -> crate::Result<Self> {
        let observed_only = f.is_observed_only();
        let mut properties = Vec::new();
        for (name, check) in checkers() {
            let family = family_of(name);
            properties.push(if observed_only {
                PropertyRecord::not_applicable(name, family)
            } else {
                PropertyRecord::from_defect(name, family, check(f)?, tol)
            });
        }

        let families: Vec<FamilyRecord> = FAMILIES
            .iter()
            .map(|(family, members)| {
                let recs: Vec<&PropertyRecord> = properties.iter().filter(|p| p.family == *family).collect();
                let verdicts: Option<Vec<bool>> = recs.iter().map(|p| p.holds).collect();
                FamilyRecord {
                    name: family.to_string(),
                    members: members.iter().map(|m| m.to_string()).collect(),
                    holds: verdicts.as_ref().map(|v| v.iter().all(|&h| h)),
                    defect: recs.iter().map(|p| p.defect).try_fold(0.0f64, |acc, d| Some(acc.max(d?))),
                    members_agree: verdicts.map(|v| v.iter().all(|&h| h == v[0])),
                }
            })
            .collect();

        let fam = |name: &str| families.iter().find(|r| r.name == name).and_then(|r| r.holds);
        let prop = |name: &str| properties.iter().find(|r| r.name == name).and_then(|r| r.holds);
        let product = if observed_only { None } else { Some(check_pointwise_independence(f)?.product_consequence) };
        let mut cross_checks = vec![
            CrossCheck {
                name: "families_agree_internally".to_string(),
                holds: families.iter().map(|r| r.members_agree).try_fold(true, |acc, a| Some(acc && a?)),
            },
            CrossCheck {
                name: "representativity_implies_identifiability".to_string(),
                holds: implies(fam("representativity"), fam("identifiability")),
            },
            CrossCheck {
                name: "cens_representativity_implies_cens_identifiability".to_string(),
                holds: implies(fam("cens_representativity"), fam("cens_identifiability")),
            },
            CrossCheck {
                name: "pointwise_iff_both_identifiabilities".to_string(),
                holds: iff(
                    fam("pointwise_independence"),
                    and(fam("identifiability"), fam("cens_identifiability")),
                ),
            },
            CrossCheck {
                name: "full_iff_both_representativities".to_string(),
                holds: iff(fam("full_independence"), and(fam("representativity"), fam("cens_representativity"))),
            },
            CrossCheck {
                name: "full_implies_pointwise".to_string(),
                holds: implies(fam("full_independence"), fam("pointwise_independence")),
            },
            CrossCheck {
                name: "weak_martingale_iff_identity_of_forces".to_string(),
                holds: iff(prop("weak_martingale"), prop("identity_of_forces")),
            },
        ];
        cross_checks.push(CrossCheck {
            name: "pointwise_implies_product_survival".to_string(),
            holds: implies(fam("pointwise_independence"), product.map(|d| d.holds(tol))),
        });

        let identities = if observed_only {
            IDENTITY_NAMES.iter().map(|n| PropertyRecord::not_applicable(n, "identity")).collect()
        } else {
            validate_appendix_identities(f)?
                .into_iter()
                .map(|(n, d)| PropertyRecord::from_defect(n, "identity", d, tol))
                .collect()
        };

        let existence = latent::verify_existence(f)?;
        let existence = ExistenceSummary {
            tau: f.tau(),
            j_closed: f.observed().j_closed,
            improper_c: existence.constructed.improper_c,
            defective_tail: existence.constructed.defective_tail,
            existence_defect: existence.defect,
        };

        Ok(Self {
            tolerance: tol,
            observed_only,
            properties,
            families,
            cross_checks,
            identities,
            existence,
            martingale_method: "exact expectations over generating pi-system events of the filtration, \
                                on every pair of grid times"
                .to_string(),
        })
    }

    pub fn property(&self, name: &str) -> Option<&PropertyRecord> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyRecord> {
        self.families.iter().find(|p| p.name == name)
    }
}
