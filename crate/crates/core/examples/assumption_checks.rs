//! Runs every assumption check on a dependent world and prints the verdicts.

use censoring::bench::dependent_counterexample;
use censoring::props::{validate_appendix_identities, AssumptionReport, DEFAULT_TOLERANCE};

fn main() -> censoring::Result<()> {
    let f = dependent_counterexample().derive()?;
    let report = AssumptionReport::build(&f, DEFAULT_TOLERANCE)?;
    for p in &report.properties {
        println!("{:<50} holds={:?} defect={:?}", p.name, p.holds, p.defect);
    }
    for fam in &report.families {
        println!("family {:<28} holds={:?}", fam.name, fam.holds);
    }
    for c in &report.cross_checks {
        println!("cross-check {:<48} {:?}", c.name, c.holds);
    }
    for (name, d) in validate_appendix_identities(&f)? {
        println!("identity {name}: {:e}", d.value);
    }
    Ok(())
}
