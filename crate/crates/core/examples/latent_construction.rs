//! Builds an independent latent world from an observed law and checks it.

use censoring::latent::{construct_c, verify_existence};
use censoring::model::{DiscreteWorld, ObservedAtom};

fn main() -> censoring::Result<()> {
    let law = vec![
        ObservedAtom { t: 1.0, status: 0, p: 0.2 },
        ObservedAtom { t: 1.0, status: 1, p: 0.1 },
        ObservedAtom { t: 2.0, status: 2, p: 0.3 },
        ObservedAtom { t: 3.0, status: 0, p: 0.15 },
        ObservedAtom { t: 4.0, status: 1, p: 0.25 },
    ];
    let f = DiscreteWorld::observed(2, vec![1.0, 2.0, 3.0, 4.0], law)?.derive()?;
    let c = construct_c(&f);
    for s in 0..=f.m() {
        println!("P(C > {}) = {:.4}", f.times()[s], c.survival_at(s));
    }
    println!("mass of C at infinity: {}", c.mass_at_infinity());
    let e = verify_existence(&f)?;
    println!("independence defect: {:e}", e.defect);
    println!("improper C: {}, defective tail: {:?}", e.constructed.improper_c, e.constructed.defective_tail);
    let rebuilt = e.constructed.world.observed_law();
    println!("observed law of the constructed world: {rebuilt:?}");
    Ok(())
}
