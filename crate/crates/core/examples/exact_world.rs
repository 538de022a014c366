//! Builds a small latent world by hand and prints its derived functionals.

use censoring::model::{DiscreteWorld, LatentAtom};

fn main() -> censoring::Result<()> {
    let inf = f64::INFINITY;
    let atoms = vec![
        LatentAtom { t: 1.0, cause: 1, c: inf, p: 0.2 },
        LatentAtom { t: 2.0, cause: 2, c: 1.0, p: 0.3 },
        LatentAtom { t: 3.0, cause: 1, c: 2.0, p: 0.1 },
        LatentAtom { t: 3.0, cause: 2, c: inf, p: 0.4 },
    ];
    let world = DiscreteWorld::full(2, vec![1.0, 2.0, 3.0], atoms)?;
    let f = world.derive()?;
    println!("tau = {}, slots in J: {:?}", f.tau(), f.j_slots());
    for atom in world.observed_law() {
        println!("P(T~ = {}, D~ = {}) = {}", atom.t, atom.status, atom.p);
    }
    let s = f.event_survival()?;
    let g = f.observed_survival();
    for &t in f.times() {
        println!("t = {t}: S(t) = {:.4}, observed survival = {:.4}", s.eval(t), g.eval(t));
    }
    for (name, v) in f.invariant_defects() {
        println!("{name}: {v:e}");
    }
    Ok(())
}
