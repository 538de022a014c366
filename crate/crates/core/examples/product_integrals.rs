//! Scalar and matrix product integrals over atomic hazards, and the Duhamel check.

use censoring::prodint::{duhamel_defect, forward_solve, prodint_matrix, prodint_scalar, HazardMatrix};
use censoring::stepfn::{cumulative, AtomicMeasure};

fn main() -> censoring::Result<()> {
    let h = AtomicMeasure::new([(1.0, 0.25), (2.0, 0.5), (3.0, 1.0)])?;
    println!("cumulative hazard at 2.5: {}", cumulative(&h).eval(2.5));
    for t in [0.5, 1.0, 2.0, 3.0] {
        println!("survival at {t}: {}", prodint_scalar(&h, 0.0, t)?);
    }

    let hazards = HazardMatrix::new(2, vec![(1.0, vec![0.1, 0.2]), (2.0, vec![0.3, 0.1]), (3.0, vec![0.5, 0.5])])?;
    let p = prodint_matrix(&hazards, 0.0, 3.0)?;
    println!("first row of the transition matrix over (0, 3]: {:?}", p.first_row());
    println!("row-sum defect: {:e}", p.stochastic_defect());
    let q = forward_solve(&hazards, 0.0, 3.0)?;
    println!("forward equation agrees to {:e}", p.max_abs_diff(&q));

    let other = AtomicMeasure::new([(1.0, 0.5), (2.5, 0.2)])?;
    println!("Duhamel defect: {:e}", duhamel_defect(&h, &other, 0.0, 3.0)?);
    Ok(())
}
