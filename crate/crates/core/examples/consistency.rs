//! Monte Carlo sup errors under independent and dependent censoring.

use censoring::bench::{build_example_world, consistency_experiment, dependent_counterexample, limit_gap, ExampleSpec};

fn main() -> censoring::Result<()> {
    let seeds: Vec<u64> = (0..5).collect();
    let worlds = [
        ("T1C1", build_example_world("T1C1".parse::<ExampleSpec>().map(|s| ExampleSpec { n: 8, ..s })?)?),
        ("dependent", dependent_counterexample()),
    ];
    for (name, w) in worlds {
        let f = w.derive()?;
        println!("{name}: gap between truth and observed limit = {:.4}", limit_gap(&f)?);
        for row in consistency_experiment(name, &f, &[100, 10_000], &seeds)? {
            println!(
                "  n = {:>6} seed {} target {:<14} sup|S| {:.4} sup|P| {:.4} vs truth {:.4}",
                row.n, row.seed, row.target, row.sup_error_s, row.sup_error_p, row.sup_error_truth_p
            );
        }
    }
    Ok(())
}
