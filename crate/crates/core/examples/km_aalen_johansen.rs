//! Nelson–Aalen, Kaplan–Meier and Aalen–Johansen on a small competing-risks sample.

use censoring::estim::{aalen_johansen, kaplan_meier, nelson_aalen, ObservedSample, Record};

fn main() -> censoring::Result<()> {
    let rows = [(1.0, 1), (2.0, 0), (2.0, 2), (3.0, 1), (4.0, 0), (5.0, 2)];
    let sample = ObservedSample::new(2, rows.iter().map(|&(time, status)| Record { time, status }).collect())?;
    for (j, h) in nelson_aalen(&sample)?.iter().enumerate() {
        println!("Nelson-Aalen increments for cause {}: {:?}", j + 1, h.atoms());
    }
    let km = kaplan_meier(&sample)?;
    let path = aalen_johansen(&sample)?;
    for p in &path.points {
        println!(
            "t = {}: at risk {}, KM {:.4} (direct {:.4}), AJ first row {:?}",
            p.time,
            p.at_risk,
            p.km,
            km.eval(p.time),
            p.aj.first_row()
        );
    }
    path.write_csv(std::io::stdout().lock())?;
    Ok(())
}
