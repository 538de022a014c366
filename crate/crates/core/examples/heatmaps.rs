//! Writes the six heat maps of the uniform-square example to a directory.

use censoring::bench::{emit_heatmaps, t2_anchor, c3_hazard_gap};

fn main() -> censoring::Result<()> {
    let dir = std::env::temp_dir().join("censoring-heatmaps");
    std::fs::create_dir_all(&dir)?;
    for p in emit_heatmaps(16, &dir, true)? {
        println!("wrote {}", p.display());
    }
    let (censored, alive) = t2_anchor(8, 0.25)?;
    println!("T2 at s = 1/4: given censored {censored:.4}, given alive {alive:.4}");
    for (t, c3, h0) in c3_hazard_gap(8)? {
        println!("t = {t}: C3 hazard {c3:.4}, observed censoring hazard {h0:.4}");
    }
    Ok(())
}
