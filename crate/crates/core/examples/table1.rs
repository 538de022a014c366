//! Reproduces the assumption table for the six uniform-square worlds.

use censoring::bench::{reproduce_table1, TABLE1_ROWS};

fn main() -> censoring::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let t = reproduce_table1(n)?;
    print!("{:<28}", "");
    for c in &t.columns {
        print!("{c:>6}");
    }
    println!();
    for (r, row) in TABLE1_ROWS.iter().enumerate() {
        print!("{row:<28}");
        for held in t.pattern()[r] {
            print!("{:>6}", if held { "x" } else { "." });
        }
        println!();
    }
    println!("matches the published pattern: {}", t.matches_published());
    Ok(())
}
