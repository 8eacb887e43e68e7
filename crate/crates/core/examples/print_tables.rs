//! Print the four quality tables and the variance table as CSV.
//!
//! `cargo run --release -p netscope --example print_tables [replicates] [c]`

use netscope::tables::{quality_table, variance_table, TableConfig};

fn main() -> netscope::Result<()> {
    let r: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(25);
    let c: f64 = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(1.0);
    let cfg = TableConfig::default();
    for which in 1..=4 {
        let t = quality_table(which, &cfg)?;
        println!("Table {which}: {}\n{}", t.caption, t.to_csv(false));
    }
    let v = variance_table(&cfg, c, r, 2021)?;
    println!("Table 5 (c = {c}, R = {r})\n{}", v.to_csv());
    Ok(())
}
