//! Regenerates the embedded fuzz albedo table. Prints the complete
//! `albedo_table.rs` module source to stdout:
//!
//! ```text
//! cargo run --release -p openpbr --example regenerate_fuzz_table \
//!     > crates/openpbr/src/fuzz/albedo_table.rs
//! ```

use openpbr::fuzz::{simulate_fuzz_albedo_table, FUZZ_TABLE_N};

fn main() {
    let table = simulate_fuzz_albedo_table(0xC0A7, 600_000);
    println!("//! Slab reflectance of unit-tint fuzz, rows indexed by roughness and");
    println!("//! columns by view cosine (floor 0.02), isotonically smoothed along each");
    println!("//! row. Generated by the `regenerate_fuzz_table` example; do not edit.");
    println!();
    println!(
        "pub const FUZZ_ALBEDO_TABLE: [[f64; {n}]; {n}] = [",
        n = FUZZ_TABLE_N
    );
    for row in &table {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        println!("    [{}],", cells.join(", "));
    }
    println!("];");
}
