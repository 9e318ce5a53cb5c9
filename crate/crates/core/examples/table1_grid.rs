//! Saturation grid (log-negativity and SRE for every class and size) with
//! the published reference next to each cell.
//!
//! `cargo run --release --example table1_grid -- [realizations] [sizes...]`

use orqc::experiment::table1::{run_table1, Table1Options};

fn main() -> orqc::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let opts = Table1Options {
        realizations: args.first().copied().unwrap_or(20),
        sizes: if args.len() > 1 { args[1..].to_vec() } else { vec![4] },
        ..Table1Options::default()
    };
    let dir = std::env::temp_dir().join("orqc_table1");
    run_table1(&opts, &dir, |e| {
        println!(
            "n = {} {:<5} {:<6} {:.4}  reference {}",
            e.n_system,
            e.class.name(),
            format!("{:?}", e.observable).to_lowercase(),
            e.saturation,
            e.reference.map_or("-".into(), |r| format!("{r}"))
        );
    })?;
    println!("wrote {}", dir.join("table1.csv").display());
    Ok(())
}
