//! Runs the DFT scaling study and prints the table as CSV.
//!
//! `cargo run --release --example scaling -- [d_max] [restarts] [seed]`

use freqgate::optimize::{scaling_study, ScalingOptions, ScalingRow};
use freqgate::par::Exec;

fn main() -> freqgate::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let d_max = *args.first().unwrap_or(&7) as usize;
    let options = ScalingOptions {
        restarts: *args.get(1).unwrap_or(&200) as usize,
        master_seed: *args.get(2).unwrap_or(&0),
        ..ScalingOptions::default()
    };
    println!("{}", ScalingRow::CSV_HEADER);
    for r in scaling_study(d_max, &options, Exec::default())? {
        println!("{}  # winner {}", ScalingRow::from_result(&r).to_csv(), r.winner);
    }
    Ok(())
}
