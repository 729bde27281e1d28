//! Optimizes a DFT gate and prints the per-restart summary.
//!
//! `cargo run --release --example design -- <d> <harmonics> <restarts> [seed]`

use std::time::Instant;

use freqgate::optimize::{optimize, parallel_gate_metrics, passband_truncation_check, DesignProblem};
use freqgate::GateTarget;

fn main() -> freqgate::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let d = *args.first().unwrap_or(&2) as usize;
    let p = *args.get(1).unwrap_or(&1) as usize;
    let target = if d == 2 { GateTarget::hadamard() } else { GateTarget::dft(d)? };
    let mut problem = DesignProblem::new(target, p)?;
    problem.restarts = *args.get(2).unwrap_or(&8) as usize;
    problem.master_seed = *args.get(3).unwrap_or(&0);
    let clock = Instant::now();
    let r = optimize(&problem)?;
    let seconds = clock.elapsed().as_secs_f64();
    for s in &r.restarts {
        println!(
            "restart {:>3}: P = {:.6}  F = {:.8}  iters = {}",
            s.index, s.success_probability, s.fidelity, s.iterations
        );
    }
    println!(
        "winner {}: F = {:.8} P = {:.6} converged = {} ({:.1} s)",
        r.winner, r.fidelity, r.success_probability, r.converged, seconds
    );
    println!(
        "aliasing at M = {}: dF = {:.2e} dP = {:.2e}",
        r.aliasing.mode_count, r.aliasing.delta_fidelity, r.aliasing.delta_success
    );
    println!("drives: {:?}\n        {:?}", r.first_drive, r.second_drive);
    for kept in [8, 16, 32] {
        let (f, p) = passband_truncation_check(&r, kept)?;
        println!("passband {kept:>2}: F = {f:.10} P = {p:.10}");
    }
    for sep in [0, 1, 2, 3, 4, 6, 8, 16, 32] {
        let (f, p) = parallel_gate_metrics(&r, sep)?;
        println!("parallel sep {sep:>2}: F = {f:.8} P = {p:.6}");
    }
    Ok(())
}
