//! Spectral propagation against a dense Hamiltonian and Cayley stepping.
//!
//! cargo run --release --example oracle_check

use spin_orbit_pendulum::oracle::{run_checks, CheckOptions};

fn main() -> spin_orbit_pendulum::Result<()> {
    let checks = run_checks(&CheckOptions::default())?;
    for c in &checks {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        println!(
            "{tag} {:<36} {:>10.3e} (threshold {:.0e})  {}",
            c.name, c.measured, c.threshold, c.detail
        );
    }
    Ok(())
}
