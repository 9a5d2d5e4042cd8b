//! One orbital multiplet: s_z oscillates at the doublet splitting κ(l + 1/2).
//!
//! cargo run --release --example single_multiplet_beat

use spin_orbit_pendulum::model::beat_frequency;
use spin_orbit_pendulum::packet::single_multiplet_packet;
use spin_orbit_pendulum::{series, ModelParams, SpinDirection};

fn main() -> spin_orbit_pendulum::Result<()> {
    let l = 4;
    let params = ModelParams::with_ratio(4.0, 1.0, 2.0, 1e-12)?.truncated_at(l);
    let omega = beat_frequency(l, params.kappa);
    let period = 2.0 * std::f64::consts::PI / omega;
    let packet = single_multiplet_packet(l, SpinDirection::DOWN);
    let times: Vec<f64> = (0..=20).map(|k| k as f64 * period / 20.0).collect();
    let s = series(&packet, &times, &params)?;

    println!(
        "l = {l}, κ = {:.6}, beat period = {period:.6}",
        params.kappa
    );
    for r in &s.rows {
        let bar = "#".repeat(((r.s.z + 0.5) * 100.0).round() as usize);
        println!("{:8.4}  sz = {:+.6}  {bar}", r.t, r.s.z);
    }
    Ok(())
}
