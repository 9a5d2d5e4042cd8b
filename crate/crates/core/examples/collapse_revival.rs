//! Collapse and exact revival of ⟨s_x⟩ for a broad packet (N̄ = 20).
//!
//! cargo run --release --example collapse_revival

use spin_orbit_pendulum::{build_packet, spin_expectation, ModelParams, Propagator, SpinDirection};

fn main() -> spin_orbit_pendulum::Result<()> {
    let params = ModelParams::with_ratio(20.0, 1.0, 2.0, 1e-12)?;
    let packet = build_packet(
        &params,
        SpinDirection::new(std::f64::consts::FRAC_PI_2, 0.0)?,
    )?;
    let prop = Propagator::new(&packet, &params);
    let t_rev = params.revival_time();

    println!("revival time 4π/κ = {t_rev:.3}");
    for k in 0..=40 {
        let t = k as f64 * t_rev / 40.0;
        let s = spin_expectation(&prop.at(t));
        let col = ((s.x + 0.5) * 60.0).round() as usize;
        println!("{:5.3}  sx = {:+.5}  {}*", t / t_rev, s.x, " ".repeat(col));
    }
    Ok(())
}
