//! Maxima of each spin component on the classical-orbit sphere. The
//! spin-up subpacket leaves the orbital plane.
//!
//! cargo run --release --example sphere_maxima

use spin_orbit_pendulum::{
    build_packet, maxima_track, ModelParams, SphereGrid, Spin, SpinDirection,
};

fn main() -> spin_orbit_pendulum::Result<()> {
    let params = ModelParams::with_ratio(4.0, 1.0, 2.0, 1e-12)?;
    let packet = build_packet(&params, SpinDirection::DOWN)?;
    let times: Vec<f64> = (0..=8).map(|k| k as f64 * params.t_ls() / 16.0).collect();
    for spin in Spin::BOTH {
        let track = maxima_track(&packet, &times, spin, &params, SphereGrid::default())?;
        println!("{} component", spin.label());
        for r in &track.rows {
            println!(
                "  t/T_ls = {:.4}  θ* = {:.4}  φ* = {:.4}  |Ψ|² = {:.3e}",
                r.t_over_tls, r.theta_star, r.phi_star, r.value
            );
        }
    }
    Ok(())
}
