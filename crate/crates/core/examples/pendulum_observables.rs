//! Spin and orbital angular momentum of a coherent packet over half a
//! spin-orbit period, for a tilted initial spin.
//!
//! cargo run --release --example pendulum_observables

use std::f64::consts::PI;

use spin_orbit_pendulum::{build_packet, series, ModelParams, SpinDirection};

fn main() -> spin_orbit_pendulum::Result<()> {
    let params = ModelParams::with_ratio(4.0, 1.0, 2.0, 1e-12)?;
    let packet = build_packet(&params, SpinDirection::new(PI / 2.0, 0.0)?)?;
    let times: Vec<f64> = (0..=16).map(|k| k as f64 * params.t_ls() / 32.0).collect();
    let s = series(&packet, &times, &params)?;

    println!("l_max = {}, T_ls = {:.4}", params.l_max, params.t_ls());
    println!(
        "{:>7} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "t/T_ls", "sx", "sy", "sz", "lz", "jz"
    );
    for r in &s.rows {
        println!(
            "{:7.4} {:9.5} {:9.5} {:9.5} {:9.5} {:9.5}",
            r.t_over_tls, r.s.x, r.s.y, r.s.z, r.l.z, r.j.z
        );
    }
    println!("max |j(t) - j(0)| = {:.1e}", s.max_j_drift());
    Ok(())
}
