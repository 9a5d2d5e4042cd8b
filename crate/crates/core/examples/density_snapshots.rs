//! θ-integrated spin-resolved densities: the two spin components separate
//! into lobes travelling at different angular speeds.
//!
//! cargo run --release --example density_snapshots

use spin_orbit_pendulum::{
    build_packet, density_snapshots, DensityGrid, ModelParams, Spin, SpinDirection,
};

fn peak_phi(marginal: &[f64]) -> f64 {
    let (j, _) =
        marginal.iter().enumerate().fold(
            (0, f64::MIN),
            |acc, (j, &x)| if x > acc.1 { (j, x) } else { acc },
        );
    360.0 * j as f64 / marginal.len() as f64
}

fn main() -> spin_orbit_pendulum::Result<()> {
    let params = ModelParams::with_ratio(4.0, 1.0, 2.0, 1e-12)?;
    let packet = build_packet(&params, SpinDirection::DOWN)?;
    let times: Vec<f64> = (0..9).map(|k| k as f64 * params.t_ls() / 16.0).collect();
    let grid = DensityGrid {
        n_r: 64,
        n_phi: 180,
        ..DensityGrid::default()
    };
    let fields = density_snapshots(&packet, &times, &params, &grid)?;

    println!(
        "{:>6} {:>10} {:>10} {:>12} {:>12}",
        "t/T_ls", "sum rule", "P(up)", "φ_up (deg)", "φ_down (deg)"
    );
    for (t, f) in times.iter().zip(&fields) {
        let up = f.phi_marginal(Some(Spin::Up));
        let down = f.phi_marginal(Some(Spin::Down));
        let dphi = 2.0 * std::f64::consts::PI / up.len() as f64;
        let p_up: f64 = up.iter().sum::<f64>() * dphi;
        let up_peak = if p_up > 1e-6 {
            format!("{:12.1}", peak_phi(&up))
        } else {
            format!("{:>12}", "-")
        };
        println!(
            "{:6.4} {:10.7} {:10.5} {up_peak} {:12.1}",
            t / params.t_ls(),
            f.sum_rule(),
            p_up,
            peak_phi(&down)
        );
    }
    Ok(())
}
