//! Clebsch–Gordan coefficients for l ⊗ 1/2 and the nodeless radial
//! functions of the isotropic oscillator.
//!
//! cargo run --release --example basis_functions

use spin_orbit_pendulum::{cg, ls_eigenvalue, radial, HalfInt, JBranch};

fn main() -> spin_orbit_pendulum::Result<()> {
    let l = 2;
    println!(
        "l = {l}: <l·s> = {} (j = l + 1/2), {} (j = l - 1/2)",
        ls_eigenvalue(l, JBranch::Plus)?,
        ls_eigenvalue(l, JBranch::Minus)?
    );
    for twice in (-(2 * l as i32) - 1..=2 * l as i32 + 1).step_by(2) {
        let m_j = HalfInt::from_twice(twice);
        let plus = cg(l, m_j, JBranch::Plus)?;
        let minus = cg(l, m_j, JBranch::Minus)
            .map(|c| format!("({:+.4}, {:+.4})", c.up_coeff, c.down_coeff));
        println!(
            "  m_j = {m_j:>5}: plus ({:+.4}, {:+.4})  minus {}",
            plus.up_coeff,
            plus.down_coeff,
            minus.unwrap_or_else(|_| "-".into())
        );
    }
    println!("radial functions R_l(r):");
    for l in [0, 1, 4, 20] {
        let peak = ((l + 1) as f64).sqrt();
        println!(
            "  l = {l:>2}: R(0.5) = {:.6e}, R(√(l+1)) = {:.6e}",
            radial(l, 0.5)?,
            radial(l, peak)?
        );
    }
    Ok(())
}
