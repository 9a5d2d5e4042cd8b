//! Model parameters and the nodeless spectrum of
//! `H = ω₀ (n + 3/2) + κ l·s` in natural units (ℏ = m = b = 1).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::packet::choose_l_max;

/// Spin-orbit partner inside an `l` multiplet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JBranch {
    /// `j = l + 1/2`
    Plus,
    /// `j = l - 1/2`, absent for `l = 0`
    Minus,
}

impl JBranch {
    pub const BOTH: [JBranch; 2] = [JBranch::Plus, JBranch::Minus];

    pub fn exists_for(self, l: u32) -> bool {
        !(self == JBranch::Minus && l == 0)
    }

    /// Twice the total angular momentum, `2j`.
    pub fn twice_j(self, l: u32) -> Result<u32> {
        match self {
            JBranch::Plus => Ok(2 * l + 1),
            JBranch::Minus if l >= 1 => Ok(2 * l - 1),
            JBranch::Minus => Err(Error::InvalidBranch { l }),
        }
    }
}

/// Physical constants of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mean oscillator quanta N̄ of the coherent packet.
    pub n_mean: f64,
    pub omega0: f64,
    /// Spin-orbit strength multiplying the dimensionless `l·s`.
    pub kappa: f64,
    /// Highest `l` kept in the basis.
    pub l_max: u32,
    /// Poisson mass allowed to be discarded by the truncation.
    pub weight_tol: f64,
}

impl ModelParams {
    /// Builds parameters with `l_max` chosen from the Poisson tail.
    pub fn new(n_mean: f64, omega0: f64, kappa: f64, weight_tol: f64) -> Result<Self> {
        if !(n_mean >= 0.0 && n_mean.is_finite()) {
            return domain(format!("n_mean must be finite and >= 0, got {n_mean}"));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return domain(format!("omega0 must be > 0, got {omega0}"));
        }
        if !kappa.is_finite() {
            return domain("kappa must be finite");
        }
        if !(weight_tol > 0.0 && weight_tol < 1.0) {
            return domain(format!("weight_tol must lie in (0, 1), got {weight_tol}"));
        }
        let l_max = choose_l_max(n_mean, weight_tol)?;
        Ok(Self {
            n_mean,
            omega0,
            kappa,
            l_max,
            weight_tol,
        })
    }

    /// Same as [`ModelParams::new`] with κ fixed by `ω₀ / ω_ls = ratio`.
    pub fn with_ratio(n_mean: f64, omega0: f64, ratio: f64, weight_tol: f64) -> Result<Self> {
        let kappa = kappa_for_ratio(omega0, ratio, n_mean)?;
        Self::new(n_mean, omega0, kappa, weight_tol)
    }

    /// Forces a basis truncation. `weight_tol` is updated to the mass that is
    /// actually discarded.
    pub fn truncated_at(mut self, l_max: u32) -> Self {
        let kept: f64 = crate::packet::poisson_amplitudes(self.n_mean, l_max)
            .expect("n_mean validated at construction")
            .iter()
            .map(|w| w * w)
            .sum();
        self.l_max = l_max;
        self.weight_tol = (1.0 - kept).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        self
    }

    /// Spin-orbit splitting frequency of the dominant `l = N̄` multiplet.
    pub fn omega_ls(&self) -> f64 {
        self.kappa * (self.n_mean + 0.5)
    }

    /// Pendulum period `2π / |ω_ls|`; infinite when κ = 0.
    pub fn t_ls(&self) -> f64 {
        2.0 * PI / self.omega_ls().abs()
    }

    /// Exact revival time of the spin, `4π / |κ|`.
    pub fn revival_time(&self) -> f64 {
        4.0 * PI / self.kappa.abs()
    }

    pub fn length_unit(&self) -> f64 {
        1.0
    }
}

/// Eigenvalue of the dimensionless `l·s` on the given branch.
pub fn ls_eigenvalue(l: u32, branch: JBranch) -> Result<f64> {
    let l = match branch {
        JBranch::Plus => return Ok(l as f64 / 2.0),
        JBranch::Minus if l >= 1 => l as f64,
        JBranch::Minus => return Err(Error::InvalidBranch { l }),
    };
    Ok(-(l + 1.0) / 2.0)
}

/// Energy of the nodeless level `(l, j)`.
pub fn energy(l: u32, branch: JBranch, params: &ModelParams) -> Result<f64> {
    let ls = ls_eigenvalue(l, branch)?;
    Ok(params.omega0 * (l as f64 + 1.5) + params.kappa * ls)
}

/// Beat frequency `Ω_l = E(l, +) − E(l, −) = κ (l + 1/2)`.
pub fn beat_frequency(l: u32, kappa: f64) -> f64 {
    kappa * (l as f64 + 0.5)
}

/// κ such that `ω₀ / ω_ls = ratio`, with `ω_ls = κ (N̄ + 1/2)`.
pub fn kappa_for_ratio(omega0: f64, ratio: f64, n_mean: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return domain(format!("ratio must be > 0, got {ratio}"));
    }
    if !(n_mean >= 0.0) {
        return domain(format!("n_mean must be >= 0, got {n_mean}"));
    }
    Ok(omega0 / (ratio * (n_mean + 0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Eigenvalues of `l·s` in the `m_j = 1/2` block, built from
    /// `l_z s_z + (l₊s₋ + l₋s₊)/2` and diagonalized by the quadratic formula.
    fn ls_block_eigs(l: u32) -> (f64, f64) {
        let lf = l as f64;
        // basis |m_l = 0, up>, |m_l = 1, down>
        let a = 0.0 * 0.5;
        let d = 1.0 * -0.5;
        let lplus = (lf * (lf + 1.0) - 0.0 * 1.0).sqrt();
        let b = 0.5 * lplus;
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
        ((tr + disc) / 2.0, (tr - disc) / 2.0)
    }

    #[test]
    fn ls_eigenvalues_match_block_diagonalization() {
        assert_eq!(ls_eigenvalue(0, JBranch::Plus).unwrap(), 0.0);
        for l in 1..=10 {
            let (hi, lo) = ls_block_eigs(l);
            assert_abs_diff_eq!(
                ls_eigenvalue(l, JBranch::Plus).unwrap(),
                hi,
                epsilon = 1e-14
            );
            assert_abs_diff_eq!(
                ls_eigenvalue(l, JBranch::Minus).unwrap(),
                lo,
                epsilon = 1e-14
            );
        }
        assert_eq!(ls_eigenvalue(1, JBranch::Plus).unwrap(), 0.5);
        assert_eq!(ls_eigenvalue(1, JBranch::Minus).unwrap(), -1.0);
        assert_eq!(ls_eigenvalue(4, JBranch::Minus).unwrap(), -2.5);
    }

    #[test]
    fn minus_branch_rejected_for_s_states() {
        assert!(matches!(
            ls_eigenvalue(0, JBranch::Minus),
            Err(Error::InvalidBranch { l: 0 })
        ));
        let p = ModelParams::new(4.0, 1.0, 0.1, 1e-12).unwrap();
        assert!(energy(0, JBranch::Minus, &p).is_err());
    }

    #[test]
    fn trace_of_ls_vanishes_per_multiplet() {
        for l in 1..50u32 {
            let plus = (2 * l + 2) as f64 * ls_eigenvalue(l, JBranch::Plus).unwrap();
            let minus = (2 * l) as f64 * ls_eigenvalue(l, JBranch::Minus).unwrap();
            assert_eq!(plus + minus, 0.0);
        }
    }

    #[test]
    fn energies() {
        let p = ModelParams::new(4.0, 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(energy(0, JBranch::Plus, &p).unwrap(), 1.5);
        let p = ModelParams::new(4.0, 1.0, 0.2, 1e-12).unwrap();
        assert_abs_diff_eq!(energy(1, JBranch::Plus, &p).unwrap(), 2.6, epsilon = 1e-15);
        let p = ModelParams::new(4.0, 1.0, 1.0, 1e-12).unwrap();
        let split = energy(4, JBranch::Plus, &p).unwrap() - energy(4, JBranch::Minus, &p).unwrap();
        assert_eq!(split, 4.5);
        assert_eq!(split, beat_frequency(4, 1.0));
    }

    #[test]
    fn splitting_and_linearity() {
        let triples = [(0.7, 0.31, 3u32), (1.9, -0.05, 7), (0.2, 2.5, 12)];
        for &(w, k, l) in &triples {
            let p = ModelParams::new(1.0, w, k, 1e-6).unwrap();
            let split =
                energy(l, JBranch::Plus, &p).unwrap() - energy(l, JBranch::Minus, &p).unwrap();
            assert_abs_diff_eq!(split, k * (2 * l + 1) as f64 / 2.0, epsilon = 1e-13);
            for b in JBranch::BOTH {
                let e = energy(l, b, &p).unwrap();
                let mut p2 = p.clone();
                p2.kappa *= 2.0;
                p2.omega0 *= 2.0;
                assert_abs_diff_eq!(energy(l, b, &p2).unwrap(), 2.0 * e, epsilon = 1e-12);
                let mut p3 = p.clone();
                p3.kappa = 0.0;
                let mut p4 = p.clone();
                p4.omega0 = 0.0;
                assert_abs_diff_eq!(
                    energy(l, b, &p3).unwrap() + energy(l, b, &p4).unwrap(),
                    e,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn kappa_from_frequency_ratio() {
        assert_abs_diff_eq!(
            kappa_for_ratio(1.0, 2.0, 4.0).unwrap(),
            1.0 / 9.0,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            kappa_for_ratio(1.0, 2.0, 20.0).unwrap(),
            1.0 / 41.0,
            epsilon = 1e-16
        );
        assert_eq!(kappa_for_ratio(1.0, 1.0, 0.0).unwrap(), 2.0);
        assert!(kappa_for_ratio(1.0, 0.0, 4.0).is_err());
        assert!(kappa_for_ratio(1.0, -1.0, 4.0).is_err());
    }

    #[test]
    fn derived_periods() {
        let p = ModelParams::with_ratio(4.0, 1.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(p.omega_ls(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.t_ls(), 4.0 * PI, epsilon = 1e-13);
        assert_eq!(p.length_unit(), 1.0);
        assert!(ModelParams::new(4.0, 0.0, 0.1, 1e-12).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0.1, 1e-12).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 1.0).is_err());
    }
}
