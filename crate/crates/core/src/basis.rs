//! Nodeless oscillator eigenfunctions `R_l(r) Y_lm(θ, φ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Spin projection `m_s = ±1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn m_s(self) -> f64 {
        match self {
            Spin::Up => 0.5,
            Spin::Down => -0.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Spin::Up => "up",
            Spin::Down => "down",
        }
    }
}

/// Decoupled basis label `|l, m_l⟩ ⊗ |m_s⟩` (radial quantum number 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub l: u32,
    pub m_l: i32,
    pub spin: Spin,
}

impl BasisState {
    pub fn new(l: u32, m_l: i32, spin: Spin) -> Result<Self> {
        if m_l.unsigned_abs() > l {
            return domain(format!("|m_l| = {} exceeds l = {l}", m_l.abs()));
        }
        Ok(Self { l, m_l, spin })
    }

    /// Position in the dense ordering `(l, m_l, spin)` used by packets and
    /// dense operators.
    pub fn index(&self) -> usize {
        let l = self.l as usize;
        let m = (self.m_l + self.l as i32) as usize;
        2 * (l * l + m) + (self.spin == Spin::Down) as usize
    }

    pub fn from_index(index: usize) -> Self {
        let spin = if index.is_multiple_of(2) {
            Spin::Up
        } else {
            Spin::Down
        };
        let k = index / 2;
        let l = (k as f64).sqrt().floor() as usize;
        // guard the floor against rounding
        let l = if (l + 1) * (l + 1) <= k {
            l + 1
        } else if l * l > k {
            l - 1
        } else {
            l
        };
        let m_l = (k - l * l) as i32 - l as i32;
        Self {
            l: l as u32,
            m_l,
            spin,
        }
    }

    /// Number of states with `l ≤ l_max`.
    pub fn count(l_max: u32) -> usize {
        let n = l_max as usize + 1;
        2 * n * n
    }
}

/// Spherical coordinates in oscillator lengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacePoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SpacePoint {
    /// Validates `r ≥ 0` and `θ ∈ [0, π]`; φ is wrapped into `[0, 2π)`.
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return domain(format!("r must be finite and >= 0, got {r}"));
        }
        if !(0.0..=PI).contains(&theta) {
            return domain(format!("theta must lie in [0, pi], got {theta}"));
        }
        if !phi.is_finite() {
            return domain("phi must be finite");
        }
        Ok(Self {
            r,
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }
}

/// `ln Γ(l + 3/2)` by exact recursion from `Γ(3/2) = √π / 2`.
fn ln_gamma_l_three_halves(l: u32) -> f64 {
    let mut acc = (PI.sqrt() / 2.0).ln();
    for k in 1..=l {
        acc += (k as f64 + 0.5).ln();
    }
    acc
}

/// Log of the normalization constant `√(2 / Γ(l + 3/2))`.
pub(crate) fn ln_radial_norm(l: u32) -> f64 {
    0.5 * (2f64.ln() - ln_gamma_l_three_halves(l))
}

/// Nodeless radial function `R_l(r) = √(2/Γ(l+3/2)) r^l e^{−r²/2}`.
pub fn radial(l: u32, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("r must be >= 0, got {r}"));
    }
    Ok(radial_unchecked(l, ln_radial_norm(l), r))
}

pub(crate) fn radial_unchecked(l: u32, ln_norm: f64, r: f64) -> f64 {
    if r == 0.0 {
        return if l == 0 { ln_norm.exp() } else { 0.0 };
    }
    (ln_norm + l as f64 * r.ln() - 0.5 * r * r).exp()
}

/// Fully normalized associated Legendre functions including the
/// Condon–Shortley phase, so that `Y_lm = P̃_lm(cos θ) e^{imφ}` for `m ≥ 0`.
#[derive(Clone, Debug)]
pub struct LegendreTable {
    l_max: u32,
    values: Vec<f64>,
}

impl LegendreTable {
    pub fn new(l_max: u32, theta: f64) -> Self {
        let (s, x) = theta.sin_cos();
        let l_max_us = l_max as usize;
        let mut values = vec![0.0; (l_max_us + 1) * (l_max_us + 2) / 2];
        let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
        let mut pmm = 1.0 / (4.0 * PI).sqrt();
        for m in 0..=l_max_us {
            if m > 0 {
                let mf = m as f64;
                pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
            }
            values[idx(m, m)] = pmm;
            if m == l_max_us {
                break;
            }
            let mf = m as f64;
            let mut p_prev = pmm;
            let mut p_cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
            values[idx(m + 1, m)] = p_cur;
            for l in (m + 2)..=l_max_us {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let p_next = a * (x * p_cur - b * p_prev);
                values[idx(l, m)] = p_next;
                p_prev = p_cur;
                p_cur = p_next;
            }
        }
        Self { l_max, values }
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    /// `P̃_lm` for any `|m| ≤ l ≤ l_max`; negative `m` uses
    /// `Y_{l,−m} = (−1)^m Y*_{lm}`.
    pub fn get(&self, l: u32, m: i32) -> f64 {
        let ma = m.unsigned_abs() as usize;
        let l = l as usize;
        let v = self.values[l * (l + 1) / 2 + ma];
        if m < 0 && ma % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Orthonormal spherical harmonic with Condon–Shortley phase.
pub fn sph_harm(l: u32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return domain(format!("|m| = {} exceeds l = {l}", m.abs()));
    }
    let p = LegendreTable::new(l, theta).get(l, m);
    Ok(Complex64::from_polar(p, m as f64 * phi))
}

/// Value of the spatial part of `state` at `point`.
pub fn eval_basis(state: &BasisState, point: &SpacePoint) -> Result<Complex64> {
    Ok(radial(state.l, point.r)? * sph_harm(state.l, state.m_l, point.theta, point.phi)?)
}
