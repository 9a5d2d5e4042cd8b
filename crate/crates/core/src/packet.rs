//! Circular coherent spinor packets.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisState, Spin};
use crate::error::{domain, Result};
use crate::model::ModelParams;

/// Initial spin orientation as Bloch angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinDirection {
    pub theta_s: f64,
    pub phi_s: f64,
}

impl SpinDirection {
    pub const UP: SpinDirection = SpinDirection {
        theta_s: 0.0,
        phi_s: 0.0,
    };
    pub const DOWN: SpinDirection = SpinDirection {
        theta_s: PI,
        phi_s: 0.0,
    };

    pub fn new(theta_s: f64, phi_s: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta_s) {
            return domain(format!("spin theta must lie in [0, pi], got {theta_s}"));
        }
        if !phi_s.is_finite() {
            return domain("spin phi must be finite");
        }
        Ok(Self {
            theta_s,
            phi_s: phi_s.rem_euclid(2.0 * PI),
        })
    }

    /// Two-component spinor `(cos(θ/2), e^{iφ} sin(θ/2))`.
    pub fn spinor(&self) -> (Complex64, Complex64) {
        let (s, c) = (0.5 * self.theta_s).sin_cos();
        // exact zeros at the poles
        let c = if self.theta_s == PI { 0.0 } else { c };
        (Complex64::new(c, 0.0), Complex64::from_polar(s, self.phi_s))
    }
}

/// Spinor wave packet in the decoupled basis, stored densely in
/// [`BasisState::index`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorPacket {
    amplitudes: Vec<Complex64>,
    l_max: u32,
}

impl SpinorPacket {
    pub fn zeros(l_max: u32) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); BasisState::count(l_max)],
            l_max,
        }
    }

    pub fn from_dense(l_max: u32, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != BasisState::count(l_max) {
            return domain(format!(
                "expected {} amplitudes for l_max = {l_max}, got {}",
                BasisState::count(l_max),
                amplitudes.len()
            ));
        }
        Ok(Self { amplitudes, l_max })
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn get(&self, state: &BasisState) -> Complex64 {
        if state.l > self.l_max {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes[state.index()]
    }

    /// Amplitude of `(l, m_l, spin)`; zero when the label is unphysical.
    pub fn amp(&self, l: u32, m_l: i32, spin: Spin) -> Complex64 {
        if l > self.l_max || m_l.unsigned_abs() > l {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes[BasisState { l, m_l, spin }.index()]
    }

    pub fn set(&mut self, state: &BasisState, value: Complex64) -> Result<()> {
        if state.l > self.l_max {
            return domain(format!(
                "l = {} exceeds packet l_max = {}",
                state.l, self.l_max
            ));
        }
        self.amplitudes[state.index()] = value;
        Ok(())
    }

    /// Non-zero entries in basis order.
    pub fn iter(&self) -> impl Iterator<Item = (BasisState, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(|(i, &a)| (BasisState::from_index(i), a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability carried by one spin component.
    pub fn component_norm_sqr(&self, spin: Spin) -> f64 {
        let offset = (spin == Spin::Down) as usize;
        self.amplitudes
            .iter()
            .skip(offset)
            .step_by(2)
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return domain("cannot normalize a zero packet");
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SpinorPacket) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &SpinorPacket) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Square roots of the Poisson weights, `w_l = e^{−N̄/2} N̄^{l/2} / √(l!)`.
pub fn poisson_amplitudes(n_mean: f64, l_max: u32) -> Result<Vec<f64>> {
    if !(n_mean >= 0.0) {
        return domain(format!("n_mean must be >= 0, got {n_mean}"));
    }
    let mut out = Vec::with_capacity(l_max as usize + 1);
    let mut ln_fact = 0.0;
    for l in 0..=l_max {
        if l > 0 {
            ln_fact += (l as f64).ln();
        }
        let w = if n_mean == 0.0 {
            if l == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (0.5 * (-n_mean + l as f64 * n_mean.ln() - ln_fact)).exp()
        };
        out.push(w);
    }
    Ok(out)
}

/// Smallest `l_max` whose retained Poisson mass is at least `1 − weight_tol`.
pub fn choose_l_max(n_mean: f64, weight_tol: f64) -> Result<u32> {
    if !(weight_tol > 0.0 && weight_tol < 1.0) {
        return domain(format!("weight_tol must lie in (0, 1), got {weight_tol}"));
    }
    if !(n_mean >= 0.0) {
        return domain(format!("n_mean must be >= 0, got {n_mean}"));
    }
    if n_mean == 0.0 {
        return Ok(0);
    }
    let mut cum = 0.0;
    let mut l = 0u32;
    loop {
        let pmf = (-n_mean + l as f64 * n_mean.ln() - ln_factorial(l)).exp();
        cum += pmf;
        if cum >= 1.0 - weight_tol {
            return Ok(l);
        }
        // the cumulative sum saturates at 1 − O(ε); stop once the tail is negligible
        if l as f64 > n_mean && pmf < f64::EPSILON * 1e-4 {
            return Ok(l);
        }
        l += 1;
    }
}

/// Circular coherent packet with mean quanta `params.n_mean` and the given
/// spin, truncated at `params.l_max` and renormalized.
///
/// Amplitudes carry the factor `(−1)^l` so that with Condon–Shortley
/// harmonics the packet is centred at `φ = 0`: `(−1)^l Y_ll ∝ (x + iy)^l`.
pub fn build_packet(params: &ModelParams, spin: SpinDirection) -> Result<SpinorPacket> {
    let weights = poisson_amplitudes(params.n_mean, params.l_max)?;
    let (up, down) = spin.spinor();
    let mut packet = SpinorPacket::zeros(params.l_max);
    for (l, &w) in weights.iter().enumerate() {
        let l = l as u32;
        let w = if l.is_multiple_of(2) { w } else { -w };
        packet.set(
            &BasisState {
                l,
                m_l: l as i32,
                spin: Spin::Up,
            },
            up * w,
        )?;
        packet.set(
            &BasisState {
                l,
                m_l: l as i32,
                spin: Spin::Down,
            },
            down * w,
        )?;
    }
    packet.normalize()?;
    Ok(packet)
}

/// Packet occupying the single multiplet `l` with spin direction `spin`.
pub fn single_multiplet_packet(l: u32, spin: SpinDirection) -> SpinorPacket {
    let (up, down) = spin.spinor();
    let mut packet = SpinorPacket::zeros(l);
    packet.amplitudes[BasisState {
        l,
        m_l: l as i32,
        spin: Spin::Up,
    }
    .index()] = up;
    packet.amplitudes[BasisState {
        l,
        m_l: l as i32,
        spin: Spin::Down,
    }
    .index()] = down;
    packet
}
