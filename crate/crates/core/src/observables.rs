//! Expectation values of spin, orbital and total angular momentum.

use std::ops::{Add, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::ladder_coeff;
use crate::basis::Spin;
use crate::error::{domain, Result};
use crate::model::ModelParams;
use crate::packet::SpinorPacket;
use crate::propagator::Propagator;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Vec3) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// `⟨s⟩`. Spin operators are diagonal in `(l, m_l)`, so only same-orbital
/// pairs of up/down amplitudes contribute to `⟨s₊⟩`.
pub fn spin_expectation(packet: &SpinorPacket) -> Vec3 {
    let amps = packet.as_slice();
    let mut sz = 0.0;
    let mut splus = Complex64::new(0.0, 0.0);
    for pair in amps.chunks_exact(2) {
        let (up, down) = (pair[0], pair[1]);
        sz += 0.5 * (up.norm_sqr() - down.norm_sqr());
        splus += up.conj() * down;
    }
    Vec3::new(splus.re, splus.im, sz)
}

/// `⟨l⟩` from `l_z` and the raising operator within each `l` multiplet.
pub fn orbital_expectation(packet: &SpinorPacket) -> Vec3 {
    let mut lz = 0.0;
    let mut lplus = Complex64::new(0.0, 0.0);
    for l in 0..=packet.l_max() {
        let li = l as i32;
        for m in -li..=li {
            for spin in Spin::BOTH {
                let a = packet.amp(l, m, spin);
                lz += m as f64 * a.norm_sqr();
                if m < li {
                    let c = ladder_coeff(l, m).expect("|m| <= l");
                    lplus += c * packet.amp(l, m + 1, spin).conj() * a;
                }
            }
        }
    }
    Vec3::new(lplus.re, lplus.im, lz)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub t: f64,
    pub t_over_tls: f64,
    pub s: Vec3,
    pub l: Vec3,
    pub j: Vec3,
    pub norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub rows: Vec<ObservableRow>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest componentwise deviation of `⟨j⟩` from its first value.
    pub fn max_j_drift(&self) -> f64 {
        let Some(first) = self.rows.first() else {
            return 0.0;
        };
        self.rows
            .iter()
            .map(|r| r.j.max_abs_diff(&first.j))
            .fold(0.0, f64::max)
    }

    pub fn max_norm_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !t.is_finite()) {
        return domain("time grid contains non-finite values");
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("time grid must be strictly increasing");
    }
    Ok(())
}

/// Observables of the evolved packet at each time of `t_grid`.
///
/// Rows are evaluated in parallel on the current rayon pool; each row is an
/// independent pure computation, so results do not depend on the pool size.
pub fn series(
    packet0: &SpinorPacket,
    t_grid: &[f64],
    params: &ModelParams,
) -> Result<ObservableSeries> {
    check_time_grid(t_grid)?;
    let prop = Propagator::new(packet0, params);
    let t_ls = params.t_ls();
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let psi = prop.at(t);
            let s = spin_expectation(&psi);
            let l = orbital_expectation(&psi);
            ObservableRow {
                t,
                t_over_tls: t / t_ls,
                s,
                l,
                j: s + l,
                norm: psi.norm_sqr(),
            }
        })
        .collect();
    Ok(ObservableSeries { rows })
}
