//! Exact time evolution in the coupled `(l, j, m_j)` eigenbasis.

use num_complex::Complex64;

use crate::angular::{cg, HalfInt};
use crate::basis::Spin;
use crate::error::{domain, Result};
use crate::model::{energy, JBranch, ModelParams};
use crate::packet::SpinorPacket;

/// Amplitudes over `(l, branch, m_j)`. Per `l` the `2l + 2` Plus entries are
/// followed by the `2l` Minus entries, each ordered by ascending `m_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPacket {
    amplitudes: Vec<Complex64>,
    l_max: u32,
}

fn offset(l: u32, branch: JBranch, m_j: HalfInt) -> usize {
    let l = l as i32;
    let base = 2 * l * l;
    let k = match branch {
        JBranch::Plus => (m_j.twice() + 2 * l + 1) / 2,
        JBranch::Minus => 2 * l + 2 + (m_j.twice() + 2 * l - 1) / 2,
    };
    (base + k) as usize
}

impl CoupledPacket {
    pub fn zeros(l_max: u32) -> Self {
        let n = 2 * (l_max as usize + 1).pow(2);
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); n],
            l_max,
        }
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    fn valid(&self, l: u32, branch: JBranch, m_j: HalfInt) -> bool {
        l <= self.l_max
            && m_j.twice() % 2 != 0
            && branch
                .twice_j(l)
                .map(|tj| m_j.twice().unsigned_abs() <= tj)
                .unwrap_or(false)
    }

    pub fn get(&self, l: u32, branch: JBranch, m_j: HalfInt) -> Complex64 {
        if !self.valid(l, branch, m_j) {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes[offset(l, branch, m_j)]
    }

    pub fn set(&mut self, l: u32, branch: JBranch, m_j: HalfInt, value: Complex64) -> Result<()> {
        if !self.valid(l, branch, m_j) {
            return domain(format!("no coupled state l = {l}, {branch:?}, m_j = {m_j}"));
        }
        self.amplitudes[offset(l, branch, m_j)] = value;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Non-zero entries as `(l, branch, m_j, amplitude)`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, JBranch, HalfInt, Complex64)> + '_ {
        (0..=self.l_max).flat_map(move |l| {
            let li = l as i32;
            let plus = (-(2 * li + 1)..=(2 * li + 1))
                .step_by(2)
                .map(move |tm| (l, JBranch::Plus, HalfInt::from_twice(tm)));
            let minus = (-(2 * li - 1)..=(2 * li - 1))
                .step_by(2)
                .filter(move |_| l > 0)
                .map(move |tm| (l, JBranch::Minus, HalfInt::from_twice(tm)));
            plus.chain(minus)
                .map(move |(l, b, m)| (l, b, m, self.get(l, b, m)))
                .filter(|(_, _, _, a)| a.re != 0.0 || a.im != 0.0)
        })
    }
}

/// Change of basis to `|l j m_j⟩`.
pub fn to_coupled(packet: &SpinorPacket) -> CoupledPacket {
    let l_max = packet.l_max();
    let mut out = CoupledPacket::zeros(l_max);
    for l in 0..=l_max {
        let li = l as i32;
        for tm in (-(2 * li + 1)..=(2 * li + 1)).step_by(2) {
            let m_j = HalfInt::from_twice(tm);
            let a_up = packet.amp(l, (tm - 1) / 2, Spin::Up);
            let a_down = packet.amp(l, (tm + 1) / 2, Spin::Down);
            for branch in JBranch::BOTH {
                if let Ok(c) = cg(l, m_j, branch) {
                    out.amplitudes[offset(l, branch, m_j)] =
                        a_up * c.up_coeff + a_down * c.down_coeff;
                }
            }
        }
    }
    out
}

/// Inverse of [`to_coupled`].
pub fn from_coupled(coupled: &CoupledPacket) -> SpinorPacket {
    let l_max = coupled.l_max();
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * (l_max as usize + 1).pow(2)];
    for l in 0..=l_max {
        let li = l as i32;
        for tm in (-(2 * li + 1)..=(2 * li + 1)).step_by(2) {
            let m_j = HalfInt::from_twice(tm);
            let ml_up = (tm - 1) / 2;
            let ml_down = (tm + 1) / 2;
            for branch in JBranch::BOTH {
                if let Ok(c) = cg(l, m_j, branch) {
                    let v = coupled.amplitudes[offset(l, branch, m_j)];
                    if ml_up >= -li {
                        amps[crate::basis::BasisState {
                            l,
                            m_l: ml_up,
                            spin: Spin::Up,
                        }
                        .index()] += v * c.up_coeff;
                    }
                    if ml_down <= li {
                        amps[crate::basis::BasisState {
                            l,
                            m_l: ml_down,
                            spin: Spin::Down,
                        }
                        .index()] += v * c.down_coeff;
                    }
                }
            }
        }
    }
    SpinorPacket::from_dense(l_max, amps).expect("dense length matches l_max")
}

/// Reusable evolution of one initial packet: the coupled amplitudes and level
/// energies are computed once, each time point then costs one phase sweep
/// and one inverse transform.
#[derive(Clone, Debug)]
pub struct Propagator {
    initial: SpinorPacket,
    coupled: CoupledPacket,
    energies: Vec<f64>,
}

impl Propagator {
    pub fn new(packet: &SpinorPacket, params: &ModelParams) -> Self {
        let coupled = to_coupled(packet);
        let mut energies = vec![0.0; coupled.amplitudes.len()];
        for l in 0..=coupled.l_max {
            for branch in JBranch::BOTH {
                let Ok(e) = energy(l, branch, params) else {
                    continue;
                };
                let tj = branch.twice_j(l).expect("branch validated by energy") as i32;
                for tm in (-tj..=tj).step_by(2) {
                    energies[offset(l, branch, HalfInt::from_twice(tm))] = e;
                }
            }
        }
        Self {
            initial: packet.clone(),
            coupled,
            energies,
        }
    }

    pub fn coupled(&self) -> &CoupledPacket {
        &self.coupled
    }

    /// State at time `t` in the decoupled basis; `t = 0` returns the initial
    /// packet bit for bit.
    pub fn at(&self, t: f64) -> SpinorPacket {
        if t == 0.0 {
            return self.initial.clone();
        }
        from_coupled(&self.coupled_at(t))
    }

    pub fn coupled_at(&self, t: f64) -> CoupledPacket {
        let amplitudes = self
            .coupled
            .amplitudes
            .iter()
            .zip(&self.energies)
            .map(|(a, &e)| a * Complex64::from_polar(1.0, -e * t))
            .collect();
        CoupledPacket {
            amplitudes,
            l_max: self.coupled.l_max,
        }
    }
}

/// `exp(−iHt) |packet⟩`, exact for any finite `t` including negative times.
pub fn propagate(packet: &SpinorPacket, t: f64, params: &ModelParams) -> SpinorPacket {
    Propagator::new(packet, params).at(t)
}
