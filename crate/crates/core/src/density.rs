//! Real-space spinor densities: θ-integrated maps on the orbit plane and
//! maxima of the subpackets on a sphere.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{ln_radial_norm, radial_unchecked, LegendreTable, SpacePoint, Spin};
use crate::error::{domain, Result};
use crate::model::ModelParams;
use crate::observables::check_time_grid;
use crate::packet::SpinorPacket;
use crate::propagator::Propagator;
use crate::quadrature::{gauss_legendre, periodic_weights, trapezoid_weights};

/// Component norms below this are treated as an identically zero function.
pub const ABSENT_NORM_SQR: f64 = 1e-24;

/// `(Ψ₊, Ψ₋)` at a point.
pub fn eval_spinor(packet: &SpinorPacket, point: &SpacePoint) -> (Complex64, Complex64) {
    let table = LegendreTable::new(packet.l_max(), point.theta);
    let mut up = Complex64::new(0.0, 0.0);
    let mut down = Complex64::new(0.0, 0.0);
    let mut radial_l = vec![f64::NAN; packet.l_max() as usize + 1];
    for (state, a) in packet.iter() {
        let r = &mut radial_l[state.l as usize];
        if r.is_nan() {
            *r = radial_unchecked(state.l, ln_radial_norm(state.l), point.r);
        }
        let y = Complex64::from_polar(table.get(state.l, state.m_l), state.m_l as f64 * point.phi);
        let v = a * *r * y;
        match state.spin {
            Spin::Up => up += v,
            Spin::Down => down += v,
        }
    }
    (up, down)
}

/// Pendulum density snapshot in the orbit plane.
///
/// `d_up[i * n_phi + j]` is `r² ∫ |Ψ₊(r_i, θ, φ_j)|² sin θ dθ`, a probability
/// density per unit `r` and `φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub r_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
    pub d_up: Vec<f64>,
    pub d_down: Vec<f64>,
    pub t: f64,
}

impl DensityField {
    pub fn n_r(&self) -> usize {
        self.r_grid.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_grid.len()
    }

    pub fn up(&self, i: usize, j: usize) -> f64 {
        self.d_up[i * self.n_phi() + j]
    }

    pub fn down(&self, i: usize, j: usize) -> f64 {
        self.d_down[i * self.n_phi() + j]
    }

    pub fn total(&self, i: usize, j: usize) -> f64 {
        self.up(i, j) + self.down(i, j)
    }

    /// `∬ (d_up + d_down) dr dφ`, trapezoid in `r` and periodic in `φ`.
    pub fn sum_rule(&self) -> f64 {
        let wr = trapezoid_weights(&self.r_grid);
        let wp = periodic_weights(&self.phi_grid);
        let mut acc = 0.0;
        for (i, wi) in wr.iter().enumerate() {
            let row: f64 = wp
                .iter()
                .enumerate()
                .map(|(j, wj)| wj * self.total(i, j))
                .sum();
            acc += wi * row;
        }
        acc
    }

    /// `∫ d dr` per azimuth for the chosen component, or the total.
    pub fn phi_marginal(&self, spin: Option<Spin>) -> Vec<f64> {
        let wr = trapezoid_weights(&self.r_grid);
        (0..self.n_phi())
            .map(|j| {
                wr.iter()
                    .enumerate()
                    .map(|(i, w)| {
                        w * match spin {
                            Some(Spin::Up) => self.up(i, j),
                            Some(Spin::Down) => self.down(i, j),
                            None => self.total(i, j),
                        }
                    })
                    .sum()
            })
            .collect()
    }

    /// `∫ d dφ` per radius, total density.
    pub fn r_marginal(&self) -> Vec<f64> {
        let wp = periodic_weights(&self.phi_grid);
        (0..self.n_r())
            .map(|i| {
                wp.iter()
                    .enumerate()
                    .map(|(j, w)| w * self.total(i, j))
                    .sum()
            })
            .collect()
    }
}

/// Density grid description; `None` fields resolve from the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub n_r: usize,
    pub n_phi: usize,
    pub n_theta: Option<usize>,
    pub r_max: Option<f64>,
}

impl Default for DensityGrid {
    fn default() -> Self {
        Self {
            n_r: 96,
            n_phi: 256,
            n_theta: None,
            r_max: None,
        }
    }
}

impl DensityGrid {
    pub fn r_max_for(&self, params: &ModelParams) -> f64 {
        self.r_max
            .unwrap_or_else(|| classical_orbit_radius(params.n_mean).unwrap_or(1.0) + 4.0)
    }

    pub fn n_theta_for(&self, params: &ModelParams) -> usize {
        self.n_theta
            .unwrap_or(2 * params.l_max as usize + 4)
            .max(16)
    }

    pub fn r_grid(&self, params: &ModelParams) -> Vec<f64> {
        uniform(0.0, self.r_max_for(params), self.n_r)
    }

    pub fn phi_grid(&self) -> Vec<f64> {
        (0..self.n_phi)
            .map(|j| 2.0 * PI * j as f64 / self.n_phi as f64)
            .collect()
    }
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Radius of the classical circular orbit, `√(N̄ + 1)`.
pub fn classical_orbit_radius(n_mean: f64) -> Result<f64> {
    if !(n_mean >= 0.0) {
        return domain(format!("n_mean must be >= 0, got {n_mean}"));
    }
    Ok((n_mean + 1.0).sqrt())
}

/// Amplitudes of one spin component grouped by azimuthal number `m`.
struct ComponentTerms {
    /// distinct `m`, ascending
    ms: Vec<i32>,
    /// per distinct `m`: `(l, amplitude)`
    terms: Vec<Vec<(u32, Complex64)>>,
}

impl ComponentTerms {
    fn new(packet: &SpinorPacket, spin: Spin) -> Self {
        let mut entries: Vec<(i32, u32, Complex64)> = packet
            .iter()
            .filter(|(s, _)| s.spin == spin)
            .map(|(s, a)| (s.m_l, s.l, a))
            .collect();
        entries.sort_by_key(|e| (e.0, e.1));
        let mut ms = Vec::new();
        let mut terms: Vec<Vec<(u32, Complex64)>> = Vec::new();
        for (m, l, a) in entries {
            if ms.last() != Some(&m) {
                ms.push(m);
                terms.push(Vec::new());
            }
            terms.last_mut().expect("pushed above").push((l, a));
        }
        Self { ms, terms }
    }

    fn is_empty(&self) -> bool {
        self.ms.is_empty()
    }

    /// `b_m = Σ_l a R_l P̃_lm` for each distinct `m`.
    fn coefficients(&self, radial: &[f64], table: &LegendreTable, out: &mut Vec<Complex64>) {
        out.clear();
        out.extend(self.terms.iter().zip(&self.ms).map(|(ts, &m)| {
            ts.iter()
                .map(|&(l, a)| a * (radial[l as usize] * table.get(l, m)))
                .sum::<Complex64>()
        }));
    }
}

/// Splits `Σ_m b_m e^{imφ}` into even-`m` and odd-`m` parts.
fn parity_sums(b: &[Complex64], phases: &[Complex64], even: &[bool]) -> (Complex64, Complex64) {
    let mut e = Complex64::new(0.0, 0.0);
    let mut o = Complex64::new(0.0, 0.0);
    for ((bm, ph), &is_even) in b.iter().zip(phases).zip(even) {
        if is_even {
            e += bm * ph;
        } else {
            o += bm * ph;
        }
    }
    (e, o)
}

/// θ-nodes for the two parity classes of `|Ψ|²`.
///
/// Products of even-parity `sin^{|m|} θ` factors are polynomials in `cos θ`
/// (Gauss–Legendre); mixed-parity cross terms carry one extra `sin θ` and are
/// integrated with Gauss–Chebyshev of the second kind. Both rules are exact
/// once `n_theta` exceeds `l_max + 1`.
struct ThetaRules {
    even_tables: Vec<LegendreTable>,
    even_weights: Vec<f64>,
    odd_tables: Vec<LegendreTable>,
    /// Chebyshev weight divided by `sin θ_k`
    odd_weights: Vec<f64>,
}

impl ThetaRules {
    fn new(l_max: u32, n_theta: usize) -> Result<Self> {
        let gl = gauss_legendre(n_theta)?;
        let even_tables = gl
            .nodes
            .iter()
            .map(|x| LegendreTable::new(l_max, x.acos()))
            .collect();
        let mut odd_tables = Vec::with_capacity(n_theta);
        let mut odd_weights = Vec::with_capacity(n_theta);
        let step = PI / (n_theta as f64 + 1.0);
        for k in 1..=n_theta {
            let theta = step * k as f64;
            let s = theta.sin();
            odd_tables.push(LegendreTable::new(l_max, theta));
            odd_weights.push(step * s);
        }
        Ok(Self {
            even_tables,
            even_weights: gl.weights,
            odd_tables,
            odd_weights,
        })
    }
}

fn check_sorted(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return domain(format!("{name} grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain(format!(
            "{name} grid must be finite and strictly increasing"
        ));
    }
    Ok(())
}

/// θ-integrated spinor densities on an `(r, φ)` grid.
///
/// Rows in `r` are evaluated in parallel on the current rayon pool; every
/// entry is a fixed-order sum, so the field is independent of the pool size.
pub fn plane_density(
    packet: &SpinorPacket,
    r_grid: &[f64],
    phi_grid: &[f64],
    n_theta: usize,
) -> Result<DensityField> {
    if n_theta < 16 {
        return domain(format!("n_theta must be >= 16, got {n_theta}"));
    }
    check_sorted("r", r_grid)?;
    check_sorted("phi", phi_grid)?;
    if r_grid[0] < 0.0 {
        return domain("r grid must be non-negative");
    }
    if phi_grid[phi_grid.len() - 1] - phi_grid[0] >= 2.0 * PI {
        return domain("phi grid must lie within one period");
    }
    let l_max = packet.l_max();
    let rules = ThetaRules::new(l_max, n_theta)?;
    let comps = [
        ComponentTerms::new(packet, Spin::Up),
        ComponentTerms::new(packet, Spin::Down),
    ];
    let ln_norms: Vec<f64> = (0..=l_max).map(ln_radial_norm).collect();
    let n_phi = phi_grid.len();

    let rows: Vec<[Vec<f64>; 2]> = r_grid
        .par_iter()
        .map(|&r| {
            let radial: Vec<f64> = (0..=l_max)
                .map(|l| radial_unchecked(l, ln_norms[l as usize], r))
                .collect();
            let mut out = [vec![0.0; n_phi], vec![0.0; n_phi]];
            let mut b = Vec::new();
            for (comp, dest) in comps.iter().zip(out.iter_mut()) {
                if comp.is_empty() {
                    continue;
                }
                let even: Vec<bool> = comp.ms.iter().map(|m| m % 2 == 0).collect();
                let phases: Vec<Vec<Complex64>> = phi_grid
                    .iter()
                    .map(|&phi| {
                        comp.ms
                            .iter()
                            .map(|&m| Complex64::from_polar(1.0, m as f64 * phi))
                            .collect()
                    })
                    .collect();
                for (table, &w) in rules.even_tables.iter().zip(&rules.even_weights) {
                    comp.coefficients(&radial, table, &mut b);
                    for (j, ph) in phases.iter().enumerate() {
                        let (e, o) = parity_sums(&b, ph, &even);
                        dest[j] += w * (e.norm_sqr() + o.norm_sqr());
                    }
                }
                for (table, &w) in rules.odd_tables.iter().zip(&rules.odd_weights) {
                    comp.coefficients(&radial, table, &mut b);
                    for (j, ph) in phases.iter().enumerate() {
                        let (e, o) = parity_sums(&b, ph, &even);
                        dest[j] += w * 2.0 * (e.conj() * o).re;
                    }
                }
                for d in dest.iter_mut() {
                    // cross terms may round slightly below zero
                    *d = (*d * r * r).max(0.0);
                }
            }
            out
        })
        .collect();

    let mut d_up = Vec::with_capacity(r_grid.len() * n_phi);
    let mut d_down = Vec::with_capacity(r_grid.len() * n_phi);
    for [u, d] in rows {
        d_up.extend(u);
        d_down.extend(d);
    }
    Ok(DensityField {
        r_grid: r_grid.to_vec(),
        phi_grid: phi_grid.to_vec(),
        d_up,
        d_down,
        t: 0.0,
    })
}

/// Density snapshots of the evolved packet at each time.
pub fn density_snapshots(
    packet0: &SpinorPacket,
    times: &[f64],
    params: &ModelParams,
    grid: &DensityGrid,
) -> Result<Vec<DensityField>> {
    check_time_grid(times)?;
    let prop = Propagator::new(packet0, params);
    let r_grid = grid.r_grid(params);
    let phi_grid = grid.phi_grid();
    let n_theta = grid.n_theta_for(params);
    times
        .iter()
        .map(|&t| {
            let mut f = plane_density(&prop.at(t), &r_grid, &phi_grid, n_theta)?;
            f.t = t;
            Ok(f)
        })
        .collect()
}

/// Refined location of the maximum of `|Ψ_component|²` on a sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereMax {
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
}

/// `|Ψ_component(r, θ, φ)|²` at a fixed radius.
pub struct SphereFunction {
    comp: ComponentTerms,
    radial: Vec<f64>,
    l_max: u32,
}

impl SphereFunction {
    pub fn new(packet: &SpinorPacket, component: Spin, r: f64) -> Self {
        let l_max = packet.l_max();
        let radial = (0..=l_max)
            .map(|l| radial_unchecked(l, ln_radial_norm(l), r))
            .collect();
        Self {
            comp: ComponentTerms::new(packet, component),
            radial,
            l_max,
        }
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        self.eval_row(theta, &[phi])[0]
    }

    /// Values along a row of constant θ.
    pub fn eval_row(&self, theta: f64, phis: &[f64]) -> Vec<f64> {
        let table = LegendreTable::new(self.l_max, theta.clamp(0.0, PI));
        let mut b = Vec::new();
        self.comp.coefficients(&self.radial, &table, &mut b);
        phis.iter()
            .map(|&phi| {
                b.iter()
                    .zip(&self.comp.ms)
                    .map(|(bm, &m)| bm * Complex64::from_polar(1.0, m as f64 * phi))
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect()
    }

    /// Central finite-difference gradient `(∂θ, ∂φ)`.
    pub fn gradient(&self, theta: f64, phi: f64, h: f64) -> (f64, f64) {
        (
            (self.eval(theta + h, phi) - self.eval(theta - h, phi)) / (2.0 * h),
            (self.eval(theta, phi + h) - self.eval(theta, phi - h)) / (2.0 * h),
        )
    }

    fn hessian(&self, theta: f64, phi: f64, h: f64) -> [[f64; 2]; 2] {
        let f0 = self.eval(theta, phi);
        let tt = (self.eval(theta + h, phi) - 2.0 * f0 + self.eval(theta - h, phi)) / (h * h);
        let pp = (self.eval(theta, phi + h) - 2.0 * f0 + self.eval(theta, phi - h)) / (h * h);
        let tp = (self.eval(theta + h, phi + h)
            - self.eval(theta + h, phi - h)
            - self.eval(theta - h, phi + h)
            + self.eval(theta - h, phi - h))
            / (4.0 * h * h);
        [[tt, tp], [tp, pp]]
    }
}

/// Newton step `−H⁻¹g` when `H` is negative definite.
fn newton_step(g: (f64, f64), h: [[f64; 2]; 2]) -> Option<(f64, f64)> {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if !(h[0][0] < 0.0 && det > 0.0) {
        return None;
    }
    let dt = -(h[1][1] * g.0 - h[0][1] * g.1) / det;
    let dp = -(-h[1][0] * g.0 + h[0][0] * g.1) / det;
    Some((dt, dp))
}

const FD_STEP: f64 = 1e-5;

/// Bounded ascent from `start`: Newton steps inside a trust region that
/// shrinks whenever a step fails to increase the function.
fn refine(f: &SphereFunction, start: (f64, f64), radius0: f64) -> (f64, f64, f64) {
    let (mut theta, mut phi) = start;
    let mut value = f.eval(theta, phi);
    let mut radius = radius0;
    for _ in 0..200 {
        let g = f.gradient(theta, phi, FD_STEP);
        let h = f.hessian(theta, phi, FD_STEP);
        let (mut dt, mut dp) = newton_step(g, h).unwrap_or_else(|| {
            let n = g.0.hypot(g.1);
            if n == 0.0 {
                (0.0, 0.0)
            } else {
                (radius * g.0 / n, radius * g.1 / n)
            }
        });
        let len = dt.hypot(dp);
        if len > radius {
            dt *= radius / len;
            dp *= radius / len;
        }
        if dt.hypot(dp) < 1e-12 {
            break;
        }
        let (nt, np) = ((theta + dt).clamp(0.0, PI), phi + dp);
        let nv = f.eval(nt, np);
        if nv >= value {
            theta = nt;
            phi = np;
            value = nv;
        } else {
            radius *= 0.25;
            if radius < 1e-13 {
                break;
            }
        }
    }
    (theta, phi.rem_euclid(2.0 * PI), value)
}

/// Maximum of `|Ψ_component|²` on the sphere of radius `r_fixed`.
///
/// A coarse `n_theta × n_phi` scan (θ at cell midpoints) locates the peak; a
/// quadratic fit on its 3×3 neighbourhood then seeds a bounded Newton ascent.
/// Ties on the coarse grid keep the first point in θ-major order. Returns
/// `None` when the component carries no probability.
pub fn subpacket_maximum(
    packet: &SpinorPacket,
    component: Spin,
    r_fixed: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<Option<SphereMax>> {
    if !(r_fixed > 0.0 && r_fixed.is_finite()) {
        return domain(format!("r_fixed must be > 0, got {r_fixed}"));
    }
    if n_theta < 32 || n_phi < 32 {
        return domain(format!(
            "sphere grid must be at least 32 x 32, got {n_theta} x {n_phi}"
        ));
    }
    if packet.component_norm_sqr(component) < ABSENT_NORM_SQR {
        return Ok(None);
    }
    let f = SphereFunction::new(packet, component, r_fixed);
    let h_theta = PI / n_theta as f64;
    let h_phi = 2.0 * PI / n_phi as f64;
    let theta_at = |k: usize| (k as f64 + 0.5) * h_theta;
    let phi_at = |j: usize| j as f64 * h_phi;

    let phis: Vec<f64> = (0..n_phi).map(phi_at).collect();
    let values: Vec<Vec<f64>> = (0..n_theta)
        .map(|k| f.eval_row(theta_at(k), &phis))
        .collect();
    let (mut kb, mut jb, mut best) = (0, 0, f64::NEG_INFINITY);
    for (k, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > best * (1.0 + 1e-12) || best == f64::NEG_INFINITY {
                kb = k;
                jb = j;
                best = v;
            }
        }
    }
    if !(best > 0.0) {
        return Ok(None);
    }

    let (mut theta0, mut phi0) = (theta_at(kb), phi_at(jb));
    if kb > 0 && kb + 1 < n_theta {
        let at = |dk: i64, dj: i64| {
            let k = (kb as i64 + dk) as usize;
            let j = (jb as i64 + dj).rem_euclid(n_phi as i64) as usize;
            values[k][j]
        };
        let g = ((at(1, 0) - at(-1, 0)) / 2.0, (at(0, 1) - at(0, -1)) / 2.0);
        let hess = [
            [
                at(1, 0) - 2.0 * at(0, 0) + at(-1, 0),
                (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / 4.0,
            ],
            [0.0, at(0, 1) - 2.0 * at(0, 0) + at(0, -1)],
        ];
        let hess = [hess[0], [hess[0][1], hess[1][1]]];
        if let Some((dk, dj)) = newton_step(g, hess) {
            theta0 += dk.clamp(-1.0, 1.0) * h_theta;
            phi0 += dj.clamp(-1.0, 1.0) * h_phi;
        }
    }
    let (theta, phi, value) = refine(&f, (theta0, phi0), h_theta.max(h_phi));
    Ok(Some(SphereMax { theta, phi, value }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub t: f64,
    pub t_over_tls: f64,
    pub component: Spin,
    pub theta_star: f64,
    pub phi_star: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SphereTrack {
    pub rows: Vec<TrackRow>,
}

/// Coarse grid for [`subpacket_maximum`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self {
            n_theta: 64,
            n_phi: 128,
        }
    }
}

/// Subpacket maxima on the classical-orbit sphere over a time grid; times
/// where the component is absent are omitted.
pub fn maxima_track(
    packet0: &SpinorPacket,
    t_grid: &[f64],
    component: Spin,
    params: &ModelParams,
    grid: SphereGrid,
) -> Result<SphereTrack> {
    check_time_grid(t_grid)?;
    let r_cl = classical_orbit_radius(params.n_mean)?;
    let prop = Propagator::new(packet0, params);
    let t_ls = params.t_ls();
    let found: Vec<Option<TrackRow>> = t_grid
        .par_iter()
        .map(|&t| {
            let psi = prop.at(t);
            subpacket_maximum(&psi, component, r_cl, grid.n_theta, grid.n_phi).map(|m| {
                m.map(|m| TrackRow {
                    t,
                    t_over_tls: t / t_ls,
                    component,
                    theta_star: m.theta,
                    phi_star: m.phi,
                    value: m.value,
                })
            })
        })
        .collect::<Result<_>>()?;
    Ok(SphereTrack {
        rows: found.into_iter().flatten().collect(),
    })
}
