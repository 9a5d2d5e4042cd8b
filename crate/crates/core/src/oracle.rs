//! Brute-force reference: the dense Hamiltonian in the truncated decoupled
//! basis and Cayley time stepping. Independent of the coupled-basis path.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::angular::{cg, ladder_coeff, HalfInt};
use crate::basis::{BasisState, Spin};
use crate::error::{domain, Error, Result};
use crate::model::{energy, JBranch, ModelParams};
use crate::observables::{orbital_expectation, spin_expectation, Vec3};
use crate::packet::{build_packet, SpinDirection, SpinorPacket};
use crate::propagator::propagate;

/// Largest basis cutoff the dense oracle accepts.
pub const ORACLE_L_MAX: u32 = 12;

/// Dense operator over all `BasisState`s with `l ≤ l_max`.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub l_max: u32,
    pub matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |A − A†|`
    pub fn hermiticity_error(&self) -> f64 {
        let a = &self.matrix;
        (a - a.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max |[A, B]|`
    pub fn commutator_norm(&self, other: &DenseOperator) -> f64 {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order (Hermitian input assumed).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn expectation(&self, packet: &SpinorPacket) -> Complex64 {
        let v = to_vector(packet);
        v.dotc(&(&self.matrix * &v))
    }
}

fn check_l_max(l_max: u32) -> Result<()> {
    if l_max > ORACLE_L_MAX {
        return domain(format!(
            "dense oracle limited to l_max <= {ORACLE_L_MAX}, got {l_max}"
        ));
    }
    Ok(())
}

fn zeros(l_max: u32) -> DMatrix<Complex64> {
    let n = BasisState::count(l_max);
    DMatrix::from_element(n, n, Complex64::new(0.0, 0.0))
}

fn states(l_max: u32) -> impl Iterator<Item = BasisState> {
    (0..BasisState::count(l_max)).map(BasisState::from_index)
}

fn to_vector(packet: &SpinorPacket) -> DVector<Complex64> {
    DVector::from_column_slice(packet.as_slice())
}

/// `H = ω₀(l + 3/2) + κ [l_z s_z + (l₊s₋ + l₋s₊)/2]` as a dense matrix.
pub fn build_hamiltonian(l_max: u32, params: &ModelParams) -> Result<DenseOperator> {
    check_l_max(l_max)?;
    let mut h = zeros(l_max);
    for s in states(l_max) {
        let i = s.index();
        h[(i, i)] += Complex64::new(
            params.omega0 * (s.l as f64 + 1.5) + params.kappa * s.m_l as f64 * s.spin.m_s(),
            0.0,
        );
        // l₊ s₋ : |m, ↑⟩ → |m+1, ↓⟩
        if s.spin == Spin::Up && s.m_l < s.l as i32 {
            let j = BasisState {
                l: s.l,
                m_l: s.m_l + 1,
                spin: Spin::Down,
            }
            .index();
            let v = 0.5 * params.kappa * ladder_coeff(s.l, s.m_l)?;
            h[(j, i)] += Complex64::new(v, 0.0);
            h[(i, j)] += Complex64::new(v, 0.0);
        }
    }
    Ok(DenseOperator { l_max, matrix: h })
}

/// Spin component operator (`axis` 0, 1, 2 for x, y, z).
pub fn spin_operator(l_max: u32, axis: usize) -> Result<DenseOperator> {
    check_l_max(l_max)?;
    let mut m = zeros(l_max);
    for s in states(l_max).filter(|s| s.spin == Spin::Up) {
        let up = s.index();
        let down = BasisState {
            spin: Spin::Down,
            ..s
        }
        .index();
        match axis {
            0 => {
                m[(up, down)] = Complex64::new(0.5, 0.0);
                m[(down, up)] = Complex64::new(0.5, 0.0);
            }
            1 => {
                m[(up, down)] = Complex64::new(0.0, -0.5);
                m[(down, up)] = Complex64::new(0.0, 0.5);
            }
            2 => {
                m[(up, up)] = Complex64::new(0.5, 0.0);
                m[(down, down)] = Complex64::new(-0.5, 0.0);
            }
            _ => return domain(format!("axis must be 0, 1 or 2, got {axis}")),
        }
    }
    Ok(DenseOperator { l_max, matrix: m })
}

/// Orbital component operator (`axis` 0, 1, 2 for x, y, z).
pub fn orbital_operator(l_max: u32, axis: usize) -> Result<DenseOperator> {
    check_l_max(l_max)?;
    if axis > 2 {
        return domain(format!("axis must be 0, 1 or 2, got {axis}"));
    }
    let mut m = zeros(l_max);
    for s in states(l_max) {
        let i = s.index();
        if axis == 2 {
            m[(i, i)] = Complex64::new(s.m_l as f64, 0.0);
            continue;
        }
        if s.m_l < s.l as i32 {
            let j = BasisState {
                m_l: s.m_l + 1,
                ..s
            }
            .index();
            let c = ladder_coeff(s.l, s.m_l)?;
            // l₊ has ⟨j|l₊|i⟩ = c; l_x = (l₊ + l₋)/2, l_y = (l₊ − l₋)/2i
            let (up, down) = if axis == 0 {
                (Complex64::new(0.5 * c, 0.0), Complex64::new(0.5 * c, 0.0))
            } else {
                (Complex64::new(0.0, -0.5 * c), Complex64::new(0.0, 0.5 * c))
            };
            m[(j, i)] = up;
            m[(i, j)] = down;
        }
    }
    Ok(DenseOperator { l_max, matrix: m })
}

/// Total `j_z = l_z + s_z`.
pub fn jz_operator(l_max: u32) -> Result<DenseOperator> {
    let mut lz = orbital_operator(l_max, 2)?;
    lz.matrix += spin_operator(l_max, 2)?.matrix;
    Ok(lz)
}

/// Cayley propagator `(1 + iHδt/2)⁻¹ (1 − iHδt/2)` stored as sparse rows
/// (exact zeros of the dense product are dropped).
pub struct CayleyStep {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl CayleyStep {
    pub fn new(h: &DenseOperator, dt: f64) -> Result<Self> {
        let n = h.dimension();
        let half = Complex64::new(0.0, 0.5 * dt);
        let eye = DMatrix::<Complex64>::identity(n, n);
        let a = &eye + &h.matrix * half;
        let b = &eye - &h.matrix * half;
        let u = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Linalg("singular Cayley denominator".into()))?;
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let z = u[(i, j)];
                        (z.re != 0.0 || z.im != 0.0).then_some((j, z))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, z)| z * v[j]).sum();
        }
    }
}

/// `n_steps` Cayley substeps of size `t / n_steps` with the dense Hamiltonian.
pub fn propagate_numeric(
    packet: &SpinorPacket,
    t: f64,
    n_steps: usize,
    params: &ModelParams,
) -> Result<SpinorPacket> {
    if n_steps == 0 {
        return domain("n_steps must be >= 1");
    }
    if t == 0.0 {
        return Ok(packet.clone());
    }
    let h = build_hamiltonian(packet.l_max(), params)?;
    let step = CayleyStep::new(&h, t / n_steps as f64)?;
    let mut v = packet.as_slice().to_vec();
    let mut w = v.clone();
    for _ in 0..n_steps {
        step.apply(&v, &mut w);
        std::mem::swap(&mut v, &mut w);
    }
    SpinorPacket::from_dense(packet.l_max(), v)
}

/// `|⟨a|b⟩|`
pub fn fidelity(a: &SpinorPacket, b: &SpinorPacket) -> f64 {
    a.inner(b).norm()
}

/// Fidelity of Cayley against spectral propagation, doubling `n_steps` from
/// 256 until successive infidelities differ by less than `tol`.
pub fn converged_fidelity(
    packet: &SpinorPacket,
    t: f64,
    spectral_params: &ModelParams,
    numeric_params: &ModelParams,
    tol: f64,
) -> Result<(f64, usize)> {
    let exact = propagate(packet, t, spectral_params);
    let mut n = 256usize;
    let mut prev = fidelity(&exact, &propagate_numeric(packet, t, n, numeric_params)?);
    while n < 1 << 20 {
        n *= 2;
        let f = fidelity(&exact, &propagate_numeric(packet, t, n, numeric_params)?);
        let done = (f - prev).abs() < tol;
        prev = f;
        if done {
            break;
        }
    }
    Ok((prev, n))
}

/// `⟨s⟩` and `⟨l⟩` from the dense operator matrices.
pub fn dense_observables(packet: &SpinorPacket) -> Result<(Vec3, Vec3)> {
    let l_max = packet.l_max();
    let mut s = [0.0; 3];
    let mut l = [0.0; 3];
    for axis in 0..3 {
        s[axis] = spin_operator(l_max, axis)?.expectation(packet).re;
        l[axis] = orbital_operator(l_max, axis)?.expectation(packet).re;
    }
    Ok((Vec3::new(s[0], s[1], s[2]), Vec3::new(l[0], l[1], l[2])))
}

/// Normalized packet with uniformly random complex amplitudes, seeded.
pub fn random_packet(l_max: u32, seed: u64) -> SpinorPacket {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let amps = (0..BasisState::count(l_max))
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut p = SpinorPacket::from_dense(l_max, amps).expect("length from count");
    p.normalize().expect("random packet is non-zero");
    p
}

/// Result of one named oracle comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn below(name: &str, measured: f64, threshold: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            measured,
            threshold,
            passed: measured < threshold,
            detail,
        }
    }
}

/// Largest deviation between dense eigenvalues and `energy()` with
/// multiplicities `2j + 1`, over blocks `l ≤ l_max`.
pub fn eigenvalue_error(l_max: u32, params: &ModelParams) -> Result<f64> {
    let h = build_hamiltonian(l_max, params)?;
    let dense = h.eigenvalues();
    let mut expect = Vec::with_capacity(dense.len());
    for l in 0..=l_max {
        for branch in JBranch::BOTH {
            if let Ok(e) = energy(l, branch, params) {
                let mult = branch.twice_j(l)? as usize + 1;
                expect.extend(std::iter::repeat_n(e, mult));
            }
        }
    }
    expect.sort_by(f64::total_cmp);
    if expect.len() != dense.len() {
        return Err(Error::Linalg(format!(
            "spectrum size {} differs from level count {}",
            dense.len(),
            expect.len()
        )));
    }
    Ok(dense
        .iter()
        .zip(&expect)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Settings for [`run_checks`].
#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    /// Flip the sign of κ on the numeric side only; the fidelity checks must
    /// then fail.
    pub corrupt_kappa_sign: bool,
}

/// The full oracle suite.
pub fn run_checks(opts: &CheckOptions) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let base = ModelParams::with_ratio(4.0, 1.0, 2.0, 1e-12)?.truncated_at(ORACLE_L_MAX);

    let h = build_hamiltonian(ORACLE_L_MAX, &base)?;
    out.push(CheckResult::below(
        "hamiltonian_hermitian",
        h.hermiticity_error(),
        1e-13,
        format!("dimension {}", h.dimension()),
    ));
    out.push(CheckResult::below(
        "hamiltonian_commutes_with_jz",
        h.commutator_norm(&jz_operator(ORACLE_L_MAX)?),
        1e-13,
        "max |[H, j_z]|".into(),
    ));
    out.push(CheckResult::below(
        "eigenvalues_match_energy",
        eigenvalue_error(ORACLE_L_MAX, &base)?,
        1e-11,
        format!("l <= {ORACLE_L_MAX}, multiplicities 2j+1"),
    ));

    let mut cg_err: f64 = 0.0;
    for l in 1..=30u32 {
        for tm in (-(2 * l as i32 - 1)..=(2 * l as i32 - 1)).step_by(2) {
            let p = cg(l, HalfInt::from_twice(tm), JBranch::Plus)?;
            let m = cg(l, HalfInt::from_twice(tm), JBranch::Minus)?;
            cg_err = cg_err
                .max((p.up_coeff.powi(2) + p.down_coeff.powi(2) - 1.0).abs())
                .max((m.up_coeff.powi(2) + m.down_coeff.powi(2) - 1.0).abs())
                .max((p.up_coeff * m.up_coeff + p.down_coeff * m.down_coeff).abs());
        }
    }
    out.push(CheckResult::below(
        "clebsch_gordan_orthonormal",
        cg_err,
        1e-14,
        "l <= 30".into(),
    ));

    for n_mean in [2.0, 4.0] {
        let spectral = ModelParams::with_ratio(n_mean, 1.0, 2.0, 1e-12)?.truncated_at(ORACLE_L_MAX);
        let mut numeric = spectral.clone();
        if opts.corrupt_kappa_sign {
            numeric.kappa = -numeric.kappa;
        }
        let packet = build_packet(&spectral, SpinDirection::DOWN)?;
        for (label, frac) in [("quarter", 0.25), ("half", 0.5), ("full", 1.0)] {
            let t = frac * spectral.t_ls();
            let (f, n) = converged_fidelity(&packet, t, &spectral, &numeric, 1e-10)?;
            out.push(CheckResult::below(
                &format!("fidelity_n{}_{label}_tls", n_mean as u32),
                1.0 - f,
                1e-8,
                format!("infidelity at t = {frac} T_ls with {n} Cayley steps"),
            ));
        }
    }

    let mut obs_err: f64 = 0.0;
    for seed in 0..4 {
        let p = random_packet(6, seed);
        let (s, l) = dense_observables(&p)?;
        obs_err = obs_err
            .max(s.max_abs_diff(&spin_expectation(&p)))
            .max(l.max_abs_diff(&orbital_expectation(&p)));
    }
    out.push(CheckResult::below(
        "observables_dense_vs_analytic",
        obs_err,
        1e-10,
        "4 random states, l_max = 6".into(),
    ));

    let p = random_packet(6, 11);
    let small = base.clone().truncated_at(6);
    let stepped = propagate_numeric(&p, 50.0, 1000, &small)?;
    out.push(CheckResult::below(
        "cayley_norm_preserved",
        (stepped.norm_sqr() - 1.0).abs(),
        1e-13,
        "1000 steps".into(),
    ));

    let exact = propagate(&p, 5.0, &small);
    let e1 = propagate_numeric(&p, 5.0, 200, &small)?.distance(&exact);
    let e2 = propagate_numeric(&p, 5.0, 400, &small)?.distance(&exact);
    let ratio = e1 / e2;
    out.push(CheckResult {
        name: "cayley_second_order".into(),
        measured: ratio,
        threshold: 4.0,
        passed: (ratio - 4.0).abs() < 0.2,
        detail: "error ratio on halving the step, expected 4".into(),
    });

    Ok(out)
}
