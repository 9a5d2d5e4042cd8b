//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use spin_orbit_pendulum::cli::{
    cmd_density, cmd_expectations, cmd_maxima, ComponentArg, ConfigArgs, Mode, RunConfig,
};
use spin_orbit_pendulum::density::{
    classical_orbit_radius, density_snapshots, maxima_track, DensityField, DensityGrid,
    SphereFunction, SphereGrid,
};
use spin_orbit_pendulum::oracle::{converged_fidelity, eigenvalue_error, ORACLE_L_MAX};
use spin_orbit_pendulum::packet::single_multiplet_packet;
use spin_orbit_pendulum::{
    build_packet, series, spin_expectation, ModelParams, Propagator, Spin, SpinDirection,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

fn params(n_mean: f64) -> ModelParams {
    ModelParams::with_ratio(n_mean, 1.0, 2.0, 1e-12).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

fn tilted() -> SpinDirection {
    SpinDirection::new(PI / 2.0, 0.0).unwrap()
}

fn unitarity() -> Outcome {
    let start = Instant::now();
    let mut worst_norm: f64 = 0.0;
    let mut worst_j: f64 = 0.0;
    for n in [4.0, 20.0] {
        let p = params(n);
        let packet = build_packet(&p, SpinDirection::DOWN).unwrap();
        let s = series(&packet, &linspace(0.0, 2.0 * p.t_ls(), 1001), &p).unwrap();
        worst_norm = worst_norm.max(s.max_norm_error());
        worst_j = worst_j.max(s.max_j_drift());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst_norm < 1e-12 && worst_j < 1e-10 && secs < 10.0,
        format!("max |norm-1| = {worst_norm:.2e}, max |Δ⟨j⟩| = {worst_j:.2e}, {secs:.2} s"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst_infidelity: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    let mut steps = 0;
    for n in [2.0, 4.0] {
        let p = params(n).truncated_at(ORACLE_L_MAX);
        let packet = build_packet(&p, tilted()).unwrap();
        let (f, n_steps) = converged_fidelity(&packet, p.t_ls() / 2.0, &p, &p, 1e-10).unwrap();
        worst_infidelity = worst_infidelity.max(1.0 - f);
        steps = steps.max(n_steps);
        worst_eig = worst_eig.max(eigenvalue_error(ORACLE_L_MAX, &p).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst_infidelity <= 1e-8 && worst_eig < 1e-11 && secs < 30.0,
        format!(
            "max 1-F = {worst_infidelity:.2e} ({steps} Cayley steps), max eigenvalue error = {worst_eig:.2e}, {secs:.2} s"
        ),
    )
}

/// `s_z(t)` for `|l, m=l, ↓⟩` from the 2x2 block `κ l·s` in the basis
/// (`|l, l, ↓⟩`, `|l, l-1, ↑⟩`), diagonalized numerically.
fn two_level_sz(l: u32, kappa: f64, t: f64) -> f64 {
    let l = l as f64;
    let h = Matrix2::new(
        -l / 2.0,
        (l / 2.0).sqrt(),
        (l / 2.0).sqrt(),
        (l - 1.0) / 2.0,
    ) * kappa;
    let eig = h.symmetric_eigen();
    let c0 = Vector2::new(1.0, 0.0);
    let mut psi = [Complex64::new(0.0, 0.0); 2];
    for k in 0..2 {
        let v = eig.eigenvectors.column(k);
        let proj = v.dot(&c0);
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        psi[0] += phase * proj * v[0];
        psi[1] += phase * proj * v[1];
    }
    0.5 * (psi[1].norm_sqr() - psi[0].norm_sqr())
}

fn single_multiplet() -> Outcome {
    let l = 4;
    let p = params(4.0).truncated_at(l);
    let omega = p.kappa * (l as f64 + 0.5);
    let period = 2.0 * PI / omega;
    let packet = single_multiplet_packet(l, SpinDirection::DOWN);
    let times = linspace(0.0, 3.5 * period, 7001);
    let s = series(&packet, &times, &p).unwrap();
    let sz: Vec<f64> = s.rows.iter().map(|r| r.s.z).collect();
    let dt = times[1] - times[0];
    let mut minima = Vec::new();
    for k in 1..sz.len() - 1 {
        if sz[k] <= sz[k - 1] && sz[k] < sz[k + 1] {
            let (a, b, c) = (sz[k - 1], sz[k], sz[k + 1]);
            minima.push(times[k] + 0.5 * dt * (a - c) / (a - 2.0 * b + c));
        }
    }
    let measured = (minima[minima.len() - 1] - minima[0]) / (minima.len() - 1) as f64;
    let rel = (measured / period - 1.0).abs();
    let mut pointwise: f64 = 0.0;
    for (r, &t) in s.rows.iter().zip(&times) {
        pointwise = pointwise.max((r.s.z - two_level_sz(l, p.kappa, t)).abs());
    }
    let (lo, hi) = sz
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let (olo, ohi) = times
        .iter()
        .map(|&t| two_level_sz(l, p.kappa, t))
        .fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)));
    let extremes = (lo - olo).abs().max((hi - ohi).abs());
    Outcome::new(
        rel < 1e-3 && extremes < 1e-10 && pointwise < 1e-10,
        format!(
            "period {measured:.6} vs {period:.6} (rel {rel:.1e}), s_z in [{lo:.6}, {hi:.6}], extremes vs 2x2 {extremes:.1e}, pointwise {pointwise:.1e}"
        ),
    )
}

fn exchange() -> Outcome {
    let p = params(4.0);
    let packet = build_packet(&p, SpinDirection::DOWN).unwrap();
    let times: Vec<f64> = (0..=250).map(|k| k as f64 * p.t_ls() / 500.0).collect();
    let s = series(&packet, &times, &p).unwrap();
    let jz0 = s.rows[0].l.z + s.rows[0].s.z;
    let drift = s
        .rows
        .iter()
        .map(|r| (r.l.z + r.s.z - jz0).abs())
        .fold(0.0, f64::max);
    let (lo, hi) = s.rows.iter().fold((f64::MAX, f64::MIN), |(a, b), r| {
        (a.min(r.s.z), b.max(r.s.z))
    });
    Outcome::new(
        drift < 1e-10 && hi - lo > 0.2,
        format!("max |Δ(l_z+s_z)| = {drift:.2e}, s_z range {:.4}", hi - lo),
    )
}

fn peak_to_peak(prop: &Propagator, a: f64, b: f64) -> f64 {
    let (lo, hi) = linspace(a, b, 2001)
        .iter()
        .map(|&t| spin_expectation(&prop.at(t)).x)
        .fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)));
    hi - lo
}

fn collapse_revival() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for n in [4.0, 20.0] {
        let p = params(n);
        let prop = Propagator::new(
            &build_packet(&p, SpinDirection::new(1.0, 0.4).unwrap()).unwrap(),
            &p,
        );
        let t_rev = p.revival_time();
        for _ in 0..20 {
            let t = rng.gen_range(0.0..t_rev);
            let a = spin_expectation(&prop.at(t));
            let b = spin_expectation(&prop.at(t + t_rev));
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    let p = params(20.0);
    let prop = Propagator::new(&build_packet(&p, tilted()).unwrap(), &p);
    let t_rev = p.revival_time();
    let early = peak_to_peak(&prop, 0.0, 0.05 * t_rev);
    let late = peak_to_peak(&prop, 0.2 * t_rev, 0.3 * t_rev);
    Outcome::new(
        worst < 1e-9 && late < 0.25 * early,
        format!("max |Δ⟨s⟩| over one revival = {worst:.2e}; N=20 s_x peak-to-peak {early:.3} early, {late:.1e} collapsed"),
    )
}

fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(
            (0, f64::MIN),
            |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
        )
        .0
}

fn local_maxima(v: &[f64]) -> usize {
    let n = v.len();
    (0..n)
        .filter(|&j| v[j] > v[(j + n - 1) % n] && v[j] >= v[(j + 1) % n])
        .count()
}

fn density_protocol() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [4.0, 20.0] {
        let p = params(n);
        let packet = build_packet(&p, SpinDirection::DOWN).unwrap();
        let times: Vec<f64> = (0..9).map(|k| k as f64 * p.t_ls() / 16.0).collect();
        let fields: Vec<DensityField> =
            density_snapshots(&packet, &times, &p, &DensityGrid::default()).unwrap();
        let sum_err = fields
            .iter()
            .map(|f| (f.sum_rule() - 1.0).abs())
            .fold(0.0, f64::max);
        let up0 = fields[0].d_up.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let m0 = fields[0].phi_marginal(None);
        let n_phi = m0.len();
        let peak0 = circular_distance(argmax(&m0), 0, n_phi);
        let single = local_maxima(&m0) == 1;
        ok &= sum_err < 1e-6 && up0 == 0.0 && peak0 <= 1 && single;
        let mut note = format!(
            "N={n}: sum rule err {sum_err:.1e}, max d_up(0) {up0:.0e}, t=0 peak {} cell(s) from 0 ({} local max)",
            peak0,
            local_maxima(&m0)
        );
        if n == 4.0 {
            let sep = fields[1..8]
                .iter()
                .map(|f| {
                    let up = f.phi_marginal(Some(Spin::Up));
                    let down = f.phi_marginal(Some(Spin::Down));
                    circular_distance(argmax(&up), argmax(&down), n_phi)
                })
                .max()
                .unwrap();
            ok &= sep >= 4;
            note.push_str(&format!(", largest up/down lobe separation {sep} cells"));
        }
        notes.push(note);
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    Outcome::new(ok, format!("{}; {secs:.1} s", notes.join("; ")))
}

fn maxima() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [4.0, 20.0] {
        let p = params(n);
        let packet = build_packet(&p, SpinDirection::DOWN).unwrap();
        let times = linspace(0.0, p.t_ls() / 2.0, 33);
        let r = classical_orbit_radius(n).unwrap();
        let prop = Propagator::new(&packet, &p);
        let down = maxima_track(&packet, &times, Spin::Down, &p, SphereGrid::default()).unwrap();
        let up = maxima_track(&packet, &times, Spin::Up, &p, SphereGrid::default()).unwrap();
        let d0 = &down.rows[0];
        let start_err = (d0.theta_star - PI / 2.0)
            .abs()
            .max(d0.phi_star.min(2.0 * PI - d0.phi_star));
        let mut min_off = f64::MAX;
        let mut checked = 0;
        for row in &up.rows {
            if prop.at(row.t).component_norm_sqr(Spin::Up) > 1e-3 {
                min_off = min_off.min((row.theta_star - PI / 2.0).abs());
                checked += 1;
            }
        }
        let mut max_grad: f64 = 0.0;
        for row in down.rows.iter().chain(&up.rows) {
            let f = SphereFunction::new(&prop.at(row.t), row.component, r);
            let g = f.gradient(row.theta_star, row.phi_star, 1e-5);
            max_grad = max_grad.max(g.0.hypot(g.1));
        }
        ok &= start_err < 1e-6 && checked > 0 && min_off > 1e-3 && max_grad < 1e-5;
        notes.push(format!(
            "N={n}: down start off (π/2, 0) by {start_err:.1e}, min |θ*_up - π/2| = {min_off:.3} over {checked} times, max |∇| = {max_grad:.1e}"
        ));
    }
    Outcome::new(ok, notes.join("; "))
}

fn config(out: &Path, workers: usize, n_times: usize) -> ConfigArgs {
    ConfigArgs {
        n_times: Some(n_times),
        n_r: Some(48),
        n_phi: Some(128),
        workers: Some(workers),
        out_dir: Some(out.to_path_buf()),
        ..ConfigArgs::default()
    }
}

fn write_all(out: &Path, workers: usize) -> Vec<(String, Vec<u8>)> {
    let cfg = RunConfig::resolve(config(out, workers, 251), Mode::Expectations).unwrap();
    cmd_expectations(&cfg).unwrap();
    let cfg = RunConfig::resolve(config(out, workers, 9), Mode::Density).unwrap();
    cmd_density(&cfg).unwrap();
    let cfg = RunConfig::resolve(config(out, workers, 9), Mode::Maxima).unwrap();
    cmd_maxima(&cfg, ComponentArg::Both).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".csv"))
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let a = write_all(dirs[0].path(), 1);
    let b = write_all(dirs[1].path(), 1);
    let c = write_all(dirs[2].path(), 8);
    Outcome::new(
        a.len() == 11 && a == b && a == c,
        format!(
            "{} CSV files; repeat identical: {}; workers 1 vs 8 identical: {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("unitarity and conservation", unitarity),
        ("oracle equivalence", oracle_equivalence),
        ("single-multiplet pendulum", single_multiplet),
        ("spin-orbit exchange", exchange),
        ("collapse and revival", collapse_revival),
        ("density snapshots", density_protocol),
        ("subpacket maxima", maxima),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = check();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {}", outcome.detail);
        if !outcome.passed {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
