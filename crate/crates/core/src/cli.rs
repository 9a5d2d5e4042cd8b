//! Command-line front end: configuration merging, the four run modes, and
//! CSV/JSON output.
//!
//! Floats are written with Rust's shortest round-trip formatting. All output
//! is produced by a single writer after the parallel evaluation finishes, so
//! files are byte-identical for any worker count.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::basis::Spin;
use crate::density::{
    classical_orbit_radius, density_snapshots, maxima_track, DensityGrid, SphereGrid,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::series;
use crate::oracle::{run_checks, CheckOptions, CheckResult};
use crate::packet::{build_packet, SpinDirection};
use crate::with_workers;

#[derive(Debug, Parser)]
#[command(
    name = "spin-orbit",
    version,
    about = "Spin-orbit pendulum of a coherent spinor wave packet"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time series of ⟨s⟩, ⟨l⟩, ⟨j⟩ and the norm (expectations.csv).
    Expectations(ConfigArgs),
    /// θ-integrated density snapshots (density_NNN.csv + manifest.json).
    Density(ConfigArgs),
    /// Subpacket maxima on the classical-orbit sphere (maxima.csv).
    Maxima {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = ComponentArg::Both)]
        component: ComponentArg,
    },
    /// Oracle suite against the dense Hamiltonian (report.json).
    Check {
        #[command(flatten)]
        config: ConfigArgs,
        /// Flip the sign of κ in the numeric oracle; the run must then fail.
        #[arg(long, hide = true)]
        corrupt_kappa_sign: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComponentArg {
    Up,
    Down,
    Both,
}

impl ComponentArg {
    fn spins(self) -> &'static [Spin] {
        match self {
            ComponentArg::Up => &[Spin::Up],
            ComponentArg::Down => &[Spin::Down],
            ComponentArg::Both => &Spin::BOTH,
        }
    }
}

/// Every run parameter as an optional override; shared by flags and JSON
/// config files.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigArgs {
    /// JSON config (or a density manifest.json); explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_mean: Option<f64>,
    #[arg(long)]
    pub omega0: Option<f64>,
    /// ω₀ / ω_ls; mutually exclusive with --kappa.
    #[arg(long, conflicts_with = "kappa")]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub spin_theta: Option<f64>,
    #[arg(long)]
    pub spin_phi: Option<f64>,
    #[arg(long = "t-max-tls")]
    pub t_max_tls: Option<f64>,
    #[arg(long)]
    pub n_times: Option<usize>,
    #[arg(long)]
    pub n_r: Option<usize>,
    #[arg(long)]
    pub n_phi: Option<usize>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub sphere_n_theta: Option<usize>,
    #[arg(long)]
    pub sphere_n_phi: Option<usize>,
    #[arg(long)]
    pub weight_tol: Option<f64>,
    /// Worker threads (0 = all cores); defaults to $SPIN_ORBIT_WORKERS.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl ConfigArgs {
    /// Fields set in `self` replace those in `base`.
    fn over(self, base: ConfigArgs) -> ConfigArgs {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigArgs { config: self.config.or(base.config), $($f: self.$f.or(base.$f)),* } };
        }
        let mut merged = pick!(
            n_mean,
            omega0,
            ratio,
            kappa,
            spin_theta,
            spin_phi,
            t_max_tls,
            n_times,
            n_r,
            n_phi,
            n_theta,
            r_max,
            sphere_n_theta,
            sphere_n_phi,
            weight_tol,
            workers,
            out_dir
        );
        // a coupling given on the command line replaces the file's coupling
        if self.kappa.is_some() {
            merged.ratio = None;
        } else if self.ratio.is_some() {
            merged.kappa = None;
        }
        merged
    }
}

/// Which coupling parameter fixes κ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `ω₀ / ω_ls`
    Ratio(f64),
    Kappa(f64),
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_mean: f64,
    pub omega0: f64,
    pub coupling: Coupling,
    pub spin_theta: f64,
    pub spin_phi: f64,
    pub t_max_tls: f64,
    pub n_times: usize,
    pub n_r: usize,
    pub n_phi: usize,
    pub n_theta: Option<usize>,
    pub r_max: Option<f64>,
    pub sphere_n_theta: usize,
    pub sphere_n_phi: usize,
    pub weight_tol: f64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

/// Run mode, which decides the default number of time points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Expectations,
    Density,
    Maxima,
    Check,
}

impl Mode {
    /// Expectations: steps of T_ls/500 over T_ls/2. Density: steps of
    /// T_ls/16 over T_ls/2.
    fn default_n_times(self) -> usize {
        match self {
            Mode::Expectations => 251,
            Mode::Density => 9,
            Mode::Maxima => 65,
            Mode::Check => 1,
        }
    }
}

impl RunConfig {
    pub fn resolve(args: ConfigArgs, mode: Mode) -> Result<RunConfig> {
        let args = match &args.config {
            Some(path) => args.clone().over(load_config_file(path)?),
            None => args,
        };
        let coupling = match (args.ratio, args.kappa) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either ratio or kappa, not both".into()))
            }
            (Some(r), None) => Coupling::Ratio(r),
            (None, Some(k)) => Coupling::Kappa(k),
            (None, None) => Coupling::Ratio(2.0),
        };
        let workers = match args.workers {
            Some(w) => w,
            None => std::env::var("SPIN_ORBIT_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(0),
        };
        let cfg = RunConfig {
            n_mean: args.n_mean.unwrap_or(4.0),
            omega0: args.omega0.unwrap_or(1.0),
            coupling,
            spin_theta: args.spin_theta.unwrap_or(PI),
            spin_phi: args.spin_phi.unwrap_or(0.0),
            t_max_tls: args.t_max_tls.unwrap_or(0.5),
            n_times: args.n_times.unwrap_or(mode.default_n_times()),
            n_r: args.n_r.unwrap_or(96),
            n_phi: args.n_phi.unwrap_or(256),
            n_theta: args.n_theta,
            r_max: args.r_max,
            sphere_n_theta: args.sphere_n_theta.unwrap_or(64),
            sphere_n_phi: args.sphere_n_phi.unwrap_or(128),
            weight_tol: args.weight_tol.unwrap_or(1e-12),
            workers,
            out_dir: args.out_dir.unwrap_or_else(|| PathBuf::from(".")),
        };
        if cfg.n_times < 1 {
            return Err(Error::Config("n_times must be >= 1".into()));
        }
        if !(cfg.t_max_tls >= 0.0 && cfg.t_max_tls.is_finite()) {
            return Err(Error::Config("t_max_tls must be finite and >= 0".into()));
        }
        if cfg.n_r < 2 || cfg.n_phi < 4 {
            return Err(Error::Config(
                "density grid needs n_r >= 2 and n_phi >= 4".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let p = match self.coupling {
            Coupling::Ratio(r) => {
                ModelParams::with_ratio(self.n_mean, self.omega0, r, self.weight_tol)?
            }
            Coupling::Kappa(k) => ModelParams::new(self.n_mean, self.omega0, k, self.weight_tol)?,
        };
        if p.kappa == 0.0 {
            return Err(Error::Config("kappa = 0 leaves T_ls undefined".into()));
        }
        Ok(p)
    }

    pub fn spin(&self) -> Result<SpinDirection> {
        SpinDirection::new(self.spin_theta, self.spin_phi)
    }

    /// Equidistant times over `[0, t_max_tls · T_ls]`.
    pub fn times(&self, params: &ModelParams) -> Vec<f64> {
        let t_max = self.t_max_tls * params.t_ls();
        if self.n_times == 1 || t_max == 0.0 {
            return vec![0.0];
        }
        let last = (self.n_times - 1) as f64;
        (0..self.n_times).map(|k| t_max * k as f64 / last).collect()
    }

    pub fn density_grid(&self) -> DensityGrid {
        DensityGrid {
            n_r: self.n_r,
            n_phi: self.n_phi,
            n_theta: self.n_theta,
            r_max: self.r_max,
        }
    }
}

/// Reads a config file: either bare [`ConfigArgs`] fields, a serialized
/// [`RunConfig`], or a density manifest with a `config` entry.
fn load_config_file(path: &Path) -> Result<ConfigArgs> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let value = match value.get("config") {
        Some(inner) if value.get("snapshot_times").is_some() => inner.clone(),
        _ => value,
    };
    if value.get("coupling").is_some() {
        let rc: RunConfig = serde_json::from_value(value)?;
        return Ok(rc.into());
    }
    Ok(serde_json::from_value(value)?)
}

impl From<RunConfig> for ConfigArgs {
    fn from(rc: RunConfig) -> Self {
        let (ratio, kappa) = match rc.coupling {
            Coupling::Ratio(r) => (Some(r), None),
            Coupling::Kappa(k) => (None, Some(k)),
        };
        ConfigArgs {
            config: None,
            n_mean: Some(rc.n_mean),
            omega0: Some(rc.omega0),
            ratio,
            kappa,
            spin_theta: Some(rc.spin_theta),
            spin_phi: Some(rc.spin_phi),
            t_max_tls: Some(rc.t_max_tls),
            n_times: Some(rc.n_times),
            n_r: Some(rc.n_r),
            n_phi: Some(rc.n_phi),
            n_theta: rc.n_theta,
            r_max: rc.r_max,
            sphere_n_theta: Some(rc.sphere_n_theta),
            sphere_n_phi: Some(rc.sphere_n_phi),
            weight_tol: Some(rc.weight_tol),
            workers: Some(rc.workers),
            out_dir: Some(rc.out_dir),
        }
    }
}

/// Shortest round-trip decimal.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Output {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    w.write_all(contents.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| Error::Output {
            path: path.to_path_buf(),
            source,
        })
}

pub const EXPECTATIONS_HEADER: &str = "t,t_over_Tls,sx,sy,sz,lx,ly,lz,jx,jy,jz,norm";
pub const DENSITY_HEADER: &str = "r,phi,d_up,d_down,d_total";
pub const MAXIMA_HEADER: &str = "t,t_over_Tls,component,theta_star,phi_star,value";

/// Writes `expectations.csv`; returns its path.
pub fn cmd_expectations(cfg: &RunConfig) -> Result<PathBuf> {
    let params = cfg.params()?;
    let packet = build_packet(&params, cfg.spin()?)?;
    let times = cfg.times(&params);
    prepare_out_dir(&cfg.out_dir)?;
    let s = with_workers(cfg.workers, || series(&packet, &times, &params))??;
    let mut out = String::with_capacity(64 * (s.len() + 1));
    out.push_str(EXPECTATIONS_HEADER);
    out.push('\n');
    for r in &s.rows {
        let cols = [
            r.t,
            r.t_over_tls,
            r.s.x,
            r.s.y,
            r.s.z,
            r.l.x,
            r.l.y,
            r.l.z,
            r.j.x,
            r.j.y,
            r.j.z,
            r.norm,
        ];
        let line: Vec<String> = cols.iter().map(|&x| num(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    let path = cfg.out_dir.join("expectations.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// Contents of `manifest.json` written by the density mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityManifest {
    pub config: RunConfig,
    pub kappa: f64,
    pub omega0: f64,
    pub omega_ls: f64,
    pub t_ls: f64,
    pub r_cl: f64,
    pub l_max: u32,
    pub n_theta: usize,
    pub r_max: f64,
    pub snapshot_times: Vec<f64>,
    pub snapshot_times_over_tls: Vec<f64>,
    pub files: Vec<String>,
}

/// Writes `density_NNN.csv` per snapshot and `manifest.json`.
pub fn cmd_density(cfg: &RunConfig) -> Result<DensityManifest> {
    let params = cfg.params()?;
    let packet = build_packet(&params, cfg.spin()?)?;
    let times = cfg.times(&params);
    let grid = cfg.density_grid();
    prepare_out_dir(&cfg.out_dir)?;
    let fields = with_workers(cfg.workers, || {
        density_snapshots(&packet, &times, &params, &grid)
    })??;
    let mut files = Vec::with_capacity(fields.len());
    for (k, f) in fields.iter().enumerate() {
        let mut out = String::with_capacity(80 * f.n_r() * f.n_phi());
        out.push_str(DENSITY_HEADER);
        out.push('\n');
        for (i, &r) in f.r_grid.iter().enumerate() {
            for (j, &phi) in f.phi_grid.iter().enumerate() {
                let (u, d) = (f.up(i, j), f.down(i, j));
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    num(r),
                    num(phi),
                    num(u),
                    num(d),
                    num(u + d)
                );
            }
        }
        let name = format!("density_{k:03}.csv");
        write_file(&cfg.out_dir.join(&name), &out)?;
        files.push(name);
    }
    let t_ls = params.t_ls();
    let manifest = DensityManifest {
        config: cfg.clone(),
        kappa: params.kappa,
        omega0: params.omega0,
        omega_ls: params.omega_ls(),
        t_ls,
        r_cl: classical_orbit_radius(params.n_mean)?,
        l_max: params.l_max,
        n_theta: grid.n_theta_for(&params),
        r_max: grid.r_max_for(&params),
        snapshot_times_over_tls: times.iter().map(|t| t / t_ls).collect(),
        snapshot_times: times,
        files,
    };
    write_file(
        &cfg.out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Writes `maxima.csv`; rows are time-ordered, Up before Down at equal times.
pub fn cmd_maxima(cfg: &RunConfig, component: ComponentArg) -> Result<PathBuf> {
    let params = cfg.params()?;
    let packet = build_packet(&params, cfg.spin()?)?;
    let times = cfg.times(&params);
    let grid = SphereGrid {
        n_theta: cfg.sphere_n_theta,
        n_phi: cfg.sphere_n_phi,
    };
    prepare_out_dir(&cfg.out_dir)?;
    let mut rows = Vec::new();
    for &spin in component.spins() {
        let track = with_workers(cfg.workers, || {
            maxima_track(&packet, &times, spin, &params, grid)
        })??;
        rows.extend(track.rows);
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.component.cmp(&b.component)));
    let mut out = String::new();
    out.push_str(MAXIMA_HEADER);
    out.push('\n');
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.t),
            num(r.t_over_tls),
            r.component.label(),
            num(r.theta_star),
            num(r.phi_star),
            num(r.value)
        );
    }
    let path = cfg.out_dir.join("maxima.csv");
    write_file(&path, &out)?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Runs the oracle suite and writes `report.json`.
pub fn cmd_check(cfg: &RunConfig, opts: &CheckOptions) -> Result<CheckReport> {
    prepare_out_dir(&cfg.out_dir)?;
    let checks = run_checks(opts)?;
    let report = CheckReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    write_file(
        &cfg.out_dir.join("report.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

/// Executes a parsed command line and returns the process exit code:
/// 0 on success, 1 when oracle checks fail, 2 on configuration or output
/// errors.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Expectations(args) => {
            let cfg = RunConfig::resolve(args, Mode::Expectations)?;
            let path = cmd_expectations(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Density(args) => {
            let cfg = RunConfig::resolve(args, Mode::Density)?;
            let m = cmd_density(&cfg)?;
            println!(
                "wrote {} snapshots and manifest.json to {}",
                m.files.len(),
                cfg.out_dir.display()
            );
        }
        Command::Maxima { config, component } => {
            let cfg = RunConfig::resolve(config, Mode::Maxima)?;
            let path = cmd_maxima(&cfg, component)?;
            println!("wrote {}", path.display());
        }
        Command::Check {
            config,
            corrupt_kappa_sign,
        } => {
            let cfg = RunConfig::resolve(config, Mode::Check)?;
            let report = cmd_check(&cfg, &CheckOptions { corrupt_kappa_sign })?;
            for c in &report.checks {
                println!(
                    "{} {:<34} measured {:.3e} threshold {:.1e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.threshold
                );
            }
            if !report.passed {
                return Ok(1);
            }
        }
    }
    Ok(0)
}
