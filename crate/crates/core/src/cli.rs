//! The `bounce` command-line front end.
//!
//! A run is described by an optional JSON config (`--config`) whose keys are
//! the long flag names with `_` for `-`; flags given on the command line win.
//! The forcing is either a constant `p0` or a trigonometric polynomial
//! `{"c0": r, "harmonics": [{"k": int, "a": r, "b": r}]}`, inline in the config
//! or in a file passed with `--forcing`.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage, 3 guard or domain
//! violation, 4 nothing found, 5 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::finder::{
    admissible_floor, default_search_box, find_orbits, minimal_m, verify_orbit, FinderOptions,
    OrbitRecord,
};
use crate::integrator::dop853::Tolerances;
use crate::integrator::{
    write_collisions_jsonl, write_trajectory_csv, Forcing, ForcingSpec, IntegratorOptions,
    Oscillator, Sampling,
};
use crate::io::fmt_f64;
use crate::period::{period_scan_with, write_period_csv, PeriodOptions};
use crate::potential::PowerLawPotential;
use crate::successor::{
    jacobian, linspace_open, logspace, successor_iterate, twist_profile, write_grid_csv,
    SectionPoint,
};
use crate::suites::{default_suites, run_suite, SUITES};

#[derive(Debug, Parser)]
#[command(
    name = "bounce",
    version,
    about = "Bouncing solutions of u'' - u^(-a) = p(t)"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Singularity exponent, 0 < alpha < 1.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Constant forcing p(t) = p0 < 0.
    #[arg(
        long,
        global = true,
        allow_negative_numbers = true,
        conflicts_with = "forcing"
    )]
    pub p0: Option<f64>,
    /// Forcing JSON file.
    #[arg(long, global = true)]
    pub forcing: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Quadrature tolerance for `period`, relative integration tolerance otherwise.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extended period function of the autonomous problem (constant forcing).
    Period(PeriodArgs),
    /// Bouncing trajectory with its collision log.
    Simulate(SimulateArgs),
    /// Section map: one orbit of S^n, or a grid of S^n with its twist.
    Successor(SuccessorArgs),
    /// 2m pi-periodic bouncing solutions with n impacts per period.
    Find(FindArgs),
    /// Property suites on the reference configurations.
    Verify(VerifyArgs),
}

#[derive(Debug, Default, Args)]
pub struct PeriodArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub h_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub h_max: Option<f64>,
    /// Number of energies, endpoints included.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// Initial position; 0 launches from a collision with speed v0.
    #[arg(long)]
    pub u0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Sampling interval of the exported trajectory.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Collision log path (JSON lines); defaults next to `--out`.
    #[arg(long)]
    pub collisions: Option<PathBuf>,
    /// Handoff threshold of the collision regularization.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct SuccessorArgs {
    /// Number of bounces per map application.
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Winding subtracted in the `delta` column.
    #[arg(short, long)]
    pub m: Option<u32>,
    /// Start of a single orbit (with `--v0`) instead of a grid.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long)]
    pub v_min: Option<f64>,
    #[arg(long)]
    pub v_max: Option<f64>,
    #[arg(long)]
    pub v_steps: Option<usize>,
    /// Also compute det J of S^n in (t, v^2/2) per grid cell.
    #[arg(long)]
    pub jacobian: bool,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct FindArgs {
    /// Periods of the forcing per orbit; smallest admissible when absent.
    #[arg(short, long)]
    pub m: Option<u32>,
    /// Impacts per period.
    #[arg(short, long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub v_min: Option<f64>,
    #[arg(long)]
    pub v_max: Option<f64>,
    /// Seed grid size along t0.
    #[arg(long)]
    pub grid_t: Option<usize>,
    /// Seed grid size along v0.
    #[arg(long)]
    pub grid_v: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct VerifyArgs {
    /// Suites to run (repeatable or comma separated); `all` adds `c1`.
    #[arg(long = "suite", value_delimiter = ',')]
    pub suites: Vec<String>,
}

/// Config document; every key is optional and flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub p0: Option<f64>,
    pub forcing: Option<ForcingSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub delta: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub steps: Option<usize>,
    pub t0: Option<f64>,
    pub u0: Option<f64>,
    pub v0: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub collisions: Option<PathBuf>,
    pub n: Option<usize>,
    pub m: Option<u32>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub v_steps: Option<usize>,
    pub jacobian: Option<bool>,
    pub grid_t: Option<usize>,
    pub grid_v: Option<usize>,
    pub suites: Option<Vec<String>>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("config {}: {e}", path.display())))
    }

    /// `self` over `base`. The forcing is taken as a unit: a `p0` or `forcing`
    /// in `self` replaces both entries of `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        let mut base = base;
        if self.p0.is_some() || self.forcing.is_some() {
            base.p0 = None;
            base.forcing = None;
        }
        overlay!(self, base; alpha, p0, forcing, out, format, tol, delta, h_min, h_max, steps,
            t0, u0, v0, t_end, dt, collisions, n, m, t_min, t_max, t_steps, v_min, v_max,
            v_steps, jacobian, grid_t, grid_v, suites)
    }

    fn alpha(&self) -> Result<f64> {
        self.alpha
            .ok_or_else(|| Error::InvalidParameter("--alpha is required".into()))
    }

    fn forcing(&self) -> Result<Forcing> {
        match (self.p0, &self.forcing) {
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "give either p0 or forcing, not both".into(),
            )),
            (Some(p0), None) => Forcing::constant(p0),
            (None, Some(spec)) => Forcing::from_spec(spec),
            (None, None) => Err(Error::InvalidParameter(
                "--p0 or --forcing is required".into(),
            )),
        }
    }

    fn tol(&self) -> Result<Option<f64>> {
        match self.tol {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(Error::InvalidParameter(format!(
                "tolerance {t} must be positive"
            ))),
            t => Ok(t),
        }
    }

    fn oscillator(&self) -> Result<Oscillator> {
        let mut opts = IntegratorOptions {
            delta: self.delta,
            ..IntegratorOptions::default()
        };
        if let Some(rtol) = self.tol()? {
            opts.tol = Tolerances {
                rtol,
                atol: 1e-2 * rtol,
            };
        }
        Oscillator::with_options(self.alpha()?, self.forcing()?, opts)
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required")))
}

fn positive(value: usize, flag: &str) -> Result<usize> {
    if value == 0 {
        return Err(Error::InvalidParameter(format!(
            "--{flag} must be at least 1"
        )));
    }
    Ok(value)
}

impl Cli {
    /// The flags as a config layer.
    fn flags(&self) -> Result<RunConfig> {
        let g = &self.global;
        let forcing = match &g.forcing {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Input(format!("cannot read forcing {}: {e}", path.display()))
                })?;
                Some(
                    serde_json::from_str::<ForcingSpec>(&text)
                        .map_err(|e| Error::Input(format!("forcing {}: {e}", path.display())))?,
                )
            }
            None => None,
        };
        let mut cfg = RunConfig {
            alpha: g.alpha,
            p0: g.p0,
            forcing,
            out: g.out.clone(),
            format: g.format,
            tol: g.tol,
            ..RunConfig::default()
        };
        match &self.command {
            Command::Period(a) => {
                cfg.h_min = a.h_min;
                cfg.h_max = a.h_max;
                cfg.steps = a.steps;
            }
            Command::Simulate(a) => {
                cfg.t0 = a.t0;
                cfg.u0 = a.u0;
                cfg.v0 = a.v0;
                cfg.t_end = a.t_end;
                cfg.dt = a.dt;
                cfg.collisions = a.collisions.clone();
                cfg.delta = a.delta;
            }
            Command::Successor(a) => {
                cfg.n = a.n;
                cfg.m = a.m;
                cfg.t0 = a.t0;
                cfg.v0 = a.v0;
                cfg.t_min = a.t_min;
                cfg.t_max = a.t_max;
                cfg.t_steps = a.t_steps;
                cfg.v_min = a.v_min;
                cfg.v_max = a.v_max;
                cfg.v_steps = a.v_steps;
                cfg.jacobian = a.jacobian.then_some(true);
                cfg.delta = a.delta;
            }
            Command::Find(a) => {
                cfg.m = a.m;
                cfg.n = a.n;
                cfg.t_min = a.t_min;
                cfg.t_max = a.t_max;
                cfg.v_min = a.v_min;
                cfg.v_max = a.v_max;
                cfg.grid_t = a.grid_t;
                cfg.grid_v = a.grid_v;
                cfg.delta = a.delta;
            }
            Command::Verify(a) => {
                cfg.suites = (!a.suites.is_empty()).then(|| a.suites.clone());
            }
        }
        Ok(cfg)
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Some verification check failed.
    ChecksFailed,
}

pub fn run(cli: &Cli) -> Result<Status> {
    let base = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = cli.flags()?.over(base);
    let mut out = open_output(cfg.out.as_deref())?;
    let status = match cli.command {
        Command::Period(_) => cmd_period(&cfg, &mut out),
        Command::Simulate(_) => cmd_simulate(&cfg, &mut out),
        Command::Successor(_) => cmd_successor(&cfg, &mut out),
        Command::Find(_) => cmd_find(&cfg, &mut out),
        Command::Verify(_) => cmd_verify(&cfg, &mut out),
    }?;
    out.flush().map_err(write_error)?;
    Ok(status)
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    match run(&cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write_error(e: io::Error) -> Error {
    Error::Input(format!("cannot write output: {e}"))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Input(format!("cannot create {}: {e}", path.display())))
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| Error::Input(format!("cannot write output: {e}")))?;
    writeln!(out).map_err(write_error)
}

fn cmd_period(cfg: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let forcing = cfg.forcing()?;
    if !forcing.is_constant() {
        return Err(Error::InvalidParameter(
            "period needs a constant forcing".into(),
        ));
    }
    let potential = PowerLawPotential::new(cfg.alpha()?, forcing.mean())?;
    let (h_min, h_max) = (required(cfg.h_min, "h-min")?, required(cfg.h_max, "h-max")?);
    if !(h_min < h_max) {
        return Err(Error::InvalidParameter(format!(
            "empty energy range [{h_min}, {h_max}]"
        )));
    }
    let steps = cfg.steps.unwrap_or(100);
    if steps < 2 {
        return Err(Error::InvalidParameter("--steps must be at least 2".into()));
    }
    let grid: Vec<f64> = (0..steps)
        .map(|i| h_min + (h_max - h_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let mut opts = PeriodOptions::default();
    if let Some(tol) = cfg.tol()? {
        opts.tol = tol;
    }
    let samples = period_scan_with(&potential, &grid, &opts)?;
    match cfg.format(Format::Csv) {
        Format::Csv => write_period_csv(out, &samples).map_err(write_error)?,
        Format::Json => write_json(out, &samples)?,
    }
    Ok(Status::Success)
}

fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let osc = cfg.oscillator()?;
    let t0 = cfg.t0.unwrap_or(0.0);
    let (u0, v0) = (required(cfg.u0, "u0")?, required(cfg.v0, "v0")?);
    let t_end = required(cfg.t_end, "t-end")?;
    let dt = cfg.dt.unwrap_or(0.01);
    if !(t_end > t0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t-end > t0 and dt > 0 (t0 = {t0}, t-end = {t_end}, dt = {dt})"
        )));
    }
    let traj = osc.simulate(t0, u0, v0, t_end, Sampling::Grid { origin: t0, dt })?;
    match cfg.format(Format::Csv) {
        Format::Csv => {
            write_trajectory_csv(&traj, &mut *out).map_err(write_error)?;
            let log = cfg.collisions.clone().or_else(|| {
                cfg.out
                    .as_ref()
                    .map(|p| p.with_extension("collisions.jsonl"))
            });
            if let Some(path) = log {
                let mut file = BufWriter::new(create(&path)?);
                write_collisions_jsonl(&traj, &mut file).map_err(write_error)?;
                file.flush().map_err(write_error)?;
            }
        }
        Format::Json => {
            let samples: Vec<_> = traj
                .segments
                .iter()
                .enumerate()
                .flat_map(|(id, seg)| {
                    seg.iter()
                        .map(move |s| json!({"t": s.t, "u": s.u, "v": s.v, "segment_id": id}))
                })
                .collect();
            let doc = json!({
                "samples": samples,
                "collisions": traj.collisions,
                "regime_changes": traj.regime_changes,
            });
            write_json(out, &doc)?;
        }
    }
    eprintln!("{} collisions in [{t0}, {t_end}]", traj.collisions.len());
    Ok(Status::Success)
}

fn cmd_successor(cfg: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let osc = cfg.oscillator()?;
    let n = positive(cfg.n.unwrap_or(1), "n")?;
    if let (Some(t0), Some(v0)) = (cfg.t0, cfg.v0) {
        let points = successor_iterate(&osc, SectionPoint::new(t0, v0), n)?;
        match cfg.format(Format::Csv) {
            Format::Csv => {
                writeln!(out, "k,t,v").map_err(write_error)?;
                for (k, p) in points.iter().enumerate() {
                    writeln!(out, "{k},{},{}", fmt_f64(p.t), fmt_f64(p.v)).map_err(write_error)?;
                }
            }
            Format::Json => write_json(out, &points)?,
        }
        return Ok(Status::Success);
    }
    let floor = admissible_floor(&osc, n)?;
    let v_min = cfg.v_min.unwrap_or(floor);
    if !(v_min >= floor) {
        return Err(Error::Guard {
            v: v_min,
            gamma: floor,
        });
    }
    let v_max = cfg.v_max.unwrap_or(10.0 * floor.max(1.0));
    let (t_min, t_max) = (
        cfg.t_min.unwrap_or(0.0),
        cfg.t_max.unwrap_or(std::f64::consts::TAU),
    );
    if !(v_max > v_min) || !(t_max > t_min) {
        return Err(Error::InvalidParameter("empty successor grid".into()));
    }
    let t_grid = linspace_open(
        t_min,
        t_max,
        positive(cfg.t_steps.unwrap_or(32), "t-steps")?,
    );
    let v_grid = logspace(
        v_min,
        v_max,
        positive(cfg.v_steps.unwrap_or(32), "v-steps")?,
    );
    let profile = twist_profile(&osc, &t_grid, &v_grid, n, cfg.m.unwrap_or(1));
    let mut rows = profile.rows();
    if cfg.jacobian.unwrap_or(false) {
        let dets: Vec<Option<f64>> = rows
            .par_iter()
            .map(|r| {
                jacobian(&osc, SectionPoint::new(r.t0, r.v0), n, 1e-5)
                    .ok()
                    .map(|j| j.det)
            })
            .collect();
        for (r, d) in rows.iter_mut().zip(dets) {
            r.det = d;
        }
    }
    match cfg.format(Format::Csv) {
        Format::Csv => write_grid_csv(&rows, &mut *out).map_err(write_error)?,
        Format::Json => write_json(out, &rows)?,
    }
    Ok(Status::Success)
}

fn cmd_find(cfg: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let osc = cfg.oscillator()?;
    let n = positive(cfg.n.unwrap_or(1), "n")?;
    let m = match cfg.m {
        Some(0) => return Err(Error::InvalidParameter("--m must be at least 1".into())),
        Some(m) => m,
        None => minimal_m(&osc, n)?,
    };
    let custom = [cfg.t_min, cfg.t_max, cfg.v_min, cfg.v_max]
        .iter()
        .any(Option::is_some);
    let search = if custom {
        let mut b = default_search_box(&osc, m, n)?;
        b.t_min = cfg.t_min.unwrap_or(b.t_min);
        b.t_max = cfg.t_max.unwrap_or(b.t_max);
        b.v_min = cfg.v_min.unwrap_or(b.v_min);
        b.v_max = cfg.v_max.unwrap_or(b.v_max);
        Some(b)
    } else {
        None
    };
    let defaults = FinderOptions::default();
    let opts = FinderOptions {
        nt: positive(cfg.grid_t.unwrap_or(defaults.nt), "grid-t")?,
        nv: positive(cfg.grid_v.unwrap_or(defaults.nv), "grid-v")?,
        ..defaults
    };
    let outcome = find_orbits(&osc, m, n, search, &opts)?;
    let mut records: Vec<OrbitRecord> = Vec::new();
    for orbit in &outcome.orbits {
        let report = verify_orbit(&osc, orbit)?;
        if report.passed() {
            records.push(orbit.record());
        } else {
            eprintln!(
                "rejected orbit at (t0, v0) = ({}, {}): {}",
                orbit.section_point.t,
                orbit.section_point.v,
                report.failures.join("; ")
            );
        }
    }
    let b = outcome.search_box;
    eprintln!(
        "m = {m}, n = {n}: {} verified of {} converged from {} seeds in t0 in [{}, {}], v0 in [{}, {}]",
        records.len(),
        outcome.orbits.len(),
        outcome.seeds,
        b.t_min,
        b.t_max,
        b.v_min,
        b.v_max
    );
    if records.is_empty() {
        return Err(Error::NotFound(format!(
            "no verified ({m}, {n}) orbit ({} seeds, {} discarded)",
            outcome.seeds,
            outcome.discarded.len()
        )));
    }
    match cfg.format(Format::Json) {
        Format::Json => write_json(out, &records)?,
        Format::Csv => {
            writeln!(out, "m,n,t0,v0,residual").map_err(write_error)?;
            for r in &records {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.m,
                    r.n,
                    fmt_f64(r.t0),
                    fmt_f64(r.v0),
                    fmt_f64(r.residual)
                )
                .map_err(write_error)?;
            }
        }
    }
    Ok(Status::Success)
}

fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let names: Vec<String> = match &cfg.suites {
        Some(list) if list.iter().any(|s| s == "all") => {
            SUITES.iter().map(|s| s.to_string()).collect()
        }
        Some(list) => list.clone(),
        None => default_suites().iter().map(|s| s.to_string()).collect(),
    };
    for name in &names {
        if !SUITES.contains(&name.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "unknown suite '{name}' (expected one of {}, all)",
                SUITES.join(", ")
            )));
        }
    }
    let mut all_passed = true;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for name in &names {
        match run_suite(name) {
            Ok(report) => {
                let passed = report.passed();
                all_passed &= passed;
                eprintln!(
                    "{:<4} {name} ({:.2} s)",
                    if passed { "PASS" } else { "FAIL" },
                    report.seconds
                );
                for c in &report.checks {
                    rows.push(format!(
                        "{name},\"{}\",{},{},{},{}",
                        c.name.replace('"', "\"\""),
                        fmt_f64(c.value),
                        c.relation,
                        fmt_f64(c.limit),
                        c.pass
                    ));
                }
                let mut value = serde_json::to_value(&report)
                    .map_err(|e| Error::Numerical(format!("report serialization: {e}")))?;
                value["passed"] = json!(passed);
                reports.push(value);
            }
            Err(e) => {
                all_passed = false;
                eprintln!("FAIL {name}: {e}");
                rows.push(format!(
                    "{name},\"error: {}\",,,,false",
                    e.to_string().replace('"', "\"\"")
                ));
                reports.push(json!({"suite": name, "passed": false, "error": e.to_string()}));
            }
        }
    }
    match cfg.format(Format::Json) {
        Format::Json => write_json(out, &json!({"passed": all_passed, "suites": reports}))?,
        Format::Csv => {
            writeln!(out, "suite,check,value,relation,limit,pass").map_err(write_error)?;
            for r in rows {
                writeln!(out, "{r}").map_err(write_error)?;
            }
        }
    }
    Ok(if all_passed {
        Status::Success
    } else {
        Status::ChecksFailed
    })
}
