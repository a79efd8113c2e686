//! Command-line front end.
//!
//! Every subcommand resolves its flags into a [`RunConfig`], which can be
//! dumped with `--dump-config` and replayed with `run --config FILE`.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, 3 computation, 4 I/O.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    boundary_weight, com_periodicity_error, evolve, revival_error, EvolveConfig, Method, StateTrajectory,
};
use crate::engineering::{
    effective_hopping, laser_evolve, rwa_validate, solve_unidirectional, solve_unidirectional_scan, EffectiveHopping,
    KickConvention, LaserParams, LaserWindow, ModulationProtocol, UnidirectionalRoot,
};
use crate::error::{param, Error, ErrorKind, Result};
use crate::floquet::{monodromy, quasi_energies_analytic, DriveProfile, FluxDrive, QuasiEnergyReport};
use crate::lattice::{build_hamiltonian, hamiltonian_at, Geometry, LatticeSpec, StateVector, Window, C64};
use crate::spectral::{analyze_spectrum, ring_spectrum, AnalyzeOptions, SpectrumReport, DEFAULT_CLUSTER_TOL};

/// Parses `a`, `bi`, `a+bi` or `a-bi` (`j` is accepted for `i`).
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number '{s}'");
    if t.is_empty() {
        return Err(bad());
    }
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(C64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(x),
    };
    match split {
        Some(k) => Ok(C64::new(num(&body[..k])?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Site { site: i64 },
    Gaussian { center: f64, width: f64 },
}

impl InitialState {
    fn build(&self, spec: &LatticeSpec) -> Result<StateVector> {
        match *self {
            InitialState::Site { site } => StateVector::single_site(spec, site),
            InitialState::Gaussian { center, width } => StateVector::gaussian(spec, center, width),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum {
        lattice: LatticeSpec,
        cluster_tol: f64,
    },
    Evolve {
        lattice: LatticeSpec,
        initial: InitialState,
        evolve: EvolveConfig,
        flux_rate: Option<f64>,
    },
    Bloch {
        lattice: LatticeSpec,
        initial: InitialState,
        evolve: EvolveConfig,
    },
    Floquet {
        lattice: LatticeSpec,
        drive: FluxDrive,
        dt: f64,
        analytic: bool,
    },
    Engineer {
        theta: f64,
        x: f64,
        gamma: Option<C64>,
        gamma_guess: Option<C64>,
        kappa: f64,
        period: f64,
    },
    Rwa {
        protocol: ModulationProtocol,
        kappa: f64,
        ratios: Vec<f64>,
        sites: usize,
        start_site: i64,
        t_end: f64,
    },
    Laser {
        params: LaserParams,
        window: LaserWindow,
        initial: InitialState,
        evolve: EvolveConfig,
    },
    DumpH {
        lattice: LatticeSpec,
        time: f64,
        flux_rate: Option<f64>,
    },
}

/// Fully resolved invocation; round-trips through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub observables: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.command {
            Command::Spectrum { lattice, .. } | Command::DumpH { lattice, .. } => lattice.validate(),
            Command::Evolve { lattice, evolve, .. } | Command::Bloch { lattice, evolve, .. } => {
                lattice.validate()?;
                evolve.validate()
            }
            Command::Floquet { lattice, drive, .. } => {
                lattice.validate()?;
                drive.validate()
            }
            Command::Engineer { .. } => Ok(()),
            Command::Rwa { protocol, .. } => protocol.validate(),
            Command::Laser { params, evolve, .. } => {
                params.validate()?;
                evolve.validate()
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "unihop",
    version,
    about = "Non-Hermitian lattices with unidirectional hopping"
)]
struct Cli {
    /// Primary output file (stdout when omitted).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Observables CSV for trajectory commands.
    #[arg(long, global = true)]
    observables: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeometryArg {
    Chain,
    Ring,
    Infinite,
}

#[derive(Debug, Clone, Args)]
struct LatticeArgs {
    #[arg(long, value_enum, default_value = "chain")]
    geometry: GeometryArg,
    #[arg(long, default_value_t = 16)]
    sites: usize,
    #[arg(long, value_parser = parse_complex, default_value = "1", allow_hyphen_values = true)]
    kappa1: C64,
    #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
    kappa2: C64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    force: f64,
    /// Lower end of the infinite-chain window.
    #[arg(long, default_value_t = -64, allow_hyphen_values = true)]
    n_min: i64,
    /// Upper end of the infinite-chain window.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    n_max: i64,
}

impl LatticeArgs {
    fn spec(&self) -> LatticeSpec {
        match self.geometry {
            GeometryArg::Chain => LatticeSpec::chain(self.sites, self.kappa1, self.kappa2, self.force),
            GeometryArg::Ring => LatticeSpec::ring(self.sites, self.kappa1, self.kappa2).with_force(self.force),
            GeometryArg::Infinite => LatticeSpec::infinite(
                Window::new(self.n_min, self.n_max),
                self.kappa1,
                self.kappa2,
                self.force,
            ),
        }
    }
}

#[derive(Debug, Clone, Args)]
struct InitialArgs {
    /// Start from a single excited site (default: the highest site).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "gaussian_center")]
    site: Option<i64>,
    /// Start from a Gaussian centred here.
    #[arg(long, allow_hyphen_values = true, requires = "gaussian_width")]
    gaussian_center: Option<f64>,
    #[arg(long)]
    gaussian_width: Option<f64>,
}

impl InitialArgs {
    fn resolve(&self, top_site: i64) -> InitialState {
        match (self.gaussian_center, self.gaussian_width) {
            (Some(center), Some(width)) => InitialState::Gaussian { center, width },
            _ => InitialState::Site {
                site: self.site.unwrap_or(top_site),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    ClosedForm,
}

#[derive(Debug, Clone, Args)]
struct TimeArgs {
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    /// Renormalize every step (for growing or decaying dynamics).
    #[arg(long)]
    normalize: bool,
}

impl TimeArgs {
    fn config(&self, method: Method) -> EvolveConfig {
        EvolveConfig {
            t_end: self.t_end,
            dt: self.dt.min(self.t_end.max(f64::MIN_POSITIVE)),
            method,
            record_every: self.record_every,
            normalize: self.normalize,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Eigenvalues, clusters and Jordan structure of the static Hamiltonian.
    Spectrum {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Time evolution; writes the trajectory CSV (t, site, re, im).
    Evolve {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        initial: InitialArgs,
        #[command(flatten)]
        time: TimeArgs,
        #[arg(long, value_enum, default_value = "rk4")]
        method: MethodArg,
        /// Ring flux rate (Peierls phase exp(i rate t)).
        #[arg(long, allow_hyphen_values = true)]
        flux_rate: Option<f64>,
    },
    /// Bloch oscillations in a forced lattice over whole Bloch periods.
    Bloch {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        initial: InitialArgs,
        /// Reciprocal chain preset: 16 sites, F = -0.6, Gaussian w = 3 at 7.5.
        #[arg(long, conflicts_with = "fig2b")]
        fig2a: bool,
        /// Unidirectional chain preset with the same parameters.
        #[arg(long)]
        fig2b: bool,
        #[arg(long, default_value_t = 3)]
        periods: usize,
        /// Steps per Bloch period.
        #[arg(long, default_value_t = 10_000)]
        steps_per_period: usize,
        #[arg(long, default_value_t = 100)]
        record_every: usize,
    },
    /// Quasi-energies of the flux-threaded ring from the monodromy matrix.
    Floquet {
        #[arg(long, default_value_t = 8)]
        sites: usize,
        #[arg(long, value_parser = parse_complex, default_value = "1", allow_hyphen_values = true)]
        kappa1: C64,
        #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
        kappa2: C64,
        /// Flux rate dPhi/dt in flux quanta per unit time.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        phi0_rate: f64,
        /// Step size (default: Bloch period / 10^4).
        #[arg(long)]
        dt: Option<f64>,
        /// Also report the analytic quasi-energies.
        #[arg(long)]
        analytic: bool,
    },
    /// Averaged hopping of a modulation protocol and the root with sigma = 0.
    Engineer {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        x: f64,
        /// Evaluate the averaged hopping at this Gamma.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        gamma: Option<C64>,
        /// Newton starting point; a grid scan is used when omitted.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        gamma_guess: Option<C64>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
    },
    /// Exact modulated lattice versus the averaged model at several omega/kappa.
    Rwa {
        #[arg(long, default_value_t = PI / 2.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.8)]
        x: f64,
        /// Modulation area; the sigma = 0 root is used when omitted.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        gamma: Option<C64>,
        #[arg(long, value_parser = parse_complex, default_value = "3+0.7i", allow_hyphen_values = true)]
        gamma_guess: C64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        sites: usize,
        /// Excited site (default: the highest).
        #[arg(long)]
        start_site: Option<i64>,
        /// Comparison time (default 2 pi / kappa).
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, value_enum, default_value = "resetting")]
        kick: KickArg,
    },
    /// Mode-locked laser with amplitude and phase modulators.
    Laser {
        #[arg(long, default_value_t = 0.0)]
        g: f64,
        #[arg(long, default_value_t = 0.0)]
        l: f64,
        #[arg(long, default_value_t = 0.0)]
        dg: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        delta_am: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        delta_fm: f64,
        #[arg(long, default_value_t = -PI / 2.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        force: f64,
        #[arg(long, default_value_t = -32, allow_hyphen_values = true)]
        n_min: i64,
        #[arg(long, default_value_t = 31, allow_hyphen_values = true)]
        n_max: i64,
        #[arg(long, default_value_t = 1e-6)]
        edge_tol: f64,
        #[arg(long)]
        no_edge_check: bool,
        #[command(flatten)]
        initial: InitialArgs,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Hamiltonian matrix at time t as JSON or CSV.
    DumpH {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        time: f64,
        #[arg(long, allow_hyphen_values = true)]
        flux_rate: Option<f64>,
    },
    /// Replay a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KickArg {
    Resetting,
    Accumulating,
}

/// Bloch-oscillation preset: 16 sites (indices 0..=15), `F = -0.6`,
/// `kappa = 1`, Gaussian of width 3 centred at 7.5, three Bloch periods
/// with `T_B / 10^4` steps.
pub fn fig2_preset(unidirectional: bool) -> RunConfig {
    let kappa = C64::new(1.0, 0.0);
    let kappa2 = if unidirectional { C64::new(0.0, 0.0) } else { kappa };
    let force = -0.6_f64;
    let period = 2.0 * PI / force.abs();
    RunConfig {
        command: Command::Bloch {
            lattice: LatticeSpec::chain(16, kappa, kappa2, force),
            initial: InitialState::Gaussian {
                center: 7.5,
                width: 3.0,
            },
            evolve: EvolveConfig::rk4(3.0 * period, period / 1e4).recording_every(100),
        },
        output: None,
        observables: None,
        format: None,
    }
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let command = match cli.command {
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| Error::Parameter(format!("config {}: {e}", config.display())))?;
            cfg.output = cli.output.or(cfg.output);
            cfg.observables = cli.observables.or(cfg.observables);
            cfg.format = cli.format.or(cfg.format);
            return Ok(cfg);
        }
        Cmd::Spectrum { lattice, cluster_tol } => Command::Spectrum {
            lattice: lattice.spec(),
            cluster_tol,
        },
        Cmd::Evolve {
            lattice,
            initial,
            time,
            method,
            flux_rate,
        } => {
            let spec = lattice.spec();
            let method = match method {
                MethodArg::Rk4 => Method::Rk4,
                MethodArg::ClosedForm => Method::ClosedForm,
            };
            Command::Evolve {
                initial: initial.resolve(spec.offset() + spec.dim() as i64 - 1),
                lattice: spec,
                evolve: time.config(method),
                flux_rate,
            }
        }
        Cmd::Bloch {
            lattice,
            initial,
            fig2a,
            fig2b,
            periods,
            steps_per_period,
            record_every,
        } => {
            if fig2a || fig2b {
                fig2_preset(fig2b).command
            } else {
                let spec = lattice.spec();
                if spec.force == 0.0 {
                    return param("bloch needs a non-zero --force");
                }
                if steps_per_period == 0 || periods == 0 {
                    return param("periods and steps per period must be positive");
                }
                let period = 2.0 * PI / spec.force.abs();
                Command::Bloch {
                    initial: initial.resolve(spec.offset() + spec.dim() as i64 - 1),
                    lattice: spec,
                    evolve: EvolveConfig::rk4(periods as f64 * period, period / steps_per_period as f64)
                        .recording_every(record_every),
                }
            }
        }
        Cmd::Floquet {
            sites,
            kappa1,
            kappa2,
            phi0_rate,
            dt,
            analytic,
        } => {
            let drive = FluxDrive::new(phi0_rate, sites)?;
            Command::Floquet {
                lattice: LatticeSpec::ring(sites, kappa1, kappa2),
                dt: dt.unwrap_or(drive.period() / 1e4),
                drive,
                analytic,
            }
        }
        Cmd::Engineer {
            theta,
            x,
            gamma,
            gamma_guess,
            kappa,
            period,
        } => Command::Engineer {
            theta,
            x,
            gamma,
            gamma_guess,
            kappa,
            period,
        },
        Cmd::Rwa {
            theta,
            x,
            gamma,
            gamma_guess,
            kappa,
            ratios,
            sites,
            start_site,
            t_end,
            kick,
        } => {
            let gamma = match gamma {
                Some(g) => g,
                None => solve_unidirectional(theta, x, gamma_guess)?.gamma,
            };
            let kick = match kick {
                KickArg::Resetting => KickConvention::Resetting,
                KickArg::Accumulating => KickConvention::Accumulating,
            };
            Command::Rwa {
                protocol: ModulationProtocol::from_dimensionless(theta, x, gamma, 1.0)?.with_kick(kick),
                kappa,
                ratios,
                sites,
                start_site: start_site.unwrap_or(sites as i64 - 1),
                t_end: t_end.unwrap_or(2.0 * PI / if kappa == 0.0 { 1.0 } else { kappa.abs() }),
            }
        }
        Cmd::Laser {
            g,
            l,
            dg,
            delta_am,
            delta_fm,
            phi,
            force,
            n_min,
            n_max,
            edge_tol,
            no_edge_check,
            initial,
            time,
        } => Command::Laser {
            params: LaserParams {
                g,
                l,
                dg,
                delta_am,
                delta_fm,
                phi,
                force,
            },
            window: LaserWindow {
                modes: Window::new(n_min, n_max),
                edge_tolerance: (!no_edge_check).then_some(edge_tol),
            },
            initial: initial.resolve(0),
            evolve: time.config(Method::Rk4),
        },
        Cmd::DumpH {
            lattice,
            time,
            flux_rate,
        } => Command::DumpH {
            lattice: lattice.spec(),
            time,
            flux_rate,
        },
    };
    Ok(RunConfig {
        command,
        output: cli.output,
        observables: cli.observables,
        format: cli.format,
    })
}

/// Opens `path` for writing, or stdout.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_complex_csv(path: Option<&Path>, header: [&str; 3], rows: &[(usize, C64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    w.write_record(header)?;
    for (k, z) in rows {
        w.serialize((k, z.re, z.im))?;
    }
    w.flush()?;
    Ok(())
}

fn observables_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.observables.clone().or_else(|| {
        cfg.output.as_ref().map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            p.with_file_name(format!("{stem}_observables.csv"))
        })
    })
}

fn write_trajectory(cfg: &RunConfig, traj: &StateTrajectory) -> Result<()> {
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(cfg.output.as_deref(), traj)?,
        Format::Csv => {
            let mut w = sink(cfg.output.as_deref())?;
            traj.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    if let Some(p) = observables_path(cfg) {
        traj.write_observables_csv(BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn warn_window(spec: &LatticeSpec, traj: &StateTrajectory) {
    if spec.geometry != Geometry::InfiniteChain {
        return;
    }
    let reached = traj.states.iter().any(|s| {
        let total = s.norm_sqr();
        total > 0.0 && s.amps[0].norm_sqr() > 1e-12 * total
    });
    if reached {
        eprintln!(
            "warning: amplitude reached the window edge n_min = {}; enlarge the window",
            spec.window.n_min
        );
    }
}

#[derive(Serialize)]
struct EngineerReport {
    theta: f64,
    x: f64,
    kappa: f64,
    /// Averaged hopping at the requested Gamma.
    at_gamma: Option<(C64, EffectiveHopping)>,
    root: UnidirectionalRoot,
    /// Averaged hopping at the root, times kappa.
    at_root: EffectiveHopping,
}

#[derive(Serialize)]
struct FloquetOutput {
    numerical: QuasiEnergyReport,
    analytic: Option<QuasiEnergyReport>,
}

/// Runs a resolved configuration and returns the one-line summary.
pub fn execute(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let out = cfg.output.as_deref();
    match &cfg.command {
        Command::Spectrum { lattice, cluster_tol } => {
            let h = build_hamiltonian(lattice)?;
            let mut report: SpectrumReport = analyze_spectrum(
                &h,
                AnalyzeOptions {
                    cluster_tol: *cluster_tol,
                    ..AnalyzeOptions::default()
                },
            )?;
            if lattice.geometry == Geometry::Ring && lattice.force == 0.0 {
                let ring = ring_spectrum(lattice)?;
                report.dense_check = ring.dense_check;
            }
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => write_json(out, &report)?,
                Format::Csv => {
                    let rows: Vec<_> = report.eigenvalues.iter().copied().enumerate().collect();
                    write_complex_csv(out, ["index", "re", "im"], &rows)?;
                }
            }
            let max_order = report.clusters.iter().map(|c| c.ep_order).max().unwrap_or(1);
            Ok(format!(
                "spectrum: {} eigenvalues, {} clusters, max EP order {}, max |Im E| = {:.3e}{}",
                report.eigenvalues.len(),
                report.clusters.len(),
                max_order,
                report.max_imag(),
                if report.rank_ambiguous {
                    " (rank decision ambiguous)"
                } else {
                    ""
                }
            ))
        }
        Command::Evolve {
            lattice,
            initial,
            evolve: ecfg,
            flux_rate,
        } => {
            let c0 = initial.build(lattice)?;
            let traj = evolve(lattice, &c0, ecfg, *flux_rate)?;
            warn_window(lattice, &traj);
            write_trajectory(cfg, &traj)?;
            let last = traj.observables.last().expect("non-empty trajectory");
            Ok(format!(
                "evolve: {} records to t = {}, final <n> = {:.6}, weight = {:.6e}",
                traj.len(),
                traj.times.last().copied().unwrap_or(0.0),
                last.center_of_mass,
                last.total_weight
            ))
        }
        Command::Bloch {
            lattice,
            initial,
            evolve: ecfg,
        } => {
            let c0 = initial.build(lattice)?;
            let traj = evolve(lattice, &c0, ecfg, None)?;
            warn_window(lattice, &traj);
            write_trajectory(cfg, &traj)?;
            let period = 2.0 * PI / lattice.force.abs();
            Ok(format!(
                "bloch: T_B = {period:.6}, revival_error = {:.3e}, com periodicity error = {:.3e}",
                revival_error(&traj, period)?,
                com_periodicity_error(&traj, period)?
            ))
        }
        Command::Floquet {
            lattice,
            drive,
            dt,
            analytic,
        } => {
            let numerical = monodromy(lattice, drive, *dt)?;
            let analytic = if *analytic {
                Some(quasi_energies_analytic(lattice.kappa1, drive, DriveProfile::Peierls)?)
            } else {
                None
            };
            let max_mu = numerical.mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
            let defect = numerical.monodromy_defect.unwrap_or(f64::NAN);
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => write_json(out, &FloquetOutput { numerical, analytic })?,
                Format::Csv => {
                    let rows: Vec<_> = numerical.mu.iter().copied().enumerate().collect();
                    write_complex_csv(out, ["index", "re", "im"], &rows)?;
                }
            }
            Ok(format!(
                "floquet: monodromy_defect = {defect:.3e}, max |mu| = {max_mu:.3e}"
            ))
        }
        Command::Engineer {
            theta,
            x,
            gamma,
            gamma_guess,
            kappa,
            period,
        } => {
            if cfg.format == Some(Format::Csv) {
                return param("engineer writes JSON only");
            }
            let at_gamma = match gamma {
                Some(g) => {
                    let p = ModulationProtocol::from_dimensionless(*theta, *x, *g, *period)?;
                    Some((*g, effective_hopping(&p, *kappa)?))
                }
                None => None,
            };
            let root = match gamma_guess {
                Some(g) => solve_unidirectional(*theta, *x, *g)?,
                None => solve_unidirectional_scan(*theta, *x, (0.5, 6.0), (-2.0, 2.0))?,
            };
            let p = ModulationProtocol::from_dimensionless(*theta, *x, root.gamma, *period)?;
            let at_root = effective_hopping(&p, *kappa)?;
            write_json(
                out,
                &EngineerReport {
                    theta: *theta,
                    x: *x,
                    kappa: *kappa,
                    at_gamma,
                    root,
                    at_root,
                },
            )?;
            Ok(format!(
                "engineer: Gamma* = {:.10}{:+.10}i, rho = {:.6}{:+.6}i, |sigma| = {:.3e}",
                root.gamma.re, root.gamma.im, at_root.rho.re, at_root.rho.im, root.sigma_residual
            ))
        }
        Command::Rwa {
            protocol,
            kappa,
            ratios,
            sites,
            start_site,
            t_end,
        } => {
            let spec = LatticeSpec::chain(*sites, C64::new(*kappa, 0.0), C64::new(*kappa, 0.0), 0.0);
            let c0 = StateVector::single_site(&spec, *start_site)?;
            let rows = rwa_validate(protocol, *kappa, ratios, *sites, &c0, *t_end)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Json => write_json(out, &rows)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(sink(out)?);
                    w.write_record(["ratio", "period", "periods", "discrepancy"])?;
                    for r in &rows {
                        w.serialize((r.ratio, r.period, r.periods, r.discrepancy))?;
                    }
                    w.flush()?;
                }
            }
            let listing: Vec<String> = rows
                .iter()
                .map(|r| format!("{}:{:.3e}", r.ratio, r.discrepancy))
                .collect();
            Ok(format!("rwa: discrepancy by omega/kappa {}", listing.join(" ")))
        }
        Command::Laser {
            params,
            window,
            initial,
            evolve: ecfg,
        } => {
            let basis = LatticeSpec::infinite(window.modes, C64::new(1.0, 0.0), C64::new(0.0, 0.0), 0.0);
            let c0 = initial.build(&basis)?;
            let traj = laser_evolve(params, window, &c0, ecfg)?;
            write_trajectory(cfg, &traj)?;
            let edge = traj.states.iter().map(|s| boundary_weight(s, 1)).fold(0.0, f64::max);
            let last = traj.observables.last().expect("non-empty trajectory");
            Ok(format!(
                "laser: {} records, final <n> = {:.6}, weight = {:.6e}, max edge weight = {edge:.3e}",
                traj.len(),
                last.center_of_mass,
                last.total_weight
            ))
        }
        Command::DumpH {
            lattice,
            time,
            flux_rate,
        } => {
            let h = hamiltonian_at(lattice, *time, *flux_rate)?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => write_json(out, &h)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(sink(out)?);
                    w.write_record(["row", "col", "re", "im"])?;
                    for i in 0..h.dim() {
                        for j in 0..h.dim() {
                            let z = h.matrix[(i, j)];
                            w.serialize((i, j, z.re, z.im))?;
                        }
                    }
                    w.flush()?;
                }
            }
            Ok(format!("dump-h: {0}x{0} matrix, offset {1}", h.dim(), h.offset))
        }
    }
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Validation => 2,
        ErrorKind::Computation => 3,
        ErrorKind::Io => 4,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let dump = cli.dump_config;
    let outcome = resolve(cli).and_then(|cfg| {
        cfg.validate()?;
        if dump {
            let mut w = io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, &cfg)?;
            writeln!(w)?;
            return Ok(None);
        }
        execute(&cfg).map(|s| Some((s, cfg.output.is_some())))
    });
    match outcome {
        Ok(Some((summary, to_file))) => {
            if to_file {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            0
        }
        Ok(None) => 0,
        Err(e) => {
            let category = match e.kind() {
                ErrorKind::Validation => "validation",
                ErrorKind::Computation => "computation",
                ErrorKind::Io => "io",
            };
            eprintln!("error [{category}]: {e}");
            exit_code(e.kind())
        }
    }
}
