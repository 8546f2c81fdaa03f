//! JSON run configuration and the drivers behind the `fracwave` binary.
//!
//! A run is described by one JSON document; unknown keys are rejected. File
//! paths inside the document are resolved relative to its directory. Exit
//! codes: 0 when the study ran (whatever its verdict), 2 for configuration
//! and input errors, 3 when the solver blew up.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::duhamel::{duhamel_equivalence, SourceTerm};
use crate::error::{Error, Result};
use crate::experiments::energy::{energy_audit, EnergyMonitor};
use crate::experiments::suite::RandomRun;
use crate::experiments::{
    coherence_study, moderateness_sweep, negligibility_sweep, DataNet, RunSetup, Verdict,
};
use crate::fracops::FracOrder;
use crate::grid::{Field, Grid};
use crate::io;
use crate::mollify::{
    coefficient_net, make_mollifier, mollifying_net_at, CoefficientNet, CoefficientSpec, Mollifier,
    Perturbation, PerturbationLaw,
};
use crate::propagate::{evolve, step_count, Scheme, SolverState, StepperConfig, DEFAULT_STRIDE};

pub const ENERGY_CSV: &str = "energy.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const COHERENCE_CSV: &str = "coherence.csv";
pub const VERDICT_JSON: &str = "verdict.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Output directory used when neither the config nor `--out` names one.
pub const DEFAULT_OUTPUT: &str = "fracwave-out";

/// Smallest eps list accepted by the sweeps (the growth fit needs four points).
pub const MIN_SWEEP_POINTS: usize = 4;

#[derive(Parser, Debug)]
#[command(
    name = "fracwave",
    version,
    about = "Spectral solver and experiment harness for the fractional telegraph equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve one problem, audit its energy and write snapshots.
    Solve(RunArgs),
    /// Fit growth exponents of a regularized solution net.
    SweepModerateness(RunArgs),
    /// Compare a solution net with a negligibly perturbed one.
    SweepNegligibility(RunArgs),
    /// Measure convergence to the classical solution for smooth coefficients.
    Coherence(RunArgs),
    /// Cross-check the Duhamel superposition against direct stepping.
    DuhamelCheck(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// The studies a config can drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    Solve,
    SweepModerateness,
    SweepNegligibility,
    Coherence,
    DuhamelCheck,
}

impl Command {
    pub fn split(&self) -> (Study, &RunArgs) {
        match self {
            Command::Solve(a) => (Study::Solve, a),
            Command::SweepModerateness(a) => (Study::SweepModerateness, a),
            Command::SweepNegligibility(a) => (Study::SweepNegligibility, a),
            Command::Coherence(a) => (Study::Coherence, a),
            Command::DuhamelCheck(a) => (Study::DuhamelCheck, a),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub s: f64,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub coefficients: CoefficientsSpec,
    #[serde(default)]
    pub data: DataSpec,
    /// Regularization parameter for single runs with singular coefficients.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_stride")]
    pub observer_stride: usize,
    /// Steps between snapshots; by default only the first and last state.
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub duhamel: Option<DuhamelSpec>,
    #[serde(skip)]
    base: PathBuf,
}

fn default_stride() -> usize {
    DEFAULT_STRIDE
}

fn default_seed() -> u64 {
    crate::experiments::suite::DEFAULT_SEED
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    pub l: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    #[default]
    StrangSplit,
    Leapfrog,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSpec {
    #[serde(default)]
    pub a: CoefficientEntry,
    #[serde(default)]
    pub b: CoefficientEntry,
    /// Additive perturbation used by the negligibility sweep.
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientEntry {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `strength * psi_eps(x - center)`.
    Delta {
        #[serde(default = "one")]
        strength: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `strength * psi_eps(x - center)^2`.
    DeltaSquared {
        #[serde(default = "one")]
        strength: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `offset + amplitude * cos(k pi x_1 / L)`, with `offset >= |amplitude|`.
    SmoothCosine {
        offset: f64,
        amplitude: f64,
        #[serde(default = "one_u32")]
        k: u32,
    },
    /// Random nonnegative trigonometric field drawn from `seed`.
    Random,
    /// Field stored in an FWF1 snapshot on the run grid.
    File {
        path: PathBuf,
    },
}

fn one_u32() -> u32 {
    1
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub law: LawSpec,
    #[serde(default)]
    pub on_a: bool,
    #[serde(default)]
    pub on_b: bool,
    #[serde(default)]
    pub on_u0: bool,
    #[serde(default)]
    pub on_u1: bool,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawSpec {
    Exponential,
    Power(f64),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub u0: DataPreset,
    #[serde(default)]
    pub u1: DataPreset,
    /// Convolve the data with `psi_eps` in sweeps.
    #[serde(default)]
    pub regularize: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataPreset {
    #[default]
    Zero,
    /// `amplitude * exp(-|x - center|^2 / width^2)`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `amplitude * cos(k pi x_axis / L)`.
    CosineMode {
        k: u32,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        axis: usize,
    },
    /// `strength * psi_eps(x - center)` with its own `eps`.
    DeltaLike {
        eps: f64,
        #[serde(default = "one")]
        strength: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Random Gaussian bump drawn from `seed`.
    Random,
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuhamelSpec {
    /// Quadrature nodes on `[0, T]`.
    pub m: usize,
    pub source: SourceSpec,
}

/// `g(t) * profile(x)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub profile: DataPreset,
    pub temporal: Temporal,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Temporal {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    Cos {
        omega: f64,
    },
    Sin {
        omega: f64,
    },
}

impl Temporal {
    fn eval(self, t: f64) -> f64 {
        match self {
            Temporal::Constant { value } => value,
            Temporal::Cos { omega } => (omega * t).cos(),
            Temporal::Sin { omega } => (omega * t).sin(),
        }
    }
}

#[derive(Clone, Copy)]
enum Role {
    A,
    B,
    U0,
    U1,
}

fn center_or_origin(center: &Option<Vec<f64>>, d: usize) -> Result<Vec<f64>> {
    match center {
        None => Ok(vec![0.0; d]),
        Some(c) if c.len() == d => Ok(c.clone()),
        Some(c) => Err(Error::Config(format!(
            "center has {} coordinates, grid has dimension {d}",
            c.len()
        ))),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
        if self.observer_stride == 0 || self.snapshot_stride == Some(0) {
            return Err(Error::Config("strides must be positive".into()));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::Config(format!(
                "t_final = {} must be positive",
                self.t_final
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.d, self.grid.n, self.grid.l)
    }

    pub fn order(&self) -> Result<FracOrder> {
        FracOrder::new(self.s)
    }

    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeSpec::StrangSplit => Scheme::StrangSplit,
            SchemeSpec::Leapfrog => Scheme::Leapfrog,
        }
    }

    pub fn setup(&self) -> Result<RunSetup> {
        Ok(RunSetup {
            grid: self.grid()?,
            s: self.order()?,
            t_final: self.t_final,
            dt: self.dt,
            stride: self.observer_stride,
        })
    }

    /// The bump on a fixed reference box of half-width 2.
    pub fn mollifier(&self) -> Result<Mollifier> {
        let n = if self.grid.d >= 3 { 16 } else { 64 };
        make_mollifier(&Grid::new(self.grid.d, n, 2.0)?)
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    fn file_field(&self, path: &Path, grid: &Grid) -> Result<Field> {
        let (field, _) = io::read_snapshot(&self.resolve(path))?;
        if field.grid() != grid {
            return Err(Error::Config(format!(
                "{} does not live on the run grid",
                path.display()
            )));
        }
        Ok(field)
    }

    fn random_fields(&self, grid: &Grid) -> Result<crate::experiments::suite::RunFields> {
        RandomRun::draw(self.seed, 0, grid.dim(), 3).fields(grid)
    }

    fn coefficient_spec(
        &self,
        entry: &CoefficientEntry,
        role: Role,
        grid: &Grid,
    ) -> Result<CoefficientSpec> {
        let d = grid.dim();
        Ok(match entry {
            CoefficientEntry::Zero => CoefficientSpec::Zero,
            CoefficientEntry::Constant { value } => {
                CoefficientSpec::Smooth(Field::constant(grid, *value))
            }
            CoefficientEntry::Delta { strength, center } => CoefficientSpec::Delta {
                strength: *strength,
                center: center_or_origin(center, d)?,
            },
            CoefficientEntry::DeltaSquared { strength, center } => CoefficientSpec::DeltaSquared {
                strength: *strength,
                center: center_or_origin(center, d)?,
            },
            CoefficientEntry::SmoothCosine {
                offset,
                amplitude,
                k,
            } => {
                let w = f64::from(*k) * std::f64::consts::PI / grid.half_width();
                CoefficientSpec::Smooth(Field::from_fn(grid, |x| {
                    offset + amplitude * (w * x[0]).cos()
                })?)
            }
            CoefficientEntry::Random => {
                let f = self.random_fields(grid)?;
                CoefficientSpec::Smooth(match role {
                    Role::B => f.b,
                    _ => f.a,
                })
            }
            CoefficientEntry::File { path } => {
                CoefficientSpec::Smooth(self.file_field(path, grid)?)
            }
        })
    }

    /// The coefficient net `eps -> (a_eps, b_eps)`.
    pub fn coefficient_net(&self, grid: &Grid) -> Result<CoefficientNet> {
        coefficient_net(
            self.coefficient_spec(&self.coefficients.a, Role::A, grid)?,
            self.coefficient_spec(&self.coefficients.b, Role::B, grid)?,
            self.mollifier()?,
        )
    }

    /// `(a, b)` for a single run: the net member at `eps`, or the raw fields
    /// when `eps` is absent (singular kinds then need an `eps`).
    pub fn coefficients_at(&self, grid: &Grid, eps: Option<f64>) -> Result<(Field, Field)> {
        let net = self.coefficient_net(grid)?;
        if let Some(eps) = eps {
            return net.evaluate(eps, grid);
        }
        let raw = |spec: &CoefficientSpec| -> Result<Field> {
            let f = match spec {
                CoefficientSpec::Zero => Field::zeros(grid),
                CoefficientSpec::Smooth(base) => base.clone(),
                _ => return Err(Error::Config("delta-like coefficients need an eps".into())),
            };
            if f.min() < 0.0 {
                return Err(Error::NegativeBase);
            }
            Ok(f)
        };
        Ok((raw(net.a_spec())?, raw(net.b_spec())?))
    }

    fn preset_field(&self, preset: &DataPreset, role: Role, grid: &Grid) -> Result<Field> {
        let d = grid.dim();
        match preset {
            DataPreset::Zero => Ok(Field::zeros(grid)),
            DataPreset::Gaussian {
                amplitude,
                width,
                center,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!(
                        "gaussian width {width} must be positive"
                    )));
                }
                let c = center_or_origin(center, d)?;
                let inv = 1.0 / (width * width);
                Field::from_fn(grid, |x| {
                    let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    amplitude * (-r2 * inv).exp()
                })
            }
            DataPreset::CosineMode { k, amplitude, axis } => {
                if *axis >= d {
                    return Err(Error::Config(format!(
                        "axis {axis} out of range for d = {d}"
                    )));
                }
                let w = f64::from(*k) * std::f64::consts::PI / grid.half_width();
                Field::from_fn(grid, |x| amplitude * (w * x[*axis]).cos())
            }
            DataPreset::DeltaLike {
                eps,
                strength,
                center,
            } => {
                let c = center_or_origin(center, d)?;
                Ok(mollifying_net_at(&self.mollifier()?, *eps, grid, &c)?.scaled(*strength))
            }
            DataPreset::Random => {
                let f = self.random_fields(grid)?;
                Ok(match role {
                    Role::U1 => f.u1,
                    _ => f.u0,
                })
            }
            DataPreset::File { path } => self.file_field(path, grid),
        }
    }

    pub fn data(&self, grid: &Grid) -> Result<(Field, Field)> {
        Ok((
            self.preset_field(&self.data.u0, Role::U0, grid)?,
            self.preset_field(&self.data.u1, Role::U1, grid)?,
        ))
    }

    pub fn data_net(&self, grid: &Grid) -> Result<DataNet> {
        let (u0, u1) = self.data(grid)?;
        Ok(if self.data.regularize {
            DataNet::regularized(u0, u1, self.mollifier()?)
        } else {
            DataNet::fixed(u0, u1)
        })
    }

    pub fn perturbation(&self) -> Option<Perturbation> {
        self.coefficients.perturbation.map(|p| Perturbation {
            law: match p.law {
                LawSpec::Exponential => PerturbationLaw::Exponential,
                LawSpec::Power(q) => PerturbationLaw::Power(q),
            },
            on_a: p.on_a,
            on_b: p.on_b,
            on_u0: p.on_u0,
            on_u1: p.on_u1,
        })
    }

    pub fn stepper(&self, grid: &Grid) -> Result<StepperConfig> {
        let (a, b) = self.coefficients_at(grid, self.eps)?;
        StepperConfig::new(self.order()?, self.dt, self.scheme(), a, b)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
    }
}

/// 3 for solver blow-up, 2 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Unstable { .. } | Error::NonFinite(_) => 3,
        _ => 2,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_verdict(out: &Path, verdict: &Verdict) -> Result<()> {
    io::write_verdict(&out.join(VERDICT_JSON), verdict)
}

/// Runs `study` and writes its outputs into `out`. The verdict is returned
/// whether or not it passes.
pub fn run_study(study: Study, cfg: &RunConfig, out: &Path) -> Result<Verdict> {
    create_dir(out)?;
    let verdict = match study {
        Study::Solve => solve(cfg, out)?,
        Study::SweepModerateness | Study::SweepNegligibility => sweep(study, cfg, out)?,
        Study::Coherence => coherence(cfg, out)?,
        Study::DuhamelCheck => duhamel_check(cfg)?,
    };
    write_verdict(out, &verdict)?;
    Ok(verdict)
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<Verdict> {
    let grid = cfg.grid()?;
    let stepper = cfg.stepper(&grid)?;
    let (u0, u1) = cfg.data(&grid)?;
    let start = SolverState::new(u0, u1, 0.0)?;
    let steps = step_count(cfg.t_final, cfg.dt)?;
    let snap_stride = cfg.snapshot_stride.unwrap_or(steps.max(1));
    let snap_dir = out.join(SNAPSHOT_DIR);
    create_dir(&snap_dir)?;
    let write_snap = |k: usize, st: &SolverState| -> Result<()> {
        io::write_snapshot(&snap_dir.join(format!("u_{k:06}.fwf")), &st.u, st.t)?;
        io::write_snapshot(&snap_dir.join(format!("ut_{k:06}.fwf")), &st.ut, st.t)
    };
    let mut snapshots = |k: usize, st: &SolverState| -> Result<()> {
        if k.is_multiple_of(snap_stride) || k == steps {
            write_snap(k, st)?;
        }
        Ok(())
    };
    let mut monitor = EnergyMonitor::new(&stepper, cfg.observer_stride);
    evolve(
        &start,
        &stepper,
        cfg.t_final,
        &mut [&mut monitor, &mut snapshots],
    )?;
    io::write_table(
        &out.join(ENERGY_CSV),
        &io::ENERGY_HEADER,
        &io::energy_rows(&monitor.records),
    )?;
    let audit = energy_audit(&monitor.records, cfg.dt)?;
    let mut v = Verdict::new(
        "energy",
        audit.pass,
        "E(t) = ||u_t||^2 + ||(-Delta)^{s/2} u||^2 + ||a^{1/2} u||^2 is nonincreasing for a, b >= 0",
    );
    v.metric("overshoot", audit.overshoot)
        .metric("dissipation_residual", audit.residual)
        .metric(
            "final_energy",
            monitor.records.last().map_or(0.0, |r| r.energy),
        )
        .threshold("overshoot_band", audit.band);
    Ok(v)
}

fn sweep(study: Study, cfg: &RunConfig, out: &Path) -> Result<Verdict> {
    if cfg.eps_list.len() < MIN_SWEEP_POINTS {
        return Err(Error::Config(format!(
            "sweeps need at least {MIN_SWEEP_POINTS} eps values, got {}",
            cfg.eps_list.len()
        )));
    }
    let setup = cfg.setup()?;
    let net = cfg.coefficient_net(&setup.grid)?;
    let data = cfg.data_net(&setup.grid)?;
    let (records, verdict) = if study == Study::SweepModerateness {
        let sw = moderateness_sweep(&net, &data, &cfg.eps_list, &setup)?;
        (sw.records.clone(), sw.verdict())
    } else {
        let pert = cfg.perturbation().ok_or_else(|| {
            Error::Config("sweep-negligibility needs coefficients.perturbation".into())
        })?;
        let sw = negligibility_sweep(&net, pert, &data, &cfg.eps_list, &setup)?;
        (sw.records.clone(), sw.verdict())
    };
    io::write_table(
        &out.join(SWEEP_CSV),
        &io::SWEEP_HEADER,
        &io::sweep_rows(&records),
    )?;
    Ok(verdict)
}

fn coherence(cfg: &RunConfig, out: &Path) -> Result<Verdict> {
    let setup = cfg.setup()?;
    let (a, b) = cfg.coefficients_at(&setup.grid, None)?;
    let (u0, u1) = cfg.data(&setup.grid)?;
    if cfg.eps_list.is_empty() {
        return Err(Error::Config("coherence needs an eps_list".into()));
    }
    let study = coherence_study(&a, &b, &u0, &u1, &cfg.mollifier()?, &cfg.eps_list, &setup)?;
    io::write_table(
        &out.join(COHERENCE_CSV),
        &io::COHERENCE_HEADER,
        &io::coherence_rows(&study.eps, &study.errors),
    )?;
    Ok(study.verdict())
}

fn duhamel_check(cfg: &RunConfig) -> Result<Verdict> {
    let spec = cfg
        .duhamel
        .as_ref()
        .ok_or_else(|| Error::Config("duhamel-check needs a duhamel section".into()))?;
    let grid = cfg.grid()?;
    let stepper = cfg.stepper(&grid)?;
    let (u0, u1) = cfg.data(&grid)?;
    let profile = cfg.preset_field(&spec.source.profile, Role::U0, &grid)?;
    let temporal = spec.source.temporal;
    let source = SourceTerm::separable("config", profile, move |t| temporal.eval(t));
    let check = duhamel_equivalence(&u0, &u1, &stepper, &source, cfg.t_final, spec.m)?;
    let mut v = Verdict::new(
        "duhamel",
        check.pass(),
        "the sourced solution equals the free solution plus the integral over tau of auxiliary flows launched by the source at time tau",
    );
    v.metric("gap", check.gap)
        .metric("c1", check.c1[0])
        .metric("c1_refined", check.c1[1])
        .metric("c2", check.c2[0])
        .metric("c2_refined", check.c2[1])
        .metric("c1_ratio", check.c1_ratio())
        .metric("c2_ratio", check.c2_ratio())
        .threshold("tolerance", check.tolerance)
        .threshold("ratio_low", crate::duhamel::STABILITY_BAND.0)
        .threshold("ratio_high", crate::duhamel::STABILITY_BAND.1);
    Ok(v)
}

fn execute(study: Study, args: &RunArgs) -> Result<Verdict> {
    let cfg = RunConfig::from_path(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir());
    let verdict = run_study(study, &cfg, &out)?;
    println!(
        "{}: {} ({})",
        verdict.study,
        if verdict.pass { "PASS" } else { "FAIL" },
        out.display()
    );
    Ok(verdict)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (study, args) = cli.command.split();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return 2;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(study, args)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
