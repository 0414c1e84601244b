//! Command-line flags, config files and their merge into a [`RunConfig`].
//!
//! Config files are TOML: an optional top-level `command`, an `[output]`
//! table, and one table per subcommand whose keys are the long flag names.
//! Flags override file values, which override built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wavecross_core::model::ATOMIC_MASS_UNIT;

use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WAVECROSS_OUT_DIR";

const SECTIONS: [&str; 8] = [
    "drift",
    "spread",
    "step-scan",
    "imaging",
    "evolve",
    "alpha",
    "green",
    "sweep",
];

#[derive(Debug, Parser)]
#[command(
    name = "wavecross",
    version,
    about = "Wavepacket spreading, step-state pathologies, branch amplitudes and fixed-energy Green's functions"
)]
pub struct Cli {
    /// TOML config file, or a previous JSON/CSV output to re-run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [env: WAVECROSS_OUT_DIR, default: .]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Stem for output file names (default: the subcommand name).
    #[arg(long, global = true)]
    pub name: Option<String>,
    /// Echo the effective config to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Suppress the summary line.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Classical drift δx = ½(GM/d²)t² against the separation d.
    Drift(DriftArgs),
    /// Free spreading σ_t of a Gaussian packet.
    Spread(SpreadArgs),
    /// Momentum-moment cutoff scan for the step or Gaussian state.
    StepScan(StepScanArgs),
    /// Far-field imaging density of the step state and its ⟨r⟩ scan.
    Imaging(ImagingArgs),
    /// Split-step evolution of a 1D Gaussian packet (scaled units).
    Evolve(EvolveArgs),
    /// Branch amplitude matrix, determinant and crossed overlap.
    Alpha(AlphaArgs),
    /// Fixed-energy Green's function samples and decay fit (scaled units).
    Green(GreenArgs),
    /// Repeat another subcommand over a range of one parameter.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Drift(_) => "drift",
            Command::Spread(_) => "spread",
            Command::StepScan(_) => "step-scan",
            Command::Imaging(_) => "imaging",
            Command::Evolve(_) => "evolve",
            Command::Alpha(_) => "alpha",
            Command::Green(_) => "green",
            Command::Sweep(_) => "sweep",
        }
    }

    /// Flags given on the command line, as a TOML table.
    fn flag_table(&self) -> toml::Table {
        let value = match self {
            Command::Drift(a) => toml::Value::try_from(a),
            Command::Spread(a) => toml::Value::try_from(a),
            Command::StepScan(a) => toml::Value::try_from(a),
            Command::Imaging(a) => toml::Value::try_from(a),
            Command::Evolve(a) => toml::Value::try_from(a),
            Command::Alpha(a) => toml::Value::try_from(a),
            Command::Green(a) => toml::Value::try_from(a),
            Command::Sweep(a) => toml::Value::try_from(&a.axis),
        };
        match value {
            Ok(toml::Value::Table(t)) => t,
            _ => toml::Table::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    /// Tables as CSV next to a JSON summary.
    #[default]
    Csv,
    /// Everything in one JSON document.
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Step,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Free,
    Uniform,
    Softened,
    Delta,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenMethodArg {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftArgs {
    /// Source mass (kg)
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub source_mass: Option<f64>,
    /// Separation of the closest modes (m)
    #[arg(long)]
    pub d: Option<f64>,
    /// Time (s)
    #[arg(long)]
    pub t: Option<f64>,
    /// Particle mass (kg)
    #[arg(long)]
    pub m: Option<f64>,
    /// Packet radius (m)
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftParams {
    #[serde(rename = "M")]
    pub source_mass: f64,
    pub d: f64,
    pub t: f64,
    #[serde(default = "atomic_mass")]
    pub m: f64,
    #[serde(rename = "R", default = "micron")]
    pub radius: f64,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpreadArgs {
    /// Particle mass (kg)
    #[arg(long)]
    pub m: Option<f64>,
    /// Initial radius (m)
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    /// Final time (s)
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of time samples from 0 to t
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpreadParams {
    #[serde(default = "atomic_mass")]
    pub m: f64,
    #[serde(rename = "R", default = "micron")]
    pub radius: f64,
    pub t: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct StepScanArgs {
    #[arg(long, value_enum)]
    pub state: Option<StateKind>,
    /// Moment order: 1 for ⟨|k|⟩, 2 for ⟨k²⟩
    #[arg(long)]
    pub order: Option<u32>,
    /// Lowest cutoff, in units of 1/R
    #[arg(long)]
    pub k_min: Option<f64>,
    /// Highest cutoff, in units of 1/R
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub per_decade: Option<usize>,
    /// Particle mass for the relativistic fraction (kg)
    #[arg(long)]
    pub m: Option<f64>,
    /// Radius for the relativistic fraction (m)
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct StepScanParams {
    #[serde(default = "step_state")]
    pub state: StateKind,
    #[serde(default = "one_u32")]
    pub order: u32,
    #[serde(default = "ten")]
    pub k_min: f64,
    #[serde(default = "ten_thousand")]
    pub k_max: f64,
    #[serde(default = "per_decade")]
    pub per_decade: usize,
    #[serde(default = "atomic_mass")]
    pub m: f64,
    #[serde(rename = "R", default = "micron")]
    pub radius: f64,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ImagingArgs {
    /// Particle mass (kg)
    #[arg(long)]
    pub m: Option<f64>,
    /// Ball radius (m)
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    /// Time (s); defaults to ten spreading times 2mR²/ħ
    #[arg(long)]
    pub t: Option<f64>,
    /// Lowest ⟨r⟩ cutoff, in units of the ballistic radius ħt/(mR)
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Highest ⟨r⟩ cutoff, in the same units
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub per_decade: Option<usize>,
    /// Start of the tail-slope window, in ballistic radii
    #[arg(long)]
    pub slope_from: Option<f64>,
    /// End of the tail-slope window, in ballistic radii
    #[arg(long)]
    pub slope_to: Option<f64>,
    /// Also evolve the step state on a grid and compare in the far tail
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub compare_evolution: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ImagingParams {
    #[serde(default = "atomic_mass")]
    pub m: f64,
    #[serde(rename = "R", default = "micron")]
    pub radius: f64,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "two")]
    pub r_min: f64,
    #[serde(default = "two_thousand")]
    pub r_max: f64,
    #[serde(default = "per_decade")]
    pub per_decade: usize,
    #[serde(default = "twenty")]
    pub slope_from: f64,
    #[serde(default = "two_hundred")]
    pub slope_to: f64,
    #[serde(default)]
    pub compare_evolution: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvolveArgs {
    #[arg(long, value_enum)]
    pub potential: Option<PotentialKind>,
    /// Uniform field strength; V = g·x
    #[arg(long)]
    pub g: Option<f64>,
    /// Softened point-source coupling
    #[arg(long)]
    pub coupling: Option<f64>,
    #[arg(long)]
    pub source_center: Option<f64>,
    #[arg(long)]
    pub softening: Option<f64>,
    /// Delta-well strength
    #[arg(long)]
    pub strength: Option<f64>,
    /// Square-well depth
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub well_width: Option<f64>,
    /// Initial packet width
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub center: Option<f64>,
    /// Initial mean wavenumber
    #[arg(long)]
    pub k0: Option<f64>,
    /// Total time
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Extra times at which to dump the state, comma separated
    #[arg(long, value_delimiter = ',')]
    pub dump_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvolveParams {
    #[serde(default = "free_potential")]
    pub potential: PotentialKind,
    #[serde(default)]
    pub g: f64,
    #[serde(default = "one")]
    pub coupling: f64,
    #[serde(default)]
    pub source_center: f64,
    #[serde(default = "one")]
    pub softening: f64,
    #[serde(default = "one")]
    pub strength: f64,
    #[serde(default = "one")]
    pub depth: f64,
    #[serde(default = "one")]
    pub well_width: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub k0: f64,
    pub time: f64,
    #[serde(default = "thousand")]
    pub n_steps: usize,
    #[serde(default = "grid_points")]
    pub n_points: usize,
    #[serde(default = "sixty_four")]
    pub half_width: f64,
    #[serde(default)]
    pub dump_times: Vec<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AlphaArgs {
    /// Particle mass (kg)
    #[arg(long)]
    pub m: Option<f64>,
    /// Source mass (kg)
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub source_mass: Option<f64>,
    /// Separation of the closest modes (m)
    #[arg(long)]
    pub d: Option<f64>,
    /// Packet radius (m)
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    /// Time (s)
    #[arg(long)]
    pub t: Option<f64>,
    /// Distance between the L and R modes of one particle (m); defaults to d
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub fit_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AlphaParams {
    pub m: f64,
    #[serde(rename = "M")]
    pub source_mass: f64,
    pub d: f64,
    #[serde(rename = "R", default = "micron")]
    pub radius: f64,
    pub t: f64,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default = "alpha_steps")]
    pub n_steps: usize,
    #[serde(default = "fit_samples")]
    pub fit_samples: usize,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GreenArgs {
    /// Energy (scaled)
    #[arg(long = "E", allow_hyphen_values = true)]
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    /// Mass (scaled)
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<GreenMethodArg>,
    /// iε; must be > 0 for E > 0 and 0 for E < 0
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub n_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GreenParams {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default)]
    pub x_min: Option<f64>,
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "quadrature")]
    pub method: GreenMethodArg,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub k_max: Option<f64>,
    #[serde(default = "green_nodes")]
    pub n_nodes: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub axis: SweepAxisArgs,
    #[command(subcommand)]
    pub target: Option<SweepTarget>,
}

/// Subcommands a sweep can repeat.
#[derive(Debug, Clone, Subcommand)]
pub enum SweepTarget {
    Drift(DriftArgs),
    Spread(SpreadArgs),
    StepScan(StepScanArgs),
    Imaging(ImagingArgs),
    Evolve(EvolveArgs),
    Alpha(AlphaArgs),
    Green(GreenArgs),
}

impl SweepTarget {
    fn command(&self) -> Command {
        match self.clone() {
            SweepTarget::Drift(a) => Command::Drift(a),
            SweepTarget::Spread(a) => Command::Spread(a),
            SweepTarget::StepScan(a) => Command::StepScan(a),
            SweepTarget::Imaging(a) => Command::Imaging(a),
            SweepTarget::Evolve(a) => Command::Evolve(a),
            SweepTarget::Alpha(a) => Command::Alpha(a),
            SweepTarget::Green(a) => Command::Green(a),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepAxisArgs {
    /// Parameter to vary; any numeric key of the target subcommand
    #[arg(long)]
    pub axis: Option<String>,
    /// lo:hi
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Subcommand to sweep, when given in a config file
    #[arg(skip)]
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepParams {
    pub axis: String,
    pub range: String,
    pub count: usize,
    #[serde(default = "linear")]
    pub spacing: Spacing,
    #[serde(default)]
    pub workers: Option<usize>,
    pub target: String,
}

impl SweepParams {
    /// The swept values, in order.
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = || {
            CliError::Usage(format!(
                "sweep range must look like lo:hi, got {:?}",
                self.range
            ))
        };
        let (lo, hi) = self.range.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if self.count < 2 {
            return Err(CliError::Usage("sweep count must be >= 2".into()));
        }
        let n = self.count;
        match self.spacing {
            Spacing::Linear => Ok((0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()),
            Spacing::Log => {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(CliError::Usage("log sweeps need a positive range".into()));
                }
                Ok((0..n)
                    .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    format: Option<Format>,
    name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputParams {
    pub format: Format,
    pub name: String,
}

/// One resolved unit of work.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Drift(DriftParams),
    Spread(SpreadParams),
    StepScan(StepScanParams),
    Imaging(ImagingParams),
    Evolve(EvolveParams),
    Alpha(AlphaParams),
    Green(GreenParams),
    Sweep {
        sweep: SweepParams,
        target: Box<Job>,
    },
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Drift(_) => "drift",
            Job::Spread(_) => "spread",
            Job::StepScan(_) => "step-scan",
            Job::Imaging(_) => "imaging",
            Job::Evolve(_) => "evolve",
            Job::Alpha(_) => "alpha",
            Job::Green(_) => "green",
            Job::Sweep { .. } => "sweep",
        }
    }

    /// Builds a non-sweep job from its resolved table.
    pub fn from_table(name: &str, table: toml::Table) -> Result<Job> {
        Ok(match name {
            "drift" => Job::Drift(from_table(name, table)?),
            "spread" => Job::Spread(from_table(name, table)?),
            "step-scan" => Job::StepScan(from_table(name, table)?),
            "imaging" => Job::Imaging(from_table(name, table)?),
            "evolve" => Job::Evolve(from_table(name, table)?),
            "alpha" => Job::Alpha(from_table(name, table)?),
            "green" => Job::Green(from_table(name, table)?),
            "sweep" => return Err(CliError::Usage("sweep cannot target another sweep".into())),
            other => return Err(CliError::Usage(format!("unknown subcommand {other:?}"))),
        })
    }

    /// The job's parameters as a TOML table.
    pub fn table(&self) -> toml::Table {
        let value = match self {
            Job::Drift(p) => toml::Value::try_from(p),
            Job::Spread(p) => toml::Value::try_from(p),
            Job::StepScan(p) => toml::Value::try_from(p),
            Job::Imaging(p) => toml::Value::try_from(p),
            Job::Evolve(p) => toml::Value::try_from(p),
            Job::Alpha(p) => toml::Value::try_from(p),
            Job::Green(p) => toml::Value::try_from(p),
            Job::Sweep { sweep, .. } => toml::Value::try_from(sweep),
        };
        match value.expect("parameter structs serialize to TOML") {
            toml::Value::Table(t) => t,
            _ => unreachable!("parameter structs are tables"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub job: Job,
    pub output: OutputParams,
    /// Not part of the embedded config, so moving a run does not change it.
    pub out_dir: PathBuf,
    pub verbose: u8,
    pub quiet: bool,
}

impl RunConfig {
    /// The effective config in config-file form.
    pub fn to_toml(&self) -> String {
        let mut root = toml::Table::new();
        root.insert("command".into(), self.job.name().into());
        root.insert(
            "output".into(),
            toml::Value::try_from(&self.output).expect("output section serializes"),
        );
        root.insert(self.job.name().into(), self.job.table().into());
        if let Job::Sweep { target, .. } = &self.job {
            root.insert(target.name().into(), target.table().into());
        }
        toml::to_string(&root).expect("config serializes")
    }
}

/// Parses `args` (including the program name) into a run configuration.
pub fn parse_config<I, T>(args: I) -> std::result::Result<RunConfig, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseFailure::Clap)?;
    resolve(cli, std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).map_err(ParseFailure::Cli)
}

/// Either clap's own error (help, version, bad flags) or a resolution error.
#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Cli(CliError),
}

pub fn resolve(cli: Cli, env_out: Option<PathBuf>) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => toml::Table::new(),
    };
    let file_path = cli.config.clone().unwrap_or_default();
    let bad_file = |reason: String| CliError::ConfigFile {
        path: file_path.clone(),
        reason,
    };

    for key in file.keys() {
        if key != "command" && key != "output" && !SECTIONS.contains(&key.as_str()) {
            return Err(bad_file(format!("unknown section or key {key:?}")));
        }
    }
    let file_command = match file.get("command") {
        None => None,
        Some(toml::Value::String(s)) if SECTIONS.contains(&s.as_str()) => Some(s.clone()),
        Some(other) => {
            return Err(bad_file(format!(
                "command must name a subcommand, got {other}"
            )))
        }
    };
    let output_section: OutputSection = match file.get("output") {
        None => OutputSection::default(),
        Some(v) => v
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| bad_file(format!("[output]: {}", e.message())))?,
    };

    let command = match (&cli.command, &file_command) {
        (Some(c), Some(f)) if c.name() != f => {
            return Err(CliError::Conflict(format!(
                "command line says {:?}, config file says {f:?}",
                c.name()
            )))
        }
        (Some(c), _) => c.name().to_string(),
        (None, Some(f)) => f.clone(),
        (None, None) => return Err(CliError::Usage("no subcommand given (see --help)".into())),
    };

    let section = |name: &str| -> Result<toml::Table> {
        match file.get(name) {
            None => Ok(toml::Table::new()),
            Some(toml::Value::Table(t)) => {
                check_section(name, t).map_err(bad_file)?;
                Ok(t.clone())
            }
            Some(_) => Err(bad_file(format!("[{name}] must be a table"))),
        }
    };
    let merged = |name: &str, flags: Option<&Command>| -> Result<toml::Table> {
        let mut table = section(name)?;
        if let Some(cmd) = flags {
            table.extend(cmd.flag_table());
        }
        Ok(table)
    };

    let job = if command == "sweep" {
        let cli_sweep = match &cli.command {
            Some(Command::Sweep(s)) => Some(s),
            _ => None,
        };
        let mut sweep_table = merged("sweep", cli.command.as_ref())?;
        let cli_target = cli_sweep
            .and_then(|s| s.target.as_ref())
            .map(SweepTarget::command);
        let file_target = sweep_table
            .get("target")
            .and_then(|v| v.as_str())
            .map(str::to_string);
        let target_name = match (&cli_target, file_target) {
            (Some(c), Some(f)) if c.name() != f => {
                return Err(CliError::Conflict(format!(
                    "sweep target {:?} on the command line, {f:?} in the config file",
                    c.name()
                )))
            }
            (Some(c), _) => c.name().to_string(),
            (None, Some(f)) => f,
            (None, None) => return Err(CliError::Usage("sweep needs a target subcommand".into())),
        };
        if target_name == "sweep" {
            return Err(CliError::Usage("sweep cannot target another sweep".into()));
        }
        sweep_table.insert("target".into(), target_name.clone().into());
        let sweep: SweepParams = from_table("sweep", sweep_table)?;
        let values = sweep.values()?;
        let mut target_table = merged(&target_name, cli_target.as_ref())?;
        let target = if target_table.contains_key(&sweep.axis) {
            Job::from_table(&target_name, target_table)?
        } else {
            // The swept parameter may be required; seed it with the first value.
            target_table.insert(sweep.axis.clone(), toml::Value::Float(values[0]));
            match Job::from_table(&target_name, target_table.clone()) {
                Ok(job) => job,
                Err(float_err) if values[0].fract() == 0.0 => {
                    target_table.insert(sweep.axis.clone(), toml::Value::Integer(values[0] as i64));
                    Job::from_table(&target_name, target_table).map_err(|_| float_err)?
                }
                Err(e) => return Err(e),
            }
        };
        // The axis must name a numeric parameter of the target.
        let resolved = target.table();
        match resolved.get(&sweep.axis) {
            Some(toml::Value::Float(_)) | Some(toml::Value::Integer(_)) => {}
            _ => {
                return Err(CliError::Usage(format!(
                    "sweep axis {:?} is not a numeric parameter of {target_name}",
                    sweep.axis
                )))
            }
        }
        Job::Sweep {
            sweep,
            target: Box::new(target),
        }
    } else {
        Job::from_table(&command, merged(&command, cli.command.as_ref())?)?
    };

    let output = OutputParams {
        format: cli.format.or(output_section.format).unwrap_or_default(),
        name: cli
            .name
            .or(output_section.name)
            .unwrap_or_else(|| job.name().to_string()),
    };
    if output.name.is_empty() || output.name.contains(['/', '\\']) {
        return Err(CliError::Usage(format!(
            "invalid output name {:?}",
            output.name
        )));
    }
    let out_dir = cli.out.or(env_out).unwrap_or_else(|| PathBuf::from("."));
    Ok(RunConfig {
        job,
        output,
        out_dir,
        verbose: cli.verbose,
        quiet: cli.quiet,
    })
}

/// Rejects file keys that no flag of `name` accepts.
fn check_section(name: &str, table: &toml::Table) -> std::result::Result<(), String> {
    let value = toml::Value::Table(table.clone());
    let check = match name {
        "drift" => value.try_into::<DriftArgs>().map(drop),
        "spread" => value.try_into::<SpreadArgs>().map(drop),
        "step-scan" => value.try_into::<StepScanArgs>().map(drop),
        "imaging" => value.try_into::<ImagingArgs>().map(drop),
        "evolve" => value.try_into::<EvolveArgs>().map(drop),
        "alpha" => value.try_into::<AlphaArgs>().map(drop),
        "green" => value.try_into::<GreenArgs>().map(drop),
        "sweep" => {
            let mut t = table.clone();
            t.remove("target");
            toml::Value::Table(t).try_into::<SweepAxisArgs>().map(drop)
        }
        _ => return Err(format!("unknown section [{name}]")),
    };
    check.map_err(|e| format!("[{name}]: {}", e.message()))
}

fn from_table<P: DeserializeOwned>(name: &str, table: toml::Table) -> Result<P> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Usage(format!("{name}: {}", e.message())))
}

/// Reads a TOML config, or the config embedded in a previous JSON or CSV output.
pub fn load_config_file(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |reason: String| CliError::ConfigFile {
        path: path.to_path_buf(),
        reason,
    };
    let toml_text = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let doc: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            doc.pointer("/metadata/config")
                .and_then(|v| v.as_str())
                .ok_or_else(|| bad("no metadata.config string".into()))?
                .to_string()
        }
        Some("csv") => {
            let lines: Vec<&str> = text
                .lines()
                .filter_map(|l| l.strip_prefix(crate::output::CSV_CONFIG_PREFIX))
                .collect();
            if lines.is_empty() {
                return Err(bad("no embedded config lines".into()));
            }
            lines.join("\n")
        }
        _ => text,
    };
    toml::from_str(&toml_text).map_err(|e| bad(e.message().to_string()))
}

fn atomic_mass() -> f64 {
    ATOMIC_MASS_UNIT
}
fn micron() -> f64 {
    1e-6
}
fn default_count() -> usize {
    41
}
fn step_state() -> StateKind {
    StateKind::Step
}
fn one_u32() -> u32 {
    1
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn ten() -> f64 {
    10.0
}
fn twenty() -> f64 {
    20.0
}
fn sixty_four() -> f64 {
    64.0
}
fn two_hundred() -> f64 {
    200.0
}
fn two_thousand() -> f64 {
    2000.0
}
fn ten_thousand() -> f64 {
    1e4
}
fn per_decade() -> usize {
    8
}
fn thousand() -> usize {
    1000
}
fn grid_points() -> usize {
    4096
}
fn free_potential() -> PotentialKind {
    PotentialKind::Free
}
fn alpha_steps() -> usize {
    200
}
fn fit_samples() -> usize {
    13
}
fn quadrature() -> GreenMethodArg {
    GreenMethodArg::Quadrature
}
fn green_nodes() -> usize {
    20_000
}
fn linear() -> Spacing {
    Spacing::Linear
}
