//! Command-line flags and the JSON config file that mirrors them.
//!
//! Every command flag is optional at the clap level so that a config file
//! can supply it. Flags given on the command line win over config values.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{usage, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "rotcov",
    version,
    about = "Entanglement certification with rotationally covariant polarimeters"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GlobalArgs {
    /// Directory for output files (created if missing).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// SDP primal/dual feasibility tolerance.
    #[arg(long, global = true)]
    pub tol_feas: Option<f64>,

    /// SDP relative gap tolerance.
    #[arg(long, global = true)]
    pub tol_gap: Option<f64>,

    /// SDP iteration limit.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,

    /// Log to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a coincidence record from a named state.
    Simulate(SimulateArgs),
    /// Certify entanglement from a record with known contrasts.
    Certify(CertifyArgs),
    /// Semi-device-independent scan over hypothetical contrasts.
    Semidi(SemidiArgs),
    /// Steering functional for a named state.
    Steering(SteeringArgs),
    /// Klein-Nishina contrast and coincidence curves.
    Compton(ComptonArgs),
    /// Fit the contrast of an angular power series.
    Fit(FitArgs),
    /// Check the SDP solver against eigenvalue oracles.
    SdpSelftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Certify(_) => "certify",
            Command::Semidi(_) => "semidi",
            Command::Steering(_) => "steering",
            Command::Compton(_) => "compton",
            Command::Fit(_) => "fit",
            Command::SdpSelftest(_) => "sdp-selftest",
        }
    }
}

/// Bin count or comma-separated edges in degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum BinsSpec {
    Count(usize),
    EdgesDeg(Vec<f64>),
}

impl FromStr for BinsSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if !s.contains(',') {
            return s
                .parse()
                .map(BinsSpec::Count)
                .map_err(|_| format!("`{s}` is neither a bin count nor a list of edges"));
        }
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad bin edge `{t}`")))
            .collect::<Result<Vec<_>, _>>()
            .map(BinsSpec::EdgesDeg)
    }
}

impl std::fmt::Display for BinsSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BinsSpec::Count(n) => write!(f, "{n}"),
            BinsSpec::EdgesDeg(e) => {
                let parts: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl Serialize for BinsSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BinsSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Edges(Vec<f64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(BinsSpec::Count(n)),
            Raw::Edges(e) => Ok(BinsSpec::EdgesDeg(e)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    /// singlet, werner:<f>, ortho-mixture or mixed.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub ra: Option<f64>,
    #[arg(long)]
    pub rb: Option<f64>,
    /// Bin count or comma-separated edges in degrees, e.g. 0,45,90,180.
    #[arg(long)]
    pub bins_a: Option<BinsSpec>,
    #[arg(long)]
    pub bins_b: Option<BinsSpec>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base name of the record files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CertifyArgs {
    /// Record CSV; contrasts default to its JSON sidecar.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub ra: Option<f64>,
    #[arg(long)]
    pub rb: Option<f64>,
    #[arg(long)]
    pub confidence: Option<f64>,
    /// exact or hoeffding.
    #[arg(long)]
    pub mode: Option<String>,
    /// Split the confidence budget over all cells.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub bonferroni: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SemidiArgs {
    /// Record CSV. Without it, exact statistics of --state are used.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub state: Option<String>,
    /// True contrasts used to generate exact statistics.
    #[arg(long)]
    pub ra: Option<f64>,
    #[arg(long)]
    pub rb: Option<f64>,
    #[arg(long)]
    pub bins_a: Option<BinsSpec>,
    #[arg(long)]
    pub bins_b: Option<BinsSpec>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub confidence: Option<f64>,
    #[arg(long)]
    pub mode: Option<String>,
    /// Also trace the minimal negativity at hypothesis (1, 1) against r_A·r_B.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub curve: Option<bool>,
    /// Number of contrast products on the curve.
    #[arg(long)]
    pub curve_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SteeringArgs {
    #[arg(long)]
    pub state: Option<String>,
    /// Bob's contrast.
    #[arg(long)]
    pub rb: Option<f64>,
    /// Whether Bob's contrast is known when reconstructing his Paulis.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub r_known: Option<bool>,
    /// Random CHSH search size; 0 skips it.
    #[arg(long)]
    pub chsh_configs: Option<usize>,
    #[arg(long)]
    pub chsh_states: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ComptonArgs {
    /// Photon energy in units of the electron rest energy.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Polar scattering angle in radians.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Analyzing powers for the coincidence curve and ratio.
    #[arg(long)]
    pub ra: Option<f64>,
    #[arg(long)]
    pub rb: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FitArgs {
    /// CSV with columns angle_deg,power_mw.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Generate a synthetic series with this contrast instead of reading one.
    #[arg(long)]
    pub synthetic: Option<f64>,
    /// Baseline power of the synthetic series, mW.
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Phase of the synthetic series, degrees.
    #[arg(long)]
    pub phase: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative Gaussian noise of the synthetic series.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SelftestArgs {
    /// Random Hermitian matrices to check.
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Reads a config file as a JSON object.
pub fn load_config(path: &Path) -> CliResult<Map<String, Value>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(usage(format!("config {} must be a JSON object", path.display()))),
        Err(e) => Err(usage(format!("config {} is not valid JSON: {e}", path.display()))),
    }
}

fn keys_of<T: Serialize>(value: &T) -> BTreeSet<String> {
    match serde_json::to_value(value) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => BTreeSet::new(),
    }
}

/// Long flag names of every subcommand.
fn all_command_flags() -> BTreeSet<String> {
    Cli::command()
        .get_subcommands()
        .flat_map(|c| {
            c.get_arguments()
                .filter_map(|a| a.get_long().map(str::to_string))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Overlays non-empty flags onto the config entries that `T` understands.
fn overlay<T: Serialize + DeserializeOwned>(flags: &T, config: &Map<String, Value>) -> CliResult<T> {
    let mut merged = Map::new();
    let own = keys_of(flags);
    for (k, v) in config {
        if own.contains(k) {
            merged.insert(k.clone(), v.clone());
        }
    }
    if let Ok(Value::Object(given)) = serde_json::to_value(flags) {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("invalid config value: {e}")))
}

/// Merges the config file (if any) under the command-line flags.
pub fn resolve(cli: Cli) -> CliResult<(GlobalArgs, Command)> {
    let Cli { global, command } = cli;
    let Some(path) = global.config.clone() else {
        return Ok((global, command));
    };
    let config = load_config(&path)?;
    let global_keys = keys_of(&global);
    let command_flags = all_command_flags();
    for key in config.keys() {
        if !global_keys.contains(key) && !command_flags.contains(key) {
            return Err(usage(format!("unknown key `{key}` in config {}", path.display())));
        }
    }
    let mut merged_global: GlobalArgs = overlay(&global, &config)?;
    merged_global.config = global.config;
    merged_global.verbose = global.verbose;
    let command = match command {
        Command::Simulate(a) => Command::Simulate(overlay(&a, &config)?),
        Command::Certify(a) => Command::Certify(overlay(&a, &config)?),
        Command::Semidi(a) => Command::Semidi(overlay(&a, &config)?),
        Command::Steering(a) => Command::Steering(overlay(&a, &config)?),
        Command::Compton(a) => Command::Compton(overlay(&a, &config)?),
        Command::Fit(a) => Command::Fit(overlay(&a, &config)?),
        Command::SdpSelftest(a) => Command::SdpSelftest(overlay(&a, &config)?),
    };
    Ok((merged_global, command))
}
