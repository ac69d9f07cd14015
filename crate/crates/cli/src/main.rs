//! `amif` — frequency-domain mutual-information analysis of time-series
//! tables.
//!
//! Subcommands: `synth` generates the seeded parent-child benchmark,
//! `analyze` runs measure -> transform -> MDS -> optional DBSCAN end to end,
//! and `mds`, `cluster`, `render`, `ari` expose the individual stages.
//!
//! Flags override an optional TOML config file (`--config`); the resolved
//! union is echoed into the run manifest. `--from-manifest` re-runs a prior
//! invocation from its manifest, optionally redirecting outputs with
//! `--out-prefix`, and reproduces every output file byte for byte.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

mod cmd;
mod manifest;
mod render;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use cmd::CliError;
use manifest::{AnalyzeParams, ClusterParams, Manifest, MdsParams, OutPaths, RenderParams, SynthParams};

#[derive(Parser)]
#[command(name = "amif", version, about = "Pairwise information-sharing analysis for time-series tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the seeded AR(3) parent-child benchmark table.
    Synth(SynthArgs),
    /// Run measure -> transform -> MDS -> optional DBSCAN on a series CSV.
    Analyze(AnalyzeArgs),
    /// Embed an existing dissimilarity CSV with classical MDS.
    Mds(MdsArgs),
    /// Cluster an embedding CSV with DBSCAN, appending a cluster column.
    Cluster(ClusterArgs),
    /// Render an embedding CSV as an SVG scatter plot.
    Render(RenderArgs),
    /// Adjusted Rand index between two label files.
    Ari(AriArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of parent processes (table gets 2x columns).
    #[arg(long)]
    parents: Option<usize>,
    /// Trend scale; slopes are drawn uniformly from [-alpha, alpha].
    #[arg(long)]
    alpha: Option<f64>,
    /// Series length T.
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Prefix for <prefix>.series.csv, <prefix>.labels.csv, <prefix>.manifest.json.
    #[arg(long)]
    out_prefix: Option<PathBuf>,
    /// TOML file with default values for the flags above.
    #[arg(long, conflicts_with = "from_manifest")]
    config: Option<PathBuf>,
    /// Re-run the configuration recorded in a previous manifest.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    Amif,
    Macc,
    Maccoeff,
    Euclidean,
}

impl MeasureArg {
    fn as_str(self) -> &'static str {
        match self {
            MeasureArg::Amif => "amif",
            MeasureArg::Macc => "macc",
            MeasureArg::Maccoeff => "maccoeff",
            MeasureArg::Euclidean => "euclidean",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TransformArg {
    Membership,
    Logarithmic,
}

impl TransformArg {
    fn as_str(self) -> &'static str {
        match self {
            TransformArg::Membership => "membership",
            TransformArg::Logarithmic => "logarithmic",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NormalizationArg {
    MeanFrequencyCount,
    None,
}

impl NormalizationArg {
    fn as_str(self) -> &'static str {
        match self {
            NormalizationArg::MeanFrequencyCount => "mean-frequency-count",
            NormalizationArg::None => "none",
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input series CSV (header of names, numeric body).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Pairwise measure filling the matrix.
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Fraction of frequency pairings kept as significant, in (0, 1].
    #[arg(long)]
    q: Option<f64>,
    /// Segment / FFT length.
    #[arg(long)]
    nf: Option<usize>,
    /// Neighbor count of the MI estimator.
    #[arg(long)]
    k: Option<usize>,
    /// Floor applied to k-th-neighbor distances.
    #[arg(long)]
    distance_floor: Option<f64>,
    /// Scaling of the final aggregate MI score.
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
    /// Similarity-to-dissimilarity transform (skipped for euclidean).
    #[arg(long, value_enum)]
    transform: Option<TransformArg>,
    /// Guard constant inside the logarithmic transform.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Embedding dimension.
    #[arg(long)]
    mds_dim: Option<usize>,
    /// Enable DBSCAN on the embedding with this neighborhood radius.
    #[arg(long)]
    dbscan_eps: Option<f64>,
    /// Minimum neighborhood population for a core point.
    #[arg(long)]
    dbscan_minpts: Option<usize>,
    /// Lag window for macc; defaults to min(T - 1, T / 4).
    #[arg(long)]
    max_lag: Option<usize>,
    /// Skip per-column standardization.
    #[arg(long)]
    no_standardize: bool,
    /// Fail on incomplete columns instead of excluding them.
    #[arg(long)]
    strict_columns: bool,
    /// Record the sampling interval (informational).
    #[arg(long)]
    sample_interval_ms: Option<f64>,
    /// Also write an SVG scatter of the embedding.
    #[arg(long)]
    svg: bool,
    /// Prefix for the similarity/dissimilarity/embedding/svg/manifest files.
    #[arg(long)]
    out_prefix: Option<PathBuf>,
    /// TOML file with default values for the flags above.
    #[arg(long, conflicts_with = "from_manifest")]
    config: Option<PathBuf>,
    /// Re-run the configuration recorded in a previous manifest.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct MdsArgs {
    /// Input dissimilarity CSV.
    #[arg(long)]
    input: PathBuf,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// Input embedding CSV.
    #[arg(long)]
    input: PathBuf,
    /// Neighborhood radius.
    #[arg(long)]
    eps: f64,
    /// Minimum neighborhood population for a core point.
    #[arg(long, default_value_t = 1)]
    minpts: usize,
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Input embedding CSV (2 or 3 dimensions, optional cluster column).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct AriArgs {
    /// First label file (name,label CSV or embedding CSV with clusters).
    #[arg(long)]
    a: PathBuf,
    /// Second label file.
    #[arg(long)]
    b: PathBuf,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SynthFileConfig {
    parents: Option<usize>,
    alpha: Option<f64>,
    len: Option<usize>,
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct AnalyzeFileConfig {
    measure: Option<String>,
    q: Option<f64>,
    nf: Option<usize>,
    k: Option<usize>,
    distance_floor: Option<f64>,
    normalization: Option<String>,
    transform: Option<String>,
    epsilon: Option<f64>,
    mds_dim: Option<usize>,
    dbscan_eps: Option<f64>,
    dbscan_minpts: Option<usize>,
    max_lag: Option<usize>,
    standardize: Option<bool>,
    drop_incomplete: Option<bool>,
    sample_interval_ms: Option<f64>,
    svg: Option<bool>,
}

fn load_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
        }
    }
}

fn run_synth(args: SynthArgs) -> Result<(), CliError> {
    if let Some(manifest_path) = &args.from_manifest {
        if args.parents.is_some() || args.alpha.is_some() || args.len.is_some() || args.seed.is_some() {
            return Err(CliError::usage(
                "--from-manifest only combines with --out-prefix",
            ));
        }
        let manifest = Manifest::load(manifest_path)?;
        let params = manifest
            .synth
            .ok_or_else(|| CliError::data("manifest does not describe a synth run".to_string()))?;
        let prefix = args
            .out_prefix
            .unwrap_or_else(|| PathBuf::from(&manifest.out_prefix));
        return cmd::cmd_synth(params, &OutPaths::new(&prefix));
    }

    let file: SynthFileConfig = load_toml(args.config.as_deref())?;
    let params = SynthParams {
        parents: args.parents.or(file.parents).unwrap_or(8),
        alpha: args.alpha.or(file.alpha).unwrap_or(1e-3),
        len: args.len.or(file.len).unwrap_or(2048),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    let prefix = args.out_prefix.unwrap_or_else(|| PathBuf::from("synth"));
    cmd::cmd_synth(params, &OutPaths::new(&prefix))
}

fn run_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    if let Some(manifest_path) = &args.from_manifest {
        if args.input.is_some() || args.measure.is_some() || args.q.is_some() {
            return Err(CliError::usage(
                "--from-manifest only combines with --out-prefix",
            ));
        }
        let manifest = Manifest::load(manifest_path)?;
        let params = manifest
            .analyze
            .ok_or_else(|| CliError::data("manifest does not describe an analyze run".to_string()))?;
        for input in &manifest.inputs {
            cmd::verify_digest(input)?;
        }
        let prefix = args
            .out_prefix
            .unwrap_or_else(|| PathBuf::from(&manifest.out_prefix));
        return cmd::cmd_analyze(params, &OutPaths::new(&prefix));
    }

    let file: AnalyzeFileConfig = load_toml(args.config.as_deref())?;
    let input = args
        .input
        .ok_or_else(|| CliError::usage("--input is required"))?;
    let params = AnalyzeParams {
        input: input.display().to_string(),
        measure: args
            .measure
            .map(MeasureArg::as_str)
            .map(str::to_string)
            .or(file.measure)
            .unwrap_or_else(|| "amif".to_string()),
        q: args.q.or(file.q).unwrap_or(0.5),
        nf: args.nf.or(file.nf).unwrap_or(16),
        k: args.k.or(file.k).unwrap_or(3),
        distance_floor: args.distance_floor.or(file.distance_floor).unwrap_or(1e-12),
        normalization: args
            .normalization
            .map(NormalizationArg::as_str)
            .map(str::to_string)
            .or(file.normalization)
            .unwrap_or_else(|| "mean-frequency-count".to_string()),
        transform: args
            .transform
            .map(TransformArg::as_str)
            .map(str::to_string)
            .or(file.transform)
            .unwrap_or_else(|| "membership".to_string()),
        epsilon: args.epsilon.or(file.epsilon).unwrap_or(1e-9),
        mds_dim: args.mds_dim.or(file.mds_dim).unwrap_or(2),
        dbscan_eps: args.dbscan_eps.or(file.dbscan_eps),
        dbscan_min_pts: args.dbscan_minpts.or(file.dbscan_minpts).unwrap_or(1),
        max_lag: args.max_lag.or(file.max_lag),
        standardize: if args.no_standardize {
            false
        } else {
            file.standardize.unwrap_or(true)
        },
        drop_incomplete: if args.strict_columns {
            false
        } else {
            file.drop_incomplete.unwrap_or(true)
        },
        sample_interval_ms: args.sample_interval_ms.or(file.sample_interval_ms),
        svg: args.svg || file.svg.unwrap_or(false),
    };
    let prefix = args.out_prefix.unwrap_or_else(|| {
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "analysis".to_string());
        input.with_file_name(format!("{stem}.analysis"))
    });
    cmd::cmd_analyze(params, &OutPaths::new(&prefix))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Mds(args) => {
            let prefix = args.out_prefix.unwrap_or_else(|| derive_prefix(&args.input, ".mds"));
            cmd::cmd_mds(
                MdsParams {
                    input: args.input.display().to_string(),
                    dim: args.dim,
                },
                &OutPaths::new(&prefix),
            )
        }
        Command::Cluster(args) => {
            let prefix = args
                .out_prefix
                .unwrap_or_else(|| derive_prefix(&args.input, ".clustered"));
            cmd::cmd_cluster(
                ClusterParams {
                    input: args.input.display().to_string(),
                    eps: args.eps,
                    min_pts: args.minpts,
                },
                &OutPaths::new(&prefix),
            )
        }
        Command::Render(args) => {
            let prefix = args
                .out_prefix
                .unwrap_or_else(|| derive_prefix(&args.input, ".plot"));
            cmd::cmd_render(
                RenderParams {
                    input: args.input.display().to_string(),
                },
                &OutPaths::new(&prefix),
            )
        }
        Command::Ari(args) => cmd::cmd_ari(&args.a, &args.b),
    }
}

fn derive_prefix(input: &Path, suffix: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    input.with_file_name(format!("{stem}{suffix}"))
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
