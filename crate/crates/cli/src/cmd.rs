//! Command implementations: each runs its stages, collects warnings and
//! timings, writes every artifact atomically, and finishes with a manifest.
//!
//! Output files are written to a temporary file in the destination
//! directory and renamed into place, so a failing stage never leaves a
//! partially written artifact.

use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use amif_core::amif::{refine, similarity_matrix, AmifConfig, Normalization, SimilarityMatrix};
use amif_core::baselines::{baseline_similarity_matrix, euclidean_dissim, BaselineMetric};
use amif_core::dbscan::{adjusted_rand_index, dbscan, DbscanConfig};
use amif_core::mds::{classical_mds, embedding_from_csv, embedding_to_csv};
use amif_core::mi::MiConfig;
use amif_core::series::{labels_from_csv, labels_to_csv, load_csv};
use amif_core::synth::{generate, SynthConfig};
use amif_core::transform::{apply, DissimilarityMatrix, TransformConfig, TransformKind};
use amif_core::Error as CoreError;

use crate::manifest::{
    output, AnalyzeParams, ClusterParams, FileDigest, Manifest, MdsParams, OutPaths, RenderParams,
    StageTiming, SynthParams,
};
use crate::render::render_scatter;

/// Error carrying the process exit code: 2 usage, 3 data, 4 numerical.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::NoConvergence(_) => 4,
            _ => 3,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

/// Prefix an error message with the stage it came from.
fn in_stage<T, E: Into<CliError>>(
    stage: &str,
    result: std::result::Result<T, E>,
) -> Result<T, CliError> {
    result.map_err(|e| {
        let e = e.into();
        CliError {
            message: format!("{stage}: {}", e.message),
            code: e.code,
        }
    })
}

/// Wall-clock stage timings for the manifest.
struct Stages {
    timings: Vec<StageTiming>,
}

impl Stages {
    fn new() -> Self {
        Self {
            timings: Vec::new(),
        }
    }

    fn run<T>(
        &mut self,
        name: &str,
        f: impl FnOnce() -> Result<T, CliError>,
    ) -> Result<T, CliError> {
        let start = Instant::now();
        let out = in_stage(name, f());
        self.timings.push(StageTiming {
            stage: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_with_digest(role: &str, path: &Path) -> Result<(Vec<u8>, FileDigest), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let digest = FileDigest {
        role: role.to_string(),
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    Ok((bytes, digest))
}

/// Write atomically: temp file in the destination directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    }
    let dir = dir.unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::data(format!("cannot create temp file in {}: {e}", dir.display())))?;
    use std::io::Write;
    tmp.write_all(bytes)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::data(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

/// Verify a rerun input still matches the digest recorded in the manifest.
pub fn verify_digest(recorded: &FileDigest) -> Result<(), CliError> {
    let (_, fresh) = read_with_digest(&recorded.role, Path::new(&recorded.path))?;
    if fresh.sha256 != recorded.sha256 {
        return Err(CliError::data(format!(
            "input {} changed since the manifest was written (sha256 {} != {})",
            recorded.path, fresh.sha256, recorded.sha256
        )));
    }
    Ok(())
}

pub fn cmd_synth(params: SynthParams, out: &OutPaths) -> Result<(), CliError> {
    let mut stages = Stages::new();
    let mut manifest = Manifest::new("synth");
    manifest.out_prefix = out.prefix.display().to_string();
    manifest.synth = Some(params.clone());

    let cfg = SynthConfig {
        len: params.len,
        n_parents: params.parents,
        trend_scale: params.alpha,
        seed: params.seed,
    };
    let generated = stages.run("generate", || Ok(generate(&cfg)?))?;
    for note in &generated.regenerated {
        eprintln!("warning: {note}");
        manifest.warnings.push(note.clone());
    }

    let series_csv = generated.table.to_csv_string();
    let labels_csv = labels_to_csv(generated.table.names(), &generated.labels)?;
    stages.run("write", || {
        write_atomic(&out.series(), series_csv.as_bytes())?;
        write_atomic(&out.labels(), labels_csv.as_bytes())?;
        Ok(())
    })?;
    manifest.outputs.push(output("series_csv", &out.series()));
    manifest.outputs.push(output("labels_csv", &out.labels()));

    manifest.timings_s = stages.timings;
    write_atomic(&out.manifest(), manifest.to_json().as_bytes())?;
    eprintln!(
        "synth: wrote {} and {}",
        out.series().display(),
        out.labels().display()
    );
    Ok(())
}

fn parse_transform(name: &str) -> Result<TransformKind, CliError> {
    match name {
        "membership" => Ok(TransformKind::Membership),
        "logarithmic" => Ok(TransformKind::Logarithmic),
        other => Err(CliError::usage(format!("unknown transform {other:?}"))),
    }
}

fn parse_normalization(name: &str) -> Result<Normalization, CliError> {
    match name {
        "mean-frequency-count" => Ok(Normalization::MeanFrequencyCount),
        "none" => Ok(Normalization::None),
        other => Err(CliError::usage(format!("unknown normalization {other:?}"))),
    }
}

pub fn cmd_analyze(params: AnalyzeParams, out: &OutPaths) -> Result<(), CliError> {
    let mut stages = Stages::new();
    let mut manifest = Manifest::new("analyze");
    manifest.out_prefix = out.prefix.display().to_string();
    manifest.analyze = Some(params.clone());

    let input_path = PathBuf::from(&params.input);
    let mut table = stages.run("load", || {
        let (_, digest) = read_with_digest("series_csv", &input_path)?;
        manifest.inputs.push(digest);
        let load = load_csv(&input_path, params.drop_incomplete)?;
        for ex in &load.excluded {
            let line = format!("excluded: {}: {}", ex.name, ex.reason);
            eprintln!("{line}");
            manifest.warnings.push(line);
        }
        Ok(load.table)
    })?;
    if let Some(ms) = params.sample_interval_ms {
        table.set_sample_interval(Some(std::time::Duration::from_secs_f64(ms / 1000.0)));
    }

    if params.standardize {
        table = stages.run("standardize", || Ok(table.standardize()?))?;
    }

    enum Measured {
        Similarity(SimilarityMatrix),
        Dissimilarity(DissimilarityMatrix),
    }

    let max_lag = params
        .max_lag
        .unwrap_or_else(|| (table.len() / 4).min(table.len() - 1));
    let measured = stages.run("measure", || {
        Ok(match params.measure.as_str() {
            "amif" => {
                let cfg = AmifConfig {
                    n_f: params.nf,
                    q: params.q,
                    mi: MiConfig {
                        k: params.k,
                        distance_floor: params.distance_floor,
                    },
                    normalization: parse_normalization(&params.normalization)?,
                };
                Measured::Similarity(refine(&similarity_matrix(&table, &cfg)?))
            }
            "macc" => Measured::Similarity(refine(&baseline_similarity_matrix(
                &table,
                BaselineMetric::Macc,
                max_lag,
            )?)),
            "maccoeff" => Measured::Similarity(refine(&baseline_similarity_matrix(
                &table,
                BaselineMetric::Maccoeff,
                max_lag,
            )?)),
            "euclidean" => Measured::Dissimilarity(euclidean_dissim(&table)),
            other => return Err(CliError::usage(format!("unknown measure {other:?}"))),
        })
    })?;

    let (similarity, dissimilarity) = match measured {
        Measured::Similarity(s) => {
            let g = stages.run("transform", || {
                Ok(apply(
                    &s,
                    &TransformConfig {
                        kind: parse_transform(&params.transform)?,
                        epsilon: params.epsilon,
                    },
                )?)
            })?;
            (Some(s), g)
        }
        Measured::Dissimilarity(g) => (None, g),
    };

    let embedding = stages.run("mds", || Ok(classical_mds(&dissimilarity, params.mds_dim)?))?;
    if embedding.zeroed_axes() > 0 {
        let line = format!(
            "mds: {} of the top {} eigenvalues were non-positive; those axes are zero",
            embedding.zeroed_axes(),
            params.mds_dim
        );
        eprintln!("warning: {line}");
        manifest.warnings.push(line);
    }
    manifest.eigenvalues = Some(embedding.eigenvalues().to_vec());

    let clusters = match params.dbscan_eps {
        Some(eps) => Some(stages.run("cluster", || {
            let cfg = DbscanConfig::new(eps, params.dbscan_min_pts)?;
            Ok(dbscan(&embedding.rows(), &cfg)?)
        })?),
        None => None,
    };

    let svg = if params.svg {
        Some(stages.run("render", || {
            render_scatter(
                embedding.names(),
                &embedding.rows(),
                clusters.as_ref().map(|c| c.labels.as_slice()),
            )
        })?)
    } else {
        None
    };

    stages.run("write", || {
        if let Some(s) = &similarity {
            write_atomic(&out.similarity(), s.to_csv_string().as_bytes())?;
        }
        write_atomic(&out.dissimilarity(), dissimilarity.to_csv_string().as_bytes())?;
        let embedding_csv =
            embedding.to_csv_string(clusters.as_ref().map(|c| c.labels.as_slice()));
        write_atomic(&out.embedding(), embedding_csv.as_bytes())?;
        if let Some(svg) = &svg {
            write_atomic(&out.svg(), svg.as_bytes())?;
        }
        Ok(())
    })?;
    if similarity.is_some() {
        manifest.outputs.push(output("similarity_csv", &out.similarity()));
    }
    manifest
        .outputs
        .push(output("dissimilarity_csv", &out.dissimilarity()));
    manifest.outputs.push(output("embedding_csv", &out.embedding()));
    if svg.is_some() {
        manifest.outputs.push(output("svg", &out.svg()));
    }

    if let Some(c) = &clusters {
        eprintln!(
            "analyze: {} series, {} clusters, {} noise points",
            table.width(),
            c.n_clusters(),
            c.noise_count()
        );
    } else {
        eprintln!("analyze: {} series embedded", table.width());
    }
    manifest.timings_s = stages.timings;
    write_atomic(&out.manifest(), manifest.to_json().as_bytes())?;
    Ok(())
}

pub fn cmd_mds(params: MdsParams, out: &OutPaths) -> Result<(), CliError> {
    let mut stages = Stages::new();
    let mut manifest = Manifest::new("mds");
    manifest.out_prefix = out.prefix.display().to_string();
    manifest.mds = Some(params.clone());

    let path = PathBuf::from(&params.input);
    let g = stages.run("load", || {
        let (bytes, digest) = read_with_digest("dissimilarity_csv", &path)?;
        manifest.inputs.push(digest);
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::data("dissimilarity csv is not utf-8".to_string()))?;
        Ok(DissimilarityMatrix::from_csv_str(&text)?)
    })?;

    let embedding = stages.run("mds", || Ok(classical_mds(&g, params.dim)?))?;
    manifest.eigenvalues = Some(embedding.eigenvalues().to_vec());

    stages.run("write", || {
        write_atomic(&out.embedding(), embedding.to_csv_string(None).as_bytes())
    })?;
    manifest.outputs.push(output("embedding_csv", &out.embedding()));
    manifest.timings_s = stages.timings;
    write_atomic(&out.manifest(), manifest.to_json().as_bytes())?;
    Ok(())
}

pub fn cmd_cluster(params: ClusterParams, out: &OutPaths) -> Result<(), CliError> {
    let mut stages = Stages::new();
    let mut manifest = Manifest::new("cluster");
    manifest.out_prefix = out.prefix.display().to_string();
    manifest.cluster = Some(params.clone());

    let path = PathBuf::from(&params.input);
    let parsed = stages.run("load", || {
        let (bytes, digest) = read_with_digest("embedding_csv", &path)?;
        manifest.inputs.push(digest);
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::data("embedding csv is not utf-8".to_string()))?;
        Ok(embedding_from_csv(&text)?)
    })?;

    let assignment = stages.run("cluster", || {
        let cfg = DbscanConfig::new(params.eps, params.min_pts)?;
        Ok(dbscan(&parsed.coords, &cfg)?)
    })?;

    stages.run("write", || {
        let csv = embedding_to_csv(&parsed.names, &parsed.coords, Some(&assignment.labels));
        write_atomic(&out.embedding(), csv.as_bytes())
    })?;
    manifest.outputs.push(output("embedding_csv", &out.embedding()));
    eprintln!(
        "cluster: {} clusters, {} noise points",
        assignment.n_clusters(),
        assignment.noise_count()
    );
    manifest.timings_s = stages.timings;
    write_atomic(&out.manifest(), manifest.to_json().as_bytes())?;
    Ok(())
}

pub fn cmd_render(params: RenderParams, out: &OutPaths) -> Result<(), CliError> {
    let mut stages = Stages::new();
    let mut manifest = Manifest::new("render");
    manifest.out_prefix = out.prefix.display().to_string();
    manifest.render = Some(params.clone());

    let path = PathBuf::from(&params.input);
    let parsed = stages.run("load", || {
        let (bytes, digest) = read_with_digest("embedding_csv", &path)?;
        manifest.inputs.push(digest);
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::data("embedding csv is not utf-8".to_string()))?;
        Ok(embedding_from_csv(&text)?)
    })?;

    let svg = stages.run("render", || {
        render_scatter(&parsed.names, &parsed.coords, parsed.clusters.as_deref())
    })?;
    stages.run("write", || write_atomic(&out.svg(), svg.as_bytes()))?;
    manifest.outputs.push(output("svg", &out.svg()));
    manifest.timings_s = stages.timings;
    write_atomic(&out.manifest(), manifest.to_json().as_bytes())?;
    Ok(())
}

/// Read `name -> label` pairs from either a labels CSV (`name,label`) or an
/// embedding CSV carrying a cluster column.
fn read_label_file(path: &Path) -> Result<Vec<(String, i64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let header = text.lines().next().unwrap_or_default();
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields == ["name", "label"] {
        let (names, labels) = labels_from_csv(&text)?;
        Ok(names.into_iter().zip(labels.labels).collect())
    } else if fields.last() == Some(&"cluster") {
        let parsed = embedding_from_csv(&text)?;
        let clusters = parsed
            .clusters
            .ok_or_else(|| CliError::data("embedding csv has no cluster column".to_string()))?;
        Ok(parsed.names.into_iter().zip(clusters).collect())
    } else {
        Err(CliError::data(format!(
            "{}: expected a name,label csv or an embedding csv with a cluster column",
            path.display()
        )))
    }
}

pub fn cmd_ari(a: &Path, b: &Path) -> Result<(), CliError> {
    let left = read_label_file(a)?;
    let right = read_label_file(b)?;
    if left.len() != right.len() {
        return Err(CliError::data(format!(
            "label files disagree on series count: {} vs {}",
            left.len(),
            right.len()
        )));
    }
    let lookup: std::collections::HashMap<&str, i64> =
        right.iter().map(|(n, l)| (n.as_str(), *l)).collect();
    let mut xs = Vec::with_capacity(left.len());
    let mut ys = Vec::with_capacity(left.len());
    for (name, label) in &left {
        let other = lookup.get(name.as_str()).ok_or_else(|| {
            CliError::data(format!("series {name:?} missing from {}", b.display()))
        })?;
        xs.push(*label);
        ys.push(*other);
    }
    let ari = adjusted_rand_index(&xs, &ys)?;
    println!("{ari}");
    Ok(())
}
