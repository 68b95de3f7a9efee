//! The `pfeas` command line.
//!
//! Every command prints one JSON document (`schema_version`, `kind`, `seed`,
//! `inputs` with SHA-256 content hashes, `result`). Wall-clock times only
//! appear under keys named `timings`. Exit codes: 0 success, 1 usage,
//! 2 validation or I/O failure, 3 failed verify suite.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::baselines::{baseline_score, pearson, BaselineConfig, BaselineMethod};
use crate::catalog::{file_hash, Catalog, Role};
use crate::error::{Error, Result};
use crate::feasibility::{build_basis, feasibility, select_pretraining_data, BasisKind, OptimizerConfig};
use crate::features::{extract_features, FEATURE_NAMES};
use crate::graph::{load_edge_list, write_edge_list, Graph};
use crate::graphon::{estimate_graphon, sample_graph, EstimationConfig, Graphon, GraphonFile, Resolution};
use crate::gw::GwConfig;
use crate::verify::{run_suite, Suite};
use crate::derive_seed;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pfeas", version, about = "Graphon-based feasibility of graph pre-training data")]
pub struct Cli {
    /// Base seed; defaults to the catalog's seed (or 0 without a catalog).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output file (or directory for `sample` and `fit-basis`); stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Tuning {
    /// Entropic regularization, relative to the independent-coupling cost.
    #[arg(long, default_value_t = GwConfig::default().epsilon)]
    pub epsilon: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_steps)]
    pub max_steps: usize,
    /// Grid resolution: "auto" or a positive integer.
    #[arg(long, default_value = "auto", value_parser = parse_resolution)]
    pub resolution: Resolution,
}

#[derive(Debug, Args)]
pub struct Study {
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long)]
    pub downstream: String,
    /// Pre-training datasets (comma separated); all others by default.
    #[arg(long, value_delimiter = ',')]
    pub pretrain: Vec<String>,
    /// Permit the downstream dataset to appear among the pre-training data.
    #[arg(long)]
    pub allow_overlap: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one graphon from a dataset or from edge-list files.
    FitGraphon {
        #[arg(long, requires = "dataset")]
        catalog: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<String>,
        /// Materialize the dataset as downstream data (all ego-nets).
        #[arg(long)]
        downstream_role: bool,
        #[arg(long, num_args = 1.., conflicts_with = "catalog")]
        edgelist: Vec<PathBuf>,
        #[arg(long, default_value = "auto", value_parser = parse_resolution)]
        resolution: Resolution,
    },
    /// Build one graphon basis and write each element plus a manifest.
    FitBasis {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        basis: BasisKind,
        #[arg(long, value_delimiter = ',')]
        pretrain: Vec<String>,
        #[arg(long, default_value = "auto", value_parser = parse_resolution)]
        resolution: Resolution,
    },
    /// Feasibility score of pre-training data for a downstream dataset.
    Feasibility {
        #[command(flatten)]
        study: Study,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Rank every `budget`-sized subset of candidate datasets.
    Select {
        #[command(flatten)]
        study: Study,
        #[arg(long)]
        budget: usize,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Draw W-random graphs from a graphon file.
    Sample {
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Topological feature vectors of graphs.
    Features {
        #[arg(long, requires = "dataset")]
        catalog: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long, num_args = 1.., conflicts_with = "catalog")]
        edgelist: Vec<PathBuf>,
    },
    /// Score pre-training data with a comparison baseline.
    Baseline {
        #[command(flatten)]
        study: Study,
        #[arg(long)]
        method: BaselineMethod,
        /// Ego-net centers per node-task dataset as a fraction of its nodes.
        #[arg(long)]
        fraction: Option<f64>,
    },
    /// Pearson correlation of scores against downstream performance.
    Correlate {
        /// CSV with columns pair_id, score, downstream_performance.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Run built-in property suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
}

fn parse_resolution(s: &str) -> std::result::Result<Resolution, String> {
    if s == "auto" {
        return Ok(Resolution::Auto);
    }
    match s.parse::<usize>() {
        Ok(r) if r >= 1 => Ok(Resolution::Fixed(r)),
        _ => Err(format!("expected \"auto\" or a positive integer, got {s:?}")),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{e}");
            if !e.use_stderr() {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return EXIT_VALIDATION;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok((doc, code)) => {
            let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            let written = match (&cli.out, &cli.command) {
                (Some(path), Command::Sample { .. } | Command::FitBasis { .. }) => {
                    std::fs::write(path.join("manifest.json"), format!("{text}\n"))
                        .map_err(|e| Error::io(format!("writing manifest in {}", path.display()), e))
                }
                (Some(path), _) => std::fs::write(path, format!("{text}\n"))
                    .map_err(|e| Error::io(format!("writing {}", path.display()), e)),
                (None, _) => Ok(()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_VALIDATION;
            }
            let _ = writeln!(out, "{text}");
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn envelope(kind: &str, seed: u64, inputs: BTreeMap<String, String>, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "seed": seed,
        "inputs": inputs,
        "result": result,
    })
}

fn hashes(paths: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), file_hash(p)?)))
        .collect()
}

fn load_graphs(paths: &[PathBuf]) -> Result<Vec<Graph>> {
    paths.iter().map(|p| load_edge_list(p).map(|f| f.graph)).collect()
}

struct StudyData {
    catalog: Catalog,
    seed: u64,
    pretrain: Vec<String>,
}

fn open_study(study: &Study, seed: Option<u64>) -> Result<StudyData> {
    let catalog = Catalog::load(&study.catalog)?;
    catalog.get(&study.downstream)?;
    let pretrain: Vec<String> = if study.pretrain.is_empty() {
        catalog
            .datasets()
            .iter()
            .map(|d| d.entry.name.clone())
            .filter(|n| *n != study.downstream)
            .collect()
    } else {
        study.pretrain.clone()
    };
    if pretrain.is_empty() {
        return Err(Error::InvalidInput("no pre-training datasets".into()));
    }
    if !study.allow_overlap && pretrain.contains(&study.downstream) {
        return Err(Error::InvalidInput(format!(
            "dataset '{}' is both downstream and pre-training data (pass --allow-overlap to permit)",
            study.downstream
        )));
    }
    for name in &pretrain {
        catalog.get(name)?;
    }
    let seed = seed.unwrap_or(catalog.seed);
    Ok(StudyData {
        catalog,
        seed,
        pretrain,
    })
}

fn configs(tuning: &Tuning, seed: u64) -> (OptimizerConfig, EstimationConfig, GwConfig) {
    let opt = OptimizerConfig {
        learning_rate: tuning.lr,
        max_steps: tuning.max_steps,
        seed,
        ..OptimizerConfig::default()
    };
    let est = EstimationConfig {
        resolution: tuning.resolution,
        seed,
    };
    let gw = GwConfig {
        epsilon: tuning.epsilon,
        ..GwConfig::default()
    };
    (opt, est, gw)
}

fn study_inputs(data: &StudyData, downstream: &str) -> Result<BTreeMap<String, String>> {
    let mut names = data.pretrain.clone();
    names.push(downstream.to_string());
    data.catalog.input_hashes(&names)
}

fn graphon_document(g: &Graphon, seed: u64, inputs: &BTreeMap<String, String>) -> Value {
    let file = GraphonFile::from(g);
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "graphon",
        "seed": seed,
        "inputs": inputs,
        "resolution": file.resolution,
        "grid": file.grid,
    })
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    std::fs::write(path, format!("{text}\n")).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[derive(Debug, Deserialize)]
struct CorrelateRow {
    pair_id: String,
    score: f64,
    downstream_performance: f64,
}

#[derive(Debug, Serialize)]
struct FeatureRow {
    graph: usize,
    nodes: usize,
    edges: usize,
    features: BTreeMap<&'static str, f64>,
}

fn execute(cli: &Cli) -> Result<(Value, i32)> {
    match &cli.command {
        Command::FitGraphon {
            catalog,
            dataset,
            downstream_role,
            edgelist,
            resolution,
        } => {
            let (graphs, inputs, seed) = match (catalog, dataset) {
                (Some(c), Some(d)) => {
                    let cat = Catalog::load(c)?;
                    let seed = cli.seed.unwrap_or(cat.seed);
                    let role = if *downstream_role { Role::Downstream } else { Role::Pretrain };
                    let graphs = cat.materialize(d, role, seed)?;
                    (graphs, cat.input_hashes(&[d.clone()])?, seed)
                }
                _ if !edgelist.is_empty() => (load_graphs(edgelist)?, hashes(edgelist)?, cli.seed.unwrap_or(0)),
                _ => {
                    return Err(Error::InvalidInput(
                        "fit-graphon needs --catalog with --dataset, or --edgelist".into(),
                    ))
                }
            };
            let refs: Vec<&Graph> = graphs.iter().collect();
            let est = EstimationConfig {
                resolution: *resolution,
                seed,
            };
            let g = estimate_graphon(&refs, &est)?;
            Ok((graphon_document(&g, seed, &inputs), EXIT_OK))
        }
        Command::FitBasis {
            catalog,
            basis,
            pretrain,
            resolution,
        } => {
            let cat = Catalog::load(catalog)?;
            let seed = cli.seed.unwrap_or(cat.seed);
            let names: Vec<String> = if pretrain.is_empty() {
                cat.datasets().iter().map(|d| d.entry.name.clone()).collect()
            } else {
                pretrain.clone()
            };
            let splits = cat.pretrain_splits(&names, seed)?;
            let opt = OptimizerConfig {
                seed,
                ..OptimizerConfig::default()
            };
            let est = EstimationConfig {
                resolution: *resolution,
                seed,
            };
            let b = build_basis(&splits, *basis, &opt, &est)?;
            let inputs = cat.input_hashes(&names)?;
            let files: Vec<String> = (0..b.len()).map(|i| format!("{}-{i}.json", basis.as_str())).collect();
            if let Some(dir) = &cli.out {
                ensure_dir(dir)?;
                for (elem, name) in b.elements.iter().zip(&files) {
                    write_json(&dir.join(name), &graphon_document(elem, seed, &inputs))?;
                }
            }
            let result = json!({
                "basis": basis,
                "resolution": b.resolution(),
                "elements": files,
                "split_labels": b.split_labels,
            });
            Ok((envelope("basis_manifest", seed, inputs, result), EXIT_OK))
        }
        Command::Feasibility { study, tuning } => {
            let data = open_study(study, cli.seed)?;
            let (opt, est, gw) = configs(tuning, data.seed);
            let splits = data.catalog.pretrain_splits(&data.pretrain, data.seed)?;
            let down = data.catalog.materialize(&study.downstream, Role::Downstream, data.seed)?;
            let report = feasibility(&splits, &down, &opt, &est, &gw)?;
            let mut result = serde_json::to_value(&report)?;
            result["pretrain"] = json!(data.pretrain);
            result["downstream"] = json!(study.downstream);
            let inputs = study_inputs(&data, &study.downstream)?;
            Ok((envelope("feasibility", data.seed, inputs, result), EXIT_OK))
        }
        Command::Select { study, budget, tuning } => {
            let data = open_study(study, cli.seed)?;
            let (opt, est, gw) = configs(tuning, data.seed);
            let mut candidates = BTreeMap::new();
            for name in &data.pretrain {
                candidates.insert(name.clone(), data.catalog.materialize(name, Role::Pretrain, data.seed)?);
            }
            let down = data.catalog.materialize(&study.downstream, Role::Downstream, data.seed)?;
            let rows = select_pretraining_data(&candidates, &down, *budget, &opt, &est, &gw)?;
            let result = json!({
                "downstream": study.downstream,
                "budget": budget,
                "rows": rows,
            });
            let inputs = study_inputs(&data, &study.downstream)?;
            Ok((envelope("selection", data.seed, inputs, result), EXIT_OK))
        }
        Command::Sample { graphon, n, count } => {
            let f = Graphon::load(graphon)?;
            if *n == 0 {
                return Err(Error::InvalidInput("--n must be >= 1".into()));
            }
            let seed = cli.seed.unwrap_or(0);
            let names: Vec<String> = (0..*count).map(|i| format!("graph-{i:04}.edgelist")).collect();
            let mut densities = Vec::with_capacity(*count);
            if let Some(dir) = &cli.out {
                ensure_dir(dir)?;
            }
            for (i, name) in names.iter().enumerate() {
                let g = sample_graph(&f, *n, derive_seed(seed, i as u64));
                densities.push(crate::features::density(&g));
                if let Some(dir) = &cli.out {
                    write_edge_list(&g, dir.join(name))?;
                }
            }
            let result = json!({
                "graphon": graphon.display().to_string(),
                "n": n,
                "count": count,
                "files": names,
                "densities": densities,
            });
            Ok((envelope("sample_manifest", seed, hashes(&[graphon.clone()])?, result), EXIT_OK))
        }
        Command::Features {
            catalog,
            dataset,
            edgelist,
        } => {
            let (graphs, inputs, seed) = match (catalog, dataset) {
                (Some(c), Some(d)) => {
                    let cat = Catalog::load(c)?;
                    let seed = cli.seed.unwrap_or(cat.seed);
                    (cat.materialize(d, Role::Pretrain, seed)?, cat.input_hashes(&[d.clone()])?, seed)
                }
                _ if !edgelist.is_empty() => (load_graphs(edgelist)?, hashes(edgelist)?, cli.seed.unwrap_or(0)),
                _ => {
                    return Err(Error::InvalidInput(
                        "features needs --catalog with --dataset, or --edgelist".into(),
                    ))
                }
            };
            let rows: Vec<FeatureRow> = graphs
                .iter()
                .enumerate()
                .map(|(i, g)| FeatureRow {
                    graph: i,
                    nodes: g.node_count(),
                    edges: g.edge_count(),
                    features: FEATURE_NAMES.iter().copied().zip(extract_features(g).0).collect(),
                })
                .collect();
            Ok((envelope("features", seed, inputs, json!({ "graphs": rows })), EXIT_OK))
        }
        Command::Baseline {
            study,
            method,
            fraction,
        } => {
            let data = open_study(study, cli.seed)?;
            let mut pre = Vec::new();
            for name in &data.pretrain {
                pre.extend(data.catalog.materialize_with(name, Role::Pretrain, data.seed, *fraction)?);
            }
            let down = data
                .catalog
                .materialize_with(&study.downstream, Role::Downstream, data.seed, *fraction)?;
            let measure = baseline_score(&pre, &down, *method, &BaselineConfig::default())?;
            let inputs = study_inputs(&data, &study.downstream)?;
            let result = json!({
                "method": measure.method,
                "value": measure.value,
                "pretrain": data.pretrain,
                "downstream": study.downstream,
            });
            Ok((envelope("baseline", data.seed, inputs, result), EXIT_OK))
        }
        Command::Correlate { csv: path } => {
            let mut reader = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_path(path)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            let rows: Vec<CorrelateRow> = reader
                .deserialize()
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
            let perf: Vec<f64> = rows.iter().map(|r| r.downstream_performance).collect();
            let r = pearson(&scores, &perf)?;
            let result = json!({
                "pairs": rows.iter().map(|r| r.pair_id.clone()).collect::<Vec<_>>(),
                "pearson": r,
            });
            Ok((envelope("correlation", cli.seed.unwrap_or(0), hashes(&[path.clone()])?, result), EXIT_OK))
        }
        Command::Verify { suite } => {
            let seed = cli.seed.unwrap_or(0);
            let report = run_suite(*suite, seed)?;
            let code = if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED };
            Ok((serde_json::to_value(&report)?, code))
        }
    }
}

/// Removes every `timings` key, recursively.
pub fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timings");
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}
