//! Dataset catalogs.
//!
//! A catalog is a TOML file listing datasets:
//!
//! ```toml
//! seed = 7
//!
//! [ego]
//! hops = 2
//! pretrain_sample = 1000
//! downstream_sample = "all"
//!
//! [[datasets]]
//! name = "academia"
//! domain = "academic"
//! task = "node"
//! paths = ["academia.edgelist"]
//!
//! [[datasets]]
//! name = "zinc"
//! domain = "molecules"
//! task = "graph"
//! paths = ["zinc/"]
//! ```
//!
//! Relative paths resolve against the catalog's directory. A directory path
//! must contain an `index.txt` naming one edge-list file per line. Node-task
//! datasets hold exactly one graph and are turned into ego-networks; graph-task
//! datasets contribute every graph as-is.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, sample_ego_networks, EgoNetConfig, Graph, SampleSize};

pub const INDEX_FILE: &str = "index.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Node,
    Graph,
}

/// Which side of a study a dataset is materialized for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Pretrain,
    Downstream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoDefaults {
    #[serde(default = "default_hops")]
    pub hops: usize,
    #[serde(default = "default_pretrain_sample")]
    pub pretrain_sample: SampleSize,
    #[serde(default = "default_downstream_sample")]
    pub downstream_sample: SampleSize,
}

fn default_hops() -> usize {
    2
}

fn default_pretrain_sample() -> SampleSize {
    SampleSize::Count(1000)
}

fn default_downstream_sample() -> SampleSize {
    SampleSize::All
}

impl Default for EgoDefaults {
    fn default() -> Self {
        EgoDefaults {
            hops: default_hops(),
            pretrain_sample: default_pretrain_sample(),
            downstream_sample: default_downstream_sample(),
        }
    }
}

/// Per-dataset ego-network overrides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoOverride {
    pub hops: Option<usize>,
    pub sample: Option<SampleSize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub domain: String,
    pub task: Task,
    pub paths: Vec<PathBuf>,
    #[serde(default)]
    pub ego: Option<EgoOverride>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    ego: EgoDefaults,
    #[serde(default)]
    datasets: Vec<DatasetEntry>,
}

/// A dataset with its graph files resolved.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub entry: DatasetEntry,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    pub path: PathBuf,
    pub seed: u64,
    pub ego: EgoDefaults,
    datasets: Vec<Dataset>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of a file's contents, hex encoded.
pub fn file_hash(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(sha256_hex(&bytes))
}

fn name_stream(name: &str) -> u64 {
    let digest = Sha256::digest(name.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn index_files(dir: &Path, dataset: &str) -> Result<Vec<PathBuf>> {
    let index = dir.join(INDEX_FILE);
    let text = std::fs::read_to_string(&index).map_err(|e| {
        Error::Catalog(format!(
            "dataset '{dataset}': cannot read {}: {e}",
            index.display()
        ))
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| dir.join(l))
        .collect())
}

impl Catalog {
    /// Loads and validates a catalog; every referenced file must exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Catalog> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading catalog {}", path.display()), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Catalog::parse(&text, base, path)
    }

    /// Parses catalog text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Catalog> {
        let file: CatalogFile = toml::from_str(text)
            .map_err(|e| Error::Catalog(format!("{}: {e}", origin.display())))?;
        let mut names = BTreeSet::new();
        let mut datasets = Vec::with_capacity(file.datasets.len());
        for entry in file.datasets {
            if !names.insert(entry.name.clone()) {
                return Err(Error::Catalog(format!("duplicate dataset name '{}'", entry.name)));
            }
            if entry.paths.is_empty() {
                return Err(Error::Catalog(format!("dataset '{}' lists no paths", entry.name)));
            }
            let mut files = Vec::new();
            for p in &entry.paths {
                let full = base.join(p);
                if full.is_dir() {
                    files.extend(index_files(&full, &entry.name)?);
                } else {
                    files.push(full);
                }
            }
            if let Some(missing) = files.iter().find(|f| !f.is_file()) {
                return Err(Error::Catalog(format!(
                    "dataset '{}': missing file {}",
                    entry.name,
                    missing.display()
                )));
            }
            if entry.task == Task::Node && files.len() != 1 {
                return Err(Error::Catalog(format!(
                    "node-task dataset '{}' must have exactly one graph file, found {}",
                    entry.name,
                    files.len()
                )));
            }
            if let Some(EgoOverride { hops: Some(0), .. }) = entry.ego {
                return Err(Error::Catalog(format!("dataset '{}': hops must be >= 1", entry.name)));
            }
            datasets.push(Dataset { entry, files });
        }
        if file.ego.hops == 0 {
            return Err(Error::Catalog("ego hops must be >= 1".into()));
        }
        Ok(Catalog {
            path: origin.to_path_buf(),
            seed: file.seed,
            ego: file.ego,
            datasets,
        })
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    pub fn get(&self, name: &str) -> Result<&Dataset> {
        self.datasets
            .iter()
            .find(|d| d.entry.name == name)
            .ok_or_else(|| Error::Catalog(format!("no dataset named '{name}'")))
    }

    /// Ego-network settings for a node-task dataset.
    pub fn ego_config(&self, dataset: &Dataset, role: Role, seed: u64) -> EgoNetConfig {
        let over = dataset.entry.ego.unwrap_or_default();
        let default_sample = match role {
            Role::Pretrain => self.ego.pretrain_sample,
            Role::Downstream => self.ego.downstream_sample,
        };
        EgoNetConfig {
            hops: over.hops.unwrap_or(self.ego.hops),
            sample_size: over.sample.unwrap_or(default_sample),
            seed: derive_seed(seed, name_stream(&dataset.entry.name)),
        }
    }

    /// Loads a dataset's graphs: ego-networks for node tasks, every graph for
    /// graph tasks.
    pub fn materialize(&self, name: &str, role: Role, seed: u64) -> Result<Vec<Graph>> {
        self.materialize_with(name, role, seed, None)
    }

    /// Like [`Catalog::materialize`], but node-task datasets sample ego-nets
    /// around `ceil(fraction * n)` centers when `fraction` is given.
    pub fn materialize_with(
        &self,
        name: &str,
        role: Role,
        seed: u64,
        fraction: Option<f64>,
    ) -> Result<Vec<Graph>> {
        if let Some(f) = fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidInput(format!("fraction must be in (0, 1], got {f}")));
            }
        }
        let dataset = self.get(name)?;
        let with_name = |e: Error| Error::Catalog(format!("dataset '{name}': {e}"));
        let graphs = dataset
            .files
            .iter()
            .map(|f| load_edge_list(f).map(|file| file.graph))
            .collect::<Result<Vec<_>>>()
            .map_err(with_name)?;
        match dataset.entry.task {
            Task::Graph => Ok(graphs),
            Task::Node => {
                let mut cfg = self.ego_config(dataset, role, seed);
                if let Some(f) = fraction {
                    let n = graphs[0].node_count();
                    cfg.sample_size = SampleSize::Count(((f * n as f64).ceil() as usize).max(1));
                }
                sample_ego_networks(&graphs[0], &cfg).map_err(with_name)
            }
        }
    }

    /// Pre-training graphs grouped by domain label.
    pub fn pretrain_splits(&self, names: &[String], seed: u64) -> Result<BTreeMap<String, Vec<Graph>>> {
        let mut splits: BTreeMap<String, Vec<Graph>> = BTreeMap::new();
        for name in names {
            let domain = self.get(name)?.entry.domain.clone();
            let graphs = self.materialize(name, Role::Pretrain, seed)?;
            splits.entry(domain).or_default().extend(graphs);
        }
        Ok(splits)
    }

    /// Content hashes of the catalog file and every graph file of `names`,
    /// keyed by path as written.
    pub fn input_hashes(&self, names: &[String]) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        out.insert(self.path.display().to_string(), file_hash(&self.path)?);
        for name in names {
            for f in &self.get(name)?.files {
                out.insert(f.display().to_string(), file_hash(f)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn fixture() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "big.edgelist", "0 1\n1 2\n2 3\n3 0\n0 2\n");
        std::fs::create_dir(dir.path().join("mols")).unwrap();
        write(&dir.path().join("mols"), "a.edgelist", "0 1\n1 2\n");
        write(&dir.path().join("mols"), "b.edgelist", "0 1\n1 2\n2 0\n");
        write(&dir.path().join("mols"), INDEX_FILE, "a.edgelist\n# skipped\nb.edgelist\n");
        dir
    }

    const GOOD: &str = r#"
seed = 3
[ego]
hops = 1
pretrain_sample = 2

[[datasets]]
name = "big"
domain = "social"
task = "node"
paths = ["big.edgelist"]

[[datasets]]
name = "mols"
domain = "chem"
task = "graph"
paths = ["mols"]
"#;

    #[test]
    fn loads_and_materializes() {
        let dir = fixture();
        let cat = Catalog::parse(GOOD, dir.path(), &write(dir.path(), "c.toml", GOOD)).unwrap();
        assert_eq!(cat.datasets().len(), 2);
        assert_eq!(cat.materialize("mols", Role::Pretrain, 0).unwrap().len(), 2);
        assert_eq!(cat.materialize("big", Role::Pretrain, 0).unwrap().len(), 2);
        assert_eq!(cat.materialize("big", Role::Downstream, 0).unwrap().len(), 4);
        assert_eq!(cat.materialize_with("big", Role::Downstream, 0, Some(0.5)).unwrap().len(), 2);
        let a = cat.materialize("big", Role::Pretrain, 5).unwrap();
        let b = cat.materialize("big", Role::Pretrain, 5).unwrap();
        assert_eq!(a, b);
        let hashes = cat.input_hashes(&["mols".into()]).unwrap();
        assert_eq!(hashes.len(), 3);
    }

    #[test]
    fn rejects_bad_catalogs() {
        let dir = fixture();
        let origin = dir.path().join("c.toml");
        let dup = format!("{GOOD}\n[[datasets]]\nname = \"big\"\ndomain = \"x\"\ntask = \"graph\"\npaths = [\"big.edgelist\"]\n");
        assert!(Catalog::parse(&dup, dir.path(), &origin).is_err());
        let missing = GOOD.replace("big.edgelist", "nope.edgelist");
        assert!(Catalog::parse(&missing, dir.path(), &origin).is_err());
        let multi = GOOD.replace("task = \"graph\"", "task = \"node\"");
        assert!(Catalog::parse(&multi, dir.path(), &origin).is_err());
    }
}
