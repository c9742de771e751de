//! End-to-end orchestration: load two collections, compute barcodes, embed,
//! test, report.
//!
//! Each stage is a public function so the CLI can run them one at a time
//! over intermediate files and arrive at the same result.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result, StageExt};
use crate::io::{self, EmbeddingDump, Manifest};
use crate::par;
use crate::persistence::{build_rips_filtration, compute_barcode, Barcode, EssentialPolicy};
use crate::synthgeo::{pairwise_distances, DistanceMatrix, PointCloud};
use crate::tropical::{
    check_regularized, clip_to_regularized, coordinate_count, regularization_parameter,
    sufficient_statistic, MPolicy, RegularizationParam, SortedEmbedding,
};
use crate::twosample::{permutation_test, Sample, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    #[default]
    Pointclouds,
    DistanceMatrices,
    Barcodes,
}

impl InputKind {
    fn extension(self) -> &'static str {
        match self {
            InputKind::Pointclouds | InputKind::DistanceMatrices => "csv",
            InputKind::Barcodes => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AutoKeyword {
    Auto,
}

/// Largest filtration scale: a fixed value, or `auto` for the enclosing
/// radius of each object (past which the Rips complex is a cone).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaxScale {
    Value(f64),
    #[default]
    #[serde(with = "auto_keyword")]
    Auto,
}

mod auto_keyword {
    use super::AutoKeyword;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        AutoKeyword::Auto.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        AutoKeyword::deserialize(d).map(|_| ())
    }
}

impl std::str::FromStr for MaxScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(MaxScale::Auto);
        }
        s.parse::<f64>()
            .map(MaxScale::Value)
            .map_err(|_| Error::Parameter(format!("max scale `{s}` is neither `auto` nor a number")))
    }
}

/// Rips and persistence settings shared by every object of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarcodeParams {
    pub homology_dim: usize,
    pub max_dim: usize,
    pub max_scale: MaxScale,
    pub essential_policy: EssentialPolicy,
}

impl BarcodeParams {
    pub fn new(homology_dim: usize) -> Self {
        BarcodeParams {
            homology_dim,
            max_dim: homology_dim + 1,
            max_scale: MaxScale::Auto,
            essential_policy: EssentialPolicy::Truncate,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_dim <= self.homology_dim {
            return Err(Error::Config(format!(
                "max_dim ({}) must exceed homology_dim ({})",
                self.max_dim, self.homology_dim
            )));
        }
        if let MaxScale::Value(v) = self.max_scale {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("max_scale must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// How the regularization parameter m is chosen and enforced.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmbedParams {
    pub m_policy: MPolicy,
    /// Overrides the policy when set.
    pub m: Option<u64>,
    /// Clip offending bars instead of failing.
    pub clip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub a: PathBuf,
    pub b: PathBuf,
    #[serde(default)]
    pub kind: InputKind,
    #[serde(default = "default_homology_dim")]
    pub homology_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    #[serde(default)]
    pub max_scale: MaxScale,
    #[serde(default)]
    pub essential_policy: EssentialPolicy,
    #[serde(default)]
    pub m_policy: MPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default)]
    pub clip: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Directory receiving `a.json` and `b.json` embedding dumps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings_out: Option<PathBuf>,
    /// Relative paths are resolved against this directory.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_homology_dim() -> usize {
    1
}

fn default_alpha() -> f64 {
    0.05
}

fn default_permutations() -> usize {
    999
}

impl PipelineConfig {
    pub fn new(a: impl Into<PathBuf>, b: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            a: a.into(),
            b: b.into(),
            kind: InputKind::default(),
            homology_dim: default_homology_dim(),
            max_dim: None,
            max_scale: MaxScale::Auto,
            essential_policy: EssentialPolicy::default(),
            m_policy: MPolicy::default(),
            m: None,
            clip: false,
            alpha: default_alpha(),
            permutations: default_permutations(),
            seed: 0,
            out: None,
            embeddings_out: None,
            base_dir: None,
        }
    }

    /// Reads a JSON config. Relative paths inside it are taken relative to
    /// the config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = io::read_to_string(path)?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text).map_err(|e| {
            let msg = e.to_string();
            if e.is_data() {
                Error::Config(format!("{}: {msg}", path.display()))
            } else {
                Error::parse(path, e.line(), msg)
            }
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn barcode_params(&self) -> BarcodeParams {
        BarcodeParams {
            homology_dim: self.homology_dim,
            max_dim: self.max_dim.unwrap_or(self.homology_dim + 1),
            max_scale: self.max_scale,
            essential_policy: self.essential_policy,
        }
    }

    pub fn embed_params(&self) -> EmbedParams {
        EmbedParams {
            m_policy: self.m_policy,
            m: self.m,
            clip: self.clip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.permutations == 0 {
            return Err(Error::Config("permutations must be positive".into()));
        }
        if self.m == Some(0) {
            return Err(Error::Config("m must be at least 1".into()));
        }
        self.barcode_params().validate()?;
        for p in [&self.a, &self.b] {
            let p = self.resolve(p);
            if !p.exists() {
                return Err(Error::Config(format!("input {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = io::canonical_json(&serde_json::to_value(self).expect("serializable"));
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objects {
    PointClouds(Vec<PointCloud>),
    DistanceMatrices(Vec<DistanceMatrix>),
    Barcodes(Vec<Barcode>),
}

impl Objects {
    pub fn len(&self) -> usize {
        match self {
            Objects::PointClouds(v) => v.len(),
            Objects::DistanceMatrices(v) => v.len(),
            Objects::Barcodes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parsed objects in manifest order, with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    pub labels: Vec<String>,
    pub objects: Objects,
}

fn load_all<T: Send>(entries: &[(PathBuf, String)], read: fn(&Path) -> Result<T>) -> Result<Vec<T>> {
    par::map_collect(entries, |_, (p, _)| read(p))
        .into_iter()
        .collect()
}

/// Loads a collection from a manifest file or a directory.
pub fn load_collection(path: &Path, kind: InputKind) -> Result<Collection> {
    let entries = Manifest::resolve(path, kind.extension())?;
    let labels = entries.iter().map(|(_, l)| l.clone()).collect();
    let objects = match kind {
        InputKind::Pointclouds => Objects::PointClouds(
            load_all(&entries, io::read_point_cloud_csv)?
                .into_iter()
                .zip(&entries)
                .map(|(pc, (_, label))| pc.with_label(label.clone()))
                .collect(),
        ),
        InputKind::DistanceMatrices => {
            Objects::DistanceMatrices(load_all(&entries, io::read_distance_matrix_csv)?)
        }
        InputKind::Barcodes => Objects::Barcodes(load_all(&entries, io::read_barcode_json)?),
    };
    Ok(Collection { labels, objects })
}

/// Barcode of one distance matrix.
pub fn barcode_of(dm: &DistanceMatrix, params: &BarcodeParams) -> Result<Barcode> {
    params.validate()?;
    let max_scale = match params.max_scale {
        MaxScale::Value(v) => v,
        MaxScale::Auto => dm.enclosing_radius(),
    };
    if max_scale <= 0.0 {
        // A single point or all points coincident: nothing but one class.
        return Barcode::new(params.homology_dim, Vec::new());
    }
    let f = build_rips_filtration(dm, params.max_dim, max_scale)?;
    compute_barcode(&f, params.homology_dim, params.essential_policy)
}

/// Barcodes of every object, in order. Barcode inputs are passed through
/// after checking their homology dimension.
pub fn compute_barcodes(objects: &Objects, params: &BarcodeParams) -> Result<Vec<Barcode>> {
    params.validate()?;
    match objects {
        Objects::PointClouds(pcs) => par::map_collect(pcs, |_, pc| barcode_of(&pairwise_distances(pc), params))
            .into_iter()
            .collect(),
        Objects::DistanceMatrices(dms) => par::map_collect(dms, |_, dm| barcode_of(dm, params))
            .into_iter()
            .collect(),
        Objects::Barcodes(bcs) => {
            if let Some((i, b)) = bcs
                .iter()
                .enumerate()
                .find(|(_, b)| b.homology_dim() != params.homology_dim)
            {
                return Err(Error::Input(format!(
                    "barcode {i} has dimension {}, expected {}",
                    b.homology_dim(),
                    params.homology_dim
                )));
            }
            Ok(bcs.clone())
        }
    }
}

/// Sorted embeddings of several collections sharing one n and one m.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedded {
    pub n: usize,
    pub m: RegularizationParam,
    pub embeddings: Vec<Vec<SortedEmbedding>>,
    /// Number of clipped barcodes in each collection.
    pub clipped: Vec<usize>,
}

impl Embedded {
    pub fn d(&self) -> usize {
        coordinate_count(self.n)
    }

    pub fn dump(&self, collection: usize) -> EmbeddingDump {
        EmbeddingDump {
            n: self.n,
            m: self.m.get(),
            d: self.d(),
            vectors: self.embeddings[collection]
                .iter()
                .map(|e| e.values().to_vec())
                .collect(),
        }
    }
}

/// The pooled n: the largest positive-bar count, at least 1.
pub fn pooled_n(collections: &[Vec<Barcode>]) -> usize {
    collections
        .iter()
        .flatten()
        .map(Barcode::positive_count)
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Chooses n and m over all collections together, enforces `b <= mℓ` and
/// embeds every barcode.
pub fn embed_collections(collections: &[Vec<Barcode>], params: &EmbedParams) -> Result<Embedded> {
    let n = pooled_n(collections);
    let all: Vec<Barcode> = collections.iter().flatten().cloned().collect();
    let m = match params.m {
        Some(m) => RegularizationParam::new(m)?,
        None => regularization_parameter(&all, params.m_policy)?,
    };
    let mut clipped = Vec::with_capacity(collections.len());
    let mut prepared = Vec::with_capacity(collections.len());
    for bcs in collections {
        let mut count = 0;
        let mut out = Vec::with_capacity(bcs.len());
        for b in bcs {
            if check_regularized(b, m) {
                out.push(b.clone());
            } else if params.clip {
                count += 1;
                out.push(clip_to_regularized(b, m));
            } else {
                // reports how far m falls short
                sufficient_statistic(b, n, m)?;
                unreachable!("an unregularized barcode was embedded");
            }
        }
        clipped.push(count);
        prepared.push(out);
    }
    let embeddings = prepared
        .iter()
        .map(|bcs| {
            par::map_collect(bcs, |_, b| sufficient_statistic(b, n, m))
                .into_iter()
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Embedded {
        n,
        m,
        embeddings,
        clipped,
    })
}

/// Permutation test between two embedded collections.
pub fn test_embeddings(
    a: &[SortedEmbedding],
    b: &[SortedEmbedding],
    alpha: f64,
    permutations: usize,
    seed: u64,
) -> Result<TestResult> {
    let s1 = Sample::from_embeddings(a)?;
    let s2 = Sample::from_embeddings(b)?;
    permutation_test(&s1, &s2, alpha, permutations, seed)
}

/// Barcode statistics of one collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionSummary {
    pub count: usize,
    pub total_bars: usize,
    pub max_positive_bars: usize,
    pub mean_positive_bars: f64,
    pub max_persistence: f64,
    pub clipped: usize,
}

impl CollectionSummary {
    pub fn of(barcodes: &[Barcode], clipped: usize) -> Self {
        let positive: Vec<usize> = barcodes.iter().map(Barcode::positive_count).collect();
        CollectionSummary {
            count: barcodes.len(),
            total_bars: barcodes.iter().map(Barcode::len).sum(),
            max_positive_bars: positive.iter().copied().max().unwrap_or(0),
            mean_positive_bars: if barcodes.is_empty() {
                0.0
            } else {
                positive.iter().sum::<usize>() as f64 / barcodes.len() as f64
            },
            max_persistence: barcodes
                .iter()
                .flat_map(|b| b.bars())
                .map(|b| b.persistence())
                .fold(0.0, f64::max),
            clipped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collections {
    pub a: CollectionSummary,
    pub b: CollectionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub result: TestResult,
    pub n: usize,
    pub m: u64,
    pub d: usize,
    pub collections: Collections,
    pub version: String,
    pub config: PipelineConfig,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<[PathBuf; 2]>,
}

/// Runs every stage and writes the requested outputs.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Report> {
    config.validate().stage("config")?;
    let params = config.barcode_params();
    let mut barcodes = Vec::with_capacity(2);
    for (name, path) in [("a", &config.a), ("b", &config.b)] {
        let collection = load_collection(&config.resolve(path), config.kind)
            .stage(if name == "a" { "load a" } else { "load b" })?;
        barcodes.push(compute_barcodes(&collection.objects, &params).stage("persistence")?);
    }
    let embedded = embed_collections(&barcodes, &config.embed_params()).stage("embedding")?;
    let result = test_embeddings(
        &embedded.embeddings[0],
        &embedded.embeddings[1],
        config.alpha,
        config.permutations,
        config.seed,
    )
    .stage("test")?;

    let embeddings = match &config.embeddings_out {
        Some(dir) => {
            let dir = config.resolve(dir);
            io::ensure_dir(&dir).stage("report")?;
            let paths = [dir.join("a.json"), dir.join("b.json")];
            for (i, p) in paths.iter().enumerate() {
                embedded.dump(i).write(p).stage("report")?;
            }
            Some(paths)
        }
        None => None,
    };
    let report = Report {
        result,
        n: embedded.n,
        m: embedded.m.get(),
        d: embedded.d(),
        collections: Collections {
            a: CollectionSummary::of(&barcodes[0], embedded.clipped[0]),
            b: CollectionSummary::of(&barcodes[1], embedded.clipped[1]),
        },
        version: crate::VERSION.to_string(),
        config: config.clone(),
        config_hash: config.hash(),
        embeddings,
    };
    if let Some(out) = &config.out {
        emit_report(&report, &config.resolve(out)).stage("report")?;
    }
    Ok(report)
}

/// Writes the report as canonical JSON.
pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    let value = serde_json::to_value(report).expect("serializable");
    io::write_string(path, &io::canonical_json(&value))
}
