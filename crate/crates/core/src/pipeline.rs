//! End-to-end runs driven by one declarative configuration file.
//!
//! Relative paths in the configuration resolve against the directory that
//! contains it. Nothing is read from the environment.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::efc::{run_efc, EfcConfig, EfcError};
use crate::ingest::{self, AggregationOrder, IngestError};
use crate::model::{
    rank_descending, BinaryBipartiteMatrix, FitnessResult, ImportanceTable, LabelTable, Level, OccupationHierarchy,
    ProjectionKind, RelatednessMatrix, ValidatedNetwork, WageTable,
};
use crate::nullmodel::{self, NullModelError, ValidationConfig, DEFAULT_TOLERANCE};
use crate::projection::{self, CoherenceMap, ProjectionError};
use crate::report::{self, GridSpec, HeatmapPoint, Report, ReportError, ReportRow};

/// Fitness below this value is flagged as vanishing.
pub const VANISHING_FITNESS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineError {
    pub stage: &'static str,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    fn new(stage: &'static str, kind: ErrorKind, message: impl fmt::Display) -> Self {
        Self {
            stage,
            kind,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

fn ingest_error(stage: &'static str, e: IngestError) -> PipelineError {
    let kind = match e {
        IngestError::MissingHierarchy(_) => ErrorKind::Config,
        _ => ErrorKind::Data,
    };
    PipelineError::new(stage, kind, e)
}

fn efc_error(e: EfcError) -> PipelineError {
    let kind = match e {
        EfcError::InvalidConfig(_) => ErrorKind::Config,
        EfcError::EmptyJob(_) | EfcError::EmptySkill(_) | EfcError::DimensionMismatch { .. } => ErrorKind::Data,
        _ => ErrorKind::Numerical,
    };
    PipelineError::new("fitness", kind, e)
}

fn null_error(stage: &'static str, e: NullModelError) -> PipelineError {
    let kind = match e {
        NullModelError::InvalidConfig(_) => ErrorKind::Config,
        NullModelError::NotConverged { .. } => ErrorKind::Numerical,
        _ => ErrorKind::Data,
    };
    PipelineError::new(stage, kind, e)
}

fn projection_error(stage: &'static str, e: ProjectionError) -> PipelineError {
    PipelineError::new(stage, ErrorKind::Data, e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub importance: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wages: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

/// Aggregation level used by each stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Levels {
    pub fitness: Level,
    pub jobs_projection: Level,
    pub skills_projection: Level,
}

impl Default for Levels {
    fn default() -> Self {
        Self {
            fitness: Level::Detailed,
            jobs_projection: Level::Detailed,
            skills_projection: Level::Detailed,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceOptions {
    /// Use the validated skill network instead of the raw projection.
    pub use_validated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    #[serde(default)]
    pub levels: Levels,
    #[serde(default)]
    pub aggregation_order: AggregationOrder,
    #[serde(default)]
    pub efc: EfcConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub coherence: CoherenceOptions,
    pub output: PathBuf,
    #[serde(skip)]
    base_dir: PathBuf,
    #[serde(skip)]
    output_from_flag: bool,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Sets the fitness and jobs-projection levels.
    pub level: Option<Level>,
    pub samples: Option<usize>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::new("config", ErrorKind::Config, format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| PipelineError::new("config", ErrorKind::Config, format!("{}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    /// Parses configuration text whose relative paths resolve against
    /// `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut config: RunConfig =
            toml::from_str(text).map_err(|e| PipelineError::new("config", ErrorKind::Config, e))?;
        config.base_dir = base_dir.to_path_buf();
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.validation.seed = seed;
        }
        if let Some(level) = o.level {
            self.levels.fitness = level;
            self.levels.jobs_projection = level;
        }
        if let Some(n) = o.samples {
            self.validation.sample_count = n;
        }
        if let Some(t) = o.threshold {
            self.validation.threshold = t;
        }
        if let Some(out) = &o.out {
            // Flag paths are relative to the working directory, not the file.
            self.output = out.clone();
            self.output_from_flag = true;
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        if self.output_from_flag {
            self.output.clone()
        } else {
            self.resolve(&self.output)
        }
    }

    fn needs_hierarchy(&self) -> bool {
        [self.levels.fitness, self.levels.jobs_projection, self.levels.skills_projection]
            .iter()
            .any(|&l| l != Level::Detailed)
    }

    /// Fails fast on anything detectable before computation starts.
    pub fn check(&self) -> Result<(), PipelineError> {
        let cfg = |m: String| PipelineError::new("config", ErrorKind::Config, m);
        self.efc.validate().map_err(|e| cfg(e.to_string()))?;
        self.validation.validate().map_err(|e| cfg(e.to_string()))?;
        let named = [
            ("importance", Some(&self.inputs.importance)),
            ("hierarchy", self.inputs.hierarchy.as_ref()),
            ("wages", self.inputs.wages.as_ref()),
            ("labels", self.inputs.labels.as_ref()),
        ];
        for (name, path) in named {
            if let Some(p) = path {
                let full = self.resolve(p);
                if !full.is_file() {
                    return Err(cfg(format!("{name} file {} does not exist", full.display())));
                }
            }
        }
        if self.needs_hierarchy() && self.inputs.hierarchy.is_none() {
            return Err(cfg("a level above detailed needs a hierarchy file".into()));
        }
        Ok(())
    }
}

/// An input file's bytes and digest.
struct Loaded {
    bytes: Vec<u8>,
    sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn load(config: &RunConfig, p: &Path, stage: &'static str) -> Result<Loaded, PipelineError> {
    let full = config.resolve(p);
    let bytes =
        fs::read(&full).map_err(|e| PipelineError::new(stage, ErrorKind::Config, format!("{}: {e}", full.display())))?;
    let sha256 = sha256_hex(&bytes);
    Ok(Loaded { bytes, sha256 })
}

/// A level's binary matrix after dropping empty rows and columns.
#[derive(Debug, Clone)]
pub struct LevelMatrix {
    /// As binarized, before dropping.
    pub full: BinaryBipartiteMatrix,
    pub matrix: BinaryBipartiteMatrix,
    pub dropped_jobs: Vec<String>,
    pub dropped_skills: Vec<String>,
}

/// Parsed inputs and the matrices every stage needs.
pub struct Prepared {
    pub config: RunConfig,
    pub importance: ImportanceTable,
    pub hierarchy: Option<OccupationHierarchy>,
    pub wages: WageTable,
    pub labels: LabelTable,
    pub matrices: BTreeMap<Level, LevelMatrix>,
    input_hashes: BTreeMap<&'static str, (PathBuf, String)>,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared, PipelineError> {
    config.check()?;
    let mut input_hashes = BTreeMap::new();

    let raw = load(config, &config.inputs.importance, "ingest")?;
    input_hashes.insert("importance", (config.inputs.importance.clone(), raw.sha256.clone()));
    let importance = ingest::parse_importance_table(raw.bytes.as_slice()).map_err(|e| ingest_error("ingest", e))?;

    let hierarchy = match &config.inputs.hierarchy {
        Some(p) => {
            let raw = load(config, p, "ingest")?;
            input_hashes.insert("hierarchy", (p.clone(), raw.sha256.clone()));
            Some(ingest::parse_hierarchy(raw.bytes.as_slice()).map_err(|e| ingest_error("ingest", e))?)
        }
        None => None,
    };
    let wages = match &config.inputs.wages {
        Some(p) => {
            let raw = load(config, p, "ingest")?;
            input_hashes.insert("wages", (p.clone(), raw.sha256.clone()));
            ingest::parse_wages(raw.bytes.as_slice()).map_err(|e| ingest_error("ingest", e))?
        }
        None => WageTable::new(),
    };
    let labels = match &config.inputs.labels {
        Some(p) => {
            let raw = load(config, p, "ingest")?;
            input_hashes.insert("labels", (p.clone(), raw.sha256.clone()));
            ingest::parse_labels(raw.bytes.as_slice()).map_err(|e| ingest_error("ingest", e))?
        }
        None => LabelTable::new(),
    };

    let levels: BTreeSet<Level> = [
        config.levels.fitness,
        config.levels.jobs_projection,
        config.levels.skills_projection,
    ]
    .into();
    let mut matrices = BTreeMap::new();
    for level in levels {
        let full = ingest::matrix_at_level(&importance, hierarchy.as_ref(), level, config.aggregation_order)
            .map_err(|e| ingest_error("binarize", e))?;
        let (matrix, dropped_jobs, dropped_skills) = full.without_empty();
        if matrix.n_jobs() == 0 || matrix.n_skills() == 0 {
            return Err(PipelineError::new(
                "binarize",
                ErrorKind::Data,
                format!("{level} matrix has no links"),
            ));
        }
        matrices.insert(
            level,
            LevelMatrix {
                full,
                matrix,
                dropped_jobs,
                dropped_skills,
            },
        );
    }
    Ok(Prepared {
        config: config.clone(),
        importance,
        hierarchy,
        wages,
        labels,
        matrices,
        input_hashes,
    })
}

impl Prepared {
    pub fn matrix(&self, level: Level) -> &BinaryBipartiteMatrix {
        &self.matrices[&level].matrix
    }

    pub fn fitness(&self) -> Result<FitnessResult, PipelineError> {
        run_efc(self.matrix(self.config.levels.fitness), &self.config.efc).map_err(efc_error)
    }

    /// Importance table at the fitness level, restricted to the skills that
    /// entered the fitness computation.
    pub fn fitness_importance(&self) -> Result<ImportanceTable, PipelineError> {
        let level = self.config.levels.fitness;
        let table = match (&self.hierarchy, level) {
            (_, Level::Detailed) => self.importance.clone(),
            (Some(h), _) => {
                ingest::aggregate_importance(&self.importance, h, level).map_err(|e| ingest_error("spectroscopy", e))?
            }
            (None, _) => return Err(ingest_error("spectroscopy", IngestError::MissingHierarchy(level))),
        };
        let keep: BTreeSet<String> = self.matrix(level).skill_ids().iter().cloned().collect();
        Ok(table.restrict_skills(&keep))
    }

    pub fn validate(&self, kind: ProjectionKind, solutions: &mut Solutions) -> Result<ValidatedNetwork, PipelineError> {
        let (level, stage) = match kind {
            ProjectionKind::Jobs => (self.config.levels.jobs_projection, "validate-jobs"),
            ProjectionKind::Skills => (self.config.levels.skills_projection, "validate-skills"),
        };
        let m = self.matrix(level);
        let sol = match solutions.0.entry(level) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                e.insert(nullmodel::solve_bicm(m, DEFAULT_TOLERANCE).map_err(|e| null_error("null-model", e))?)
            }
        };
        nullmodel::validate_with_solution(m, kind, sol, &self.config.validation)
            .map_err(|e| null_error(stage, e))
    }

    /// Coherence at the fitness level from the raw skill projection, or
    /// from `validated` when the configuration asks for it.
    pub fn coherence(&self, validated: Option<&ValidatedNetwork>) -> Result<CoherenceMap, PipelineError> {
        let b = match validated {
            Some(net) if self.config.coherence.use_validated => net.to_relatedness(),
            _ => self.raw_skills()?,
        };
        projection::average_coherence(self.matrix(self.config.levels.fitness), &b)
            .map_err(|e| projection_error("coherence", e))
    }

    pub fn raw_skills(&self) -> Result<RelatednessMatrix, PipelineError> {
        projection::project_skills(self.matrix(self.config.levels.skills_projection))
            .map_err(|e| projection_error("coherence", e))
    }
}

/// Null-model solutions cached per level.
#[derive(Default)]
pub struct Solutions(BTreeMap<Level, crate::model::BicmSolution>);

impl Solutions {
    pub fn residual(&self, level: Level) -> Option<f64> {
        self.0.get(&level).map(|s| s.residual)
    }
}

/// Everything a pipeline run computes.
pub struct Analysis {
    pub prepared: Prepared,
    pub fitness: FitnessResult,
    pub jobs_network: ValidatedNetwork,
    pub skills_network: ValidatedNetwork,
    pub coherence: CoherenceMap,
    pub jobs_betweenness: Vec<f64>,
    pub skills_betweenness: Vec<f64>,
    pub report: Report,
    pub residuals: BTreeMap<Level, f64>,
}

pub fn analyze(config: &RunConfig) -> Result<Analysis, PipelineError> {
    let prepared = prepare(config)?;
    let fitness = prepared.fitness()?;
    let mut solutions = Solutions::default();
    let jobs_network = prepared.validate(ProjectionKind::Jobs, &mut solutions)?;
    let skills_network = prepared.validate(ProjectionKind::Skills, &mut solutions)?;
    let coherence = prepared.coherence(Some(&skills_network))?;
    let jobs_betweenness = projection::betweenness(&jobs_network);
    let skills_betweenness = projection::betweenness(&skills_network);
    let report = report::build_report(&fitness, &coherence, &prepared.wages, &prepared.labels);
    let residuals = solutions.0.iter().map(|(&l, s)| (l, s.residual)).collect();
    Ok(Analysis {
        prepared,
        fitness,
        jobs_network,
        skills_network,
        coherence,
        jobs_betweenness,
        skills_betweenness,
        report,
        residuals,
    })
}

/// Facts about a finished run worth telling the user.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub dropped: BTreeMap<Level, (Vec<String>, Vec<String>)>,
    pub vanishing_jobs: Vec<String>,
    pub efc_converged: bool,
    pub efc_iterations: usize,
    pub wage_summary: Option<report::WageSummary>,
    pub clamped_points: usize,
}

impl RunSummary {
    fn new(output_dir: PathBuf) -> Self {
        Self {
            output_dir,
            files: Vec::new(),
            dropped: BTreeMap::new(),
            vanishing_jobs: Vec::new(),
            efc_converged: true,
            efc_iterations: 0,
            wage_summary: None,
            clamped_points: 0,
        }
    }
}

/// Writes files into one directory, removing everything it created if the
/// run is abandoned.
struct Staging {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<(String, String)>,
    done: bool,
}

impl Staging {
    fn open(dir: PathBuf) -> Result<Self, PipelineError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(&dir)
            .map_err(|e| PipelineError::new("output", ErrorKind::Config, format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            created_dir,
            written: Vec::new(),
            done: false,
        })
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        fs::write(&path, &bytes)
            .map_err(|e| PipelineError::new("output", ErrorKind::Config, format!("{}: {e}", path.display())))?;
        self.written.push((name.to_string(), sha256_hex(&bytes)));
        Ok(())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<(), PipelineError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::new("output", ErrorKind::Config, e))?;
        self.write(name, buf)
    }

    fn finish(mut self) -> Vec<(String, String)> {
        self.done = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if self.done {
            return;
        }
        for (name, _) in &self.written {
            let _ = fs::remove_file(self.dir.join(name));
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn write_records<W: Write>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn ranked(ids: &[String], values: &[f64]) -> Vec<Vec<String>> {
    let mut rank = vec![0usize; values.len()];
    for (pos, i) in rank_descending(values).into_iter().enumerate() {
        rank[i] = pos + 1;
    }
    ids.iter()
        .zip(values)
        .zip(rank)
        .map(|((id, v), r)| vec![id.clone(), v.to_string(), r.to_string()])
        .collect()
}

fn edge_rows(net: &ValidatedNetwork) -> Vec<Vec<String>> {
    net.edges
        .iter()
        .map(|e| {
            vec![
                net.node_ids[e.a].clone(),
                net.node_ids[e.b].clone(),
                e.raw_weight.to_string(),
                e.survival_fraction.to_string(),
                e.validated.to_string(),
            ]
        })
        .collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: ManifestConfig<'a>,
    seed: u64,
    inputs: BTreeMap<&'static str, ManifestInput>,
    outputs: BTreeMap<String, String>,
    dropped: BTreeMap<Level, ManifestDropped<'a>>,
    fitness: ManifestFitness,
    bicm_residuals: BTreeMap<Level, f64>,
}

/// The configuration minus the output location, so that identical runs
/// into different directories produce identical manifests.
#[derive(Serialize)]
struct ManifestConfig<'a> {
    inputs: &'a Inputs,
    levels: &'a Levels,
    aggregation_order: AggregationOrder,
    efc: &'a EfcConfig,
    validation: &'a ValidationConfig,
    coherence: &'a CoherenceOptions,
}

#[derive(Serialize)]
struct ManifestInput {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct ManifestDropped<'a> {
    jobs: &'a [String],
    skills: &'a [String],
}

#[derive(Serialize)]
struct ManifestFitness {
    iterations: usize,
    converged: bool,
    vanishing_jobs: Vec<String>,
}

/// Runs every stage and writes the artifact tree.
pub fn cmd_pipeline(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    let a = analyze(config)?;
    let p = &a.prepared;
    let mut summary = RunSummary::new(config.output_dir());
    let mut out = Staging::open(config.output_dir())?;

    for (level, lm) in &p.matrices {
        let mut buf = Vec::new();
        ingest::write_binary_matrix(&lm.full, &mut buf)
            .map_err(|e| PipelineError::new("output", ErrorKind::Config, e))?;
        out.write(&format!("matrix_{level}.csv"), buf)?;
        summary
            .dropped
            .insert(*level, (lm.dropped_jobs.clone(), lm.dropped_skills.clone()));
    }
    out.csv("fitness.csv", |w| {
        write_records(w, &["job_id", "fitness", "rank"], ranked(&a.fitness.job_ids, &a.fitness.fitness))
    })?;
    out.csv("complexity.csv", |w| {
        write_records(
            w,
            &["skill_id", "complexity", "rank"],
            ranked(&a.fitness.skill_ids, &a.fitness.complexity),
        )
    })?;
    let edge_header = ["source", "target", "weight", "survival_fraction", "validated"];
    out.csv("edges_jobs.csv", |w| write_records(w, &edge_header, edge_rows(&a.jobs_network)))?;
    out.csv("edges_skills.csv", |w| write_records(w, &edge_header, edge_rows(&a.skills_network)))?;
    out.csv("coherence.csv", |w| {
        write_records(
            w,
            &["job_id", "average_coherence"],
            a.fitness.job_ids.iter().map(|j| {
                vec![
                    j.clone(),
                    a.coherence.get(j).map(|v| v.to_string()).unwrap_or_default(),
                ]
            }),
        )
    })?;
    out.csv("betweenness.csv", |w| {
        let rows = [(&a.jobs_network, &a.jobs_betweenness), (&a.skills_network, &a.skills_betweenness)]
            .into_iter()
            .flat_map(|(net, bc)| {
                net.node_ids
                    .iter()
                    .zip(bc)
                    .map(|(id, v)| vec![net.kind.as_str().to_string(), id.clone(), v.to_string()])
            });
        write_records(w, &["network", "node_id", "betweenness"], rows)
    })?;
    out.csv("report.csv", |w| report::write_report(&a.report.rows, w))?;

    let vanishing: Vec<String> = a
        .fitness
        .vanishing_jobs(VANISHING_FITNESS)
        .into_iter()
        .map(str::to_owned)
        .collect();
    let manifest = Manifest {
        tool: "skillfit",
        version: env!("CARGO_PKG_VERSION"),
        config: ManifestConfig {
            inputs: &config.inputs,
            levels: &config.levels,
            aggregation_order: config.aggregation_order,
            efc: &config.efc,
            validation: &config.validation,
            coherence: &config.coherence,
        },
        seed: config.validation.seed,
        inputs: p
            .input_hashes
            .iter()
            .map(|(&k, (path, sha256))| {
                (
                    k,
                    ManifestInput {
                        path: path.clone(),
                        sha256: sha256.clone(),
                    },
                )
            })
            .collect(),
        outputs: out.written.iter().cloned().collect(),
        dropped: p
            .matrices
            .iter()
            .map(|(&l, m)| {
                (
                    l,
                    ManifestDropped {
                        jobs: &m.dropped_jobs,
                        skills: &m.dropped_skills,
                    },
                )
            })
            .collect(),
        fitness: ManifestFitness {
            iterations: a.fitness.iterations,
            converged: a.fitness.converged,
            vanishing_jobs: vanishing.clone(),
        },
        bicm_residuals: a.residuals.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest).map_err(|e| PipelineError::new("output", ErrorKind::Config, e))?;
    json.push(b'\n');
    out.write("manifest.json", json)?;

    summary.files = out.finish().into_iter().map(|(n, _)| n).collect();
    summary.vanishing_jobs = vanishing;
    summary.efc_converged = a.fitness.converged;
    summary.efc_iterations = a.fitness.iterations;
    summary.wage_summary = a.report.wages.clone();
    Ok(summary)
}

/// File-name-safe form of an id.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

/// Writes `spectroscopy_<job>.csv` for a job at the fitness level.
pub fn cmd_spectroscopy(config: &RunConfig, job_id: &str) -> Result<RunSummary, PipelineError> {
    let p = prepare(config)?;
    let fitness = p.fitness()?;
    let table = p.fitness_importance()?;
    let rows = report::spectroscopy(job_id, &table, &fitness.complexity_map()).map_err(|e| match e {
        ReportError::UnknownJob { .. } => PipelineError::new("spectroscopy", ErrorKind::Config, e),
        _ => PipelineError::new("spectroscopy", ErrorKind::Data, e),
    })?;
    let mut summary = RunSummary::new(config.output_dir());
    let mut out = Staging::open(config.output_dir())?;
    out.csv(&format!("spectroscopy_{}.csv", file_stem(job_id)), |w| {
        report::write_spectroscopy(&rows, w)
    })?;
    summary.files = out.finish().into_iter().map(|(n, _)| n).collect();
    summary.efc_converged = fitness.converged;
    summary.efc_iterations = fitness.iterations;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatField {
    Fitness,
    AverageCoherence,
    AnnualWageUsd,
}

impl HeatField {
    pub const ALL: [HeatField; 3] = [HeatField::Fitness, HeatField::AverageCoherence, HeatField::AnnualWageUsd];

    pub fn as_str(self) -> &'static str {
        match self {
            HeatField::Fitness => "fitness",
            HeatField::AverageCoherence => "average_coherence",
            HeatField::AnnualWageUsd => "annual_wage_usd",
        }
    }

    fn value(self, row: &ReportRow) -> Option<f64> {
        match self {
            HeatField::Fitness => Some(row.fitness),
            HeatField::AverageCoherence => row.average_coherence,
            HeatField::AnnualWageUsd => row.annual_wage_usd,
        }
    }
}

impl FromStr for HeatField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|f| f.as_str()).collect();
            format!("unknown field `{s}`; valid fields: {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassField {
    AbstractManual,
    Routine,
}

impl ClassField {
    pub const ALL: [ClassField; 2] = [ClassField::AbstractManual, ClassField::Routine];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassField::AbstractManual => "abstract_manual",
            ClassField::Routine => "routine",
        }
    }

    /// `None` for unlabeled jobs.
    fn class(self, row: &ReportRow) -> Option<&'static str> {
        let label = match self {
            ClassField::AbstractManual => row.abstract_manual.as_str(),
            ClassField::Routine => row.routine.as_str(),
        };
        (label != "unlabeled").then_some(label)
    }
}

impl FromStr for ClassField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|f| f.as_str()).collect();
            format!("unknown class field `{s}`; valid fields: {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRequest {
    pub x: HeatField,
    pub y: HeatField,
    pub class: ClassField,
    pub sigma: f64,
    pub nx: usize,
    pub ny: usize,
}

impl HeatmapRequest {
    pub fn new(x: HeatField, y: HeatField, class: ClassField, sigma: f64) -> Self {
        Self {
            x,
            y,
            class,
            sigma,
            nx: report::DEFAULT_GRID_CELLS,
            ny: report::DEFAULT_GRID_CELLS,
        }
    }
}

/// Writes one `heatmap_<class>.csv` per labeled class. Jobs missing either
/// coordinate or the class label are left out; all classes share one grid.
pub fn cmd_heatmap(config: &RunConfig, req: &HeatmapRequest) -> Result<RunSummary, PipelineError> {
    if !(req.sigma > 0.0 && req.sigma.is_finite()) {
        return Err(PipelineError::new(
            "heatmap",
            ErrorKind::Config,
            ReportError::InvalidSigma(req.sigma),
        ));
    }
    let p = prepare(config)?;
    let fitness = p.fitness()?;
    let validated = if config.coherence.use_validated {
        Some(p.validate(ProjectionKind::Skills, &mut Solutions::default())?)
    } else {
        None
    };
    let coherence = p.coherence(validated.as_ref())?;
    let rep = report::build_report(&fitness, &coherence, &p.wages, &p.labels);
    let points: Vec<HeatmapPoint> = rep
        .rows
        .iter()
        .filter_map(|r| {
            Some(HeatmapPoint {
                x: req.x.value(r)?,
                y: req.y.value(r)?,
                class: req.class.class(r)?.to_string(),
                weight: 1.0,
            })
        })
        .collect();
    let grid = GridSpec::covering(points.iter().map(|p| (p.x, p.y)), req.nx, req.ny, report::DEFAULT_PADDING)
        .ok_or_else(|| {
            PipelineError::new(
                "heatmap",
                ErrorKind::Data,
                format!("no job has {}, {} and a {} label", req.x.as_str(), req.y.as_str(), req.class.as_str()),
            )
        })?;
    let maps = report::smooth_heatmap(&points, &grid, req.sigma).map_err(|e| match e {
        ReportError::InvalidSigma(_) | ReportError::InvalidGrid(_) => PipelineError::new("heatmap", ErrorKind::Config, e),
        _ => PipelineError::new("heatmap", ErrorKind::Data, e),
    })?;

    let mut summary = RunSummary::new(config.output_dir());
    let mut out = Staging::open(config.output_dir())?;
    for (class, h) in &maps {
        out.csv(&format!("heatmap_{}.csv", file_stem(class)), |w| report::write_heatmap(h, w))?;
        summary.clamped_points += h.clamped;
    }
    summary.files = out.finish().into_iter().map(|(n, _)| n).collect();
    summary.efc_converged = fitness.converged;
    summary.efc_iterations = fitness.iterations;
    Ok(summary)
}
