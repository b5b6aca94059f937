//! Shared domain types.
//!
//! Every dense matrix is stored row-major with jobs on rows and skills on
//! columns. Identifiers are opaque strings; nothing here parses them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lowest importance value produced by the source surveys.
pub const MIN_IMPORTANCE: f64 = 1.0;
/// Highest importance value produced by the source surveys.
pub const MAX_IMPORTANCE: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("importance {value} for ({job}, {skill}) is outside [1, 5]")]
    ImportanceOutOfRange { job: String, skill: String, value: f64 },
    #[error("expected {expected} cells, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("entry {value} at ({row}, {col}) is not 0 or 1")]
    NotBinary { row: usize, col: usize, value: u8 },
    #[error("weight {value} at ({row}, {col}) is outside [0, 1] or not symmetric")]
    BadRelatedness { row: usize, col: usize, value: f64 },
}

fn check_unique(kind: &'static str, ids: &[String]) -> Result<(), ModelError> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(ModelError::DuplicateId {
                kind,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

/// Permutation that sorts `ids` lexicographically.
fn sort_order(ids: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    order
}

/// Weighted job-by-skill importance matrix. Absent cells are `None`.
///
/// Rows and columns are always kept in lexicographic id order, whatever order
/// the constructor received them in.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceTable {
    job_ids: Vec<String>,
    skill_ids: Vec<String>,
    values: Vec<Option<f64>>,
}

impl ImportanceTable {
    pub fn new(
        job_ids: Vec<String>,
        skill_ids: Vec<String>,
        values: Vec<Option<f64>>,
    ) -> Result<Self, ModelError> {
        check_unique("job", &job_ids)?;
        check_unique("skill", &skill_ids)?;
        let (nj, ns) = (job_ids.len(), skill_ids.len());
        if values.len() != nj * ns {
            return Err(ModelError::ShapeMismatch {
                expected: nj * ns,
                actual: values.len(),
            });
        }
        for (idx, v) in values.iter().enumerate() {
            if let Some(v) = *v {
                if !(MIN_IMPORTANCE..=MAX_IMPORTANCE).contains(&v) {
                    return Err(ModelError::ImportanceOutOfRange {
                        job: job_ids[idx / ns].clone(),
                        skill: skill_ids[idx % ns].clone(),
                        value: v,
                    });
                }
            }
        }
        let row_order = sort_order(&job_ids);
        let col_order = sort_order(&skill_ids);
        let mut sorted = Vec::with_capacity(values.len());
        for &r in &row_order {
            for &c in &col_order {
                sorted.push(values[r * ns + c]);
            }
        }
        Ok(Self {
            job_ids: row_order.iter().map(|&r| job_ids[r].clone()).collect(),
            skill_ids: col_order.iter().map(|&c| skill_ids[c].clone()).collect(),
            values: sorted,
        })
    }

    pub fn job_ids(&self) -> &[String] {
        &self.job_ids
    }

    pub fn skill_ids(&self) -> &[String] {
        &self.skill_ids
    }

    pub fn n_jobs(&self) -> usize {
        self.job_ids.len()
    }

    pub fn n_skills(&self) -> usize {
        self.skill_ids.len()
    }

    pub fn get(&self, job: usize, skill: usize) -> Option<f64> {
        self.values[job * self.skill_ids.len() + skill]
    }

    pub fn row(&self, job: usize) -> &[Option<f64>] {
        let ns = self.skill_ids.len();
        &self.values[job * ns..(job + 1) * ns]
    }

    pub fn job_index(&self, id: &str) -> Option<usize> {
        self.job_ids.binary_search_by(|j| j.as_str().cmp(id)).ok()
    }

    pub fn skill_index(&self, id: &str) -> Option<usize> {
        self.skill_ids.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    /// Keeps only the listed skills (ids not in the table are ignored).
    pub fn restrict_skills(&self, keep: &BTreeSet<String>) -> ImportanceTable {
        let cols: Vec<usize> = (0..self.n_skills())
            .filter(|&c| keep.contains(&self.skill_ids[c]))
            .collect();
        let mut values = Vec::with_capacity(self.n_jobs() * cols.len());
        for j in 0..self.n_jobs() {
            values.extend(cols.iter().map(|&c| self.get(j, c)));
        }
        ImportanceTable {
            job_ids: self.job_ids.clone(),
            skill_ids: cols.iter().map(|&c| self.skill_ids[c].clone()).collect(),
            values,
        }
    }
}

/// Binary job-by-skill matrix with cached row sums (diversification) and
/// column sums (ubiquity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryBipartiteMatrix {
    job_ids: Vec<String>,
    skill_ids: Vec<String>,
    entries: Vec<u8>,
    diversification: Vec<usize>,
    ubiquity: Vec<usize>,
}

impl BinaryBipartiteMatrix {
    pub fn new(
        job_ids: Vec<String>,
        skill_ids: Vec<String>,
        entries: Vec<u8>,
    ) -> Result<Self, ModelError> {
        check_unique("job", &job_ids)?;
        check_unique("skill", &skill_ids)?;
        let (nj, ns) = (job_ids.len(), skill_ids.len());
        if entries.len() != nj * ns {
            return Err(ModelError::ShapeMismatch {
                expected: nj * ns,
                actual: entries.len(),
            });
        }
        if let Some(idx) = entries.iter().position(|&e| e > 1) {
            return Err(ModelError::NotBinary {
                row: idx / ns,
                col: idx % ns,
                value: entries[idx],
            });
        }
        Ok(Self::from_parts(job_ids, skill_ids, entries))
    }

    fn from_parts(job_ids: Vec<String>, skill_ids: Vec<String>, entries: Vec<u8>) -> Self {
        let ns = skill_ids.len();
        let mut diversification = vec![0usize; job_ids.len()];
        let mut ubiquity = vec![0usize; ns];
        for (idx, &e) in entries.iter().enumerate() {
            if e == 1 {
                diversification[idx / ns] += 1;
                ubiquity[idx % ns] += 1;
            }
        }
        Self {
            job_ids,
            skill_ids,
            entries,
            diversification,
            ubiquity,
        }
    }

    /// Builds a matrix from nested rows with generated ids `j0..`, `s0..`.
    ///
    /// Panics if rows are ragged or contain values other than 0 and 1.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let nj = rows.len();
        let ns = rows.first().map_or(0, Vec::len);
        let job_ids = (0..nj).map(|j| format!("j{j}")).collect();
        let skill_ids = (0..ns).map(|s| format!("s{s}")).collect();
        assert!(rows.iter().all(|r| r.len() == ns), "ragged rows");
        Self::new(job_ids, skill_ids, rows.concat()).expect("valid binary rows")
    }

    pub(crate) fn from_trusted(
        job_ids: Vec<String>,
        skill_ids: Vec<String>,
        entries: Vec<u8>,
    ) -> Self {
        debug_assert_eq!(entries.len(), job_ids.len() * skill_ids.len());
        Self::from_parts(job_ids, skill_ids, entries)
    }

    pub fn job_ids(&self) -> &[String] {
        &self.job_ids
    }

    pub fn skill_ids(&self) -> &[String] {
        &self.skill_ids
    }

    pub fn n_jobs(&self) -> usize {
        self.job_ids.len()
    }

    pub fn n_skills(&self) -> usize {
        self.skill_ids.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, job: usize, skill: usize) -> bool {
        self.entries[job * self.skill_ids.len() + skill] == 1
    }

    pub fn row(&self, job: usize) -> &[u8] {
        let ns = self.skill_ids.len();
        &self.entries[job * ns..(job + 1) * ns]
    }

    pub fn diversification(&self) -> &[usize] {
        &self.diversification
    }

    pub fn ubiquity(&self) -> &[usize] {
        &self.ubiquity
    }

    pub fn link_count(&self) -> usize {
        self.diversification.iter().sum()
    }

    /// Skills-by-jobs view of the same data.
    pub fn transpose(&self) -> Self {
        let (nj, ns) = (self.n_jobs(), self.n_skills());
        let mut entries = vec![0u8; nj * ns];
        for j in 0..nj {
            for s in 0..ns {
                entries[s * nj + j] = self.entries[j * ns + s];
            }
        }
        Self {
            job_ids: self.skill_ids.clone(),
            skill_ids: self.job_ids.clone(),
            entries,
            diversification: self.ubiquity.clone(),
            ubiquity: self.diversification.clone(),
        }
    }

    pub fn has_empty_lines(&self) -> bool {
        self.diversification.contains(&0) || self.ubiquity.contains(&0)
    }

    /// Repeatedly removes rows and columns with zero sum. Returns the reduced
    /// matrix together with the removed job and skill ids.
    pub fn without_empty(&self) -> (Self, Vec<String>, Vec<String>) {
        let rows: Vec<usize> = (0..self.n_jobs())
            .filter(|&j| self.diversification[j] > 0)
            .collect();
        let cols: Vec<usize> = (0..self.n_skills())
            .filter(|&s| self.ubiquity[s] > 0)
            .collect();
        // Dropping an empty line never empties a line of the other kind, so
        // one pass is enough.
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &j in &rows {
            entries.extend(cols.iter().map(|&s| self.entries[j * self.n_skills() + s]));
        }
        let dropped_jobs = (0..self.n_jobs())
            .filter(|j| !rows.contains(j))
            .map(|j| self.job_ids[j].clone())
            .collect();
        let dropped_skills = (0..self.n_skills())
            .filter(|s| !cols.contains(s))
            .map(|s| self.skill_ids[s].clone())
            .collect();
        let reduced = Self::from_parts(
            rows.iter().map(|&j| self.job_ids[j].clone()).collect(),
            cols.iter().map(|&s| self.skill_ids[s].clone()).collect(),
            entries,
        );
        (reduced, dropped_jobs, dropped_skills)
    }
}

/// Occupation aggregation levels, finest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Detailed,
    Broad,
    Minor,
    Major,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Detailed, Level::Broad, Level::Minor, Level::Major];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Detailed => "detailed",
            Level::Broad => "broad",
            Level::Minor => "minor",
            Level::Major => "major",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "detailed" => Ok(Level::Detailed),
            "broad" => Ok(Level::Broad),
            "minor" => Ok(Level::Minor),
            "major" => Ok(Level::Major),
            other => Err(format!(
                "unknown level `{other}` (expected detailed, broad, minor or major)"
            )),
        }
    }
}

/// Where one detailed occupation sits in the classification.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyEntry {
    pub broad: String,
    pub minor: String,
    pub major: String,
    /// Aggregation weight of the detailed occupation; 1 unless supplied.
    pub weight: f64,
}

/// Detailed occupation id to its broad, minor and major categories.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OccupationHierarchy {
    entries: BTreeMap<String, HierarchyEntry>,
}

impl OccupationHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` (and leaves the hierarchy untouched) if `detailed` is
    /// already present.
    pub fn insert(&mut self, detailed: String, entry: HierarchyEntry) -> bool {
        use std::collections::btree_map::Entry;
        match self.entries.entry(detailed) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(entry);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, detailed: &str) -> Option<&HierarchyEntry> {
        self.entries.get(detailed)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &HierarchyEntry)> {
        self.entries.iter()
    }

    /// Category of `detailed` at `level`; the detailed level maps to itself.
    pub fn category<'a>(&'a self, detailed: &'a str, level: Level) -> Option<&'a str> {
        let e = self.entries.get(detailed)?;
        Some(match level {
            Level::Detailed => detailed,
            Level::Broad => &e.broad,
            Level::Minor => &e.minor,
            Level::Major => &e.major,
        })
    }

    /// Set of ids at `level`; by construction every one has a member.
    pub fn categories(&self, level: Level) -> BTreeSet<String> {
        self.entries
            .keys()
            .filter_map(|d| self.category(d, level).map(str::to_owned))
            .collect()
    }
}

/// Annual wage in US dollars per job.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WageTable {
    wages: BTreeMap<String, f64>,
}

impl WageTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a wage. Returns an error message if the wage is not a positive
    /// finite number or the job already has one.
    pub fn insert(&mut self, job: String, wage: f64) -> Result<(), String> {
        if !(wage.is_finite() && wage > 0.0) {
            return Err(format!("wage for `{job}` must be positive, got {wage}"));
        }
        if self.wages.contains_key(&job) {
            return Err(format!("duplicate job id `{job}`"));
        }
        self.wages.insert(job, wage);
        Ok(())
    }

    pub fn get(&self, job: &str) -> Option<f64> {
        self.wages.get(job).copied()
    }

    pub fn len(&self) -> usize {
        self.wages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wages.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, f64)> {
        self.wages.iter().map(|(k, v)| (k, *v))
    }
}

impl FromIterator<(String, f64)> for WageTable {
    /// Panics on invalid or duplicate wages; use [`WageTable::insert`] for
    /// untrusted input.
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut t = WageTable::new();
        for (job, wage) in iter {
            t.insert(job, wage).expect("valid wage");
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum AbstractManual {
    Abstract,
    Manual,
    #[default]
    Unlabeled,
}

impl AbstractManual {
    pub fn as_str(self) -> &'static str {
        match self {
            AbstractManual::Abstract => "abstract",
            AbstractManual::Manual => "manual",
            AbstractManual::Unlabeled => "unlabeled",
        }
    }
}

impl FromStr for AbstractManual {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abstract" => Ok(Self::Abstract),
            "manual" => Ok(Self::Manual),
            "unlabeled" => Ok(Self::Unlabeled),
            other => Err(format!(
                "unknown abstract_manual label `{other}` (expected abstract, manual or unlabeled)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Routine {
    Routinary,
    NonRoutinary,
    #[default]
    Unlabeled,
}

impl Routine {
    pub fn as_str(self) -> &'static str {
        match self {
            Routine::Routinary => "routinary",
            Routine::NonRoutinary => "non-routinary",
            Routine::Unlabeled => "unlabeled",
        }
    }
}

impl FromStr for Routine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "routinary" => Ok(Self::Routinary),
            "non-routinary" => Ok(Self::NonRoutinary),
            "unlabeled" => Ok(Self::Unlabeled),
            other => Err(format!(
                "unknown routine label `{other}` (expected routinary, non-routinary or unlabeled)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JobLabels {
    pub abstract_manual: AbstractManual,
    pub routine: Routine,
}

/// Exogenous job taxonomy labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelTable {
    labels: BTreeMap<String, JobLabels>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` if the job already has labels.
    pub fn insert(&mut self, job: String, labels: JobLabels) -> bool {
        if self.labels.contains_key(&job) {
            return false;
        }
        self.labels.insert(job, labels);
        true
    }

    /// Labels for `job`, unlabeled on both axes when absent.
    pub fn get(&self, job: &str) -> JobLabels {
        self.labels.get(job).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &JobLabels)> {
        self.labels.iter()
    }
}

/// Which side of the bipartite matrix a projection connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionKind {
    Jobs,
    Skills,
}

impl ProjectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionKind::Jobs => "jobs",
            ProjectionKind::Skills => "skills",
        }
    }
}

impl fmt::Display for ProjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense symmetric relatedness matrix between jobs or between skills.
///
/// The diagonal is stored but is not a relatedness value in the usual sense:
/// coherence and edge lists skip it.
#[derive(Debug, Clone, PartialEq)]
pub struct RelatednessMatrix {
    node_ids: Vec<String>,
    weights: Vec<f64>,
    kind: ProjectionKind,
}

impl RelatednessMatrix {
    pub fn new(
        node_ids: Vec<String>,
        weights: Vec<f64>,
        kind: ProjectionKind,
    ) -> Result<Self, ModelError> {
        check_unique("node", &node_ids)?;
        let n = node_ids.len();
        if weights.len() != n * n {
            return Err(ModelError::ShapeMismatch {
                expected: n * n,
                actual: weights.len(),
            });
        }
        for a in 0..n {
            for b in a..n {
                let w = weights[a * n + b];
                if !(0.0..=1.0).contains(&w) || w != weights[b * n + a] {
                    return Err(ModelError::BadRelatedness {
                        row: a,
                        col: b,
                        value: w,
                    });
                }
            }
        }
        Ok(Self {
            node_ids,
            weights,
            kind,
        })
    }

    pub(crate) fn from_trusted(node_ids: Vec<String>, weights: Vec<f64>, kind: ProjectionKind) -> Self {
        Self {
            node_ids,
            weights,
            kind,
        }
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.node_ids.len() + b]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }
}

/// One convergence checkpoint of the fitness iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub iteration: usize,
    pub fitness: Vec<f64>,
    /// Minimum crossing iteration at this checkpoint; infinite when no
    /// adjacent pair is projected to cross.
    pub mci: f64,
}

/// Converged job fitness and skill complexity.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessResult {
    pub job_ids: Vec<String>,
    pub skill_ids: Vec<String>,
    /// Aligned with `job_ids`, mean 1.
    pub fitness: Vec<f64>,
    /// Aligned with `skill_ids`, mean 1.
    pub complexity: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<Checkpoint>,
}

impl FitnessResult {
    pub fn fitness_of(&self, job: &str) -> Option<f64> {
        self.job_ids
            .iter()
            .position(|j| j == job)
            .map(|i| self.fitness[i])
    }

    pub fn complexity_map(&self) -> BTreeMap<String, f64> {
        self.skill_ids
            .iter()
            .cloned()
            .zip(self.complexity.iter().copied())
            .collect()
    }

    /// Job indices from fittest to least fit; ties keep index order.
    pub fn job_ranking(&self) -> Vec<usize> {
        rank_descending(&self.fitness)
    }

    pub fn skill_ranking(&self) -> Vec<usize> {
        rank_descending(&self.complexity)
    }

    /// Ids of jobs whose fitness fell below `floor` (numerically vanishing).
    pub fn vanishing_jobs(&self, floor: f64) -> Vec<&str> {
        self.job_ids
            .iter()
            .zip(&self.fitness)
            .filter(|(_, &f)| f < floor)
            .map(|(j, _)| j.as_str())
            .collect()
    }
}

/// Indices sorted by decreasing value, stable on ties.
pub fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Maximum-entropy bipartite null model solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BicmSolution {
    pub job_ids: Vec<String>,
    pub skill_ids: Vec<String>,
    /// Job multipliers; `+inf` pins a row to 0 and `-inf` pins it to 1.
    /// When the degree constraints split the matrix into independent
    /// blocks, a multiplier only applies within its block, and a line that
    /// belongs to no block is NaN.
    pub theta: Vec<f64>,
    /// Skill multipliers, same conventions as `theta`.
    pub mu: Vec<f64>,
    /// Row-major link probabilities. These are authoritative; cells fixed
    /// by a degree cut need not match `theta` and `mu`.
    pub probabilities: Vec<f64>,
    /// Largest absolute violation of the degree constraints.
    pub residual: f64,
}

impl BicmSolution {
    #[inline]
    pub fn probability(&self, job: usize, skill: usize) -> f64 {
        self.probabilities[job * self.skill_ids.len() + skill]
    }

    /// A solution where every cell has the same link probability. Used to
    /// drive the sampler directly, independently of any degree sequence.
    pub fn uniform(job_ids: Vec<String>, skill_ids: Vec<String>, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p));
        let theta = (1.0 / p - 1.0).ln();
        let n = job_ids.len() * skill_ids.len();
        Self {
            theta: vec![theta; job_ids.len()],
            mu: vec![0.0; skill_ids.len()],
            probabilities: vec![p; n],
            job_ids,
            skill_ids,
            residual: f64::NAN,
        }
    }
}

/// Link-probability form shared by the solver and its consumers.
#[inline]
pub fn link_probability(theta: f64, mu: f64) -> f64 {
    1.0 / ((theta + mu).exp() + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedEdge {
    /// Index into `ValidatedNetwork::node_ids`; always `a < b`.
    pub a: usize,
    pub b: usize,
    pub raw_weight: f64,
    pub survival_fraction: f64,
    pub validated: bool,
}

/// Projection with a null-model survival fraction for every unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedNetwork {
    pub node_ids: Vec<String>,
    pub kind: ProjectionKind,
    pub edges: Vec<ValidatedEdge>,
    pub threshold: f64,
    pub sample_count: usize,
    pub seed: u64,
}

impl ValidatedNetwork {
    pub fn validated_edges(&self) -> impl Iterator<Item = &ValidatedEdge> {
        self.edges.iter().filter(|e| e.validated)
    }

    /// Adjacency lists over validated edges only.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_ids.len()];
        for e in self.validated_edges() {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }

    /// Relatedness matrix keeping only validated weights; the diagonal is 0.
    pub fn to_relatedness(&self) -> RelatednessMatrix {
        let n = self.node_ids.len();
        let mut weights = vec![0.0; n * n];
        for e in self.validated_edges() {
            weights[e.a * n + e.b] = e.raw_weight;
            weights[e.b * n + e.a] = e.raw_weight;
        }
        RelatednessMatrix::from_trusted(self.node_ids.clone(), weights, self.kind)
    }
}
