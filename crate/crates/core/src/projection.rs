//! Co-occurrence projections, average coherence and betweenness.
//!
//! Jobs projection:
//!
//! ```text
//! B_jj' = 1 / max(d_j, d_j') * sum_s M_js M_j's / u_s
//! ```
//!
//! and the skills projection is the same expression with the roles of jobs
//! and skills exchanged.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{BinaryBipartiteMatrix, ProjectionKind, RelatednessMatrix, ValidatedNetwork};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("job `{0}` requires no skills; drop empty rows before projecting")]
    EmptyJob(String),
    #[error("skill `{0}` is required by no job; drop empty columns before projecting")]
    EmptySkill(String),
    #[error("expected a {expected} relatedness matrix, got {actual}")]
    KindMismatch {
        expected: ProjectionKind,
        actual: ProjectionKind,
    },
}

/// Average coherence per job id; jobs with fewer than two matched skills are
/// absent.
pub type CoherenceMap = BTreeMap<String, f64>;

fn check_no_empty_lines(m: &BinaryBipartiteMatrix) -> Result<(), ProjectionError> {
    if let Some(j) = m.diversification().iter().position(|&d| d == 0) {
        return Err(ProjectionError::EmptyJob(m.job_ids()[j].clone()));
    }
    if let Some(s) = m.ubiquity().iter().position(|&u| u == 0) {
        return Err(ProjectionError::EmptySkill(m.skill_ids()[s].clone()));
    }
    Ok(())
}

/// Dense projection weights. Lines with zero degree contribute nothing and
/// pairs whose larger degree is zero get 0, which keeps sampled matrices
/// with empty lines usable.
pub(crate) fn projection_weights(m: &BinaryBipartiteMatrix, kind: ProjectionKind) -> Vec<f64> {
    let (nj, ns) = (m.n_jobs(), m.n_skills());
    match kind {
        ProjectionKind::Jobs => {
            // Jobs sharing each skill, skill by skill.
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); ns];
            for j in 0..nj {
                for (s, &e) in m.row(j).iter().enumerate() {
                    if e == 1 {
                        members[s].push(j);
                    }
                }
            }
            accumulate(nj, &members, m.diversification())
        }
        ProjectionKind::Skills => {
            let members: Vec<Vec<usize>> = (0..nj)
                .map(|j| {
                    m.row(j)
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e == 1)
                        .map(|(s, _)| s)
                        .collect()
                })
                .collect();
            accumulate(ns, &members, m.ubiquity())
        }
    }
}

/// For every group, adds `1 / group size` to each pair of its members, then
/// divides by the larger node degree.
fn accumulate(n: usize, groups: &[Vec<usize>], degree: &[usize]) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    for group in groups {
        if group.is_empty() {
            continue;
        }
        let inv = 1.0 / group.len() as f64;
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i..] {
                w[a * n + b] += inv;
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            let norm = degree[a].max(degree[b]);
            let v = if norm == 0 { 0.0 } else { w[a * n + b] / norm as f64 };
            w[a * n + b] = v;
            w[b * n + a] = v;
        }
    }
    w
}

pub fn project_jobs(m: &BinaryBipartiteMatrix) -> Result<RelatednessMatrix, ProjectionError> {
    check_no_empty_lines(m)?;
    Ok(RelatednessMatrix::from_trusted(
        m.job_ids().to_vec(),
        projection_weights(m, ProjectionKind::Jobs),
        ProjectionKind::Jobs,
    ))
}

pub fn project_skills(m: &BinaryBipartiteMatrix) -> Result<RelatednessMatrix, ProjectionError> {
    check_no_empty_lines(m)?;
    Ok(RelatednessMatrix::from_trusted(
        m.skill_ids().to_vec(),
        projection_weights(m, ProjectionKind::Skills),
        ProjectionKind::Skills,
    ))
}

pub fn project(m: &BinaryBipartiteMatrix, kind: ProjectionKind) -> Result<RelatednessMatrix, ProjectionError> {
    match kind {
        ProjectionKind::Jobs => project_jobs(m),
        ProjectionKind::Skills => project_skills(m),
    }
}

/// Mean skill-skill relatedness over the distinct pairs of each job's
/// required skills. Skills are matched to `b_skills` by id, so the skill
/// relatedness may come from a different aggregation level than `m`.
pub fn average_coherence(
    m: &BinaryBipartiteMatrix,
    b_skills: &RelatednessMatrix,
) -> Result<CoherenceMap, ProjectionError> {
    if b_skills.kind() != ProjectionKind::Skills {
        return Err(ProjectionError::KindMismatch {
            expected: ProjectionKind::Skills,
            actual: b_skills.kind(),
        });
    }
    let index: HashMap<&str, usize> = b_skills
        .node_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let columns: Vec<Option<usize>> = m
        .skill_ids()
        .iter()
        .map(|s| index.get(s.as_str()).copied())
        .collect();

    let mut out = CoherenceMap::new();
    for (j, job) in m.job_ids().iter().enumerate() {
        let required: Vec<usize> = m
            .row(j)
            .iter()
            .zip(&columns)
            .filter_map(|(&e, col)| if e == 1 { *col } else { None })
            .collect();
        if required.len() < 2 {
            continue;
        }
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for (i, &a) in required.iter().enumerate() {
            for &b in &required[i + 1..] {
                sum += b_skills.get(a, b);
                pairs += 1;
            }
        }
        out.insert(job.clone(), sum / pairs as f64);
    }
    Ok(out)
}

const SOURCE_BLOCK: usize = 32;

/// Unnormalized shortest-path betweenness on an undirected, unweighted graph
/// given by adjacency lists. Each unordered pair of endpoints is counted once
/// and tied shortest paths share credit.
pub fn betweenness_centrality(adjacency: &[Vec<usize>]) -> Vec<f64> {
    let n = adjacency.len();
    // Blocks of sources are summed in block order so the result does not
    // depend on how rayon schedules them.
    let blocks: Vec<Vec<f64>> = (0..n.div_ceil(SOURCE_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; n];
            let mut scratch = BrandesScratch::new(n);
            for s in b * SOURCE_BLOCK..((b + 1) * SOURCE_BLOCK).min(n) {
                scratch.accumulate_from(adjacency, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for block in blocks {
        for (t, v) in total.iter_mut().zip(block) {
            *t += v;
        }
    }
    total.iter_mut().for_each(|v| *v /= 2.0);
    total
}

struct BrandesScratch {
    sigma: Vec<f64>,
    dist: Vec<i64>,
    delta: Vec<f64>,
    preds: Vec<Vec<usize>>,
    stack: Vec<usize>,
    queue: VecDeque<usize>,
}

impl BrandesScratch {
    fn new(n: usize) -> Self {
        Self {
            sigma: vec![0.0; n],
            dist: vec![-1; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            stack: Vec::with_capacity(n),
            queue: VecDeque::with_capacity(n),
        }
    }

    fn accumulate_from(&mut self, adjacency: &[Vec<usize>], source: usize, acc: &mut [f64]) {
        self.sigma.fill(0.0);
        self.dist.fill(-1);
        self.delta.fill(0.0);
        self.preds.iter_mut().for_each(Vec::clear);
        self.stack.clear();
        self.queue.clear();

        self.sigma[source] = 1.0;
        self.dist[source] = 0;
        self.queue.push_back(source);
        while let Some(v) = self.queue.pop_front() {
            self.stack.push(v);
            for &w in &adjacency[v] {
                if self.dist[w] < 0 {
                    self.dist[w] = self.dist[v] + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
        while let Some(w) = self.stack.pop() {
            for &v in &self.preds[w] {
                self.delta[v] += self.sigma[v] / self.sigma[w] * (1.0 + self.delta[w]);
            }
            if w != source {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Betweenness of every node of `network` over its validated edges, aligned
/// with `network.node_ids`.
pub fn betweenness(network: &ValidatedNetwork) -> Vec<f64> {
    betweenness_centrality(&network.adjacency())
}
