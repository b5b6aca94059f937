//! Analysis tables and plot-ready data.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::model::{AbstractManual, FitnessResult, ImportanceTable, LabelTable, Routine, WageTable};
use crate::projection::CoherenceMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("unknown job `{job}`; available jobs: {}", available.join(", "))]
    UnknownJob { job: String, available: Vec<String> },
    #[error("skill `{0}` has no complexity value")]
    MissingComplexity(String),
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point ({x}, {y}) is not finite")]
    InvalidPoint { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub job_id: String,
    pub fitness: f64,
    pub average_coherence: Option<f64>,
    pub annual_wage_usd: Option<f64>,
    pub abstract_manual: AbstractManual,
    pub routine: Routine,
}

/// Highest and lowest wage among the reported jobs.
#[derive(Debug, Clone, PartialEq)]
pub struct WageSummary {
    pub max_job: String,
    pub max_wage: f64,
    pub min_job: String,
    pub min_wage: f64,
}

impl WageSummary {
    pub fn ratio(&self) -> f64 {
        self.max_wage / self.min_wage
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    /// Absent when no reported job has a wage.
    pub wages: Option<WageSummary>,
}

/// One row per job in `fitness`, in fitness order. Missing coherence, wage
/// or label entries leave the corresponding field empty.
pub fn build_report(fitness: &FitnessResult, ac: &CoherenceMap, wages: &WageTable, labels: &LabelTable) -> Report {
    let rows: Vec<ReportRow> = fitness
        .job_ids
        .iter()
        .zip(&fitness.fitness)
        .map(|(job, &f)| {
            let l = labels.get(job);
            ReportRow {
                job_id: job.clone(),
                fitness: f,
                average_coherence: ac.get(job).copied(),
                annual_wage_usd: wages.get(job),
                abstract_manual: l.abstract_manual,
                routine: l.routine,
            }
        })
        .collect();
    let wages = wage_summary(rows.iter().filter_map(|r| r.annual_wage_usd.map(|w| (r.job_id.as_str(), w))));
    Report { rows, wages }
}

/// Max/min over `(job, wage)` pairs; ties keep the first job seen.
pub fn wage_summary<'a>(wages: impl IntoIterator<Item = (&'a str, f64)>) -> Option<WageSummary> {
    let mut summary: Option<WageSummary> = None;
    for (job, w) in wages {
        match &mut summary {
            None => {
                summary = Some(WageSummary {
                    max_job: job.to_string(),
                    max_wage: w,
                    min_job: job.to_string(),
                    min_wage: w,
                })
            }
            Some(s) => {
                if w > s.max_wage {
                    s.max_job = job.to_string();
                    s.max_wage = w;
                }
                if w < s.min_wage {
                    s.min_job = job.to_string();
                    s.min_wage = w;
                }
            }
        }
    }
    summary
}

/// Wage summary within each group of jobs, e.g. the jobs of one major group.
pub fn group_wage_summaries<'a>(
    rows: &'a [ReportRow],
    group_of: impl Fn(&str) -> Option<&'a str>,
) -> BTreeMap<&'a str, WageSummary> {
    let mut members: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for r in rows {
        if let (Some(g), Some(w)) = (group_of(&r.job_id), r.annual_wage_usd) {
            members.entry(g).or_default().push((&r.job_id, w));
        }
    }
    members
        .into_iter()
        .filter_map(|(g, m)| wage_summary(m).map(|s| (g, s)))
        .collect()
}

/// Human-readable ratio at a fixed number of decimals.
pub fn format_ratio(ratio: f64, decimals: usize) -> String {
    format!("{ratio:.decimals$}")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["job_id", "fitness", "average_coherence", "annual_wage_usd", "abstract_manual", "routine"])?;
    for r in rows {
        w.write_record([
            r.job_id.clone(),
            r.fitness.to_string(),
            opt(r.average_coherence),
            opt(r.annual_wage_usd),
            r.abstract_manual.as_str().to_string(),
            r.routine.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectroscopyRow {
    pub skill_id: String,
    pub complexity: f64,
    pub importance: f64,
}

/// The job's skills with a present importance, by increasing complexity and
/// then skill id.
pub fn spectroscopy(
    job_id: &str,
    importance: &ImportanceTable,
    complexity: &BTreeMap<String, f64>,
) -> Result<Vec<SpectroscopyRow>, ReportError> {
    let j = importance.job_index(job_id).ok_or_else(|| ReportError::UnknownJob {
        job: job_id.to_string(),
        available: importance.job_ids().to_vec(),
    })?;
    let mut rows = importance
        .row(j)
        .iter()
        .zip(importance.skill_ids())
        .filter_map(|(v, s)| v.map(|v| (s, v)))
        .map(|(s, v)| {
            let q = complexity.get(s).copied().ok_or_else(|| ReportError::MissingComplexity(s.clone()))?;
            Ok(SpectroscopyRow {
                skill_id: s.clone(),
                complexity: q,
                importance: v,
            })
        })
        .collect::<Result<Vec<_>, ReportError>>()?;
    rows.sort_by(|a, b| a.complexity.total_cmp(&b.complexity).then_with(|| a.skill_id.cmp(&b.skill_id)));
    Ok(rows)
}

pub fn write_spectroscopy<W: Write>(rows: &[SpectroscopyRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["skill_id", "complexity", "importance"])?;
    for r in rows {
        w.write_record([r.skill_id.clone(), r.complexity.to_string(), r.importance.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub const DEFAULT_GRID_CELLS: usize = 512;
pub const DEFAULT_PADDING: f64 = 0.05;

/// Regular grid over `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl GridSpec {
    /// Bounding box of `points` padded by `padding` of its span on each
    /// side. A zero span becomes a unit interval around the value.
    pub fn covering(points: impl IntoIterator<Item = (f64, f64)>, nx: usize, ny: usize, padding: f64) -> Option<Self> {
        let mut bounds: Option<(f64, f64, f64, f64)> = None;
        for (x, y) in points {
            let b = bounds.get_or_insert((x, x, y, y));
            b.0 = b.0.min(x);
            b.1 = b.1.max(x);
            b.2 = b.2.min(y);
            b.3 = b.3.max(y);
        }
        let (xa, xb, ya, yb) = bounds?;
        let pad = |lo: f64, hi: f64| {
            let span = hi - lo;
            if span > 0.0 {
                (lo - padding * span, hi + padding * span)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x0, x1) = pad(xa, xb);
        let (y0, y1) = pad(ya, yb);
        Some(Self { nx, ny, x0, x1, y0, y1 })
    }

    fn check(&self) -> Result<(), ReportError> {
        if self.nx == 0 || self.ny == 0 {
            return Err(ReportError::InvalidGrid("grid needs at least one cell per axis".into()));
        }
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && a < b;
        if !ok(self.x0, self.x1) || !ok(self.y0, self.y1) {
            return Err(ReportError::InvalidGrid(format!(
                "ranges must be finite and increasing, got x [{}, {}] y [{}, {}]",
                self.x0, self.x1, self.y0, self.y1
            )));
        }
        Ok(())
    }

    /// Cell index along one axis and whether the value had to be clamped.
    fn cell(v: f64, lo: f64, hi: f64, n: usize) -> (usize, bool) {
        if v < lo {
            return (0, true);
        }
        if v > hi {
            return (n - 1, true);
        }
        let k = ((v - lo) / (hi - lo) * n as f64).floor() as usize;
        (k.min(n - 1), false)
    }
}

/// Smoothed density on a grid, row-major with `ny` rows of `nx` values;
/// row 0 is the lowest y band.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub grid: GridSpec,
    pub sigma: f64,
    pub values: Vec<f64>,
    /// Points that fell outside the grid and were moved to a border cell.
    pub clamped: usize,
}

impl Heatmap {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapPoint {
    pub x: f64,
    pub y: f64,
    pub class: String,
    pub weight: f64,
}

/// One smoothed grid per class present in `points`.
pub fn smooth_heatmap(
    points: &[HeatmapPoint],
    grid: &GridSpec,
    sigma: f64,
) -> Result<BTreeMap<String, Heatmap>, ReportError> {
    let mut by_class: BTreeMap<&str, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for p in points {
        by_class.entry(&p.class).or_default().push((p.x, p.y, p.weight));
    }
    if by_class.is_empty() {
        check_sigma(sigma)?;
        grid.check()?;
    }
    by_class
        .into_iter()
        .map(|(class, pts)| Ok((class.to_string(), smooth_grid(&pts, grid, sigma)?)))
        .collect()
}

fn check_sigma(sigma: f64) -> Result<(), ReportError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(ReportError::InvalidSigma(sigma))
    }
}

/// Bins weighted `(x, y, weight)` points and spreads each cell with a
/// Gaussian of standard deviation `sigma` cells, truncated at `4 sigma`.
/// Mass leaving the grid is reflected back at the edge (`d c b a | a b c d`),
/// so the total weight is preserved.
pub fn smooth_grid(points: &[(f64, f64, f64)], grid: &GridSpec, sigma: f64) -> Result<Heatmap, ReportError> {
    check_sigma(sigma)?;
    grid.check()?;
    let (nx, ny) = (grid.nx, grid.ny);
    let mut binned = vec![0.0; nx * ny];
    let mut clamped = 0;
    for &(x, y, w) in points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(ReportError::InvalidPoint { x, y });
        }
        let (ix, cx) = GridSpec::cell(x, grid.x0, grid.x1, nx);
        let (iy, cy) = GridSpec::cell(y, grid.y0, grid.y1, ny);
        clamped += usize::from(cx || cy);
        binned[iy * nx + ix] += w;
    }

    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let mut rows_done = vec![0.0; nx * ny];
    for iy in 0..ny {
        let src = &binned[iy * nx..(iy + 1) * nx];
        let dst = &mut rows_done[iy * nx..(iy + 1) * nx];
        for (i, &v) in src.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for (k, &w) in kernel.iter().enumerate() {
                dst[reflect(i as isize + k as isize - radius, nx)] += v * w;
            }
        }
    }
    let mut values = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let v = rows_done[iy * nx + ix];
            if v == 0.0 {
                continue;
            }
            for (k, &w) in kernel.iter().enumerate() {
                values[reflect(iy as isize + k as isize - radius, ny) * nx + ix] += v * w;
            }
        }
    }
    Ok(Heatmap {
        grid: *grid,
        sigma,
        values,
        clamped,
    })
}

/// Normalized samples of a Gaussian on `-r..=r`, `r = ceil(4 sigma)`.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Maps an index onto `0..n` by mirroring about the edges, repeatedly if
/// needed.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

pub fn write_heatmap<W: Write>(h: &Heatmap, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let g = &h.grid;
    w.write_record(["nx", "ny", "x0", "x1", "y0", "y1", "sigma"])?;
    w.write_record([
        g.nx.to_string(),
        g.ny.to_string(),
        g.x0.to_string(),
        g.x1.to_string(),
        g.y0.to_string(),
        g.y1.to_string(),
        h.sigma.to_string(),
    ])?;
    for row in h.values.chunks(g.nx) {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
