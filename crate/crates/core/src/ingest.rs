//! CSV readers and writers, hierarchy aggregation and binarization.
//!
//! All readers expect UTF-8, comma separated, `.` decimal point and a header
//! line. Reported line numbers are 1-based and count the header.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use thiserror::Error;

use crate::model::{
    BinaryBipartiteMatrix, HierarchyEntry, ImportanceTable, JobLabels, LabelTable, Level,
    ModelError, OccupationHierarchy, WageTable, MAX_IMPORTANCE, MIN_IMPORTANCE,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: duplicate pair ({job}, {skill})")]
    DuplicatePair { line: u64, job: String, skill: String },
    #[error("line {line}: importance {value} is outside [1, 5]")]
    OutOfRange { line: u64, value: f64 },
    #[error("line {line}: duplicate job id `{id}`")]
    DuplicateJob { line: u64, id: String },
    #[error("line {line}: {message}")]
    InvalidValue { line: u64, message: String },
    #[error("job `{0}` is not in the occupation hierarchy")]
    UnknownOccupation(String),
    #[error("an occupation hierarchy is required for level `{0}`")]
    MissingHierarchy(Level),
    #[error("importance table is empty")]
    EmptyTable,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Order in which hierarchy aggregation and binarization are composed when
/// building a matrix above the detailed level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationOrder {
    /// Average importances per category, then binarize the aggregated table.
    #[default]
    AggregateThenBinarize,
    /// Binarize detailed occupations, then mark a category as requiring a
    /// skill when a weighted majority of its members do.
    BinarizeThenAggregate,
}

struct Records<R: Read> {
    reader: csv::Reader<R>,
}

impl<R: Read> Records<R> {
    fn open(input: R, expected: &[&str], optional: &[&str]) -> Result<(Self, Vec<String>), IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        let ok_prefix = header.len() >= expected.len()
            && header.iter().zip(expected).all(|(h, e)| h == e)
            && header[expected.len()..]
                .iter()
                .zip(optional)
                .all(|(h, e)| h == e)
            && header.len() <= expected.len() + optional.len();
        if !ok_prefix {
            return Err(IngestError::Header {
                expected: expected.join(","),
                found: header.join(","),
            });
        }
        Ok((Self { reader }, header))
    }

    /// Next record with its line number; rows with the wrong field count are
    /// rejected.
    fn next(&mut self, width: usize) -> Option<Result<(u64, csv::StringRecord), IngestError>> {
        let mut record = csv::StringRecord::new();
        match self.reader.read_record(&mut record) {
            Ok(false) => None,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                if record.len() != width {
                    return Some(Err(IngestError::Malformed {
                        line,
                        message: format!("expected {width} fields, found {}", record.len()),
                    }));
                }
                Some(Ok((line, record)))
            }
            Err(e) => Some(Err(e.into())),
        }
    }
}

fn parse_f64(line: u64, field: &str, what: &str) -> Result<f64, IngestError> {
    field.parse::<f64>().map_err(|_| IngestError::Malformed {
        line,
        message: format!("cannot parse {what} `{field}` as a number"),
    })
}

fn non_empty(line: u64, field: &str, what: &str) -> Result<String, IngestError> {
    if field.is_empty() {
        return Err(IngestError::Malformed {
            line,
            message: format!("empty {what}"),
        });
    }
    Ok(field.to_owned())
}

/// Reads `job_id,skill_id,importance` rows. Pairs that never appear are
/// missing in the resulting table.
pub fn parse_importance_table<R: Read>(input: R) -> Result<ImportanceTable, IngestError> {
    let (mut records, _) = Records::open(input, &["job_id", "skill_id", "importance"], &[])?;
    let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
    while let Some(rec) = records.next(3) {
        let (line, rec) = rec?;
        let job = non_empty(line, &rec[0], "job_id")?;
        let skill = non_empty(line, &rec[1], "skill_id")?;
        let value = parse_f64(line, &rec[2], "importance")?;
        if !(MIN_IMPORTANCE..=MAX_IMPORTANCE).contains(&value) {
            return Err(IngestError::OutOfRange { line, value });
        }
        if cells.contains_key(&(job.clone(), skill.clone())) {
            return Err(IngestError::DuplicatePair { line, job, skill });
        }
        cells.insert((job, skill), value);
    }
    Ok(table_from_cells(&cells)?)
}

fn table_from_cells(cells: &BTreeMap<(String, String), f64>) -> Result<ImportanceTable, ModelError> {
    let jobs: BTreeSet<&String> = cells.keys().map(|(j, _)| j).collect();
    let skills: BTreeSet<&String> = cells.keys().map(|(_, s)| s).collect();
    let job_ids: Vec<String> = jobs.into_iter().cloned().collect();
    let skill_ids: Vec<String> = skills.into_iter().cloned().collect();
    let mut values = vec![None; job_ids.len() * skill_ids.len()];
    for ((j, s), &v) in cells {
        let r = job_ids.binary_search(j).expect("collected");
        let c = skill_ids.binary_search(s).expect("collected");
        values[r * skill_ids.len() + c] = Some(v);
    }
    ImportanceTable::new(job_ids, skill_ids, values)
}

/// Writes present cells as `job_id,skill_id,importance` in row-major order.
pub fn write_importance_table<W: Write>(table: &ImportanceTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "job_id,skill_id,importance")?;
    for (j, job) in table.job_ids().iter().enumerate() {
        for (s, skill) in table.skill_ids().iter().enumerate() {
            if let Some(v) = table.get(j, s) {
                writeln!(out, "{job},{skill},{v}")?;
            }
        }
    }
    Ok(())
}

pub fn parse_wages<R: Read>(input: R) -> Result<WageTable, IngestError> {
    let (mut records, _) = Records::open(input, &["job_id", "annual_wage_usd"], &[])?;
    let mut wages = WageTable::new();
    while let Some(rec) = records.next(2) {
        let (line, rec) = rec?;
        let job = non_empty(line, &rec[0], "job_id")?;
        let wage = parse_f64(line, &rec[1], "annual_wage_usd")?;
        if wages.get(&job).is_some() {
            return Err(IngestError::DuplicateJob { line, id: job });
        }
        wages
            .insert(job, wage)
            .map_err(|message| IngestError::InvalidValue { line, message })?;
    }
    Ok(wages)
}

pub fn write_wages<W: Write>(wages: &WageTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "job_id,annual_wage_usd")?;
    for (job, wage) in wages.iter() {
        writeln!(out, "{job},{wage}")?;
    }
    Ok(())
}

pub fn parse_labels<R: Read>(input: R) -> Result<LabelTable, IngestError> {
    let (mut records, _) = Records::open(input, &["job_id", "abstract_manual", "routine"], &[])?;
    let mut labels = LabelTable::new();
    while let Some(rec) = records.next(3) {
        let (line, rec) = rec?;
        let job = non_empty(line, &rec[0], "job_id")?;
        let invalid = |message| IngestError::InvalidValue { line, message };
        let entry = JobLabels {
            abstract_manual: rec[1].parse().map_err(invalid)?,
            routine: rec[2].parse().map_err(invalid)?,
        };
        if !labels.insert(job.clone(), entry) {
            return Err(IngestError::DuplicateJob { line, id: job });
        }
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(labels: &LabelTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "job_id,abstract_manual,routine")?;
    for (job, l) in labels.iter() {
        writeln!(out, "{job},{},{}", l.abstract_manual.as_str(), l.routine.as_str())?;
    }
    Ok(())
}

/// Reads `detailed_id,broad_id,minor_id,major_id` with an optional trailing
/// `weight` column (default 1).
pub fn parse_hierarchy<R: Read>(input: R) -> Result<OccupationHierarchy, IngestError> {
    let (mut records, header) = Records::open(
        input,
        &["detailed_id", "broad_id", "minor_id", "major_id"],
        &["weight"],
    )?;
    let width = header.len();
    let mut hierarchy = OccupationHierarchy::new();
    while let Some(rec) = records.next(width) {
        let (line, rec) = rec?;
        let detailed = non_empty(line, &rec[0], "detailed_id")?;
        let weight = if width == 5 {
            let w = parse_f64(line, &rec[4], "weight")?;
            if !(w.is_finite() && w > 0.0) {
                return Err(IngestError::InvalidValue {
                    line,
                    message: format!("weight must be positive, got {w}"),
                });
            }
            w
        } else {
            1.0
        };
        let entry = HierarchyEntry {
            broad: non_empty(line, &rec[1], "broad_id")?,
            minor: non_empty(line, &rec[2], "minor_id")?,
            major: non_empty(line, &rec[3], "major_id")?,
            weight,
        };
        if !hierarchy.insert(detailed.clone(), entry) {
            return Err(IngestError::DuplicateJob { line, id: detailed });
        }
    }
    Ok(hierarchy)
}

pub fn write_hierarchy<W: Write>(hierarchy: &OccupationHierarchy, mut out: W) -> std::io::Result<()> {
    let weighted = hierarchy.iter().any(|(_, e)| e.weight != 1.0);
    if weighted {
        writeln!(out, "detailed_id,broad_id,minor_id,major_id,weight")?;
    } else {
        writeln!(out, "detailed_id,broad_id,minor_id,major_id")?;
    }
    for (d, e) in hierarchy.iter() {
        write!(out, "{d},{},{},{}", e.broad, e.minor, e.major)?;
        if weighted {
            write!(out, ",{}", e.weight)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Groups the detailed rows of `table` by their category at `level`.
/// Returns category ids (sorted) with member row indices and weights.
fn group_rows(
    job_ids: &[String],
    hierarchy: &OccupationHierarchy,
    level: Level,
) -> Result<BTreeMap<String, Vec<(usize, f64)>>, IngestError> {
    let mut groups: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (row, job) in job_ids.iter().enumerate() {
        let entry = hierarchy
            .entry(job)
            .ok_or_else(|| IngestError::UnknownOccupation(job.clone()))?;
        let cat = hierarchy.category(job, level).expect("entry exists");
        groups.entry(cat.to_owned()).or_default().push((row, entry.weight));
    }
    Ok(groups)
}

/// Aggregates a detailed-level table to `level`. Each category's importance
/// for a skill is the weighted mean over the members that have a value for
/// it; categories where no member has one stay missing.
pub fn aggregate_importance(
    table: &ImportanceTable,
    hierarchy: &OccupationHierarchy,
    level: Level,
) -> Result<ImportanceTable, IngestError> {
    if level == Level::Detailed {
        return Ok(table.clone());
    }
    let groups = group_rows(table.job_ids(), hierarchy, level)?;
    let ns = table.n_skills();
    let mut values = Vec::with_capacity(groups.len() * ns);
    for members in groups.values() {
        for s in 0..ns {
            let (mut num, mut den) = (0.0, 0.0);
            for &(row, w) in members {
                if let Some(v) = table.get(row, s) {
                    num += w * v;
                    den += w;
                }
            }
            values.push((den > 0.0).then(|| (num / den).clamp(MIN_IMPORTANCE, MAX_IMPORTANCE)));
        }
    }
    Ok(ImportanceTable::new(
        groups.into_keys().collect(),
        table.skill_ids().to_vec(),
        values,
    )?)
}

/// Category-level binary matrix from a detailed-level binary one: a category
/// requires a skill when members carrying strictly more than half of the
/// category's weight require it.
pub fn aggregate_binary(
    matrix: &BinaryBipartiteMatrix,
    hierarchy: &OccupationHierarchy,
    level: Level,
) -> Result<BinaryBipartiteMatrix, IngestError> {
    if level == Level::Detailed {
        return Ok(matrix.clone());
    }
    let groups = group_rows(matrix.job_ids(), hierarchy, level)?;
    let ns = matrix.n_skills();
    let mut entries = Vec::with_capacity(groups.len() * ns);
    for members in groups.values() {
        let total: f64 = members.iter().map(|&(_, w)| w).sum();
        for s in 0..ns {
            let with: f64 = members
                .iter()
                .filter(|&&(row, _)| matrix.get(row, s))
                .map(|&(_, w)| w)
                .sum();
            entries.push(u8::from(with > 0.5 * total));
        }
    }
    Ok(BinaryBipartiteMatrix::new(
        groups.into_keys().collect(),
        matrix.skill_ids().to_vec(),
        entries,
    )?)
}

/// Marks a job as requiring a skill when its importance is strictly above
/// the skill's mean importance over jobs with a value. Missing cells are 0.
pub fn binarize(table: &ImportanceTable) -> Result<BinaryBipartiteMatrix, IngestError> {
    let (nj, ns) = (table.n_jobs(), table.n_skills());
    if nj == 0 || ns == 0 {
        return Err(IngestError::EmptyTable);
    }
    let mut entries = vec![0u8; nj * ns];
    for s in 0..ns {
        let (mut sum, mut count) = (0.0, 0usize);
        for j in 0..nj {
            if let Some(v) = table.get(j, s) {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let mean = sum / count as f64;
        for j in 0..nj {
            if table.get(j, s).is_some_and(|v| v > mean) {
                entries[j * ns + s] = 1;
            }
        }
    }
    Ok(BinaryBipartiteMatrix::from_trusted(
        table.job_ids().to_vec(),
        table.skill_ids().to_vec(),
        entries,
    ))
}

/// Builds the binary matrix at `level` from a detailed-level table using the
/// requested composition order.
pub fn matrix_at_level(
    table: &ImportanceTable,
    hierarchy: Option<&OccupationHierarchy>,
    level: Level,
    order: AggregationOrder,
) -> Result<BinaryBipartiteMatrix, IngestError> {
    if level == Level::Detailed {
        return binarize(table);
    }
    let hierarchy = hierarchy.ok_or(IngestError::MissingHierarchy(level))?;
    match order {
        AggregationOrder::AggregateThenBinarize => binarize(&aggregate_importance(table, hierarchy, level)?),
        AggregationOrder::BinarizeThenAggregate => aggregate_binary(&binarize(table)?, hierarchy, level),
    }
}

/// Dense binary matrix: header `job_id,<skill ids...>`, one row per job.
pub fn write_binary_matrix<W: Write>(m: &BinaryBipartiteMatrix, mut out: W) -> std::io::Result<()> {
    write!(out, "job_id")?;
    for s in m.skill_ids() {
        write!(out, ",{s}")?;
    }
    writeln!(out)?;
    for (j, job) in m.job_ids().iter().enumerate() {
        write!(out, "{job}")?;
        for &e in m.row(j) {
            write!(out, ",{e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn parse_binary_matrix<R: Read>(input: R) -> Result<BinaryBipartiteMatrix, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.get(0) != Some("job_id") {
        return Err(IngestError::Header {
            expected: "job_id,<skill ids>".into(),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let skill_ids: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut job_ids = Vec::new();
    let mut entries = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != skill_ids.len() + 1 {
            return Err(IngestError::Malformed {
                line,
                message: format!("expected {} fields, found {}", skill_ids.len() + 1, rec.len()),
            });
        }
        job_ids.push(non_empty(line, &rec[0], "job_id")?);
        for field in rec.iter().skip(1) {
            entries.push(match field {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(IngestError::Malformed {
                        line,
                        message: format!("matrix entry `{other}` is not 0 or 1"),
                    })
                }
            });
        }
    }
    Ok(BinaryBipartiteMatrix::new(job_ids, skill_ids, entries)?)
}
