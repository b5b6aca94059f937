//! Fitness and complexity fixed-point iteration.
//!
//! One application of the map, starting from skill complexities `Q`:
//!
//! ```text
//! F~_j = sum_s M_js Q_s              F_j = F~_j / mean(F~)
//! Q~_s = 1 / sum_j M_js / F_j        Q_s = Q~_s / mean(Q~)
//! ```
//!
//! The complexity update uses the fitness of the same iteration. The
//! iteration stops once the minimum crossing iteration (the earliest
//! projected rank swap between adjacently ranked jobs, extrapolated from
//! power-law growth rates) exceeds `mci_stop`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{rank_descending, BinaryBipartiteMatrix, Checkpoint, FitnessResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EfcError {
    #[error("job `{0}` requires no skills; drop empty rows before computing fitness")]
    EmptyJob(String),
    #[error("skill `{0}` is required by no job; drop empty columns before computing fitness")]
    EmptySkill(String),
    #[error("expected {expected} {what} values, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{what} values must be strictly positive and finite")]
    NonPositive { what: &'static str },
    #[error("growth rate needs n >= 3, got {0}")]
    GrowthRateUndefined(usize),
    #[error("invalid fitness configuration: {0}")]
    InvalidConfig(String),
    #[error("fitness iteration produced a non-finite or zero value at iteration {0}")]
    Degenerate(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfcConfig {
    pub mci_stop: f64,
    pub max_iterations: usize,
    /// Iterations between convergence checks; at least 2 because growth rates
    /// compare iteration `n` with `n - 2`.
    pub checkpoint_stride: usize,
    /// Starting complexities by skill id. Skills not listed start at 1.
    pub initial_complexity: Option<BTreeMap<String, f64>>,
}

impl Default for EfcConfig {
    fn default() -> Self {
        Self {
            mci_stop: 1e6,
            max_iterations: 10_000,
            checkpoint_stride: 2,
            initial_complexity: None,
        }
    }
}

impl EfcConfig {
    pub fn validate(&self) -> Result<(), EfcError> {
        if !(self.mci_stop > 0.0) {
            return Err(EfcError::InvalidConfig(format!(
                "mci_stop must be positive, got {}",
                self.mci_stop
            )));
        }
        if self.max_iterations == 0 {
            return Err(EfcError::InvalidConfig("max_iterations must be positive".into()));
        }
        if self.checkpoint_stride < 2 {
            return Err(EfcError::InvalidConfig(format!(
                "checkpoint_stride must be at least 2, got {}",
                self.checkpoint_stride
            )));
        }
        if let Some(init) = &self.initial_complexity {
            if let Some((id, v)) = init.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(EfcError::InvalidConfig(format!(
                    "initial complexity for `{id}` must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

fn check_no_empty_lines(m: &BinaryBipartiteMatrix) -> Result<(), EfcError> {
    if let Some(j) = m.diversification().iter().position(|&d| d == 0) {
        return Err(EfcError::EmptyJob(m.job_ids()[j].clone()));
    }
    if let Some(s) = m.ubiquity().iter().position(|&u| u == 0) {
        return Err(EfcError::EmptySkill(m.skill_ids()[s].clone()));
    }
    Ok(())
}

fn check_vector(what: &'static str, v: &[f64], expected: usize) -> Result<(), EfcError> {
    if v.len() != expected {
        return Err(EfcError::DimensionMismatch {
            what,
            expected,
            actual: v.len(),
        });
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(EfcError::NonPositive { what });
    }
    Ok(())
}

fn normalize_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x /= mean);
}

/// Unchecked map application; inputs validated by the caller.
fn apply_map(m: &BinaryBipartiteMatrix, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (nj, ns) = (m.n_jobs(), m.n_skills());
    let mut f: Vec<f64> = (0..nj)
        .map(|j| {
            m.row(j)
                .iter()
                .zip(q)
                .filter(|(&e, _)| e == 1)
                .map(|(_, &qs)| qs)
                .sum()
        })
        .collect();
    normalize_mean(&mut f);
    let mut inv_sum = vec![0.0; ns];
    for (j, &fj) in f.iter().enumerate() {
        let inv = 1.0 / fj;
        for (acc, &e) in inv_sum.iter_mut().zip(m.row(j)) {
            if e == 1 {
                *acc += inv;
            }
        }
    }
    let mut q_next: Vec<f64> = inv_sum.into_iter().map(|x| 1.0 / x).collect();
    normalize_mean(&mut q_next);
    (f, q_next)
}

/// One application of the map. `fitness` only takes part in validation: the
/// new fitness depends on the complexities alone.
pub fn efc_step(
    m: &BinaryBipartiteMatrix,
    fitness: &[f64],
    complexity: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), EfcError> {
    check_vector("fitness", fitness, m.n_jobs())?;
    check_vector("complexity", complexity, m.n_skills())?;
    check_no_empty_lines(m)?;
    Ok(apply_map(m, complexity))
}

/// Power-law growth exponent between iterations `n - 2` and `n`:
/// `(ln F(n) - ln F(n-2)) / (ln n - ln(n-2))`.
pub fn growth_rate(f_n: f64, f_n_minus_2: f64, n: usize) -> Result<f64, EfcError> {
    if n <= 2 {
        return Err(EfcError::GrowthRateUndefined(n));
    }
    if !(f_n > 0.0 && f_n_minus_2 > 0.0) {
        return Err(EfcError::NonPositive { what: "fitness" });
    }
    let n = n as f64;
    Ok((f_n.ln() - f_n_minus_2.ln()) / (n.ln() - (n - 2.0).ln()))
}

/// Earliest projected rank crossing among adjacently ranked entities.
///
/// `fitness` and `alpha` are aligned per entity in any order; entities are
/// ranked by decreasing fitness with ties kept in index order. For each
/// adjacent pair `(c, c+1)` whose lower-ranked member grows faster, the
/// crossing is projected at `n * (F_c / F_{c+1})^(1 / (alpha_{c+1} - alpha_c))`.
/// Returns `+inf` when no pair qualifies.
pub fn minimum_crossing_iteration(fitness: &[f64], alpha: &[f64], n: usize) -> f64 {
    assert_eq!(fitness.len(), alpha.len());
    let order = rank_descending(fitness);
    order
        .windows(2)
        .filter_map(|w| {
            let (hi, lo) = (w[0], w[1]);
            let gap = alpha[lo] - alpha[hi];
            (gap > 0.0).then(|| n as f64 * (fitness[hi] / fitness[lo]).powf(1.0 / gap))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Iterates the map from the configured initial complexities until the
/// ranking is projected stable, or the iteration budget runs out (then
/// `converged` is false).
pub fn run_efc(m: &BinaryBipartiteMatrix, config: &EfcConfig) -> Result<FitnessResult, EfcError> {
    config.validate()?;
    check_no_empty_lines(m)?;
    let mut q: Vec<f64> = match &config.initial_complexity {
        None => vec![1.0; m.n_skills()],
        Some(init) => m
            .skill_ids()
            .iter()
            .map(|s| init.get(s).copied().unwrap_or(1.0))
            .collect(),
    };
    let mut f = vec![1.0; m.n_jobs()];
    // Fitness at n - 1 and n - 2.
    let mut lag1: Option<Vec<f64>> = None;
    let mut lag2: Option<Vec<f64>>;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for n in 1..=config.max_iterations {
        let (f_next, q_next) = apply_map(m, &q);
        if f_next.iter().chain(&q_next).any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(EfcError::Degenerate(n));
        }
        lag2 = lag1.take();
        lag1 = Some(std::mem::replace(&mut f, f_next));
        q = q_next;
        iterations = n;

        if n >= 3 && n % config.checkpoint_stride == 0 {
            let before = lag2.as_ref().expect("n >= 3 keeps two lags");
            let alpha = f
                .iter()
                .zip(before)
                .map(|(&now, &then)| growth_rate(now, then, n))
                .collect::<Result<Vec<_>, _>>()?;
            let mci = minimum_crossing_iteration(&f, &alpha, n);
            history.push(Checkpoint {
                iteration: n,
                fitness: f.clone(),
                mci,
            });
            if mci >= config.mci_stop {
                converged = true;
                break;
            }
        }
    }

    Ok(FitnessResult {
        job_ids: m.job_ids().to_vec(),
        skill_ids: m.skill_ids().to_vec(),
        fitness: f,
        complexity: q,
        iterations,
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> BinaryBipartiteMatrix {
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|i| (0..n).map(|k| u8::from(i == k)).collect())
            .collect();
        BinaryBipartiteMatrix::from_rows(&rows)
    }

    fn nested(n: usize) -> BinaryBipartiteMatrix {
        // Row i requires the first n - i skills.
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|i| (0..n).map(|k| u8::from(k < n - i)).collect())
            .collect();
        BinaryBipartiteMatrix::from_rows(&rows)
    }

    #[test]
    fn identity_is_a_fixed_point_of_the_step() {
        let m = identity(2);
        let (f, q) = efc_step(&m, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(f, vec![1.0, 1.0]);
        assert_eq!(q, vec![1.0, 1.0]);
    }

    #[test]
    fn one_step_by_hand() {
        // F~ = (2, 1) -> F = (4/3, 2/3);
        // Q~ = (1/(3/4 + 3/2), 1/(3/4)) = (4/9, 4/3) -> Q = (1/2, 3/2).
        let m = BinaryBipartiteMatrix::from_rows(&[vec![1, 1], vec![1, 0]]);
        let (f, q) = efc_step(&m, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        for (got, want) in f.iter().zip([4.0 / 3.0, 2.0 / 3.0]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        for (got, want) in q.iter().zip([0.5, 1.5]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn step_ignores_fitness_scale() {
        let m = BinaryBipartiteMatrix::from_rows(&[vec![1, 1, 0], vec![1, 0, 1], vec![0, 0, 1]]);
        let q = [0.7, 1.1, 1.2];
        let a = efc_step(&m, &[1.0, 2.0, 3.0], &q).unwrap();
        let b = efc_step(&m, &[5.0, 10.0, 15.0], &q).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_rejects_bad_input() {
        let m = BinaryBipartiteMatrix::from_rows(&[vec![1, 0], vec![1, 0]]);
        assert_eq!(
            efc_step(&m, &[1.0, 1.0], &[1.0, 1.0]),
            Err(EfcError::EmptySkill("s1".into()))
        );
        let m = BinaryBipartiteMatrix::from_rows(&[vec![1, 1], vec![0, 0]]);
        assert_eq!(
            efc_step(&m, &[1.0, 1.0], &[1.0, 1.0]),
            Err(EfcError::EmptyJob("j1".into()))
        );
        let m = identity(2);
        assert!(matches!(
            efc_step(&m, &[1.0], &[1.0, 1.0]),
            Err(EfcError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            efc_step(&m, &[1.0, 0.0], &[1.0, 1.0]),
            Err(EfcError::NonPositive { .. })
        ));
    }

    #[test]
    fn growth_rate_examples() {
        assert!((growth_rate(8.0, 2.0, 4).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(growth_rate(3.0, 3.0, 7).unwrap(), 0.0);
        let want = -1.0 / (10f64.ln() - 8f64.ln());
        let got = growth_rate(1.0, std::f64::consts::E, 10).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - -4.4814).abs() < 1e-4);
        assert_eq!(growth_rate(1.0, 1.0, 2), Err(EfcError::GrowthRateUndefined(2)));
        assert!(growth_rate(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn crossing_iteration_examples() {
        assert_eq!(minimum_crossing_iteration(&[4.0, 2.0], &[0.0, 1.0], 10), 20.0);
        assert_eq!(minimum_crossing_iteration(&[2.0, 4.0], &[1.0, 0.0], 10), 20.0);
        assert_eq!(
            minimum_crossing_iteration(&[4.0, 2.0, 1.0], &[0.5, 0.5, 0.5], 10),
            f64::INFINITY
        );
        // (4, 2) with gap 1 projects to 20; (2, 1.5) with gap ln(4/3)/ln(1.5)
        // projects to 15.
        let gap = (2.0f64 / 1.5).ln() / 1.5f64.ln();
        let mci = minimum_crossing_iteration(&[4.0, 2.0, 1.5], &[0.0, 1.0, 1.0 + gap], 10);
        assert!((mci - 15.0).abs() < 1e-12, "{mci}");
        // Faster-growing leader never gets caught.
        assert_eq!(minimum_crossing_iteration(&[4.0, 2.0], &[1.0, 0.0], 10), f64::INFINITY);
    }

    #[test]
    fn identity_converges_at_first_checkpoint() {
        let r = run_efc(&identity(5), &EfcConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 4);
        assert_eq!(r.history.len(), 1);
        assert!(r.fitness.iter().all(|f| (f - 1.0).abs() < 1e-12));
        assert!(r.complexity.iter().all(|q| (q - 1.0).abs() < 1e-12));
    }

    #[test]
    fn two_by_two_ranking() {
        let m = BinaryBipartiteMatrix::from_rows(&[vec![1, 1], vec![1, 0]]);
        let r = run_efc(&m, &EfcConfig::default()).unwrap();
        assert_eq!(r.job_ranking(), vec![0, 1]);
        assert!(r.fitness[0] > r.fitness[1]);
    }

    #[test]
    fn nested_ranking_follows_diversification() {
        let r = run_efc(&nested(5), &EfcConfig::default()).unwrap();
        assert_eq!(r.job_ranking(), vec![0, 1, 2, 3, 4]);
        let mean = r.fitness.iter().sum::<f64>() / 5.0;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    /// Rankings still cross after 30 iterations: MCI stays below 100.
    fn crossing() -> BinaryBipartiteMatrix {
        BinaryBipartiteMatrix::from_rows(&[vec![1, 1, 1, 1], vec![0, 1, 1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 1]])
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let m = crossing();
        let cfg = EfcConfig {
            max_iterations: 20,
            ..EfcConfig::default()
        };
        let r = run_efc(&m, &cfg).unwrap();
        assert_eq!(r.iterations, 20);
        assert!(!r.converged);
        assert_eq!(r.history.last().unwrap().iteration, 20);
    }

    #[test]
    fn config_validation() {
        let bad = EfcConfig {
            checkpoint_stride: 1,
            ..EfcConfig::default()
        };
        assert!(matches!(bad.validate(), Err(EfcError::InvalidConfig(_))));
        let bad = EfcConfig {
            mci_stop: 0.0,
            ..EfcConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = EfcConfig {
            initial_complexity: Some([("s0".to_string(), -1.0)].into()),
            ..EfcConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn stride_controls_checkpoints() {
        let m = crossing();
        let cfg = EfcConfig {
            max_iterations: 30,
            checkpoint_stride: 5,
            ..EfcConfig::default()
        };
        let r = run_efc(&m, &cfg).unwrap();
        let its: Vec<usize> = r.history.iter().map(|c| c.iteration).collect();
        assert_eq!(its, vec![5, 10, 15, 20, 25, 30]);
    }
}
