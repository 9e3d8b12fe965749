//! Linear re-ranking model and its coordinate ascent trainer.
//!
//! A document's score is
//!
//! ```text
//! Σ_i λt_i · term_cos_i + Σ_i λe_i · entity_cos_i + λ · fsdm_norm
//! ```
//!
//! and the 13 weights are fitted by cycling through the coordinates, trying
//! a fixed grid of additive and multiplicative moves for each and keeping the
//! move that most improves mean NDCG@k on the training queries.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Field, Qrels};
use crate::error::{Error, Result};
use crate::eval::{dcg, ideal_dcg, RankedList};
use crate::fsdm::{sort_scored, ScoredPool};
use crate::scalar::Scalar;
use crate::semantics::{feature_names, Features, FEATURE_COUNT};

/// `(s - min) / (max - min)`; every value maps to 1 when all scores are equal.
pub fn minmax_normalize<S: Scalar>(scores: &[S]) -> Result<Vec<S>> {
    let Some(&first) = scores.first() else {
        return Err(Error::InvalidParameter("cannot normalize an empty score list".into()));
    };
    let (lo, hi) = scores
        .iter()
        .fold((first, first), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if hi == lo {
        return Ok(vec![S::one(); scores.len()]);
    }
    let range = hi - lo;
    Ok(scores
        .iter()
        .map(|&s| ((s - lo) / range).max(S::zero()).min(S::one()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights<S> {
    pub term: [S; Field::COUNT],
    pub entity: [S; Field::COUNT],
    pub fsdm: S,
}

impl<S: Scalar> Weights<S> {
    pub fn zeros() -> Self {
        Self::from_array([S::zero(); FEATURE_COUNT])
    }

    /// All weight on the normalized FSDM score.
    pub fn fsdm_only() -> Self {
        Weights {
            fsdm: S::one(),
            ..Self::zeros()
        }
    }

    pub fn uniform(value: S) -> Self {
        Self::from_array([value; FEATURE_COUNT])
    }

    pub fn to_array(&self) -> [S; FEATURE_COUNT] {
        std::array::from_fn(|i| match i {
            i if i < Field::COUNT => self.term[i],
            i if i < 2 * Field::COUNT => self.entity[i - Field::COUNT],
            _ => self.fsdm,
        })
    }

    pub fn from_array(w: [S; FEATURE_COUNT]) -> Self {
        Weights {
            term: std::array::from_fn(|i| w[i]),
            entity: std::array::from_fn(|i| w[Field::COUNT + i]),
            fsdm: w[2 * Field::COUNT],
        }
    }

    pub fn scaled(&self, factor: S) -> Self {
        Self::from_array(self.to_array().map(|w| w * factor))
    }

    pub fn score_array(&self, features: &[S; FEATURE_COUNT]) -> S {
        score_with(&self.to_array(), features)
    }

    /// Renders the model file: one `name=value` line per weight.
    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        for (name, w) in feature_names().iter().zip(self.to_array()) {
            writeln!(out, "{name}={w}").unwrap();
        }
        out
    }

    pub fn parse_model(text: &str, context: &str) -> Result<Self> {
        let names = feature_names();
        let slot: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut values: [Option<S>; FEATURE_COUNT] = [None; FEATURE_COUNT];
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(context, line_no, "expected name=value"))?;
            let idx = *slot
                .get(name.trim())
                .ok_or_else(|| Error::parse(context, line_no, format!("unknown weight {name:?}")))?;
            let v: S = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(context, line_no, format!("weight {value:?} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(context, line_no, "weight must be finite"));
            }
            if values[idx].replace(v).is_some() {
                return Err(Error::parse(context, line_no, format!("weight {name:?} given twice")));
            }
        }
        let mut w = [S::zero(); FEATURE_COUNT];
        for (i, v) in values.iter().enumerate() {
            w[i] = v.ok_or_else(|| Error::Validation(format!("{context}: missing weight {:?}", names[i])))?;
        }
        Ok(Self::from_array(w))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_model_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_model(&text, &path.display().to_string())
    }
}

fn score_with<S: Scalar>(weights: &[S; FEATURE_COUNT], features: &[S; FEATURE_COUNT]) -> S {
    weights
        .iter()
        .zip(features)
        .fold(S::zero(), |acc, (&w, &x)| acc + w * x)
}

pub fn linear_score<S: Scalar>(model: &Weights<S>, features: &Features<S>) -> S {
    model.score_array(&features.to_array())
}

/// Reorders a pool by model score; ties go to the smaller doc_id.
/// `features` must list the pool's documents in pool order.
pub fn rerank<S: Scalar>(pool: &ScoredPool, features: &[Features<S>], model: &Weights<S>) -> Result<RankedList> {
    if features.len() != pool.len() {
        return Err(Error::Validation(format!(
            "query {:?}: {} feature rows for a pool of {}",
            pool.query_id,
            features.len(),
            pool.len()
        )));
    }
    let mut entries = Vec::with_capacity(pool.len());
    for ((doc_id, _), f) in pool.entries.iter().zip(features) {
        if &f.doc_id != doc_id || f.query_id != pool.query_id {
            return Err(Error::Validation(format!(
                "features for ({}, {}) do not line up with pool entry ({}, {})",
                f.query_id, f.doc_id, pool.query_id, doc_id
            )));
        }
        entries.push((doc_id.clone(), linear_score(model, f).as_f64()));
    }
    sort_scored(&mut entries);
    Ok(RankedList::new(pool.query_id.clone(), entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Maximum number of full passes over the coordinates.
    pub max_iterations: usize,
    /// Random initializations, in addition to the fixed starts.
    pub restarts: usize,
    /// NDCG cutoff of the objective.
    pub cutoff: usize,
    /// Step sizes δ; each coordinate tries w ± δ and w · (1 ± δ).
    pub step_grid: Vec<f64>,
    /// A pass that improves the objective by less than this ends training.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iterations: 25,
            restarts: 2,
            cutoff: 10,
            step_grid: vec![0.05, 0.1, 0.2, 0.5, 1.0],
            tolerance: 1e-6,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.restarts == 0 || self.cutoff == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations, restarts and cutoff must be at least 1".into(),
            ));
        }
        if self.step_grid.is_empty() || self.step_grid.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidParameter("step grid must hold positive steps".into()));
        }
        Ok(())
    }
}

/// One query's pool in trainer form. Documents are kept in ascending doc_id
/// order so a stable sort by score reproduces the doc_id tie-break.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingQuery<S> {
    pub query_id: String,
    pub doc_ids: Vec<String>,
    pub features: Vec<[S; FEATURE_COUNT]>,
    pub grades: Vec<u32>,
    /// Ideal DCG over every judged document of the query at the trainer's cutoff.
    pub ideal_dcg: f64,
}

impl<S: Scalar> TrainingQuery<S> {
    pub fn new(query_id: &str, rows: &[Features<S>], qrels: &Qrels, cutoff: usize) -> Self {
        let mut rows: Vec<&Features<S>> = rows.iter().collect();
        rows.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        TrainingQuery {
            query_id: query_id.to_owned(),
            doc_ids: rows.iter().map(|f| f.doc_id.clone()).collect(),
            features: rows.iter().map(|f| f.to_array()).collect(),
            grades: rows.iter().map(|f| qrels.grade(query_id, &f.doc_id)).collect(),
            ideal_dcg: ideal_dcg(qrels.judged(query_id).map(|(_, g)| g), cutoff),
        }
    }

    /// NDCG at `cutoff` of the ranking induced by `weights`.
    pub fn ndcg(&self, weights: &[S; FEATURE_COUNT], cutoff: usize) -> f64 {
        if self.ideal_dcg <= 0.0 {
            return 0.0;
        }
        let scores: Vec<S> = self.features.iter().map(|x| score_with(weights, x)).collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
        dcg(order.iter().map(|&i| self.grades[i]), cutoff) / self.ideal_dcg
    }
}

/// Groups feature rows by query (first-appearance order) for training.
pub fn training_set<S: Scalar>(features: &[Features<S>], qrels: &Qrels, cutoff: usize) -> Vec<TrainingQuery<S>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<Features<S>>> = HashMap::new();
    for f in features {
        let g = groups.entry(f.query_id.as_str()).or_insert_with(|| {
            order.push(f.query_id.as_str());
            Vec::new()
        });
        g.push(f.clone());
    }
    order
        .into_iter()
        .map(|q| TrainingQuery::new(q, &groups[q], qrels, cutoff))
        .collect()
}

/// Mean NDCG over `queries`; queries without relevant documents count as 0.
pub fn mean_ndcg<S: Scalar>(queries: &[TrainingQuery<S>], model: &Weights<S>, cutoff: usize) -> f64 {
    objective(queries, &model.to_array(), cutoff)
}

fn objective<S: Scalar>(queries: &[TrainingQuery<S>], w: &[S; FEATURE_COUNT], cutoff: usize) -> f64 {
    if queries.is_empty() {
        return 0.0;
    }
    queries.iter().map(|q| q.ndcg(w, cutoff)).sum::<f64>() / queries.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Start {
    /// Every weight 0.1.
    Uniform,
    /// All weight on the FSDM feature.
    FsdmOnly,
    /// Weights uniform in [0, 1].
    Random(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub start: Start,
    pub initial: f64,
    /// Objective after every accepted coordinate move.
    pub accepted: Vec<f64>,
    pub final_objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<S> {
    pub model: Weights<S>,
    pub objective: f64,
    pub restarts: Vec<RestartTrace>,
}

fn climb<S: Scalar>(
    queries: &[TrainingQuery<S>],
    start: Start,
    mut w: [S; FEATURE_COUNT],
    config: &TrainConfig,
) -> ([S; FEATURE_COUNT], RestartTrace) {
    let mut best = objective(queries, &w, config.cutoff);
    let mut trace = RestartTrace {
        start,
        initial: best,
        accepted: Vec::new(),
        final_objective: best,
        iterations: 0,
    };
    for _ in 0..config.max_iterations {
        trace.iterations += 1;
        let pass_start = best;
        for j in 0..FEATURE_COUNT {
            let current = w[j];
            let mut pick: Option<(S, f64)> = None;
            for &delta in &config.step_grid {
                let d = S::of(delta);
                for candidate in [
                    current + d,
                    current - d,
                    current * (S::one() + d),
                    current * (S::one() - d),
                ] {
                    if candidate == current || !candidate.is_finite() {
                        continue;
                    }
                    w[j] = candidate;
                    let o = objective(queries, &w, config.cutoff);
                    if o > pick.map_or(best, |(_, b)| b) {
                        pick = Some((candidate, o));
                    }
                }
            }
            match pick {
                Some((value, o)) => {
                    w[j] = value;
                    best = o;
                    trace.accepted.push(o);
                }
                None => w[j] = current,
            }
        }
        if best - pass_start < config.tolerance {
            break;
        }
    }
    trace.final_objective = best;
    (w, trace)
}

/// Fits the linear model by coordinate ascent on mean NDCG@`cutoff`.
///
/// Runs from an all-0.1 start, an FSDM-only start and `restarts` seeded
/// random starts, and returns the best result (earliest start on ties).
pub fn coordinate_ascent_train<S: Scalar>(
    queries: &[TrainingQuery<S>],
    config: &TrainConfig,
) -> Result<TrainOutcome<S>> {
    config.validate()?;
    if !queries.iter().any(|q| q.ideal_dcg > 0.0) {
        return Err(Error::Validation(
            "no training query has a judged relevant document; NDCG is undefined".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts = vec![
        (Start::Uniform, Weights::uniform(S::of(0.1)).to_array()),
        (Start::FsdmOnly, Weights::fsdm_only().to_array()),
    ];
    for r in 0..config.restarts {
        starts.push((Start::Random(r), std::array::from_fn(|_| S::of(rng.gen::<f64>()))));
    }

    let mut best: Option<([S; FEATURE_COUNT], f64)> = None;
    let mut traces = Vec::with_capacity(starts.len());
    for (start, init) in starts {
        let (w, trace) = climb(queries, start, init, config);
        log::debug!(
            "coordinate ascent {:?}: {:.6} -> {:.6} after {} passes",
            start,
            trace.initial,
            trace.final_objective,
            trace.iterations
        );
        if best.is_none_or(|(_, b)| trace.final_objective > b) {
            best = Some((w, trace.final_objective));
        }
        traces.push(trace);
    }
    let (w, objective) = best.expect("at least one start");
    Ok(TrainOutcome {
        model: Weights::from_array(w),
        objective,
        restarts: traces,
    })
}
