//! Fielded Sequential Dependence Model scoring and candidate pool retrieval.
//!
//! A query contributes three kinds of cliques: every unigram, every adjacent
//! term pair as an exact bigram, and every adjacent term pair as an unordered
//! co-occurrence within a window. Each clique is scored as the log of a
//! field-weighted mixture of Dirichlet-smoothed field language models, and
//! the three clique sums are combined with the clique weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Field, Query};
use crate::error::{Error, Result};
use crate::eval::RankedList;
use crate::index::{check_window, FieldedIndex, DEFAULT_WINDOW};

/// Probability used in place of zero so the log stays finite.
pub const PROBABILITY_FLOOR: f64 = 1e-10;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clique {
    Unigram,
    Ordered,
    Unordered,
}

impl Clique {
    pub const ALL: [Clique; 3] = [Clique::Unigram, Clique::Ordered, Clique::Unordered];

    fn index(self) -> usize {
        self as usize
    }

    fn arity(self) -> usize {
        match self {
            Clique::Unigram => 1,
            Clique::Ordered | Clique::Unordered => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsdmParams {
    /// Weights of the unigram, ordered and unordered cliques.
    pub clique_weights: [f64; 3],
    /// One distribution over the six fields per clique type.
    pub field_weights: [[f64; Field::COUNT]; 3],
    /// Dirichlet prior strength per field.
    pub dirichlet_mu: [f64; Field::COUNT],
    pub window: usize,
}

impl Default for FsdmParams {
    fn default() -> Self {
        FsdmParams {
            clique_weights: [0.8, 0.1, 0.1],
            field_weights: [[1.0 / Field::COUNT as f64; Field::COUNT]; 3],
            dirichlet_mu: [2500.0; Field::COUNT],
            window: DEFAULT_WINDOW,
        }
    }
}

fn check_simplex(name: &str, w: &[f64]) -> Result<()> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be finite and non-negative: {w:?}"
        )));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::InvalidParameter(format!("{name} must sum to 1, got {sum}")));
    }
    Ok(())
}

impl FsdmParams {
    pub fn validate(&self) -> Result<()> {
        check_simplex("clique weights", &self.clique_weights)?;
        for clique in Clique::ALL {
            check_simplex(
                &format!("{clique:?} field weights"),
                &self.field_weights[clique.index()],
            )?;
        }
        if self.dirichlet_mu.iter().any(|m| !m.is_finite() || *m <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dirichlet mu must be positive: {:?}",
                self.dirichlet_mu
            )));
        }
        check_window(self.window)
    }

    pub fn clique_weight(&self, clique: Clique) -> f64 {
        self.clique_weights[clique.index()]
    }

    pub fn field_weight(&self, clique: Clique, field: Field) -> f64 {
        self.field_weights[clique.index()][field.index()]
    }
}

/// `(count_in_doc + mu * p_collection) / (field_length + mu)`.
pub fn dirichlet_estimate(count_in_doc: f64, field_length: f64, p_collection: f64, mu: f64) -> f64 {
    (count_in_doc + mu * p_collection) / (field_length + mu)
}

fn smoothed(count_in_doc: u64, field_length: u64, count_in_collection: u64, collection_length: u64, mu: f64) -> f64 {
    if collection_length == 0 {
        return PROBABILITY_FLOOR;
    }
    let p_collection = count_in_collection as f64 / collection_length as f64;
    let p = dirichlet_estimate(count_in_doc as f64, field_length as f64, p_collection, mu);
    if p > 0.0 {
        p
    } else {
        PROBABILITY_FLOOR
    }
}

/// Dirichlet-smoothed probability of a clique in one document field.
///
/// Falls back to [`PROBABILITY_FLOOR`] when the field is empty across the
/// whole collection or when the estimate is zero.
pub fn smoothed_field_prob(
    index: &FieldedIndex,
    field: Field,
    doc_id: &str,
    count_in_doc: u64,
    count_in_collection: u64,
    params: &FsdmParams,
) -> Result<f64> {
    let doc = index.doc_index(doc_id)?;
    Ok(smoothed(
        count_in_doc,
        index.field_length(field, doc) as u64,
        count_in_collection,
        index.collection_field_length(field),
        params.dirichlet_mu[field.index()],
    ))
}

/// One query clique with its per-field collection counts.
#[derive(Debug, Clone)]
struct CliqueStats {
    clique: Clique,
    first: String,
    second: Option<String>,
    collection_counts: [u64; Field::COUNT],
}

impl CliqueStats {
    fn new(index: &FieldedIndex, clique: Clique, terms: &[String], window: usize) -> Self {
        let first = terms[0].clone();
        let second = terms.get(1).cloned();
        let collection_counts = Field::ALL.map(|f| match (clique, &second) {
            (Clique::Unigram, _) => index.collection_term_freq(f, &first),
            (Clique::Ordered, Some(s)) => index.collection_ordered_count(f, &first, s),
            (Clique::Unordered, Some(s)) => index
                .collection_unordered_count(f, &first, s, window)
                .expect("window validated"),
            _ => unreachable!("arity checked by caller"),
        });
        CliqueStats {
            clique,
            first,
            second,
            collection_counts,
        }
    }

    fn count_in_doc(&self, index: &FieldedIndex, field: Field, doc: u32, window: usize) -> u64 {
        match (self.clique, &self.second) {
            (Clique::Unigram, _) => index.term_count(field, doc, &self.first) as u64,
            (Clique::Ordered, Some(s)) => index.ordered_count(field, doc, &self.first, s) as u64,
            (Clique::Unordered, Some(s)) => index.unordered_count(field, doc, &self.first, s, window) as u64,
            _ => unreachable!(),
        }
    }

    /// log of the field-weighted mixture of smoothed probabilities.
    fn feature(&self, index: &FieldedIndex, doc: u32, params: &FsdmParams) -> f64 {
        let mixture: f64 = Field::ALL
            .iter()
            .map(|&f| {
                let w = params.field_weight(self.clique, f);
                if w == 0.0 {
                    return 0.0;
                }
                w * smoothed(
                    self.count_in_doc(index, f, doc, params.window),
                    index.field_length(f, doc) as u64,
                    self.collection_counts[f.index()],
                    index.collection_field_length(f),
                    params.dirichlet_mu[f.index()],
                )
            })
            .sum();
        mixture.max(PROBABILITY_FLOOR).ln()
    }
}

/// Clique feature for a single document; `terms` holds one term for
/// unigrams and two for the bigram cliques.
pub fn clique_feature(
    index: &FieldedIndex,
    doc_id: &str,
    clique: Clique,
    terms: &[String],
    params: &FsdmParams,
) -> Result<f64> {
    if terms.len() != clique.arity() {
        return Err(Error::InvalidParameter(format!(
            "{clique:?} clique takes {} term(s), got {}",
            clique.arity(),
            terms.len()
        )));
    }
    params.validate()?;
    let doc = index.doc_index(doc_id)?;
    Ok(CliqueStats::new(index, clique, terms, params.window).feature(index, doc, params))
}

/// Scores documents for one query; collection statistics are computed once.
#[derive(Debug)]
pub struct FsdmScorer<'a> {
    index: &'a FieldedIndex,
    params: &'a FsdmParams,
    cliques: Vec<CliqueStats>,
}

impl<'a> FsdmScorer<'a> {
    pub fn new(index: &'a FieldedIndex, terms: &[String], params: &'a FsdmParams) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Validation("cannot score an empty query".into()));
        }
        params.validate()?;
        let mut cliques: Vec<CliqueStats> = terms
            .iter()
            .map(|t| CliqueStats::new(index, Clique::Unigram, std::slice::from_ref(t), params.window))
            .collect();
        for pair in terms.windows(2) {
            cliques.push(CliqueStats::new(index, Clique::Ordered, pair, params.window));
            cliques.push(CliqueStats::new(index, Clique::Unordered, pair, params.window));
        }
        Ok(FsdmScorer { index, params, cliques })
    }

    pub fn score(&self, doc: u32) -> f64 {
        let mut sums = [0.0; 3];
        for c in &self.cliques {
            sums[c.clique.index()] += c.feature(self.index, doc, self.params);
        }
        Clique::ALL
            .iter()
            .map(|&c| self.params.clique_weight(c) * sums[c.index()])
            .sum()
    }

    /// Documents containing at least one query term in any field, ascending.
    pub fn candidates(&self) -> Vec<u32> {
        let mut docs: Vec<u32> = self
            .cliques
            .iter()
            .filter(|c| c.clique == Clique::Unigram)
            .flat_map(|c| {
                Field::ALL
                    .into_iter()
                    .flat_map(move |f| self.index.postings(f, &c.first))
            })
            .map(|p| p.doc)
            .collect();
        docs.sort_unstable();
        docs.dedup();
        docs
    }
}

/// Log-domain FSDM score of one document.
pub fn score_fsdm(index: &FieldedIndex, terms: &[String], doc_id: &str, params: &FsdmParams) -> Result<f64> {
    let doc = index.doc_index(doc_id)?;
    Ok(FsdmScorer::new(index, terms, params)?.score(doc))
}

/// Top-n documents by FSDM score for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPool {
    pub query_id: String,
    /// (doc_id, log-domain score), best first, ties by ascending doc_id.
    pub entries: Vec<(String, f64)>,
}

impl ScoredPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, s)| *s).collect()
    }
}

impl From<ScoredPool> for RankedList {
    fn from(pool: ScoredPool) -> Self {
        RankedList {
            query_id: pool.query_id,
            entries: pool.entries,
        }
    }
}

impl From<RankedList> for ScoredPool {
    fn from(list: RankedList) -> Self {
        ScoredPool {
            query_id: list.query_id,
            entries: list.entries,
        }
    }
}

/// Orders by score descending, then doc_id ascending.
pub(crate) fn sort_scored(entries: &mut [(String, f64)]) {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

/// Scores every candidate document and keeps the best `n`.
pub fn retrieve_pool(index: &FieldedIndex, query: &Query, params: &FsdmParams, n: usize) -> Result<ScoredPool> {
    if n == 0 {
        return Err(Error::InvalidParameter("pool size must be at least 1".into()));
    }
    let scorer = FsdmScorer::new(index, &query.terms, params)?;
    let mut entries: Vec<(String, f64)> = scorer
        .candidates()
        .into_par_iter()
        .map(|doc| (index.doc_id(doc).to_owned(), scorer.score(doc)))
        .collect();
    sort_scored(&mut entries);
    entries.truncate(n);
    Ok(ScoredPool {
        query_id: query.query_id.clone(),
        entries,
    })
}
