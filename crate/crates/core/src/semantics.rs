//! Per-field semantic features for re-ranking.
//!
//! For each of the six fields, the cosine between the query's mean word
//! vector and the field's mean word vector (term space), and the same
//! construction over linked entities and entity vectors (entity space).
//! A missing centroid (empty field, or nothing in vocabulary) gives 0.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{Corpus, Field, FieldedDocument, Query};
use crate::embedding::{cosine, Embeddings};
use crate::error::{Error, Result};
use crate::fsdm::ScoredPool;
use crate::ltr::minmax_normalize;
use crate::scalar::Scalar;

pub const FEATURE_COUNT: usize = 2 * Field::COUNT + 1;

/// Feature names in vector order: `term.<field>` ×6, `entity.<field>` ×6, `fsdm`.
pub fn feature_names() -> [String; FEATURE_COUNT] {
    std::array::from_fn(|i| match i {
        i if i < Field::COUNT => format!("term.{}", Field::ALL[i]),
        i if i < 2 * Field::COUNT => format!("entity.{}", Field::ALL[i - Field::COUNT]),
        _ => "fsdm".to_owned(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Features<S> {
    pub query_id: String,
    pub doc_id: String,
    pub term_cos: [S; Field::COUNT],
    pub entity_cos: [S; Field::COUNT],
    /// Min-max normalized FSDM score within the query's pool.
    pub fsdm_norm: S,
}

impl<S: Scalar> Features<S> {
    pub fn to_array(&self) -> [S; FEATURE_COUNT] {
        std::array::from_fn(|i| match i {
            i if i < Field::COUNT => self.term_cos[i],
            i if i < 2 * Field::COUNT => self.entity_cos[i - Field::COUNT],
            _ => self.fsdm_norm,
        })
    }

    pub fn from_array(query_id: impl Into<String>, doc_id: impl Into<String>, values: [S; FEATURE_COUNT]) -> Self {
        Features {
            query_id: query_id.into(),
            doc_id: doc_id.into(),
            term_cos: std::array::from_fn(|i| values[i]),
            entity_cos: std::array::from_fn(|i| values[Field::COUNT + i]),
            fsdm_norm: values[2 * Field::COUNT],
        }
    }

    fn check_ranges(&self) -> Result<()> {
        let one = S::one();
        let cos_ok = self
            .term_cos
            .iter()
            .chain(&self.entity_cos)
            .all(|&c| c.is_finite() && c >= -one && c <= one);
        let fsdm_ok = self.fsdm_norm >= S::zero() && self.fsdm_norm <= one;
        if !(cos_ok && fsdm_ok) {
            return Err(Error::Validation(format!(
                "features of ({}, {}) out of range",
                self.query_id, self.doc_id
            )));
        }
        Ok(())
    }
}

fn cos_or_zero<S: Scalar>(a: Option<&[S]>, b: Option<&[S]>) -> S {
    match (a, b) {
        (Some(a), Some(b)) => cosine(a, b).expect("vectors of one table share a dimension"),
        _ => S::zero(),
    }
}

/// Cosine between the query term centroid and each field's term centroid.
pub fn term_field_cosines<S: Scalar>(query: &Query, doc: &FieldedDocument, words: &Embeddings<S>) -> [S; Field::COUNT] {
    let q = words.centroid(query.terms.iter().map(String::as_str));
    Field::ALL.map(|f| {
        let d = words.centroid(doc.field(f).terms.iter().map(String::as_str));
        cos_or_zero(q.as_deref(), d.as_deref())
    })
}

/// Cosine between the query entity centroid and each field's entity centroid.
pub fn entity_field_cosines<S: Scalar>(
    query: &Query,
    doc: &FieldedDocument,
    entities: &Embeddings<S>,
) -> [S; Field::COUNT] {
    let q = entities.centroid(query.entities.iter().map(String::as_str));
    Field::ALL.map(|f| {
        let d = entities.centroid(doc.field(f).entities.iter().map(String::as_str));
        cos_or_zero(q.as_deref(), d.as_deref())
    })
}

type FieldCentroids<S> = [Option<Vec<S>>; Field::COUNT];

/// Computes features while caching document field centroids.
#[derive(Debug)]
pub struct Featurizer<'t, S> {
    words: &'t Embeddings<S>,
    entities: &'t Embeddings<S>,
    cache: HashMap<String, (FieldCentroids<S>, FieldCentroids<S>)>,
}

impl<'t, S: Scalar> Featurizer<'t, S> {
    pub fn new(words: &'t Embeddings<S>, entities: &'t Embeddings<S>) -> Self {
        Featurizer {
            words,
            entities,
            cache: HashMap::new(),
        }
    }

    fn doc_centroids(&mut self, doc: &FieldedDocument) -> &(FieldCentroids<S>, FieldCentroids<S>) {
        let (words, entities) = (self.words, self.entities);
        self.cache.entry(doc.doc_id.clone()).or_insert_with(|| {
            let terms = Field::ALL.map(|f| words.centroid(doc.field(f).terms.iter().map(String::as_str)));
            let ents = Field::ALL.map(|f| entities.centroid(doc.field(f).entities.iter().map(String::as_str)));
            (terms, ents)
        })
    }

    /// (term cosines, entity cosines) for one pair.
    pub fn cosines(&mut self, query: &Query, doc: &FieldedDocument) -> ([S; Field::COUNT], [S; Field::COUNT]) {
        let qt = self.words.centroid(query.terms.iter().map(String::as_str));
        let qe = self.entities.centroid(query.entities.iter().map(String::as_str));
        let (dt, de) = self.doc_centroids(doc);
        (
            std::array::from_fn(|i| cos_or_zero(qt.as_deref(), dt[i].as_deref())),
            std::array::from_fn(|i| cos_or_zero(qe.as_deref(), de[i].as_deref())),
        )
    }

    /// One feature vector per pool entry, in pool order.
    pub fn extract(&mut self, query: &Query, pool: &ScoredPool, corpus: &Corpus) -> Result<Vec<Features<S>>> {
        if pool.is_empty() {
            return Err(Error::Validation(format!(
                "pool for query {:?} is empty",
                query.query_id
            )));
        }
        let norm = minmax_normalize(&pool.scores().into_iter().map(S::of).collect::<Vec<S>>())?;
        pool.entries
            .iter()
            .zip(norm)
            .map(|((doc_id, _), fsdm_norm)| {
                let doc = corpus
                    .get(doc_id)
                    .ok_or_else(|| Error::UnknownDocument(doc_id.clone()))?;
                let (term_cos, entity_cos) = self.cosines(query, doc);
                Ok(Features {
                    query_id: query.query_id.clone(),
                    doc_id: doc_id.clone(),
                    term_cos,
                    entity_cos,
                    fsdm_norm,
                })
            })
            .collect()
    }
}

pub fn extract_features<S: Scalar>(
    query: &Query,
    pool: &ScoredPool,
    corpus: &Corpus,
    words: &Embeddings<S>,
    entities: &Embeddings<S>,
) -> Result<Vec<Features<S>>> {
    Featurizer::new(words, entities).extract(query, pool, corpus)
}

/// Writes `query_id<TAB>doc_id<TAB>f1 .. f13` rows.
pub fn write_features<S: Scalar>(features: &[Features<S>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for f in features {
        let mut line = format!("{}\t{}", f.query_id, f.doc_id);
        for v in f.to_array() {
            line.push('\t');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_features<S: Scalar>(path: impl AsRef<Path>) -> Result<Vec<Features<S>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_features(BufReader::new(file), &path.display().to_string())
}

pub fn parse_features<S: Scalar>(reader: impl BufRead, context: &str) -> Result<Vec<Features<S>>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 + FEATURE_COUNT {
            return Err(Error::parse(
                context,
                line_no,
                format!(
                    "expected {} tab-separated columns, found {}",
                    2 + FEATURE_COUNT,
                    cols.len()
                ),
            ));
        }
        let mut values = [S::zero(); FEATURE_COUNT];
        for (v, raw) in values.iter_mut().zip(&cols[2..]) {
            *v = raw
                .parse()
                .map_err(|_| Error::parse(context, line_no, format!("feature {raw:?} is not a number")))?;
        }
        let f = Features::from_array(cols[0], cols[1], values);
        f.check_ranges()
            .map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        out.push(f);
    }
    Ok(out)
}
