//! Dense vector tables for words and entities.
//!
//! Vector files use the word2vec/GloVe text layout: one `token v1 v2 ...`
//! entry per line, no header.

pub mod skipgram;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use skipgram::{train_skipgram, SkipgramConfig, TrainingReport};

#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings<S> {
    dim: Option<usize>,
    vectors: HashMap<String, Vec<S>>,
    duplicates: usize,
}

impl<S> Default for Embeddings<S> {
    fn default() -> Self {
        Embeddings {
            dim: None,
            vectors: HashMap::new(),
            duplicates: 0,
        }
    }
}

impl<S: Scalar> Embeddings<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dim(dim: usize) -> Self {
        Embeddings {
            dim: Some(dim),
            ..Self::default()
        }
    }

    /// Undefined until the first vector is inserted.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Number of insertions that replaced an existing token.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, token: &str) -> Option<&[S]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Inserts or replaces a vector. The first vector fixes the dimension.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<S>) -> Result<()> {
        let token = token.into();
        if vector.is_empty() {
            return Err(Error::Validation(format!("vector for {token:?} is empty")));
        }
        match self.dim {
            Some(d) if d != vector.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: vector.len(),
                })
            }
            None => self.dim = Some(vector.len()),
            _ => {}
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!(
                "vector for {token:?} has a non-finite component"
            )));
        }
        if self.vectors.insert(token, vector).is_some() {
            self.duplicates += 1;
        }
        Ok(())
    }

    /// Multiplies every component of every vector by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        Embeddings {
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|(t, v)| (t.clone(), v.iter().map(|&x| x * factor).collect()))
                .collect(),
            duplicates: self.duplicates,
        }
    }

    /// Mean of the vectors of the tokens present in the table, counting
    /// repeated tokens with multiplicity. `None` when no token is present.
    ///
    /// Vectors are summed in token order so the result does not depend on
    /// the order of `tokens`.
    pub fn centroid<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> Option<Vec<S>> {
        let mut present: Vec<(&str, &Vec<S>)> = tokens
            .into_iter()
            .filter_map(|t| self.vectors.get_key_value(t).map(|(k, v)| (k.as_str(), v)))
            .collect();
        if present.is_empty() {
            return None;
        }
        present.sort_unstable_by(|a, b| a.0.cmp(b.0));
        let dim = present[0].1.len();
        let mut sum = vec![S::zero(); dim];
        for (_, v) in &present {
            for (acc, &x) in sum.iter_mut().zip(v.iter()) {
                *acc = *acc + x;
            }
        }
        let n = S::of(present.len() as f64);
        Some(sum.into_iter().map(|x| x / n).collect())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut tokens: Vec<&String> = self.vectors.keys().collect();
        tokens.sort();
        for t in tokens {
            let mut line = t.clone();
            for x in &self.vectors[t] {
                line.push(' ');
                line.push_str(&x.to_string());
            }
            writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn load_vectors<S: Scalar>(path: impl AsRef<Path>) -> Result<Embeddings<S>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let table = read_vectors(BufReader::new(file), &path.display().to_string())?;
    if table.duplicates() > 0 {
        log::warn!(
            "{}: {} duplicate tokens, last occurrence kept",
            path.display(),
            table.duplicates()
        );
    }
    Ok(table)
}

pub fn read_vectors<S: Scalar>(reader: impl BufRead, context: &str) -> Result<Embeddings<S>> {
    let mut table = Embeddings::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let vector = parts
            .map(|p| {
                p.parse::<S>()
                    .map_err(|_| Error::parse(context, line_no, format!("component {p:?} is not a number")))
            })
            .collect::<Result<Vec<S>>>()?;
        table.insert(token, vector).map_err(|e| match e {
            Error::DimensionMismatch { expected, found } => Error::parse(
                context,
                line_no,
                format!("expected {expected} components, found {found}"),
            ),
            other => Error::parse(context, line_no, other.to_string()),
        })?;
    }
    Ok(table)
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine<S: Scalar>(u: &[S], v: &[S]) -> Result<S> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (S::zero(), S::zero(), S::zero());
    for (&a, &b) in u.iter().zip(v) {
        dot = dot + a * b;
        nu = nu + a * a;
        nv = nv + b * b;
    }
    if nu == S::zero() || nv == S::zero() {
        return Ok(S::zero());
    }
    let c = dot / (nu.sqrt() * nv.sqrt());
    Ok(c.max(-S::one()).min(S::one()))
}

/// Turns a wiki link target into a single entity token: spaces become
/// underscores and the first letter is capitalized, as in wiki page titles.
pub fn entity_token(target: &str) -> String {
    let joined = target.split_whitespace().collect::<Vec<_>>().join("_");
    let mut chars = joined.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Tokenizes a passage with `[[target title|anchor text]]` links.
///
/// Prose goes through [`tokenize`]; every link becomes one entity token
/// built from its target title (see [`entity_token`]). `[[Title]]` without
/// an anchor is accepted.
pub fn preprocess_hyperlinks(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut rest = 0;
    while let Some(open) = text[rest..].find("[[").map(|i| rest + i) {
        out.extend(tokenize(&text[rest..open]));
        let body_start = open + 2;
        let close = text[body_start..]
            .find("]]")
            .map(|i| body_start + i)
            .ok_or_else(|| Error::Markup {
                offset: open,
                message: "unclosed link".into(),
            })?;
        let body = &text[body_start..close];
        if body.contains("[[") {
            return Err(Error::Markup {
                offset: open,
                message: "nested link".into(),
            });
        }
        let target = body.split_once('|').map_or(body, |(t, _)| t);
        let token = entity_token(target);
        if token.is_empty() {
            return Err(Error::Markup {
                offset: open,
                message: "empty link target".into(),
            });
        }
        out.push(token);
        rest = close + 2;
    }
    out.extend(tokenize(&text[rest..]));
    Ok(out)
}
