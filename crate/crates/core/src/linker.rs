//! Dictionary-based query entity linking.
//!
//! Queries become bags of entities by greedy longest match of normalized
//! surface phrases, scanning left to right. Externally produced annotations
//! (`query_id<TAB>entity_id`) take precedence when a query has any.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{tokenize, Query};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceFormDictionary {
    phrases: HashMap<Vec<String>, String>,
    longest: usize,
}

impl SurfaceFormDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a phrase; a phrase seen before is remapped to the new entity.
    pub fn insert(&mut self, surface: &str, entity_id: impl Into<String>) -> Result<()> {
        let phrase = tokenize(surface);
        if phrase.is_empty() {
            return Err(Error::Validation(format!("surface form {surface:?} has no tokens")));
        }
        self.longest = self.longest.max(phrase.len());
        self.phrases.insert(phrase, entity_id.into());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains_entity(&self, entity_id: &str) -> bool {
        self.phrases.values().any(|e| e == entity_id)
    }

    /// Greedy longest match over already tokenized terms.
    pub fn link(&self, terms: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < terms.len() {
            let max = self.longest.min(terms.len() - i);
            let hit = (1..=max)
                .rev()
                .find_map(|len| self.phrases.get(&terms[i..i + len]).map(|e| (len, e)));
            match hit {
                Some((len, entity)) => {
                    out.push(entity.clone());
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}

pub fn link_query(query: &Query, dictionary: &SurfaceFormDictionary) -> Vec<String> {
    dictionary.link(&query.terms)
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<SurfaceFormDictionary> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dictionary(BufReader::new(file), &path.display().to_string())
}

/// Parses `surface phrase<TAB>entity_id` lines.
pub fn read_dictionary(reader: impl BufRead, context: &str) -> Result<SurfaceFormDictionary> {
    let mut dict = SurfaceFormDictionary::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (surface, entity) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(context, line_no, "expected surface<TAB>entity_id"))?;
        let entity = entity.trim();
        if entity.is_empty() {
            return Err(Error::parse(context, line_no, "empty entity id"));
        }
        dict.insert(surface, entity)
            .map_err(|e| Error::parse(context, line_no, e.to_string()))?;
    }
    Ok(dict)
}

pub type Annotations = HashMap<String, Vec<String>>;

/// Loads `query_id<TAB>entity_id` annotations. A missing file yields an
/// empty map. Ids not in `known_queries` are kept, with a warning.
pub fn load_annotations(path: impl AsRef<Path>, known_queries: Option<&HashSet<String>>) -> Result<Annotations> {
    let path = path.as_ref();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Annotations::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    read_annotations(BufReader::new(file), &path.display().to_string(), known_queries)
}

pub fn read_annotations(
    reader: impl BufRead,
    context: &str,
    known_queries: Option<&HashSet<String>>,
) -> Result<Annotations> {
    let mut out = Annotations::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (q, e) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(context, line_no, "expected query_id<TAB>entity_id"))?;
        let (q, e) = (q.trim(), e.trim());
        if q.is_empty() || e.is_empty() {
            return Err(Error::parse(context, line_no, "empty query or entity id"));
        }
        if let Some(known) = known_queries {
            if !known.contains(q) {
                log::warn!("{context}: line {line_no}: annotation for unknown query {q:?}");
            }
        }
        out.entry(q.to_owned()).or_default().push(e.to_owned());
    }
    Ok(out)
}

/// Writes annotations for `queries` in query order, one line per entity.
pub fn write_annotations(queries: &[Query], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for q in queries {
        for e in &q.entities {
            writeln!(out, "{}\t{}", q.query_id, e).map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Sets `entities` on every query: from `annotations` when the query has an
/// entry there, otherwise from the dictionary.
pub fn annotate(queries: &mut [Query], dictionary: &SurfaceFormDictionary, annotations: &Annotations) {
    for q in queries {
        q.entities = match annotations.get(&q.query_id) {
            Some(ents) => ents.clone(),
            None => link_query(q, dictionary),
        };
    }
}
