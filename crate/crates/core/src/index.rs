//! Per-field positional inverted index.
//!
//! Besides postings with positions, the index keeps the per-field collection
//! statistics that Dirichlet smoothing needs: document field lengths, total
//! field length and collection term frequencies.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Field};
use crate::error::{Error, Result};

const SNAPSHOT_MAGIC: &[u8; 4] = b"FIDX";
const SNAPSHOT_VERSION: u32 = 1;

/// Default window for unordered term pairs.
pub const DEFAULT_WINDOW: usize = 8;

/// Occurrences of one term in one document field. Positions are 0-based and
/// strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub positions: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct FieldPostings {
    /// Sorted by `doc`.
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    collection_length: u64,
    term_freq: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldedIndex {
    doc_ids: Vec<String>,
    fields: [FieldPostings; Field::COUNT],
    #[serde(skip)]
    doc_lookup: HashMap<String, u32>,
}

impl FieldedIndex {
    /// Builds the index; documents are numbered in corpus order.
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Validation("cannot index an empty corpus".into()));
        }
        let n = corpus.len();
        let mut fields: [FieldPostings; Field::COUNT] = Default::default();
        for fp in fields.iter_mut() {
            fp.doc_lengths = vec![0; n];
        }
        for (doc, d) in corpus.documents().iter().enumerate() {
            let doc = doc as u32;
            for field in Field::ALL {
                let fp = &mut fields[field.index()];
                let terms = &d.field(field).terms;
                fp.doc_lengths[doc as usize] = terms.len() as u32;
                fp.collection_length += terms.len() as u64;
                let mut local: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
                for (pos, t) in terms.iter().enumerate() {
                    local.entry(t.as_str()).or_default().push(pos as u32);
                }
                for (t, positions) in local {
                    *fp.term_freq.entry(t.to_owned()).or_default() += positions.len() as u64;
                    fp.postings
                        .entry(t.to_owned())
                        .or_default()
                        .push(Posting { doc, positions });
                }
            }
        }
        let mut index = FieldedIndex {
            doc_ids: corpus.documents().iter().map(|d| d.doc_id.clone()).collect(),
            fields,
            doc_lookup: HashMap::new(),
        };
        index.rebuild_lookup();
        Ok(index)
    }

    fn rebuild_lookup(&mut self) {
        self.doc_lookup = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i as u32))
            .collect();
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_id(&self, doc: u32) -> &str {
        &self.doc_ids[doc as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_index(&self, doc_id: &str) -> Result<u32> {
        self.doc_lookup
            .get(doc_id)
            .copied()
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))
    }

    pub fn postings(&self, field: Field, term: &str) -> &[Posting] {
        self.fields[field.index()]
            .postings
            .get(term)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Positions of `term` in one document field; empty when absent.
    pub fn positions(&self, field: Field, doc: u32, term: &str) -> &[u32] {
        let postings = self.postings(field, term);
        match postings.binary_search_by_key(&doc, |p| p.doc) {
            Ok(i) => &postings[i].positions,
            Err(_) => &[],
        }
    }

    pub fn term_count(&self, field: Field, doc: u32, term: &str) -> u32 {
        self.positions(field, doc, term).len() as u32
    }

    pub fn field_length(&self, field: Field, doc: u32) -> u32 {
        self.fields[field.index()].doc_lengths[doc as usize]
    }

    pub fn doc_field_length(&self, doc_id: &str, field: Field) -> Result<u32> {
        Ok(self.field_length(field, self.doc_index(doc_id)?))
    }

    pub fn collection_field_length(&self, field: Field) -> u64 {
        self.fields[field.index()].collection_length
    }

    pub fn collection_term_freq(&self, field: Field, term: &str) -> u64 {
        self.fields[field.index()].term_freq.get(term).copied().unwrap_or(0)
    }

    /// Distinct terms of a field, in lexicographic order.
    pub fn vocabulary(&self, field: Field) -> impl Iterator<Item = &str> {
        self.fields[field.index()].postings.keys().map(String::as_str)
    }

    /// Occurrences of `t1` immediately followed by `t2` in a document field.
    pub fn ordered_bigram_count(&self, field: Field, doc_id: &str, t1: &str, t2: &str) -> Result<u32> {
        let doc = self.doc_index(doc_id)?;
        Ok(self.ordered_count(field, doc, t1, t2))
    }

    /// Position pairs of `t1` and `t2` closer than `window`, in either order.
    pub fn unordered_window_count(&self, field: Field, doc_id: &str, t1: &str, t2: &str, window: usize) -> Result<u32> {
        check_window(window)?;
        let doc = self.doc_index(doc_id)?;
        Ok(self.unordered_count(field, doc, t1, t2, window))
    }

    pub(crate) fn ordered_count(&self, field: Field, doc: u32, t1: &str, t2: &str) -> u32 {
        count_adjacent(self.positions(field, doc, t1), self.positions(field, doc, t2))
    }

    pub(crate) fn unordered_count(&self, field: Field, doc: u32, t1: &str, t2: &str, window: usize) -> u32 {
        let a = self.positions(field, doc, t1);
        if t1 == t2 {
            count_self_pairs_within(a, window)
        } else {
            count_pairs_within(a, self.positions(field, doc, t2), window)
        }
    }

    /// Documents that contain both terms in `field`.
    fn co_occurring_docs<'a>(&'a self, field: Field, t1: &str, t2: &str) -> impl Iterator<Item = u32> + 'a {
        let a = self.postings(field, t1);
        let b = self.postings(field, t2);
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        small
            .iter()
            .map(|p| p.doc)
            .filter(move |d| large.binary_search_by_key(d, |p| p.doc).is_ok())
    }

    /// Ordered bigram occurrences summed over every document's `field`.
    pub fn collection_ordered_count(&self, field: Field, t1: &str, t2: &str) -> u64 {
        self.co_occurring_docs(field, t1, t2)
            .map(|d| self.ordered_count(field, d, t1, t2) as u64)
            .sum()
    }

    /// Unordered window pair counts summed over every document's `field`.
    pub fn collection_unordered_count(&self, field: Field, t1: &str, t2: &str, window: usize) -> Result<u64> {
        check_window(window)?;
        Ok(self
            .co_occurring_docs(field, t1, t2)
            .map(|d| self.unordered_count(field, d, t1, t2, window) as u64)
            .sum())
    }

    /// Writes a versioned binary snapshot.
    pub fn save_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        out.write_all(SNAPSHOT_MAGIC)
            .and_then(|_| out.write_all(&SNAPSHOT_VERSION.to_le_bytes()))
            .map_err(|e| Error::io(path, e))?;
        ciborium::into_writer(self, &mut out).map_err(|e| Error::Snapshot(e.to_string()))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut input = BufReader::new(file);
        let mut header = [0u8; 8];
        input
            .read_exact(&mut header)
            .map_err(|_| Error::Snapshot("truncated header".into()))?;
        if &header[..4] != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot("not an index snapshot".into()));
        }
        let version = u32::from_le_bytes(header[4..].try_into().unwrap());
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {version}, expected {SNAPSHOT_VERSION}"
            )));
        }
        let mut index: FieldedIndex = ciborium::from_reader(input).map_err(|e| Error::Snapshot(e.to_string()))?;
        index.rebuild_lookup();
        Ok(index)
    }
}

pub(crate) fn check_window(window: usize) -> Result<()> {
    if window < 2 {
        return Err(Error::InvalidParameter(format!(
            "window must be at least 2, got {window}"
        )));
    }
    Ok(())
}

/// Number of p in `first` with p + 1 in `second`. Both slices sorted.
pub fn count_adjacent(first: &[u32], second: &[u32]) -> u32 {
    if first.is_empty() || second.is_empty() {
        return 0;
    }
    first
        .iter()
        .filter(|&&p| second.binary_search(&(p + 1)).is_ok())
        .count() as u32
}

/// Pairs (a, b) from two disjoint sorted position lists with |a - b| < window.
pub fn count_pairs_within(a: &[u32], b: &[u32], window: usize) -> u32 {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let w = window as i64;
    a.iter()
        .map(|&p| {
            let p = p as i64;
            let lo = b.partition_point(|&q| (q as i64) <= p - w);
            let hi = b.partition_point(|&q| (q as i64) < p + w);
            (hi - lo) as u32
        })
        .sum()
}

/// Unordered pairs i < j of one sorted position list with a[j] - a[i] < window.
pub fn count_self_pairs_within(a: &[u32], window: usize) -> u32 {
    let w = window as i64;
    a.iter()
        .enumerate()
        .map(|(j, &p)| {
            let lo = a[..j].partition_point(|&q| (q as i64) <= p as i64 - w);
            (j - lo) as u32
        })
        .sum()
}
