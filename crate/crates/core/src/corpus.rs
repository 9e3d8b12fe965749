//! Fielded entity documents, queries and relevance judgments.
//!
//! Input formats:
//!
//! * corpus: JSON Lines, one object per entity with a `doc_id` and up to six
//!   field objects `{"text": "...", "entities": ["..."]}`;
//! * queries: `query_id<TAB>raw text`;
//! * qrels: `query_id 0 doc_id grade` (TREC convention).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six canonical entity fields, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    Names,
    Attributes,
    Categories,
    SimilarEntityNames,
    RelatedEntityNames,
    Text,
}

impl Field {
    pub const COUNT: usize = 6;

    pub const ALL: [Field; Field::COUNT] = [
        Field::Names,
        Field::Attributes,
        Field::Categories,
        Field::SimilarEntityNames,
        Field::RelatedEntityNames,
        Field::Text,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Names => "names",
            Field::Attributes => "attributes",
            Field::Categories => "categories",
            Field::SimilarEntityNames => "similar_entity_names",
            Field::RelatedEntityNames => "related_entity_names",
            Field::Text => "text",
        }
    }

    /// Position in canonical order.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown field {s:?}")))
    }
}

/// Lowercases `raw` and splits it on every non-alphanumeric character.
///
/// No stemming and no stopword removal.
pub fn tokenize(raw: &str) -> Vec<String> {
    raw.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldContent {
    pub terms: Vec<String>,
    pub entities: Vec<String>,
}

impl FieldContent {
    pub fn from_raw(text: &str, entities: Vec<String>) -> Self {
        FieldContent {
            terms: tokenize(text),
            entities,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.entities.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldedDocument {
    pub doc_id: String,
    pub fields: [FieldContent; Field::COUNT],
}

impl FieldedDocument {
    pub fn new(doc_id: impl Into<String>) -> Self {
        FieldedDocument {
            doc_id: doc_id.into(),
            fields: Default::default(),
        }
    }

    pub fn field(&self, field: Field) -> &FieldContent {
        &self.fields[field.index()]
    }

    pub fn field_mut(&mut self, field: Field) -> &mut FieldContent {
        &mut self.fields[field.index()]
    }

    pub fn with_field(mut self, field: Field, text: &str, entities: &[&str]) -> Self {
        self.fields[field.index()] = FieldContent::from_raw(text, entities.iter().map(|e| e.to_string()).collect());
        self
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    #[serde(default)]
    text: String,
    #[serde(default)]
    entities: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<RawField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attributes: Option<RawField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<RawField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    similar_entity_names: Option<RawField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    related_entity_names: Option<RawField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<RawField>,
}

impl RawRecord {
    fn into_document(self) -> FieldedDocument {
        let raw = [
            self.names,
            self.attributes,
            self.categories,
            self.similar_entity_names,
            self.related_entity_names,
            self.text,
        ];
        let fields = raw.map(|f| {
            let f = f.unwrap_or_default();
            FieldContent::from_raw(&f.text, f.entities)
        });
        FieldedDocument {
            doc_id: self.doc_id,
            fields,
        }
    }

    fn from_document(doc: &FieldedDocument) -> Self {
        let raw = |f: Field| {
            let c = doc.field(f);
            Some(RawField {
                text: c.terms.join(" "),
                entities: c.entities.clone(),
            })
        };
        RawRecord {
            doc_id: doc.doc_id.clone(),
            names: raw(Field::Names),
            attributes: raw(Field::Attributes),
            categories: raw(Field::Categories),
            similar_entity_names: raw(Field::SimilarEntityNames),
            related_entity_names: raw(Field::RelatedEntityNames),
            text: raw(Field::Text),
        }
    }
}

/// An immutable collection of documents addressable by `doc_id`.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<FieldedDocument>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_documents(docs: Vec<FieldedDocument>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if d.doc_id.is_empty() {
                return Err(Error::Validation(format!("document #{} has an empty doc_id", i + 1)));
            }
            if by_id.insert(d.doc_id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate doc_id {:?}", d.doc_id)));
            }
        }
        Ok(Corpus { docs, by_id })
    }

    pub fn documents(&self) -> &[FieldedDocument] {
        &self.docs
    }

    pub fn get(&self, doc_id: &str) -> Option<&FieldedDocument> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    read_corpus(open(path)?, &path.display().to_string())
}

/// Parses JSON Lines corpus records. Blank lines are skipped.
pub fn read_corpus(reader: impl BufRead, context: &str) -> Result<Corpus> {
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        if record.doc_id.is_empty() {
            return Err(Error::Validation(format!("{context}: line {line_no}: empty doc_id")));
        }
        if let Some(first) = seen.insert(record.doc_id.clone(), line_no) {
            return Err(Error::Validation(format!(
                "{context}: line {line_no}: duplicate doc_id {:?} (first seen on line {first})",
                record.doc_id
            )));
        }
        docs.push(record.into_document());
    }
    Corpus::from_documents(docs)
}

/// Writes documents back as JSON Lines; field text is the space-joined terms.
pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for doc in corpus.documents() {
        let line =
            serde_json::to_string(&RawRecord::from_document(doc)).map_err(|e| Error::Validation(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    pub raw_text: String,
    pub terms: Vec<String>,
    /// Linked entity ids, a bag: repeated ids count with multiplicity.
    pub entities: Vec<String>,
}

impl Query {
    pub fn new(query_id: impl Into<String>, raw_text: impl Into<String>) -> Result<Self> {
        let query_id = query_id.into();
        let raw_text = raw_text.into();
        let terms = tokenize(&raw_text);
        if terms.is_empty() {
            return Err(Error::Validation(format!(
                "query {query_id:?} has no terms after normalization"
            )));
        }
        Ok(Query {
            query_id,
            raw_text,
            terms,
            entities: Vec::new(),
        })
    }
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<Query>> {
    let path = path.as_ref();
    read_queries(open(path)?, &path.display().to_string())
}

pub fn read_queries(reader: impl BufRead, context: &str) -> Result<Vec<Query>> {
    let mut queries: Vec<Query> = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, raw) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(context, line_no, "expected query_id<TAB>text"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::parse(context, line_no, "empty query_id"));
        }
        if seen.insert(id.to_owned(), line_no).is_some() {
            return Err(Error::Validation(format!(
                "{context}: line {line_no}: duplicate query_id {id:?}"
            )));
        }
        let q = Query::new(id, raw).map_err(|e| Error::Validation(format!("{context}: line {line_no}: {e}")))?;
        queries.push(q);
    }
    Ok(queries)
}

/// Graded relevance judgments. Pairs that are not listed have grade 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: impl Into<String>, doc_id: impl Into<String>, grade: u32) {
        self.judgments
            .entry(query_id.into())
            .or_default()
            .insert(doc_id.into(), grade);
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> u32 {
        self.judgments
            .get(query_id)
            .and_then(|m| m.get(doc_id))
            .copied()
            .unwrap_or(0)
    }

    /// All judged (doc_id, grade) pairs for a query, including grade 0.
    pub fn judged(&self, query_id: &str) -> impl Iterator<Item = (&str, u32)> {
        self.judgments
            .get(query_id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(d, &g)| (d.as_str(), g)))
    }

    pub fn has_relevant(&self, query_id: &str) -> bool {
        self.judged(query_id).any(|(_, g)| g > 0)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    read_qrels(open(path)?, &path.display().to_string())
}

pub fn read_qrels(reader: impl BufRead, context: &str) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 4 {
            return Err(Error::parse(
                context,
                line_no,
                format!("expected 4 columns `query_id 0 doc_id grade`, found {}", cols.len()),
            ));
        }
        let grade: i64 = cols[3]
            .parse()
            .map_err(|_| Error::parse(context, line_no, format!("grade {:?} is not an integer", cols[3])))?;
        let grade = u32::try_from(grade).map_err(|_| {
            Error::Validation(format!(
                "{context}: line {line_no}: grade {grade} must be a non-negative integer"
            ))
        })?;
        qrels.insert(cols[0], cols[2], grade);
    }
    Ok(qrels)
}
