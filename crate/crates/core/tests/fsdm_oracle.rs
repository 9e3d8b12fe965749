mod support;

use fielded_rerank::corpus::{load_corpus, load_queries};
use fielded_rerank::fsdm::{clique_feature, dirichlet_estimate, retrieve_pool, score_fsdm, Clique};
use fielded_rerank::{Corpus, Field, FieldedDocument, FieldedIndex, FsdmParams, Query};
use proptest::prelude::*;
use support::{fixture, naive_ordered, naive_unordered, BruteFsdm};

fn fixture_data() -> (Corpus, FieldedIndex, Vec<Query>) {
    let corpus = load_corpus(fixture("corpus.jsonl")).unwrap();
    let index = FieldedIndex::build(&corpus).unwrap();
    let queries = load_queries(fixture("queries.tsv")).unwrap();
    (corpus, index, queries)
}

fn skewed_params() -> FsdmParams {
    FsdmParams {
        clique_weights: [0.6, 0.25, 0.15],
        field_weights: [
            [0.3, 0.1, 0.1, 0.1, 0.1, 0.3],
            [0.5, 0.0, 0.0, 0.0, 0.0, 0.5],
            [0.2, 0.2, 0.2, 0.1, 0.1, 0.2],
        ],
        dirichlet_mu: [100.0, 200.0, 300.0, 400.0, 500.0, 2500.0],
        window: 5,
    }
}

#[test]
fn fixture_scores_match_brute_force() {
    let (corpus, index, queries) = fixture_data();
    for params in [FsdmParams::default(), skewed_params()] {
        let brute = BruteFsdm::new(&corpus, params.clone());
        let mut pairs = 0;
        for q in &queries {
            for doc in brute.candidates(&q.terms) {
                let got = score_fsdm(&index, &q.terms, &doc.doc_id, &params).unwrap();
                let want = brute.score(doc, &q.terms);
                assert!(
                    (got - want).abs() < 1e-9,
                    "{} {}: {got} vs {want}",
                    q.query_id,
                    doc.doc_id
                );
                pairs += 1;
            }
        }
        assert!(pairs > 200);
    }
}

#[test]
fn pools_match_brute_force_ranking() {
    let (corpus, index, queries) = fixture_data();
    let params = FsdmParams::default();
    let brute = BruteFsdm::new(&corpus, params.clone());
    for q in &queries {
        let want = brute.ranking(&q.terms);
        for n in [1, 5, 100] {
            let pool = retrieve_pool(&index, q, &params, n).unwrap();
            assert_eq!(pool.len(), want.len().min(n), "{}", q.query_id);
            for ((d, s), (wd, ws)) in pool.entries.iter().zip(&want) {
                assert_eq!(d, wd, "{}", q.query_id);
                assert!((s - ws).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn pools_do_not_depend_on_thread_count() {
    let (_, index, queries) = fixture_data();
    let params = FsdmParams::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                queries
                    .iter()
                    .map(|q| retrieve_pool(&index, q, &params, 100).unwrap())
                    .collect::<Vec<_>>()
            })
    };
    let single = run(1);
    assert_eq!(single, run(8));
    assert_eq!(single, run(3));
}

#[test]
fn fixture_counts_match_naive_enumeration() {
    let (corpus, index, _) = fixture_data();
    for doc in corpus.documents() {
        for f in Field::ALL {
            let terms = &doc.field(f).terms;
            let mut vocab: Vec<&String> = terms.iter().collect();
            vocab.sort();
            vocab.dedup();
            for a in &vocab {
                for b in &vocab {
                    let ordered = index.ordered_bigram_count(f, &doc.doc_id, a, b).unwrap();
                    assert_eq!(ordered as u64, naive_ordered(terms, a, b));
                    for w in [2, 8] {
                        let unordered = index.unordered_window_count(f, &doc.doc_id, a, b, w).unwrap();
                        assert_eq!(unordered as u64, naive_unordered(terms, a, b, w));
                    }
                }
            }
        }
    }
}

type Counter<'a> = Box<dyn Fn(&[String]) -> u64 + 'a>;

/// Single-field SDM over plain token lists.
struct Sdm<'a> {
    cliques: Vec<(f64, Counter<'a>, u64)>,
    coll_len: f64,
    mu: f64,
}

impl<'a> Sdm<'a> {
    fn new(docs: &[Vec<String>], q: &'a [String], lambda: [f64; 3], mu: f64, window: usize) -> Self {
        let mut counters: Vec<(f64, Counter<'a>)> = Vec::new();
        for t in q {
            counters.push((
                lambda[0],
                Box::new(move |d: &[String]| d.iter().filter(|x| *x == t).count() as u64),
            ));
        }
        for p in q.windows(2) {
            counters.push((lambda[1], Box::new(move |d: &[String]| naive_ordered(d, &p[0], &p[1]))));
            counters.push((
                lambda[2],
                Box::new(move |d: &[String]| naive_unordered(d, &p[0], &p[1], window)),
            ));
        }
        let cliques = counters
            .into_iter()
            .map(|(l, c)| {
                let cf = docs.iter().map(|d| c(d)).sum();
                (l, c, cf)
            })
            .collect();
        Sdm {
            cliques,
            coll_len: docs.iter().map(Vec::len).sum::<usize>() as f64,
            mu,
        }
    }

    fn score(&self, doc: &[String]) -> f64 {
        self.cliques
            .iter()
            .map(|(l, count, cf)| {
                let p = (count(doc) as f64 + self.mu * *cf as f64 / self.coll_len) / (doc.len() as f64 + self.mu);
                l * p.max(1e-10).ln()
            })
            .sum()
    }
}

#[test]
fn collapsed_fields_reduce_to_single_field_sdm() {
    let (corpus, _, queries) = fixture_data();
    let flat: Vec<Vec<String>> = corpus
        .documents()
        .iter()
        .map(|d| Field::ALL.iter().flat_map(|&f| d.field(f).terms.clone()).collect())
        .collect();
    let collapsed = Corpus::from_documents(
        corpus
            .documents()
            .iter()
            .zip(&flat)
            .map(|(d, terms)| {
                let mut doc = FieldedDocument::new(d.doc_id.clone());
                doc.field_mut(Field::Text).terms = terms.clone();
                doc
            })
            .collect(),
    )
    .unwrap();
    let index = FieldedIndex::build(&collapsed).unwrap();
    let mut on_text = [0.0; Field::COUNT];
    on_text[Field::Text.index()] = 1.0;
    let params = FsdmParams {
        field_weights: [on_text; 3],
        ..FsdmParams::default()
    };
    for q in &queries {
        let sdm = Sdm::new(&flat, &q.terms, params.clique_weights, 2500.0, params.window);
        for (d, terms) in collapsed.documents().iter().zip(&flat) {
            let got = score_fsdm(&index, &q.terms, &d.doc_id, &params).unwrap();
            let want = sdm.score(terms);
            assert!((got - want).abs() < 1e-9, "{} {}", q.query_id, d.doc_id);
        }
    }
}

#[test]
fn adding_a_query_term_occurrence_raises_the_unigram_feature() {
    let (corpus, _, _) = fixture_data();
    let params = FsdmParams::default();
    let term = "bridge".to_string();
    let base_index = FieldedIndex::build(&corpus).unwrap();
    for target in corpus.documents().iter().take(10) {
        let docs: Vec<FieldedDocument> = corpus
            .documents()
            .iter()
            .map(|d| {
                let mut d = d.clone();
                if d.doc_id == target.doc_id {
                    d.field_mut(Field::Names).terms.push(term.clone());
                }
                d
            })
            .collect();
        let index = FieldedIndex::build(&Corpus::from_documents(docs).unwrap()).unwrap();
        let before = clique_feature(
            &base_index,
            &target.doc_id,
            Clique::Unigram,
            std::slice::from_ref(&term),
            &params,
        )
        .unwrap();
        let after = clique_feature(
            &index,
            &target.doc_id,
            Clique::Unigram,
            std::slice::from_ref(&term),
            &params,
        )
        .unwrap();
        assert!(after >= before, "{}: {after} < {before}", target.doc_id);
    }
}

#[test]
fn single_term_query_ignores_bigram_weights() {
    let (_, index, _) = fixture_data();
    let q = vec!["berlin".to_string()];
    let a = FsdmParams {
        clique_weights: [0.5, 0.5, 0.0],
        ..FsdmParams::default()
    };
    let b = FsdmParams {
        clique_weights: [0.5, 0.0, 0.5],
        ..FsdmParams::default()
    };
    for doc in index.doc_ids() {
        assert_eq!(
            score_fsdm(&index, &q, doc, &a).unwrap(),
            score_fsdm(&index, &q, doc, &b).unwrap()
        );
    }
}

proptest! {
    #[test]
    fn dirichlet_estimate_grows_with_an_added_occurrence(
        len in 0u32..200,
        frac in 0.0f64..=1.0,
        p in 0.0f64..=1.0,
        mu in 0.01f64..5000.0,
    ) {
        let count = (len as f64 * frac).floor();
        let before = dirichlet_estimate(count, len as f64, p, mu);
        let after = dirichlet_estimate(count + 1.0, len as f64 + 1.0, p, mu);
        prop_assert!(after >= before - 1e-15);
    }
}
