mod support;

use std::collections::BTreeSet;

use fielded_rerank::corpus::{load_corpus, write_corpus};
use fielded_rerank::embedding::{cosine, Embeddings};
use fielded_rerank::eval::{format_run, ndcg_at_k, paired_t_test, parse_run};
use fielded_rerank::ltr::{minmax_normalize, rerank, Weights};
use fielded_rerank::semantics::{parse_features, write_features, Features, FEATURE_COUNT};
use fielded_rerank::{tokenize, Corpus, Field, FieldedDocument, FieldedIndex, Qrels, RankedList, ScoredPool};
use proptest::prelude::*;
use support::{naive_ordered, naive_unordered, oracle_ndcg, oracle_t_test};

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]).prop_map(String::from)
}

fn field_terms(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(word(), 0..=max)
}

fn document(id: usize) -> impl Strategy<Value = FieldedDocument> {
    let entities = prop::collection::vec("[A-Z][a-z]{0,5}(_[A-Z][a-z]{0,4})?", 0..3);
    prop::collection::vec((field_terms(12), entities), Field::COUNT).prop_map(move |fields| {
        let mut doc = FieldedDocument::new(format!("D{id}"));
        for (f, (terms, ents)) in Field::ALL.into_iter().zip(fields) {
            let content = doc.field_mut(f);
            content.terms = terms;
            content.entities = ents;
        }
        doc
    })
}

fn corpus() -> impl Strategy<Value = Corpus> {
    (1usize..6)
        .prop_flat_map(|n| (0..n).map(document).collect::<Vec<_>>())
        .prop_map(|docs| Corpus::from_documents(docs).unwrap())
}

fn features_for(pool: &ScoredPool, values: &[[f64; FEATURE_COUNT]]) -> Vec<Features<f64>> {
    pool.entries
        .iter()
        .zip(values)
        .map(|((d, _), v)| Features::from_array(pool.query_id.clone(), d.clone(), *v))
        .collect()
}

fn pool_and_features() -> impl Strategy<Value = (ScoredPool, Vec<Features<f64>>)> {
    (1usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(-50.0f64..0.0, n),
            prop::collection::vec(prop::array::uniform13(-1.0f64..=1.0), n),
        )
            .prop_map(move |(scores, mut values)| {
                for v in &mut values {
                    v[FEATURE_COUNT - 1] = v[FEATURE_COUNT - 1].abs();
                }
                let mut entries: Vec<(String, f64)> = scores
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| (format!("E{i:02}"), s))
                    .collect();
                entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                let pool = ScoredPool {
                    query_id: "Q".into(),
                    entries,
                };
                let feats = features_for(&pool, &values);
                (pool, feats)
            })
    })
}

proptest! {
    #[test]
    fn tokenize_is_idempotent(s in "\\PC{0,40}") {
        let once = tokenize(&s);
        prop_assert_eq!(tokenize(&once.join(" ")), once.clone());
        for t in &once {
            prop_assert!(!t.is_empty());
            prop_assert_eq!(t.to_lowercase(), t.clone());
        }
    }

    #[test]
    fn corpus_round_trips_through_jsonl(c in corpus()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        write_corpus(&c, &path).unwrap();
        let back = load_corpus(&path).unwrap();
        prop_assert_eq!(back.documents(), c.documents());
    }

    #[test]
    fn index_statistics_add_up(c in corpus()) {
        let index = FieldedIndex::build(&c).unwrap();
        for f in Field::ALL {
            let total: u64 = c.documents().iter().map(|d| d.field(f).terms.len() as u64).sum();
            prop_assert_eq!(index.collection_field_length(f), total);
            for doc in c.documents() {
                prop_assert_eq!(index.doc_field_length(&doc.doc_id, f).unwrap() as usize, doc.field(f).terms.len());
            }
            for t in index.vocabulary(f).map(String::from).collect::<Vec<_>>() {
                let cf: u64 = c.documents().iter().map(|d| d.field(f).terms.iter().filter(|x| **x == t).count() as u64).sum();
                prop_assert_eq!(index.collection_term_freq(f, &t), cf);
                let postings = index.postings(f, &t);
                prop_assert!(postings.windows(2).all(|p| p[0].doc < p[1].doc));
                prop_assert!(postings.iter().all(|p| !p.positions.is_empty() && p.positions.windows(2).all(|w| w[0] < w[1])));
            }
        }
    }

    #[test]
    fn index_snapshot_round_trips(c in corpus()) {
        let index = FieldedIndex::build(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.bin");
        index.save_snapshot(&path).unwrap();
        let back = FieldedIndex::load_snapshot(&path).unwrap();
        prop_assert_eq!(back.doc_ids(), index.doc_ids());
        for f in Field::ALL {
            prop_assert_eq!(back.collection_field_length(f), index.collection_field_length(f));
            for t in index.vocabulary(f) {
                prop_assert_eq!(back.postings(f, t), index.postings(f, t));
            }
        }
        for d in index.doc_ids() {
            prop_assert_eq!(back.doc_index(d).unwrap(), index.doc_index(d).unwrap());
        }
    }

    #[test]
    fn window_counts_match_enumeration(terms in field_terms(50), a in word(), b in word(), window in 2usize..12) {
        let mut doc = FieldedDocument::new("D");
        doc.field_mut(Field::Text).terms = terms.clone();
        let index = FieldedIndex::build(&Corpus::from_documents(vec![doc]).unwrap()).unwrap();
        let ordered = index.ordered_bigram_count(Field::Text, "D", &a, &b).unwrap();
        let unordered = index.unordered_window_count(Field::Text, "D", &a, &b, window).unwrap();
        prop_assert_eq!(ordered as u64, naive_ordered(&terms, &a, &b));
        prop_assert_eq!(unordered as u64, naive_unordered(&terms, &a, &b, window));
        prop_assert!(ordered <= unordered);
    }

    #[test]
    fn cosine_is_bounded_and_scale_free(
        u in prop::collection::vec(-10.0f64..10.0, 4),
        v in prop::collection::vec(-10.0f64..10.0, 4),
        alpha in 0.001f64..1000.0,
    ) {
        let c = cosine(&u, &v).unwrap();
        prop_assert!(c.abs() <= 1.0 + 1e-12);
        let scaled: Vec<f64> = u.iter().map(|x| x * alpha).collect();
        prop_assert!((cosine(&scaled, &v).unwrap() - c).abs() < 1e-9);
        if u.iter().any(|x| *x != 0.0) {
            prop_assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_ignores_token_order(
        tokens in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "zz"]), 0..8),
        seed in any::<u64>(),
    ) {
        let mut table = Embeddings::<f64>::new();
        table.insert("a", vec![0.3, -1.0, 2.0]).unwrap();
        table.insert("b", vec![1e-3, 5.0, 0.25]).unwrap();
        table.insert("c", vec![-7.0, 0.1, 0.0]).unwrap();
        let mut shuffled = tokens.clone();
        use rand::{seq::SliceRandom, SeedableRng};
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = table.centroid(tokens.iter().copied());
        let b = table.centroid(shuffled.iter().copied());
        prop_assert_eq!(a.is_none(), tokens.iter().all(|t| *t == "zz"));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn minmax_lies_in_unit_interval_and_keeps_order(scores in prop::collection::vec(-1e6f64..1e6, 1..40)) {
        let norm = minmax_normalize(&scores).unwrap();
        prop_assert!(norm.iter().all(|x| (0.0..=1.0).contains(x)));
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if scores[i] < scores[j] {
                    prop_assert!(norm[i] <= norm[j]);
                }
            }
        }
    }

    #[test]
    fn rerank_keeps_the_pool((pool, feats) in pool_and_features(), w in prop::array::uniform13(-2.0f64..2.0)) {
        let out = rerank(&pool, &feats, &Weights::from_array(w)).unwrap();
        let before: BTreeSet<&str> = pool.entries.iter().map(|(d, _)| d.as_str()).collect();
        let after: BTreeSet<&str> = out.doc_ids().collect();
        prop_assert_eq!(before, after);
        prop_assert_eq!(out.entries.len(), pool.len());
    }

    #[test]
    fn positive_scaling_keeps_rerank_order(
        (pool, feats) in pool_and_features(),
        w in prop::array::uniform13(0.0f64..1.0),
        k in prop::sample::select(vec![0.5, 2.0, 4.0, 0.25]),
    ) {
        let base = rerank(&pool, &feats, &Weights::from_array(w)).unwrap();
        let scaled = rerank(&pool, &feats, &Weights::from_array(w).scaled(k)).unwrap();
        prop_assert_eq!(base.doc_ids().collect::<Vec<_>>(), scaled.doc_ids().collect::<Vec<_>>());
    }

    #[test]
    fn t_test_is_antisymmetric(pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..40)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        prop_assert!(ab.t == -ba.t || (ab.t.is_nan() && ba.t.is_nan()));
        prop_assert_eq!(ab.p, ba.p);
        if !ab.degenerate_variance && ab.t != 0.0 {
            let (t, p) = oracle_t_test(&a, &b);
            prop_assert!((ab.t - t).abs() < 1e-6 * t.abs().max(1.0));
            prop_assert!((ab.p - p).abs() < 1e-6);
        }
    }

    #[test]
    fn run_files_round_trip(
        lists in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 1..15), 1..5),
    ) {
        let lists: Vec<RankedList> = lists
            .into_iter()
            .enumerate()
            .map(|(q, scores)| {
                let mut entries: Vec<(String, f64)> = scores.into_iter().enumerate().map(|(i, s)| (format!("doc:{i}"), s)).collect();
                entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                RankedList::new(format!("Q-{q}"), entries)
            })
            .collect();
        let text = format_run(&lists, "t1");
        let back = parse_run(text.as_bytes(), "mem").unwrap();
        prop_assert_eq!(&back, &lists);
        prop_assert_eq!(format_run(&back, "t1"), text);
    }

    #[test]
    fn ndcg_matches_oracle(
        grades in prop::collection::vec(0u32..4, 1..30),
        ranking in prop::collection::vec(0usize..40, 0..30),
        k in 1usize..20,
    ) {
        let mut qrels = Qrels::new();
        for (i, g) in grades.iter().enumerate() {
            qrels.insert("Q", format!("D{i}"), *g);
        }
        let mut seen = BTreeSet::new();
        let docs: Vec<String> = ranking.into_iter().filter(|d| seen.insert(*d)).map(|d| format!("D{d}")).collect();
        let n = docs.len();
        let list = RankedList::new("Q", docs.iter().enumerate().map(|(i, d)| (d.clone(), (n - i) as f64)).collect());
        let got = ndcg_at_k(&list, &qrels, k);
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        prop_assert!((got - oracle_ndcg(&refs, &qrels, "Q", k)).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&got));
    }

    #[test]
    fn ideal_ordering_scores_one(grades in prop::collection::vec(0u32..4, 1..30), k in 1usize..40) {
        let mut qrels = Qrels::new();
        for (i, g) in grades.iter().enumerate() {
            qrels.insert("Q", format!("D{i:02}"), *g);
        }
        let mut ideal: Vec<(usize, u32)> = grades.iter().copied().enumerate().collect();
        ideal.sort_by_key(|&(_, g)| std::cmp::Reverse(g));
        let n = ideal.len();
        let list = RankedList::new("Q", ideal.iter().enumerate().map(|(r, (i, _))| (format!("D{i:02}"), (n - r) as f64)).collect());
        let expected = if grades.iter().any(|g| *g > 0) { 1.0 } else { 0.0 };
        prop_assert!((ndcg_at_k(&list, &qrels, k) - expected).abs() < 1e-12);
    }

    #[test]
    fn model_files_round_trip_exactly(w in prop::array::uniform13(-1e3f64..1e3)) {
        let model = Weights::from_array(w);
        let back = Weights::<f64>::parse_model(&model.to_model_string(), "mem").unwrap();
        prop_assert_eq!(back.to_array(), w);
    }

    #[test]
    fn feature_files_round_trip((_, feats) in pool_and_features()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.tsv");
        write_features(&feats, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: Vec<Features<f64>> = parse_features(text.as_bytes(), "mem").unwrap();
        prop_assert_eq!(back, feats);
    }
}

#[test]
fn swapping_a_relevant_document_down_never_helps() {
    let mut qrels = Qrels::new();
    for (d, g) in [("A", 3), ("B", 2), ("C", 0), ("D", 1), ("E", 0)] {
        qrels.insert("Q", d, g);
    }
    let order = ["A", "B", "C", "D", "E"];
    let list = |o: &[&str]| {
        RankedList::new(
            "Q",
            o.iter()
                .enumerate()
                .map(|(i, d)| (d.to_string(), -(i as f64)))
                .collect(),
        )
    };
    for i in 0..order.len() - 1 {
        let mut swapped = order;
        swapped.swap(i, i + 1);
        let (hi, lo) = (qrels.grade("Q", order[i]), qrels.grade("Q", order[i + 1]));
        if hi > lo {
            assert!(ndcg_at_k(&list(&swapped), &qrels, 5) <= ndcg_at_k(&list(&order), &qrels, 5));
        }
    }
}
