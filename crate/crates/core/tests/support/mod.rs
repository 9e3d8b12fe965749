//! Independent reference implementations used as test oracles. They work on
//! raw token lists and share no code with the library beyond its data types.
#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::HashMap;
use std::path::PathBuf;

use fielded_rerank::{Corpus, Field, FieldedDocument, FsdmParams, Qrels};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).join(name)
}

/// Positions i with tokens[i] == t1 and tokens[i + 1] == t2.
pub fn naive_ordered(tokens: &[String], t1: &str, t2: &str) -> u64 {
    (0..tokens.len().saturating_sub(1))
        .filter(|&i| tokens[i] == t1 && tokens[i + 1] == t2)
        .count() as u64
}

/// Pairs of distinct positions holding t1 and t2 less than `window` apart,
/// in either order. For t1 == t2 each unordered pair counts once.
pub fn naive_unordered(tokens: &[String], t1: &str, t2: &str, window: usize) -> u64 {
    let mut n = 0;
    for i in 0..tokens.len() {
        for j in 0..tokens.len() {
            if i != j && tokens[i] == t1 && tokens[j] == t2 && i.abs_diff(j) < window {
                n += 1;
            }
        }
    }
    if t1 == t2 {
        n / 2
    } else {
        n
    }
}

/// (clique kind, field, first term, second term).
type StatsKey = (usize, Field, String, String);

#[derive(Clone, Copy)]
enum Kind {
    Uni,
    Ord,
    Unord,
}

/// FSDM recomputed by scanning the raw documents; no index involved.
pub struct BruteFsdm<'c> {
    pub corpus: &'c Corpus,
    pub params: FsdmParams,
    collection: RefCell<HashMap<StatsKey, (u64, u64)>>,
}

impl<'c> BruteFsdm<'c> {
    pub fn new(corpus: &'c Corpus, params: FsdmParams) -> Self {
        BruteFsdm {
            corpus,
            params,
            collection: RefCell::default(),
        }
    }

    /// (collection field length, collection clique count) by full scan.
    fn collection_stats(&self, kind: Kind, f: Field, t1: &str, t2: &str) -> (u64, u64) {
        let key = (kind as usize, f, t1.to_owned(), t2.to_owned());
        if let Some(&hit) = self.collection.borrow().get(&key) {
            return hit;
        }
        let mut len = 0u64;
        let mut count = 0u64;
        for d in self.corpus.documents() {
            let toks = &d.field(f).terms;
            len += toks.len() as u64;
            count += self.count(toks, kind, t1, t2);
        }
        self.collection.borrow_mut().insert(key, (len, count));
        (len, count)
    }

    fn count(&self, tokens: &[String], kind: Kind, t1: &str, t2: &str) -> u64 {
        match kind {
            Kind::Uni => tokens.iter().filter(|t| *t == t1).count() as u64,
            Kind::Ord => naive_ordered(tokens, t1, t2),
            Kind::Unord => naive_unordered(tokens, t1, t2, self.params.window),
        }
    }

    fn feature(&self, doc: &FieldedDocument, kind: Kind, t1: &str, t2: &str) -> f64 {
        let clique = kind as usize;
        let mut mixture = 0.0;
        for f in Field::ALL {
            let (coll_len, coll_count) = self.collection_stats(kind, f, t1, t2);
            let toks = &doc.field(f).terms;
            let mu = self.params.dirichlet_mu[f.index()];
            let p = if coll_len == 0 {
                1e-10
            } else {
                let prior = coll_count as f64 / coll_len as f64;
                let est = (self.count(toks, kind, t1, t2) as f64 + mu * prior) / (toks.len() as f64 + mu);
                if est > 0.0 {
                    est
                } else {
                    1e-10
                }
            };
            mixture += self.params.field_weights[clique][f.index()] * p;
        }
        mixture.ln()
    }

    pub fn score(&self, doc: &FieldedDocument, terms: &[String]) -> f64 {
        let [lt, lo, lu] = self.params.clique_weights;
        let mut total = 0.0;
        for t in terms {
            total += lt * self.feature(doc, Kind::Uni, t, "");
        }
        for pair in terms.windows(2) {
            total += lo * self.feature(doc, Kind::Ord, &pair[0], &pair[1]);
            total += lu * self.feature(doc, Kind::Unord, &pair[0], &pair[1]);
        }
        total
    }

    /// Documents with any query term in any field.
    pub fn candidates(&self, terms: &[String]) -> Vec<&'c FieldedDocument> {
        self.corpus
            .documents()
            .iter()
            .filter(|d| {
                Field::ALL
                    .iter()
                    .any(|&f| d.field(f).terms.iter().any(|t| terms.contains(t)))
            })
            .collect()
    }

    /// All candidates scored, best first, ties by doc_id.
    pub fn ranking(&self, terms: &[String]) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .candidates(terms)
            .into_iter()
            .map(|d| (d.doc_id.clone(), self.score(d, terms)))
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }
}

/// Textbook NDCG@k over (doc_id, grade) judgments.
pub fn oracle_ndcg(ranking: &[&str], qrels: &Qrels, query_id: &str, k: usize) -> f64 {
    let discount = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let mut dcg = 0.0;
    for (i, doc) in ranking.iter().take(k).enumerate() {
        let g = qrels.grade(query_id, doc);
        dcg += (2f64.powi(g as i32) - 1.0) * discount(i + 1);
    }
    let mut ideal: Vec<u32> = qrels.judged(query_id).map(|(_, g)| g).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let mut idcg = 0.0;
    for (i, g) in ideal.iter().take(k).enumerate() {
        idcg += (2f64.powi(*g as i32) - 1.0) * discount(i + 1);
    }
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

pub fn oracle_centroid(vectors: &[&[f64]]) -> Option<Vec<f64>> {
    if vectors.is_empty() {
        return None;
    }
    let mut c = vec![0.0; vectors[0].len()];
    for v in vectors {
        for (a, x) in c.iter_mut().zip(v.iter()) {
            *a += x;
        }
    }
    Some(c.into_iter().map(|x| x / vectors.len() as f64).collect())
}

pub fn oracle_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

/// Paired t statistic and two-sided p from the Student t CDF.
pub fn oracle_t_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = mean / (var.sqrt() / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    (t, 2.0 * dist.cdf(-t.abs()))
}

/// Largest norm-wise relative error between the analytic skip-gram gradient
/// and central differences with step `h`, over `points` random parameter
/// sets (dim 2, vocabulary 3, 2 negatives).
pub fn skipgram_gradient_error(points: usize, h: f64, seed: u64) -> f64 {
    use fielded_rerank::embedding::skipgram::{sgns_gradient, sgns_loss, SgnsParams};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let mut m = || {
            (0..3)
                .map(|_| (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        let mut params = SgnsParams {
            input: m(),
            output: m(),
        };
        let center = rng.gen_range(0..3);
        let context = rng.gen_range(0..3);
        let negatives = [rng.gen_range(0..3), rng.gen_range(0..3)];
        let grad = sgns_gradient(&params, center, context, &negatives);
        let mut analytic = Vec::new();
        let mut numeric = Vec::new();
        for matrix in 0..2 {
            for r in 0..3 {
                for d in 0..2 {
                    let x = if matrix == 0 {
                        params.input[r][d]
                    } else {
                        params.output[r][d]
                    };
                    set_cell(&mut params, matrix, r, d, x + h);
                    let up = sgns_loss(&params, center, context, &negatives);
                    set_cell(&mut params, matrix, r, d, x - h);
                    let down = sgns_loss(&params, center, context, &negatives);
                    set_cell(&mut params, matrix, r, d, x);
                    numeric.push((up - down) / (2.0 * h));
                    analytic.push(if matrix == 0 {
                        grad.input[r][d]
                    } else {
                        grad.output[r][d]
                    });
                }
            }
        }
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale =
            analytic.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
    }
    worst
}

fn set_cell(p: &mut fielded_rerank::embedding::skipgram::SgnsParams<f64>, matrix: usize, r: usize, d: usize, x: f64) {
    let m = if matrix == 0 { &mut p.input } else { &mut p.output };
    m[r][d] = x;
}
