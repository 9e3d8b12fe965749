//! Ranking evaluation: NDCG@k, paired t-tests, TREC run files and reports.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Qrels;
use crate::error::{Error, Result};

/// Scored documents for one query, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<(String, f64)>,
}

impl RankedList {
    pub fn new(query_id: impl Into<String>, entries: Vec<(String, f64)>) -> Self {
        RankedList {
            query_id: query_id.into(),
            entries,
        }
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(d, _)| d.as_str())
    }
}

/// Gain of a relevance grade, `2^grade - 1`.
pub fn gain(grade: u32) -> f64 {
    2f64.powi(grade as i32) - 1.0
}

/// DCG of grades listed in rank order, truncated at `k`.
pub fn dcg(grades_in_rank_order: impl IntoIterator<Item = u32>, k: usize) -> f64 {
    grades_in_rank_order
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, g)| gain(g) / ((i + 2) as f64).log2())
        .sum()
}

/// DCG of the ideal ordering of the given judged grades.
pub fn ideal_dcg(judged: impl IntoIterator<Item = u32>, k: usize) -> f64 {
    let mut grades: Vec<u32> = judged.into_iter().filter(|&g| g > 0).collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    dcg(grades, k)
}

/// NDCG@k against every judged document of the query, retrieved or not.
/// Queries without relevant documents score 0.
pub fn ndcg_at_k(ranked: &RankedList, qrels: &Qrels, k: usize) -> f64 {
    let ideal = ideal_dcg(qrels.judged(&ranked.query_id).map(|(_, g)| g), k);
    if ideal <= 0.0 {
        return 0.0;
    }
    let actual = dcg(ranked.doc_ids().map(|d| qrels.grade(&ranked.query_id, d)), k);
    actual / ideal
}

/// Per-query NDCG@k for every query in `qrels`; queries missing from the run
/// score 0. Sorted by query id.
pub fn per_query_ndcg(run: &[RankedList], qrels: &Qrels, k: usize) -> Vec<(String, f64)> {
    let by_id: HashMap<&str, &RankedList> = run.iter().map(|l| (l.query_id.as_str(), l)).collect();
    qrels
        .query_ids()
        .map(|q| {
            let v = match by_id.get(q) {
                Some(list) => ndcg_at_k(list, qrels, k),
                None => 0.0,
            };
            (q.to_owned(), v)
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Set when every difference is the same non-zero value; `t` is then
    /// infinite and `p` is 0.
    pub degenerate_variance: bool,
}

/// Two-sided Student's paired t-test of `a - b` with `n - 1` degrees of freedom.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "paired t-test needs at least 2 pairs, got {n}"
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let md = mean(&diffs);
    let ss: f64 = diffs.iter().map(|d| (d - md) * (d - md)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(TTest {
            t: 0.0,
            p: 1.0,
            degenerate_variance: false,
        });
    }
    // Constant shift: floating point noise can leave a tiny residual spread.
    if sd <= 1e-12 * md.abs() {
        return Ok(TTest {
            t: if md > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
            p: 0.0,
            degenerate_variance: true,
        });
    }
    let t = md / (sd / (n as f64).sqrt());
    let df = (n - 1) as f64;
    Ok(TTest {
        t,
        p: student_t_two_sided_p(t, df),
        degenerate_variance: false,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Renders one run in TREC format: `query_id Q0 doc_id rank score tag`.
pub fn format_run(lists: &[RankedList], tag: &str) -> String {
    let mut out = String::new();
    for list in lists {
        for (rank, (doc, score)) in list.entries.iter().enumerate() {
            // `{}` on f64 prints the shortest string that parses back exactly.
            writeln!(out, "{} Q0 {} {} {} {}", list.query_id, doc, rank + 1, score, tag).unwrap();
        }
    }
    out
}

pub fn write_run(lists: &[RankedList], tag: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if tag.is_empty() || tag.contains(char::is_whitespace) {
        return Err(Error::InvalidParameter(format!(
            "run tag {tag:?} must be a non-empty word"
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(format_run(lists, tag).as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_run(path: impl AsRef<Path>) -> Result<Vec<RankedList>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_run(BufReader::new(file), &path.display().to_string())
}

/// Parses a TREC run, keeping queries in order of first appearance and
/// entries in file order.
pub fn parse_run(reader: impl BufRead, context: &str) -> Result<Vec<RankedList>> {
    let mut lists: Vec<RankedList> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 6 {
            return Err(Error::parse(
                context,
                line_no,
                format!(
                    "expected 6 columns `query_id Q0 doc_id rank score tag`, found {}",
                    cols.len()
                ),
            ));
        }
        cols[3].parse::<u64>().map_err(|_| {
            Error::parse(
                context,
                line_no,
                format!("rank {:?} is not a positive integer", cols[3]),
            )
        })?;
        let score: f64 = cols[4]
            .parse()
            .map_err(|_| Error::parse(context, line_no, format!("score {:?} is not a number", cols[4])))?;
        let idx = *slot.entry(cols[0].to_owned()).or_insert_with(|| {
            lists.push(RankedList::new(cols[0], Vec::new()));
            lists.len() - 1
        });
        lists[idx].entries.push((cols[2].to_owned(), score));
    }
    Ok(lists)
}

/// Keeps only queries whose id starts with `prefix`.
pub fn filter_by_prefix(lists: Vec<RankedList>, prefix: Option<&str>) -> Vec<RankedList> {
    match prefix {
        None => lists,
        Some(p) => lists.into_iter().filter(|l| l.query_id.starts_with(p)).collect(),
    }
}

/// Restricts judgments to queries whose id starts with `prefix`.
pub fn filter_qrels_by_prefix(qrels: &Qrels, prefix: Option<&str>) -> Qrels {
    let mut out = Qrels::new();
    for q in qrels.query_ids().filter(|q| prefix.is_none_or(|p| q.starts_with(p))) {
        for (d, g) in qrels.judged(q) {
            out.insert(q, d, g);
        }
    }
    out
}

/// Per-query and aggregate metric values of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub metric: String,
    pub per_query: Vec<(String, f64)>,
}

impl MetricReport {
    pub fn ndcg(run: &[RankedList], qrels: &Qrels, k: usize) -> Self {
        MetricReport {
            metric: format!("ndcg_cut_{k}"),
            per_query: per_query_ndcg(run, qrels, k),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.per_query.iter().map(|(_, v)| *v).collect()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values())
    }
}

/// Evaluation report rendered as `metric<TAB>query_id<TAB>value` rows, with
/// an `all` row per metric.
#[derive(Debug, Clone, Default)]
pub struct Report {
    rows: Vec<(String, String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds per-query rows and the aggregate row; `label` prefixes the metric
    /// name (`label.metric`) when given.
    pub fn add_metric(&mut self, label: Option<&str>, m: &MetricReport) {
        let name = match label {
            Some(l) => format!("{l}.{}", m.metric),
            None => m.metric.clone(),
        };
        for (q, v) in &m.per_query {
            self.rows.push((name.clone(), q.clone(), format!("{v:.4}")));
        }
        self.rows.push((name, "all".into(), format!("{:.4}", m.mean())));
    }

    /// Adds `ttest_t.metric` and `ttest_p.metric` aggregate rows comparing
    /// `candidate` against `baseline`. A constant non-zero shift renders p
    /// as `<1e-12` and adds a `ttest_degenerate.metric` row.
    pub fn add_t_test(&mut self, metric: &str, test: &TTest) {
        self.rows
            .push((format!("ttest_t.{metric}"), "all".into(), format!("{:.6}", test.t)));
        let p = if test.degenerate_variance {
            "<1e-12".to_string()
        } else {
            format!("{:.6}", test.p)
        };
        self.rows.push((format!("ttest_p.{metric}"), "all".into(), p));
        if test.degenerate_variance {
            self.rows
                .push((format!("ttest_degenerate.{metric}"), "all".into(), "1".into()));
        }
    }

    pub fn rows(&self) -> &[(String, String, String)] {
        &self.rows
    }

    pub fn value(&self, metric: &str, query_id: &str) -> Option<&str> {
        self.rows
            .iter()
            .find(|(m, q, _)| m == metric && q == query_id)
            .map(|(_, _, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (m, q, v) in &self.rows {
            writeln!(out, "{m}\t{q}\t{v}").unwrap();
        }
        out
    }
}

/// Report for one run, or for a candidate run against a baseline with
/// paired t-tests on each cutoff.
pub fn evaluate(
    run: &[RankedList],
    baseline: Option<&[RankedList]>,
    qrels: &Qrels,
    cutoffs: &[usize],
) -> Result<Report> {
    let mut report = Report::new();
    for &k in cutoffs {
        let cand = MetricReport::ndcg(run, qrels, k);
        match baseline {
            None => report.add_metric(None, &cand),
            Some(base) => {
                let base = MetricReport::ndcg(base, qrels, k);
                report.add_metric(Some("run"), &cand);
                report.add_metric(Some("baseline"), &base);
                if cand.per_query.len() >= 2 {
                    report.add_t_test(&cand.metric, &paired_t_test(&cand.values(), &base.values())?);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn list(q: &str, docs: &[&str]) -> RankedList {
        RankedList::new(
            q,
            docs.iter()
                .enumerate()
                .map(|(i, d)| (d.to_string(), (docs.len() - i) as f64))
                .collect(),
        )
    }

    #[test]
    fn worked_ndcg_example() {
        let mut qrels = Qrels::new();
        qrels.insert("Q", "A", 1);
        qrels.insert("Q", "C", 1);
        let ranked = list("Q", &["A", "B", "C"]);
        let expected = 1.5 / (1.0 + 1.0 / 3f64.log2());
        assert_abs_diff_eq!(ndcg_at_k(&ranked, &qrels, 3), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(ndcg_at_k(&ranked, &qrels, 3), 0.91972, epsilon = 1e-5);
    }

    #[test]
    fn ideal_order_and_empty_judgments() {
        let mut qrels = Qrels::new();
        qrels.insert("Q", "A", 2);
        qrels.insert("Q", "B", 1);
        qrels.insert("Q", "Z", 0);
        assert_eq!(ndcg_at_k(&list("Q", &["A", "B", "Z"]), &qrels, 10), 1.0);
        assert_eq!(ndcg_at_k(&list("R", &["A"]), &qrels, 10), 0.0);
        let mut none = Qrels::new();
        none.insert("Q", "A", 0);
        assert_eq!(ndcg_at_k(&list("Q", &["A"]), &none, 10), 0.0);
    }

    #[test]
    fn unretrieved_relevant_documents_count_against_ndcg() {
        let mut qrels = Qrels::new();
        qrels.insert("Q", "A", 1);
        qrels.insert("Q", "MISSING", 1);
        let v = ndcg_at_k(&list("Q", &["A"]), &qrels, 10);
        assert!(v < 1.0);
    }

    #[test]
    fn t_test_conventions() {
        let same = [0.1, 0.2, 0.3];
        let r = paired_t_test(&same, &same).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));

        let r = paired_t_test(&[0.3, 0.5, 0.7], &[0.2, 0.4, 0.6]).unwrap();
        assert!(r.degenerate_variance);
        assert!(r.p < 1e-12);
        assert_eq!(r.t, f64::INFINITY);

        assert!(paired_t_test(&[0.1, 0.2], &[0.1]).is_err());
        assert!(paired_t_test(&[0.1], &[0.1]).is_err());
    }

    #[test]
    fn t_test_known_value() {
        // d = [0.2, -0.1, 0.1, 0.0]: mean 0.05, sd = sqrt(0.05/3)
        let r = paired_t_test(&[0.9, 0.2, 0.6, 0.4], &[0.7, 0.3, 0.5, 0.4]).unwrap();
        let t = 0.05 / ((0.05f64 / 3.0).sqrt() / 2.0);
        assert_abs_diff_eq!(r.t, t, epsilon = 1e-12);
        assert!(r.p > 0.4 && r.p < 0.6, "{}", r.p);
    }

    #[test]
    fn incomplete_beta_reference_points() {
        assert_abs_diff_eq!(regularized_incomplete_beta(1.0, 1.0, 0.3), 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(regularized_incomplete_beta(2.0, 3.0, 0.4), 0.5248, epsilon = 1e-12);
        // t = 2.0 with 10 df: two-sided p = 0.073388034...
        assert_abs_diff_eq!(student_t_two_sided_p(2.0, 10.0), 0.0733880347707, epsilon = 1e-9);
    }

    #[test]
    fn run_format() {
        let text = format_run(&[list("Q1", &["A", "B"])], "fsdm");
        assert_eq!(text, "Q1 Q0 A 1 2 fsdm\nQ1 Q0 B 2 1 fsdm\n");
        let back = parse_run(text.as_bytes(), "t").unwrap();
        assert_eq!(back, vec![list("Q1", &["A", "B"])]);
        assert!(matches!(
            parse_run("Q1 Q0 A 1 x fsdm\n".as_bytes(), "t"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_run("\nQ1 Q0 A 1\n".as_bytes(), "t"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn report_rows() {
        let mut qrels = Qrels::new();
        qrels.insert("Q1", "A", 1);
        qrels.insert("Q2", "B", 1);
        let run = vec![list("Q1", &["A"]), list("Q2", &["X", "B"])];
        let report = evaluate(&run, None, &qrels, &[10]).unwrap();
        let text = report.render();
        assert!(text.starts_with("ndcg_cut_10\tQ1\t1.0000\n"));
        assert_eq!(
            report.value("ndcg_cut_10", "all"),
            Some(format!("{:.4}", (1.0 + 1.0 / 3f64.log2()) / 2.0).as_str())
        );

        let cmp = evaluate(&run, Some(&run), &qrels, &[10]).unwrap();
        assert_eq!(cmp.value("ttest_p.ndcg_cut_10", "all"), Some("1.000000"));
        assert_eq!(cmp.value("ttest_degenerate.ndcg_cut_10", "all"), None);
    }

    #[test]
    fn degenerate_report_rows() {
        let mut r = Report::new();
        r.add_t_test(
            "ndcg_cut_10",
            &paired_t_test(&[0.3, 0.5, 0.7], &[0.2, 0.4, 0.6]).unwrap(),
        );
        assert_eq!(r.value("ttest_t.ndcg_cut_10", "all"), Some("inf"));
        assert_eq!(r.value("ttest_p.ndcg_cut_10", "all"), Some("<1e-12"));
        assert_eq!(r.value("ttest_degenerate.ndcg_cut_10", "all"), Some("1"));
    }
}
