//! Accuracy, k-fold cross-validation and learning curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::{truncate_to_words, FoldPlan, Tag, TaggedCorpus, Tagset};
use crate::error::{Error, Result};
use crate::learner::{train_model, TrainConfig};
use crate::lexicon::{InitialRuleChain, Lexicon};

/// Token-level agreement between a prediction and the gold standard.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Accuracy {
    pub correct: u64,
    pub total: u64,
    /// `(gold, predicted) → count`; sums to `total`.
    pub confusion: BTreeMap<(Tag, Tag), u64>,
}

impl Accuracy {
    /// Correct share of tokens; an empty comparison counts as perfect.
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    fn add(&mut self, gold: Tag, predicted: Tag) {
        self.total += 1;
        self.correct += (gold == predicted) as u64;
        *self.confusion.entry((gold, predicted)).or_default() += 1;
    }
}

fn compare(
    predicted: &TaggedCorpus,
    gold: &TaggedCorpus,
    mut visit: impl FnMut(&str, Tag, Tag),
) -> Result<()> {
    for (s, (p, g)) in predicted
        .sentences()
        .iter()
        .zip(gold.sentences())
        .enumerate()
    {
        let mut pt = TaggedCorpus::tagged_tokens(p);
        let mut gt = TaggedCorpus::tagged_tokens(g);
        let mut i = 0;
        loop {
            match (pt.next(), gt.next()) {
                (None, None) => break,
                (Some((pw, ptag)), Some((gw, gtag))) if pw == gw => visit(gw, gtag, ptag),
                (Some((pw, _)), Some((gw, _))) => {
                    return Err(Error::Alignment {
                        sentence: s,
                        token: i,
                        detail: format!("predicted word `{pw}` but gold has `{gw}`"),
                    })
                }
                _ => {
                    return Err(Error::Alignment {
                        sentence: s,
                        token: i,
                        detail: format!(
                            "sentence has {} predicted tokens but {} gold tokens",
                            p.len(),
                            g.len()
                        ),
                    })
                }
            }
            i += 1;
        }
    }
    if predicted.len() != gold.len() {
        return Err(Error::Alignment {
            sentence: predicted.len().min(gold.len()),
            token: 0,
            detail: format!(
                "{} predicted sentences but {} gold sentences",
                predicted.len(),
                gold.len()
            ),
        });
    }
    Ok(())
}

pub fn accuracy(predicted: &TaggedCorpus, gold: &TaggedCorpus) -> Result<Accuracy> {
    let mut acc = Accuracy::default();
    compare(predicted, gold, |_, g, p| acc.add(g, p))?;
    Ok(acc)
}

/// Accuracy split by whether `lexicon` knows the word: `(known, unknown)`.
pub fn split_accuracy(
    predicted: &TaggedCorpus,
    gold: &TaggedCorpus,
    lexicon: &Lexicon,
) -> Result<(Accuracy, Accuracy)> {
    let mut known = Accuracy::default();
    let mut unknown = Accuracy::default();
    compare(predicted, gold, |w, g, p| {
        if lexicon.contains(w) {
            known.add(g, p)
        } else {
            unknown.add(g, p)
        }
    })?;
    Ok((known, unknown))
}

/// `gold,predicted,count` rows ordered by tag name.
pub fn render_confusion_csv(acc: &Accuracy, tagset: &Tagset) -> String {
    let mut out = String::from("gold,predicted,count\n");
    for (&(g, p), n) in &acc.confusion {
        let _ = writeln!(out, "{},{},{n}", tagset.name(g), tagset.name(p));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold_id: usize,
    pub accuracy: f64,
    /// Same fold, tagged without any learned rules.
    pub baseline_accuracy: f64,
    /// `None` when the fold has no such tokens.
    pub known_accuracy: Option<f64>,
    pub unknown_accuracy: Option<f64>,
    pub n_lexical_rules: usize,
    pub n_contextual_rules: usize,
    pub test_tokens: usize,
    pub unknown_tokens: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Ordered by `fold_id`.
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    /// Sample standard deviation; zero for a single fold.
    pub stddev_accuracy: f64,
    pub mean_baseline_accuracy: f64,
    pub mean_known_accuracy: Option<f64>,
    pub mean_unknown_accuracy: Option<f64>,
    pub mean_lexical_rules: f64,
    pub mean_contextual_rules: f64,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl EvalReport {
    pub fn from_folds(mut folds: Vec<FoldResult>) -> EvalReport {
        folds.sort_by_key(|f| f.fold_id);
        let mean_accuracy = mean(folds.iter().map(|f| f.accuracy)).unwrap_or(0.0);
        let stddev_accuracy = if folds.len() < 2 {
            0.0
        } else {
            let ss: f64 = folds
                .iter()
                .map(|f| (f.accuracy - mean_accuracy).powi(2))
                .sum();
            (ss / (folds.len() - 1) as f64).sqrt()
        };
        EvalReport {
            mean_accuracy,
            stddev_accuracy,
            mean_baseline_accuracy: mean(folds.iter().map(|f| f.baseline_accuracy)).unwrap_or(0.0),
            mean_known_accuracy: mean(folds.iter().filter_map(|f| f.known_accuracy)),
            mean_unknown_accuracy: mean(folds.iter().filter_map(|f| f.unknown_accuracy)),
            mean_lexical_rules: mean(folds.iter().map(|f| f.n_lexical_rules as f64)).unwrap_or(0.0),
            mean_contextual_rules: mean(folds.iter().map(|f| f.n_contextual_rules as f64))
                .unwrap_or(0.0),
            folds,
        }
    }
}

/// Trains on `train`, tags the untagged words of `test` and scores them.
pub fn evaluate_fold(
    fold_id: usize,
    train: &TaggedCorpus,
    test: &TaggedCorpus,
    config: &TrainConfig,
    chain: &InitialRuleChain,
) -> Result<FoldResult> {
    let model = train_model(train, chain, config)?.model;
    let raw = test.untagged();
    let predicted = model.tag(&raw);
    let (known, unknown) = split_accuracy(&predicted, test, model.lexicon())?;
    let baseline = accuracy(&model.baseline().tag(&raw), test)?;
    let total = known.total + unknown.total;
    Ok(FoldResult {
        fold_id,
        accuracy: if total == 0 {
            1.0
        } else {
            (known.correct + unknown.correct) as f64 / total as f64
        },
        baseline_accuracy: baseline.fraction(),
        known_accuracy: (known.total > 0).then(|| known.fraction()),
        unknown_accuracy: (unknown.total > 0).then(|| unknown.fraction()),
        n_lexical_rules: model.lexical_rules().len(),
        n_contextual_rules: model.contextual_rules().len(),
        test_tokens: total as usize,
        unknown_tokens: unknown.total as usize,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Cross-validates over the folds of `plan`, `jobs` folds at a time.
pub fn cross_validate_with_plan(
    corpus: &TaggedCorpus,
    plan: &FoldPlan,
    config: &TrainConfig,
    chain: &InitialRuleChain,
    jobs: usize,
) -> Result<EvalReport> {
    config.validate()?;
    if plan.assignments().len() != corpus.len() {
        return Err(Error::Config(format!(
            "fold plan covers {} sentences but the corpus has {}",
            plan.assignments().len(),
            corpus.len()
        )));
    }
    let folds = pool(jobs)?.install(|| {
        (0..plan.k())
            .into_par_iter()
            .map(|fold| {
                let train = corpus.select(&plan.train_indices(fold));
                let test = corpus.select(&plan.test_indices(fold));
                evaluate_fold(fold, &train, &test, config, chain)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(EvalReport::from_folds(folds))
}

/// k-fold cross-validation with folds drawn from `seed`.
pub fn cross_validate(
    corpus: &TaggedCorpus,
    k: usize,
    config: &TrainConfig,
    chain: &InitialRuleChain,
    seed: u64,
    jobs: usize,
) -> Result<EvalReport> {
    let plan = FoldPlan::new(corpus.len(), k, seed)?;
    cross_validate_with_plan(corpus, &plan, config, chain, jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    /// The requested size; the truncated corpus may be slightly smaller.
    pub corpus_words: usize,
    pub report: EvalReport,
}

/// Cross-validates on word-count prefixes of `corpus`.
pub fn learning_curve(
    corpus: &TaggedCorpus,
    word_sizes: &[usize],
    k: usize,
    config: &TrainConfig,
    chain: &InitialRuleChain,
    seed: u64,
    jobs: usize,
) -> Result<Vec<CurveRow>> {
    if word_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "curve sizes must be strictly ascending".into(),
        ));
    }
    if word_sizes.first() == Some(&0) {
        return Err(Error::Config("curve sizes must be positive".into()));
    }
    word_sizes
        .iter()
        .map(|&size| {
            let prefix = truncate_to_words(corpus, size);
            if prefix.len() < k {
                return Err(Error::TooSmall(format!(
                    "{size} words give {} sentences, fewer than {k} folds",
                    prefix.len()
                )));
            }
            Ok(CurveRow {
                corpus_words: size,
                report: cross_validate(&prefix, k, config, chain, seed, jobs)?,
            })
        })
        .collect()
}

pub const CURVE_HEADER: &str = "corpus_words,mean_accuracy,stddev_accuracy,mean_lexical_rules,\
mean_contextual_rules,mean_known_accuracy,mean_unknown_accuracy";

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn opt6(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_default()
}

/// One row per curve point. Known/unknown columns are empty when no fold
/// had such tokens.
pub fn render_curve_csv(rows: &[CurveRow]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for row in rows {
        let r = &row.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.corpus_words,
            f6(r.mean_accuracy),
            f6(r.stddev_accuracy),
            f6(r.mean_lexical_rules),
            f6(r.mean_contextual_rules),
            opt6(r.mean_known_accuracy),
            opt6(r.mean_unknown_accuracy),
        );
    }
    out
}

pub const REPORT_HEADER: &str = "fold,test_tokens,accuracy,stddev_accuracy,baseline_accuracy,\
known_accuracy,unknown_accuracy,lexical_rules,contextual_rules";

/// One row per fold, then a `mean` row carrying the standard deviation.
pub fn render_report_csv(report: &EvalReport) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for f in &report.folds {
        let _ = writeln!(
            out,
            "{},{},{},,{},{},{},{},{}",
            f.fold_id,
            f.test_tokens,
            f6(f.accuracy),
            f6(f.baseline_accuracy),
            opt6(f.known_accuracy),
            opt6(f.unknown_accuracy),
            f.n_lexical_rules,
            f.n_contextual_rules,
        );
    }
    let tokens: usize = report.folds.iter().map(|f| f.test_tokens).sum();
    let _ = writeln!(
        out,
        "mean,{tokens},{},{},{},{},{},{},{}",
        f6(report.mean_accuracy),
        f6(report.stddev_accuracy),
        f6(report.mean_baseline_accuracy),
        opt6(report.mean_known_accuracy),
        opt6(report.mean_unknown_accuracy),
        f6(report.mean_lexical_rules),
        f6(report.mean_contextual_rules),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tagged_corpus;
    use crate::corpus::tests::toy_tagset;

    fn fold(id: usize, acc: f64) -> FoldResult {
        FoldResult {
            fold_id: id,
            accuracy: acc,
            baseline_accuracy: acc,
            known_accuracy: Some(acc),
            unknown_accuracy: None,
            n_lexical_rules: id,
            n_contextual_rules: 1,
            test_tokens: 10,
            unknown_tokens: 0,
        }
    }

    #[test]
    fn accuracy_ratios() {
        let ts = toy_tagset();
        let gold_text: String = (0..20).map(|i| format!("w{i}/NN ")).collect();
        let gold = parse_tagged_corpus(&gold_text, ts.clone()).unwrap();
        assert_eq!(accuracy(&gold, &gold).unwrap().fraction(), 1.0);
        let one_off = gold_text.replacen("w0/NN", "w0/AT", 1);
        let pred = parse_tagged_corpus(&one_off, ts.clone()).unwrap();
        let acc = accuracy(&pred, &gold).unwrap();
        assert_eq!(acc.fraction(), 0.95);
        assert_eq!(acc.confusion.values().sum::<u64>(), 20);
        let all_off = parse_tagged_corpus(&gold_text.replace("/NN", "/AT"), ts).unwrap();
        assert_eq!(accuracy(&all_off, &gold).unwrap().fraction(), 0.0);
    }

    #[test]
    fn misalignment_names_first_divergence() {
        let ts = toy_tagset();
        let gold = parse_tagged_corpus("a/NN b/NN\nc/NN d/NN", ts.clone()).unwrap();
        let pred = parse_tagged_corpus("a/NN b/NN\nc/NN x/NN", ts.clone()).unwrap();
        match accuracy(&pred, &gold) {
            Err(Error::Alignment {
                sentence, token, ..
            }) => assert_eq!((sentence, token), (1, 1)),
            other => panic!("{other:?}"),
        }
        let short = parse_tagged_corpus("a/NN b/NN", ts).unwrap();
        assert!(matches!(
            accuracy(&short, &gold),
            Err(Error::Alignment { .. })
        ));
    }

    #[test]
    fn report_statistics() {
        let r = EvalReport::from_folds((0..10).map(|i| fold(i, 1.0)).collect());
        assert_eq!((r.mean_accuracy, r.stddev_accuracy), (1.0, 0.0));
        let r = EvalReport::from_folds(vec![fold(1, 1.0), fold(0, 0.9)]);
        assert!((r.mean_accuracy - 0.95).abs() < 1e-12);
        assert!((r.stddev_accuracy - 0.0707106781).abs() < 1e-9);
        assert_eq!(r.folds[0].fold_id, 0);
        assert_eq!(r.mean_unknown_accuracy, None);
    }

    #[test]
    fn empty_curve_is_header_only() {
        assert_eq!(render_curve_csv(&[]), format!("{CURVE_HEADER}\n"));
    }

    #[test]
    fn curve_rejects_unsorted_sizes() {
        let ts = toy_tagset();
        let corpus = parse_tagged_corpus("a/NN\nb/NN\nc/NN", ts).unwrap();
        let cfg = TrainConfig::default();
        let chain = InitialRuleChain::greek();
        assert!(learning_curve(&corpus, &[2, 1], 2, &cfg, &chain, 0, 1).is_err());
        assert!(matches!(
            learning_curve(&corpus, &[1], 2, &cfg, &chain, 0, 1),
            Err(Error::TooSmall(_))
        ));
    }
}
