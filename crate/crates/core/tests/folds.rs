//! Fold plans, cross-validation bookkeeping and report statistics.

use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;

use tbed::corpus::{kfold_split, parse_tagged_corpus, truncate_to_words, FoldPlan, Role, Tagset};
use tbed::eval::{
    cross_validate, learning_curve, render_curve_csv, render_report_csv, EvalReport, FoldResult,
};
use tbed::learner::TrainConfig;
use tbed::lexicon::InitialRuleChain;
use tbed::synth::{generate_synthetic_corpus, SynthSpec};

fn fold(fold_id: usize, accuracy: f64) -> FoldResult {
    FoldResult {
        fold_id,
        accuracy,
        baseline_accuracy: accuracy / 2.0,
        known_accuracy: Some(accuracy),
        unknown_accuracy: None,
        n_lexical_rules: fold_id,
        n_contextual_rules: 2 * fold_id,
        test_tokens: 1,
        unknown_tokens: 0,
    }
}

/// Welford's single-pass update, independent of the report's two-pass sum.
fn welford(xs: &[f64]) -> (f64, f64) {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    let sd = if xs.len() > 1 {
        (m2 / (xs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

proptest! {
    #[test]
    fn fold_plan_partitions(n in 2..400usize, k in 2..=10usize, seed in any::<u64>()) {
        prop_assume!(n >= k);
        let plan = FoldPlan::new(n, k, seed).unwrap();
        let mut seen = HashSet::new();
        for f in 0..k {
            let test = plan.test_indices(f);
            let train: HashSet<usize> = plan.train_indices(f).into_iter().collect();
            prop_assert!(!test.is_empty());
            prop_assert!(test.iter().all(|i| !train.contains(i)));
            prop_assert_eq!(test.len() + train.len(), n);
            for i in test {
                prop_assert!(seen.insert(i));
            }
        }
        prop_assert_eq!(seen.len(), n);
        let sizes = plan.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(FoldPlan::new(n, k, seed).unwrap(), plan);
    }

    #[test]
    fn report_matches_recomputation(accs in prop::collection::vec(0.0..=1.0f64, 1..12)) {
        let mut folds: Vec<FoldResult> = accs.iter().enumerate().map(|(i, &a)| fold(i, a)).collect();
        folds.reverse();
        let report = EvalReport::from_folds(folds);
        let (mean, sd) = welford(&accs);
        prop_assert!((report.mean_accuracy - mean).abs() <= 1e-12);
        prop_assert!((report.stddev_accuracy - sd).abs() <= 1e-12);
        prop_assert!(report.folds.windows(2).all(|w| w[0].fold_id < w[1].fold_id));
    }
}

#[test]
fn plan_rejects_bad_shapes() {
    assert!(FoldPlan::new(3, 1, 0).is_err());
    assert!(FoldPlan::new(3, 4, 0).is_err());
}

fn synthetic(n_sentences: usize) -> tbed::corpus::TaggedCorpus {
    generate_synthetic_corpus(&SynthSpec {
        n_sentences,
        ..SynthSpec::default()
    })
    .unwrap()
}

#[test]
fn cross_validation_covers_every_token_once() {
    let corpus = synthetic(60);
    let report = cross_validate(
        &corpus,
        10,
        &TrainConfig::default(),
        &InitialRuleChain::greek(),
        5,
        1,
    )
    .unwrap();
    assert_eq!(report.folds.len(), 10);
    let tokens: usize = report.folds.iter().map(|f| f.test_tokens).sum();
    assert_eq!(tokens, corpus.word_count());
    let plan = kfold_split(&corpus, 10, 5).unwrap();
    for f in &report.folds {
        let expected: usize = plan
            .test_indices(f.fold_id)
            .iter()
            .map(|&i| corpus.sentences()[i].len())
            .sum();
        assert_eq!(f.test_tokens, expected);
        assert!((0.0..=1.0).contains(&f.accuracy));
    }
    let accs: Vec<f64> = report.folds.iter().map(|f| f.accuracy).collect();
    let (mean, sd) = welford(&accs);
    assert!((report.mean_accuracy - mean).abs() <= 1e-12);
    assert!((report.stddev_accuracy - sd).abs() <= 1e-12);
}

#[test]
fn jobs_do_not_change_results() {
    let corpus = synthetic(80);
    let cfg = TrainConfig::default();
    let chain = InitialRuleChain::greek();
    let one = cross_validate(&corpus, 4, &cfg, &chain, 1, 1).unwrap();
    let three = cross_validate(&corpus, 4, &cfg, &chain, 1, 3).unwrap();
    assert_eq!(render_report_csv(&one), render_report_csv(&three));
}

#[test]
fn single_size_curve_equals_cross_validation() {
    let corpus = synthetic(80);
    let cfg = TrainConfig::default();
    let chain = InitialRuleChain::greek();
    let words = corpus.word_count();
    let rows = learning_curve(&corpus, &[words], 5, &cfg, &chain, 2, 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(
        rows[0].report,
        cross_validate(&corpus, 5, &cfg, &chain, 2, 1).unwrap()
    );
}

#[test]
fn curve_rows_ascend_and_parse_back() {
    let corpus = synthetic(300);
    let sizes = [600, 1200, 2400];
    let rows = learning_curve(
        &corpus,
        &sizes,
        5,
        &TrainConfig::default(),
        &InitialRuleChain::greek(),
        0,
        1,
    )
    .unwrap();
    let csv_text = render_curve_csv(&rows);
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        &headers.iter().take(5).collect::<Vec<_>>(),
        &[
            "corpus_words",
            "mean_accuracy",
            "stddev_accuracy",
            "mean_lexical_rules",
            "mean_contextual_rules"
        ]
    );
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3);
    for ((record, row), size) in records.iter().zip(&rows).zip(sizes) {
        assert_eq!(record[0].parse::<usize>().unwrap(), size);
        assert_eq!(row.corpus_words, size);
        let acc: f64 = record[1].parse().unwrap();
        assert!((acc - row.report.mean_accuracy).abs() <= 5e-7);
        assert_eq!(record[1].split('.').nth(1).unwrap().len(), 6);
        let lex: f64 = record[3].parse().unwrap();
        assert!((lex - row.report.mean_lexical_rules).abs() <= 5e-7);
    }
    assert!(rows[2].report.mean_accuracy >= rows[0].report.mean_accuracy - 0.01);
    assert!(truncate_to_words(&corpus, 600).word_count() <= 600);
}

#[test]
fn too_small_for_k() {
    let ts = Arc::new(
        Tagset::new(
            ["A"],
            [
                (Role::Foreign, "A"),
                (Role::ProperMascSg, "A"),
                (Role::NounFemSg, "A"),
            ],
        )
        .unwrap(),
    );
    let corpus = parse_tagged_corpus("x/A\ny/A", ts).unwrap();
    assert!(cross_validate(
        &corpus,
        3,
        &TrainConfig::default(),
        &InitialRuleChain::greek(),
        0,
        1
    )
    .is_err());
}
