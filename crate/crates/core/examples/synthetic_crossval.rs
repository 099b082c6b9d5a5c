//! Cross-validates the tagger on a generated corpus and prints the report.
//!
//! `cargo run --release -p tbed-core --example synthetic_crossval [n_sentences]`

use std::time::Instant;

use tbed::eval::{cross_validate, render_report_csv};
use tbed::learner::TrainConfig;
use tbed::lexicon::InitialRuleChain;
use tbed::synth::{generate_synthetic_corpus, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_sentences = std::env::args().nth(1).map_or(Ok(2000), |s| s.parse())?;
    let spec = SynthSpec {
        n_sentences,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec)?;
    println!("{} sentences, {} tokens", corpus.len(), corpus.word_count());
    let start = Instant::now();
    let report = cross_validate(
        &corpus,
        10,
        &TrainConfig::default(),
        &InitialRuleChain::greek(),
        0,
        1,
    )?;
    print!("{}", render_report_csv(&report));
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
