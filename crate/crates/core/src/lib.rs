pub mod corpus;
pub mod error;
pub mod eval;
pub mod learner;
pub mod lexicon;
pub mod model;
pub mod rules;
pub mod synth;
pub mod tagger;
