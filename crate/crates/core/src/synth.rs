//! A small inflectional language with known structure, for experiments.
//!
//! Every word is a stem plus a suffix, and the suffix decides the tag. Some
//! word types are ambiguous: right after a determiner they take the next
//! paradigm's tag instead. Latin-script foreign words and capitalised
//! proper names are mixed in so the initial tagger has work to do.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{rng, validate_tag_name, Role, Sentence, Tag, TaggedCorpus, Tagset, Token};
use crate::error::{Error, Result};
use crate::lexicon::{classify_script, ScriptClass};

pub const DET_TAG: &str = "DET";
pub const FOREIGN_TAG: &str = "FOREIGN";
pub const PROPER_TAG: &str = "PROPER";
pub const DETERMINERS: [&str; 3] = ["το", "τον", "της"];

const DET_SLOT_RATE: f64 = 0.1;
const FOREIGN_RATE: f64 = 0.05;
const PROPER_RATE: f64 = 0.05;
const POOL_SIZE: usize = 40;
const MAX_STEMS: usize = 100_000;

const CONSONANTS: [char; 8] = ['κ', 'λ', 'μ', 'ν', 'π', 'ρ', 'σ', 'τ'];
const VOWELS: [char; 4] = ['α', 'ε', 'ο', 'ι'];
const CAPITALS: [char; 6] = ['Κ', 'Λ', 'Μ', 'Ν', 'Π', 'Ά'];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_stems: usize,
    /// `(suffix, tag name)` pairs; the first tag doubles as the default
    /// tag for unknown lowercase words.
    pub suffix_paradigms: Vec<(String, String)>,
    pub ambiguity_rate: f64,
    pub context_rule_strength: f64,
    pub n_sentences: usize,
    /// Inclusive token-count range.
    pub sentence_length: (usize, usize),
    pub seed: u64,
    /// Stem frequencies fall off as `1 / rank^zipf_exponent`.
    pub zipf_exponent: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_stems: 200,
            suffix_paradigms: [
                ("η", "NOUN_F"),
                ("ος", "NOUN_M"),
                ("ει", "VERB"),
                ("ικα", "ADJ"),
                ("ως", "ADV"),
            ]
            .iter()
            .map(|&(s, t)| (s.to_owned(), t.to_owned()))
            .collect(),
            ambiguity_rate: 0.3,
            context_rule_strength: 1.0,
            n_sentences: 2000,
            sentence_length: (5, 15),
            seed: 0,
            zipf_exponent: 1.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_stems == 0 || self.n_stems > MAX_STEMS {
            return bad(format!("n_stems must lie in 1..={MAX_STEMS}"));
        }
        if self.suffix_paradigms.is_empty() {
            return bad("at least one suffix paradigm is required".into());
        }
        let mut suffixes = HashSet::new();
        let mut tags = HashSet::new();
        for (suffix, tag) in &self.suffix_paradigms {
            if suffix.is_empty() || suffix.chars().any(char::is_whitespace) {
                return bad(format!("bad suffix `{suffix}`"));
            }
            validate_tag_name(tag).or_else(bad)?;
            if [DET_TAG, FOREIGN_TAG, PROPER_TAG].contains(&tag.as_str()) {
                return bad(format!("tag `{tag}` is reserved"));
            }
            if !suffixes.insert(suffix) {
                return bad(format!("duplicate suffix `{suffix}`"));
            }
            if !tags.insert(tag) {
                return bad(format!("duplicate paradigm tag `{tag}`"));
            }
        }
        for (name, rate) in [
            ("ambiguity_rate", self.ambiguity_rate),
            ("context_rule_strength", self.context_rule_strength),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} must lie in [0, 1], got {rate}"));
            }
        }
        if self.ambiguity_rate > 0.0 && self.suffix_paradigms.len() < 2 {
            return bad("ambiguity needs at least two paradigms".into());
        }
        if self.n_sentences == 0 {
            return bad("n_sentences must be positive".into());
        }
        let (lo, hi) = self.sentence_length;
        if lo == 0 || lo > hi {
            return bad(format!("bad sentence length range {lo}..={hi}"));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent >= 0.0) {
            return bad(format!("bad zipf exponent {}", self.zipf_exponent));
        }
        Ok(())
    }

    /// Key/value text, one setting per line, `paradigm` repeated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n_stems {}", self.n_stems);
        for (suffix, tag) in &self.suffix_paradigms {
            let _ = writeln!(out, "paradigm {suffix} {tag}");
        }
        let _ = writeln!(out, "ambiguity_rate {}", self.ambiguity_rate);
        let _ = writeln!(out, "context_rule_strength {}", self.context_rule_strength);
        let _ = writeln!(out, "n_sentences {}", self.n_sentences);
        let _ = writeln!(
            out,
            "sentence_length {} {}",
            self.sentence_length.0, self.sentence_length.1
        );
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "zipf_exponent {}", self.zipf_exponent);
        out
    }

    /// Parses [`SynthSpec::to_text`] output. Missing keys keep their
    /// defaults; any `paradigm` line replaces the default paradigms.
    pub fn parse(text: &str) -> Result<SynthSpec> {
        let mut spec = SynthSpec::default();
        let mut paradigms = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let key = fields[0];
            let args = &fields[1..];
            let want = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(Error::parse(
                        line_no,
                        1,
                        format!("`{key}` takes {n} value(s)"),
                    ))
                }
            };
            if key != "paradigm" && !seen.insert(key) {
                return Err(Error::parse(line_no, 1, format!("duplicate key `{key}`")));
            }
            match key {
                "paradigm" => {
                    want(2)?;
                    paradigms.push((args[0].nfc().collect(), args[1].to_owned()));
                }
                "n_stems" => {
                    want(1)?;
                    spec.n_stems = num(args[0], line_no)?;
                }
                "ambiguity_rate" => {
                    want(1)?;
                    spec.ambiguity_rate = num(args[0], line_no)?;
                }
                "context_rule_strength" => {
                    want(1)?;
                    spec.context_rule_strength = num(args[0], line_no)?;
                }
                "n_sentences" => {
                    want(1)?;
                    spec.n_sentences = num(args[0], line_no)?;
                }
                "sentence_length" => {
                    want(2)?;
                    spec.sentence_length = (num(args[0], line_no)?, num(args[1], line_no)?);
                }
                "seed" => {
                    want(1)?;
                    spec.seed = num(args[0], line_no)?;
                }
                "zipf_exponent" => {
                    want(1)?;
                    spec.zipf_exponent = num(args[0], line_no)?;
                }
                _ => return Err(Error::parse(line_no, 1, format!("unknown key `{key}`"))),
            }
        }
        if !paradigms.is_empty() {
            spec.suffix_paradigms = paradigms;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Paradigm tags plus DET, FOREIGN and PROPER.
    pub fn tagset(&self) -> Result<Tagset> {
        self.validate()?;
        let names = self
            .suffix_paradigms
            .iter()
            .map(|(_, t)| t.as_str())
            .chain([DET_TAG, FOREIGN_TAG, PROPER_TAG]);
        Tagset::new(
            names,
            [
                (Role::Foreign, FOREIGN_TAG),
                (Role::ProperMascSg, PROPER_TAG),
                (Role::NounFemSg, &self.suffix_paradigms[0].1),
            ],
        )
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, 1, format!("bad number `{s}`")))
}

fn syllables(rng: &mut impl Rng, n: usize, out: &mut String) {
    for _ in 0..n {
        out.push(*CONSONANTS.choose(rng).expect("non-empty"));
        out.push(*VOWELS.choose(rng).expect("non-empty"));
    }
}

fn distinct_strings(
    rng: &mut impl Rng,
    n: usize,
    taken: &mut HashSet<String>,
    mut make: impl FnMut(&mut dyn FnMut() -> u32, usize) -> String,
) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut extra = 0;
    let mut misses = 0;
    while out.len() < n {
        let mut draw = || rng.random::<u32>();
        let s = make(&mut draw, extra);
        if taken.insert(s.clone()) {
            out.push(s);
        } else {
            misses += 1;
            if misses > 50 {
                extra += 1;
                misses = 0;
            }
        }
    }
    out
}

struct WordType {
    word: String,
    paradigm: usize,
    ambiguous: bool,
}

/// Generates a tagged corpus following `spec`; deterministic in its seed.
pub fn generate_synthetic_corpus(spec: &SynthSpec) -> Result<TaggedCorpus> {
    let tagset = Arc::new(spec.tagset()?);
    let mut rng = rng(spec.seed);
    let paradigm_tags: Vec<Tag> = spec
        .suffix_paradigms
        .iter()
        .map(|(_, t)| tagset.get(t).expect("paradigm tag in tagset"))
        .collect();
    let n_par = paradigm_tags.len();
    let det = tagset.get(DET_TAG).expect("DET in tagset");
    let foreign = tagset.get(FOREIGN_TAG).expect("FOREIGN in tagset");
    let proper = tagset.get(PROPER_TAG).expect("PROPER in tagset");

    let mut taken: HashSet<String> = DETERMINERS.iter().map(|s| s.to_string()).collect();
    let stems = {
        let mut out = Vec::with_capacity(spec.n_stems);
        let mut extra = 0;
        let mut misses = 0;
        let mut stem_set = HashSet::new();
        while out.len() < spec.n_stems {
            let mut s = String::new();
            let n = 2 + extra + (rng.random::<u32>() % 2) as usize;
            syllables(&mut rng, n, &mut s);
            if stem_set.insert(s.clone()) {
                out.push(s);
            } else {
                misses += 1;
                if misses > 50 {
                    extra += 1;
                    misses = 0;
                }
            }
        }
        out
    };

    // One type per stem and paradigm; a later collision keeps the earlier type.
    let mut types: Vec<WordType> = Vec::new();
    let mut by_stem: Vec<Vec<Option<usize>>> = Vec::with_capacity(stems.len());
    for stem in &stems {
        let mut row = Vec::with_capacity(n_par);
        for (p, (suffix, _)) in spec.suffix_paradigms.iter().enumerate() {
            let word = format!("{stem}{suffix}");
            let ambiguous = rng.random_bool(spec.ambiguity_rate);
            if taken.insert(word.clone()) {
                types.push(WordType {
                    word,
                    paradigm: p,
                    ambiguous,
                });
                row.push(Some(types.len() - 1));
            } else {
                row.push(None);
            }
        }
        by_stem.push(row);
    }

    let foreign_pool = distinct_strings(&mut rng, POOL_SIZE, &mut taken, |draw, extra| {
        let len = 3 + extra + (draw() % 5) as usize;
        (0..len)
            .map(|_| (b'a' + (draw() % 26) as u8) as char)
            .collect()
    });
    let proper_pool = distinct_strings(&mut rng, POOL_SIZE, &mut taken, |draw, extra| {
        let mut s = String::new();
        s.push(CAPITALS[draw() as usize % CAPITALS.len()]);
        s.push(VOWELS[draw() as usize % VOWELS.len()]);
        for _ in 0..1 + extra + (draw() % 2) as usize {
            s.push(CONSONANTS[draw() as usize % CONSONANTS.len()]);
            s.push(VOWELS[draw() as usize % VOWELS.len()]);
        }
        s.push('ς');
        s
    });

    let zipf = WeightedIndex::new(
        (0..stems.len()).map(|r| 1.0 / ((r + 1) as f64).powf(spec.zipf_exponent)),
    )
    .map_err(|e| Error::Config(format!("stem weights: {e}")))?;
    let ambiguous: Vec<usize> = (0..types.len()).filter(|&i| types[i].ambiguous).collect();
    let ambiguous_weights = if ambiguous.is_empty() {
        None
    } else {
        let rank: HashMap<usize, usize> = by_stem
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().flatten().map(move |&t| (t, r)))
            .collect();
        Some(
            WeightedIndex::new(
                ambiguous
                    .iter()
                    .map(|t| 1.0 / ((rank[t] + 1) as f64).powf(spec.zipf_exponent)),
            )
            .map_err(|e| Error::Config(format!("stem weights: {e}")))?,
        )
    };

    let alt = |p: usize| paradigm_tags[(p + 1) % n_par];
    let mut sentences = Vec::with_capacity(spec.n_sentences);
    for _ in 0..spec.n_sentences {
        let len = rng.random_range(spec.sentence_length.0..=spec.sentence_length.1);
        let mut tokens = Vec::with_capacity(len);
        while tokens.len() < len {
            let room = len - tokens.len();
            let roll: f64 = rng.random();
            if let (true, Some(w)) = (room >= 2 && roll < DET_SLOT_RATE, &ambiguous_weights) {
                let t = &types[ambiguous[w.sample(&mut rng)]];
                let d = DETERMINERS.choose(&mut rng).expect("non-empty");
                tokens.push(Token::tagged(*d, det));
                let shifted = rng.random_bool(spec.context_rule_strength);
                let tag = if shifted {
                    alt(t.paradigm)
                } else {
                    paradigm_tags[t.paradigm]
                };
                tokens.push(Token::tagged(t.word.clone(), tag));
            } else if roll < DET_SLOT_RATE + FOREIGN_RATE {
                let w = foreign_pool.choose(&mut rng).expect("non-empty pool");
                tokens.push(Token::tagged(w.clone(), foreign));
            } else if roll < DET_SLOT_RATE + FOREIGN_RATE + PROPER_RATE {
                let w = proper_pool.choose(&mut rng).expect("non-empty pool");
                tokens.push(Token::tagged(w.clone(), proper));
            } else {
                let stem = zipf.sample(&mut rng);
                let p = rng.random_range(0..n_par);
                let t = by_stem[stem][p].or_else(|| by_stem[stem].iter().flatten().next().copied());
                match t {
                    Some(t) => {
                        let t = &types[t];
                        tokens.push(Token::tagged(t.word.clone(), paradigm_tags[t.paradigm]));
                    }
                    None => {
                        let w = foreign_pool.choose(&mut rng).expect("non-empty pool");
                        tokens.push(Token::tagged(w.clone(), foreign));
                    }
                }
            }
        }
        sentences.push(Sentence::new(tokens)?);
    }
    TaggedCorpus::new(tagset, sentences)
}

/// Tags text of the synthetic language with the rules that generated it:
/// determiners, script classes, longest suffix, and the shift after a
/// determiner.
#[derive(Debug, Clone)]
pub struct SynthOracle {
    tagset: Arc<Tagset>,
    /// Longest suffix first.
    suffixes: Vec<(String, usize)>,
    paradigm_tags: Vec<Tag>,
}

impl SynthOracle {
    pub fn new(spec: &SynthSpec, tagset: Arc<Tagset>) -> Result<Self> {
        spec.validate()?;
        let paradigm_tags = spec
            .suffix_paradigms
            .iter()
            .map(|(_, t)| {
                tagset
                    .get(t)
                    .ok_or_else(|| Error::Tagset(format!("tag `{t}` missing from tagset")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut suffixes: Vec<(String, usize)> = spec
            .suffix_paradigms
            .iter()
            .enumerate()
            .map(|(p, (s, _))| (s.clone(), p))
            .collect();
        suffixes.sort_by_key(|(s, _)| std::cmp::Reverse(s.chars().count()));
        Ok(SynthOracle {
            tagset,
            suffixes,
            paradigm_tags,
        })
    }

    pub fn tag(&self, raw: &[Sentence]) -> TaggedCorpus {
        let det = self.tagset.get(DET_TAG);
        let foreign = self.tagset.role(Role::Foreign);
        let proper = self.tagset.role(Role::ProperMascSg);
        let fallback = self.tagset.role(Role::NounFemSg);
        let sentences = raw
            .iter()
            .map(|s| {
                let mut prev_det = false;
                let tokens = s
                    .words()
                    .map(|w| {
                        let is_det = DETERMINERS.contains(&w);
                        let tag = if is_det {
                            det.unwrap_or(fallback)
                        } else {
                            match classify_script(w) {
                                Ok(ScriptClass::LatinStart) => foreign,
                                Ok(ScriptClass::GreekCapitalStart) => proper,
                                _ => match self
                                    .suffixes
                                    .iter()
                                    .find(|(s, _)| w.ends_with(s.as_str()))
                                {
                                    Some(&(_, p)) if prev_det => {
                                        self.paradigm_tags[(p + 1) % self.paradigm_tags.len()]
                                    }
                                    Some(&(_, p)) => self.paradigm_tags[p],
                                    None => fallback,
                                },
                            }
                        };
                        prev_det = is_det;
                        Token::tagged(w, tag)
                    })
                    .collect();
                Sentence::new(tokens).expect("non-empty input sentence")
            })
            .collect();
        TaggedCorpus::new(self.tagset.clone(), sentences).expect("oracle tags come from the tagset")
    }
}
