//! The trained model and the tagging pipeline: initial tags, lexical rules
//! on unknown word types, then contextual rules on every token.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::corpus::{Sentence, Tag, TaggedCorpus, Tagset, Token};
use crate::error::{Error, Result};
use crate::lexicon::{initial_tag, InitialRuleChain, Lexicon};
use crate::rules::{Context, ContextualRule, LexicalRule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggerModel {
    tagset: Arc<Tagset>,
    lexicon: Lexicon,
    initial_chain: InitialRuleChain,
    lexical_rules: Vec<LexicalRule>,
    contextual_rules: Vec<ContextualRule>,
}

impl TaggerModel {
    pub fn new(
        tagset: Arc<Tagset>,
        lexicon: Lexicon,
        initial_chain: InitialRuleChain,
        lexical_rules: Vec<LexicalRule>,
        contextual_rules: Vec<ContextualRule>,
    ) -> Result<Self> {
        let foreign = |tag: Tag| !tagset.contains(tag);
        if lexicon
            .iter()
            .any(|(_, e)| e.iter().any(|&(t, _)| foreign(t)))
        {
            return Err(Error::Config(
                "lexicon references a tag outside the tagset".into(),
            ));
        }
        if lexical_rules
            .iter()
            .any(|r| foreign(r.to) || r.from.is_some_and(foreign))
        {
            return Err(Error::Config(
                "lexical rule references a tag outside the tagset".into(),
            ));
        }
        let context_tags_ok = |c: &Context| match *c {
            Context::PrevTag(t)
            | Context::NextTag(t)
            | Context::Prev2Tag(t)
            | Context::Next2Tag(t)
            | Context::Prev1Or2Tag(t)
            | Context::Next1Or2Tag(t)
            | Context::Prev1Or2Or3Tag(t)
            | Context::Next1Or2Or3Tag(t) => !foreign(t),
            Context::SurroundTag(a, b) | Context::PrevBigram(a, b) | Context::NextBigram(a, b) => {
                !foreign(a) && !foreign(b)
            }
            Context::PrevWd(_) | Context::NextWd(_) => true,
        };
        if contextual_rules
            .iter()
            .any(|r| foreign(r.from) || foreign(r.to) || !context_tags_ok(&r.context))
        {
            return Err(Error::Config(
                "contextual rule references a tag outside the tagset".into(),
            ));
        }
        Ok(TaggerModel {
            tagset,
            lexicon,
            initial_chain,
            lexical_rules,
            contextual_rules,
        })
    }

    pub fn tagset(&self) -> &Arc<Tagset> {
        &self.tagset
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn initial_chain(&self) -> &InitialRuleChain {
        &self.initial_chain
    }

    pub fn lexical_rules(&self) -> &[LexicalRule] {
        &self.lexical_rules
    }

    pub fn contextual_rules(&self) -> &[ContextualRule] {
        &self.contextual_rules
    }

    /// The same model without any learned rules.
    pub fn baseline(&self) -> TaggerModel {
        TaggerModel {
            lexical_rules: Vec::new(),
            contextual_rules: Vec::new(),
            ..self.clone()
        }
    }

    pub fn tag(&self, raw: &[Sentence]) -> TaggedCorpus {
        tag_corpus(raw, self)
    }
}

/// Initial tags followed by lexical rules on words missing from `lexicon`.
/// Lexical rules see each unknown word type once, across all `sentences`.
pub(crate) fn lexical_stage<S: AsRef<str>>(
    sentences: &[Vec<S>],
    lexicon: &Lexicon,
    chain: &InitialRuleChain,
    tagset: &Tagset,
    lexical_rules: &[LexicalRule],
) -> Vec<Vec<Tag>> {
    let mut unknown: HashMap<&str, Tag> = HashMap::new();
    for word in sentences.iter().flatten().map(AsRef::as_ref) {
        if !lexicon.contains(word) {
            unknown
                .entry(word)
                .or_insert_with(|| chain.tag_unknown(word, tagset));
        }
    }
    for rule in lexical_rules {
        for (word, tag) in unknown.iter_mut() {
            if rule.matches(word, *tag, lexicon) {
                *tag = rule.to;
            }
        }
    }
    sentences
        .iter()
        .map(|words| {
            words
                .iter()
                .map(|w| {
                    let w = w.as_ref();
                    unknown
                        .get(w)
                        .copied()
                        .unwrap_or_else(|| initial_tag(w, lexicon, chain, tagset))
                })
                .collect()
        })
        .collect()
}

pub(crate) fn contextual_stage<S: PartialEq<String> + Sync>(
    sentences: &[Vec<S>],
    tags: &mut [Vec<Tag>],
    rules: &[ContextualRule],
) {
    tags.par_iter_mut()
        .zip(sentences.par_iter())
        .for_each(|(tags, words)| {
            for rule in rules {
                rule.apply_to_sentence(words, tags);
            }
        });
}

/// Tags pre-tokenized sentences with `model`.
pub fn tag_corpus(raw: &[Sentence], model: &TaggerModel) -> TaggedCorpus {
    let words: Vec<Vec<&str>> = raw.iter().map(|s| s.words().collect()).collect();
    let mut tags = lexical_stage(
        &words,
        &model.lexicon,
        &model.initial_chain,
        &model.tagset,
        &model.lexical_rules,
    );
    contextual_stage(&words, &mut tags, &model.contextual_rules);
    let sentences = words
        .iter()
        .zip(tags)
        .map(|(words, tags)| {
            let tokens = words
                .iter()
                .zip(tags)
                .map(|(w, t)| Token::tagged(*w, t))
                .collect();
            Sentence::new(tokens).expect("non-empty input sentence")
        })
        .collect();
    TaggedCorpus::new(model.tagset.clone(), sentences).expect("tags come from the model tagset")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_raw_corpus, parse_tagged_corpus, serialize_tagged_corpus, Role};
    use crate::lexicon::build_lexicon;
    use crate::rules::{apply_contextual_rules, LexicalTemplate, SentenceState};

    fn tagset() -> Arc<Tagset> {
        Arc::new(
            Tagset::new(
                ["DET", "NN", "VB", "FW", "NP", "NF", "ADJ"],
                [
                    (Role::Foreign, "FW"),
                    (Role::ProperMascSg, "NP"),
                    (Role::NounFemSg, "NF"),
                ],
            )
            .unwrap(),
        )
    }

    fn model(lexical: Vec<LexicalRule>, contextual: Vec<ContextualRule>) -> TaggerModel {
        let ts = tagset();
        let train = parse_tagged_corpus(
            "the/DET run/VB\nthe/DET run/NN\nrun/VB fast/ADJ\nthe/DET dog/NN",
            ts.clone(),
        )
        .unwrap();
        TaggerModel::new(
            ts,
            build_lexicon(&train).unwrap(),
            InitialRuleChain::greek(),
            lexical,
            contextual,
        )
        .unwrap()
    }

    #[test]
    fn empty_input() {
        let out = tag_corpus(&[], &model(vec![], vec![]));
        assert!(out.is_empty());
    }

    #[test]
    fn baseline_uses_most_frequent_tag() {
        let m = model(vec![], vec![]);
        let out = tag_corpus(&parse_raw_corpus("the run\nrun dog Google Αθήνα σπίτι"), &m);
        assert_eq!(
            serialize_tagged_corpus(&out),
            "the/DET run/VB\nrun/VB dog/NN Google/FW Αθήνα/NP σπίτι/NF\n"
        );
    }

    #[test]
    fn pipeline_matches_manual_composition() {
        let ts = tagset();
        let t = |n: &str| ts.get(n).unwrap();
        let lexical = vec![
            LexicalRule::new(LexicalTemplate::HasSuf, "ing", None, t("VB"), 4).unwrap(),
            LexicalRule::new(LexicalTemplate::HasSuf, "ful", Some(t("FW")), t("ADJ"), 4).unwrap(),
        ];
        let contextual = vec![
            ContextualRule::new(Context::PrevTag(t("DET")), t("VB"), t("NN")).unwrap(),
            ContextualRule::new(Context::NextTag(t("NN")), t("NF"), t("ADJ")).unwrap(),
        ];
        let m = model(lexical.clone(), contextual.clone());
        let raw = parse_raw_corpus("the running dog\nrun joyful\nthe σπίτι dog");
        let out = tag_corpus(&raw, &m);

        // initial
        let mut state: Vec<SentenceState> = raw
            .iter()
            .map(|s| SentenceState {
                words: s.words().map(str::to_owned).collect(),
                tags: s
                    .words()
                    .map(|w| initial_tag(w, m.lexicon(), m.initial_chain(), &ts))
                    .collect(),
            })
            .collect();
        // lexical, per unknown type
        let mut types: HashMap<String, Tag> = HashMap::new();
        for s in &state {
            for (w, &tag) in s.words.iter().zip(&s.tags) {
                if !m.lexicon().contains(w) {
                    types.insert(w.clone(), tag);
                }
            }
        }
        crate::rules::apply_lexical_rules(&lexical, &mut types, m.lexicon());
        for s in &mut state {
            for (w, tag) in s.words.iter().zip(s.tags.iter_mut()) {
                if let Some(&t) = types.get(w) {
                    *tag = t;
                }
            }
        }
        apply_contextual_rules(&contextual, &mut state);

        let got: Vec<Vec<Tag>> = out
            .sentences()
            .iter()
            .map(|s| s.tokens().iter().map(|t| t.tag.unwrap()).collect())
            .collect();
        let want: Vec<Vec<Tag>> = state.into_iter().map(|s| s.tags).collect();
        assert_eq!(got, want);
        assert_eq!(
            serialize_tagged_corpus(&out),
            "the/DET running/NN dog/NN\nrun/VB joyful/ADJ\nthe/DET σπίτι/ADJ dog/NN\n"
        );
    }

    #[test]
    fn lexical_rules_skip_known_words() {
        let ts = tagset();
        let rule = LexicalRule::new(
            LexicalTemplate::HasSuf,
            "n",
            None,
            ts.get("ADJ").unwrap(),
            4,
        )
        .unwrap();
        let m = model(vec![rule], vec![]);
        let out = tag_corpus(&parse_raw_corpus("run plan"), &m);
        assert_eq!(serialize_tagged_corpus(&out), "run/VB plan/ADJ\n");
    }

    #[test]
    fn model_rejects_foreign_tags() {
        let ts = tagset();
        let other = Tagset::new(
            ["A", "B", "C", "D", "E", "F", "G", "H"],
            [
                (Role::Foreign, "A"),
                (Role::ProperMascSg, "A"),
                (Role::NounFemSg, "A"),
            ],
        )
        .unwrap();
        let h = other.get("H").unwrap();
        let rule = ContextualRule::new(
            Context::PrevTag(h),
            ts.get("NN").unwrap(),
            ts.get("VB").unwrap(),
        )
        .unwrap();
        assert!(TaggerModel::new(
            ts,
            Lexicon::default(),
            InitialRuleChain::greek(),
            vec![],
            vec![rule]
        )
        .is_err());
    }
}
