#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use proptest::sample::select;

use tbed::corpus::{Role, Sentence, Tag, TaggedCorpus, Tagset, Token};
use tbed::lexicon::Lexicon;
use tbed::rules::{Context, ContextualRule, LexicalRule, LexicalTemplate};

/// Precomposed characters only, so every generated word is already NFC.
const CHARS: &[char] = &[
    'a', 'b', 'e', 'k', 'o', 'Q', 'Z', 'é', 'α', 'β', 'ε', 'ι', 'ο', 'ς', 'ά', 'ή', 'ώ', 'Α', 'Σ',
    'Ά', 'Ϊ', '1', '/', ':', '#', '-', '.', '«',
];

pub fn word() -> impl Strategy<Value = String> {
    prop::collection::vec(select(CHARS), 1..6).prop_map(|cs| cs.into_iter().collect())
}

pub fn affix(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(select(CHARS), 1..=max).prop_map(|cs| cs.into_iter().collect())
}

pub const TAG_POOL: &[&str] = &["ADJ", "DET", "FW", "NF", "NN", "NP", "VB", "X_1", "ΟΥΣ"];

pub fn tagset() -> impl Strategy<Value = Arc<Tagset>> {
    prop::sample::subsequence(TAG_POOL, 1..=TAG_POOL.len())
        .prop_flat_map(|names| {
            let n = names.len();
            (Just(names), 0..n, 0..n, 0..n)
        })
        .prop_map(|(names, f, p, n)| {
            Arc::new(
                Tagset::new(
                    names.iter().copied(),
                    [
                        (Role::Foreign, names[f]),
                        (Role::ProperMascSg, names[p]),
                        (Role::NounFemSg, names[n]),
                    ],
                )
                .expect("valid tagset"),
            )
        })
}

pub fn tag_of(tagset: &Tagset) -> impl Strategy<Value = Tag> {
    select(tagset.tags().collect::<Vec<_>>())
}

pub fn corpus_in(tagset: Arc<Tagset>, max_sentences: usize) -> impl Strategy<Value = TaggedCorpus> {
    let token = (word(), tag_of(&tagset)).prop_map(|(w, t)| Token::tagged(w, t));
    let sentence = prop::collection::vec(token, 1..8).prop_map(|ts| Sentence::new(ts).unwrap());
    prop::collection::vec(sentence, 0..=max_sentences)
        .prop_map(move |ss| TaggedCorpus::new(tagset.clone(), ss).unwrap())
}

pub fn corpus(max_sentences: usize) -> impl Strategy<Value = TaggedCorpus> {
    tagset().prop_flat_map(move |ts| corpus_in(ts, max_sentences))
}

pub fn lexicon_in(tagset: &Tagset) -> impl Strategy<Value = Lexicon> {
    let entry = (word(), tag_of(tagset), 1..5u64);
    prop::collection::vec(entry, 0..30).prop_map(|entries| {
        let tokens: Vec<(String, Tag)> = entries
            .into_iter()
            .flat_map(|(w, t, n)| std::iter::repeat_n((w, t), n as usize))
            .collect();
        Lexicon::from_tokens(tokens.iter().map(|(w, t)| (w.as_str(), *t)))
    })
}

pub fn lexical_rule_in(
    tagset: &Tagset,
    max_affix_len: usize,
) -> impl Strategy<Value = LexicalRule> {
    (
        select(LexicalTemplate::ALL.to_vec()),
        affix(max_affix_len),
        prop::option::of(tag_of(tagset)),
        tag_of(tagset),
    )
        .prop_filter("from differs from to", |(_, _, from, to)| {
            *from != Some(*to)
        })
        .prop_map(move |(template, arg, from, to)| {
            let arg = if template == LexicalTemplate::HasChar {
                arg.chars().take(1).collect()
            } else {
                arg
            };
            LexicalRule::new(template, arg, from, to, max_affix_len).unwrap()
        })
}

pub fn context_in(tagset: &Tagset) -> impl Strategy<Value = Context> {
    let t = || tag_of(tagset);
    prop_oneof![
        t().prop_map(Context::PrevTag),
        t().prop_map(Context::NextTag),
        t().prop_map(Context::Prev2Tag),
        t().prop_map(Context::Next2Tag),
        t().prop_map(Context::Prev1Or2Tag),
        t().prop_map(Context::Next1Or2Tag),
        t().prop_map(Context::Prev1Or2Or3Tag),
        t().prop_map(Context::Next1Or2Or3Tag),
        word().prop_map(Context::PrevWd),
        word().prop_map(Context::NextWd),
        (t(), t()).prop_map(|(a, b)| Context::SurroundTag(a, b)),
        (t(), t()).prop_map(|(a, b)| Context::PrevBigram(a, b)),
        (t(), t()).prop_map(|(a, b)| Context::NextBigram(a, b)),
    ]
}

/// Needs a tagset with at least two tags.
pub fn contextual_rule_in(tagset: &Tagset) -> impl Strategy<Value = ContextualRule> {
    (context_in(tagset), tag_of(tagset), tag_of(tagset))
        .prop_filter("from differs from to", |(_, f, t)| f != t)
        .prop_map(|(c, f, t)| ContextualRule::new(c, f, t).unwrap())
}
