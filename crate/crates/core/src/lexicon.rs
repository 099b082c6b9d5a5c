//! Frequency lexicon and initial tag assignment.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use unicode_normalization::UnicodeNormalization;

use crate::corpus::{Role, Tag, TaggedCorpus, Tagset};
use crate::error::{Error, Result};

/// Word type to its training tags, most frequent first.
///
/// Equal counts are ordered by ascending tag name. Lookup is case-sensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashMap<String, Vec<(Tag, u64)>>,
}

fn order_entry(entry: &mut [(Tag, u64)]) {
    entry.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
}

fn entry_is_ordered(entry: &[(Tag, u64)]) -> bool {
    entry
        .windows(2)
        .all(|w| w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0))
}

impl Lexicon {
    /// Counts tag occurrences per word over any `(word, tag)` stream.
    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = (&'a str, Tag)>) -> Self {
        let mut counts: HashMap<&str, HashMap<Tag, u64>> = HashMap::new();
        for (word, tag) in tokens {
            *counts.entry(word).or_default().entry(tag).or_default() += 1;
        }
        let entries = counts
            .into_iter()
            .map(|(word, tags)| {
                let mut entry: Vec<(Tag, u64)> = tags.into_iter().collect();
                order_entry(&mut entry);
                (word.to_owned(), entry)
            })
            .collect();
        Lexicon { entries }
    }

    pub fn get(&self, word: &str) -> Option<&[(Tag, u64)]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn most_frequent(&self, word: &str) -> Option<Tag> {
        self.entries.get(word).map(|e| e[0].0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[(Tag, u64)])> {
        self.entries.iter().map(|(w, e)| (w.as_str(), e.as_slice()))
    }

    /// Sum of all counts.
    pub fn total_count(&self) -> u64 {
        self.entries.values().flatten().map(|&(_, c)| c).sum()
    }
}

/// Builds the lexicon of a training corpus.
pub fn build_lexicon(corpus: &TaggedCorpus) -> Result<Lexicon> {
    if corpus.is_empty() {
        return Err(Error::TooSmall(
            "cannot build a lexicon from an empty corpus".into(),
        ));
    }
    Ok(Lexicon::from_tokens(corpus.tokens()))
}

/// One line per word, words in byte order: `word tag1:count1 tag2:count2`.
pub fn serialize_lexicon(lexicon: &Lexicon, tagset: &Tagset) -> String {
    let mut words: Vec<&String> = lexicon.entries.keys().collect();
    words.sort();
    let mut out = String::new();
    for word in words {
        out.push_str(word);
        for &(tag, count) in &lexicon.entries[word] {
            let _ = write!(out, " {}:{count}", tagset.name(tag));
        }
        out.push('\n');
    }
    out
}

pub fn parse_lexicon(text: &str, tagset: &Tagset) -> Result<Lexicon> {
    let mut entries: HashMap<String, Vec<(Tag, u64)>> = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let mut entry: Vec<(Tag, u64)> = Vec::new();
        for (i, field) in fields.enumerate() {
            let column = i + 2;
            let (name, count) = field.rsplit_once(':').ok_or_else(|| {
                Error::parse(
                    line_no,
                    column,
                    format!("`{field}` is not of the form TAG:COUNT"),
                )
            })?;
            let tag = tagset.get(name).ok_or_else(|| Error::UnknownTag {
                tag: name.to_owned(),
                line: line_no,
            })?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(line_no, column, format!("invalid count `{count}`")))?;
            if count == 0 {
                return Err(Error::parse(line_no, column, "counts must be positive"));
            }
            if entry.iter().any(|&(t, _)| t == tag) {
                return Err(Error::parse(
                    line_no,
                    column,
                    format!("tag `{name}` repeated"),
                ));
            }
            entry.push((tag, count));
        }
        if entry.is_empty() {
            return Err(Error::parse(
                line_no,
                1,
                format!("word `{word}` has no tags"),
            ));
        }
        if !entry_is_ordered(&entry) {
            return Err(Error::parse(
                line_no,
                2,
                "tags must be ordered by descending count, then tag name",
            ));
        }
        let word: String = word.nfc().collect();
        if entries.insert(word.clone(), entry).is_some() {
            return Err(Error::parse(line_no, 1, format!("duplicate word `{word}`")));
        }
    }
    Ok(Lexicon { entries })
}

/// Which kind of character a word starts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScriptClass {
    /// Basic Latin letter, `A`–`Z` or `a`–`z`.
    LatinStart,
    /// Uppercase Greek letter, accented and dialytika capitals included.
    GreekCapitalStart,
    Other,
}

fn is_greek_capital(c: char) -> bool {
    // U+03A2 is unassigned inside the Α..Ω block.
    matches!(c, '\u{391}'..='\u{3A1}' | '\u{3A3}'..='\u{3A9}')
        || matches!(c, 'Ά' | 'Έ' | 'Ή' | 'Ί' | 'Ό' | 'Ύ' | 'Ώ' | 'Ϊ' | 'Ϋ')
}

fn first_char(word: &str) -> Option<char> {
    // NFC first so that a decomposed capital with accent still counts.
    word.nfc().next()
}

pub fn classify_script(word: &str) -> Result<ScriptClass> {
    let c =
        first_char(word).ok_or_else(|| Error::Config("cannot classify an empty word".into()))?;
    Ok(if c.is_ascii_alphabetic() {
        ScriptClass::LatinStart
    } else if is_greek_capital(c) {
        ScriptClass::GreekCapitalStart
    } else {
        ScriptClass::Other
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    StartsLatin,
    StartsGreekCapital,
    Always,
}

impl Predicate {
    pub fn keyword(self) -> &'static str {
        match self {
            Predicate::StartsLatin => "STARTS_LATIN",
            Predicate::StartsGreekCapital => "STARTS_GREEK_CAPITAL",
            Predicate::Always => "ALWAYS",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [
            Predicate::StartsLatin,
            Predicate::StartsGreekCapital,
            Predicate::Always,
        ]
        .into_iter()
        .find(|p| p.keyword() == s)
    }

    fn holds(self, word: &str) -> bool {
        match self {
            Predicate::Always => true,
            Predicate::StartsLatin => {
                matches!(classify_script(word), Ok(ScriptClass::LatinStart))
            }
            Predicate::StartsGreekCapital => {
                matches!(classify_script(word), Ok(ScriptClass::GreekCapitalStart))
            }
        }
    }
}

/// Default tagging rule for words missing from the lexicon: the first
/// branch whose predicate holds picks the role tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialRuleChain {
    branches: Vec<(Predicate, Role)>,
}

impl InitialRuleChain {
    pub fn new(branches: Vec<(Predicate, Role)>) -> Result<Self> {
        match branches.last() {
            Some((Predicate::Always, _)) => Ok(InitialRuleChain { branches }),
            _ => Err(Error::Config(
                "the last initial-rule branch must be ALWAYS".into(),
            )),
        }
    }

    /// Foreign words, then Greek capitals as proper nouns, then feminine
    /// nouns.
    pub fn greek() -> Self {
        InitialRuleChain {
            branches: vec![
                (Predicate::StartsLatin, Role::Foreign),
                (Predicate::StartsGreekCapital, Role::ProperMascSg),
                (Predicate::Always, Role::NounFemSg),
            ],
        }
    }

    pub fn branches(&self) -> &[(Predicate, Role)] {
        &self.branches
    }

    pub fn tag_unknown(&self, word: &str, tagset: &Tagset) -> Tag {
        let role = self
            .branches
            .iter()
            .find(|(p, _)| p.holds(word))
            .map(|&(_, r)| r)
            .expect("chain ends with ALWAYS");
        tagset.role(role)
    }

    /// Parses the space-separated `PREDICATE:ROLE` form written by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let branches = text
            .split_whitespace()
            .map(|item| {
                let (p, r) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("bad initial-rule branch `{item}`")))?;
                let p = Predicate::from_keyword(p)
                    .ok_or_else(|| Error::Config(format!("unknown predicate `{p}`")))?;
                let r = Role::from_key(r)
                    .ok_or_else(|| Error::Config(format!("unknown role `{r}`")))?;
                Ok((p, r))
            })
            .collect::<Result<Vec<_>>>()?;
        InitialRuleChain::new(branches)
    }
}

impl Default for InitialRuleChain {
    fn default() -> Self {
        InitialRuleChain::greek()
    }
}

impl fmt::Display for InitialRuleChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, r)) in self.branches.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}:{}", p.keyword(), r.key())?;
        }
        Ok(())
    }
}

/// Most frequent lexicon tag for known words, the initial rule chain otherwise.
pub fn initial_tag(
    word: &str,
    lexicon: &Lexicon,
    chain: &InitialRuleChain,
    tagset: &Tagset,
) -> Tag {
    lexicon
        .most_frequent(word)
        .unwrap_or_else(|| chain.tag_unknown(word, tagset))
}
