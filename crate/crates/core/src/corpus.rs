//! Tokens, sentences, tagged corpora and the tagset configuration.
//!
//! Corpora are line oriented: one sentence per line, tokens separated by
//! whitespace. A tagged token is written `word/TAG`, where the tag is whatever
//! follows the *last* slash, so words may themselves contain slashes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unicode_normalization::{is_nfc, UnicodeNormalization};

use crate::error::{Error, Result};

/// A tag, represented as an index into its [`Tagset`].
///
/// Indices are assigned in ascending order of tag name, so comparing two tags
/// of the same tagset compares their names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(u16);

impl Tag {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The tags the default initial rule needs, bound to concrete tag names by
/// the tagset configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Foreign,
    ProperMascSg,
    NounFemSg,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Foreign, Role::ProperMascSg, Role::NounFemSg];

    pub fn key(self) -> &'static str {
        match self {
            Role::Foreign => "FOREIGN",
            Role::ProperMascSg => "PROPER_MASC_SG",
            Role::NounFemSg => "NOUN_FEM_SG",
        }
    }

    pub fn from_key(key: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.key() == key)
    }
}

/// Checks that `name` can be used as a tag name.
///
/// `-` is reserved: rule files use it for "no tag condition".
pub fn validate_tag_name(name: &str) -> std::result::Result<(), String> {
    if name.is_empty() {
        return Err("empty tag name".into());
    }
    if name.chars().any(char::is_whitespace) {
        return Err(format!("tag `{name}` contains whitespace"));
    }
    if name.contains('/') {
        return Err(format!("tag `{name}` contains '/'"));
    }
    if name == "-" {
        return Err("`-` is reserved and cannot be a tag name".into());
    }
    Ok(())
}

/// The tag inventory plus the role bindings used by the initial tagger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tagset {
    names: Vec<String>,
    index: HashMap<String, Tag>,
    roles: [Tag; 3],
}

impl Tagset {
    /// Builds a tagset from tag names and the three role bindings.
    pub fn new<I, S>(names: I, roles: [(Role, &str); 3]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        for name in &names {
            validate_tag_name(name).map_err(Error::Tagset)?;
        }
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Tagset(format!("duplicate tag `{}`", w[0])));
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::Tagset("too many tags".into()));
        }
        let index: HashMap<String, Tag> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), Tag(i as u16)))
            .collect();

        let mut bound: [Option<Tag>; 3] = [None; 3];
        for (role, name) in roles {
            let tag = *index.get(name).ok_or_else(|| {
                Error::Tagset(format!(
                    "role {} bound to undeclared tag `{name}`",
                    role.key()
                ))
            })?;
            if bound[role as usize].replace(tag).is_some() {
                return Err(Error::Tagset(format!("role {} bound twice", role.key())));
            }
        }
        let mut out = [Tag(0); 3];
        for role in Role::ALL {
            out[role as usize] = bound[role as usize]
                .ok_or_else(|| Error::Tagset(format!("missing role {}", role.key())))?;
        }
        Ok(Tagset {
            names,
            index,
            roles: out,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<Tag> {
        self.index.get(name).copied()
    }

    pub fn name(&self, tag: Tag) -> &str {
        &self.names[tag.index()]
    }

    pub fn contains(&self, tag: Tag) -> bool {
        tag.index() < self.names.len()
    }

    pub fn role(&self, role: Role) -> Tag {
        self.roles[role as usize]
    }

    /// All tags in ascending name order.
    pub fn tags(&self) -> impl Iterator<Item = Tag> + '_ {
        (0..self.names.len()).map(|i| Tag(i as u16))
    }

    /// Renders the tagset in the configuration format read by [`load_tagset`].
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            let _ = writeln!(out, "tag {name}");
        }
        for role in Role::ALL {
            let _ = writeln!(out, "role {} {}", role.key(), self.name(self.role(role)));
        }
        out
    }
}

/// Parses a tagset configuration.
///
/// ```text
/// # comment
/// tag NN
/// role NOUN_FEM_SG NN
/// ```
pub fn load_tagset(text: &str) -> Result<Tagset> {
    let mut names: Vec<String> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut roles: Vec<(Role, String, usize)> = Vec::new();

    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields.as_slice() {
            ["tag", name] => {
                validate_tag_name(name).map_err(|m| Error::parse(line_no, 5, m))?;
                if let Some(prev) = seen.insert(name.to_string(), line_no) {
                    return Err(Error::Tagset(format!(
                        "duplicate tag `{name}` on lines {prev} and {line_no}"
                    )));
                }
                names.push(name.to_string());
            }
            ["role", key, name] => {
                let role = Role::from_key(key).ok_or_else(|| {
                    Error::parse(line_no, 6, format!("unknown role key `{key}`"))
                })?;
                if roles.iter().any(|(r, _, _)| *r == role) {
                    return Err(Error::Tagset(format!(
                        "role {key} bound twice (line {line_no})"
                    )));
                }
                roles.push((role, name.to_string(), line_no));
            }
            [directive, ..] => {
                return Err(Error::parse(
                    line_no,
                    1,
                    format!("expected `tag <NAME>` or `role <ROLEKEY> <NAME>`, found `{directive}` line with {} fields", fields.len()),
                ))
            }
            [] => unreachable!(),
        }
    }

    for (role, name, line_no) in &roles {
        if !seen.contains_key(name) {
            return Err(Error::Tagset(format!(
                "line {line_no}: role {} bound to undeclared tag `{name}`",
                role.key()
            )));
        }
    }
    for role in Role::ALL {
        if !roles.iter().any(|(r, _, _)| *r == role) {
            return Err(Error::Tagset(format!("missing role {}", role.key())));
        }
    }
    let bind = |role: Role| {
        roles
            .iter()
            .find(|(r, _, _)| *r == role)
            .map(|(_, n, _)| n.as_str())
            .unwrap_or_default()
    };
    Tagset::new(
        names,
        [
            (Role::Foreign, bind(Role::Foreign)),
            (Role::ProperMascSg, bind(Role::ProperMascSg)),
            (Role::NounFemSg, bind(Role::NounFemSg)),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub word: String,
    pub tag: Option<Tag>,
}

impl Token {
    pub fn tagged(word: impl Into<String>, tag: Tag) -> Self {
        Token {
            word: word.into(),
            tag: Some(tag),
        }
    }

    pub fn untagged(word: impl Into<String>) -> Self {
        Token {
            word: word.into(),
            tag: None,
        }
    }
}

/// A non-empty sequence of tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Config("a sentence needs at least one token".into()));
        }
        if let Some(t) = tokens.iter().find(|t| t.word.is_empty()) {
            return Err(Error::Config(format!("empty word in sentence ({t:?})")));
        }
        Ok(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.word.as_str())
    }

    /// The same words with every tag removed.
    pub fn untagged(&self) -> Sentence {
        Sentence {
            tokens: self
                .tokens
                .iter()
                .map(|t| Token::untagged(t.word.clone()))
                .collect(),
        }
    }
}

/// Sentences whose every token carries a tag from `tagset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCorpus {
    sentences: Vec<Sentence>,
    tagset: Arc<Tagset>,
    words: usize,
}

impl TaggedCorpus {
    pub fn new(tagset: Arc<Tagset>, sentences: Vec<Sentence>) -> Result<Self> {
        for (s, sentence) in sentences.iter().enumerate() {
            for (i, token) in sentence.tokens.iter().enumerate() {
                match token.tag {
                    Some(tag) if tagset.contains(tag) => {}
                    Some(tag) => {
                        return Err(Error::Config(format!(
                            "sentence {s}, token {i}: tag index {} outside tagset",
                            tag.index()
                        )))
                    }
                    None => {
                        return Err(Error::Config(format!(
                            "sentence {s}, token {i}: `{}` has no tag",
                            token.word
                        )))
                    }
                }
            }
        }
        let words = sentences.iter().map(Sentence::len).sum();
        Ok(TaggedCorpus {
            sentences,
            tagset,
            words,
        })
    }

    pub fn empty(tagset: Arc<Tagset>) -> Self {
        TaggedCorpus {
            sentences: Vec::new(),
            tagset,
            words: 0,
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn tagset(&self) -> &Arc<Tagset> {
        &self.tagset
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn word_count(&self) -> usize {
        self.words
    }

    /// `(word, tag)` pairs of one sentence.
    pub fn tagged_tokens(sentence: &Sentence) -> impl Iterator<Item = (&str, Tag)> {
        sentence
            .tokens
            .iter()
            .map(|t| (t.word.as_str(), t.tag.expect("tagged corpus token")))
    }

    /// Iterates over every `(word, tag)` pair in corpus order.
    pub fn tokens(&self) -> impl Iterator<Item = (&str, Tag)> {
        self.sentences.iter().flat_map(Self::tagged_tokens)
    }

    /// A corpus made of the sentences at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> TaggedCorpus {
        let sentences: Vec<Sentence> = indices.iter().map(|&i| self.sentences[i].clone()).collect();
        let words = sentences.iter().map(Sentence::len).sum();
        TaggedCorpus {
            sentences,
            tagset: self.tagset.clone(),
            words,
        }
    }

    /// The sentences with tags removed.
    pub fn untagged(&self) -> Vec<Sentence> {
        self.sentences.iter().map(Sentence::untagged).collect()
    }
}

fn normalize(word: &str) -> String {
    if is_nfc(word) {
        word.to_owned()
    } else {
        word.nfc().collect()
    }
}

/// Splits a line into whitespace-separated items with their 1-based
/// character column.
fn items(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut column = 0usize;
    let mut rest = line;
    std::iter::from_fn(move || {
        let skipped = rest.len() - rest.trim_start().len();
        column += rest[..skipped].chars().count();
        rest = &rest[skipped..];
        if rest.is_empty() {
            return None;
        }
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let item = &rest[..end];
        let start = column + 1;
        column += item.chars().count();
        rest = &rest[end..];
        Some((start, item))
    })
}

/// Parses a `word/TAG` corpus, one sentence per non-blank line.
pub fn parse_tagged_corpus(text: &str, tagset: Arc<Tagset>) -> Result<TaggedCorpus> {
    let mut sentences = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let mut tokens = Vec::new();
        for (column, item) in items(line) {
            let slash = item.rfind('/').ok_or_else(|| {
                Error::parse(
                    line_no,
                    column,
                    format!("`{item}` is not of the form word/TAG"),
                )
            })?;
            let (word, tag) = (&item[..slash], &item[slash + 1..]);
            if word.is_empty() {
                return Err(Error::parse(
                    line_no,
                    column,
                    format!("empty word in `{item}`"),
                ));
            }
            if tag.is_empty() {
                return Err(Error::parse(
                    line_no,
                    column,
                    format!("empty tag in `{item}`"),
                ));
            }
            let tag = tagset.get(tag).ok_or_else(|| Error::UnknownTag {
                tag: tag.to_owned(),
                line: line_no,
            })?;
            tokens.push(Token::tagged(normalize(word), tag));
        }
        if !tokens.is_empty() {
            sentences.push(Sentence { tokens });
        }
    }
    let words = sentences.iter().map(Sentence::len).sum();
    Ok(TaggedCorpus {
        sentences,
        tagset,
        words,
    })
}

/// Writes one line per sentence, each terminated by `\n`.
pub fn serialize_tagged_corpus(corpus: &TaggedCorpus) -> String {
    serialize_sentences(corpus.sentences(), &corpus.tagset)
}

pub(crate) fn serialize_sentences(sentences: &[Sentence], tagset: &Tagset) -> String {
    let mut out = String::new();
    for sentence in sentences {
        for (i, (word, tag)) in TaggedCorpus::tagged_tokens(sentence).enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(word);
            out.push('/');
            out.push_str(tagset.name(tag));
        }
        out.push('\n');
    }
    out
}

/// Parses pre-tokenized text: one sentence per non-blank line, words split
/// on whitespace.
pub fn parse_raw_corpus(text: &str) -> Vec<Sentence> {
    text.lines()
        .filter_map(|line| {
            let tokens: Vec<Token> = line
                .split_whitespace()
                .map(|w| Token::untagged(normalize(w)))
                .collect();
            (!tokens.is_empty()).then_some(Sentence { tokens })
        })
        .collect()
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Returns a seeded permutation of `0..n`.
pub(crate) fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng(seed));
    indices
}

/// Reorders sentences by a seeded Fisher–Yates shuffle.
pub fn shuffle_sentences(corpus: &TaggedCorpus, seed: u64) -> TaggedCorpus {
    corpus.select(&shuffled_indices(corpus.len(), seed))
}

/// Assignment of sentence indices to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    /// Shuffles `0..n` with `seed` and deals the indices round-robin.
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {k}")));
        }
        if n < k {
            return Err(Error::TooSmall(format!(
                "{n} sentences cannot be split into {k} folds"
            )));
        }
        let mut assignments = vec![0; n];
        for (position, index) in shuffled_indices(n, seed).into_iter().enumerate() {
            assignments[index] = position % k;
        }
        Ok(FoldPlan { k, assignments })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn fold_of(&self, sentence: usize) -> usize {
        self.assignments[sentence]
    }

    /// Held-out sentence indices of `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Training sentence indices for `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

pub fn kfold_split(corpus: &TaggedCorpus, k: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::new(corpus.len(), k, seed)
}

/// Longest sentence prefix with at most `n_words` words; the first sentence
/// is always kept whole.
pub fn truncate_to_words(corpus: &TaggedCorpus, n_words: usize) -> TaggedCorpus {
    let mut total = 0;
    let mut keep = 0;
    for sentence in corpus.sentences() {
        if keep > 0 && total + sentence.len() > n_words {
            break;
        }
        total += sentence.len();
        keep += 1;
        if total >= n_words {
            break;
        }
    }
    corpus.select(&(0..keep).collect::<Vec<_>>())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn toy_tagset() -> Arc<Tagset> {
        Arc::new(
            Tagset::new(
                ["AT", "NN", "PUNCT", "FW", "NP"],
                [
                    (Role::Foreign, "FW"),
                    (Role::ProperMascSg, "NP"),
                    (Role::NounFemSg, "NN"),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn parses_greek_line() {
        let ts = toy_tagset();
        let c = parse_tagged_corpus("ο/AT άνθρωπος/NN ./PUNCT", ts.clone()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.word_count(), 3);
        let tags: Vec<&str> = c.tokens().map(|(_, t)| ts.name(t)).collect();
        assert_eq!(tags, ["AT", "NN", "PUNCT"]);
    }

    #[test]
    fn tag_is_after_last_slash() {
        let c = parse_tagged_corpus("a/b/NN", toy_tagset()).unwrap();
        let (w, t) = c.tokens().next().unwrap();
        assert_eq!(w, "a/b");
        assert_eq!(c.tagset().name(t), "NN");
    }

    #[test]
    fn malformed_items() {
        let ts = toy_tagset();
        assert!(matches!(
            parse_tagged_corpus("word", ts.clone()),
            Err(Error::Parse {
                line: 1,
                column: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_tagged_corpus("\nok/NN  /NN", ts.clone()),
            Err(Error::Parse {
                line: 2,
                column: 8,
                ..
            })
        ));
        assert!(matches!(
            parse_tagged_corpus("x/", ts.clone()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert_eq!(
            parse_tagged_corpus("x/NN\ny/VB", ts),
            Err(Error::UnknownTag {
                tag: "VB".into(),
                line: 2
            })
        );
    }

    #[test]
    fn blank_lines_are_skipped() {
        let c = parse_tagged_corpus("\n  \nx/NN\n\n", toy_tagset()).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn words_are_nfc_normalized() {
        // alpha + combining acute accent
        let c = parse_tagged_corpus("\u{3b1}\u{301}/NN", toy_tagset()).unwrap();
        assert_eq!(c.tokens().next().unwrap().0, "\u{3ac}");
    }

    #[test]
    fn serialize_examples() {
        let ts = toy_tagset();
        assert_eq!(
            serialize_tagged_corpus(&TaggedCorpus::empty(ts.clone())),
            ""
        );
        let nn = ts.get("NN").unwrap();
        let at = ts.get("AT").unwrap();
        let s = Sentence::new(vec![Token::tagged("ο", at), Token::tagged("γάτα", nn)]).unwrap();
        let c = TaggedCorpus::new(ts, vec![s]).unwrap();
        assert_eq!(serialize_tagged_corpus(&c), "ο/AT γάτα/NN\n");
    }

    #[test]
    fn raw_corpus() {
        let s = parse_raw_corpus("Η Microsoft ανακοίνωσε");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].len(), 3);
        assert!(s[0].tokens().iter().all(|t| t.tag.is_none()));
        assert!(parse_raw_corpus("").is_empty());
        let two = parse_raw_corpus("a b\n\nc\n");
        assert_eq!(two.len(), 2);
        assert_eq!(two[1].words().collect::<Vec<_>>(), ["c"]);
    }

    #[test]
    fn tagset_config() {
        let ts = load_tagset(
            "# three tags\ntag A\ntag B\ntag C\nrole FOREIGN A\nrole PROPER_MASC_SG B\nrole NOUN_FEM_SG C\n",
        )
        .unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.name(ts.role(Role::ProperMascSg)), "B");
        assert_eq!(load_tagset(&ts.to_config()).unwrap(), ts);

        let missing = load_tagset("tag A\nrole PROPER_MASC_SG A\nrole NOUN_FEM_SG A\n");
        assert!(matches!(missing, Err(Error::Tagset(m)) if m.contains("FOREIGN")));

        let unbound =
            load_tagset("tag A\nrole FOREIGN A\nrole PROPER_MASC_SG A\nrole NOUN_FEM_SG NnFeSg\n");
        assert!(matches!(unbound, Err(Error::Tagset(m)) if m.contains("NnFeSg")));

        let dup = load_tagset("tag A\ntag A\n");
        assert!(matches!(dup, Err(Error::Tagset(m)) if m.contains("duplicate")));

        assert!(matches!(load_tagset("tag a/b"), Err(Error::Parse { .. })));
        assert!(matches!(load_tagset("tag -"), Err(Error::Parse { .. })));
        assert!(matches!(load_tagset("label X"), Err(Error::Parse { .. })));
        assert!(matches!(
            load_tagset("tag A\nrole SOMETHING A"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn tag_order_follows_names() {
        let ts = toy_tagset();
        let names: Vec<&str> = ts.tags().map(|t| ts.name(t)).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert!(ts.get("AT").unwrap() < ts.get("NN").unwrap());
    }

    fn corpus_of_lengths(lengths: &[usize]) -> TaggedCorpus {
        let ts = toy_tagset();
        let nn = ts.get("NN").unwrap();
        let sentences = lengths
            .iter()
            .enumerate()
            .map(|(s, &n)| {
                Sentence::new(
                    (0..n)
                        .map(|i| Token::tagged(format!("w{s}_{i}"), nn))
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        TaggedCorpus::new(ts, sentences).unwrap()
    }

    #[test]
    fn shuffle_is_deterministic() {
        let c = corpus_of_lengths(&[1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(shuffle_sentences(&c, 9), shuffle_sentences(&c, 9));
        let empty = TaggedCorpus::empty(toy_tagset());
        assert!(shuffle_sentences(&empty, 3).is_empty());
    }

    #[test]
    fn fold_sizes() {
        let plan = kfold_split(&corpus_of_lengths(&[1; 20]), 10, 0).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 10]);
        let plan = kfold_split(&corpus_of_lengths(&[1; 21]), 10, 0).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort();
        assert_eq!(sizes, [2, 2, 2, 2, 2, 2, 2, 2, 2, 3]);
        assert!(matches!(
            kfold_split(&corpus_of_lengths(&[1; 3]), 4, 0),
            Err(Error::TooSmall(_))
        ));
        assert!(matches!(
            kfold_split(&corpus_of_lengths(&[1; 3]), 1, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn truncation() {
        let c = corpus_of_lengths(&[5, 5, 5]);
        assert_eq!(truncate_to_words(&c, 10).len(), 2);
        assert_eq!(truncate_to_words(&c, 12).len(), 2);
        assert_eq!(truncate_to_words(&c, 15), c);
        assert_eq!(truncate_to_words(&c, 100), c);
        let one = truncate_to_words(&c, 1);
        assert_eq!(one.len(), 1);
        assert_eq!(one.word_count(), 5);
    }

    #[test]
    fn item_columns_count_characters() {
        let cols: Vec<(usize, &str)> = items("  αβ  γ/X").collect();
        assert_eq!(cols, [(3, "αβ"), (7, "γ/X")]);
    }
}
