//! Lexical and contextual transformation rules.
//!
//! Lexical rules look only at the form of a word (its affixes, characters,
//! and whether an edited form is a known word) and retag word types.
//! Contextual rules look at the tags and words around one token and retag
//! that token. Both kinds are applied as ordered lists.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use unicode_normalization::UnicodeNormalization;

use crate::corpus::{Tag, Tagset};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

pub const DEFAULT_MAX_AFFIX_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LexicalTemplate {
    HasSuf,
    HasPref,
    DeleteSuf,
    DeletePref,
    AddSuf,
    AddPref,
    HasChar,
}

impl LexicalTemplate {
    pub const ALL: [LexicalTemplate; 7] = [
        LexicalTemplate::HasSuf,
        LexicalTemplate::HasPref,
        LexicalTemplate::DeleteSuf,
        LexicalTemplate::DeletePref,
        LexicalTemplate::AddSuf,
        LexicalTemplate::AddPref,
        LexicalTemplate::HasChar,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            LexicalTemplate::HasSuf => "HASSUF",
            LexicalTemplate::HasPref => "HASPREF",
            LexicalTemplate::DeleteSuf => "DELETESUF",
            LexicalTemplate::DeletePref => "DELETEPREF",
            LexicalTemplate::AddSuf => "ADDSUF",
            LexicalTemplate::AddPref => "ADDPREF",
            LexicalTemplate::HasChar => "HASCHAR",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.keyword() == s)
    }
}

/// A rule retagging word types by their form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexicalRule {
    pub template: LexicalTemplate,
    pub arg: String,
    /// Required current tag; `None` fires on any tag.
    pub from: Option<Tag>,
    pub to: Tag,
}

impl LexicalRule {
    pub fn new(
        template: LexicalTemplate,
        arg: impl Into<String>,
        from: Option<Tag>,
        to: Tag,
        max_affix_len: usize,
    ) -> Result<Self> {
        let rule = LexicalRule {
            template,
            arg: arg.into(),
            from,
            to,
        };
        rule.validate(max_affix_len)?;
        Ok(rule)
    }

    pub fn validate(&self, max_affix_len: usize) -> Result<()> {
        let len = self.arg.chars().count();
        if self.arg.chars().any(char::is_whitespace) {
            return Err(Error::Config(format!(
                "rule argument `{}` contains whitespace",
                self.arg
            )));
        }
        if self.template == LexicalTemplate::HasChar {
            if len != 1 {
                return Err(Error::Config(format!(
                    "HASCHAR takes exactly one character, got `{}`",
                    self.arg
                )));
            }
        } else if len == 0 || len > max_affix_len {
            return Err(Error::Config(format!(
                "affix `{}` must have 1 to {max_affix_len} characters",
                self.arg
            )));
        }
        if self.from == Some(self.to) {
            return Err(Error::Config("rule would not change the tag".into()));
        }
        Ok(())
    }

    /// The morphological condition alone, ignoring the current tag.
    pub fn form_matches(&self, word: &str, lexicon: &Lexicon) -> bool {
        let arg = self.arg.as_str();
        match self.template {
            LexicalTemplate::HasSuf => word.ends_with(arg),
            LexicalTemplate::HasPref => word.starts_with(arg),
            LexicalTemplate::DeleteSuf => word
                .strip_suffix(arg)
                .is_some_and(|rest| !rest.is_empty() && lexicon.contains(rest)),
            LexicalTemplate::DeletePref => word
                .strip_prefix(arg)
                .is_some_and(|rest| !rest.is_empty() && lexicon.contains(rest)),
            LexicalTemplate::AddSuf => lexicon.contains(&format!("{word}{arg}")),
            LexicalTemplate::AddPref => lexicon.contains(&format!("{arg}{word}")),
            LexicalTemplate::HasChar => word.contains(arg),
        }
    }

    pub fn matches(&self, word: &str, current: Tag, lexicon: &Lexicon) -> bool {
        self.from.is_none_or(|f| f == current) && self.form_matches(word, lexicon)
    }

    /// Selection order among equally scored rules: template keyword, then
    /// argument, then condition tag (none first), then target tag.
    pub fn tie_break_cmp(&self, other: &Self) -> Ordering {
        self.template
            .keyword()
            .cmp(other.template.keyword())
            .then_with(|| self.arg.cmp(&other.arg))
            .then_with(|| self.from.cmp(&other.from))
            .then_with(|| self.to.cmp(&other.to))
    }

    pub fn to_line(&self, tagset: &Tagset) -> String {
        format!(
            "LEX {} {} {} {}",
            self.template.keyword(),
            self.arg,
            self.from.map_or("-", |t| tagset.name(t)),
            tagset.name(self.to)
        )
    }
}

/// Checks a lexical rule against a word.
pub fn lexical_rule_matches(
    rule: &LexicalRule,
    word: &str,
    current: Tag,
    lexicon: &Lexicon,
) -> bool {
    rule.matches(word, current, lexicon)
}

/// Applies lexical rules in order to word-type assignments.
pub fn apply_lexical_rules(
    rules: &[LexicalRule],
    assignments: &mut HashMap<String, Tag>,
    lexicon: &Lexicon,
) {
    for rule in rules {
        for (word, tag) in assignments.iter_mut() {
            if rule.matches(word, *tag, lexicon) {
                *tag = rule.to;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextTemplate {
    PrevTag,
    NextTag,
    Prev2Tag,
    Next2Tag,
    Prev1Or2Tag,
    Next1Or2Tag,
    Prev1Or2Or3Tag,
    Next1Or2Or3Tag,
    PrevWd,
    NextWd,
    SurroundTag,
    PrevBigram,
    NextBigram,
}

impl ContextTemplate {
    pub const ALL: [ContextTemplate; 13] = [
        ContextTemplate::PrevTag,
        ContextTemplate::NextTag,
        ContextTemplate::Prev2Tag,
        ContextTemplate::Next2Tag,
        ContextTemplate::Prev1Or2Tag,
        ContextTemplate::Next1Or2Tag,
        ContextTemplate::Prev1Or2Or3Tag,
        ContextTemplate::Next1Or2Or3Tag,
        ContextTemplate::PrevWd,
        ContextTemplate::NextWd,
        ContextTemplate::SurroundTag,
        ContextTemplate::PrevBigram,
        ContextTemplate::NextBigram,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ContextTemplate::PrevTag => "PREVTAG",
            ContextTemplate::NextTag => "NEXTTAG",
            ContextTemplate::Prev2Tag => "PREV2TAG",
            ContextTemplate::Next2Tag => "NEXT2TAG",
            ContextTemplate::Prev1Or2Tag => "PREV1OR2TAG",
            ContextTemplate::Next1Or2Tag => "NEXT1OR2TAG",
            ContextTemplate::Prev1Or2Or3Tag => "PREV1OR2OR3TAG",
            ContextTemplate::Next1Or2Or3Tag => "NEXT1OR2OR3TAG",
            ContextTemplate::PrevWd => "PREVWD",
            ContextTemplate::NextWd => "NEXTWD",
            ContextTemplate::SurroundTag => "SURROUNDTAG",
            ContextTemplate::PrevBigram => "PREVBIGRAM",
            ContextTemplate::NextBigram => "NEXTBIGRAM",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.keyword() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            ContextTemplate::SurroundTag
            | ContextTemplate::PrevBigram
            | ContextTemplate::NextBigram => 2,
            _ => 1,
        }
    }

    /// Word templates take words as arguments, all others take tags.
    pub fn takes_words(self) -> bool {
        matches!(self, ContextTemplate::PrevWd | ContextTemplate::NextWd)
    }
}

/// The context condition of a contextual rule, with its arguments.
///
/// `W` is the word representation; rules use strings, the learner uses
/// interned word ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Context<W = String> {
    PrevTag(Tag),
    NextTag(Tag),
    Prev2Tag(Tag),
    Next2Tag(Tag),
    Prev1Or2Tag(Tag),
    Next1Or2Tag(Tag),
    Prev1Or2Or3Tag(Tag),
    Next1Or2Or3Tag(Tag),
    PrevWd(W),
    NextWd(W),
    /// Tag on the left, tag on the right.
    SurroundTag(Tag, Tag),
    /// Tags at -2, -1.
    PrevBigram(Tag, Tag),
    /// Tags at +1, +2.
    NextBigram(Tag, Tag),
}

fn at<T: Copy>(items: &[T], pos: usize, offset: isize) -> Option<T> {
    let i = pos.checked_add_signed(offset)?;
    items.get(i).copied()
}

impl<W> Context<W> {
    pub fn template(&self) -> ContextTemplate {
        match self {
            Context::PrevTag(_) => ContextTemplate::PrevTag,
            Context::NextTag(_) => ContextTemplate::NextTag,
            Context::Prev2Tag(_) => ContextTemplate::Prev2Tag,
            Context::Next2Tag(_) => ContextTemplate::Next2Tag,
            Context::Prev1Or2Tag(_) => ContextTemplate::Prev1Or2Tag,
            Context::Next1Or2Tag(_) => ContextTemplate::Next1Or2Tag,
            Context::Prev1Or2Or3Tag(_) => ContextTemplate::Prev1Or2Or3Tag,
            Context::Next1Or2Or3Tag(_) => ContextTemplate::Next1Or2Or3Tag,
            Context::PrevWd(_) => ContextTemplate::PrevWd,
            Context::NextWd(_) => ContextTemplate::NextWd,
            Context::SurroundTag(..) => ContextTemplate::SurroundTag,
            Context::PrevBigram(..) => ContextTemplate::PrevBigram,
            Context::NextBigram(..) => ContextTemplate::NextBigram,
        }
    }

    /// Whether the context around `pos` satisfies the condition. Positions
    /// outside the sentence never match.
    pub fn holds<X: PartialEq<W>>(&self, words: &[X], tags: &[Tag], pos: usize) -> bool {
        let tag_at = |offset: isize| at(tags, pos, offset);
        let word_is = |offset: isize, w: &W| {
            pos.checked_add_signed(offset)
                .and_then(|i| words.get(i))
                .is_some_and(|x| x == w)
        };
        match self {
            Context::PrevTag(t) => tag_at(-1) == Some(*t),
            Context::NextTag(t) => tag_at(1) == Some(*t),
            Context::Prev2Tag(t) => tag_at(-2) == Some(*t),
            Context::Next2Tag(t) => tag_at(2) == Some(*t),
            Context::Prev1Or2Tag(t) => [-1, -2].into_iter().any(|o| tag_at(o) == Some(*t)),
            Context::Next1Or2Tag(t) => [1, 2].into_iter().any(|o| tag_at(o) == Some(*t)),
            Context::Prev1Or2Or3Tag(t) => [-1, -2, -3].into_iter().any(|o| tag_at(o) == Some(*t)),
            Context::Next1Or2Or3Tag(t) => [1, 2, 3].into_iter().any(|o| tag_at(o) == Some(*t)),
            Context::PrevWd(w) => word_is(-1, w),
            Context::NextWd(w) => word_is(1, w),
            Context::SurroundTag(l, r) => tag_at(-1) == Some(*l) && tag_at(1) == Some(*r),
            Context::PrevBigram(a, b) => tag_at(-2) == Some(*a) && tag_at(-1) == Some(*b),
            Context::NextBigram(a, b) => tag_at(1) == Some(*a) && tag_at(2) == Some(*b),
        }
    }

    /// Whether the condition reads tags to the left of the token, which is
    /// where earlier changes of the same pass become visible.
    pub fn looks_left(&self) -> bool {
        matches!(
            self,
            Context::PrevTag(_)
                | Context::Prev2Tag(_)
                | Context::Prev1Or2Tag(_)
                | Context::Prev1Or2Or3Tag(_)
                | Context::SurroundTag(..)
                | Context::PrevBigram(..)
        )
    }

    /// Tags named by the condition.
    pub fn tags(&self) -> impl Iterator<Item = Tag> {
        let (a, b) = match *self {
            Context::PrevTag(t)
            | Context::NextTag(t)
            | Context::Prev2Tag(t)
            | Context::Next2Tag(t)
            | Context::Prev1Or2Tag(t)
            | Context::Next1Or2Tag(t)
            | Context::Prev1Or2Or3Tag(t)
            | Context::Next1Or2Or3Tag(t) => (Some(t), None),
            Context::SurroundTag(a, b) | Context::PrevBigram(a, b) | Context::NextBigram(a, b) => {
                (Some(a), Some(b))
            }
            Context::PrevWd(_) | Context::NextWd(_) => (None, None),
        };
        a.into_iter().chain(b)
    }

    pub fn map_word<V>(self, f: impl FnOnce(W) -> V) -> Context<V> {
        match self {
            Context::PrevTag(t) => Context::PrevTag(t),
            Context::NextTag(t) => Context::NextTag(t),
            Context::Prev2Tag(t) => Context::Prev2Tag(t),
            Context::Next2Tag(t) => Context::Next2Tag(t),
            Context::Prev1Or2Tag(t) => Context::Prev1Or2Tag(t),
            Context::Next1Or2Tag(t) => Context::Next1Or2Tag(t),
            Context::Prev1Or2Or3Tag(t) => Context::Prev1Or2Or3Tag(t),
            Context::Next1Or2Or3Tag(t) => Context::Next1Or2Or3Tag(t),
            Context::PrevWd(w) => Context::PrevWd(f(w)),
            Context::NextWd(w) => Context::NextWd(f(w)),
            Context::SurroundTag(a, b) => Context::SurroundTag(a, b),
            Context::PrevBigram(a, b) => Context::PrevBigram(a, b),
            Context::NextBigram(a, b) => Context::NextBigram(a, b),
        }
    }
}

impl<W: Clone> Context<W> {
    /// Every context condition that holds at `pos`, read off the actual
    /// neighbouring tags and words. Each distinct condition appears once.
    pub fn instantiations_at(words: &[W], tags: &[Tag], pos: usize) -> Vec<Context<W>> {
        let mut out = Vec::with_capacity(20);
        Self::instantiate_into(words, tags, pos, &mut out);
        out
    }

    pub(crate) fn instantiate_into(
        words: &[W],
        tags: &[Tag],
        pos: usize,
        out: &mut Vec<Context<W>>,
    ) {
        let tag_at = |offset: isize| at(tags, pos, offset);
        if let Some(t) = tag_at(-1) {
            out.push(Context::PrevTag(t));
        }
        if let Some(t) = tag_at(1) {
            out.push(Context::NextTag(t));
        }
        if let Some(t) = tag_at(-2) {
            out.push(Context::Prev2Tag(t));
        }
        if let Some(t) = tag_at(2) {
            out.push(Context::Next2Tag(t));
        }
        let mut push_distinct = |offsets: &[isize], make: fn(Tag) -> Context<W>| {
            let mut seen: [Option<Tag>; 3] = [None; 3];
            for (k, &o) in offsets.iter().enumerate() {
                if let Some(t) = tag_at(o) {
                    if !seen.contains(&Some(t)) {
                        seen[k] = Some(t);
                        out.push(make(t));
                    }
                }
            }
        };
        push_distinct(&[-1, -2], Context::Prev1Or2Tag);
        push_distinct(&[1, 2], Context::Next1Or2Tag);
        push_distinct(&[-1, -2, -3], Context::Prev1Or2Or3Tag);
        push_distinct(&[1, 2, 3], Context::Next1Or2Or3Tag);
        if pos > 0 {
            out.push(Context::PrevWd(words[pos - 1].clone()));
        }
        if let Some(w) = words.get(pos + 1) {
            out.push(Context::NextWd(w.clone()));
        }
        if let (Some(l), Some(r)) = (tag_at(-1), tag_at(1)) {
            out.push(Context::SurroundTag(l, r));
        }
        if let (Some(a), Some(b)) = (tag_at(-2), tag_at(-1)) {
            out.push(Context::PrevBigram(a, b));
        }
        if let (Some(a), Some(b)) = (tag_at(1), tag_at(2)) {
            out.push(Context::NextBigram(a, b));
        }
    }
}

impl Context<String> {
    fn write_args(&self, tagset: &Tagset, out: &mut String) {
        match self {
            Context::PrevWd(w) | Context::NextWd(w) => {
                let _ = write!(out, " {w}");
            }
            _ => {
                for t in self.tags() {
                    let _ = write!(out, " {}", tagset.name(t));
                }
            }
        }
    }
}

/// A rule retagging a token from `from` to `to` when its context matches.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextualRule {
    pub context: Context,
    pub from: Tag,
    pub to: Tag,
}

impl ContextualRule {
    pub fn new(context: Context, from: Tag, to: Tag) -> Result<Self> {
        if from == to {
            return Err(Error::Config("rule would not change the tag".into()));
        }
        if let Context::PrevWd(w) | Context::NextWd(w) = &context {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid word argument `{w}`")));
            }
        }
        Ok(ContextualRule { context, from, to })
    }

    pub fn template(&self) -> ContextTemplate {
        self.context.template()
    }

    pub fn matches<X: PartialEq<String>>(&self, words: &[X], tags: &[Tag], pos: usize) -> bool {
        tags[pos] == self.from && self.context.holds(words, tags, pos)
    }

    /// Scans left to right, changing tags in place so that each change is
    /// visible to later positions. Returns the number of changed tokens.
    pub fn apply_to_sentence<X: PartialEq<String>>(&self, words: &[X], tags: &mut [Tag]) -> usize {
        let mut changed = 0;
        for pos in 0..tags.len() {
            if self.matches(words, tags, pos) {
                tags[pos] = self.to;
                changed += 1;
            }
        }
        changed
    }

    /// Selection order among equally scored rules: template keyword, then
    /// arguments, then source tag, then target tag.
    pub fn tie_break_cmp(&self, other: &Self) -> Ordering {
        self.template()
            .keyword()
            .cmp(other.template().keyword())
            .then_with(|| self.context.cmp(&other.context))
            .then_with(|| self.from.cmp(&other.from))
            .then_with(|| self.to.cmp(&other.to))
    }

    pub fn to_line(&self, tagset: &Tagset) -> String {
        let mut out = format!(
            "CTX {} {} {}",
            self.template().keyword(),
            tagset.name(self.from),
            tagset.name(self.to)
        );
        self.context.write_args(tagset, &mut out);
        out
    }
}

/// Tags and words of one sentence while rules are being applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceState {
    pub words: Vec<String>,
    pub tags: Vec<Tag>,
}

pub fn contextual_rule_matches(rule: &ContextualRule, state: &SentenceState, pos: usize) -> bool {
    rule.matches(&state.words, &state.tags, pos)
}

/// Applies contextual rules in order; sentences never see each other.
pub fn apply_contextual_rules(rules: &[ContextualRule], state: &mut [SentenceState]) {
    for rule in rules {
        for sentence in state.iter_mut() {
            rule.apply_to_sentence(&sentence.words, &mut sentence.tags);
        }
    }
}

/// Both rule lists of a rule file, each in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub lexical: Vec<LexicalRule>,
    pub contextual: Vec<ContextualRule>,
}

pub fn serialize_lexical_rules(rules: &[LexicalRule], tagset: &Tagset) -> String {
    rules.iter().map(|r| r.to_line(tagset) + "\n").collect()
}

pub fn serialize_contextual_rules(rules: &[ContextualRule], tagset: &Tagset) -> String {
    rules.iter().map(|r| r.to_line(tagset) + "\n").collect()
}

pub fn serialize_rules(rules: &RuleSet, tagset: &Tagset) -> String {
    serialize_lexical_rules(&rules.lexical, tagset)
        + &serialize_contextual_rules(&rules.contextual, tagset)
}

/// Parses a rule file. `LEX` and `CTX` lines may be mixed; `#` starts a
/// comment line.
pub fn parse_rules(text: &str, tagset: &Tagset, max_affix_len: usize) -> Result<RuleSet> {
    let mut rules = RuleSet::default();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let tag = |column: usize| -> Result<Tag> {
            let name = fields[column - 1];
            tagset.get(name).ok_or_else(|| Error::UnknownTag {
                tag: name.to_owned(),
                line: line_no,
            })
        };
        let invalid = |e: Error| match e {
            Error::Config(m) => Error::parse(line_no, 1, m),
            other => other,
        };
        match fields[0] {
            "LEX" => {
                if fields.len() != 5 {
                    return Err(Error::parse(
                        line_no,
                        1,
                        format!("LEX rules have 5 fields, found {}", fields.len()),
                    ));
                }
                let template = LexicalTemplate::from_keyword(fields[1]).ok_or_else(|| {
                    Error::parse(
                        line_no,
                        2,
                        format!("unknown lexical template `{}`", fields[1]),
                    )
                })?;
                let from = if fields[3] == "-" {
                    None
                } else {
                    Some(tag(4)?)
                };
                let to = tag(5)?;
                let arg: String = fields[2].nfc().collect();
                let rule =
                    LexicalRule::new(template, arg, from, to, max_affix_len).map_err(invalid)?;
                rules.lexical.push(rule);
            }
            "CTX" => {
                let template = fields
                    .get(1)
                    .and_then(|k| ContextTemplate::from_keyword(k))
                    .ok_or_else(|| {
                        Error::parse(
                            line_no,
                            2,
                            format!(
                                "unknown contextual template `{}`",
                                fields.get(1).unwrap_or(&"")
                            ),
                        )
                    })?;
                if fields.len() != 4 + template.arity() {
                    return Err(Error::parse(
                        line_no,
                        1,
                        format!(
                            "{} takes {} argument(s), found {}",
                            template.keyword(),
                            template.arity(),
                            fields.len().saturating_sub(4)
                        ),
                    ));
                }
                let from = tag(3)?;
                let to = tag(4)?;
                let context = if template.takes_words() {
                    let word: String = fields[4].nfc().collect();
                    match template {
                        ContextTemplate::PrevWd => Context::PrevWd(word),
                        _ => Context::NextWd(word),
                    }
                } else {
                    let a = tag(5)?;
                    match template {
                        ContextTemplate::PrevTag => Context::PrevTag(a),
                        ContextTemplate::NextTag => Context::NextTag(a),
                        ContextTemplate::Prev2Tag => Context::Prev2Tag(a),
                        ContextTemplate::Next2Tag => Context::Next2Tag(a),
                        ContextTemplate::Prev1Or2Tag => Context::Prev1Or2Tag(a),
                        ContextTemplate::Next1Or2Tag => Context::Next1Or2Tag(a),
                        ContextTemplate::Prev1Or2Or3Tag => Context::Prev1Or2Or3Tag(a),
                        ContextTemplate::Next1Or2Or3Tag => Context::Next1Or2Or3Tag(a),
                        ContextTemplate::SurroundTag => Context::SurroundTag(a, tag(6)?),
                        ContextTemplate::PrevBigram => Context::PrevBigram(a, tag(6)?),
                        ContextTemplate::NextBigram => Context::NextBigram(a, tag(6)?),
                        ContextTemplate::PrevWd | ContextTemplate::NextWd => unreachable!(),
                    }
                };
                rules
                    .contextual
                    .push(ContextualRule::new(context, from, to).map_err(invalid)?);
            }
            other => {
                return Err(Error::parse(
                    line_no,
                    1,
                    format!("expected LEX or CTX, found `{other}`"),
                ))
            }
        }
    }
    Ok(rules)
}
