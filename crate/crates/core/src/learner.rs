//! Greedy error-driven rule learning.
//!
//! Training runs in two stages. The lexical stage splits the training
//! corpus in two: one half builds a guess lexicon, and the word types of the
//! other half that the guess lexicon does not know act as unknown words.
//! Lexical rules are learned over those types. The contextual stage then
//! tags the whole training corpus with the full lexicon and learns
//! contextual rules over tokens.
//!
//! Both stages repeat the same step: collect candidate rules from the
//! current errors, score each one, keep the best, apply it, and stop once
//! no candidate improves the training state by at least the threshold.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::corpus::{shuffled_indices, Tag, TaggedCorpus, Tagset};
use crate::error::{Error, Result};
use crate::lexicon::{InitialRuleChain, Lexicon};
use crate::rules::{
    Context, ContextualRule, LexicalRule, LexicalTemplate, SentenceState, DEFAULT_MAX_AFFIX_LEN,
};
use crate::tagger::{lexical_stage, TaggerModel};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Minimum net improvement for a rule to be accepted.
    pub score_threshold: u64,
    /// `None` means unlimited.
    pub max_rules_per_phase: Option<usize>,
    /// Share of training sentences used for the guess lexicon.
    pub lexicon_split_fraction: f64,
    pub max_affix_len: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            score_threshold: 2,
            max_rules_per_phase: None,
            lexicon_split_fraction: 0.5,
            max_affix_len: DEFAULT_MAX_AFFIX_LEN,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.score_threshold < 1 {
            return Err(Error::Config("score threshold must be at least 1".into()));
        }
        if !(self.lexicon_split_fraction > 0.0 && self.lexicon_split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "lexicon split fraction must lie in (0, 1), got {}",
                self.lexicon_split_fraction
            )));
        }
        if self.max_affix_len < 1 {
            return Err(Error::Config("max affix length must be at least 1".into()));
        }
        Ok(())
    }

    /// The same configuration with learning switched off.
    pub fn without_rules(&self) -> Self {
        TrainConfig {
            max_rules_per_phase: Some(0),
            ..self.clone()
        }
    }
}

/// Errors fixed and errors introduced by a candidate rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RuleScore {
    pub good: u64,
    pub bad: u64,
}

impl RuleScore {
    pub fn net(&self) -> i64 {
        self.good as i64 - self.bad as i64
    }

    fn clears(&self, threshold: u64) -> bool {
        self.net() > 0 && self.net() as u64 >= threshold
    }
}

impl fmt::Display for RuleScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "good={} bad={} net={}", self.good, self.bad, self.net())
    }
}

/// Deterministic order among rules with equal net score.
pub trait TieBreak {
    fn tie_break_cmp(&self, other: &Self) -> Ordering;
}

impl TieBreak for LexicalRule {
    fn tie_break_cmp(&self, other: &Self) -> Ordering {
        LexicalRule::tie_break_cmp(self, other)
    }
}

impl TieBreak for ContextualRule {
    fn tie_break_cmp(&self, other: &Self) -> Ordering {
        ContextualRule::tie_break_cmp(self, other)
    }
}

/// Highest net score wins, ties go to the smallest rule under
/// [`TieBreak`]. Returns `None` when the winner's net is below `threshold`.
pub fn select_best_rule<R: TieBreak>(
    candidates: impl IntoIterator<Item = R>,
    mut scorer: impl FnMut(&R) -> RuleScore,
    threshold: u64,
) -> Option<(R, RuleScore)> {
    let mut best: Option<(R, RuleScore)> = None;
    for rule in candidates {
        let score = scorer(&rule);
        let replace = match &best {
            None => true,
            Some((b, s)) => {
                score.net() > s.net()
                    || (score.net() == s.net() && rule.tie_break_cmp(b) == Ordering::Less)
            }
        };
        if replace {
            best = Some((rule, score));
        }
    }
    best.filter(|(_, s)| s.clears(threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Lexical,
    Contextual,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Lexical => "lexical",
            Phase::Contextual => "contextual",
        })
    }
}

/// One accepted rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub phase: Phase,
    /// 1-based.
    pub iteration: usize,
    /// The rule in rule-file syntax.
    pub rule: String,
    pub score: RuleScore,
    pub errors_before: u64,
    pub errors_after: u64,
}

impl StepRecord {
    /// `phase iteration rule net errors_remaining`
    pub fn log_line(&self) -> String {
        format!(
            "{} {} {} {} {}",
            self.phase,
            self.iteration,
            self.rule,
            self.score.net(),
            self.errors_after
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseTrace {
    pub initial_errors: u64,
    pub steps: Vec<StepRecord>,
}

impl PhaseTrace {
    pub fn final_errors(&self) -> u64 {
        self.steps
            .last()
            .map_or(self.initial_errors, |s| s.errors_after)
    }
}

/// Splits sentences after a seeded shuffle: the first ⌈fraction·S⌉ (at most
/// S−1) go to the lexicon part. Both parts keep corpus order.
pub fn split_for_unknown_training(
    corpus: &TaggedCorpus,
    fraction: f64,
    seed: u64,
) -> Result<(TaggedCorpus, TaggedCorpus)> {
    let n = corpus.len();
    if n < 2 {
        return Err(Error::TooSmall(format!(
            "need at least 2 sentences to hold out unknown words, got {n}"
        )));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let take = ((fraction * n as f64).ceil() as usize).clamp(1, n - 1);
    let order = shuffled_indices(n, seed);
    let mut lexicon_part = order[..take].to_vec();
    let mut rule_part = order[take..].to_vec();
    lexicon_part.sort_unstable();
    rule_part.sort_unstable();
    Ok((corpus.select(&lexicon_part), corpus.select(&rule_part)))
}

/// An unknown word type during lexical learning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeState {
    pub word: String,
    pub current: Tag,
    /// Most frequent gold tag, ties to the smaller tag name.
    pub gold: Tag,
    /// Occurrences in the rule-learning part.
    pub count: u64,
}

/// Occurrence-weighted count of mis-tagged types.
pub fn weighted_type_errors(types: &[TypeState]) -> u64 {
    types
        .iter()
        .filter(|t| t.current != t.gold)
        .map(|t| t.count)
        .sum()
}

/// Static score of a lexical rule over word types, weighted by occurrences.
pub fn score_lexical_candidate(
    rule: &LexicalRule,
    types: &[TypeState],
    lexicon: &Lexicon,
) -> RuleScore {
    let mut score = RuleScore::default();
    for t in types {
        if !rule.matches(&t.word, t.current, lexicon) {
            continue;
        }
        if t.current != t.gold && rule.to == t.gold {
            score.good += t.count;
        } else if t.current == t.gold && rule.to != t.gold {
            score.bad += t.count;
        }
    }
    score
}

/// Guess lexicon and unknown word types the lexical stage starts from.
#[derive(Debug, Clone)]
pub struct LexicalSetup {
    pub guess_lexicon: Lexicon,
    pub types: Vec<TypeState>,
}

/// Returns `None` when the corpus has fewer than two sentences.
pub fn lexical_training_setup(
    train: &TaggedCorpus,
    chain: &InitialRuleChain,
    config: &TrainConfig,
) -> Result<Option<LexicalSetup>> {
    if train.len() < 2 {
        return Ok(None);
    }
    let (lexicon_part, rule_part) =
        split_for_unknown_training(train, config.lexicon_split_fraction, config.seed)?;
    let guess_lexicon = Lexicon::from_tokens(lexicon_part.tokens());
    let unknown = Lexicon::from_tokens(
        rule_part
            .tokens()
            .filter(|(w, _)| !guess_lexicon.contains(w)),
    );
    let tagset = train.tagset();
    let mut types: Vec<TypeState> = unknown
        .iter()
        .map(|(word, entry)| TypeState {
            word: word.to_owned(),
            current: chain.tag_unknown(word, tagset),
            gold: entry[0].0,
            count: entry.iter().map(|&(_, c)| c).sum(),
        })
        .collect();
    types.sort_by(|a, b| a.word.cmp(&b.word));
    Ok(Some(LexicalSetup {
        guess_lexicon,
        types,
    }))
}

/// Lexicon words reachable by adding an affix to a shorter word.
struct AffixIndex {
    by_suffix: HashMap<String, Vec<String>>,
    by_prefix: HashMap<String, Vec<String>>,
}

impl AffixIndex {
    fn new(lexicon: &Lexicon, max_affix_len: usize) -> Self {
        let mut by_suffix: HashMap<String, Vec<String>> = HashMap::new();
        let mut by_prefix: HashMap<String, Vec<String>> = HashMap::new();
        for word in lexicon.words() {
            let bounds = char_bounds(word);
            let n = bounds.len() - 1;
            for k in 1..=max_affix_len.min(n.saturating_sub(1)) {
                let cut = bounds[n - k];
                by_suffix
                    .entry(word[..cut].to_owned())
                    .or_default()
                    .push(word[cut..].to_owned());
                let cut = bounds[k];
                by_prefix
                    .entry(word[cut..].to_owned())
                    .or_default()
                    .push(word[..cut].to_owned());
            }
        }
        AffixIndex {
            by_suffix,
            by_prefix,
        }
    }
}

fn char_bounds(word: &str) -> Vec<usize> {
    word.char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(word.len()))
        .collect()
}

/// Every `(template, argument)` whose form condition holds for `word`.
fn form_instantiations(
    word: &str,
    lexicon: &Lexicon,
    index: &AffixIndex,
    max_affix_len: usize,
) -> Vec<(LexicalTemplate, String)> {
    let bounds = char_bounds(word);
    let n = bounds.len() - 1;
    let mut out = Vec::new();
    for k in 1..=max_affix_len.min(n) {
        let suffix_start = bounds[n - k];
        let prefix_end = bounds[k];
        out.push((LexicalTemplate::HasSuf, word[suffix_start..].to_owned()));
        out.push((LexicalTemplate::HasPref, word[..prefix_end].to_owned()));
        if k < n {
            if lexicon.contains(&word[..suffix_start]) {
                out.push((LexicalTemplate::DeleteSuf, word[suffix_start..].to_owned()));
            }
            if lexicon.contains(&word[prefix_end..]) {
                out.push((LexicalTemplate::DeletePref, word[..prefix_end].to_owned()));
            }
        }
    }
    for arg in index.by_suffix.get(word).into_iter().flatten() {
        out.push((LexicalTemplate::AddSuf, arg.clone()));
    }
    for arg in index.by_prefix.get(word).into_iter().flatten() {
        out.push((LexicalTemplate::AddPref, arg.clone()));
    }
    let mut seen = HashSet::new();
    for c in word.chars() {
        if seen.insert(c) {
            out.push((LexicalTemplate::HasChar, c.to_string()));
        }
    }
    out
}

#[derive(Default)]
struct LexicalKeyStats {
    targets: Vec<Tag>,
    wrong_by_gold: HashMap<Tag, u64>,
    correct_by_gold: HashMap<Tag, u64>,
    correct_total: u64,
}

/// Learns lexical rules over the held-out unknown types of `setup`,
/// mutating their current tags as rules are accepted.
pub fn learn_lexical_rules_from(
    setup: &mut LexicalSetup,
    tagset: &Tagset,
    config: &TrainConfig,
) -> (Vec<LexicalRule>, PhaseTrace) {
    let lexicon = &setup.guess_lexicon;
    let types = &mut setup.types;
    let index = AffixIndex::new(lexicon, config.max_affix_len);

    let mut forms: Vec<(LexicalTemplate, String)> = Vec::new();
    let mut form_ids: HashMap<(LexicalTemplate, String), u32> = HashMap::new();
    let type_forms: Vec<Vec<u32>> = types
        .iter()
        .map(|t| {
            form_instantiations(&t.word, lexicon, &index, config.max_affix_len)
                .into_iter()
                .map(|f| {
                    *form_ids.entry(f.clone()).or_insert_with(|| {
                        forms.push(f);
                        (forms.len() - 1) as u32
                    })
                })
                .collect()
        })
        .collect();

    let mut rules = Vec::new();
    let mut trace = PhaseTrace {
        initial_errors: weighted_type_errors(types),
        steps: Vec::new(),
    };
    loop {
        if config.max_rules_per_phase.is_some_and(|m| rules.len() >= m) {
            break;
        }
        let errors_before = trace.final_errors();
        if errors_before == 0 {
            break;
        }

        let mut keys: HashMap<(u32, Option<Tag>), LexicalKeyStats> = HashMap::new();
        for (t, ids) in types.iter().zip(&type_forms) {
            if t.current == t.gold {
                continue;
            }
            for &f in ids {
                for from in [None, Some(t.current)] {
                    let stats = keys.entry((f, from)).or_default();
                    if !stats.targets.contains(&t.gold) {
                        stats.targets.push(t.gold);
                    }
                }
            }
        }
        for (t, ids) in types.iter().zip(&type_forms) {
            for &f in ids {
                for from in [None, Some(t.current)] {
                    if let Some(stats) = keys.get_mut(&(f, from)) {
                        if t.current == t.gold {
                            stats.correct_total += t.count;
                            *stats.correct_by_gold.entry(t.gold).or_default() += t.count;
                        } else {
                            *stats.wrong_by_gold.entry(t.gold).or_default() += t.count;
                        }
                    }
                }
            }
        }

        let mut best: Option<(LexicalRule, RuleScore)> = None;
        for (&(f, from), stats) in &keys {
            for &to in &stats.targets {
                let score = RuleScore {
                    good: stats.wrong_by_gold.get(&to).copied().unwrap_or(0),
                    bad: stats.correct_total - stats.correct_by_gold.get(&to).copied().unwrap_or(0),
                };
                if best.as_ref().is_some_and(|(_, s)| score.net() < s.net()) {
                    continue;
                }
                let (template, arg) = &forms[f as usize];
                let rule = LexicalRule {
                    template: *template,
                    arg: arg.clone(),
                    from,
                    to,
                };
                let replace = match &best {
                    None => true,
                    Some((b, s)) => {
                        score.net() > s.net() || rule.tie_break_cmp(b) == Ordering::Less
                    }
                };
                if replace {
                    best = Some((rule, score));
                }
            }
        }
        let Some((rule, score)) = best.filter(|(_, s)| s.clears(config.score_threshold)) else {
            break;
        };

        let fid = form_ids[&(rule.template, rule.arg.clone())];
        for (t, ids) in types.iter_mut().zip(&type_forms) {
            if rule.from.is_none_or(|f| f == t.current) && ids.contains(&fid) {
                t.current = rule.to;
            }
        }
        let errors_after = weighted_type_errors(types);
        debug_assert_eq!(errors_before as i64 - errors_after as i64, score.net());
        trace.steps.push(StepRecord {
            phase: Phase::Lexical,
            iteration: rules.len() + 1,
            rule: rule.to_line(tagset),
            score,
            errors_before,
            errors_after,
        });
        rules.push(rule);
    }
    (rules, trace)
}

/// Result of the lexical stage.
#[derive(Debug, Clone)]
pub struct LexicalLearning {
    /// Built from the full training corpus.
    pub lexicon: Lexicon,
    pub rules: Vec<LexicalRule>,
    pub trace: PhaseTrace,
}

pub fn learn_lexical_rules(
    train: &TaggedCorpus,
    chain: &InitialRuleChain,
    config: &TrainConfig,
) -> Result<LexicalLearning> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::TooSmall("cannot train on an empty corpus".into()));
    }
    let (rules, trace) = match lexical_training_setup(train, chain, config)? {
        Some(mut setup) => learn_lexical_rules_from(&mut setup, train.tagset(), config),
        None => (Vec::new(), PhaseTrace::default()),
    };
    Ok(LexicalLearning {
        lexicon: Lexicon::from_tokens(train.tokens()),
        rules,
        trace,
    })
}

fn check_alignment(state: &[SentenceState], gold: &TaggedCorpus) -> Result<()> {
    if state.len() != gold.len() {
        return Err(Error::Alignment {
            sentence: state.len().min(gold.len()),
            token: 0,
            detail: format!("{} sentences vs {} gold sentences", state.len(), gold.len()),
        });
    }
    for (s, (st, g)) in state.iter().zip(gold.sentences()).enumerate() {
        if st.tags.len() != g.len() || st.words.len() != g.len() {
            return Err(Error::Alignment {
                sentence: s,
                token: st.tags.len().min(g.len()),
                detail: "sentence lengths differ".into(),
            });
        }
        if let Some(i) = st.words.iter().zip(g.words()).position(|(a, b)| a != b) {
            return Err(Error::Alignment {
                sentence: s,
                token: i,
                detail: format!("`{}` vs gold `{}`", st.words[i], g.tokens()[i].word),
            });
        }
    }
    Ok(())
}

/// Static score: every match is judged against the state before the rule
/// is applied anywhere.
pub fn score_contextual_candidate(
    rule: &ContextualRule,
    state: &[SentenceState],
    gold: &TaggedCorpus,
) -> Result<RuleScore> {
    check_alignment(state, gold)?;
    let mut score = RuleScore::default();
    for (st, g) in state.iter().zip(gold.sentences()) {
        for (pos, (_, gold_tag)) in TaggedCorpus::tagged_tokens(g).enumerate() {
            if rule.matches(&st.words, &st.tags, pos) {
                if gold_tag == rule.to {
                    score.good += 1;
                } else if gold_tag == rule.from {
                    score.bad += 1;
                }
            }
        }
    }
    Ok(score)
}

/// Dynamic score: the rule is applied to a copy of the state and the
/// change in errors is counted.
pub fn dynamic_contextual_score(
    rule: &ContextualRule,
    state: &[SentenceState],
    gold: &TaggedCorpus,
) -> Result<RuleScore> {
    check_alignment(state, gold)?;
    let mut score = RuleScore::default();
    for (st, g) in state.iter().zip(gold.sentences()) {
        let mut tags = st.tags.clone();
        rule.apply_to_sentence(&st.words, &mut tags);
        for ((before, after), (_, gold_tag)) in st
            .tags
            .iter()
            .zip(&tags)
            .zip(TaggedCorpus::tagged_tokens(g))
        {
            match (*before == gold_tag, *after == gold_tag) {
                (false, true) => score.good += 1,
                (true, false) => score.bad += 1,
                _ => {}
            }
        }
    }
    Ok(score)
}

/// The training corpus tagged by the initial tagger and `lexical_rules`,
/// which is where contextual learning starts.
pub fn contextual_training_state(
    train: &TaggedCorpus,
    lexicon: &Lexicon,
    lexical_rules: &[LexicalRule],
    chain: &InitialRuleChain,
) -> Vec<SentenceState> {
    let words: Vec<Vec<&str>> = train
        .sentences()
        .iter()
        .map(|s| s.words().collect())
        .collect();
    let tags = lexical_stage(&words, lexicon, chain, train.tagset(), lexical_rules);
    words
        .into_iter()
        .zip(tags)
        .map(|(w, tags)| SentenceState {
            words: w.into_iter().map(str::to_owned).collect(),
            tags,
        })
        .collect()
}

type WordId = u32;

/// Per candidate key: which targets were proposed, the gold tags at each
/// static match, and where those matches are.
struct ContextKeyStats {
    targets: Vec<Tag>,
    gold_hist: Vec<u32>,
    matches: Vec<(u32, u32)>,
}

fn apply_interned(ctx: &Context<WordId>, from: Tag, to: Tag, words: &[WordId], tags: &mut [Tag]) {
    for pos in 0..tags.len() {
        if tags[pos] == from && ctx.holds(words, tags, pos) {
            tags[pos] = to;
        }
    }
}

/// Contexts under which the token at `pos` could match a rule `from → to`
/// during a left-to-right pass: the static ones, plus those seen when some
/// of the up to three tokens on the left still tagged `from` have already
/// been changed to `to`.
fn candidate_contexts(
    words: &[WordId],
    tags: &[Tag],
    pos: usize,
    to: Tag,
    out: &mut Vec<Context<WordId>>,
) {
    let from = tags[pos];
    Context::instantiate_into(words, tags, pos, out);
    let lo = pos.saturating_sub(3);
    let hi = (pos + 3).min(tags.len() - 1);
    let switchable: Vec<usize> = (lo..pos).filter(|&j| tags[j] == from).collect();
    if switchable.is_empty() {
        return;
    }
    let mut window: Vec<Tag> = tags[lo..=hi].to_vec();
    let local = pos - lo;
    let mut extra = Vec::new();
    for mask in 1u32..(1 << switchable.len()) {
        for (bit, &j) in switchable.iter().enumerate() {
            window[j - lo] = if mask & (1 << bit) != 0 { to } else { from };
        }
        extra.clear();
        Context::instantiate_into(&words[lo..=hi], &window, local, &mut extra);
        out.extend(extra.drain(..).filter(Context::looks_left));
    }
}

/// Learns contextual rules starting from `state`, which is updated in place.
pub fn learn_contextual_rules_from(
    state: &mut [SentenceState],
    gold: &TaggedCorpus,
    config: &TrainConfig,
) -> Result<(Vec<ContextualRule>, PhaseTrace)> {
    check_alignment(state, gold)?;
    let tagset = gold.tagset();
    let n_tags = tagset.len();

    let mut vocab: Vec<String> = Vec::new();
    let mut ids: HashMap<String, WordId> = HashMap::new();
    let words: Vec<Vec<WordId>> = state
        .iter()
        .map(|s| {
            s.words
                .iter()
                .map(|w| {
                    *ids.entry(w.clone()).or_insert_with(|| {
                        vocab.push(w.clone());
                        (vocab.len() - 1) as WordId
                    })
                })
                .collect()
        })
        .collect();
    let golds: Vec<Vec<Tag>> = gold
        .sentences()
        .iter()
        .map(|s| TaggedCorpus::tagged_tokens(s).map(|(_, t)| t).collect())
        .collect();
    let mut tags: Vec<Vec<Tag>> = state.iter().map(|s| s.tags.clone()).collect();
    let count_errors = |tags: &[Vec<Tag>]| -> u64 {
        tags.iter()
            .zip(&golds)
            .map(|(t, g)| t.iter().zip(g).filter(|(a, b)| a != b).count() as u64)
            .sum()
    };
    let to_public = |ctx: &Context<WordId>| ctx.clone().map_word(|w| vocab[w as usize].clone());

    let mut rules: Vec<ContextualRule> = Vec::new();
    let mut trace = PhaseTrace {
        initial_errors: count_errors(&tags),
        steps: Vec::new(),
    };
    let mut buf: Vec<Context<WordId>> = Vec::with_capacity(64);
    loop {
        if config.max_rules_per_phase.is_some_and(|m| rules.len() >= m) {
            break;
        }
        let errors_before = trace.final_errors();
        if errors_before == 0 {
            break;
        }

        let mut keys: HashMap<(Context<WordId>, Tag), ContextKeyStats> = HashMap::new();
        for (s, (t, g)) in tags.iter().zip(&golds).enumerate() {
            for pos in 0..t.len() {
                if t[pos] == g[pos] {
                    continue;
                }
                buf.clear();
                candidate_contexts(&words[s], t, pos, g[pos], &mut buf);
                for ctx in buf.drain(..) {
                    let stats = keys
                        .entry((ctx, t[pos]))
                        .or_insert_with(|| ContextKeyStats {
                            targets: Vec::new(),
                            gold_hist: vec![0; n_tags],
                            matches: Vec::new(),
                        });
                    if !stats.targets.contains(&g[pos]) {
                        stats.targets.push(g[pos]);
                    }
                }
            }
        }
        let mut is_source = vec![false; n_tags];
        for (_, from) in keys.keys() {
            is_source[from.index()] = true;
        }
        for (s, (t, g)) in tags.iter().zip(&golds).enumerate() {
            for pos in 0..t.len() {
                if !is_source[t[pos].index()] {
                    continue;
                }
                buf.clear();
                Context::instantiate_into(&words[s], t, pos, &mut buf);
                for ctx in buf.drain(..) {
                    if let Some(stats) = keys.get_mut(&(ctx, t[pos])) {
                        stats.gold_hist[g[pos].index()] += 1;
                        stats.matches.push((s as u32, pos as u32));
                    }
                }
            }
        }

        let mut best: Option<(ContextualRule, Context<WordId>, RuleScore)> = None;
        let mut scratch: Vec<Tag> = Vec::new();
        for ((ctx, from), stats) in &keys {
            if stats.matches.is_empty() {
                continue;
            }
            let from = *from;
            // Sentences where one change can alter a later match in the same pass.
            let mut interacting: Vec<u32> = Vec::new();
            if ctx.looks_left() {
                for &(s, pos) in &stats.matches {
                    let t = &tags[s as usize];
                    let pos = pos as usize;
                    let end = (pos + 3).min(t.len() - 1);
                    if t[pos + 1..=end].contains(&from) && interacting.last() != Some(&s) {
                        interacting.push(s);
                    }
                }
            }
            for &to in &stats.targets {
                let mut good = stats.gold_hist[to.index()] as i64;
                let mut bad = stats.gold_hist[from.index()] as i64;
                for &s in &interacting {
                    let s = s as usize;
                    for &(ms, pos) in &stats.matches {
                        if ms as usize == s {
                            let gt = golds[s][pos as usize];
                            good -= (gt == to) as i64;
                            bad -= (gt == from) as i64;
                        }
                    }
                    scratch.clear();
                    scratch.extend_from_slice(&tags[s]);
                    apply_interned(ctx, from, to, &words[s], &mut scratch);
                    for ((before, after), gt) in tags[s].iter().zip(&scratch).zip(&golds[s]) {
                        if before != after {
                            good += (after == gt) as i64;
                            bad += (before == gt) as i64;
                        }
                    }
                }
                let score = RuleScore {
                    good: good as u64,
                    bad: bad as u64,
                };
                if best.as_ref().is_some_and(|(_, _, s)| score.net() < s.net()) {
                    continue;
                }
                let rule = ContextualRule {
                    context: to_public(ctx),
                    from,
                    to,
                };
                let replace = match &best {
                    None => true,
                    Some((b, _, s)) => {
                        score.net() > s.net() || rule.tie_break_cmp(b) == Ordering::Less
                    }
                };
                if replace {
                    best = Some((rule, ctx.clone(), score));
                }
            }
        }
        let Some((rule, ctx, score)) = best.filter(|(_, _, s)| s.clears(config.score_threshold))
        else {
            break;
        };

        for (w, t) in words.iter().zip(tags.iter_mut()) {
            apply_interned(&ctx, rule.from, rule.to, w, t);
        }
        let errors_after = count_errors(&tags);
        debug_assert_eq!(errors_before as i64 - errors_after as i64, score.net());
        trace.steps.push(StepRecord {
            phase: Phase::Contextual,
            iteration: rules.len() + 1,
            rule: rule.to_line(tagset),
            score,
            errors_before,
            errors_after,
        });
        rules.push(rule);
    }
    for (st, t) in state.iter_mut().zip(tags) {
        st.tags = t;
    }
    Ok((rules, trace))
}

#[derive(Debug, Clone)]
pub struct ContextualLearning {
    pub rules: Vec<ContextualRule>,
    pub trace: PhaseTrace,
}

pub fn learn_contextual_rules(
    train: &TaggedCorpus,
    lexicon: &Lexicon,
    lexical_rules: &[LexicalRule],
    chain: &InitialRuleChain,
    config: &TrainConfig,
) -> Result<ContextualLearning> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::TooSmall("cannot train on an empty corpus".into()));
    }
    let mut state = contextual_training_state(train, lexicon, lexical_rules, chain);
    let (rules, trace) = learn_contextual_rules_from(&mut state, train, config)?;
    Ok(ContextualLearning { rules, trace })
}

/// A trained model together with the record of how it was learned.
#[derive(Debug, Clone)]
pub struct Training {
    pub model: TaggerModel,
    pub lexical: PhaseTrace,
    pub contextual: PhaseTrace,
}

impl Training {
    pub fn log_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.lexical
            .steps
            .iter()
            .chain(&self.contextual.steps)
            .map(StepRecord::log_line)
    }
}

/// Runs both learning stages.
pub fn train_model(
    train: &TaggedCorpus,
    chain: &InitialRuleChain,
    config: &TrainConfig,
) -> Result<Training> {
    let lexical = learn_lexical_rules(train, chain, config)?;
    let contextual =
        learn_contextual_rules(train, &lexical.lexicon, &lexical.rules, chain, config)?;
    let model = TaggerModel::new(
        train.tagset().clone(),
        lexical.lexicon,
        chain.clone(),
        lexical.rules,
        contextual.rules,
    )?;
    Ok(Training {
        model,
        lexical: lexical.trace,
        contextual: contextual.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_raw_corpus, parse_tagged_corpus, serialize_tagged_corpus, Role};
    use crate::lexicon::build_lexicon;
    use std::sync::Arc;

    fn tagset() -> Arc<Tagset> {
        Arc::new(
            Tagset::new(
                ["DET", "NN", "VB", "ADV", "FW", "NP", "NF"],
                [
                    (Role::Foreign, "FW"),
                    (Role::ProperMascSg, "NP"),
                    (Role::NounFemSg, "NF"),
                ],
            )
            .unwrap(),
        )
    }

    fn cfg(threshold: u64) -> TrainConfig {
        TrainConfig {
            score_threshold: threshold,
            ..TrainConfig::default()
        }
    }

    #[derive(Debug)]
    struct Named(&'static str);

    impl TieBreak for Named {
        fn tie_break_cmp(&self, other: &Self) -> Ordering {
            self.0.cmp(other.0)
        }
    }

    #[test]
    fn selection_takes_argmax_then_tie_break() {
        let nets = |r: &Named| match r.0 {
            "a" => RuleScore { good: 3, bad: 1 },
            "b" => RuleScore { good: 3, bad: 0 },
            "c" => RuleScore { good: 4, bad: 1 },
            _ => RuleScore { good: 0, bad: 0 },
        };
        let (best, score) = select_best_rule([Named("a"), Named("b")], nets, 1).unwrap();
        assert_eq!((best.0, score.net()), ("b", 3));
        let (best, _) = select_best_rule([Named("c"), Named("b")], nets, 1).unwrap();
        assert_eq!(best.0, "b");
        assert!(select_best_rule([Named("a")], nets, 3).is_none());
        assert!(select_best_rule([Named("z")], nets, 1).is_none());
    }

    #[test]
    fn split_sizes_and_order() {
        let text: String = (0..7).map(|i| format!("w{i}/NN\n")).collect();
        let corpus = parse_tagged_corpus(&text, tagset()).unwrap();
        let (a, b) = split_for_unknown_training(&corpus, 0.5, 9).unwrap();
        assert_eq!((a.len(), b.len()), (4, 3));
        let index =
            |s: &crate::corpus::Sentence| s.words().next().unwrap()[1..].parse::<usize>().unwrap();
        for part in [&a, &b] {
            let idx: Vec<usize> = part.sentences().iter().map(index).collect();
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
        }
        let (a, b) = split_for_unknown_training(&corpus, 0.99, 9).unwrap();
        assert_eq!((a.len(), b.len()), (6, 1));
        assert!(split_for_unknown_training(&corpus.select(&[0]), 0.5, 0).is_err());
    }

    #[test]
    fn nothing_to_fix_means_no_rules() {
        let corpus = parse_tagged_corpus("a/NN b/VB\nb/VB a/NN\nα/NF", tagset()).unwrap();
        let t = train_model(&corpus, &InitialRuleChain::greek(), &cfg(1)).unwrap();
        assert!(t.model.lexical_rules().is_empty());
        assert!(t.model.contextual_rules().is_empty());
    }

    #[test]
    fn one_sentence_trains_no_lexical_rules() {
        let corpus = parse_tagged_corpus("a/NN b/VB c/VB", tagset()).unwrap();
        let l = learn_lexical_rules(&corpus, &InitialRuleChain::greek(), &cfg(1)).unwrap();
        assert!(l.rules.is_empty());
        assert_eq!(l.lexicon.len(), 3);
    }

    #[test]
    fn prevtag_fixture_needs_one_rule() {
        let corpus = parse_tagged_corpus(
            "run/VB fast/ADV\nrun/VB fast/ADV\nrun/VB fast/ADV\nthe/DET run/NN\nthe/DET run/NN\n\
             the/DET dog/NN run/VB\nthe/DET dog/NN run/VB",
            tagset(),
        )
        .unwrap();
        let ts = corpus.tagset().clone();
        let lexicon = build_lexicon(&corpus).unwrap();
        let c = learn_contextual_rules(&corpus, &lexicon, &[], &InitialRuleChain::greek(), &cfg(2))
            .unwrap();
        assert_eq!(c.rules.len(), 1);
        assert_eq!(c.rules[0].to_line(&ts), "CTX PREVTAG VB NN DET");
        assert_eq!(c.trace.initial_errors, 2);
        assert_eq!(c.trace.final_errors(), 0);
    }

    fn suffix_corpus(stems: &[&str]) -> String {
        let mut out = String::new();
        for stem in stems {
            out.push_str(&format!("{stem}ος/NN {stem}ει/VB {stem}ως/ADV\n"));
        }
        out
    }

    #[test]
    fn suffix_rules_generalise_to_new_words() {
        let train_stems = [
            "καλ",
            "μικρ",
            "μεγαλ",
            "ωραι",
            "γρηγορ",
            "αργ",
            "ψηλ",
            "κοντ",
            "φτην",
            "ακριβ",
            "παλι",
            "νε",
            "λευκ",
            "μαυρ",
            "κοκκιν",
            "πρασιν",
        ];
        let corpus = parse_tagged_corpus(&suffix_corpus(&train_stems), tagset()).unwrap();
        let t = train_model(&corpus, &InitialRuleChain::greek(), &cfg(2)).unwrap();
        assert!(!t.model.lexical_rules().is_empty());
        let unseen = ["σκληρ", "μαλακ", "ζεστ"];
        let gold = parse_tagged_corpus(&suffix_corpus(&unseen), tagset()).unwrap();
        let tagged = t.model.tag(&parse_raw_corpus(
            &suffix_corpus(&unseen)
                .replace("/NN", "")
                .replace("/VB", "")
                .replace("/ADV", ""),
        ));
        assert_eq!(
            serialize_tagged_corpus(&tagged),
            serialize_tagged_corpus(&gold)
        );
    }

    #[test]
    fn traces_decrease_and_log() {
        let corpus = parse_tagged_corpus(
            &(suffix_corpus(&["καλ", "μικρ", "ψηλ", "κοντ", "αργ", "νε"])
                + "the/DET run/NN\nthe/DET run/NN\nrun/VB\nrun/VB\nrun/VB\n"),
            tagset(),
        )
        .unwrap();
        let t = train_model(&corpus, &InitialRuleChain::greek(), &cfg(1)).unwrap();
        for trace in [&t.lexical, &t.contextual] {
            let mut before = trace.initial_errors;
            for step in &trace.steps {
                assert_eq!(step.errors_before, before);
                assert_eq!(
                    step.errors_before - step.errors_after,
                    step.score.net() as u64
                );
                assert!(step.score.net() >= 1);
                before = step.errors_after;
            }
        }
        let lines: Vec<String> = t.log_lines().collect();
        assert_eq!(
            lines.len(),
            t.lexical.steps.len() + t.contextual.steps.len()
        );
        let last = t.contextual.steps.last().unwrap();
        assert_eq!(
            lines.last().unwrap(),
            &format!(
                "contextual {} {} {} {}",
                last.iteration,
                last.rule,
                last.score.net(),
                last.errors_after
            )
        );
    }

    #[test]
    fn max_rules_caps_each_phase() {
        let corpus =
            parse_tagged_corpus(&suffix_corpus(&["καλ", "μικρ", "ψηλ", "κοντ"]), tagset()).unwrap();
        let config = TrainConfig {
            max_rules_per_phase: Some(1),
            ..cfg(1)
        };
        let t = train_model(&corpus, &InitialRuleChain::greek(), &config).unwrap();
        assert!(t.model.lexical_rules().len() <= 1);
        assert!(t.model.contextual_rules().len() <= 1);
        let none =
            train_model(&corpus, &InitialRuleChain::greek(), &config.without_rules()).unwrap();
        assert_eq!(none.model, none.model.baseline());
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0).validate().is_err());
        let mut c = cfg(1);
        c.lexicon_split_fraction = 1.0;
        assert!(c.validate().is_err());
        c.lexicon_split_fraction = 0.5;
        c.max_affix_len = 0;
        assert!(c.validate().is_err());
    }
}
