//! On-disk model directories.
//!
//! A model is five text files: TAGSET, LEXICON, LEXRULES, CTXRULES and
//! MANIFEST. The manifest records the format version, the training
//! configuration and the initial rule chain.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::corpus::load_tagset;
use crate::error::{Error, Result};
use crate::learner::TrainConfig;
use crate::lexicon::{parse_lexicon, serialize_lexicon, InitialRuleChain};
use crate::rules::{parse_rules, serialize_contextual_rules, serialize_lexical_rules};
use crate::tagger::TaggerModel;

pub const FORMAT_VERSION: u32 = 1;
pub const TAGSET_FILE: &str = "TAGSET";
pub const LEXICON_FILE: &str = "LEXICON";
pub const LEXRULES_FILE: &str = "LEXRULES";
pub const CTXRULES_FILE: &str = "CTXRULES";
pub const MANIFEST_FILE: &str = "MANIFEST";
pub const MODEL_FILES: [&str; 5] = [
    TAGSET_FILE,
    LEXICON_FILE,
    LEXRULES_FILE,
    CTXRULES_FILE,
    MANIFEST_FILE,
];

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file}: {source}")]
    Format {
        file: &'static str,
        #[source]
        source: Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ModelError + '_ {
    move |source| ModelError::Io {
        path: path.to_owned(),
        source,
    }
}

fn in_file(file: &'static str) -> impl FnOnce(Error) -> ModelError {
    move |source| ModelError::Format { file, source }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub format_version: u32,
    pub config: TrainConfig,
    pub initial_chain: InitialRuleChain,
}

impl Manifest {
    pub fn new(config: TrainConfig, initial_chain: InitialRuleChain) -> Self {
        Manifest {
            format_version: FORMAT_VERSION,
            config,
            initial_chain,
        }
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "format_version {}", self.format_version);
        let _ = writeln!(out, "score_threshold {}", c.score_threshold);
        match c.max_rules_per_phase {
            Some(n) => {
                let _ = writeln!(out, "max_rules_per_phase {n}");
            }
            None => out.push_str("max_rules_per_phase none\n"),
        }
        let _ = writeln!(out, "lexicon_split_fraction {}", c.lexicon_split_fraction);
        let _ = writeln!(out, "max_affix_len {}", c.max_affix_len);
        let _ = writeln!(out, "seed {}", c.seed);
        let _ = writeln!(out, "initial_chain {}", self.initial_chain);
        out
    }

    /// Every key must appear exactly once.
    pub fn parse(text: &str) -> Result<Manifest> {
        let mut version = None;
        let mut threshold = None;
        let mut max_rules = None;
        let mut split = None;
        let mut affix = None;
        let mut seed = None;
        let mut chain = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::parse(line_no, 1, "expected `key value`"))?;
            let value = value.trim();
            fn set<T: std::str::FromStr>(
                slot: &mut Option<T>,
                key: &str,
                value: &str,
                line: usize,
            ) -> Result<()> {
                if slot.is_some() {
                    return Err(Error::parse(line, 1, format!("duplicate key `{key}`")));
                }
                let parsed = value.parse().map_err(|_| {
                    Error::parse(
                        line,
                        key.chars().count() + 2,
                        format!("bad value `{value}`"),
                    )
                })?;
                *slot = Some(parsed);
                Ok(())
            }
            match key {
                "format_version" => set(&mut version, key, value, line_no)?,
                "score_threshold" => set(&mut threshold, key, value, line_no)?,
                "max_rules_per_phase" => {
                    if max_rules.is_some() {
                        return Err(Error::parse(
                            line_no,
                            1,
                            "duplicate key `max_rules_per_phase`",
                        ));
                    }
                    max_rules = Some(if value == "none" {
                        None
                    } else {
                        let mut n: Option<usize> = None;
                        set(&mut n, key, value, line_no)?;
                        n
                    });
                }
                "lexicon_split_fraction" => set(&mut split, key, value, line_no)?,
                "max_affix_len" => set(&mut affix, key, value, line_no)?,
                "seed" => set(&mut seed, key, value, line_no)?,
                "initial_chain" => {
                    if chain.is_some() {
                        return Err(Error::parse(line_no, 1, "duplicate key `initial_chain`"));
                    }
                    chain = Some(InitialRuleChain::parse(value)?);
                }
                _ => return Err(Error::parse(line_no, 1, format!("unknown key `{key}`"))),
            }
        }
        let missing = |k: &str| Error::Config(format!("manifest lacks `{k}`"));
        let format_version: u32 = version.ok_or_else(|| missing("format_version"))?;
        if format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {format_version}"
            )));
        }
        let config = TrainConfig {
            score_threshold: threshold.ok_or_else(|| missing("score_threshold"))?,
            max_rules_per_phase: max_rules.ok_or_else(|| missing("max_rules_per_phase"))?,
            lexicon_split_fraction: split.ok_or_else(|| missing("lexicon_split_fraction"))?,
            max_affix_len: affix.ok_or_else(|| missing("max_affix_len"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        };
        config.validate()?;
        Ok(Manifest {
            format_version,
            config,
            initial_chain: chain.ok_or_else(|| missing("initial_chain"))?,
        })
    }
}

/// File contents of a model directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFiles {
    pub tagset: String,
    pub lexicon: String,
    pub lexical_rules: String,
    pub contextual_rules: String,
    pub manifest: String,
}

impl ModelFiles {
    /// The manifest's chain is taken from the model.
    pub fn render(model: &TaggerModel, config: &TrainConfig) -> ModelFiles {
        let tagset = model.tagset();
        ModelFiles {
            tagset: tagset.to_config(),
            lexicon: serialize_lexicon(model.lexicon(), tagset),
            lexical_rules: serialize_lexical_rules(model.lexical_rules(), tagset),
            contextual_rules: serialize_contextual_rules(model.contextual_rules(), tagset),
            manifest: Manifest::new(config.clone(), model.initial_chain().clone()).to_text(),
        }
    }

    pub fn parse(&self) -> Result<(TaggerModel, Manifest), ModelError> {
        let manifest = Manifest::parse(&self.manifest).map_err(in_file(MANIFEST_FILE))?;
        let tagset = Arc::new(load_tagset(&self.tagset).map_err(in_file(TAGSET_FILE))?);
        let lexicon = parse_lexicon(&self.lexicon, &tagset).map_err(in_file(LEXICON_FILE))?;
        let max_affix = manifest.config.max_affix_len;
        let lexical =
            parse_rules(&self.lexical_rules, &tagset, max_affix).map_err(in_file(LEXRULES_FILE))?;
        if !lexical.contextual.is_empty() {
            return Err(in_file(LEXRULES_FILE)(Error::Config(
                "contextual rule in lexical rule file".into(),
            )));
        }
        let contextual = parse_rules(&self.contextual_rules, &tagset, max_affix)
            .map_err(in_file(CTXRULES_FILE))?;
        if !contextual.lexical.is_empty() {
            return Err(in_file(CTXRULES_FILE)(Error::Config(
                "lexical rule in contextual rule file".into(),
            )));
        }
        let model = TaggerModel::new(
            tagset,
            lexicon,
            manifest.initial_chain.clone(),
            lexical.lexical,
            contextual.contextual,
        )
        .map_err(in_file(MANIFEST_FILE))?;
        Ok((model, manifest))
    }

    fn entries(&self) -> [(&'static str, &str); 5] {
        [
            (TAGSET_FILE, &self.tagset),
            (LEXICON_FILE, &self.lexicon),
            (LEXRULES_FILE, &self.lexical_rules),
            (CTXRULES_FILE, &self.contextual_rules),
            (MANIFEST_FILE, &self.manifest),
        ]
    }

    pub fn read(dir: &Path) -> Result<ModelFiles, ModelError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(io_err(&path))
        };
        Ok(ModelFiles {
            tagset: read(TAGSET_FILE)?,
            lexicon: read(LEXICON_FILE)?,
            lexical_rules: read(LEXRULES_FILE)?,
            contextual_rules: read(CTXRULES_FILE)?,
            manifest: read(MANIFEST_FILE)?,
        })
    }

    /// Writes into a sibling temporary directory and renames it into place.
    /// An existing `dir` is replaced only if it is empty or holds a model.
    pub fn write_atomic(&self, dir: &Path) -> Result<(), ModelError> {
        let name = dir
            .file_name()
            .ok_or_else(|| ModelError::Io {
                path: dir.to_owned(),
                source: io::Error::new(io::ErrorKind::InvalidInput, "not a directory name"),
            })?
            .to_string_lossy()
            .into_owned();
        let parent = match dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_owned(),
            _ => PathBuf::from("."),
        };
        let pid = std::process::id();
        let tmp = parent.join(format!(".{name}.tmp-{pid}"));
        let old = parent.join(format!(".{name}.old-{pid}"));

        if dir.exists() {
            let replaceable = dir.is_dir()
                && fs::read_dir(dir).map_err(io_err(dir))?.all(|e| {
                    e.is_ok_and(|e| MODEL_FILES.contains(&e.file_name().to_string_lossy().as_ref()))
                });
            if !replaceable {
                return Err(ModelError::Io {
                    path: dir.to_owned(),
                    source: io::Error::new(
                        io::ErrorKind::AlreadyExists,
                        "exists and does not look like a model directory",
                    ),
                });
            }
        }
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
        }
        let result = (|| {
            fs::create_dir_all(&tmp).map_err(io_err(&tmp))?;
            for (file, text) in self.entries() {
                let path = tmp.join(file);
                fs::write(&path, text).map_err(io_err(&path))?;
            }
            if dir.exists() {
                fs::rename(dir, &old).map_err(io_err(dir))?;
                if let Err(e) = fs::rename(&tmp, dir) {
                    let _ = fs::rename(&old, dir);
                    return Err(io_err(dir)(e));
                }
                fs::remove_dir_all(&old).map_err(io_err(&old))
            } else {
                fs::rename(&tmp, dir).map_err(io_err(dir))
            }
        })();
        if result.is_err() {
            let _ = fs::remove_dir_all(&tmp);
        }
        result
    }
}

pub fn save_model(dir: &Path, model: &TaggerModel, config: &TrainConfig) -> Result<(), ModelError> {
    ModelFiles::render(model, config).write_atomic(dir)
}

pub fn load_model(dir: &Path) -> Result<(TaggerModel, Manifest), ModelError> {
    ModelFiles::read(dir)?.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tagged_corpus;
    use crate::corpus::tests::toy_tagset;
    use crate::learner::train_model;

    fn trained() -> (TaggerModel, TrainConfig) {
        let corpus = parse_tagged_corpus(
            "the/AT dog/NN ./PUNCT\nthe/AT cat/NN ./PUNCT\na/AT dogs/NN ./PUNCT\nthe/AT cats/NN ./PUNCT",
            toy_tagset(),
        )
        .unwrap();
        let config = TrainConfig {
            score_threshold: 1,
            seed: 3,
            ..TrainConfig::default()
        };
        (
            train_model(&corpus, &InitialRuleChain::greek(), &config)
                .unwrap()
                .model,
            config,
        )
    }

    #[test]
    fn manifest_round_trip() {
        let m = Manifest::new(
            TrainConfig {
                max_rules_per_phase: Some(7),
                lexicon_split_fraction: 0.3,
                ..TrainConfig::default()
            },
            InitialRuleChain::greek(),
        );
        assert_eq!(Manifest::parse(&m.to_text()).unwrap(), m);
        assert!(m.to_text().contains(
            "initial_chain STARTS_LATIN:FOREIGN STARTS_GREEK_CAPITAL:PROPER_MASC_SG ALWAYS:NOUN_FEM_SG"
        ));
    }

    #[test]
    fn manifest_rejects_gaps_and_repeats() {
        let text = Manifest::new(TrainConfig::default(), InitialRuleChain::greek()).to_text();
        let without_seed: String = text
            .lines()
            .filter(|l| !l.starts_with("seed"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(Manifest::parse(&without_seed).is_err());
        assert!(Manifest::parse(&format!("{text}seed 1\n")).is_err());
        assert!(Manifest::parse(&text.replace("format_version 1", "format_version 2")).is_err());
        assert!(Manifest::parse(&format!("{text}extra 1\n")).is_err());
    }

    #[test]
    fn directory_round_trip_and_replace() {
        let (model, config) = trained();
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("model");
        save_model(&dir, &model, &config).unwrap();
        let (loaded, manifest) = load_model(&dir).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(manifest.config, config);
        save_model(&dir, &model.baseline(), &config).unwrap();
        assert_eq!(load_model(&dir).unwrap().0, model.baseline());
        let names: Vec<_> = fs::read_dir(tmp.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec![std::ffi::OsString::from("model")]);
    }

    #[test]
    fn refuses_to_clobber_foreign_directory() {
        let (model, config) = trained();
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("notes.txt"), "keep me").unwrap();
        assert!(save_model(tmp.path(), &model, &config).is_err());
        assert!(tmp.path().join("notes.txt").exists());
    }

    #[test]
    fn rule_files_must_hold_their_own_kind() {
        let (model, config) = trained();
        let mut files = ModelFiles::render(&model, &config);
        files.lexical_rules.push_str("CTX PREVTAG NN AT PUNCT\n");
        assert!(matches!(
            files.parse(),
            Err(ModelError::Format {
                file: LEXRULES_FILE,
                ..
            })
        ));
    }
}
