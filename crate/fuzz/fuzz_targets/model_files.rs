#![no_main]

use libfuzzer_sys::fuzz_target;
use tbed::model::ModelFiles;

// Input holds the five files separated by NUL bytes, in the order
// TAGSET, LEXICON, LEXRULES, CTXRULES, MANIFEST.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let parts: Vec<&str> = text.split('\0').collect();
    let [tagset, lexicon, lexical_rules, contextual_rules, manifest] = parts[..] else {
        return;
    };
    let files = ModelFiles {
        tagset: tagset.into(),
        lexicon: lexicon.into(),
        lexical_rules: lexical_rules.into(),
        contextual_rules: contextual_rules.into(),
        manifest: manifest.into(),
    };
    if let Ok((model, manifest)) = files.parse() {
        let rendered = ModelFiles::render(&model, &manifest.config);
        let (again, _) = rendered.parse().unwrap();
        assert_eq!(again, model);
    }
});
