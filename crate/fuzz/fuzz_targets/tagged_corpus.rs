#![no_main]

use std::sync::Arc;

use libfuzzer_sys::fuzz_target;
use tbed::corpus::{load_tagset, parse_tagged_corpus, serialize_tagged_corpus};

const TAGSET: &str = "tag AT\ntag NN\ntag VB\ntag FW\ntag NP\n\
role FOREIGN FW\nrole PROPER_MASC_SG NP\nrole NOUN_FEM_SG NN\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let tagset = Arc::new(load_tagset(TAGSET).unwrap());
    if let Ok(corpus) = parse_tagged_corpus(text, tagset.clone()) {
        let again = parse_tagged_corpus(&serialize_tagged_corpus(&corpus), tagset).unwrap();
        assert_eq!(again, corpus);
    }
});
