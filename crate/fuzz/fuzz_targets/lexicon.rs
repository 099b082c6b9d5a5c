#![no_main]

use libfuzzer_sys::fuzz_target;
use tbed::corpus::load_tagset;
use tbed::lexicon::{parse_lexicon, serialize_lexicon};

const TAGSET: &str = "tag AT\ntag NN\ntag VB\ntag FW\ntag NP\n\
role FOREIGN FW\nrole PROPER_MASC_SG NP\nrole NOUN_FEM_SG NN\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let tagset = load_tagset(TAGSET).unwrap();
    if let Ok(lexicon) = parse_lexicon(text, &tagset) {
        let again = parse_lexicon(&serialize_lexicon(&lexicon, &tagset), &tagset).unwrap();
        assert_eq!(again, lexicon);
    }
});
