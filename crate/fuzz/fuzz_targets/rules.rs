#![no_main]

use libfuzzer_sys::fuzz_target;
use tbed::corpus::load_tagset;
use tbed::rules::{parse_rules, serialize_rules};

const TAGSET: &str = "tag AT\ntag NN\ntag VB\ntag FW\ntag NP\n\
role FOREIGN FW\nrole PROPER_MASC_SG NP\nrole NOUN_FEM_SG NN\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let tagset = load_tagset(TAGSET).unwrap();
    if let Ok(rules) = parse_rules(text, &tagset, 4) {
        let again = parse_rules(&serialize_rules(&rules, &tagset), &tagset, 4).unwrap();
        assert_eq!(again, rules);
    }
});
