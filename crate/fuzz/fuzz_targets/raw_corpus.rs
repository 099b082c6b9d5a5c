#![no_main]

use libfuzzer_sys::fuzz_target;
use tbed::corpus::parse_raw_corpus;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let sentences = parse_raw_corpus(text);
    let rendered: String = sentences
        .iter()
        .map(|s| s.words().collect::<Vec<_>>().join(" ") + "\n")
        .collect();
    assert_eq!(parse_raw_corpus(&rendered), sentences);
});
