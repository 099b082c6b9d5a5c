#![no_main]

use libfuzzer_sys::fuzz_target;
use tbed::corpus::load_tagset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tagset) = load_tagset(text) {
        assert_eq!(load_tagset(&tagset.to_config()).unwrap(), tagset);
    }
});
