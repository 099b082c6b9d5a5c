#![no_main]

use libfuzzer_sys::fuzz_target;
use tbed::model::Manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(manifest) = Manifest::parse(text) {
        assert_eq!(Manifest::parse(&manifest.to_text()).unwrap(), manifest);
    }
});
