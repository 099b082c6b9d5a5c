#![no_main]

use libfuzzer_sys::fuzz_target;
use tbed::synth::SynthSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = SynthSpec::parse(text) {
        assert_eq!(SynthSpec::parse(&spec.to_text()).unwrap(), spec);
    }
});
