#![no_main]

use libfuzzer_sys::fuzz_target;
use sgsfm::ParameterSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = ParameterSet::from_json_str(text) {
        let again = ParameterSet::from_json_str(&p.to_json_string()).expect("round trip");
        assert_eq!(again, p);
    }
});
