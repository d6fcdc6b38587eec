#![no_main]

use libfuzzer_sys::fuzz_target;
use sgsfm::simulator::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::from_json_str(text) {
        let _ = cfg.step_count();
        ScenarioConfig::from_json_str(&cfg.to_json_string()).expect("round trip");
    }
});
