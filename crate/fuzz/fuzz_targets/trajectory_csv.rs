#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(scenarios) = sgsfm::data::read_dataset(data, 0.5) {
        for sc in &scenarios {
            for agent in &sc.agents {
                let headings = match agent.kind {
                    sgsfm::data::AgentKind::Vehicle => agent.positions.len(),
                    sgsfm::data::AgentKind::Pedestrian => 0,
                };
                assert_eq!(agent.headings.len(), headings);
            }
            for s in sgsfm::data::extract_samples(sc) {
                assert!(s.desired_speed > 0.0);
            }
        }
    }
});
