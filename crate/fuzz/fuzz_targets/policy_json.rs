#![no_main]
use hycast::scenario::{Policy, Scenario};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(policy) = Policy::from_json_str(data) {
        // Validation must reject, never panic, whatever the shape.
        let _ = policy.validate(&Scenario::reference());
    }
});
