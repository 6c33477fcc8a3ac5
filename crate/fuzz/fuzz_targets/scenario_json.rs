#![no_main]
use hycast::scenario::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(s) = Scenario::from_json_str(data) {
        let again = Scenario::from_json_str(&s.to_json_string()).expect("valid scenario re-parses");
        assert_eq!(s, again);
    }
});
