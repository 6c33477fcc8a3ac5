#![no_main]
use hycast_cli::range::{SweepRange, MAX_POINTS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    for parsed in [SweepRange::parse_linear(data), SweepRange::parse_log(data)] {
        if let Ok(range) = parsed {
            // Empty is allowed; unbounded or non-finite is not.
            let points = range.points();
            assert!(points.len() <= MAX_POINTS + 1);
            assert!(points.iter().all(|v| v.is_finite()));
        }
    }
});
