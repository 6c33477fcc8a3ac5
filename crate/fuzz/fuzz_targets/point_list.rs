#![no_main]
use hycast::geomsim::PointList;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(list) = text.parse::<PointList>() {
        let again: PointList = list.to_string().parse().expect("dump re-parses");
        assert_eq!(list, again);
    }
});
