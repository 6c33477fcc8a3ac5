//! Replays the fuzz corpus through the parsers on stable toolchains.

use std::fs;
use std::path::PathBuf;

use hycast::geomsim::PointList;
use hycast::scenario::{Policy, Scenario};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn scenario_seeds() {
    for (name, data) in seeds("scenario_json") {
        let text = String::from_utf8(data).unwrap();
        match Scenario::from_json_str(&text) {
            Ok(s) => assert_eq!(Scenario::from_json_str(&s.to_json_string()).unwrap(), s, "{name}"),
            Err(e) => assert!(e.is_input_error(), "{name}: {e}"),
        }
    }
}

#[test]
fn policy_seeds() {
    let s = Scenario::reference();
    let mut valid = 0;
    for (name, data) in seeds("policy_json") {
        let policy = Policy::from_json_str(std::str::from_utf8(&data).unwrap()).unwrap();
        match policy.validate(&s) {
            Ok(()) => valid += 1,
            Err(e) => assert!(e.is_input_error(), "{name}: {e}"),
        }
    }
    assert!(valid >= 1);
}

#[test]
fn point_list_seeds() {
    for (name, data) in seeds("point_list") {
        let text = String::from_utf8_lossy(&data);
        if let Ok(list) = text.parse::<PointList>() {
            assert_eq!(list.to_string().parse::<PointList>().unwrap(), list, "{name}");
        }
    }
    let mixed: PointList = fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/point_list/mixed.txt"),
    )
    .unwrap()
    .parse()
    .unwrap();
    assert_eq!(mixed.points.len(), 3);
}
