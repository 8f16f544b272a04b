#![no_main]

use libfuzzer_sys::fuzz_target;
use rekit::model::parse_composition;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ids) = parse_composition(text) {
        assert!(!ids.is_empty());
        assert!(ids.iter().all(|id| !id.is_empty()));
        assert_eq!(
            parse_composition(&ids.join("*")).expect("joined ids parse"),
            ids
        );
    }
});
