#![no_main]

use libfuzzer_sys::fuzz_target;
use rekit::model::MultisetEstimate;

fuzz_target!(|data: &[u8]| {
    let Some((&levels, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let levels = usize::from(levels % 8) + 1;
    if let Ok(e) = MultisetEstimate::parse(text, levels) {
        assert_eq!(e.counts.len(), levels);
        let again =
            MultisetEstimate::parse(&e.to_string(), levels).expect("printed estimate parses");
        assert_eq!(again, e);
        let _ = e.chain_index();
    }
});
