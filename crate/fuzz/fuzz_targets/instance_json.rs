#![no_main]

use libfuzzer_sys::fuzz_target;
use rekit::instance::parse_instance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = parse_instance(text) {
        let again = parse_instance(&inst.to_json()).expect("serialized instance parses");
        assert_eq!(again, inst);
    }
});
