#![no_main]

use libfuzzer_sys::fuzz_target;

use tloss_core::report::{emit_records, parse_records};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_records(text) {
        let emitted = emit_records(&records);
        if let Ok(reparsed) = parse_records(&emitted) {
            if reparsed == records {
                assert_eq!(emit_records(&reparsed), emitted);
            }
        }
    }
});
