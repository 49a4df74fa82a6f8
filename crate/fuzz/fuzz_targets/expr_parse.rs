#![no_main]

use bilevel_core::expr::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse(text, 2, 2) {
        // printing and reparsing must round-trip
        let again = parse(&e.to_string(), 2, 2).expect("display output parses");
        assert_eq!(again.to_string(), e.to_string());
    }
});
