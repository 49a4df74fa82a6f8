#![no_main]

use bilevel_core::cli::ReportFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ReportFile::from_json(text);
    }
});
