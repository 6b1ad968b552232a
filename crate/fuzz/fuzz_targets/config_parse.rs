#![no_main]

use libfuzzer_sys::fuzz_target;
use rgflow::experiments::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Err(e) = RunConfig::parse(text) {
            // errors point at a real line, or 0 for whole-file checks
            assert!(e.line <= text.lines().count());
        }
    }
});
