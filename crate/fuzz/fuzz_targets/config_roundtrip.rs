#![no_main]

use libfuzzer_sys::fuzz_target;
use rgflow::experiments::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse(text) else {
        return;
    };
    let printed = cfg.to_string();
    let again = RunConfig::parse(&printed).expect("printed config parses");
    assert_eq!(again, cfg);
    assert_eq!(again.to_string(), printed);
});
