#![no_main]

use libfuzzer_sys::fuzz_target;
use polyhho::scenario::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let strict = parse_config(text, true);
    if let Ok((cfg, _)) = parse_config(text, false) {
        let _ = cfg.law();
        let _ = cfg.load_source();
        let _ = cfg.newton_options();
        let _ = cfg.boundary_data();
    } else {
        assert!(strict.is_err());
    }
});
