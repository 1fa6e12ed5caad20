#![no_main]

use libfuzzer_sys::fuzz_target;
use polyhho::scenario::Expr;

fuzz_target!(|data: &[u8]| {
    if let Ok(src) = std::str::from_utf8(data) {
        if let Ok(e) = Expr::parse(src) {
            let _ = e.eval([0.25, 0.75]);
            let _ = e.is_constant();
        }
    }
});
