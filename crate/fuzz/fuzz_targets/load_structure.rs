#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = deplog::structure::load_structure(text) {
            // Built-ins must come out consistent with the universe size.
            assert!(s.size >= 1);
            let succ = s.rel(deplog::syntax::SUCC).expect("succ is always present");
            assert_eq!(succ.len(), s.size - 1);
            assert_eq!(s.constants["max"], s.size - 1);
            assert_eq!(s.constants["0"], 0);
        }
    }
});
