#![no_main]

use deplog::syntax::{parse_formula, pretty_print};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = parse_formula(text) {
            let printed = pretty_print(&f);
            let again = parse_formula(&printed).expect("printed formula reparses");
            assert_eq!(f, again, "printing must read back to the same tree");
        }
    }
});
