#![no_main]

use deplog::translate::parse_esohorn;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(sentence) = parse_esohorn(text) {
            // Accepted sentences print back to an equal sentence.
            let printed = sentence.to_string();
            let again = parse_esohorn(&printed).expect("printed sentence reparses");
            assert_eq!(sentence, again);
        }
    }
});
