#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // First byte picks the universe size, the rest is the JSON text.
    let Some((&first, rest)) = data.split_first() else { return };
    let size = (first as usize % 8) + 1;
    if let Ok(text) = std::str::from_utf8(rest) {
        let domain = ["x".to_string(), "y".to_string()];
        if let Ok(team) = deplog::structure::load_team(text, &domain, size) {
            for row in &team.rows {
                assert!(row.values().all(|&v| v < size));
            }
        }
    }
});
