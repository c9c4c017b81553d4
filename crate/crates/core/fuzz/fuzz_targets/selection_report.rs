#![no_main]

use clbic::io::{format_selection_report, memory_path, parse_selection_report};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(r) = parse_selection_report(text, &memory_path()) {
        if let Ok(out) = format_selection_report(&r) {
            assert_eq!(parse_selection_report(&out, &memory_path()).unwrap(), r);
        }
    }
});
