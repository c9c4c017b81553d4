#![no_main]

use clbic::bench::{format_bench_report, parse_bench_report};
use clbic::io::memory_path;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(r) = parse_bench_report(text, &memory_path()) {
        if let Ok(out) = format_bench_report(&r) {
            assert_eq!(parse_bench_report(&out, &memory_path()).unwrap(), r);
        }
    }
});
