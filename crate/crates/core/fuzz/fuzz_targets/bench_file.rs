#![no_main]

use clbic::io::{format_bench_file, memory_path, parse_bench_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(f) = parse_bench_file(text, &memory_path()) {
        let out = format_bench_file(&f).unwrap();
        assert_eq!(parse_bench_file(&out, &memory_path()).unwrap(), f);
    }
});
