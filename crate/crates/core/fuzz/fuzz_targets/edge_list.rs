#![no_main]

use clbic::io::{format_edge_list, memory_path, parse_edge_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(g) = parse_edge_list(text, &memory_path()) {
        let again = parse_edge_list(&format_edge_list(&g), &memory_path()).unwrap();
        assert_eq!(again.adjacency.edge_count(), g.adjacency.edge_count());
    }
});
