#![no_main]

use clbic::io::{memory_path, parse_weight_matrix, weights_to_adjacency, QuantileConvention};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(w) = parse_weight_matrix(text, &memory_path()) {
        assert_eq!(w.names.len(), w.n());
        if w.n() >= 2 {
            for conv in [QuantileConvention::Lower, QuantileConvention::Linear, QuantileConvention::Higher] {
                if let Ok(a) = weights_to_adjacency(&w, 0.5, conv) {
                    assert_eq!(a.n(), w.n());
                }
            }
        }
    }
});
